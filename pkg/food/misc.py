# -*- coding: utf-8 -*-
""" misc

Misc. functions.
"""

import time
from concurrent.futures import ThreadPoolExecutor

def elapsed(t0,t1=None):
    """ time elapsed since t0 with in nice format

    Args:

        t0 (double): start time (time.perf_counter() or time.time() scale)
        t1 (double,optional): end time (else now on the time.time() scale)

    Return:

        (str): elapsed time in nice format

    """ 

    if t1 is None:
        secs = time.time()-t0
    else:
        secs = t1-t0

    days = secs//(60*60*24)
    secs -= 60*60*24*days

    hours = secs//(60*60)
    secs -= 60*60*hours

    mins = secs//(60)
    secs -= 60*mins
   
    text = ''
    if days > 0: text += f'{days:.0f} days '
    if hours > 0: text += f'{hours:.0f} hours '
    if mins > 0: text += f'{mins:.0f} mins '

    if days > 0 or hours > 0:
        pass
    elif mins > 0:
        text += f'{secs:.0f} secs '
    else:
        text = f'{secs:.1f} secs '

    return text[:-1]

def chunks(n,size):
    """ consecutive (start,stop) index pairs covering range(n)

    Args:

        n (int): number of items
        size (int): chunk size

    Returns:

        (list): list of (start,stop) tuples

    """

    assert size >= 1
    return [(start,min(start+size,n)) for start in range(0,n,size)]

def parallel_map(func,items,threads=1):
    """ map func over items, optionally on a thread pool

    The output order always follows the input order, so results do not
    depend on the number of threads.

    Args:

        func (callable): function of one item
        items (list): items
        threads (int,optional): number of worker threads (1 = inline)

    Returns:

        (list): [func(item) for item in items]

    """

    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func,items))
