# -*- coding: utf-8 -*-
"""tensor

Dense tensors with reverse-mode automatic differentiation.

Every differentiable operation wraps its numpy result with record(), which
stores a node in the autodiff graph when any input requires gradients.
Nodes are numbered in execution order; backward() visits the nodes reachable
from a scalar loss exactly once, in reverse execution order.
"""

import itertools
import logging
import threading

import numpy as np

from .errors import NumericError, ShapeError

logger = logging.getLogger(__name__)

_local = threading.local()
_sequence = itertools.count()

DTYPES = (np.float32,np.float64)

#############
# grad mode #
#############

def is_grad_enabled():
    """ whether operations on the current thread record graph nodes """

    return getattr(_local,'grad_enabled',True)

class no_grad:
    """ context manager that disables graph recording on the current thread

    Usage:

        with no_grad():
            y = layers.linear(x,w,b) # y.requires_grad is False

    """

    def __enter__(self):
        self.prev = is_grad_enabled()
        _local.grad_enabled = False
        return self

    def __exit__(self,*exc):
        _local.grad_enabled = self.prev
        return False

##########
# tensor #
##########

class Node:
    """ one executed operation in the autodiff graph """

    __slots__ = ('seq','name','inputs','backward_fn')

    def __init__(self,name,inputs,backward_fn):
        self.seq = next(_sequence)
        self.name = name
        self.inputs = inputs
        self.backward_fn = backward_fn

class Tensor:
    """ dense n-dimensional float array with an optional gradient

    Args:

        data (array_like): values, stored contiguously as float32 (or float64
            if data is a float64 numpy array or dtype=np.float64); python
            scalars and lists become float32, 0-d input stays 0-d
        requires_grad (bool,optional): accumulate gradients in backward()
        dtype (np.dtype,optional): np.float32 or np.float64

    """

    def __init__(self,data,requires_grad=False,dtype=None):

        arr = np.asarray(data)
        if dtype is None:
            keep = isinstance(data,(np.ndarray,np.generic)) and arr.dtype == np.float64
            dtype = np.float64 if keep else np.float32
        if dtype not in DTYPES:
            raise TypeError(f'unsupported tensor dtype {dtype}')

        self.data = np.require(arr,dtype=dtype,requirements=['C'])
        if not np.all(np.isfinite(self.data)):
            raise NumericError('tensor created from non-finite values')

        self.grad = None
        self.requires_grad = requires_grad
        self.node = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self):
        """ value of a one-element tensor as a python float """

        if self.size != 1:
            raise ShapeError(f'item() needs a one-element tensor, got shape {self.shape}')
        return float(self.data.reshape(-1)[0])

    def numpy(self):
        return self.data

    def astype(self,dtype):
        """ new leaf tensor with the same values in another precision """

        return Tensor(self.data.astype(dtype),requires_grad=self.requires_grad,dtype=dtype)

    def accumulate(self,grad):
        """ add grad to the stored gradient (gradients sum over loss terms) """

        if grad.shape != self.shape:
            raise ShapeError(f'gradient shape {grad.shape} does not match tensor shape {self.shape}')
        if self.grad is None:
            self.grad = np.array(grad,dtype=self.dtype,copy=True)
        else:
            self.grad += grad

    def zero_grad(self):
        self.grad = None

    def backward(self):
        backward(self)

    def __add__(self,other):
        from .layers import add
        return add(self,other)

    def __repr__(self):
        grad = ', requires_grad=True' if self.requires_grad else ''
        return f'Tensor(shape={self.shape}, dtype={self.dtype.name}{grad})'

def record(name,data,inputs,backward_fn):
    """ wrap the output of an operation and record it in the graph

    Args:

        name (str): operation name (used in error messages)
        data (np.ndarray): forward result
        inputs (tuple): input tensors
        backward_fn (callable): maps the output gradient to a tuple with one
            gradient (np.ndarray or None) per input

    Returns:

        (Tensor): output tensor

    """

    if not np.all(np.isfinite(data)):
        raise NumericError(f'{name}: non-finite values in output')

    out = Tensor(data,dtype=data.dtype)
    if is_grad_enabled() and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out.node = Node(name,inputs,backward_fn)

    return out

############
# backward #
############

def backward(loss):
    """ populate .grad of every leaf tensor reachable from a scalar loss

    Gradients accumulate additively, so calling backward on several losses
    gives the same gradients as calling it once on their sum.

    Args:

        loss (Tensor): scalar tensor

    """

    if loss.size != 1:
        raise ShapeError(f'backward() needs a scalar loss, got shape {loss.shape}')
    if not loss.requires_grad:
        raise ShapeError('backward() on a tensor that does not require gradients')

    seed = np.ones(loss.shape,dtype=loss.dtype)
    if loss.node is None:
        loss.accumulate(seed)
        return

    # a. collect reachable nodes
    found = {}
    stack = [loss]
    while stack:
        t = stack.pop()
        if t.node is None or id(t) in found:
            continue
        found[id(t)] = t
        stack.extend(t.node.inputs)

    order = sorted(found.values(),key=lambda t: t.node.seq,reverse=True)

    # b. reverse sweep
    pending = {id(loss): seed}
    for t in order:

        grad = pending.pop(id(t),None)
        if grad is None:
            continue

        input_grads = t.node.backward_fn(grad)
        for inp,g in zip(t.node.inputs,input_grads):

            if g is None or not inp.requires_grad:
                continue

            if inp.node is None:
                inp.accumulate(g)
            elif id(inp) in pending:
                pending[id(inp)] = pending[id(inp)] + g
            else:
                pending[id(inp)] = g
