# -*- coding: utf-8 -*-
"""rawfile

Reader and writer for FOODRAW1 frame files.

Layout (little-endian):

    magic "FOODRAW1" (8 bytes) | u32 version=1 | u32 frame_count | u8 n_rx |
    u8 reserved | u16 n_chirps | u16 n_samples |
    frame_count x ( u8 label | n_rx*n_chirps*n_samples u16 codes )

Labels are 0,1,2 = PER1,PER2,PER3, 3 = OOD and 255 = unlabeled. Adapters for
other recording formats convert into a Dataset and call save_dataset.
"""

import logging
import os
import struct

import numpy as np

from .dataset import ADC_MAX, Dataset, Label
from .errors import DataError, FormatError

logger = logging.getLogger(__name__)

MAGIC = b'FOODRAW1'
VERSION = 1
HEADER = struct.Struct('<8sIIBBHH')
VALID_LABELS = frozenset(int(label) for label in Label)

def record_dtype(n_rx,n_chirps,n_samples):
    """ packed numpy dtype of one frame record """

    return np.dtype([('label','u1'),('codes','<u2',(n_rx,n_chirps,n_samples))])

def save_dataset(path,dataset):
    """ write a dataset as FOODRAW1

    Args:

        path (str): output file
        dataset (Dataset): frames

    """

    n_rx,n_chirps,n_samples = dataset.frame_shape
    if dataset.codes.size and dataset.codes.max() > ADC_MAX:
        raise DataError(f'codes outside the 12-bit range [0,{ADC_MAX}]')

    records = np.empty(len(dataset),dtype=record_dtype(n_rx,n_chirps,n_samples))
    records['label'] = dataset.labels
    records['codes'] = dataset.codes

    with open(path,'wb') as f:
        f.write(HEADER.pack(MAGIC,VERSION,len(dataset),n_rx,0,n_chirps,n_samples))
        f.write(records.tobytes())

    logger.debug('wrote %d frames to %s',len(dataset),path)

def load_dataset(path):
    """ read a FOODRAW1 file

    Args:

        path (str): input file

    Returns:

        (Dataset): frames

    """

    if not os.path.isfile(path):
        raise DataError(f'{path}: no such file')

    with open(path,'rb') as f:
        buf = f.read()

    return parse(buf,path)

def parse(buf,name='<buffer>'):
    """ decode the bytes of a FOODRAW1 file into a Dataset """

    # a. header
    if len(buf) == 0:
        raise FormatError(f'{name}: empty file')
    if len(buf) < HEADER.size:
        raise FormatError(f'{name}: truncated header ({len(buf)} of {HEADER.size} bytes)')

    magic,version,count,n_rx,_reserved,n_chirps,n_samples = HEADER.unpack_from(buf,0)
    if magic != MAGIC:
        raise FormatError(f'{name}: bad magic {magic!r}, expected {MAGIC!r}')
    if version != VERSION:
        raise FormatError(f'{name}: unsupported version {version}')

    # b. frame records
    dtype = record_dtype(n_rx,n_chirps,n_samples)
    available = len(buf)-HEADER.size
    if available < count*dtype.itemsize:
        complete = available//dtype.itemsize
        offset = HEADER.size+complete*dtype.itemsize
        raise FormatError(f'{name}: header advertises {count} frames but frame {complete} at offset {offset} is truncated ({len(buf)} bytes in file)')
    if available > count*dtype.itemsize:
        raise FormatError(f'{name}: {available-count*dtype.itemsize} trailing bytes after {count} frames')

    if count == 0:
        return Dataset(np.zeros((0,n_rx,n_chirps,n_samples),dtype=np.uint16),np.zeros(0,dtype=np.uint8))

    records = np.frombuffer(buf,dtype=dtype,count=count,offset=HEADER.size)
    labels = records['label'].copy()
    codes = records['codes'].astype(np.uint16)

    # c. content checks
    bad = np.flatnonzero(~np.isin(labels,list(VALID_LABELS)))
    if bad.size:
        raise FormatError(f'{name}: invalid label {labels[bad[0]]} in frame {bad[0]}')

    if codes.size:
        over = np.flatnonzero(codes.reshape(count,-1).max(axis=1) > ADC_MAX)
        if over.size:
            raise FormatError(f'{name}: frame {over[0]} has codes outside the 12-bit range')

    return Dataset(codes,labels)
