# -*- coding: utf-8 -*-
"""checkpoint

FOODMDL1 model container. Layout (little-endian):

    magic "FOODMDL1" | u32 version=1 | u32 epoch |
    u32 n | n bytes of configuration text (utf-8, config.dumps) |
    u32 n_params | n_params x ( u16 n | name | u8 ndim | ndim x u32 dims | f32 data ) |
    u8 has_optimizer | [ 4 x f64 alpha,beta1,beta2,eps | u64 t | n_params x ( f32 m | f32 u ) ] |
    u8 has_thresholds | [ u32 k | k x f64 tau | k x u32 counts | k x f64 achieved | f64 coverage ]

Parameters and optimizer moments are stored as float32, so saving and loading
a float32 model is bit-exact.
"""

import logging
import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from . import config as runconfig
from .adamax import AdamaxConfig, AdamaxState
from .detect import ThresholdSet
from .errors import ConfigError, DataError, FormatError, NumericError
from .model import FoodModel, parameter_specs
from .tensor import Tensor

logger = logging.getLogger(__name__)

MAGIC = b'FOODMDL1'
VERSION = 1

@dataclass
class Checkpoint:
    """ a trained (and possibly calibrated) model with everything needed to resume """

    config: object
    model: FoodModel
    optimizer: AdamaxState = None
    thresholds: ThresholdSet = None
    epoch: int = 0

###########
# writing #
###########

def _f32(array):
    return np.ascontiguousarray(array,dtype='<f4').tobytes()

def dumps(ckpt):
    """ bytes of a FOODMDL1 container """

    parts = [MAGIC,struct.pack('<II',VERSION,ckpt.epoch)]

    text = runconfig.dumps(ckpt.config).encode('utf-8')
    parts += [struct.pack('<I',len(text)),text]

    # a. parameters
    params = ckpt.model.params
    parts.append(struct.pack('<I',len(params)))
    for name,p in params.items():
        raw = name.encode('utf-8')
        parts += [struct.pack('<H',len(raw)),raw,struct.pack(f'<B{p.ndim}I',p.ndim,*p.shape),_f32(p.data)]

    # b. optimizer
    state = ckpt.optimizer
    if state is None:
        parts.append(b'\x00')
    else:
        c = state.config
        parts += [b'\x01',struct.pack('<4dQ',c.alpha,c.beta1,c.beta2,c.eps,state.t)]
        for name in params:
            parts += [_f32(state.m[name]),_f32(state.u[name])]

    # c. thresholds
    th = ckpt.thresholds
    if th is None:
        parts.append(b'\x00')
    else:
        k = len(th.tau)
        parts += [b'\x01',struct.pack(f'<I{k}d{k}I{k}dd',k,*th.tau,*th.counts,*th.achieved,th.coverage)]

    return b''.join(parts)

def save_checkpoint(path,ckpt):
    """ write a checkpoint (via a temporary file, so an interrupted save keeps the old one) """

    tmp = f'{path}.tmp'
    with open(tmp,'wb') as f:
        f.write(dumps(ckpt))
    os.replace(tmp,path)

    logger.debug('saved checkpoint at epoch %d to %s',ckpt.epoch,path)

###########
# reading #
###########

class _Reader:
    """ cursor over the container bytes; every read checks the remaining length """

    def __init__(self,buf,name):
        self.buf = buf
        self.name = name
        self.offset = 0

    def take(self,n,what):
        if self.offset+n > len(self.buf):
            raise FormatError(f'{self.name}: truncated {what} at offset {self.offset} ({len(self.buf)} bytes in file)')
        out = self.buf[self.offset:self.offset+n]
        self.offset += n
        return out

    def unpack(self,fmt,what):
        s = struct.Struct('<'+fmt)
        return s.unpack(self.take(s.size,what))

    def f32(self,shape,what):
        n = math.prod(shape)
        return np.frombuffer(self.take(4*n,what),dtype='<f4').reshape(shape).astype(np.float32)

    def flag(self,what):
        (value,) = self.unpack('B',what)
        if value not in (0,1):
            raise FormatError(f'{self.name}: invalid {what} flag {value} at offset {self.offset-1}')
        return value == 1

def loads(buf,name='<buffer>'):
    """ decode the bytes of a FOODMDL1 container into a Checkpoint """

    r = _Reader(buf,name)

    # a. header and configuration
    if len(buf) == 0:
        raise FormatError(f'{name}: empty file')
    magic = r.take(len(MAGIC),'magic')
    if magic != MAGIC:
        raise FormatError(f'{name}: bad magic {magic!r}, expected {MAGIC!r}')
    version,epoch = r.unpack('II','header')
    if version != VERSION:
        raise FormatError(f'{name}: unsupported version {version}')

    (n,) = r.unpack('I','configuration length')
    try:
        cfg = runconfig.loads(r.take(n,'configuration').decode('utf-8'))
    except (ConfigError,UnicodeDecodeError) as e:
        raise FormatError(f'{name}: invalid configuration block: {e}') from None

    # b. parameters
    specs = [(spec_name,shape) for spec_name,shape,_,_ in parameter_specs(cfg.model)]
    (n_params,) = r.unpack('I','parameter count')
    if n_params != len(specs):
        raise FormatError(f'{name}: {n_params} parameters stored, the configured network has {len(specs)}')

    params = {}
    for spec_name,spec_shape in specs:
        (n,) = r.unpack('H','parameter name length')
        param_name = r.take(n,'parameter name').decode('utf-8',errors='replace')
        (ndim,) = r.unpack('B',f'{param_name} rank')
        shape = r.unpack(f'{ndim}I',f'{param_name} shape')
        if param_name != spec_name or tuple(shape) != tuple(spec_shape):
            raise FormatError(f'{name}: parameter {param_name} {shape} does not match {spec_name} {spec_shape}')
        try:
            params[param_name] = Tensor(r.f32(shape,param_name),requires_grad=True)
        except NumericError:
            raise FormatError(f'{name}: parameter {param_name} holds non-finite values') from None

    model = FoodModel(cfg.model,params)

    # c. optimizer
    state = None
    if r.flag('optimizer'):
        alpha,beta1,beta2,eps,t = r.unpack('4dQ','optimizer header')
        m,u = {},{}
        for param_name,p in params.items():
            m[param_name] = r.f32(p.shape,f'{param_name} first moment')
            u[param_name] = r.f32(p.shape,f'{param_name} infinity norm')
        state = AdamaxState(AdamaxConfig(alpha,beta1,beta2,eps),m,u,t)

    # d. thresholds
    thresholds = None
    if r.flag('thresholds'):
        (k,) = r.unpack('I','threshold count')
        values = r.unpack(f'{k}d{k}I{k}dd','thresholds')
        thresholds = ThresholdSet(tuple(values[:k]),tuple(values[k:2*k]),tuple(values[2*k:3*k]),values[3*k])

    if r.offset != len(buf):
        raise FormatError(f'{name}: {len(buf)-r.offset} trailing bytes at offset {r.offset}')

    return Checkpoint(cfg,model,state,thresholds,epoch)

def load_checkpoint(path):
    """ read a FOODMDL1 file

    Args:

        path (str): input file

    Returns:

        (Checkpoint): checkpoint

    """

    if not os.path.isfile(path):
        raise DataError(f'{path}: no such file')

    with open(path,'rb') as f:
        buf = f.read()

    return loads(buf,path)
