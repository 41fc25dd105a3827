# -*- coding: utf-8 -*-
"""model

The FOOD network: a shared convolutional encoder E, one transposed
convolutional decoder per enrolled class (the main part, MP), a linear
autoencoder on the encoder output (the common leaf, CL) and one linear
autoencoder per decoder on the activation entering its final layer (the
private leaves, PL).

Training minimizes the sum of seven reconstruction losses: MP_j on class-j
frames through decoder j, CL on the encoder output of every class and PL_j on
the pooled pre-final activation of decoder j. At test time a frame receives
OOD scores CL+PL_i and classification scores MP_i+PL_i for every class i.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import layers
from .conv import conv_out_size, conv_transpose_out_size
from .dataset import N_CLASSES, normalize_codes
from .errors import ConfigError, DataError, ShapeError
from .misc import chunks, parallel_map
from .tensor import Tensor, no_grad

logger = logging.getLogger(__name__)

LOSS_FIELDS = ('mp1','mp2','mp3','cl','pl1','pl2','pl3','total')

##########
# config #
##########

@dataclass
class FoodConfig:
    """ network layout

    encoder_channels: channel chain of the encoder, starting at the number of
        receivers; the decoders use the reversed chain
    kernel, stride, padding: shared by every (transposed) convolution
    cl_latent, pl_latent: latent sizes of the common and private leaves
    pl_pool_factor: average pooling of the private-leaf input (1 = flatten only)
    slope: leaky_relu slope of all hidden layers
    input_height, input_width: chirps x samples of the input frames
    seed: parameter initialization seed
    """

    encoder_channels: tuple = (3,16,32,64)
    kernel: int = 3
    stride: int = 2
    padding: int = 1
    cl_latent: int = 128
    pl_latent: int = 128
    pl_pool_factor: int = 4
    slope: float = 0.2
    input_height: int = 64
    input_width: int = 128
    seed: int = 0

    @property
    def n_layers(self):
        return len(self.encoder_channels)-1

    def spatial_sizes(self):
        """ (H,W) of the input and of every encoder layer output """

        sizes = [(self.input_height,self.input_width)]
        for _ in range(self.n_layers):
            h,w = sizes[-1]
            sizes.append((conv_out_size(h,self.kernel,self.stride,self.padding),conv_out_size(w,self.kernel,self.stride,self.padding)))

        return sizes

    def output_paddings(self):
        """ output_padding of every decoder layer (deepest first) so the decoders invert the encoder sizes """

        sizes = self.spatial_sizes()
        paddings = []
        for l in range(self.n_layers,0,-1):
            pads = []
            for n_in,n_out in zip(sizes[l],sizes[l-1]):
                pads.append(n_out-conv_transpose_out_size(n_in,self.kernel,self.stride,self.padding,0))
            if pads[0] != pads[1]:
                raise ConfigError(f'decoder layer {self.n_layers-l} needs unequal output paddings {pads}')
            paddings.append(pads[0])

        return paddings

    def encoder_shape(self):
        h,w = self.spatial_sizes()[-1]
        return (self.encoder_channels[-1],h,w)

    def private_shape(self):
        """ shape of the activation entering the final decoder layer """

        h,w = self.spatial_sizes()[1]
        return (self.encoder_channels[1],h,w)

    @property
    def cl_features(self):
        return math.prod(self.encoder_shape())

    @property
    def pl_features(self):
        c,h,w = self.private_shape()
        return c*(h//self.pl_pool_factor)*(w//self.pl_pool_factor)

    def validate(self):

        channels = tuple(self.encoder_channels)
        if len(channels) < 3:
            raise ConfigError(f'model.encoder_channels needs at least 3 entries (two layers), got {channels}')
        if channels[0] != 3:
            raise ConfigError(f'model.encoder_channels must start with the 3 receivers, got {channels[0]}')
        if min(channels) < 1:
            raise ConfigError(f'model.encoder_channels must be positive, got {channels}')
        for name in ('kernel','stride','cl_latent','pl_latent','pl_pool_factor','input_height','input_width'):
            if getattr(self,name) < 1:
                raise ConfigError(f'model.{name} must be positive')
        if self.padding < 0:
            raise ConfigError('model.padding must be nonnegative')

        try:
            paddings = self.output_paddings()
        except ShapeError as e:
            raise ConfigError(f'model: invalid layer chain: {e}') from None
        if any(not 0 <= p < self.stride for p in paddings):
            raise ConfigError(f'model: decoders cannot invert the encoder sizes {self.spatial_sizes()}')

        _,h,w = self.private_shape()
        if h % self.pl_pool_factor or w % self.pl_pool_factor:
            raise ConfigError(f'model.pl_pool_factor {self.pl_pool_factor} does not divide the private-leaf input {h}x{w}')

def parameter_specs(config):
    """ (name,shape,fan_in,gain) of every parameter in initialization order """

    k = config.kernel
    ch = tuple(config.encoder_channels)
    hidden = math.sqrt(2.0/(1.0+config.slope**2))
    specs = []

    # a. encoder
    for l,(c_in,c_out) in enumerate(zip(ch[:-1],ch[1:])):
        specs.append((f'E.{l}.weight',(c_out,c_in,k,k),c_in*k*k,hidden))
        specs.append((f'E.{l}.bias',(c_out,),None,None))

    # b. decoders (deepest layer first, last layer linear)
    for j in range(N_CLASSES):
        for l in range(config.n_layers):
            c_in,c_out = ch[config.n_layers-l],ch[config.n_layers-l-1]
            gain = 1.0 if l == config.n_layers-1 else hidden
            specs.append((f'D{j+1}.{l}.weight',(c_in,c_out,k,k),c_in*k*k,gain))
            specs.append((f'D{j+1}.{l}.bias',(c_out,),None,None))

    # c. leaves
    leaves = [('CL',config.cl_features,config.cl_latent)]
    leaves += [(f'PL{j+1}',config.pl_features,config.pl_latent) for j in range(N_CLASSES)]
    for prefix,n_features,n_latent in leaves:
        specs.append((f'{prefix}.enc.weight',(n_latent,n_features),n_features,1.0))
        specs.append((f'{prefix}.enc.bias',(n_latent,),None,None))
        specs.append((f'{prefix}.dec.weight',(n_features,n_latent),n_latent,1.0))
        specs.append((f'{prefix}.dec.bias',(n_features,),None,None))

    return specs

def parameter_count(config):
    """ analytic number of scalar parameters

    Args:

        config (FoodConfig): network layout

    Returns:

        (int): encoder + 3 decoders + common leaf + 3 private leaves

    """

    k2 = config.kernel**2
    ch = tuple(config.encoder_channels)
    pairs = list(zip(ch[:-1],ch[1:]))

    encoder = sum(c_out*c_in*k2+c_out for c_in,c_out in pairs)
    decoder = sum(c_in*c_out*k2+c_in for c_in,c_out in pairs)

    F,L = config.cl_features,config.cl_latent
    common = 2*F*L+L+F

    P,M = config.pl_features,config.pl_latent
    private = 2*P*M+M+P

    return encoder+N_CLASSES*(decoder+private)+common

#########
# model #
#########

class FoodModel:
    """ parameters of the FOOD network

    Args:

        config (FoodConfig): network layout
        params (dict): name -> Tensor in initialization order

    """

    def __init__(self,config,params):
        self.config = config
        self.params = params

    def parameters(self):
        return self.params

    def __getitem__(self,name):
        return self.params[name]

    def num_parameters(self):
        return sum(p.size for p in self.params.values())

    @property
    def dtype(self):
        return next(iter(self.params.values())).dtype

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()

    def astype(self,dtype):
        """ copy of the model in another precision (np.float64 for gradient checks) """

        return FoodModel(self.config,{name: p.astype(dtype) for name,p in self.params.items()})

def build(config):
    """ build a FOOD network with seeded Kaiming-uniform (fan-in) initialization

    Weights are drawn from U(-b,b) with b = gain*sqrt(3/fan_in); biases start
    at zero.

    Args:

        config (FoodConfig): network layout

    Returns:

        (FoodModel): model

    """

    config.validate()
    rng = np.random.default_rng(config.seed)

    params = {}
    for name,shape,fan_in,gain in parameter_specs(config):
        if fan_in is None:
            data = np.zeros(shape,dtype=np.float32)
        else:
            bound = gain*math.sqrt(3.0/fan_in)
            data = rng.uniform(-bound,bound,size=shape).astype(np.float32)
        params[name] = Tensor(data,requires_grad=True)

    model = FoodModel(config,params)
    logger.debug('built FOOD network with %d parameters',model.num_parameters())

    return model

###########
# forward #
###########

def _check_class(j):
    if j not in range(N_CLASSES):
        raise ShapeError(f'class index must be in 0..{N_CLASSES-1}, got {j}')

def _as_input(model,x):
    """ Tensor [B,3,H,W] in the model precision """

    if not isinstance(x,Tensor):
        x = Tensor(np.asarray(x),dtype=model.dtype)
    if x.ndim == 3:
        x = layers.reshape(x,(1,)+x.shape)

    expected = (model.config.encoder_channels[0],model.config.input_height,model.config.input_width)
    if x.ndim != 4 or x.shape[1:] != expected:
        raise ShapeError(f'input must have shape [B,{expected[0]},{expected[1]},{expected[2]}], got {x.shape}')
    if x.shape[0] == 0:
        raise DataError('empty batch')

    return x

def encode(model,x):
    """ shared encoder E """

    cfg = model.config
    h = x
    for l in range(cfg.n_layers):
        h = layers.conv2d(h,model[f'E.{l}.weight'],model[f'E.{l}.bias'],cfg.stride,cfg.padding)
        h = layers.leaky_relu(h,cfg.slope)

    return h

def decode(model,z,j):
    """ decoder D_j

    Returns:

        recon (Tensor): reconstruction of the input
        i_j (Tensor): activation entering the final reconstruction layer

    """

    cfg = model.config
    paddings = cfg.output_paddings()

    h = z
    i_j = None
    for l in range(cfg.n_layers):
        if l == cfg.n_layers-1:
            i_j = h
        h = layers.conv2d_transpose(h,model[f'D{j+1}.{l}.weight'],model[f'D{j+1}.{l}.bias'],cfg.stride,cfg.padding,paddings[l])
        if l < cfg.n_layers-1:
            h = layers.leaky_relu(h,cfg.slope)

    return h,i_j

def forward_class(model,x,j):
    """ main part MP_j: x -> D_j(E(x))

    Args:

        model (FoodModel): model
        x (Tensor): normalized frames [B,3,H,W]
        j (int): class index 0,1,2 (PER1,PER2,PER3)

    Returns:

        recon (Tensor): reconstruction [B,3,H,W]
        z (Tensor): encoder output
        i_j (Tensor): pre-final activation of decoder j

    """

    _check_class(j)
    x = _as_input(model,x)
    z = encode(model,x)
    recon,i_j = decode(model,z,j)

    return recon,z,i_j

def _leaf(model,prefix,x):
    """ linear autoencoder D(E(x)) """

    code = layers.linear(x,model[f'{prefix}.enc.weight'],model[f'{prefix}.enc.bias'])
    return layers.linear(code,model[f'{prefix}.dec.weight'],model[f'{prefix}.dec.bias'])

def leaf_inputs(model,z,i_j):
    """ flattened common-leaf input and pooled, flattened private-leaf input """

    fz = layers.flatten(z)
    fi = layers.flatten(layers.avg_pool2d(i_j,model.config.pl_pool_factor))

    return fz,fi

def leaf_losses(model,z,i_j,j):
    """ common-leaf and private-leaf reconstruction losses

    Targets are not detached: gradients reach the encoder and decoder through
    the leaf path and through the target.

    Args:

        model (FoodModel): model
        z (Tensor): encoder output from forward_class
        i_j (Tensor): pre-final activation of decoder j
        j (int): class index

    Returns:

        cl_loss (Tensor): mse(flatten(z), D_CL(E_CL(flatten(z))))
        pl_loss (Tensor): mse(p, D_PLj(E_PLj(p))) with p = flatten(pool(i_j))

    """

    _check_class(j)
    fz,fi = leaf_inputs(model,z,i_j)
    cl_loss = layers.mse(fz,_leaf(model,'CL',fz))
    pl_loss = layers.mse(fi,_leaf(model,f'PL{j+1}',fi))

    return cl_loss,pl_loss

##########
# losses #
##########

@dataclass
class LossBreakdown:
    """ the seven reconstruction losses and their sum (scalar Tensors) """

    mp: list
    cl: Tensor
    pl: list
    total: Tensor

    def values(self):
        """ dict mp1 mp2 mp3 cl pl1 pl2 pl3 total -> float """

        items = [t.item() for t in self.mp]+[self.cl.item()]+[t.item() for t in self.pl]+[self.total.item()]
        return dict(zip(LOSS_FIELDS,items))

def training_losses(model,batches):
    """ total loss L = L_MP + L_CL + L_PL of one balanced step

    Args:

        model (FoodModel): model
        batches (sequence): one normalized batch [B,3,H,W] per class, equal B

    Returns:

        (LossBreakdown): MP_j from class j through D_j only, CL summed over the
            encoder outputs of all classes, PL_j from class j only

    """

    if len(batches) != N_CLASSES:
        raise DataError(f'need one batch per class ({N_CLASSES}), got {len(batches)}')
    batches = [_as_input(model,x) for x in batches]
    if len({x.shape[0] for x in batches}) != 1:
        raise DataError(f'class batches differ in size: {[x.shape[0] for x in batches]}')

    mp,cl,pl = [],[],[]
    for j,x in enumerate(batches):
        recon,z,i_j = forward_class(model,x,j)
        mp.append(layers.mse(recon,x))
        cl_j,pl_j = leaf_losses(model,z,i_j,j)
        cl.append(cl_j)
        pl.append(pl_j)

    cl = _sum(cl)
    total = _sum(mp+[cl]+pl)

    return LossBreakdown(mp,cl,pl,total)

def _sum(tensors):
    out = tensors[0]
    for t in tensors[1:]:
        out = layers.add(out,t)
    return out

###########
# scoring #
###########

@dataclass
class ScoreTriple:
    """ reconstruction errors of one frame

    mp: MP_i errors, cl: CL error, pl: PL_i errors
    """

    mp: tuple
    cl: float
    pl: tuple

    @property
    def ood_scores(self):
        """ CL+PL_i per class """
        return tuple(self.cl+p for p in self.pl)

    @property
    def cls_scores(self):
        """ MP_i+PL_i per class """
        return tuple(m+p for m,p in zip(self.mp,self.pl))

@dataclass
class ScoreBatch:
    """ reconstruction errors of N frames: mp [N,3], cl [N], pl [N,3] (float64) """

    mp: np.ndarray
    cl: np.ndarray
    pl: np.ndarray

    def __len__(self):
        return self.cl.size

    def ood(self,mode='cl+pl'):
        """ OOD scores [N,3]; mode 'cl' uses the common leaf alone """

        if mode == 'cl+pl':
            return self.cl[:,None]+self.pl
        if mode == 'cl':
            return np.repeat(self.cl[:,None],self.pl.shape[1],axis=1)
        raise ValueError(f"unknown OOD score mode {mode!r}")

    def cls(self,mode='mp+pl'):
        """ classification scores [N,3]; mode 'mp' uses the main part alone """

        if mode == 'mp+pl':
            return self.mp+self.pl
        if mode == 'mp':
            return self.mp.copy()
        raise ValueError(f"unknown classification score mode {mode!r}")

    def sample(self,i):
        return ScoreTriple(tuple(self.mp[i].tolist()),float(self.cl[i]),tuple(self.pl[i].tolist()))

    @classmethod
    def concat(cls,batches):
        batches = list(batches)
        if not batches:
            return cls(np.zeros((0,N_CLASSES)),np.zeros(0),np.zeros((0,N_CLASSES)))
        return cls(np.concatenate([b.mp for b in batches]),np.concatenate([b.cl for b in batches]),np.concatenate([b.pl for b in batches]))

def _sample_mse(a,b):
    diff = a.data.astype(np.float64)-b.data.astype(np.float64)
    return np.mean((diff*diff).reshape(diff.shape[0],-1),axis=1)

def score_batch(model,x):
    """ reconstruction errors of every frame of a batch, without graph recording

    Args:

        model (FoodModel): model
        x (Tensor): normalized frames [B,3,H,W]

    Returns:

        (ScoreBatch): per-frame MP_i, CL and PL_i errors

    """

    with no_grad():

        x = _as_input(model,x)
        z = encode(model,x)

        fz = layers.flatten(z)
        cl = _sample_mse(fz,_leaf(model,'CL',fz))

        mp = np.empty((x.shape[0],N_CLASSES))
        pl = np.empty((x.shape[0],N_CLASSES))
        for j in range(N_CLASSES):
            recon,i_j = decode(model,z,j)
            mp[:,j] = _sample_mse(recon,x)
            _,fi = leaf_inputs(model,z,i_j)
            pl[:,j] = _sample_mse(fi,_leaf(model,f'PL{j+1}',fi))

    return ScoreBatch(mp,cl,pl)

def score_sample(model,x):
    """ scores of one normalized frame [1,3,H,W] (or [3,H,W])

    Returns:

        (ScoreTriple): ood_scores CL+PL_i and cls_scores MP_i+PL_i

    """

    x = _as_input(model,x)
    if x.shape[0] != 1:
        raise ShapeError(f'score_sample takes one frame, got a batch of {x.shape[0]}')

    return score_batch(model,x).sample(0)

def score_codes(model,codes,batch_size=64,threads=1):
    """ scores of raw frames, normalized and scored batch by batch

    Batches run on up to `threads` worker threads; the model is only read.

    Args:

        model (FoodModel): model
        codes (numpy.ndarray): raw codes [N,3,H,W]
        batch_size (int,optional): frames per batch
        threads (int,optional): worker threads

    Returns:

        (ScoreBatch): scores in frame order

    """

    def one(bounds):
        start,stop = bounds
        x = Tensor(normalize_codes(codes[start:stop]),dtype=model.dtype)
        return score_batch(model,x)

    return ScoreBatch.concat(parallel_map(one,chunks(len(codes),batch_size),threads))
