# -*- coding: utf-8 -*-
"""layers

Differentiable layer primitives: convolution, transposed convolution, linear
maps, activations, average pooling and the mean-squared error.

Shapes are explicit; the only broadcasting is the addition of a bias vector.
"""

import numpy as np

from . import conv
from .errors import ShapeError
from .tensor import record

##########
# checks #
##########

def _check_ndim(t,ndim,what):
    if t.ndim != ndim:
        raise ShapeError(f'{what} must have {ndim} dimensions, got shape {t.shape}')

def _check_dtype(name,*tensors):
    dtypes = {t.dtype for t in tensors if t is not None}
    if len(dtypes) > 1:
        raise ShapeError(f'{name}: mixed dtypes {sorted(d.name for d in dtypes)}')

def _inputs(*tensors):
    return tuple(t for t in tensors if t is not None)

def _grads(grads,*tensors):
    """ drop the slots of absent (None) inputs """
    return tuple(g for g,t in zip(grads,tensors) if t is not None)

def _check_bias(name,bias,n):
    if bias is not None and bias.shape != (n,):
        raise ShapeError(f'{name}: bias shape {bias.shape} does not match {n} output features')

#############
# structure #
#############

def add(a,b):
    """ elementwise sum of two tensors of identical shape """

    if a.shape != b.shape:
        raise ShapeError(f'add: shapes {a.shape} and {b.shape} differ')
    _check_dtype('add',a,b)

    def backward_fn(gy):
        return gy,gy

    return record('add',a.data+b.data,(a,b),backward_fn)

def reshape(x,shape):
    """ view of x with a new shape (same number of elements) """

    shape = tuple(shape)
    try:
        y = x.data.reshape(shape)
    except ValueError:
        raise ShapeError(f'reshape: cannot reshape {x.shape} into {shape}') from None

    def backward_fn(gy):
        return (gy.reshape(x.shape),)

    return record('reshape',y,(x,),backward_fn)

def flatten(x):
    """ [B,...] -> [B,prod(...)] """

    return reshape(x,(x.shape[0],-1))

###############
# activations #
###############

def leaky_relu(x,slope=0.01):
    """ max(x,0) + slope*min(x,0) """

    positive = x.data > 0
    y = np.where(positive,x.data,x.data*x.dtype.type(slope))

    def backward_fn(gy):
        return (np.where(positive,gy,gy*x.dtype.type(slope)),)

    return record('leaky_relu',y,(x,),backward_fn)

def relu(x):
    """ max(x,0) """

    return leaky_relu(x,slope=0.0)

##########
# linear #
##########

def linear(x,weight,bias=None):
    """ fully connected layer y = x W^T + b

    Args:

        x (Tensor): input of shape [B,N]
        weight (Tensor): weight of shape [M,N]
        bias (Tensor,optional): bias of shape [M]

    Returns:

        (Tensor): output of shape [B,M]

    """

    _check_ndim(x,2,'linear input')
    _check_ndim(weight,2,'linear weight')
    if x.shape[1] != weight.shape[1]:
        raise ShapeError(f'linear: input has {x.shape[1]} features, weight expects {weight.shape[1]}')
    _check_bias('linear',bias,weight.shape[0])
    _check_dtype('linear',x,weight,bias)

    y = x.data @ weight.data.T
    if bias is not None:
        y = y + bias.data

    def backward_fn(gy):
        gx = gy @ weight.data if x.requires_grad else None
        gw = gy.T @ x.data if weight.requires_grad else None
        gb = gy.sum(axis=0) if bias is not None else None
        return _grads((gx,gw,gb),x,weight,bias)

    return record('linear',y,_inputs(x,weight,bias),backward_fn)

################
# convolutions #
################

def _unbatched(func,x,*args,**kwargs):
    """ apply a batched [B,C,H,W] op to a single [C,H,W] input """

    y = func(reshape(x,(1,)+x.shape),*args,**kwargs)
    return reshape(y,y.shape[1:])

def conv2d(x,weight,bias=None,stride=1,padding=0):
    """ 2d cross-correlation

    Args:

        x (Tensor): input of shape [B,C_in,H,W] or [C_in,H,W]
        weight (Tensor): kernels of shape [C_out,C_in,kH,kW]
        bias (Tensor,optional): bias of shape [C_out]
        stride (int,optional): stride
        padding (int,optional): zero padding on all sides

    Returns:

        (Tensor): output of shape [B,C_out,Ho,Wo] with Ho = floor((H+2p-kH)/s)+1

    """

    if x.ndim == 3:
        return _unbatched(conv2d,x,weight,bias,stride=stride,padding=padding)

    _check_ndim(x,4,'conv2d input')
    _check_ndim(weight,4,'conv2d weight')
    B,C,H,W = x.shape
    Co,Ci,kh,kw = weight.shape
    if Ci != C:
        raise ShapeError(f'conv2d: input has {C} channels, weight expects {Ci}')
    _check_bias('conv2d',bias,Co)
    _check_dtype('conv2d',x,weight,bias)

    # a. output size
    ho = conv.conv_out_size(H,kh,stride,padding)
    wo = conv.conv_out_size(W,kw,stride,padding)

    # b. contraction over windows
    cols = conv.windows(conv.pad(x.data,padding),kh,kw,stride,ho,wo)
    y = np.tensordot(cols,weight.data,axes=([1,4,5],[1,2,3])).transpose(0,3,1,2)
    if bias is not None:
        y = y + bias.data[None,:,None,None]
    y = np.ascontiguousarray(y)

    def backward_fn(gy):
        gx = gw = gb = None
        if x.requires_grad:
            col = np.tensordot(gy,weight.data,axes=([1],[0])) # [B,ho,wo,C,kh,kw]
            gx = conv.scatter(col,x.shape,stride,padding)
        if weight.requires_grad:
            gw = np.tensordot(gy,cols,axes=([0,2,3],[0,2,3]))
        if bias is not None:
            gb = gy.sum(axis=(0,2,3))
        return _grads((gx,gw,gb),x,weight,bias)

    return record('conv2d',y,_inputs(x,weight,bias),backward_fn)

def conv2d_transpose(x,weight,bias=None,stride=1,padding=0,output_padding=0):
    """ 2d transposed convolution (adjoint of conv2d w.r.t. its input)

    Args:

        x (Tensor): input of shape [B,C_in,H,W] or [C_in,H,W]
        weight (Tensor): kernels of shape [C_in,C_out,kH,kW]
        bias (Tensor,optional): bias of shape [C_out]
        stride (int,optional): stride
        padding (int,optional): padding removed from all sides
        output_padding (int,optional): extra rows/columns on the bottom/right

    Returns:

        (Tensor): output of shape [B,C_out,Ho,Wo] with Ho = (H-1)*s-2p+kH+output_padding

    """

    if x.ndim == 3:
        return _unbatched(conv2d_transpose,x,weight,bias,stride=stride,padding=padding,output_padding=output_padding)

    _check_ndim(x,4,'conv2d_transpose input')
    _check_ndim(weight,4,'conv2d_transpose weight')
    B,C,H,W = x.shape
    Ci,Co,kh,kw = weight.shape
    if Ci != C:
        raise ShapeError(f'conv2d_transpose: input has {C} channels, weight expects {Ci}')
    _check_bias('conv2d_transpose',bias,Co)
    _check_dtype('conv2d_transpose',x,weight,bias)

    # a. output size
    ho = conv.conv_transpose_out_size(H,kh,stride,padding,output_padding)
    wo = conv.conv_transpose_out_size(W,kw,stride,padding,output_padding)

    # b. scatter
    col = np.tensordot(x.data,weight.data,axes=([1],[0])) # [B,H,W,Co,kh,kw]
    y = conv.scatter(col,(B,Co,ho,wo),stride,padding)
    if bias is not None:
        y = y + bias.data[None,:,None,None]

    def backward_fn(gy):
        gx = gw = gb = None
        cols = conv.windows(conv.pad(gy,padding),kh,kw,stride,H,W) # [B,Co,H,W,kh,kw]
        if x.requires_grad:
            gx = np.ascontiguousarray(np.tensordot(cols,weight.data,axes=([1,4,5],[1,2,3])).transpose(0,3,1,2))
        if weight.requires_grad:
            gw = np.tensordot(x.data,cols,axes=([0,2,3],[0,2,3]))
        if bias is not None:
            gb = gy.sum(axis=(0,2,3))
        return _grads((gx,gw,gb),x,weight,bias)

    return record('conv2d_transpose',y,_inputs(x,weight,bias),backward_fn)

###########
# pooling #
###########

def avg_pool2d(x,factor):
    """ non-overlapping average pooling of the two trailing axes

    Args:

        x (Tensor): input of shape [B,C,H,W] with H and W divisible by factor
        factor (int): pooling window and stride

    Returns:

        (Tensor): output of shape [B,C,H/factor,W/factor]

    """

    _check_ndim(x,4,'avg_pool2d input')
    B,C,H,W = x.shape
    if factor < 1 or H % factor or W % factor:
        raise ShapeError(f'avg_pool2d: spatial size {H}x{W} is not divisible by factor {factor}')

    if factor == 1:
        return reshape(x,x.shape)

    y = x.data.reshape(B,C,H//factor,factor,W//factor,factor).mean(axis=(3,5))

    def backward_fn(gy):
        g = np.repeat(np.repeat(gy,factor,axis=2),factor,axis=3)
        return (g/x.dtype.type(factor*factor),)

    return record('avg_pool2d',y,(x,),backward_fn)

########
# loss #
########

def mse(pred,target):
    """ mean over all elements of the squared difference

    Args:

        pred (Tensor): prediction
        target (Tensor): target of identical shape

    Returns:

        (Tensor): scalar tensor (shape ())

    """

    if pred.shape != target.shape:
        raise ShapeError(f'mse: prediction shape {pred.shape} differs from target shape {target.shape}')
    _check_dtype('mse',pred,target)

    diff = pred.data-target.data
    n = diff.size
    y = np.asarray(np.mean(diff*diff),dtype=pred.dtype)

    def backward_fn(gy):
        g = diff*(gy*pred.dtype.type(2.0/n))
        return g,-g

    return record('mse',y,(pred,target),backward_fn)
