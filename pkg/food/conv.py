# -*- coding: utf-8 -*-
"""conv

Numba JIT compiled kernels and shape helpers for 2d convolutions.

Convolutions are evaluated as a tensor contraction over strided windows
(im2col without the copy); the adjoint scatter (col2im) is a jitted loop with
a fixed accumulation order, shared by the input gradient of conv2d and the
forward pass of conv2d_transpose.
"""

import numpy as np
from numba import njit
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeError

##########
# shapes #
##########

def conv_out_size(n,k,stride,padding):
    """ output length of a convolution along one axis

    Args:

        n (int): input length
        k (int): kernel length
        stride (int): stride
        padding (int): zero padding on both sides

    Returns:

        (int): floor((n+2*padding-k)/stride)+1

    """

    if stride < 1:
        raise ShapeError(f'stride must be >= 1, got {stride}')
    if padding < 0:
        raise ShapeError(f'padding must be >= 0, got {padding}')
    if k > n+2*padding:
        raise ShapeError(f'kernel size {k} exceeds padded input size {n+2*padding}')

    return (n+2*padding-k)//stride+1

def conv_transpose_out_size(n,k,stride,padding,output_padding=0):
    """ output length of a transposed convolution along one axis

    Args:

        n (int): input length
        k (int): kernel length
        stride (int): stride
        padding (int): padding removed from both sides
        output_padding (int,optional): extra length added on one side

    Returns:

        (int): (n-1)*stride-2*padding+k+output_padding

    """

    if stride < 1:
        raise ShapeError(f'stride must be >= 1, got {stride}')
    if not 0 <= output_padding < max(stride,1):
        raise ShapeError(f'output_padding must be in [0,stride), got {output_padding}')

    size = (n-1)*stride-2*padding+k+output_padding
    if size < 1:
        raise ShapeError(f'transposed convolution output size {size} is not positive')

    return size

###########
# windows #
###########

def pad(x,padding):
    """ zero pad the two trailing axes of a [B,C,H,W] array """

    if padding == 0:
        return x
    return np.pad(x,((0,0),(0,0),(padding,padding),(padding,padding)))

def windows(xp,kh,kw,stride,ho,wo):
    """ strided view [B,C,ho,wo,kh,kw] of the kernel windows of a padded array """

    view = sliding_window_view(xp,(kh,kw),axis=(2,3))
    return view[:,:,::stride,::stride][:,:,:ho,:wo]

###########
# kernels #
###########

@njit(nogil=True)
def col2im(col,out,stride):
    """ scatter-add kernel columns into a padded image

    Args:

        col (numpy.ndarray): input, columns of shape [B,Ho,Wo,C,kH,kW]
        out (numpy.ndarray): output, padded image of shape [B,C,Hp,Wp] (added to)
        stride (int): stride of the windows

    """

    B,Ho,Wo,C,kH,kW = col.shape
    for b in range(B):
        for i in range(Ho):
            for j in range(Wo):
                for c in range(C):
                    for ki in range(kH):
                        for kj in range(kW):
                            out[b,c,i*stride+ki,j*stride+kj] += col[b,i,j,c,ki,kj]

def scatter(col,shape,stride,padding):
    """ col2im into a zero image of padded size and crop the padding

    Args:

        col (numpy.ndarray): columns of shape [B,Ho,Wo,C,kH,kW]
        shape (tuple): unpadded output shape (B,C,H,W)
        stride (int): stride
        padding (int): padding to crop on both sides

    Returns:

        (numpy.ndarray): image of shape `shape`

    """

    B,C,H,W = shape
    out = np.zeros((B,C,H+2*padding,W+2*padding),dtype=col.dtype)
    col2im(np.ascontiguousarray(col),out,stride)

    return np.ascontiguousarray(out[:,:,padding:padding+H,padding:padding+W])
