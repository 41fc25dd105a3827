# -*- coding: utf-8 -*-
"""gradcheck

Central finite-difference gradients for verifying reverse-mode gradients.
"""

import numpy as np

from .tensor import backward, no_grad

def numerical_gradient(func,tensor,eps=1.0e-4,indices=None):
    """ central finite-difference gradient of a scalar function

    Args:

        func (callable): func() returns a scalar Tensor and reads tensor.data
        tensor (Tensor): tensor to perturb (perturbed in place and restored)
        eps (double,optional): finite step
        indices (iterable,optional): flat indices to differentiate (default all)

    Returns:

        (numpy.ndarray): gradient of tensor.shape in float64 (zero outside indices)

    """

    flat = tensor.data.reshape(-1)
    grad = np.zeros(flat.size)
    if indices is None:
        indices = range(flat.size)

    with no_grad():
        for i in indices:

            x0 = flat[i]

            flat[i] = x0+eps
            f_forward = func().item()

            flat[i] = x0-eps
            f_backward = func().item()

            flat[i] = x0
            grad[i] = (f_forward-f_backward)/(2.0*eps)

    return grad.reshape(tensor.shape)

def check_gradients(func,tensors,eps=1.0e-4,max_entries=None,seed=0):
    """ compare autodiff gradients with central finite differences

    The error of one tensor is max|g_auto-g_num| over the checked entries,
    relative to the largest gradient magnitude among them.

    Args:

        func (callable): func() returns a scalar Tensor
        tensors (dict): name -> Tensor with requires_grad=True
        eps (double,optional): finite step
        max_entries (int,optional): check a random subset of at most this many
            entries per tensor (default all)
        seed (int,optional): seed for the random subset

    Returns:

        errors (dict): name -> relative error

    """

    rng = np.random.default_rng(seed)

    # a. autodiff
    for t in tensors.values():
        t.zero_grad()
    backward(func())

    # b. finite differences
    errors = {}
    for name,t in tensors.items():

        if max_entries is None or t.size <= max_entries:
            indices = np.arange(t.size)
        else:
            indices = np.sort(rng.choice(t.size,size=max_entries,replace=False))

        auto = np.zeros(t.size) if t.grad is None else t.grad.reshape(-1).astype(np.float64)
        num = numerical_gradient(func,t,eps=eps,indices=indices).reshape(-1)

        diff = np.max(np.abs(auto[indices]-num[indices]))
        scale = max(np.max(np.abs(num[indices])),np.max(np.abs(auto[indices])),1.0e-12)
        errors[name] = diff/scale

    return errors
