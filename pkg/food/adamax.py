# -*- coding: utf-8 -*-
"""adamax

Adamax optimizer (the infinity-norm variant of Adam).

    m_t = beta1*m_{t-1} + (1-beta1)*g_t
    u_t = max(beta2*u_{t-1}, |g_t|)
    theta_t = theta_{t-1} - alpha/(1-beta1^t) * m_t/(u_t+eps)

With a gradient of constant sign the step length is alpha (up to eps).
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, MissingGradientError, ShapeError

logger = logging.getLogger(__name__)

@dataclass
class AdamaxConfig:
    """ Adamax hyperparameters """

    alpha: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1.0e-8

    def validate(self):
        if not self.alpha > 0:
            raise ConfigError(f'optim.alpha must be positive, got {self.alpha}')
        if not 0.0 <= self.beta1 < 1.0 or not 0.0 <= self.beta2 < 1.0:
            raise ConfigError(f'optim.beta1 and optim.beta2 must be in [0,1), got {self.beta1}, {self.beta2}')
        if self.eps < 0:
            raise ConfigError(f'optim.eps must be nonnegative, got {self.eps}')

@dataclass
class AdamaxState:
    """ per-parameter first moment m and infinity-norm accumulator u, step t """

    config: AdamaxConfig
    m: dict = field(default_factory=dict)
    u: dict = field(default_factory=dict)
    t: int = 0

def init_state(params,config=None):
    """ zero moments for every parameter

    Args:

        params (dict): name -> Tensor
        config (AdamaxConfig,optional): hyperparameters

    Returns:

        (AdamaxState): state at t = 0

    """

    config = AdamaxConfig() if config is None else config
    config.validate()

    m = {name: np.zeros_like(p.data) for name,p in params.items()}
    u = {name: np.zeros_like(p.data) for name,p in params.items()}

    return AdamaxState(config,m,u,0)

def step(params,state):
    """ one Adamax update of every parameter from its .grad (in place)

    Args:

        params (dict): name -> Tensor with populated .grad
        state (AdamaxState): optimizer state (updated in place)

    """

    cfg = state.config

    # a. checks
    missing = [name for name,p in params.items() if p.grad is None]
    if missing:
        raise MissingGradientError(f'no gradient for {len(missing)} parameter(s), first: {missing[0]}')
    for name,p in params.items():
        if name not in state.m:
            raise ShapeError(f'optimizer state has no entry for parameter {name}')
        if state.m[name].shape != p.shape:
            raise ShapeError(f'optimizer state shape {state.m[name].shape} differs from parameter {name} shape {p.shape}')

    # b. update
    state.t += 1
    step_size = cfg.alpha/(1.0-cfg.beta1**state.t)

    for name,p in params.items():

        g = p.grad
        m = state.m[name]
        u = state.u[name]

        m *= cfg.beta1
        m += (1.0-cfg.beta1)*g
        np.maximum(cfg.beta2*u,np.abs(g),out=u)

        p.data -= step_size*m/(u+cfg.eps)
