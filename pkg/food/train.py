# -*- coding: utf-8 -*-
"""train

Balanced minibatch training of the FOOD network with Adamax.

Every step draws one batch of equal size from each enrolled class, so a step
sees B frames of PER1, PER2 and PER3. An epoch has min_j(N_j)//B steps; the
batch order of epoch e is seeded by (seed,e), so a resumed run draws the same
batches as an uninterrupted one.
"""

import json
import logging
import time
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from . import adamax
from .dataset import ID_LABELS, N_CLASSES, normalize_codes
from .errors import ConfigError, DataError, NumericError
from .misc import elapsed
from .model import LOSS_FIELDS, training_losses
from .tensor import Tensor, backward

logger = logging.getLogger(__name__)

@dataclass
class TrainConfig:
    """ epochs, frames per class per step, and whether to show a progress bar """

    epochs: int = 30
    batch_size: int = 32
    progress: bool = False

    def validate(self):
        if self.epochs < 0:
            raise ConfigError(f'train.epochs must be nonnegative, got {self.epochs}')
        if self.batch_size < 1:
            raise ConfigError(f'train.batch_size must be >= 1, got {self.batch_size}')

@dataclass
class EpochRecord:
    """ mean losses of one epoch (keys mp1 mp2 mp3 cl pl1 pl2 pl3 total) """

    epoch: int
    step: int
    losses: dict
    seconds: float = 0.0

    def to_json(self):
        return json.dumps({'epoch': self.epoch,'step': self.step,'losses': {k: self.losses[k] for k in LOSS_FIELDS}})

###########
# batches #
###########

def steps_per_epoch(counts,batch_size):
    """ number of balanced steps per epoch given the frames per class """

    n = min(counts)
    if n < 1:
        raise DataError('every class needs at least one training frame')
    return n//min(batch_size,n)

def epoch_batches(per_class,batch_size,rng):
    """ balanced batches of one epoch

    Args:

        per_class (list): raw codes [N_j,3,H,W] per class
        batch_size (int): frames per class per step (capped at the smallest class)
        rng (numpy.random.Generator): epoch generator

    Yields:

        (list): one code array [B,3,H,W] per class

    """

    counts = [len(codes) for codes in per_class]
    b = min(batch_size,min(counts))
    steps = steps_per_epoch(counts,batch_size)
    perms = [rng.permutation(n) for n in counts]

    for s in range(steps):
        yield [codes[perm[s*b:(s+1)*b]] for codes,perm in zip(per_class,perms)]

def epoch_rng(seed,epoch):
    return np.random.default_rng([seed,epoch])

############
# training #
############

def train_step(model,state,batch):
    """ one Adamax step on a balanced batch

    Args:

        model (FoodModel): model (updated in place)
        state (AdamaxState): optimizer state (updated in place)
        batch (list): raw codes [B,3,H,W] per class

    Returns:

        (dict): the eight loss values of the step

    """

    x = [Tensor(normalize_codes(codes),dtype=model.dtype) for codes in batch]

    model.zero_grad()
    losses = training_losses(model,x)
    backward(losses.total)
    adamax.step(model.params,state)

    values = losses.values()
    if not all(np.isfinite(v) for v in values.values()):
        raise NumericError(f'non-finite loss at step {state.t}: {values}')

    return values

def train(model,state,per_class,config=None,seed=0,start_epoch=0,on_epoch=None):
    """ train for epochs start_epoch+1..config.epochs

    Args:

        model (FoodModel): model (updated in place)
        state (AdamaxState): optimizer state (updated in place)
        per_class (list): raw training codes [N_j,3,H,W] of PER1, PER2, PER3
        config (TrainConfig,optional): epochs and batch size
        seed (int,optional): batch order seed
        start_epoch (int,optional): epochs already completed (resume)
        on_epoch (callable,optional): called with every EpochRecord

    Returns:

        (list): EpochRecord per trained epoch

    """

    config = TrainConfig() if config is None else config
    config.validate()

    if len(per_class) != N_CLASSES:
        raise DataError(f'need training frames for {N_CLASSES} classes, got {len(per_class)}')
    for label,codes in zip(ID_LABELS,per_class):
        if len(codes) == 0:
            raise DataError(f'no {label.name} training frames')

    steps = steps_per_epoch([len(codes) for codes in per_class],config.batch_size)
    logger.info('training epochs %d..%d, %d steps of %d frames per class',start_epoch+1,config.epochs,steps,min(config.batch_size,min(len(c) for c in per_class)))

    history = []
    for epoch in range(start_epoch+1,config.epochs+1):

        t0 = time.time()
        sums = dict.fromkeys(LOSS_FIELDS,0.0)

        batches = epoch_batches(per_class,config.batch_size,epoch_rng(seed,epoch))
        for batch in tqdm(batches,total=steps,desc=f'epoch {epoch}',disable=not config.progress,leave=False):
            values = train_step(model,state,batch)
            for key in LOSS_FIELDS:
                sums[key] += values[key]

        record = EpochRecord(epoch,state.t,{key: sums[key]/steps for key in LOSS_FIELDS},time.time()-t0)
        logger.info('epoch %d: total %.6f (%s)',epoch,record.losses['total'],elapsed(t0))

        history.append(record)
        if on_epoch is not None:
            on_epoch(record)

    return history
