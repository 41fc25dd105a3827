# -*- coding: utf-8 -*-
"""dataset

Raw radar frame containers, normalization and stratified splits.
"""

import enum
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DataError, ShapeError
from .tensor import Tensor

logger = logging.getLogger(__name__)

ADC_MAX = 4095

class Label(enum.IntEnum):
    """ frame labels as stored in FOODRAW1 files """

    PER1 = 0
    PER2 = 1
    PER3 = 2
    OOD = 3
    UNLABELED = 255

ID_LABELS = (Label.PER1,Label.PER2,Label.PER3)
N_CLASSES = len(ID_LABELS)

##########
# frames #
##########

@dataclass
class FrameCube:
    """ one raw radar frame: n_rx x n_chirps x n_samples 12-bit ADC codes """

    codes: np.ndarray
    label: Label = Label.UNLABELED

    def __post_init__(self):
        self.codes = np.asarray(self.codes)
        if self.codes.ndim != 3:
            raise ShapeError(f'frame codes must be n_rx x n_chirps x n_samples, got shape {self.codes.shape}')
        if self.codes.size and (self.codes.min() < 0 or self.codes.max() > ADC_MAX):
            raise DataError(f'frame codes outside the 12-bit range [0,{ADC_MAX}]')
        self.codes = self.codes.astype(np.uint16)
        self.label = Label(self.label)

@dataclass
class Dataset:
    """ N frames stored as one code array [N,n_rx,n_chirps,n_samples] and labels [N] """

    codes: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.codes = np.asarray(self.codes,dtype=np.uint16)
        self.labels = np.asarray(self.labels,dtype=np.uint8)
        if self.codes.ndim != 4:
            raise ShapeError(f'dataset codes must be N x n_rx x n_chirps x n_samples, got shape {self.codes.shape}')
        if self.labels.shape != (self.codes.shape[0],):
            raise ShapeError(f'{self.labels.size} labels for {self.codes.shape[0]} frames')

    @classmethod
    def from_frames(cls,frames,frame_shape=None):
        """ stack FrameCube objects (frame_shape is needed for an empty list) """

        frames = list(frames)
        if not frames:
            if frame_shape is None:
                raise DataError('frame_shape is required for an empty dataset')
            return cls(np.zeros((0,)+tuple(frame_shape),dtype=np.uint16),np.zeros(0,dtype=np.uint8))

        codes = np.stack([frame.codes for frame in frames])
        labels = np.array([int(frame.label) for frame in frames],dtype=np.uint8)
        return cls(codes,labels)

    @classmethod
    def concat(cls,datasets):
        datasets = list(datasets)
        return cls(np.concatenate([d.codes for d in datasets]),np.concatenate([d.labels for d in datasets]))

    def __len__(self):
        return self.codes.shape[0]

    @property
    def frame_shape(self):
        return self.codes.shape[1:]

    def frame(self,i):
        return FrameCube(self.codes[i],Label(int(self.labels[i])))

    def subset(self,indices):
        indices = np.asarray(indices,dtype=np.int64)
        return Dataset(self.codes[indices],self.labels[indices])

    def by_label(self,label):
        return self.subset(np.flatnonzero(self.labels == int(label)))

    def count(self,label):
        return int(np.sum(self.labels == int(label)))

    def id_only(self):
        return self.subset(np.flatnonzero(self.labels < N_CLASSES))

    def per_class(self):
        """ list with the code arrays of PER1, PER2 and PER3 """

        return [self.by_label(label).codes for label in ID_LABELS]

#################
# normalization #
#################

def normalize_codes(codes):
    """ map 12-bit codes to [-1,1] and remove the per-receiver mean

    Args:

        codes (numpy.ndarray): codes of shape [...,n_rx,n_chirps,n_samples]

    Returns:

        (numpy.ndarray): float32 array of the same shape with values in [-2,2]

    """

    x = np.asarray(codes,dtype=np.float64)/ADC_MAX*2.0-1.0
    x -= x.mean(axis=(-2,-1),keepdims=True)

    return x.astype(np.float32)

def normalize(frame):
    """ normalized network input Tensor[n_rx,n_chirps,n_samples] of one frame """

    return Tensor(normalize_codes(frame.codes))

##########
# splits #
##########

@dataclass
class SplitConfig:
    """ dataset partitioning

    train_fraction: share of each ID class used for training (rest is test)
    calibration_fraction: share of the training part held out for thresholds
    eval_on: 'test' evaluates on the held-out test part of the --id file,
        'all' on every ID frame of it
    """

    train_fraction: float = 0.9
    calibration_fraction: float = 0.1
    eval_on: str = 'test'

    def validate(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f'split.train_fraction must be in (0,1), got {self.train_fraction}')
        if not 0.0 < self.calibration_fraction < 1.0:
            raise ConfigError(f'split.calibration_fraction must be in (0,1), got {self.calibration_fraction}')
        if self.eval_on not in ('test','all'):
            raise ConfigError(f"split.eval_on must be 'test' or 'all', got {self.eval_on!r}")

def split(dataset,train_fraction,seed):
    """ stratified, disjoint, seeded split

    Every label present is split separately: round(train_fraction*n) frames
    of each label go to the training part.

    Args:

        dataset (Dataset): frames
        train_fraction (double): share of each label in the training part
        seed (int): seed

    Returns:

        train (Dataset): training part
        test (Dataset): remaining frames

    """

    if not 0.0 <= train_fraction <= 1.0:
        raise ConfigError(f'train_fraction must be in [0,1], got {train_fraction}')

    train_idx = []
    test_idx = []
    for label in np.unique(dataset.labels):
        idx = np.flatnonzero(dataset.labels == label)
        perm = np.random.default_rng([seed,int(label)]).permutation(idx)
        n_train = int(np.rint(train_fraction*idx.size))
        train_idx.append(perm[:n_train])
        test_idx.append(perm[n_train:])

    train_idx = np.sort(np.concatenate(train_idx)) if train_idx else np.zeros(0,dtype=np.int64)
    test_idx = np.sort(np.concatenate(test_idx)) if test_idx else np.zeros(0,dtype=np.int64)

    return dataset.subset(train_idx),dataset.subset(test_idx)

class Partition(NamedTuple):
    fit: Dataset
    calibration: Dataset
    test: Dataset

def partition(dataset,config,seed):
    """ ID frames split into fit, calibration and test parts

    The test part is split off first; the calibration part is a held-out
    slice of the training part, so thresholds never see test data.

    Args:

        dataset (Dataset): frames (OOD and unlabeled frames are ignored)
        config (SplitConfig): fractions
        seed (int): seed

    Returns:

        (Partition): fit, calibration and test datasets

    """

    config.validate()
    id_data = dataset.id_only()
    for label in ID_LABELS:
        if id_data.count(label) == 0:
            raise DataError(f'no {label.name} frames in dataset')

    train,test = split(id_data,config.train_fraction,seed)
    fit,calibration = split(train,1.0-config.calibration_fraction,seed+1)

    logger.debug('partition: fit=%d calibration=%d test=%d',len(fit),len(calibration),len(test))

    return Partition(fit,calibration,test)
