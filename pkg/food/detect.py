# -*- coding: utf-8 -*-
"""detect

Threshold calibration and the joint OOD / classification decision.

A frame is OOD if every OOD score CL+PL_i exceeds its class threshold tau_i;
otherwise it is assigned to the class with the smallest classification score
MP_i+PL_i (ties go to the lowest class index).
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .dataset import ID_LABELS, Label, N_CLASSES
from .errors import ConfigError, DataError, NotCalibratedError
from .model import score_codes

logger = logging.getLogger(__name__)

OOD_INDEX = int(Label.OOD)

@dataclass
class CalibrationConfig:
    """ coverage: guaranteed ID acceptance on the calibration set; batch_size: scoring batch """

    coverage: float = 0.95
    batch_size: int = 64

    def validate(self):
        if not 0.0 < self.coverage <= 1.0:
            raise ConfigError(f'calibration.coverage must be in (0,1], got {self.coverage}')
        if self.batch_size < 1:
            raise ConfigError('calibration.batch_size must be >= 1')

@dataclass
class ThresholdSet:
    """ per-class OOD thresholds

    tau: threshold per class
    counts: calibration frames per class
    achieved: fraction of calibration scores <= tau per class
    coverage: target coverage
    """

    tau: tuple
    counts: tuple
    achieved: tuple
    coverage: float = 0.95

@dataclass
class Decision:
    label: Label
    scores: object

##############
# thresholds #
##############

def coverage_rank(n,coverage=0.95):
    """ 1-based rank of the smallest order statistic covering `coverage` of n values """

    if n < 1:
        raise DataError('empty calibration set')
    return min(n,max(1,math.ceil(coverage*n-1.0e-9)))

def threshold(scores,coverage=0.95):
    """ smallest order statistic with at least `coverage` of the scores at or below it

    Args:

        scores (array_like): calibration scores of one class
        coverage (double,optional): target coverage

    Returns:

        tau (double): the ceil(coverage*N)-th smallest score
        achieved (double): fraction of scores <= tau

    """

    scores = np.asarray(scores,dtype=np.float64)
    k = coverage_rank(scores.size,coverage)
    tau = float(np.sort(scores,kind='stable')[k-1])
    achieved = float(np.mean(scores <= tau))

    return tau,achieved

def calibrate_scores(scores_per_class,coverage=0.95):
    """ ThresholdSet from per-class calibration scores (scores_per_class[i] holds CL+PL_i of class-i frames) """

    if len(scores_per_class) != N_CLASSES:
        raise DataError(f'need calibration scores for {N_CLASSES} classes, got {len(scores_per_class)}')

    taus,counts,achieved = [],[],[]
    for label,scores in zip(ID_LABELS,scores_per_class):
        if len(scores) == 0:
            raise DataError(f'empty calibration set for {label.name}')
        tau,frac = threshold(scores,coverage)
        taus.append(tau)
        counts.append(len(scores))
        achieved.append(frac)

    return ThresholdSet(tuple(taus),tuple(counts),tuple(achieved),coverage)

def calibrate(model,id_calibration,config=None,threads=1):
    """ per-class thresholds guaranteeing `coverage` ID acceptance on the calibration set

    Args:

        model (FoodModel): trained model
        id_calibration (list): raw codes [N_i,3,H,W] of PER1, PER2, PER3
        config (CalibrationConfig,optional): coverage and batch size
        threads (int,optional): scoring threads

    Returns:

        (ThresholdSet): tau_i = ceil(coverage*N_i)-th smallest CL+PL_i of class i

    """

    config = CalibrationConfig() if config is None else config
    config.validate()
    if len(id_calibration) != N_CLASSES:
        raise DataError(f'need calibration frames for {N_CLASSES} classes, got {len(id_calibration)}')

    scores = []
    for i,(label,codes) in enumerate(zip(ID_LABELS,id_calibration)):
        if len(codes) == 0:
            raise DataError(f'empty calibration set for {label.name}')
        scores.append(score_codes(model,codes,config.batch_size,threads).ood()[:,i])

    thresholds = calibrate_scores(scores,config.coverage)
    for label,tau,frac in zip(ID_LABELS,thresholds.tau,thresholds.achieved):
        logger.info('calibrated %s: tau=%.6g coverage=%.4f',label.name,tau,frac)

    return thresholds

#############
# decisions #
#############

def _check(thresholds):
    if thresholds is None:
        raise NotCalibratedError('no thresholds: run calibrate first')

def decide(scores,thresholds):
    """ joint OOD / class decision for one frame

    Args:

        scores (ScoreTriple): scores of the frame
        thresholds (ThresholdSet): calibrated thresholds

    Returns:

        (Decision): OOD if every ood_scores[i] > tau_i, else argmin cls_scores

    """

    _check(thresholds)

    if all(s > t for s,t in zip(scores.ood_scores,thresholds.tau)):
        return Decision(Label.OOD,scores)

    cls = scores.cls_scores
    best = 0
    for i in range(1,len(cls)):
        if cls[i] < cls[best]:
            best = i

    return Decision(Label(best),scores)

def decide_batch(ood,cls,thresholds):
    """ vectorized decide

    Args:

        ood (numpy.ndarray): OOD scores [N,3]
        cls (numpy.ndarray): classification scores [N,3]
        thresholds (ThresholdSet): calibrated thresholds

    Returns:

        (numpy.ndarray): labels [N] with 0,1,2 = PER1..3 and 3 = OOD

    """

    _check(thresholds)

    tau = np.asarray(thresholds.tau,dtype=np.float64)
    labels = np.argmin(cls,axis=1) # first minimum on ties
    labels[np.all(ood > tau[None,:],axis=1)] = OOD_INDEX

    return labels
