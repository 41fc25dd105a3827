# -*- coding: utf-8 -*-
"""metrics

OOD detection and classification metrics, and the per-class evaluation
protocol: for class i the ID population is the CL+PL_i score of class-i test
frames (or of all ID test frames), the OOD population is the CL+PL_i score of
every OOD test frame. Higher scores mean more OOD-like throughout.
"""

import json
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import rankdata
from sklearn.metrics import average_precision_score

from .dataset import ID_LABELS, Label, N_CLASSES
from .detect import decide_batch, threshold
from .errors import ConfigError, DataError, NotCalibratedError
from .misc import elapsed
from .model import score_codes

logger = logging.getLogger(__name__)

ROW_LABELS = [label.name for label in ID_LABELS]+[Label.OOD.name]

###############
# populations #
###############

@dataclass
class ScoredPopulation:
    """ ID and OOD scores of one detection problem (higher = more OOD-like) """

    id_scores: np.ndarray
    ood_scores: np.ndarray

    def __post_init__(self):
        self.id_scores = np.asarray(self.id_scores,dtype=np.float64).reshape(-1)
        self.ood_scores = np.asarray(self.ood_scores,dtype=np.float64).reshape(-1)
        if not (np.all(np.isfinite(self.id_scores)) and np.all(np.isfinite(self.ood_scores))):
            raise DataError('scores must be finite')

    def validate(self):
        if self.id_scores.size == 0 or self.ood_scores.size == 0:
            raise DataError(f'undefined metric: {self.id_scores.size} ID and {self.ood_scores.size} OOD scores')

def auroc(pop):
    """ area under the ROC curve, P(ood > id) + P(ood == id)/2

    Args:

        pop (ScoredPopulation): scores

    Returns:

        (double): Mann-Whitney statistic from average ranks

    """

    pop.validate()
    n,m = pop.id_scores.size,pop.ood_scores.size

    ranks = rankdata(np.concatenate([pop.id_scores,pop.ood_scores]))
    u = ranks[n:].sum()-m*(m+1)/2.0

    return u/(n*m)

def aupr(pop,positives='ood'):
    """ area under the precision-recall curve (average precision, step interpolation)

    Args:

        pop (ScoredPopulation): scores
        positives (str,optional): 'ood' (AUPR_OUT) or 'id' (AUPR_IN, scores negated)

    Returns:

        (double): average precision

    """

    pop.validate()
    n,m = pop.id_scores.size,pop.ood_scores.size
    scores = np.concatenate([pop.id_scores,pop.ood_scores])

    if positives == 'ood':
        y = np.concatenate([np.zeros(n),np.ones(m)])
    elif positives == 'id':
        y = np.concatenate([np.ones(n),np.zeros(m)])
        scores = -scores
    else:
        raise ValueError(f"positives must be 'ood' or 'id', got {positives!r}")

    return float(average_precision_score(y,scores))

def fpr_at_95_tpr(pop,tpr=0.95):
    """ fraction of OOD scores accepted by the threshold that accepts `tpr` of the ID scores

    Args:

        pop (ScoredPopulation): scores
        tpr (double,optional): ID acceptance (true positive rate)

    Returns:

        (double): fraction of OOD scores <= the ceil(tpr*N_id)-th smallest ID score

    """

    pop.validate()
    tau,_ = threshold(pop.id_scores,tpr)

    return float(np.mean(pop.ood_scores <= tau))

@dataclass
class ClassMetrics:
    auroc: float
    aupr_in: float
    aupr_out: float
    fpr95: float

def ood_metrics(pop):
    return ClassMetrics(auroc(pop),aupr(pop,'id'),aupr(pop,'ood'),fpr_at_95_tpr(pop))

##########
# report #
##########

@dataclass
class EvalConfig:
    """ negatives: 'class' (class-i ID frames only) or 'all-id' (every ID frame) per class population """

    negatives: str = 'class'
    batch_size: int = 64

    def validate(self):
        if self.negatives not in ('class','all-id'):
            raise ConfigError(f"eval.negatives must be 'class' or 'all-id', got {self.negatives!r}")
        if self.batch_size < 1:
            raise ConfigError('eval.batch_size must be >= 1')

@dataclass
class MetricsReport:
    """ evaluation results

    per_class: OOD metrics per class with CL+PL_i scores
    class_accuracy: ID classification accuracy per class (argmin MP_i+PL_i)
    average_accuracy: mean of class_accuracy
    accuracy: accuracy of the joint decision over ID and OOD test frames
    confusion: 4x4 counts, rows true PER1..3/OOD, columns decided
    id_acceptance: fraction of ID test frames not decided OOD
    test_time: wall clock seconds of the scoring and decision pass; the only
        field that differs between two runs on the same inputs
    ablation_cl: OOD metrics per class with the CL score alone
    ablation_mp_accuracy: classification accuracy per class with MP_i alone
    """

    per_class: list
    class_accuracy: list
    average_accuracy: float
    accuracy: float
    confusion: list
    id_acceptance: float
    test_time: float
    negatives: str
    id_counts: list
    ood_count: int
    ablation_cl: list = field(default_factory=list)
    ablation_mp_accuracy: list = field(default_factory=list)
    ablation_mp_average_accuracy: float = 0.0

    @property
    def mean_auroc(self):
        return float(np.mean([m.auroc for m in self.per_class]))

    def to_dict(self):
        return asdict(self)

    def deterministic_dict(self):
        """ to_dict() without test_time """

        d = self.to_dict()
        del d['test_time']
        return d

    @classmethod
    def from_dict(cls,d):
        d = dict(d)
        d['per_class'] = [ClassMetrics(**m) for m in d['per_class']]
        d['ablation_cl'] = [ClassMetrics(**m) for m in d.get('ablation_cl',[])]
        return cls(**d)

    def to_json(self):
        return json.dumps(self.to_dict(),indent=2,sort_keys=True)

    @classmethod
    def from_json(cls,text):
        return cls.from_dict(json.loads(text))

def _accuracy(scores,i,mode):
    return float(np.mean(np.argmin(scores.cls(mode),axis=1) == i))

def evaluate(model,thresholds,id_test,ood_test,config=None,threads=1):
    """ per-class OOD metrics, classification accuracy and confusion matrix

    Args:

        model (FoodModel): trained model
        thresholds (ThresholdSet): calibrated thresholds
        id_test (list): raw codes of PER1, PER2, PER3 test frames
        ood_test (numpy.ndarray): raw codes of OOD test frames
        config (EvalConfig,optional): protocol options
        threads (int,optional): scoring threads

    Returns:

        (MetricsReport): report

    """

    config = EvalConfig() if config is None else config
    config.validate()
    if thresholds is None:
        raise NotCalibratedError('no thresholds: run calibrate first')
    if len(id_test) != N_CLASSES:
        raise DataError(f'need ID test frames for {N_CLASSES} classes, got {len(id_test)}')
    for label,codes in zip(ID_LABELS,id_test):
        if len(codes) == 0:
            raise DataError(f'no {label.name} test frames')
    if len(ood_test) == 0:
        raise DataError('no OOD test frames')

    # a. scoring and decisions
    t0 = time.perf_counter()

    id_scores = [score_codes(model,codes,config.batch_size,threads) for codes in id_test]
    ood_scores = score_codes(model,ood_test,config.batch_size,threads)

    truth = np.concatenate([np.full(len(s),i) for i,s in enumerate(id_scores)]+[np.full(len(ood_scores),int(Label.OOD))])
    union = [*id_scores,ood_scores]
    decided = decide_batch(np.concatenate([s.ood() for s in union]),np.concatenate([s.cls() for s in union]),thresholds)

    test_time = time.perf_counter()-t0

    # b. detection metrics
    def detection(mode):
        out = []
        for i in range(N_CLASSES):
            if config.negatives == 'class':
                id_i = id_scores[i].ood(mode)[:,i]
            else:
                id_i = np.concatenate([s.ood(mode)[:,i] for s in id_scores])
            out.append(ood_metrics(ScoredPopulation(id_i,ood_scores.ood(mode)[:,i])))
        return out

    per_class = detection('cl+pl')
    ablation_cl = detection('cl')

    # c. classification
    class_accuracy = [_accuracy(s,i,'mp+pl') for i,s in enumerate(id_scores)]
    mp_accuracy = [_accuracy(s,i,'mp') for i,s in enumerate(id_scores)]

    confusion = np.zeros((N_CLASSES+1,N_CLASSES+1),dtype=np.int64)
    np.add.at(confusion,(truth,decided),1)

    n_id = sum(len(s) for s in id_scores)
    report = MetricsReport(
        per_class=per_class,
        class_accuracy=class_accuracy,
        average_accuracy=float(np.mean(class_accuracy)),
        accuracy=float(np.trace(confusion)/confusion.sum()),
        confusion=confusion.tolist(),
        id_acceptance=float(np.mean(decided[:n_id] != int(Label.OOD))),
        test_time=test_time,
        negatives=config.negatives,
        id_counts=[len(s) for s in id_scores],
        ood_count=len(ood_scores),
        ablation_cl=ablation_cl,
        ablation_mp_accuracy=mp_accuracy,
        ablation_mp_average_accuracy=float(np.mean(mp_accuracy)),
    )

    logger.info('evaluated %d ID and %d OOD frames in %s: accuracy %.4f, mean AUROC %.4f',n_id,len(ood_scores),elapsed(0.0,test_time),report.average_accuracy,report.mean_auroc)

    return report

###########
# display #
###########

def _row(name,cells,widths):
    return '  '.join([name.ljust(widths[0])]+[c.rjust(w) for c,w in zip(cells,widths[1:])])

def format_table(report):
    """ plain-text tables: OOD metrics per class (AUROC, AUPR_IN, AUPR_OUT, FPR95, test time),
    classification accuracy and the confusion matrix; rates in percent """

    lines = []

    # a. detection
    header = []
    for label in ID_LABELS:
        header += [f'{label.name} AUROC','AUPR_IN','AUPR_OUT','FPR95']
    header += ['Test Time (s)']
    widths = [8]+[max(len(h),7) for h in header]

    lines.append(_row('Method',header,widths))
    for name,metrics,t in (('FOOD',report.per_class,f'{report.test_time:.2f}'),('CL',report.ablation_cl,'')):
        cells = []
        for m in metrics:
            cells += [f'{100*m.auroc:.2f}',f'{100*m.aupr_in:.2f}',f'{100*m.aupr_out:.2f}',f'{100*m.fpr95:.2f}']
        lines.append(_row(name,cells+[t],widths))
    lines.append(f'(ID negatives: {report.negatives}; scoring pass {elapsed(0.0,report.test_time)})')
    lines.append('')

    # b. classification
    header = [label.name for label in ID_LABELS]+['Average']
    widths = [8]+[max(len(h),7) for h in header]
    lines.append(_row('Accuracy',header,widths))
    lines.append(_row('MP',[f'{100*a:.2f}' for a in report.ablation_mp_accuracy]+[f'{100*report.ablation_mp_average_accuracy:.2f}'],widths))
    lines.append(_row('MP+PLs',[f'{100*a:.2f}' for a in report.class_accuracy]+[f'{100*report.average_accuracy:.2f}'],widths))
    lines.append('')

    # c. confusion
    widths = [8]+[7]*len(ROW_LABELS)
    lines.append(_row('true\\dec',ROW_LABELS,widths))
    for name,row in zip(ROW_LABELS,report.confusion):
        lines.append(_row(name,[str(v) for v in row],widths))
    lines.append(f'overall accuracy {100*report.accuracy:.2f}, ID acceptance {100*report.id_acceptance:.2f}')

    return '\n'.join(lines)
