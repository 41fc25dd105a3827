import numpy as np
import pytest

from food import adamax
from food.config import RunConfig
from food.dataset import partition
from food.detect import calibrate, decide_batch
from food.metrics import evaluate
from food.model import build, score_codes
from food.radar import synth_dataset
from food.train import TrainConfig, train

pytestmark = pytest.mark.slow

def run(seed,frames_per_class,epochs):
    """ synthetic run with the default radar, network and optimizer """

    cfg = RunConfig(seed=seed,threads=4,train=TrainConfig(epochs=epochs,batch_size=32))

    data = synth_dataset(frames_per_class,cfg.seed,cfg.synth,cfg.radar,cfg.threads)
    parts = partition(data,cfg.split,cfg.seed)
    ood = data.by_label(3)

    model = build(cfg.model)
    state = adamax.init_state(model.params,cfg.optim)
    train(model,state,parts.fit.per_class(),cfg.train,cfg.seed)

    thresholds = calibrate(model,parts.calibration.per_class(),cfg.calibration,cfg.threads)
    report = evaluate(model,thresholds,parts.test.per_class(),ood.codes,cfg.eval,cfg.threads)

    return model,thresholds,parts,report

@pytest.fixture(scope='module')
def result():
    return run(0,2000,30)

@pytest.fixture(scope='module',params=[0,1,2])
def seeded_report(request):
    """ shorter runs over three seeds """

    _,_,_,report = run(request.param,600,12)
    return report

def test_classification_accuracy(result):

    _,_,_,report = result
    assert report.average_accuracy >= 0.90

def test_detection(result):

    _,_,_,report = result
    for m in report.per_class:
        assert m.auroc >= 0.90
        assert m.fpr95 <= 0.30

def test_id_acceptance(result):

    model,thresholds,parts,_ = result

    scores = score_codes(model,parts.test.codes,64,4)
    labels = decide_batch(scores.ood(),scores.cls(),thresholds)

    assert np.mean(labels != 3) == pytest.approx(0.95,abs=0.03)

def test_ablations_point_the_same_way(seeded_report):

    report = seeded_report

    assert report.average_accuracy >= report.ablation_mp_average_accuracy
    assert report.mean_auroc >= np.mean([m.auroc for m in report.ablation_cl])
