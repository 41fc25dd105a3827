import json

import numpy as np
import pytest

from food import adamax
from food.checkpoint import Checkpoint, dumps, loads
from food.config import loads as config_loads
from food.errors import ConfigError, DataError
from food.model import LOSS_FIELDS, build
from food.train import TrainConfig, epoch_batches, epoch_rng, steps_per_epoch, train

CFG = config_loads('\n'.join([
    'model.encoder_channels = 3,4,8',
    'model.cl_latent = 8',
    'model.pl_latent = 4',
    'model.pl_pool_factor = 2',
    'model.input_height = 8',
    'model.input_width = 16',
    'train.epochs = 2',
    'train.batch_size = 4',
]))

@pytest.fixture(scope='module')
def per_class():
    rng = np.random.default_rng(0)
    return [rng.integers(1000,3000,size=(n,3,8,16)).astype(np.uint16) for n in (9,8,10)]

def fresh():
    model = build(CFG.model)
    return model,adamax.init_state(model.params,CFG.optim)

###########
# batches #
###########

def test_steps_per_epoch():

    assert steps_per_epoch([9,8,10],4) == 2
    assert steps_per_epoch([100,100,100],32) == 3
    assert steps_per_epoch([3,8,10],4) == 1 # batch capped at the smallest class
    with pytest.raises(DataError):
        steps_per_epoch([0,8,10],4)

def test_batches_are_balanced(per_class):

    batches = list(epoch_batches(per_class,4,epoch_rng(0,1)))

    assert len(batches) == 2
    for batch in batches:
        assert [len(codes) for codes in batch] == [4,4,4]

def test_batches_do_not_repeat_within_an_epoch():

    codes = np.arange(12,dtype=np.uint16).reshape(12,1,1,1)
    batches = list(epoch_batches([codes,codes,codes],3,epoch_rng(5,2)))

    seen = np.concatenate([batch[0].ravel() for batch in batches])
    assert len(batches) == 4
    assert sorted(seen.tolist()) == list(range(12))

def test_epoch_order_depends_on_seed_and_epoch():

    a = epoch_rng(1,1).permutation(50)
    assert np.array_equal(a,epoch_rng(1,1).permutation(50))
    assert not np.array_equal(a,epoch_rng(1,2).permutation(50))
    assert not np.array_equal(a,epoch_rng(2,1).permutation(50))

############
# training #
############

def test_history_records(per_class):

    model,state = fresh()
    seen = []
    history = train(model,state,per_class,CFG.train,seed=0,on_epoch=seen.append)

    assert [r.epoch for r in history] == [1,2]
    assert [r.step for r in history] == [2,4]
    assert seen == history
    for r in history:
        assert list(r.losses) == list(LOSS_FIELDS)
        assert len(r.losses) == 8
        assert r.losses['total'] == pytest.approx(sum(v for k,v in r.losses.items() if k != 'total'),rel=1e-5)
        line = json.loads(r.to_json())
        assert set(line) == {'epoch','step','losses'}
        assert len(line['losses']) == 8

def test_training_reduces_loss(per_class):

    model,state = fresh()
    cfg = TrainConfig(epochs=8,batch_size=4)
    history = train(model,state,per_class,cfg,seed=0)

    assert history[-1].losses['total'] < history[0].losses['total']

def test_resume_matches_uninterrupted_run(per_class):

    model,state = fresh()
    full = train(model,state,per_class,CFG.train,seed=3)

    resumed_model,resumed_state = fresh()
    first = train(resumed_model,resumed_state,per_class,TrainConfig(epochs=1,batch_size=4),seed=3)
    ckpt = loads(dumps(Checkpoint(CFG,resumed_model,resumed_state,epoch=first[-1].epoch)))
    rest = train(ckpt.model,ckpt.optimizer,per_class,CFG.train,seed=3,start_epoch=ckpt.epoch)

    assert [r.epoch for r in rest] == [2]
    assert rest[0].step == full[-1].step == 4
    assert rest[0].losses == full[-1].losses
    for name,p in model.params.items():
        assert ckpt.model[name].data.tobytes() == p.data.tobytes()

def test_nothing_left_to_train(per_class):

    model,state = fresh()
    assert train(model,state,per_class,CFG.train,start_epoch=2) == []
    assert state.t == 0

def test_missing_class(per_class):

    model,state = fresh()
    with pytest.raises(DataError,match='PER3'):
        train(model,state,[per_class[0],per_class[1],per_class[2][:0]],CFG.train)

def test_invalid_config():

    with pytest.raises(ConfigError):
        TrainConfig(batch_size=0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(epochs=-1).validate()
