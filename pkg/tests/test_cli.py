import json
import re

import numpy as np
import pytest

from food.checkpoint import load_checkpoint
from food.cli import RUN_CONFIG, TRAIN_LOG, main
from food.config import RunConfig, loads
from food.model import LOSS_FIELDS
from food.rawfile import load_dataset, save_dataset

TOY = '\n'.join([
    'seed = 1',
    'radar.n_chirps = 8',
    'radar.n_samples = 16',
    'model.encoder_channels = 3,4,8',
    'model.cl_latent = 8',
    'model.pl_latent = 4',
    'model.pl_pool_factor = 2',
    'model.input_height = 8',
    'model.input_width = 16',
    'train.epochs = 2',
    'train.batch_size = 4',
])+'\n'

@pytest.fixture
def run(tmp_path):
    """ toy config and synthetic data in a fresh directory """

    cfg = tmp_path/'toy.cfg'
    cfg.write_text(TOY)
    data = tmp_path/'data'/'frames.raw'
    assert main(['synth','--config',str(cfg),'--out',str(data),'--frames-per-class','10']) == 0
    return tmp_path,str(cfg),str(data)

def trained(run):
    tmp_path,cfg,data = run
    ckpt = str(tmp_path/'run'/'model.ckpt')
    assert main(['train','--data',data,'--config',cfg,'--out',ckpt]) == 0
    return ckpt

def log_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.startswith('{')]

#########
# synth #
#########

def test_synth(run,capsys):

    tmp_path,cfg,data = run
    ds = load_dataset(data)

    assert len(ds) == 40
    assert ds.frame_shape == (3,8,16)
    assert loads((tmp_path/'data'/RUN_CONFIG).read_text()).radar.n_chirps == 8

    again = str(tmp_path/'again.raw')
    assert main(['synth','--config',cfg,'--out',again,'--frames-per-class','10']) == 0
    with open(data,'rb') as a, open(again,'rb') as b:
        assert a.read() == b.read()

    other = str(tmp_path/'other.raw')
    assert main(['synth','--config',cfg,'--out',other,'--frames-per-class','10','--seed','2']) == 0
    assert not np.array_equal(load_dataset(other).codes,ds.codes)

def test_synth_creates_output_directory(tmp_path,capsys):

    out = tmp_path/'new'/'nested'/'frames.raw'

    (tmp_path/'toy.cfg').write_text(TOY)
    assert main(['synth','--config',str(tmp_path/'toy.cfg'),'--out',str(out),'--frames-per-class','2']) == 0
    assert len(load_dataset(str(out))) == 8
    assert (tmp_path/'new'/'nested'/RUN_CONFIG).exists()

def test_unwritable_output_is_a_data_error(tmp_path,capsys):

    (tmp_path/'blocker').write_text('a file, not a directory')
    cfg = tmp_path/'toy.cfg'
    cfg.write_text(TOY)

    code = main(['synth','--config',str(cfg),'--out',str(tmp_path/'blocker'/'frames.raw'),'--frames-per-class','2'])

    assert code == 3
    assert 'food synth: error:' in capsys.readouterr().err

def test_synth_needs_frames(tmp_path,capsys):

    assert main(['synth','--out',str(tmp_path/'x.raw'),'--frames-per-class','0']) == 2
    assert 'frames-per-class' in capsys.readouterr().err
    assert not (tmp_path/'x.raw').exists()

def test_bad_config_is_a_usage_error(tmp_path,capsys):

    cfg = tmp_path/'bad.cfg'
    cfg.write_text('seed = 1\nmodel.depth = 4\n')

    assert main(['synth','--config',str(cfg),'--out',str(tmp_path/'x.raw'),'--frames-per-class','2']) == 2
    assert 'line 2' in capsys.readouterr().err

#########
# train #
#########

def test_train(run,capsys):

    tmp_path,_,_ = run
    capsys.readouterr()
    ckpt = trained(run)

    lines = log_lines(capsys.readouterr().out)
    assert [line['epoch'] for line in lines] == [1,2]
    assert [line['step'] for line in lines] == [2,4]
    for line in lines:
        assert list(line['losses']) == list(LOSS_FIELDS)

    assert log_lines((tmp_path/'run'/TRAIN_LOG).read_text()) == lines
    loaded = load_checkpoint(ckpt)
    assert loaded.epoch == 2
    assert loaded.optimizer.t == 4
    assert loaded.thresholds is None

def test_train_missing_data(tmp_path,capsys):

    code = main(['train','--data',str(tmp_path/'nope.raw'),'--out',str(tmp_path/'model.ckpt')])

    assert code == 3
    assert 'nope.raw' in capsys.readouterr().err

def test_train_wrong_frame_shape(run,capsys):

    tmp_path,_,data = run

    # default model expects 3x64x128 frames
    assert main(['train','--data',data,'--out',str(tmp_path/'model.ckpt')]) == 3
    assert 'expects' in capsys.readouterr().err

def test_resume_continues_step_counter(run,capsys):

    tmp_path,cfg,data = run
    ckpt = trained(run)

    longer = tmp_path/'longer.cfg'
    longer.write_text(TOY+'train.epochs = 3\n')
    capsys.readouterr()
    assert main(['train','--data',data,'--config',str(longer),'--out',ckpt,'--resume']) == 0

    lines = log_lines(capsys.readouterr().out)
    assert [(line['epoch'],line['step']) for line in lines] == [(3,6)]
    assert [line['epoch'] for line in log_lines((tmp_path/'run'/TRAIN_LOG).read_text())] == [1,2,3]
    assert load_checkpoint(ckpt).epoch == 3

def test_resume_without_epochs_left_keeps_thresholds(run,capsys):

    _,cfg,data = run
    ckpt = trained(run)
    assert main(['calibrate','--ckpt',ckpt,'--data',data]) == 0
    calibrated = load_checkpoint(ckpt).thresholds

    assert main(['train','--data',data,'--config',cfg,'--out',ckpt,'--resume']) == 0

    loaded = load_checkpoint(ckpt)
    assert loaded.epoch == 2
    assert loaded.thresholds is not None
    assert loaded.thresholds.tau == calibrated.tau
    assert loaded.thresholds.counts == calibrated.counts
    assert main(['thresholds','--ckpt',ckpt]) == 0

#############
# calibrate #
#############

def test_calibrate(run,capsys):

    _,_,data = run
    ckpt = trained(run)
    capsys.readouterr()

    assert main(['calibrate','--ckpt',ckpt,'--data',data]) == 0
    out = capsys.readouterr().out
    coverage = [float(c) for c in re.findall(r'coverage=([0-9.]+)',out)]
    assert len(coverage) == 3
    assert all(c >= 0.95 for c in coverage)

    with open(ckpt,'rb') as f:
        first = f.read()
    assert main(['calibrate','--ckpt',ckpt,'--data',data]) == 0
    with open(ckpt,'rb') as f:
        assert f.read() == first

    assert main(['thresholds','--ckpt',ckpt]) == 0
    assert 'PER3: tau=' in capsys.readouterr().out

def test_thresholds_before_calibration(run,capsys):

    ckpt = trained(run)
    assert main(['thresholds','--ckpt',ckpt]) == 2

########
# eval #
########

def test_eval(run,capsys):

    tmp_path,_,data = run
    ckpt = trained(run)
    assert main(['calibrate','--ckpt',ckpt,'--data',data]) == 0

    reports = []
    for name in ('a','b'):
        path = tmp_path/'run'/f'{name}.json'
        assert main(['eval','--ckpt',ckpt,'--id',data,'--ood',data,'--report',str(path)]) == 0
        reports.append(json.loads(path.read_text()))
        assert (tmp_path/'run'/f'{name}.txt').exists()

    report = reports[0]
    assert len(report['per_class']) == 3
    assert set(report['per_class'][0]) == {'auroc','aupr_in','aupr_out','fpr95'}
    assert np.array(report['confusion']).shape == (4,4)
    assert report['id_counts'] == [1,1,1]
    assert report['ood_count'] == 10
    assert 'accuracy' in report

    for r in reports:
        del r['test_time']
    assert reports[0] == reports[1]

def test_eval_requires_calibration(run,capsys):

    tmp_path,_,data = run
    ckpt = trained(run)
    capsys.readouterr()

    assert main(['eval','--ckpt',ckpt,'--id',data,'--ood',data,'--report',str(tmp_path/'r.json')]) == 2
    assert 'calibrate' in capsys.readouterr().err
    assert not (tmp_path/'r.json').exists()

def test_eval_without_ood_frames(run,capsys):

    tmp_path,_,data = run
    ckpt = trained(run)
    assert main(['calibrate','--ckpt',ckpt,'--data',data]) == 0

    id_only = str(tmp_path/'id_only.raw')
    save_dataset(id_only,load_dataset(data).id_only())

    assert main(['eval','--ckpt',ckpt,'--id',data,'--ood',id_only,'--report',str(tmp_path/'r.json')]) == 3
    assert 'no OOD frames' in capsys.readouterr().err

#########
# other #
#########

def test_dump_config(capsys):

    assert main(['--dump-config']) == 0
    assert loads(capsys.readouterr().out) == RunConfig()

def test_no_command(capsys):

    assert main([]) == 2

def test_argparse_usage_errors():

    with pytest.raises(SystemExit) as e:
        main(['train','--out','x.ckpt'])
    assert e.value.code == 2
