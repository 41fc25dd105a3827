# -*- coding: utf-8 -*-
"""cli

Command line front end:

    food synth --out data.raw --frames-per-class 200 --seed 1
    food train --data data.raw --config run.cfg --out run/model.ckpt
    food calibrate --ckpt run/model.ckpt --data data.raw
    food eval --ckpt run/model.ckpt --id data.raw --ood data.raw --report run/report.json
    food thresholds --ckpt run/model.ckpt
    food --dump-config

Exit codes: 0 success, 2 usage or configuration, 3 data, format or file system,
4 numeric failure.
"""

import argparse
import logging
import os
import sys
import time

from . import config as runconfig
from .adamax import init_state
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .dataset import ID_LABELS, Label, partition
from .detect import calibrate
from .errors import DataError, FoodError, NotCalibratedError, UsageError
from .metrics import evaluate, format_table
from .misc import elapsed
from .model import build
from .radar import synth_dataset
from .rawfile import load_dataset, save_dataset
from .train import train

logger = logging.getLogger(__name__)

RUN_CONFIG = 'run.cfg'
TRAIN_LOG = 'train_log.jsonl'

###########
# helpers #
###########

def _run_dir(path):
    """ directory of an output file (created if missing) """

    run_dir = os.path.dirname(os.path.abspath(path))
    os.makedirs(run_dir,exist_ok=True)
    return run_dir

def _config(args):
    cfg = runconfig.load(args.config) if getattr(args,'config',None) else runconfig.RunConfig()
    if getattr(args,'profile',None):
        cfg = runconfig.load(args.profile,base=cfg)
    return cfg

def _threads(args,cfg):
    threads = cfg.threads if args.threads is None else args.threads
    if threads < 1:
        raise UsageError(f'--threads must be >= 1, got {threads}')
    return threads

def _check_frames(dataset,cfg,path):
    expected = (cfg.model.encoder_channels[0],cfg.model.input_height,cfg.model.input_width)
    if tuple(dataset.frame_shape) != expected:
        raise DataError(f'{path}: frames of shape {tuple(dataset.frame_shape)}, the model expects {expected}')

############
# commands #
############

def cmd_synth(args):

    if args.frames_per_class < 1:
        raise UsageError(f'--frames-per-class must be >= 1, got {args.frames_per_class}')

    cfg = _config(args)
    cfg.seed = runconfig.resolve_seed(args.seed,cfg)
    threads = _threads(args,cfg)

    t0 = time.time()
    dataset = synth_dataset(args.frames_per_class,cfg.seed,cfg.synth,cfg.radar,threads)
    run_dir = _run_dir(args.out)
    save_dataset(args.out,dataset)
    runconfig.save(os.path.join(run_dir,RUN_CONFIG),cfg)

    counts = ', '.join(f'{label.name}={dataset.count(label)}' for label in (*ID_LABELS,Label.OOD))
    print(f'wrote {len(dataset)} frames ({counts}) to {args.out} in {elapsed(t0)}')

def cmd_train(args):

    cfg = _config(args)
    cfg.seed = runconfig.resolve_seed(args.seed,cfg)

    # a. model and optimizer
    if args.resume and os.path.isfile(args.out):
        ckpt = load_checkpoint(args.out)
        cfg.seed,cfg.model,cfg.optim = ckpt.config.seed,ckpt.config.model,ckpt.config.optim
        model,state,start_epoch = ckpt.model,ckpt.optimizer,ckpt.epoch
        thresholds = ckpt.thresholds
        if state is None:
            state = init_state(model.params,cfg.optim)
        logger.info('resuming from %s at epoch %d, step %d',args.out,start_epoch,state.t)
    else:
        model = build(cfg.model)
        state = init_state(model.params,cfg.optim)
        start_epoch = 0
        thresholds = None

    # b. data
    dataset = load_dataset(args.data)
    _check_frames(dataset,cfg,args.data)
    fit = partition(dataset,cfg.split,cfg.seed).fit

    # c. run directory
    run_dir = _run_dir(args.out)
    runconfig.save(os.path.join(run_dir,RUN_CONFIG),cfg)
    log_path = os.path.join(run_dir,TRAIN_LOG)

    with open(log_path,'a' if start_epoch > 0 else 'w',encoding='utf-8') as log:

        def on_epoch(record):
            line = record.to_json()
            print(line,flush=True)
            log.write(line+'\n')
            log.flush()
            save_checkpoint(args.out,Checkpoint(cfg,model,state,None,record.epoch))

        history = train(model,state,fit.per_class(),cfg.train,cfg.seed,start_epoch,on_epoch)

    # nothing trained: an existing calibration still holds
    if not history:
        save_checkpoint(args.out,Checkpoint(cfg,model,state,thresholds,start_epoch))

    logger.info('checkpoint written to %s',args.out)

def cmd_calibrate(args):

    ckpt = load_checkpoint(args.ckpt)
    cfg = ckpt.config
    threads = _threads(args,cfg)

    dataset = load_dataset(args.data)
    _check_frames(dataset,cfg,args.data)
    calibration = partition(dataset,cfg.split,cfg.seed).calibration

    ckpt.thresholds = calibrate(ckpt.model,calibration.per_class(),cfg.calibration,threads)
    save_checkpoint(args.ckpt,ckpt)

    _print_thresholds(ckpt.thresholds)

def cmd_eval(args):

    ckpt = load_checkpoint(args.ckpt)
    if ckpt.thresholds is None:
        raise NotCalibratedError(f'{args.ckpt} has no thresholds: run "food calibrate" first')
    cfg = ckpt.config
    threads = _threads(args,cfg)

    # a. data
    id_data = load_dataset(args.id)
    _check_frames(id_data,cfg,args.id)
    if cfg.split.eval_on == 'test':
        id_test = partition(id_data,cfg.split,cfg.seed).test
    else:
        id_test = id_data.id_only()

    ood_data = load_dataset(args.ood)
    _check_frames(ood_data,cfg,args.ood)
    ood_test = ood_data.by_label(Label.OOD)
    if len(ood_test) == 0:
        raise DataError(f'{args.ood}: no OOD frames')

    # b. report
    report = evaluate(ckpt.model,ckpt.thresholds,id_test.per_class(),ood_test.codes,cfg.eval,threads)
    table = format_table(report)

    run_dir = _run_dir(args.report)
    with open(args.report,'w',encoding='utf-8') as f:
        f.write(report.to_json()+'\n')
    with open(os.path.splitext(args.report)[0]+'.txt','w',encoding='utf-8') as f:
        f.write(table+'\n')
    runconfig.save(os.path.join(run_dir,RUN_CONFIG),cfg)

    print(table)

def cmd_thresholds(args):

    ckpt = load_checkpoint(args.ckpt)
    if ckpt.thresholds is None:
        raise NotCalibratedError(f'{args.ckpt} has no thresholds: run "food calibrate" first')

    _print_thresholds(ckpt.thresholds)

def _print_thresholds(thresholds):
    for label,tau,n,frac in zip(ID_LABELS,thresholds.tau,thresholds.counts,thresholds.achieved):
        print(f'{label.name}: tau={tau:.6g} coverage={frac:.4f} (n={n}, target {thresholds.coverage:.2f})')

##########
# parser #
##########

def build_parser():

    parser = argparse.ArgumentParser(prog='food',description='FOOD: radar face classification with out-of-distribution detection')
    parser.add_argument('--dump-config',action='store_true',help='print the default configuration and exit')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--threads',type=int,default=None,help='worker threads for scoring and generation')
    common.add_argument('--log-level',default='INFO',choices=['DEBUG','INFO','WARNING','ERROR'])

    sub = parser.add_subparsers(dest='command')

    p = sub.add_parser('synth',parents=[common],help='generate a synthetic FOODRAW1 file')
    p.add_argument('--out',required=True)
    p.add_argument('--frames-per-class',type=int,required=True)
    p.add_argument('--seed',type=int,default=None)
    p.add_argument('--profile',default=None,help='configuration file with synth.* and radar.* keys')
    p.add_argument('--config',default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser('train',parents=[common],help='train a model')
    p.add_argument('--data',required=True)
    p.add_argument('--config',default=None)
    p.add_argument('--out',required=True)
    p.add_argument('--seed',type=int,default=None)
    p.add_argument('--resume',action='store_true',help='continue from --out if it exists')
    p.set_defaults(func=cmd_train)

    p = sub.add_parser('calibrate',parents=[common],help='compute OOD thresholds')
    p.add_argument('--ckpt',required=True)
    p.add_argument('--data',required=True)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser('eval',parents=[common],help='evaluate a calibrated model')
    p.add_argument('--ckpt',required=True)
    p.add_argument('--id',required=True)
    p.add_argument('--ood',required=True)
    p.add_argument('--report',required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser('thresholds',parents=[common],help='print the stored thresholds')
    p.add_argument('--ckpt',required=True)
    p.set_defaults(func=cmd_thresholds)

    return parser

def main(argv=None):

    parser = build_parser()
    args = parser.parse_args(argv)

    if args.dump_config:
        sys.stdout.write(runconfig.dumps(runconfig.RunConfig()))
        return 0
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2

    logging.basicConfig(level=args.log_level,format='%(asctime)s %(name)s %(levelname)s: %(message)s',stream=sys.stderr)

    try:
        args.func(args)
    except FoodError as e:
        logger.debug('failed',exc_info=True)
        print(f'food {args.command}: error: {e}',file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.debug('failed',exc_info=True)
        print(f'food {args.command}: error: {e}',file=sys.stderr)
        return DataError.exit_code

    return 0
