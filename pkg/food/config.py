# -*- coding: utf-8 -*-
"""config

Run configuration: one dataclass per concern gathered in RunConfig, stored as
plain text lines

    # comment
    seed = 7
    model.encoder_channels = 3,16,32,64
    optim.alpha = 0.002

Unknown keys and malformed values are rejected with the offending line.
"""

import dataclasses
import logging
import os
from dataclasses import dataclass, field

from .adamax import AdamaxConfig
from .dataset import SplitConfig
from .detect import CalibrationConfig
from .errors import ConfigError
from .metrics import EvalConfig
from .model import FoodConfig
from .radar import RadarConfig, SynthConfig
from .train import TrainConfig

logger = logging.getLogger(__name__)

SEED_ENV = 'FOOD_SEED'

SECTIONS = {
    'model': FoodConfig,
    'optim': AdamaxConfig,
    'train': TrainConfig,
    'split': SplitConfig,
    'calibration': CalibrationConfig,
    'eval': EvalConfig,
    'synth': SynthConfig,
    'radar': RadarConfig,
}

@dataclass
class RunConfig:
    """ everything a run needs besides its data """

    seed: int = 0
    threads: int = 1
    model: FoodConfig = field(default_factory=FoodConfig)
    optim: AdamaxConfig = field(default_factory=AdamaxConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    radar: RadarConfig = field(default_factory=RadarConfig)

    def validate(self):
        if self.threads < 1:
            raise ConfigError(f'threads must be >= 1, got {self.threads}')
        for section in SECTIONS:
            getattr(self,section).validate()

###########
# parsing #
###########

_TRUE = ('true','yes','on','1')
_FALSE = ('false','no','off','0')

def _convert(text,default,where):
    """ convert text to the type of the default value """

    try:
        if isinstance(default,bool):
            if text.lower() in _TRUE: return True
            if text.lower() in _FALSE: return False
            raise ValueError(text)
        if isinstance(default,int):
            return int(text)
        if isinstance(default,float):
            return float(text)
        if isinstance(default,tuple):
            items = [item.strip() for item in text.split(',') if item.strip()]
            if not items:
                raise ValueError(text)
            kind = type(default[0]) if default else float
            return tuple(kind(item) for item in items)
        return text
    except ValueError:
        raise ConfigError(f'{where}: cannot read {text!r} as {type(default).__name__}') from None

def loads(text,base=None):
    """ parse configuration text

    Args:

        text (str): key = value lines
        base (RunConfig,optional): values not set by text (default: all defaults)

    Returns:

        (RunConfig): configuration

    """

    base = RunConfig() if base is None else base
    top = {}
    sections = {name: {} for name in SECTIONS}

    for lineno,raw in enumerate(text.splitlines(),1):

        line = raw.split('#',1)[0].strip()
        if not line:
            continue

        where = f'line {lineno}'
        if '=' not in line:
            raise ConfigError(f'{where}: expected "key = value", got {raw.strip()!r}')

        key,value = (part.strip() for part in line.split('=',1))
        if '.' in key:
            section,name = key.split('.',1)
            if section not in SECTIONS:
                raise ConfigError(f'{where}: unknown section {section!r}')
            current = getattr(base,section)
            if name not in {f.name for f in dataclasses.fields(current)}:
                raise ConfigError(f'{where}: unknown key {key!r}')
            sections[section][name] = _convert(value,getattr(current,name),where)
        else:
            if key not in ('seed','threads'):
                raise ConfigError(f'{where}: unknown key {key!r}')
            top[key] = _convert(value,getattr(base,key),where)

    cfg = dataclasses.replace(base,**top,**{name: dataclasses.replace(getattr(base,name),**values) for name,values in sections.items()})
    cfg.validate()

    return cfg

def _format(value):
    if isinstance(value,bool):
        return 'true' if value else 'false'
    if isinstance(value,tuple):
        return ','.join(_format(item) for item in value)
    if isinstance(value,float):
        return repr(value)
    return str(value)

def dumps(cfg):
    """ configuration text that loads back to an equal RunConfig """

    lines = [f'seed = {cfg.seed}',f'threads = {cfg.threads}']
    for section in SECTIONS:
        obj = getattr(cfg,section)
        lines.append('')
        lines.append(f'# {section}')
        for f in dataclasses.fields(obj):
            lines.append(f'{section}.{f.name} = {_format(getattr(obj,f.name))}')

    return '\n'.join(lines)+'\n'

def load(path,base=None):

    if not os.path.isfile(path):
        raise ConfigError(f'{path}: no such configuration file')

    with open(path,'r',encoding='utf-8') as f:
        text = f.read()

    try:
        return loads(text,base)
    except ConfigError as e:
        raise ConfigError(f'{path}: {e}') from None

def save(path,cfg):
    with open(path,'w',encoding='utf-8') as f:
        f.write(dumps(cfg))

def resolve_seed(flag=None,cfg=None):
    """ seed from the command line flag, else the FOOD_SEED environment variable, else the configuration """

    if flag is not None:
        return int(flag)

    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f'{SEED_ENV}={env!r} is not an integer') from None

    return 0 if cfg is None else cfg.seed
