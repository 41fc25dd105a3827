# -*- coding: utf-8 -*-
"""radar

FMCW radar configuration and a synthetic raw ADC frame generator.

A scatterer at range R produces a beat (IF) tone f_b = 2*R*B/(c*T_c) along
fast time. Each frame stacks n_chirps chirps of n_samples ADC samples for
every receiver; slow-time phase drift, phase jitter, per-frame range jitter
(head motion) and white noise make frames of one profile differ.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, FrameCube, ID_LABELS, Label
from .errors import ConfigError, DataError, UsageError
from .misc import parallel_map

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 3.0e8
AMPLITUDE_BUDGET = 0.9 # max sum of amplitudes times gain (fraction of full scale)
RANGE_MIN = 0.05
RANGE_MAX = 1.0

##########
# config #
##########

@dataclass(frozen=True)
class RadarConfig:
    """ FMCW radar configuration (60 GHz, 1 Tx, 3 Rx) """

    n_tx: int = 1
    n_rx: int = 3
    n_chirps: int = 64
    n_samples: int = 128
    frame_period: float = 50.0e-3
    chirp_to_chirp: float = 391.55e-6
    f_min: float = 60.1e9
    f_max: float = 61.1e9
    bandwidth: float = 1.0e9
    adc_rate: float = 2.0e6
    adc_bits: int = 12

    @property
    def chirp_duration(self):
        return self.n_samples/self.adc_rate

    @property
    def frame_shape(self):
        return (self.n_rx,self.n_chirps,self.n_samples)

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT/self.f_min

    def validate(self):

        for name in ('n_tx','n_rx','n_chirps','n_samples','frame_period','chirp_to_chirp','f_min','f_max','bandwidth','adc_rate','adc_bits'):
            if not getattr(self,name) > 0:
                raise ConfigError(f'radar.{name} must be positive')

        if abs(self.bandwidth-(self.f_max-self.f_min)) > 1.0:
            raise ConfigError(f'radar.bandwidth {self.bandwidth} differs from f_max-f_min = {self.f_max-self.f_min}')
        if not self.chirp_to_chirp > self.chirp_duration:
            raise ConfigError(f'radar.chirp_to_chirp {self.chirp_to_chirp} must exceed the chirp duration {self.chirp_duration}')

def beat_frequency(range_m,config):
    """ beat frequency of a scatterer

    Args:

        range_m (double): range in meters
        config (RadarConfig): radar configuration

    Returns:

        (double): beat frequency in Hz, 2*R*B/(c*T_c)

    """

    return 2.0*range_m*config.bandwidth/(SPEED_OF_LIGHT*config.chirp_duration)

############
# profiles #
############

@dataclass(frozen=True)
class Scatterer:
    range_m: float
    amplitude: float
    phase_jitter_std: float = 0.0

@dataclass(frozen=True)
class SyntheticProfile:
    """ reflecting scene of one subject

    scatterers: tuple of Scatterer (amplitudes as fractions of ADC full scale)
    gains: per-receiver gain
    noise_std: white noise std (fraction of full scale)
    drift: per-chirp phase drift (radians per chirp)
    range_jitter_m: per-frame range jitter std (head motion)
    """

    scatterers: tuple
    gains: tuple = (1.0,1.0,1.0)
    noise_std: float = 0.0
    drift: float = 0.0
    range_jitter_m: float = 0.0

    def validate(self,config):

        if len(self.gains) != config.n_rx:
            raise DataError(f'profile has {len(self.gains)} receiver gains, radar has {config.n_rx} receivers')
        if min(self.gains,default=1.0) < 0:
            raise DataError('receiver gains must be nonnegative')
        if self.noise_std < 0 or self.range_jitter_m < 0:
            raise DataError('noise_std and range_jitter_m must be nonnegative')

        for sc in self.scatterers:
            if not RANGE_MIN <= sc.range_m <= RANGE_MAX:
                raise DataError(f'scatterer range {sc.range_m} m outside [{RANGE_MIN},{RANGE_MAX}] m')
            if sc.amplitude < 0 or sc.phase_jitter_std < 0:
                raise DataError('scatterer amplitude and phase jitter must be nonnegative')

        peak = sum(sc.amplitude for sc in self.scatterers)*max(self.gains,default=1.0)
        if peak > AMPLITUDE_BUDGET:
            raise DataError(f'profile peak amplitude {peak:.3f} exceeds the quantization budget {AMPLITUDE_BUDGET}')

@dataclass
class SynthConfig:
    """ synthetic population parameters """

    noise_std: float = 0.01
    phase_jitter_std: float = 0.05
    drift: float = 0.002
    range_jitter_m: float = 0.002
    ood_subjects: int = 13
    ood_range_min: float = 0.5
    ood_range_max: float = 0.95
    id_ranges: tuple = field(default=(0.20,0.28,0.36))

    def validate(self):
        if self.ood_subjects < 1:
            raise ConfigError('synth.ood_subjects must be >= 1')
        if not RANGE_MIN <= self.ood_range_min < self.ood_range_max <= RANGE_MAX:
            raise ConfigError('synth.ood_range_min/max must satisfy 0.05 <= min < max <= 1.0')
        if len(self.id_ranges) != len(ID_LABELS):
            raise ConfigError(f'synth.id_ranges needs {len(ID_LABELS)} values')
        if max(self.id_ranges)+0.08 >= self.ood_range_min:
            raise ConfigError('synth.id_ranges must stay below synth.ood_range_min')

def id_profiles(config=None):
    """ the three enrolled subjects: 2, 3 and 4 scatterers near 25 cm

    The dominant scatterer of class j sits at config.id_ranges[j]; the weaker
    ones stay within 8 cm of it.

    Args:

        config (SynthConfig,optional): population parameters

    Returns:

        (list): three SyntheticProfile

    """

    config = SynthConfig() if config is None else config
    jit = config.phase_jitter_std

    def profile(main,extra,gains):
        scatterers = (Scatterer(main,extra[0],jit),)+tuple(Scatterer(main+dr,a,jit) for dr,a in extra[1:])
        return SyntheticProfile(scatterers,gains,config.noise_std,config.drift,config.range_jitter_m)

    r1,r2,r3 = config.id_ranges
    return [
        profile(r1,(0.35,(0.06,0.08)),(1.00,0.95,0.90)),
        profile(r2,(0.30,(-0.06,0.06),(0.07,0.06)),(0.90,1.00,0.95)),
        profile(r3,(0.28,(-0.08,0.05),(-0.04,0.05),(0.06,0.04)),(0.95,0.90,1.00)),
    ]

def ood_profiles(config,rng):
    """ unseen subjects with scatterers drawn from ranges disjoint from the ID ones

    Args:

        config (SynthConfig): population parameters
        rng (numpy.random.Generator): random generator

    Returns:

        (list): config.ood_subjects SyntheticProfile

    """

    profiles = []
    for _ in range(config.ood_subjects):

        # a. count and ranges
        n = int(rng.integers(2,6))
        ranges = rng.uniform(config.ood_range_min,config.ood_range_max,size=n)

        # b. one dominant scatterer, weaker others
        amplitudes = np.concatenate([rng.uniform(0.20,0.35,size=1),rng.uniform(0.03,0.08,size=n-1)])
        gains = tuple(float(g) for g in rng.uniform(0.85,1.0,size=3))

        scatterers = tuple(Scatterer(float(r),float(a),config.phase_jitter_std) for r,a in zip(ranges,amplitudes))
        profiles.append(SyntheticProfile(scatterers,gains,config.noise_std,config.drift,config.range_jitter_m))

    return profiles

##############
# generation #
##############

def quantize(signal,bits=12):
    """ map a signal in full-scale units [-1,1] to unsigned ADC codes centered at 2^(bits-1) """

    mid = 2**(bits-1)
    codes = np.rint(mid+(mid-1)*signal)
    return np.clip(codes,0,2**bits-1).astype(np.uint16)

def synth_frame(profile,config,rng,label=Label.UNLABELED):
    """ synthesize one raw frame

    Per receiver r, chirp c and sample s the signal is
    sum_k A_k*g_r*cos(2*pi*f_b,k*s/adc_rate + phi_{r,c,k}) plus gaussian noise,
    quantized to 12-bit codes centered at 2048.

    Args:

        profile (SyntheticProfile): subject
        config (RadarConfig): radar configuration
        rng (numpy.random.Generator): random generator
        label (Label,optional): label of the frame

    Returns:

        (FrameCube): frame

    """

    profile.validate(config)

    s = np.arange(config.n_samples)
    c = np.arange(config.n_chirps)
    gains = np.asarray(profile.gains,dtype=np.float64)[:,None,None]

    signal = np.zeros(config.frame_shape)
    for sc in profile.scatterers:

        # a. range of this frame
        range_m = sc.range_m
        if profile.range_jitter_m > 0:
            range_m += profile.range_jitter_m*rng.standard_normal()
        f_b = beat_frequency(range_m,config)

        # b. slow-time phase
        phase = 4.0*np.pi*range_m/config.wavelength+profile.drift*c[None,:]
        phase = np.broadcast_to(phase,(config.n_rx,config.n_chirps))
        if sc.phase_jitter_std > 0:
            phase = phase+sc.phase_jitter_std*rng.standard_normal((config.n_rx,config.n_chirps))

        # c. fast-time tone
        signal += sc.amplitude*gains*np.cos(2.0*np.pi*f_b*s[None,None,:]/config.adc_rate+phase[:,:,None])

    if profile.noise_std > 0:
        signal += profile.noise_std*rng.standard_normal(config.frame_shape)

    return FrameCube(quantize(signal,config.adc_bits),label)

def frame_rng(seed,stream,index):
    """ independent random stream of one frame, derived from (seed,stream,index) """

    return np.random.default_rng([seed,stream,index])

def generate(profiles,n_frames,label,config,seed,stream,threads=1):
    """ codes of n_frames frames, frame k drawn from profiles[k % len(profiles)]

    Args:

        profiles (list): SyntheticProfile
        n_frames (int): number of frames
        label (Label): label of the frames
        config (RadarConfig): radar configuration
        seed (int): seed
        stream (int): stream id (one per population)
        threads (int,optional): worker threads

    Returns:

        (numpy.ndarray): codes of shape [n_frames,n_rx,n_chirps,n_samples]

    """

    def one(k):
        rng = frame_rng(seed,stream,k)
        return synth_frame(profiles[k % len(profiles)],config,rng,label).codes

    frames = parallel_map(one,range(n_frames),threads)
    if not frames:
        return np.zeros((0,)+config.frame_shape,dtype=np.uint16)

    return np.stack(frames)

def synth_dataset(n_per_class,seed,synth=None,radar=None,threads=1):
    """ synthetic PER1, PER2, PER3 and OOD populations

    Args:

        n_per_class (int): frames per population
        seed (int): seed
        synth (SynthConfig,optional): population parameters
        radar (RadarConfig,optional): radar configuration
        threads (int,optional): worker threads

    Returns:

        (Dataset): 4*n_per_class frames ordered PER1, PER2, PER3, OOD

    """

    synth = SynthConfig() if synth is None else synth
    radar = RadarConfig() if radar is None else radar
    synth.validate()
    radar.validate()
    if n_per_class < 1:
        raise UsageError(f'frames per class must be >= 1, got {n_per_class}')

    # a. enrolled subjects
    codes = []
    labels = []
    for profile,label in zip(id_profiles(synth),ID_LABELS):
        codes.append(generate([profile],n_per_class,label,radar,seed,int(label),threads))
        labels.append(np.full(n_per_class,int(label),dtype=np.uint8))

    # b. unseen subjects
    subjects = ood_profiles(synth,np.random.default_rng([seed,len(ID_LABELS)+1]))
    codes.append(generate(subjects,n_per_class,Label.OOD,radar,seed,int(Label.OOD),threads))
    labels.append(np.full(n_per_class,int(Label.OOD),dtype=np.uint8))

    logger.info('synthesized %d frames per population (%d OOD subjects)',n_per_class,len(subjects))

    return Dataset(np.concatenate(codes),np.concatenate(labels))

############
# analysis #
############

def dominant_bin(codes,n_fft=1024):
    """ peak bin of the zero-padded fast-time magnitude spectrum

    The DC component of every chirp is removed and the magnitude spectrum is
    averaged over all leading axes before the peak search (DC excluded).

    Args:

        codes (numpy.ndarray): codes of shape [...,n_samples]
        n_fft (int,optional): FFT length

    Returns:

        (int): peak bin (bin width adc_rate/n_fft)

    """

    x = np.asarray(codes,dtype=np.float64)
    x = x-x.mean(axis=-1,keepdims=True)
    spectrum = np.abs(np.fft.rfft(x,n=n_fft,axis=-1))
    spectrum = spectrum.reshape(-1,spectrum.shape[-1]).mean(axis=0)

    return int(np.argmax(spectrum[1:]))+1
