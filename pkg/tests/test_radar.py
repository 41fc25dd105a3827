import numpy as np
import pytest

from food.dataset import ID_LABELS, Label
from food.errors import ConfigError, DataError, UsageError
from food.radar import (AMPLITUDE_BUDGET, RadarConfig, Scatterer, SynthConfig, SyntheticProfile,
                        beat_frequency, dominant_bin, frame_rng, id_profiles, ood_profiles,
                        quantize, synth_dataset, synth_frame)

CFG = RadarConfig()
SMALL = RadarConfig(n_chirps=8,n_samples=16)

def test_table_values():

    assert CFG.frame_shape == (3,64,128)
    assert CFG.chirp_duration == pytest.approx(64e-6)
    assert CFG.bandwidth == CFG.f_max-CFG.f_min
    CFG.validate()

def test_inconsistent_radar_config():

    with pytest.raises(ConfigError):
        RadarConfig(bandwidth=2.0e9).validate()
    with pytest.raises(ConfigError):
        RadarConfig(chirp_to_chirp=10e-6).validate()

def test_beat_frequency():

    assert beat_frequency(0.25,CFG) == pytest.approx(26041.67,abs=0.01)
    assert beat_frequency(0.0,CFG) == 0.0
    assert beat_frequency(0.5,CFG) == pytest.approx(2*beat_frequency(0.25,CFG))

def test_empty_scene_is_mid_code():

    frame = synth_frame(SyntheticProfile(()),CFG,frame_rng(0,0,0))

    assert frame.codes.shape == (3,64,128)
    assert np.all(frame.codes == 2048)

def test_single_scatterer_period():

    profile = SyntheticProfile((Scatterer(0.25,0.5),))
    frame = synth_frame(profile,CFG,frame_rng(0,0,0))

    n_fft = 4096
    period = n_fft/dominant_bin(frame.codes,n_fft)

    assert CFG.adc_rate/beat_frequency(0.25,CFG) == pytest.approx(76.8)
    assert period == pytest.approx(76.8,rel=0.05)

def test_same_seed_same_frame():

    profile = id_profiles()[1]
    a = synth_frame(profile,CFG,frame_rng(5,1,7),Label.PER2)
    b = synth_frame(profile,CFG,frame_rng(5,1,7),Label.PER2)
    c = synth_frame(profile,CFG,frame_rng(5,1,8),Label.PER2)

    assert a.codes.tobytes() == b.codes.tobytes()
    assert a.codes.tobytes() != c.codes.tobytes()
    assert a.label == Label.PER2

def test_profile_bounds():

    with pytest.raises(DataError,match='range'):
        synth_frame(SyntheticProfile((Scatterer(1.5,0.1),)),CFG,frame_rng(0,0,0))
    with pytest.raises(DataError,match='budget'):
        synth_frame(SyntheticProfile((Scatterer(0.3,0.6),Scatterer(0.4,0.5))),CFG,frame_rng(0,0,0))
    with pytest.raises(DataError,match='gains'):
        synth_frame(SyntheticProfile((Scatterer(0.3,0.1),),gains=(1.0,1.0)),CFG,frame_rng(0,0,0))

def test_quantization_never_clips_within_budget():

    signal = AMPLITUDE_BUDGET*np.cos(np.linspace(0,20,1000))
    codes = quantize(signal)

    assert codes.min() > 0 and codes.max() < 4095
    assert quantize(np.zeros(3)).tolist() == [2048]*3

def test_profiles_respect_budget():

    synth = SynthConfig()
    profiles = id_profiles(synth)+ood_profiles(synth,np.random.default_rng(0))

    assert len(profiles) == 3+13
    for profile in profiles:
        profile.validate(CFG)
    assert [len(p.scatterers) for p in profiles[:3]] == [2,3,4]

def test_ood_profiles_are_disjoint_from_id():

    synth = SynthConfig()
    id_max = max(s.range_m for p in id_profiles(synth) for s in p.scatterers)
    ood_min = min(s.range_m for p in ood_profiles(synth,np.random.default_rng(1)) for s in p.scatterers)

    assert id_max < ood_min

def test_synth_dataset_layout():

    ds = synth_dataset(10,seed=3,radar=SMALL)

    assert len(ds) == 40
    assert ds.frame_shape == (3,8,16)
    assert ds.labels.tolist() == [0]*10+[1]*10+[2]*10+[3]*10

def test_synth_dataset_is_deterministic_across_threads():

    a = synth_dataset(6,seed=11,radar=SMALL,threads=1)
    b = synth_dataset(6,seed=11,radar=SMALL,threads=4)
    c = synth_dataset(6,seed=12,radar=SMALL,threads=1)

    assert a.codes.tobytes() == b.codes.tobytes()
    assert a.codes.tobytes() != c.codes.tobytes()

def test_synth_dataset_needs_frames():

    with pytest.raises(UsageError):
        synth_dataset(0,seed=0)

def test_classes_are_separable_by_dominant_bin():

    ds = synth_dataset(4,seed=0)
    bin_hz = CFG.adc_rate/1024

    bins = []
    for label,range_m in zip(ID_LABELS,SynthConfig().id_ranges):
        b = dominant_bin(ds.by_label(label).codes)
        assert abs(b-beat_frequency(range_m,CFG)/bin_hz) <= 2.0
        bins.append(b)
    assert bins[0] < bins[1] < bins[2]

    ood = ds.by_label(Label.OOD).codes
    assert all(dominant_bin(frame) > bins[2]+2 for frame in ood)
