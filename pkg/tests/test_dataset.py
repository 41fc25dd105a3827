import numpy as np
import pytest

from food.dataset import (Dataset, FrameCube, ID_LABELS, Label, SplitConfig, normalize, normalize_codes,
                          partition, split)
from food.errors import ConfigError, DataError, ShapeError

def labelled(n_per_label,labels=(0,1,2),shape=(3,2,4)):
    """ dataset whose frame i carries i in its first code """

    n = n_per_label*len(labels)
    codes = np.zeros((n,)+shape,dtype=np.uint16)
    codes[:,0,0,0] = np.arange(n)
    return Dataset(codes,np.repeat(np.array(labels,dtype=np.uint8),n_per_label))

def ids(ds):
    return sorted(ds.codes[:,0,0,0].tolist())

#################
# normalization #
#################

def test_full_scale_normalizes_to_zero():

    x = normalize_codes(np.full((3,64,128),4095,dtype=np.uint16))

    assert x.dtype == np.float32
    assert np.all(x == 0.0)

def test_scaling_before_mean_removal():

    x = normalize_codes(np.array([[[0,4095]]],dtype=np.uint16))
    np.testing.assert_array_equal(x,[[[-1.0,1.0]]])

    x = normalize_codes(np.array([[[2048,0]]],dtype=np.uint16))
    scaled = np.array([2.0*2048/4095-1.0,-1.0])
    assert scaled[0] == pytest.approx(2.442e-4,rel=1e-3)
    np.testing.assert_allclose(x[0,0],scaled-scaled.mean(),rtol=1e-6)

def test_normalized_range_and_mean():

    codes = np.random.default_rng(0).integers(0,4096,size=(5,3,8,16)).astype(np.uint16)
    x = normalize_codes(codes)

    assert np.abs(x).max() <= 2.0
    np.testing.assert_allclose(x.mean(axis=(-2,-1)),0.0,atol=1e-6)

def test_normalize_frame():

    frame = FrameCube(np.full((3,4,4),100),Label.PER1)
    t = normalize(frame)

    assert t.shape == (3,4,4)
    assert not t.requires_grad

#############
# container #
#############

def test_frame_validation():

    with pytest.raises(DataError):
        FrameCube(np.full((3,2,2),5000))
    with pytest.raises(ShapeError):
        FrameCube(np.zeros((2,2)))

def test_dataset_views():

    ds = labelled(4,labels=(0,1,2,3))

    assert len(ds) == 16
    assert ds.frame_shape == (3,2,4)
    assert ds.count(Label.OOD) == 4
    assert len(ds.id_only()) == 12
    assert [len(c) for c in ds.per_class()] == [4,4,4]
    assert ds.frame(5).label == Label.PER2
    assert ids(ds.by_label(Label.PER3)) == [8,9,10,11]

def test_from_frames_and_concat():

    frames = [FrameCube(np.full((3,2,2),i),Label(i % 3)) for i in range(6)]
    ds = Dataset.from_frames(frames)

    assert ds.labels.tolist() == [0,1,2,0,1,2]
    assert len(Dataset.concat([ds,ds])) == 12
    assert len(Dataset.from_frames([],frame_shape=(3,2,2))) == 0

##########
# splits #
##########

def test_split_counts():

    train,test = split(labelled(100),0.9,seed=1)

    for label in ID_LABELS:
        assert train.count(label) == 90
        assert test.count(label) == 10

def test_split_is_a_partition():

    ds = labelled(50)
    train,test = split(ds,0.9,seed=2)

    assert not set(ids(train)) & set(ids(test))
    assert sorted(ids(train)+ids(test)) == ids(ds)

def test_split_depends_on_seed():

    ds = labelled(100)
    a,_ = split(ds,0.9,seed=1)
    b,_ = split(ds,0.9,seed=1)
    c,_ = split(ds,0.9,seed=2)

    assert ids(a) == ids(b)
    assert ids(a) != ids(c)

def test_partition_holds_out_calibration():

    ds = labelled(100,labels=(0,1,2,3))
    fit,calibration,test = partition(ds,SplitConfig(),seed=4)

    assert [fit.count(label) for label in ID_LABELS] == [81,81,81]
    assert [calibration.count(label) for label in ID_LABELS] == [9,9,9]
    assert [test.count(label) for label in ID_LABELS] == [10,10,10]
    assert fit.count(Label.OOD) == 0
    assert not set(ids(fit)) & set(ids(calibration))
    assert not set(ids(calibration)) & set(ids(test))

def test_partition_needs_every_class():

    with pytest.raises(DataError,match='PER3'):
        partition(labelled(10,labels=(0,1)),SplitConfig(),seed=0)

def test_split_config_validation():

    with pytest.raises(ConfigError):
        SplitConfig(train_fraction=1.0).validate()
    with pytest.raises(ConfigError):
        SplitConfig(eval_on='train').validate()
