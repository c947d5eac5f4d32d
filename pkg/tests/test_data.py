import numpy as np
import pytest

from firetke.data import Dataset, Scaler, build_dataset
from firetke.ingest import BurnPhase, Frames, segment_phases
from firetke.turbulence import BaselineMeans, tke_series


def _frames(n=40):
    rng = np.random.default_rng(0)
    t = np.arange(n) / 10
    wind = rng.standard_normal((n, 3))
    return segment_phases(Frames(t, 20 + rng.random((n, 8)), wind), 1.0, 2.95)


def test_scaler_round_trip_statistics():
    X = np.random.default_rng(1).standard_normal((100, 4)) * [1, 2, 3, 4] + 7
    Z = Scaler.fit(X).transform(X)
    assert np.allclose(Z.mean(axis=0), 0, atol=1e-12)
    assert np.allclose(Z.std(axis=0), 1, atol=1e-12)


def test_identity_scaler_is_passthrough():
    X = np.arange(6.0).reshape(3, 2)
    s = Scaler.identity(2)
    assert s.is_identity
    assert np.array_equal(s.transform(X), X)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 7)), np.zeros(3))
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 8)), np.zeros(4))
    X = np.zeros((3, 8))
    X[1, 2] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        Dataset(X, np.zeros(3))


def test_dataset_subset_keeps_tags():
    ds = Dataset(np.arange(40.0).reshape(5, 8), np.arange(5.0), np.arange(5.0), name="B1")
    sub = ds.subset([4, 1])
    assert sub.y.tolist() == [4.0, 1.0] and sub.t.tolist() == [4.0, 1.0]
    assert sub.source.tolist() == ["B1", "B1"]
    cols, labels = ds.columns()
    assert cols.shape == (5, 9) and labels[-1] == "tke_ma" and labels[0] == "T1"


def test_build_dataset_burn_rows_with_defined_target():
    frames = _frames()
    series = tke_series(frames, BaselineMeans(0.0, 0.0, 0.0, 1, 0), window=15)
    ds = build_dataset(frames, series, "tke_ma")
    burn = frames.phase == int(BurnPhase.BURN)
    # burn covers rows 10..29; the moving average is defined from row 14 on
    assert np.flatnonzero(burn).tolist() == list(range(10, 30))
    assert len(ds) == 16 and ds.t[0] == pytest.approx(1.4)
    assert np.array_equal(ds.y, series.tke_ma[14:30])
    raw = build_dataset(frames, series, "tke")
    assert len(raw) == 20 and raw.target_name == "tke"
    assert len(build_dataset(frames, series, "tke", phase=None)) == 40


def test_build_dataset_needs_segmentation():
    f = _frames()
    plain = Frames(f.t, f.features, f.wind)
    series = tke_series(plain, BaselineMeans(0.0, 0.0, 0.0, 1, 0), window=2)
    with pytest.raises(ValueError, match="segmented"):
        build_dataset(plain, series)
