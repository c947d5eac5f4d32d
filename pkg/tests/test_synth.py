import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from firetke import ingest, turbulence
from firetke.models import ModelConfig, fit_model, tree_fit
from firetke.stats import pearson, r_squared
from firetke.synth import (CENTER, SynthSpec, generate, relative_noise_sd, target_function,
                           write_fixture)


def test_spec_validation():
    with pytest.raises(ValueError):
        SynthSpec(n=9)
    with pytest.raises(ValueError):
        SynthSpec(noise_sd=-0.1)
    with pytest.raises(ValueError):
        SynthSpec(kind="cubic")
    assert SynthSpec(kind="nonlinear-weak-pearson").kind == "nonlinear"


def test_linear_kind_correlates_with_first_feature():
    ds = generate(SynthSpec(n=2000, kind="linear", seed=3))
    assert pearson(ds.X[:, 0], ds.y) > 0.5


def test_nonlinear_kind_has_weak_pearson():
    ds = generate(SynthSpec(n=5000, kind="nonlinear-weak-pearson", seed=0))
    r = [abs(pearson(ds.X[:, j], ds.y)) for j in range(8)]
    assert max(r) < 0.1


def test_target_is_recorded_function_of_features():
    ds = generate(SynthSpec(n=50, kind="nonlinear", seed=2))
    meta = ds.meta
    D = ds.X - np.array(meta["center"])
    assert np.allclose(ds.y, meta["offset"] + (D ** 2) @ np.array(meta["coef"]), rtol=1e-14)
    assert np.array_equal(target_function(ds.X, "nonlinear"), ds.y)
    assert np.array_equal(CENTER, meta["center"])


def test_same_seed_same_data():
    a = generate(SynthSpec(n=300, noise_sd=0.1, seed=8))
    b = generate(SynthSpec(n=300, noise_sd=0.1, seed=8))
    c = generate(SynthSpec(n=300, noise_sd=0.1, seed=9))
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)
    assert not np.array_equal(a.y, c.y)


def test_noise_level():
    spec = SynthSpec(n=5000, seed=1)
    sd = relative_noise_sd(spec, 0.05)
    clean = generate(spec)
    noisy = generate(SynthSpec(n=5000, noise_sd=sd, seed=1))
    assert np.array_equal(clean.X, noisy.X)
    assert np.std(noisy.y - clean.y) == pytest.approx(sd, rel=0.05)
    assert sd == pytest.approx(0.05 * np.std(clean.y), rel=1e-12)


@pytest.mark.parametrize("kind", ["linear", "nonlinear"])
def test_flexible_models_fit_noise_free_data(kind):
    ds = generate(SynthSpec(n=800, kind=kind, seed=4))
    knn = fit_model(ds, ModelConfig("knn", {"k": 1}))
    assert r_squared(ds.y, knn.predict(ds.X)) > 0.999
    assert r_squared(ds.y, tree_fit(ds.X, ds.y).predict(ds.X)) > 0.999


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["linear", "nonlinear"]),
       st.floats(0, 10))
def test_generated_values_finite(seed, kind, noise):
    ds = generate(SynthSpec(n=20, noise_sd=noise, seed=seed, kind=kind))
    assert np.all(np.isfinite(ds.X)) and np.all(np.isfinite(ds.y))


def test_fixture_reingests_and_reproduces_target(tmp_path):
    spec = SynthSpec(n=400, noise_sd=0.05, seed=6)
    info = write_fixture(spec, tmp_path, n_pre=100, n_post=20)
    sonic = ingest.parse_sonic_csv(info["sonic"])
    thermo = ingest.parse_thermo_csv(info["thermo"])
    assert sonic.rejected == 0 and thermo.rejected == 0
    assert len(sonic) == len(thermo) == 520
    frames = ingest.segment_phases(ingest.align(sonic, thermo), info["burn_start"],
                                   info["burn_end"])
    burn = frames.phase == int(ingest.BurnPhase.BURN)
    assert burn.sum() == 400
    means = turbulence.baseline_means(frames.in_phase(ingest.BurnPhase.PRE))
    series = turbulence.tke_series(frames, means)
    ds = generate(spec)
    expect = np.maximum(ds.y, 0.0)
    assert np.allclose(series.tke[burn], expect, rtol=1e-9, atol=1e-9)
    assert np.allclose(frames.features[burn], ds.X, rtol=1e-15, atol=0)
    assert info["clipped"] == int((ds.y < 0).sum())
