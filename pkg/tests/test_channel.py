import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import ndtr
from scipy.stats import norm

from ldpclab import channel


def test_snr_zero_db():
    p = channel.snr_to_sigma(0.0)
    assert p.sigma == 1.0 and p.sigma2 == 1.0


def test_snr_4db_error_probability():
    # p_e = Q(1/sigma) rounds to 0.0565 at 4 dB
    p = channel.snr_to_sigma(4.0)
    assert abs(p.sigma - 0.63096) < 1e-5
    assert round(float(ndtr(-1.0 / p.sigma)), 4) == 0.0565


def test_snr_5db():
    p = channel.snr_to_sigma(5.0)
    assert p.sigma2 == pytest.approx(0.31622776601683794, rel=1e-15)


def test_snr_invalid():
    with pytest.raises(ValueError):
        channel.snr_to_sigma(float("nan"))


def test_llr_rule_and_sign(rng):
    p = channel.snr_to_sigma(2.0)
    w = channel.sample_awgn(p, 64, rng, size=100)
    assert np.allclose(w.llr, 2.0 * w.y / p.sigma2)
    assert (np.sign(w.llr) == np.sign(w.y)).all()


def test_awgn_noiseless_limit(rng):
    p = channel.snr_to_sigma(60.0)  # sigma -> 0
    w = channel.sample_awgn(p, 256, rng)
    assert (w.y > 0.9).all()
    assert channel.error_set(w) == frozenset()


def test_awgn_mean(rng):
    p = channel.snr_to_sigma(4.0)
    w = channel.sample_awgn(p, 100, rng, size=10_000)
    n = w.y.size
    assert abs(w.y.mean() - 1.0) < 4.0 * p.sigma / math.sqrt(n)


def test_error_set_boundary():
    w = channel.ReceivedWord(y=np.array([-0.1, 0.2, 0.0]), llr=np.zeros(3))
    assert channel.error_set(w) == frozenset({0, 2})


@given(st.sets(st.integers(0, 31), max_size=6), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_error_class_exact(members, seed):
    p = channel.snr_to_sigma(3.0)
    rng = channel.make_rng(seed)
    w = channel.sample_error_class(p, members, 32, rng)
    assert channel.error_set(w) == frozenset(members)


def test_error_class_strict_bounds(rng):
    p = channel.snr_to_sigma(6.0)
    members = {1, 5, 17}
    w = channel.sample_error_class(p, members, 32, rng, size=2000)
    z = w.y - 1.0
    mask = np.zeros(32, dtype=bool)
    mask[list(members)] = True
    assert (z[:, mask] < -1.0).all()
    assert (z[:, ~mask] > -1.0).all()


def test_error_class_empty_set(rng):
    p = channel.snr_to_sigma(1.0)
    w = channel.sample_error_class(p, set(), 16, rng, size=500)
    assert (w.y > 0.0).all()


def test_truncated_mean_matches_quadrature(rng):
    """Sample means of the one-sided truncations agree with numerical
    integration of the truncated densities."""
    p = channel.snr_to_sigma(2.0)
    s = p.sigma
    w = channel.sample_error_class(p, {0}, 2, rng, size=400_000)
    z_err = w.y[:, 0] - 1.0
    z_ok = w.y[:, 1] - 1.0

    def density(z):
        return norm.pdf(z, scale=s)

    mass_lo, _ = integrate.quad(density, -np.inf, -1.0)
    mean_lo = integrate.quad(lambda z: z * density(z), -np.inf, -1.0)[0] / mass_lo
    var_lo = integrate.quad(lambda z: (z - mean_lo) ** 2 * density(z),
                            -np.inf, -1.0)[0] / mass_lo
    mass_hi, _ = integrate.quad(density, -1.0, np.inf)
    mean_hi = integrate.quad(lambda z: z * density(z), -1.0, np.inf)[0] / mass_hi
    var_hi = integrate.quad(lambda z: (z - mean_hi) ** 2 * density(z),
                            -1.0, np.inf)[0] / mass_hi

    n = len(z_err)
    assert abs(z_err.mean() - mean_lo) < 5.0 * math.sqrt(var_lo / n)
    assert abs(z_ok.mean() - mean_hi) < 5.0 * math.sqrt(var_hi / n)


def test_deep_tail_sampling_finite(rng):
    # truncation deep in the tail must stay finite and in-bounds
    p = channel.snr_to_sigma(12.0)
    w = channel.sample_error_class(p, {3}, 8, rng, size=5000)
    z = w.y[:, 3] - 1.0
    assert np.isfinite(z).all() and (z < -1.0).all()


def test_same_seed_reproducible():
    p = channel.snr_to_sigma(3.0)
    w1 = channel.sample_awgn(p, 64, channel.make_rng(7), size=10)
    w2 = channel.sample_awgn(p, 64, channel.make_rng(7), size=10)
    assert (w1.y == w2.y).all()
    c1 = channel.sample_error_class(p, {1, 2}, 64, channel.make_rng(9), size=4)
    c2 = channel.sample_error_class(p, {1, 2}, 64, channel.make_rng(9), size=4)
    assert (c1.y == c2.y).all()


def test_worker_substreams_differ():
    p = channel.snr_to_sigma(3.0)
    a = channel.sample_awgn(p, 32, channel.worker_rng(5, 0))
    b = channel.sample_awgn(p, 32, channel.worker_rng(5, 1))
    assert not np.array_equal(a.y, b.y)
    a2 = channel.sample_awgn(p, 32, channel.worker_rng(5, 0))
    assert (a.y == a2.y).all()


def test_dump_words(tmp_path, rng):
    p = channel.snr_to_sigma(3.0)
    w = channel.sample_awgn(p, 16, rng, size=5)
    out = tmp_path / "train.bin"
    channel.dump_words(out, w, p, "3-(3,3,(3,3))")
    raw = np.frombuffer(out.read_bytes(), dtype="<f4").reshape(5, 16)
    assert np.allclose(raw, w.y, atol=1e-6)
    import json
    side = json.loads((tmp_path / "train.bin.json").read_text())
    assert side["count"] == 5 and side["class"] == "3-(3,3,(3,3))"
