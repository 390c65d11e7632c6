import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dfrc_hbf.channel import (
    LinkBudget,
    channel_from_paths,
    make_rng,
    sample_channel,
    spectral_efficiency,
    zf_precoder,
)
from dfrc_hbf.errors import RankDeficientError
from dfrc_hbf.numerics import logdet_plus
from dfrc_hbf.scene import SystemConfig

from oracles import crandn


def test_rng_reproducible():
    assert make_rng(3).standard_normal() == make_rng(3).standard_normal()
    assert isinstance(make_rng(0).bit_generator, np.random.PCG64)


def test_same_seed_identical_channel():
    cfg = SystemConfig()
    a, b = sample_channel(cfg, 11), sample_channel(cfg, 11)
    assert np.array_equal(a.h, b.h)
    assert not np.array_equal(a.h, sample_channel(cfg, 12).h)
    assert a.h.shape == (cfg.n_rx, cfg.n_tx) and a.seed == 11
    assert a.gains.size == a.aod.size == a.aoa.size == cfg.n_clusters * cfg.n_rays
    assert np.all((a.aod >= 0) & (a.aod < 2 * math.pi))


def test_single_ray_closed_form():
    n_tx, n_rx = 8, 3
    h = channel_from_paths(n_tx, n_rx, [1.0], [0.0], [0.0])
    np.testing.assert_allclose(h, np.ones((n_rx, n_tx)), atol=1e-14)
    assert np.linalg.norm(h) ** 2 == pytest.approx(n_tx * n_rx)


def test_channel_rank_bound():
    cfg = SystemConfig(n_tx=16, n_rx=6, n_rf=8, n_streams=6, n_clusters=2, n_rays=2)
    h = sample_channel(cfg, 0).h
    assert np.linalg.matrix_rank(h) <= min(cfg.n_rx, 4)


def test_channel_mean_power_monte_carlo():
    cfg = SystemConfig()
    power = np.mean([np.linalg.norm(sample_channel(cfg, s).h) ** 2 for s in range(10_000)])
    assert abs(power / (cfg.n_tx * cfg.n_rx) - 1.0) <= 0.05


def test_path_length_mismatch():
    with pytest.raises(ValueError):
        channel_from_paths(4, 2, [1.0, 1.0], [0.0], [0.0, 0.0])


# -- ZF ----------------------------------------------------------------------------

def test_zf_identity_channel():
    np.testing.assert_allclose(zf_precoder(np.eye(2), "unit"), np.eye(2) / math.sqrt(2))


@pytest.mark.parametrize("seed", range(5))
def test_zf_diagonalizes_and_power(seed):
    h = sample_channel(SystemConfig(), seed).h
    for mode, power in (("unit", 1.0), ("streams", 6.0)):
        f = zf_precoder(h, mode)
        hf = h @ f
        off = hf - np.diag(np.diag(hf))
        assert np.abs(off).max() <= 1e-9 * np.linalg.norm(hf)
        assert np.linalg.norm(f) ** 2 == pytest.approx(power, abs=1e-10)
    np.testing.assert_allclose(zf_precoder(h), math.sqrt(6) * zf_precoder(h, "unit"), rtol=1e-12)


def test_zf_errors():
    with pytest.raises(RankDeficientError):
        zf_precoder(np.ones((2, 4)))
    with pytest.raises(RankDeficientError):
        zf_precoder(np.ones((4, 2)))
    with pytest.raises(ValueError):
        zf_precoder(np.eye(2), "bogus")


# -- rate ----------------------------------------------------------------------------

def test_rate_trivial_cases():
    h = crandn(np.random.default_rng(0), 3, 8)
    assert spectral_efficiency(h, np.zeros((8, 3)), LinkBudget(10.0)) == 0.0
    assert spectral_efficiency([[1.0]], [[1.0]], LinkBudget(0.0), 1) == pytest.approx(1.0)


def test_rate_eigenvalue_oracle():
    rng = np.random.default_rng(4)
    h, f = crandn(rng, 4, 16), crandn(rng, 16, 4)
    link = LinkBudget(7.0)
    m = (link.ratio / 4) * (h @ f @ f.conj().T @ h.conj().T)
    expected = np.sum(np.log2(1.0 + np.linalg.eigvalsh(0.5 * (m + m.conj().T))))
    assert spectral_efficiency(h, f, link) == pytest.approx(expected, abs=1e-9)
    assert logdet_plus(m) == pytest.approx(expected, abs=1e-9)


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.floats(-20, 30), st.floats(0.01, 10))
def test_rate_monotone_in_snr(seed, snr, delta):
    rng = np.random.default_rng(seed)
    h, f = crandn(rng, 3, 8), crandn(rng, 8, 3)
    assert spectral_efficiency(h, f, LinkBudget(snr + delta)) >= spectral_efficiency(h, f, LinkBudget(snr))


def test_rate_unitary_invariance():
    rng = np.random.default_rng(8)
    h, f = crandn(rng, 4, 12), crandn(rng, 12, 4)
    q, _ = np.linalg.qr(crandn(rng, 4, 4))
    link = LinkBudget(5.0)
    assert spectral_efficiency(h, f @ q, link) == pytest.approx(spectral_efficiency(h, f, link), rel=1e-12)


def test_link_budget():
    assert LinkBudget(20.0).ratio == pytest.approx(100.0)
    with pytest.raises(ValueError):
        LinkBudget(float("inf"))
