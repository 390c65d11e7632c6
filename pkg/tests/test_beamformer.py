import json
import math

import numpy as np
import pytest

from dfrc_hbf.beamformer import (
    FULL,
    PARTIAL,
    HybridBeamformer,
    SolverReport,
    effective_precoder,
    validate,
)
from dfrc_hbf.errors import InfeasibleBeamformerError
from dfrc_hbf.objective import ConnectionMask, baseband_radius

from oracles import crandn


def feasible_full(rng, n_tx=8, n_rf=4, n_s=2):
    f_rf = np.exp(1j * rng.uniform(0, 2 * np.pi, (n_tx, n_rf)))
    f_bb = crandn(rng, n_rf, n_s)
    f_bb *= math.sqrt(n_s) / np.linalg.norm(f_rf @ f_bb)
    return HybridBeamformer(FULL, f_rf, f_bb)


def feasible_partial(rng, n_tx=8, n_rf=4, n_s=2):
    mask = ConnectionMask.partial(n_tx, n_rf).matrix
    f_rf = mask * np.exp(1j * rng.uniform(0, 2 * np.pi, (n_tx, n_rf)))
    f_bb = crandn(rng, n_rf, n_s)
    f_bb *= baseband_radius(n_tx, n_rf, n_s) / np.linalg.norm(f_bb)
    return HybridBeamformer(PARTIAL, f_rf, f_bb)


def test_shape_validation():
    with pytest.raises(ValueError):
        HybridBeamformer("hybrid", np.ones((4, 2)), np.ones((2, 1)))
    with pytest.raises(ValueError):
        HybridBeamformer(FULL, np.ones((4, 2)), np.ones((3, 1)))


@pytest.mark.parametrize("make", [feasible_full, feasible_partial])
def test_feasible_is_clean(make):
    b = make(np.random.default_rng(0))
    assert validate(b) == []
    f = effective_precoder(b)
    assert f.shape == (b.n_tx, b.n_streams)
    assert np.linalg.norm(f) ** 2 == pytest.approx(b.n_streams, abs=1e-8)


def test_all_rf_chains_shape_contract():
    rng = np.random.default_rng(1)
    f_rf = np.exp(1j * rng.uniform(0, 2 * np.pi, (4, 4)))
    f_bb = np.zeros((4, 2), complex)
    f_bb[:2, :2] = np.eye(2)
    f_bb *= math.sqrt(2) / np.linalg.norm(f_rf @ f_bb)
    assert effective_precoder(HybridBeamformer(FULL, f_rf, f_bb)).shape == (4, 2)


def test_partial_all_ones_phases():
    rng = np.random.default_rng(2)
    mask = ConnectionMask.partial(8, 4).matrix
    f_bb = crandn(rng, 4, 2)
    f_bb *= baseband_radius(8, 4, 2) / np.linalg.norm(f_bb)
    b = HybridBeamformer(PARTIAL, mask.astype(complex), f_bb)
    np.testing.assert_allclose(effective_precoder(b), np.repeat(f_bb, 2, axis=0))


def test_modulus_violation_reported():
    b = feasible_full(np.random.default_rng(3))
    f_rf = b.f_rf.copy()
    f_rf[2, 1] *= 1.1
    report = validate(HybridBeamformer(FULL, f_rf, b.f_bb))
    mod = [v for v in report if v.constraint == "unit_modulus"]
    assert len(mod) == 1
    assert mod[0].index == (2, 1)
    assert mod[0].magnitude == pytest.approx(0.1)


def test_power_violation_reports_ratio():
    b = feasible_partial(np.random.default_rng(4))
    bad = HybridBeamformer(PARTIAL, b.f_rf, b.f_bb * math.sqrt(1.01))
    report = validate(bad)
    assert [v.constraint for v in report] == ["power"]
    assert "ratio 1.01" in report[0].detail
    with pytest.raises(InfeasibleBeamformerError, match="power"):
        effective_precoder(bad)


def test_off_block_violation():
    b = feasible_partial(np.random.default_rng(5))
    f_rf = b.f_rf.copy()
    f_rf[0, 3] = 0.5
    report = validate(HybridBeamformer(PARTIAL, f_rf, b.f_bb))
    assert report[0].constraint == "off_block_zero" and report[0].index == (0, 3)


def test_partial_block_size_and_nonfinite():
    b = HybridBeamformer(PARTIAL, np.ones((6, 4)), np.ones((4, 1)))
    assert validate(b)[0].constraint == "block_size"
    f_rf = np.ones((4, 2), complex)
    f_rf[0, 0] = np.nan
    assert validate(HybridBeamformer(FULL, f_rf, np.ones((2, 1))))[0].constraint == "finite"


@pytest.mark.parametrize("make", [feasible_full, feasible_partial])
def test_phase_ambiguity_invariance(make):
    rng = np.random.default_rng(6)
    b = make(rng)
    d = np.exp(1j * rng.uniform(0, 2 * np.pi, b.n_rf))
    b2 = HybridBeamformer(b.structure, b.f_rf * d, b.f_bb / d[:, None])
    np.testing.assert_allclose(effective_precoder(b2), effective_precoder(b), atol=1e-13)


@pytest.mark.parametrize("make", [feasible_full, feasible_partial])
def test_json_round_trip_exact(make):
    b = make(np.random.default_rng(7))
    doc = json.loads(b.to_json())
    assert doc["structure"] == b.structure
    assert (doc["n_tx"], doc["n_rf"], doc["n_streams"]) == (b.n_tx, b.n_rf, b.n_streams)
    assert doc["f_rf"][1] == [b.f_rf[0, 1].real, b.f_rf[0, 1].imag]  # row-major
    back = HybridBeamformer.from_json(b.to_json())
    assert back.structure == b.structure
    assert np.array_equal(back.f_rf, b.f_rf) and np.array_equal(back.f_bb, b.f_bb)


def test_json_malformed():
    b = feasible_full(np.random.default_rng(8))
    doc = b.to_dict()
    doc["n_rf"] = 3
    with pytest.raises(ValueError):
        HybridBeamformer.from_dict(doc)
    del doc["f_bb"]
    with pytest.raises(ValueError):
        HybridBeamformer.from_dict(doc)


def test_solver_report_dict():
    r = SolverReport(objective_trace=[2.0, 1.0], grad_norm_trace=[0.1, 0.01], iterations=2,
                     wall_time=3.5, status="converged")
    d = r.to_dict(include_timing=False)
    assert d["wall_time_ms"] is None and d["iterations"] == 2
    assert r.to_dict()["wall_time_ms"] == 3.5
