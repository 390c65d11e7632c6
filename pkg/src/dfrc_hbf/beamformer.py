"""Hybrid beamformer result type, feasibility diagnostics, JSON round-trip."""

from dataclasses import dataclass, field
import json

import numpy as np

from .errors import InfeasibleBeamformerError
from .objective import ConnectionMask, baseband_radius

FULL = "fully_connected"
PARTIAL = "partially_connected"
STRUCTURES = (FULL, PARTIAL)

MODULUS_ATOL = 1e-10
POWER_ATOL = 1e-8


@dataclass(frozen=True)
class Violation:
    constraint: str
    detail: str
    magnitude: float
    index: tuple = None


@dataclass(frozen=True)
class HybridBeamformer:
    structure: str
    f_rf: np.ndarray = field(repr=False)
    f_bb: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.structure not in STRUCTURES:
            raise ValueError(f"structure must be one of {STRUCTURES}, got {self.structure!r}")
        f_rf = np.asarray(self.f_rf, dtype=np.complex128)
        f_bb = np.asarray(self.f_bb, dtype=np.complex128)
        if f_rf.ndim != 2 or f_bb.ndim != 2 or f_rf.shape[1] != f_bb.shape[0]:
            raise ValueError(f"incompatible shapes F_RF {f_rf.shape}, F_BB {f_bb.shape}")
        object.__setattr__(self, "f_rf", f_rf)
        object.__setattr__(self, "f_bb", f_bb)

    @property
    def n_tx(self):
        return self.f_rf.shape[0]

    @property
    def n_rf(self):
        return self.f_rf.shape[1]

    @property
    def n_streams(self):
        return self.f_bb.shape[1]

    def mask(self):
        if self.structure == FULL:
            return ConnectionMask.full(self.n_tx, self.n_rf)
        return ConnectionMask.partial(self.n_tx, self.n_rf)

    def to_dict(self):
        return {
            "structure": self.structure,
            "n_tx": self.n_tx,
            "n_rf": self.n_rf,
            "n_streams": self.n_streams,
            "f_rf": _encode(self.f_rf),
            "f_bb": _encode(self.f_bb),
        }

    @classmethod
    def from_dict(cls, d):
        try:
            n_tx, n_rf, n_s = int(d["n_tx"]), int(d["n_rf"]), int(d["n_streams"])
            f_rf = _decode(d["f_rf"], n_tx, n_rf)
            f_bb = _decode(d["f_bb"], n_rf, n_s)
            return cls(d["structure"], f_rf, f_bb)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed beamformer document: {exc}") from exc

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _encode(m):
    return [[float(z.real), float(z.imag)] for z in m.ravel()]


def _decode(entries, rows, cols):
    arr = np.asarray(entries, dtype=float)
    if arr.shape != (rows * cols, 2):
        raise ValueError(f"expected {rows * cols} [re, im] pairs, got shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(rows, cols)


def validate(b):
    """List every violated feasibility invariant of ``b`` (empty when feasible)."""
    report = []
    if not (np.all(np.isfinite(b.f_rf)) and np.all(np.isfinite(b.f_bb))):
        return [Violation("finite", "non-finite entries", float("inf"))]
    if b.structure == PARTIAL:
        if b.n_tx % b.n_rf:
            return [Violation("block_size", f"n_tx={b.n_tx} not a multiple of n_rf={b.n_rf}",
                              float(b.n_tx % b.n_rf))]
        d = b.mask().matrix.astype(bool)
    else:
        d = np.ones(b.f_rf.shape, dtype=bool)

    off = np.abs(np.where(d, 0.0, b.f_rf))
    if off.size and off.max() > MODULUS_ATOL:
        idx = tuple(int(i) for i in np.unravel_index(np.argmax(off), off.shape))
        report.append(Violation("off_block_zero", f"F_RF{idx} should be zero", float(off.max()), idx))

    excess = np.where(d, np.abs(np.abs(b.f_rf) - 1.0), 0.0)
    if excess.max() > MODULUS_ATOL:
        idx = tuple(int(i) for i in np.unravel_index(np.argmax(excess), excess.shape))
        report.append(Violation(
            "unit_modulus",
            f"|F_RF{idx}| = {abs(b.f_rf[idx]):.6g}, off by {excess[idx]:.3g}",
            float(excess[idx]),
            idx,
        ))

    if b.structure == FULL:
        target = float(b.n_streams)
        power = float(np.linalg.norm(b.f_rf @ b.f_bb) ** 2)
        name = "power ||F_RF F_BB||_F^2"
    else:
        target = baseband_radius(b.n_tx, b.n_rf, b.n_streams) ** 2
        power = float(np.linalg.norm(b.f_bb) ** 2)
        name = "power ||F_BB||_F^2"
    if abs(power - target) > POWER_ATOL:
        report.append(Violation(
            "power", f"{name} = {power:.10g}, expected {target:.10g} (ratio {power / target:.6g})",
            abs(power - target),
        ))
    return report


def effective_precoder(b):
    """``F_RF F_BB``; raises when ``b`` violates any feasibility invariant."""
    problems = validate(b)
    if problems:
        worst = max(problems, key=lambda v: v.magnitude)
        raise InfeasibleBeamformerError(f"{worst.constraint}: {worst.detail}")
    return b.f_rf @ b.f_bb


@dataclass
class SolverReport:
    """Per-iteration traces of a solve.

    Traces have one entry per completed iteration, so their length equals
    ``iterations``; the state before the first iteration is kept in the
    ``initial_*`` fields.
    """

    objective_trace: list = field(default_factory=list)
    primal_residual_trace: list = field(default_factory=list)
    grad_norm_trace: list = field(default_factory=list)
    iterations: int = 0
    wall_time: float = 0.0
    status: str = "max_iterations"
    initial_objective: float = float("nan")
    initial_grad_norm: float = float("nan")

    def to_dict(self, include_timing=True):
        return {
            "iterations": self.iterations,
            "status": self.status,
            "wall_time_ms": self.wall_time if include_timing else None,
            "initial_objective": self.initial_objective,
            "initial_grad_norm": self.initial_grad_norm,
            "objective_trace": list(self.objective_trace),
            "primal_residual_trace": list(self.primal_residual_trace),
            "grad_norm_trace": list(self.grad_norm_trace),
        }
