"""Weighted DFRC trade-off objective and its derivatives.

The cost is

    J = phi ||F_eff - F_Com||^2 + (1 - phi) ||F_eff - F_Rad||^2,

with ``F_eff = (F_D o F_PS) F_BB``. The fully-connected structure is the
special case ``F_D = 1`` (all ones), so one code path covers both designs.
Gradients are with respect to the real inner product ``Re tr(X^H Y)``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ConfigError
from .manifold import (
    TangentPair,
    circle_ehess_to_rhess,
    circle_project,
    inner,
    is_circle_point,
    is_sphere_point,
    sphere_ehess_to_rhess,
    sphere_project,
)
from .numerics import as_cmatrix


@dataclass(frozen=True)
class ReferencePair:
    f_com: np.ndarray
    f_rad: np.ndarray

    def __post_init__(self):
        f_com = as_cmatrix(self.f_com, "F_Com")
        f_rad = as_cmatrix(self.f_rad, "F_Rad")
        if f_com.shape != f_rad.shape:
            raise ValueError(f"reference shapes differ: {f_com.shape} vs {f_rad.shape}")
        object.__setattr__(self, "f_com", f_com)
        object.__setattr__(self, "f_rad", f_rad)

    @property
    def n_tx(self):
        return self.f_com.shape[0]

    @property
    def n_streams(self):
        return self.f_com.shape[1]

    def blend(self, phi):
        """``phi F_Com + (1 - phi) F_Rad``, the fully-digital target."""
        return phi * self.f_com + (1.0 - phi) * self.f_rad


def check_phi(phi):
    if not (isinstance(phi, (int, float, np.floating)) and 0.0 <= phi <= 1.0):
        raise ConfigError(f"phi must lie in [0, 1], got {phi!r}")
    return float(phi)


@dataclass(frozen=True)
class TradeoffConfig:
    phi: float = 0.5

    def __post_init__(self):
        check_phi(self.phi)


@dataclass(frozen=True)
class ConnectionMask:
    """0-1 connection-state matrix ``F_D`` (``n_tx x n_rf``)."""

    matrix: np.ndarray
    structure: str = "partially_connected"

    @classmethod
    def partial(cls, n_tx, n_rf):
        if n_tx % n_rf:
            raise ConfigError(f"n_tx={n_tx} is not a multiple of n_rf={n_rf}")
        z = n_tx // n_rf
        m = np.kron(np.eye(n_rf), np.ones((z, 1)))
        m.flags.writeable = False
        return cls(m, "partially_connected")

    @classmethod
    def full(cls, n_tx, n_rf):
        m = np.ones((n_tx, n_rf))
        m.flags.writeable = False
        return cls(m, "fully_connected")

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def block_size(self):
        return self.matrix.shape[0] // self.matrix.shape[1]

    def validate(self):
        m = self.matrix
        if not np.all((m == 0) | (m == 1)):
            raise ValueError("mask entries must be 0 or 1")
        if self.structure == "partially_connected":
            if not np.all(m.sum(axis=1) == 1):
                raise ValueError("each antenna must connect to exactly one RF chain")
            if not np.all(m.sum(axis=0) == self.block_size):
                raise ValueError("each RF chain must drive exactly n_tx/n_rf antennas")


def baseband_radius(n_tx, n_rf, n_streams):
    """``sqrt(Ns N_RF / Nt)``, the F_BB norm fixed by the partial structure."""
    return math.sqrt(n_streams * n_rf / n_tx)


@dataclass(frozen=True)
class PartialPoint:
    """Point ``(F_PS, F_BB)`` of the product manifold."""

    f_ps: np.ndarray
    f_bb: np.ndarray
    radius: float

    def check(self, atol=1e-12):
        if not is_circle_point(self.f_ps, atol):
            raise ValueError("F_PS is not unit modulus")
        if not is_sphere_point(self.f_bb, self.radius, atol):
            raise ValueError("F_BB is off the sphere")


def effective(pt, mask):
    return (mask.matrix * pt.f_ps) @ pt.f_bb


def weighted_objective(f_eff, refs, phi):
    """``phi ||F - F_Com||^2 + (1 - phi) ||F - F_Rad||^2``."""
    e_com = f_eff - refs.f_com
    e_rad = f_eff - refs.f_rad
    return float(phi * inner(e_com, e_com) + (1.0 - phi) * inner(e_rad, e_rad))


def objective(pt, mask, refs, phi):
    return weighted_objective(effective(pt, mask), refs, phi)


def egrad_partial(pt, mask, refs, phi):
    """Euclidean gradients ``(G_ps, G_bb)`` of ``J`` at ``pt``."""
    d = mask.matrix
    frf = d * pt.f_ps
    f_eff = frf @ pt.f_bb
    e_com = f_eff - refs.f_com
    e_rad = f_eff - refs.f_rad
    bb_h = pt.f_bb.conj().T
    g_ps = (2 * phi * (e_com @ bb_h) + 2 * (1 - phi) * (e_rad @ bb_h)) * d
    frf_h = frf.conj().T
    g_bb = 2 * phi * (frf_h @ e_com) + 2 * (1 - phi) * (frf_h @ e_rad)
    return g_ps, g_bb


def ehess_partial(pt, mask, refs, phi, z):
    """Directional derivative of the Euclidean gradients along ``z``.

    Written term by term: residual times ``z_bb^H``, then the mixed term
    ``(F_D o z_ps) F_BB + (F_D o F_PS) z_bb``.
    """
    d = mask.matrix
    frf = d * pt.f_ps
    dfrf = d * z.z_ps
    f_eff = frf @ pt.f_bb
    e_com = f_eff - refs.f_com
    e_rad = f_eff - refs.f_rad
    mixed = dfrf @ pt.f_bb + frf @ z.z_bb
    zbb_h = z.z_bb.conj().T
    h_ps = (
        2 * phi * (e_com @ zbb_h)
        + 2 * (1 - phi) * (e_rad @ zbb_h)
        + 2 * (mixed @ pt.f_bb.conj().T)
    ) * d
    dfrf_h = dfrf.conj().T
    h_bb = (
        2 * phi * (dfrf_h @ e_com)
        + 2 * (1 - phi) * (dfrf_h @ e_rad)
        + 2 * (frf.conj().T @ mixed)
    )
    return h_ps, h_bb


def rgrad_from_egrad(pt, g_ps, g_bb):
    return TangentPair(circle_project(pt.f_ps, g_ps), sphere_project(pt.f_bb, g_bb))


def rgrad_partial(pt, mask, refs, phi):
    """Riemannian gradient on circle x sphere."""
    return rgrad_from_egrad(pt, *egrad_partial(pt, mask, refs, phi))


def rhess_partial(pt, mask, refs, phi, z, egrad=None, strict=True):
    """Riemannian Hessian applied to the tangent pair ``z``.

    ``egrad`` may carry precomputed Euclidean gradients to avoid recomputing
    them for every Hessian-vector product.
    """
    g_ps, g_bb = egrad if egrad is not None else egrad_partial(pt, mask, refs, phi)
    h_ps, h_bb = ehess_partial(pt, mask, refs, phi, z)
    return TangentPair(
        circle_ehess_to_rhess(pt.f_ps, g_ps, h_ps, z.z_ps, strict=strict),
        sphere_ehess_to_rhess(pt.f_bb, g_bb, h_bb, z.z_bb, strict=strict),
    )


def madmm_sub_value_grad(f_rf, f_target, f_bb):
    """Value and Euclidean gradient of ``g(F_RF) = ||F_target - F_RF F_BB||^2``."""
    res = f_target - f_rf @ f_bb
    return inner(res, res), -2.0 * res @ f_bb.conj().T
