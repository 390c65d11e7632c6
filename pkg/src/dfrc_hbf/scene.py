"""Radar side: steering vectors, beampatterns, ISMR and the radar-only reference.

The angular domain is the ULA visible region ``[-pi/2, pi/2]``. Region
integrals of ``a(theta) a(theta)^H`` are computed with a composite midpoint
rule and kept at ``n_tx x n_tx`` size; the ``I_Ns (x) A`` Kronecker blocks
are never formed.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ConfigError, HybridBFError
from .numerics import as_cmatrix, generalized_eig_principal, hermitian_part

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class SystemConfig:
    """Array and channel dimensions; the defaults are the desk-scale reference system."""

    n_tx: int = 32
    n_rx: int = 6
    n_rf: int = 16
    n_streams: int = 6
    n_clusters: int = 10
    n_rays: int = 5

    def __post_init__(self):
        for name in ("n_tx", "n_rx", "n_rf", "n_streams", "n_clusters", "n_rays"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not self.n_streams <= self.n_rf <= self.n_tx:
            raise ConfigError(
                f"need n_streams <= n_rf <= n_tx, got {self.n_streams}, {self.n_rf}, {self.n_tx}"
            )

    @property
    def block_size(self):
        """Antennas per RF chain for the partially-connected structure."""
        if self.n_tx % self.n_rf:
            raise ConfigError(f"n_tx={self.n_tx} is not a multiple of n_rf={self.n_rf}")
        return self.n_tx // self.n_rf

    def supports_partial(self):
        return self.n_tx % self.n_rf == 0


@dataclass(frozen=True)
class AngularRegion:
    """Union of disjoint angular intervals (radians) with a quadrature step."""

    intervals: tuple
    grid_step: float = math.radians(0.5)

    def __post_init__(self):
        ivs = tuple(sorted((float(lo), float(hi)) for lo, hi in self.intervals))
        if not ivs:
            raise ConfigError("angular region is empty")
        if not self.grid_step > 0:
            raise ConfigError(f"grid_step must be positive, got {self.grid_step}")
        eps = 1e-12
        for lo, hi in ivs:
            if not lo < hi:
                raise ConfigError(f"interval ({lo}, {hi}) is empty")
            if lo < -HALF_PI - eps or hi > HALF_PI + eps:
                raise ConfigError(f"interval ({lo}, {hi}) leaves [-pi/2, pi/2]")
        for (_, hi0), (lo1, _) in zip(ivs, ivs[1:]):
            if lo1 < hi0:
                raise ConfigError("intervals overlap")
        object.__setattr__(self, "intervals", ivs)

    @property
    def measure(self):
        return sum(hi - lo for lo, hi in self.intervals)

    def nodes(self):
        """Midpoint-rule nodes and weights covering every interval exactly."""
        thetas, weights = [], []
        for lo, hi in self.intervals:
            n = max(1, math.ceil((hi - lo) / self.grid_step - 1e-9))
            h = (hi - lo) / n
            thetas.append(lo + h * (np.arange(n) + 0.5))
            weights.append(np.full(n, h))
        return np.concatenate(thetas), np.concatenate(weights)


def steering(theta, n):
    """Half-wavelength ULA response ``(1/sqrt n) exp(j pi k sin theta)``.

    ``theta`` may be a scalar (returns shape ``(n,)``) or an array of angles
    (returns one column per angle, shape ``(n, len(theta))``).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(n)
    theta = np.asarray(theta, dtype=float)
    phase = np.pi * np.multiply.outer(k, np.sin(theta))
    return np.exp(1j * phase) / math.sqrt(n)


def beampattern(f, theta):
    """Transmit power ``(1/Ns) ||F^H a(theta)||^2`` toward ``theta`` (linear).

    Returns a float for scalar ``theta`` and an array for an array of angles.
    """
    f = as_cmatrix(f, "F")
    a = steering(theta, f.shape[0])
    proj = f.conj().T @ a
    return np.sum(np.abs(proj) ** 2, axis=0) / f.shape[1]


def region_integral(region, n_tx):
    """Quadrature of ``a(theta) a(theta)^H`` over ``region``."""
    thetas, weights = region.nodes()
    a = steering(thetas, n_tx)
    block = (a * weights) @ a.conj().T
    return hermitian_part(block)


def _freeze(a):
    a = np.array(a, dtype=np.complex128)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class RadarScene:
    mainlobe: AngularRegion
    sidelobe: AngularRegion
    block_m: np.ndarray = field(repr=False)
    block_s: np.ndarray = field(repr=False)

    @classmethod
    def from_regions(cls, mainlobe, sidelobe, n_tx):
        return cls(
            mainlobe,
            sidelobe,
            _freeze(region_integral(mainlobe, n_tx)),
            _freeze(region_integral(sidelobe, n_tx)),
        )

    @property
    def n_tx(self):
        return self.block_m.shape[0]


def target_regions(targets_deg=(-30.0, 30.0), half_width_deg=5.0, guard_deg=2.0,
                   grid_step_deg=0.5):
    """Mainlobe/sidelobe regions for targets at ``targets_deg``.

    The mainlobe is each target +/- ``half_width_deg``; the sidelobe is the
    rest of ``[-90, 90]`` degrees minus a ``guard_deg`` band on either side
    of every mainlobe interval.
    """
    if half_width_deg <= 0 or guard_deg < 0 or grid_step_deg <= 0:
        raise ConfigError("half_width and grid_step must be positive, guard non-negative")
    if not targets_deg:
        raise ConfigError("at least one target angle is required")

    def merged(width):
        out = []
        for t in sorted(targets_deg):
            lo, hi = max(t - width, -90.0), min(t + width, 90.0)
            if out and lo <= out[-1][1]:
                out[-1][1] = max(out[-1][1], hi)
            else:
                out.append([lo, hi])
        return out

    main = merged(half_width_deg)
    blocked = merged(half_width_deg + guard_deg)
    side, cursor = [], -90.0
    for lo, hi in blocked:
        if lo > cursor:
            side.append((cursor, lo))
        cursor = max(cursor, hi)
    if cursor < 90.0:
        side.append((cursor, 90.0))
    step = math.radians(grid_step_deg)
    to_rad = lambda ivs: tuple((math.radians(lo), math.radians(hi)) for lo, hi in ivs)
    return AngularRegion(to_rad(main), step), AngularRegion(to_rad(side), step)


def default_scene(n_tx, targets_deg=(-30.0, 30.0), half_width_deg=5.0, guard_deg=2.0,
                  grid_step_deg=0.5):
    main, side = target_regions(targets_deg, half_width_deg, guard_deg, grid_step_deg)
    return RadarScene.from_regions(main, side, n_tx)


def ismr(f, scene):
    """Integrated sidelobe-to-mainlobe ratio ``tr(F^H A_s F) / tr(F^H A_m F)``."""
    f = as_cmatrix(f, "F")
    if f.shape[0] != scene.n_tx:
        raise ValueError(f"F has {f.shape[0]} rows, scene has {scene.n_tx} antennas")
    side = np.real(np.vdot(f, scene.block_s @ f))
    main = np.real(np.vdot(f, scene.block_m @ f))
    scale = np.real(np.trace(scene.block_m)) * np.vdot(f, f).real
    if main <= 1e-14 * scale or main <= 0:
        raise HybridBFError("beam has no power inside the mainlobe region")
    return float(side / main)


def default_loading(scene):
    return 1e-8 * np.real(np.trace(scene.block_s)) / scene.n_tx


def radar_reference(scene, cfg, loading=None):
    """Radar-only fully-digital beamformer ``F_Rad`` minimizing ISMR.

    The principal generalized eigenvector ``v`` of ``(A_m, A_s + loading I)``
    is spread over the streams as ``F_Rad = v 1^T`` so that
    ``||F_Rad||_F^2 = Ns``. (The Kronecker-structured problem has an
    ``Ns``-fold degenerate top eigenvalue; this rank-one choice is the
    deterministic representative.)
    """
    if loading is None:
        loading = default_loading(scene)
    if loading < 0:
        raise ValueError("loading must be non-negative")
    n = scene.n_tx
    if cfg.n_tx != n:
        raise ValueError(f"config has n_tx={cfg.n_tx}, scene has {n}")
    _, v = generalized_eig_principal(scene.block_m, scene.block_s + loading * np.eye(n))
    f = np.outer(v, np.ones(cfg.n_streams))
    return f * (math.sqrt(cfg.n_streams) / np.linalg.norm(f))
