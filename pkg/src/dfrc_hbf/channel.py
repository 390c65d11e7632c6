"""Communication side: clustered mmWave channel, ZF reference, achievable rate."""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import RankDeficientError
from .numerics import NotPositiveDefiniteError, as_cmatrix, logdet_plus, solve_hpd
from .scene import steering


def make_rng(seed):
    """Seeded PCG64 generator; every random draw in the package goes through one."""
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray = field(repr=False)
    gains: np.ndarray = field(repr=False)
    aod: np.ndarray = field(repr=False)
    aoa: np.ndarray = field(repr=False)
    seed: int = None

    @property
    def n_rx(self):
        return self.h.shape[0]

    @property
    def n_tx(self):
        return self.h.shape[1]


@dataclass(frozen=True)
class LinkBudget:
    """SNR defined as ``10 log10(rho / sigma_n^2)``."""

    snr_db: float = 10.0

    def __post_init__(self):
        if not math.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")

    @property
    def ratio(self):
        return 10.0 ** (self.snr_db / 10.0)


def channel_from_paths(n_tx, n_rx, gains, aod, aoa):
    """Build ``H = sqrt(Nt Nr / L) sum_l alpha_l a_r(aoa_l) a_t(aod_l)^H``."""
    gains = np.asarray(gains, dtype=np.complex128).ravel()
    aod = np.asarray(aod, dtype=float).ravel()
    aoa = np.asarray(aoa, dtype=float).ravel()
    if not gains.size == aod.size == aoa.size:
        raise ValueError("gains, aod and aoa must have equal length")
    at = steering(aod, n_tx)
    ar = steering(aoa, n_rx)
    scale = math.sqrt(n_tx * n_rx / gains.size)
    return scale * (ar * gains) @ at.conj().T


def sample_channel(cfg, seed):
    """Draw a Saleh-Valenzuela channel for ``cfg`` from ``seed``.

    Path gains are unit-variance circular complex Gaussian; AoDs and AoAs are
    uniform on ``[0, 2 pi)``.
    """
    rng = make_rng(seed)
    n_paths = cfg.n_clusters * cfg.n_rays
    gains = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / math.sqrt(2.0)
    aod = rng.uniform(0.0, 2.0 * math.pi, n_paths)
    aoa = rng.uniform(0.0, 2.0 * math.pi, n_paths)
    h = channel_from_paths(cfg.n_tx, cfg.n_rx, gains, aod, aoa)
    return ChannelRealization(h=h, gains=gains, aod=aod, aoa=aoa, seed=seed)


POWER_MODES = ("unit", "streams")


def zf_precoder(h, power_mode="streams"):
    """Zero-forcing precoder ``c H^H (H H^H)^{-1}``.

    ``power_mode="unit"`` uses ``c = 1/sqrt(tr((H H^H)^{-1}))`` so that
    ``||F||_F = 1``; ``"streams"`` multiplies by an extra ``sqrt(Ns)`` giving
    ``||F||_F^2 = Ns`` (the same power scale as the hybrid design).
    """
    if power_mode not in POWER_MODES:
        raise ValueError(f"power_mode must be one of {POWER_MODES}")
    h = as_cmatrix(h, "H")
    n_rx, n_tx = h.shape
    if n_rx > n_tx:
        raise RankDeficientError(f"need n_rx <= n_tx for zero forcing, got {h.shape}")
    gram = h @ h.conj().T
    if np.linalg.cond(gram) > 1e12:
        raise RankDeficientError("H H^H is numerically singular")
    try:
        gram_inv = solve_hpd(gram, np.eye(n_rx))
    except NotPositiveDefiniteError as exc:
        raise RankDeficientError("H does not have full row rank") from exc
    f = h.conj().T @ gram_inv
    c = 1.0 / math.sqrt(np.real(np.trace(gram_inv)))
    if power_mode == "streams":
        c *= math.sqrt(n_rx)
    return c * f


def spectral_efficiency(h, f, link, n_streams=None):
    """Achievable rate ``log2 |I + rho/(Ns sigma^2) H F F^H H^H|`` (bits/s/Hz)."""
    h = as_cmatrix(h, "H")
    f = as_cmatrix(f, "F")
    if n_streams is None:
        n_streams = f.shape[1]
    hf = h @ f
    return logdet_plus((link.ratio / n_streams) * (hf @ hf.conj().T))
