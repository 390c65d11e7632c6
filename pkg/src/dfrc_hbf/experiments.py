"""Experiment configuration, single-cell evaluation and sweep assembly.

A sweep is a grid of independent cells (grid value x seed x structure).
Every cell rebuilds its own channel, references and solver start from the
seed, so cells share nothing and can run in any order or in parallel; rows
are sorted before they are written.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
import json
import math

import numpy as np

from .beamformer import FULL, PARTIAL
from .channel import POWER_MODES, LinkBudget, sample_channel, spectral_efficiency, zf_precoder
from .errors import ConfigError, HybridBFError
from .objective import ConnectionMask, ReferencePair, check_phi, weighted_objective
from .scene import SystemConfig, default_scene, ismr, radar_reference
from .solver_madmm import MadmmConfig, RcgConfig, madmm_solve
from .solver_rpmtr import TcgConfig, TrConfig, rpmtr_solve

STRUCTURE_NAMES = {"full": FULL, "partial": PARTIAL}
AXES = ("phi", "snr", "nrf")
SCHEMA_VERSION = 1

# N_r = N_s = 4 and phi = 0.4 for the RF-chain sweep unless the config says otherwise
NRF_PRESET = {"n_rx": 4, "n_streams": 4}
NRF_PRESET_PHI = 0.4


@dataclass(frozen=True)
class SceneConfig:
    targets_deg: tuple = (-30.0, 30.0)
    half_width_deg: float = 5.0
    guard_deg: float = 2.0
    grid_step_deg: float = 0.5


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    scene: SceneConfig = field(default_factory=SceneConfig)
    phi: float = 0.5
    phi_grid: tuple = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
    snr_db: float = 10.0
    snr_grid_db: tuple = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    nrf_grid: tuple = (4, 8, 16, 32)
    seeds: tuple = tuple(range(20))
    structures: tuple = ("full", "partial")
    madmm: MadmmConfig = field(default_factory=MadmmConfig)
    tr: TrConfig = field(default_factory=TrConfig)
    power_mode: str = "streams"
    loading: float = None
    explicit: frozenset = field(default=frozenset(), compare=False, repr=False)

    def __post_init__(self):
        check_phi(self.phi)
        for name in ("phi_grid", "snr_grid_db", "nrf_grid", "seeds", "structures"):
            if len(getattr(self, name)) == 0:
                raise ConfigError(f"{name} must not be empty")
        for p in self.phi_grid:
            check_phi(p)
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if any(isinstance(s, bool) or not isinstance(s, int) or s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative integers")
        if any(not isinstance(n, int) or n < 1 for n in self.nrf_grid):
            raise ConfigError("nrf_grid entries must be positive integers")
        for s in self.structures:
            if s not in STRUCTURE_NAMES:
                raise ConfigError(f"unknown structure {s!r}; use 'full' or 'partial'")
        if not all(math.isfinite(x) for x in (self.snr_db, *self.snr_grid_db)):
            raise ConfigError("SNR values must be finite")
        if self.system.n_rx != self.system.n_streams:
            raise ConfigError("n_rx must equal n_streams (one stream per receive antenna)")
        if self.power_mode not in POWER_MODES:
            raise ConfigError(f"power_mode must be one of {POWER_MODES}")
        if self.loading is not None and not self.loading >= 0:
            raise ConfigError("loading must be non-negative")

    @classmethod
    def from_dict(cls, doc):
        """Build from a JSON-like mapping; unknown keys raise :class:`ConfigError`."""
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        kw = {}
        simple = {"phi", "snr_db", "power_mode", "loading"}
        tuples = {"phi_grid", "snr_grid_db", "nrf_grid", "seeds", "structures"}
        for key, value in doc.items():
            if key == "system":
                kw[key] = _build(SystemConfig, value, "system")
            elif key == "scene":
                scene = _build(SceneConfig, value, "scene")
                kw[key] = replace(scene, targets_deg=tuple(float(t) for t in scene.targets_deg))
            elif key == "madmm":
                kw[key] = _build(MadmmConfig, value, "madmm", nested={"rcg": RcgConfig})
            elif key == "tr":
                kw[key] = _build(TrConfig, value, "tr", nested={"tcg": TcgConfig})
            elif key in tuples:
                if not isinstance(value, list):
                    raise ConfigError(f"{key} must be a list")
                kw[key] = tuple(value)
            elif key in simple:
                kw[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
        kw["explicit"] = frozenset(doc)
        try:
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(doc)

    def for_nrf_sweep(self):
        """Apply the RF-chain sweep preset to every field the config left implicit."""
        cfg = self
        if "system" not in self.explicit:
            cfg = replace(cfg, system=replace(cfg.system, **NRF_PRESET))
        if "phi" not in self.explicit:
            cfg = replace(cfg, phi=NRF_PRESET_PHI)
        return cfg

    def to_dict(self):
        d = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "explicit"}
        for key in ("system", "scene", "madmm", "tr"):
            d[key] = asdict(d[key])
        return json.loads(json.dumps(d))


def _build(cls, value, where, nested=None):
    if not isinstance(value, dict):
        raise ConfigError(f"{where} must be a JSON object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(value) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    kw = dict(value)
    for key, sub in (nested or {}).items():
        if key in kw:
            kw[key] = _build(sub, kw[key], f"{where}.{key}")
    try:
        return cls(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


# -- single design -------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    """Everything derived from (config, system, seed) before solving."""

    system: SystemConfig
    seed: int
    channel: np.ndarray
    refs: ReferencePair
    scene: object


def build_problem(cfg, seed, system=None):
    system = system or cfg.system
    if system.n_rx != system.n_streams:
        raise ConfigError("n_rx must equal n_streams (one stream per receive antenna)")
    sc = cfg.scene
    scene = default_scene(system.n_tx, sc.targets_deg, sc.half_width_deg, sc.guard_deg,
                          sc.grid_step_deg)
    ch = sample_channel(system, seed)
    f_com = zf_precoder(ch.h, cfg.power_mode)
    f_rad = radar_reference(scene, system, cfg.loading)
    return Problem(system, seed, ch.h, ReferencePair(f_com, f_rad), scene)


def solver_seed(seed):
    """Start-point seed: a PCG64 stream separate from the channel draw."""
    return [int(seed), 1]


def design(cfg, problem, phi, structure):
    """Run the solver for ``structure`` (``"full"`` or ``"partial"``)."""
    n_tx, n_rf = problem.system.n_tx, problem.system.n_rf
    seed = solver_seed(problem.seed)
    if structure == "full":
        return madmm_solve(problem.refs, phi, cfg.madmm, n_rf=n_rf, seed=seed)
    if structure == "partial":
        if n_tx % n_rf:
            raise ConfigError(f"partial structure needs n_tx={n_tx} divisible by n_rf={n_rf}")
        return rpmtr_solve(problem.refs, phi, ConnectionMask.partial(n_tx, n_rf), cfg.tr, seed=seed)
    raise ConfigError(f"unknown structure {structure!r}")


def evaluate(f, problem, phi, snr_db):
    """Rate (bits/s/Hz), linear ISMR and objective of the precoder ``f``."""
    rate = spectral_efficiency(problem.channel, f, LinkBudget(snr_db))
    return rate, ismr(f, problem.scene), weighted_objective(f, problem.refs, phi)


# -- sweep rows ----------------------------------------------------------------

ROW_COLUMNS = (
    "phi", "structure", "algorithm", "seed", "snr_db", "n_rf", "rate_bits_s_hz",
    "ismr_linear", "ismr_db", "objective", "iterations", "wall_ms", "status",
)
ALGORITHMS = {"full": "madmm", "partial": "rpm_tr"}
REFERENCE_STRUCTURES = ("digital_zf", "digital_radar")


@dataclass(frozen=True)
class ResultRow:
    phi: float
    structure: str
    algorithm: str
    seed: int
    snr_db: float
    n_rf: int
    rate_bits_s_hz: float
    ismr_linear: float
    ismr_db: float
    objective: float
    iterations: int
    wall_ms: float
    status: str

    def as_list(self):
        return [getattr(self, c) for c in ROW_COLUMNS]


def _db(x):
    return 10.0 * math.log10(x) if x > 0 else -math.inf


def _row(phi, structure, algorithm, seed, snr_db, n_rf, metrics, iterations, wall_ms, status):
    rate, ism, obj = metrics
    return ResultRow(float(phi), structure, algorithm, int(seed), float(snr_db), int(n_rf),
                     float(rate), float(ism), _db(ism), float(obj), int(iterations),
                     float(wall_ms), status)


def _failed_row(phi, structure, algorithm, seed, snr_db, n_rf, exc):
    status = f"failed: {type(exc).__name__}: {exc}"
    nan = float("nan")
    return ResultRow(float(phi), structure, algorithm, int(seed), float(snr_db), int(n_rf),
                     nan, nan, nan, nan, 0, 0.0, status)


@dataclass(frozen=True)
class Cell:
    """One independent unit of sweep work."""

    axis: str
    value: float
    seed: int
    structure: str  # "full", "partial" or "reference"


def run_cell(cfg, cell, timing=False):
    """Rows produced by one cell; solver failures become rows with a status."""
    phi = cell.value if cell.axis == "phi" else cfg.phi
    n_rf = int(cell.value) if cell.axis == "nrf" else cfg.system.n_rf
    snrs = cfg.snr_grid_db if cell.axis == "snr" else (cfg.snr_db,)
    try:
        system = replace(cfg.system, n_rf=n_rf)
        problem = build_problem(cfg, cell.seed, system)
    except HybridBFError as exc:
        names = REFERENCE_STRUCTURES if cell.structure == "reference" else (STRUCTURE_NAMES[cell.structure],)
        alg = "reference" if cell.structure == "reference" else ALGORITHMS[cell.structure]
        return [_failed_row(phi, n, alg, cell.seed, s, n_rf, exc) for n in names for s in snrs]

    rows = []
    if cell.structure == "reference":
        for name, f in zip(REFERENCE_STRUCTURES, (problem.refs.f_com, problem.refs.f_rad)):
            for s in snrs:
                try:
                    metrics = evaluate(f, problem, phi, s)
                    rows.append(_row(phi, name, "reference", cell.seed, s, n_rf,
                                     metrics, 0, 0.0, "ok"))
                except HybridBFError as exc:
                    rows.append(_failed_row(phi, name, "reference", cell.seed, s, n_rf, exc))
        return rows

    name, alg = STRUCTURE_NAMES[cell.structure], ALGORITHMS[cell.structure]
    try:
        bf, report = design(cfg, problem, phi, cell.structure)
        f = bf.f_rf @ bf.f_bb
    except HybridBFError as exc:
        return [_failed_row(phi, name, alg, cell.seed, s, n_rf, exc) for s in snrs]
    wall = report.wall_time if timing else 0.0
    for s in snrs:
        try:
            metrics = evaluate(f, problem, phi, s)
            rows.append(_row(phi, name, alg, cell.seed, s, n_rf, metrics,
                             report.iterations, wall, report.status))
        except HybridBFError as exc:
            rows.append(_failed_row(phi, name, alg, cell.seed, s, n_rf, exc))
    return rows


def sweep_cells(cfg, axis):
    if axis not in AXES:
        raise ConfigError(f"axis must be one of {AXES}")
    grid = {"phi": cfg.phi_grid, "snr": (cfg.snr_db,), "nrf": cfg.nrf_grid}[axis]
    kinds = tuple(cfg.structures) + ("reference",)
    return [Cell(axis, v, s, k) for v in grid for s in cfg.seeds for k in kinds]


def _sort_key(axis):
    col = {"phi": "phi", "snr": "snr_db", "nrf": "n_rf"}[axis]
    return lambda r: (getattr(r, col), r.seed, r.algorithm, r.structure, r.phi, r.snr_db)


def _run_cell_args(args):
    return run_cell(*args)


def run_sweep(cfg, axis, jobs=1, timing=False):
    """All rows of a sweep along ``axis``, sorted by (axis value, seed, ...).

    The SNR axis designs once per (seed, structure) at ``cfg.phi`` and
    evaluates the rate at every grid SNR, since neither reference depends on
    the SNR.
    """
    if axis == "nrf":
        cfg = cfg.for_nrf_sweep()
    cells = sweep_cells(cfg, axis)
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    if jobs == 1:
        batches = [run_cell(cfg, c, timing) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(_run_cell_args, [(cfg, c, timing) for c in cells]))
    rows = [r for batch in batches for r in batch]
    return sorted(rows, key=_sort_key(axis))
