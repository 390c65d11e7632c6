"""Hybrid analog/digital beamforming for a mmWave dual-function radar-communication transmitter.

Two designs are provided: manifold ADMM for fully-connected phase-shifter
networks (:func:`madmm_solve`) and a product-manifold trust-region method for
partially-connected networks (:func:`rpmtr_solve`), together with the channel
and radar models needed to evaluate them.
"""

from .beamformer import (
    FULL,
    PARTIAL,
    HybridBeamformer,
    SolverReport,
    Violation,
    effective_precoder,
    validate,
)
from .channel import (
    LinkBudget,
    channel_from_paths,
    make_rng,
    sample_channel,
    spectral_efficiency,
    zf_precoder,
)
from .errors import (
    ConfigError,
    DegenerateUpdateError,
    HybridBFError,
    InfeasibleBeamformerError,
    NotHermitianError,
    NotPositiveDefiniteError,
    NotPSDError,
    RankDeficientError,
    RetractionError,
    SolverError,
)
from .experiments import ExperimentConfig, ResultRow, run_sweep
from .objective import ConnectionMask, PartialPoint, ReferencePair, weighted_objective
from .scene import (
    AngularRegion,
    RadarScene,
    SystemConfig,
    beampattern,
    default_scene,
    ismr,
    radar_reference,
    steering,
)
from .solver_madmm import MadmmConfig, RcgConfig, madmm_solve
from .solver_rpmtr import TcgConfig, TrConfig, rpmtr_solve

__version__ = "0.1.0"
