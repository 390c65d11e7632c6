"""Fully-connected hybrid design by manifold ADMM.

The consensus split ``F = F_RF F_BB`` gives three blocks per outer
iteration: a closed-form power-normalized update of ``F``, a Riemannian
conjugate-gradient solve for the unit-modulus ``F_RF``, and a least-squares
``F_BB``. The dual variable and an adaptive penalty close the loop.
"""

from dataclasses import dataclass, field, replace
import math
import time

import numpy as np

from .beamformer import FULL, HybridBeamformer, SolverReport
from .channel import make_rng
from .errors import DegenerateUpdateError, HybridBFError, RetractionError, SolverError
from .manifold import circle_project, circle_random, circle_retract, inner
from .objective import madmm_sub_value_grad, weighted_objective


@dataclass(frozen=True)
class RcgConfig:
    k_max: int = 50
    grad_tol: float = 1e-8
    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 30

    def __post_init__(self):
        if self.k_max < 0 or self.max_backtracks < 1:
            raise ValueError("k_max must be >= 0 and max_backtracks >= 1")
        if not (self.grad_tol > 0 and self.initial_step > 0):
            raise ValueError("grad_tol and initial_step must be positive")
        if not (0 < self.shrink < 1 and 0 < self.sufficient_decrease < 1):
            raise ValueError("shrink and sufficient_decrease must lie in (0, 1)")


@dataclass(frozen=True)
class MadmmConfig:
    alpha0: float = 1.0
    beta: float = 2.0
    gamma: float = 10.0
    n_max: int = 200
    rcg: RcgConfig = field(default_factory=RcgConfig)
    primal_tol: float = 1e-6  # also bounds the per-iteration change of F

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise ValueError("alpha0 must be positive")
        if not (self.beta > 1 and self.gamma > 1):
            raise ValueError("beta and gamma must exceed 1")
        if self.n_max < 1 or self.primal_tol < 0:
            raise ValueError("n_max must be >= 1 and primal_tol >= 0")


@dataclass
class MadmmState:
    f: np.ndarray
    f_rf: np.ndarray
    f_bb: np.ndarray
    dual: np.ndarray
    alpha: float
    iter: int = 0


@dataclass
class RcgTrace:
    values: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    iterations: int = 0
    status: str = "max_iterations"
    final_grad_norm: float = float("nan")


def f_update(state, refs, phi):
    """Closed-form consensus update: ``sqrt(Ns) Fbar / ||Fbar||_F`` with
    ``Fbar = 2 phi F_Com + 2 (1 - phi) F_Rad - Lambda + alpha F_RF F_BB``."""
    fbar = (
        2.0 * phi * refs.f_com
        + 2.0 * (1.0 - phi) * refs.f_rad
        - state.dual
        + state.alpha * (state.f_rf @ state.f_bb)
    )
    nrm = np.linalg.norm(fbar)
    if not nrm > 0:
        raise DegenerateUpdateError("F-update numerator vanished; cannot normalize")
    return (math.sqrt(refs.n_streams) / nrm) * fbar


def fbb_update(f_rf, f_target, cond_max=1e12):
    """Least-squares digital precoder ``(F_RF^H F_RF)^{-1} F_RF^H F_target``.

    The normal matrix gets a small ridge when its condition number exceeds
    ``cond_max``.
    """
    gram = f_rf.conj().T @ f_rf
    rhs = f_rf.conj().T @ f_target
    if np.linalg.cond(gram) > cond_max:
        w = np.linalg.eigvalsh(gram)
        gram = gram + (w[-1] / cond_max) * np.eye(gram.shape[0])
    try:
        return np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverError("normal matrix of the F_BB update is singular") from exc


def penalty_update(alpha, primal_res, dual_delta, beta=2.0, gamma=10.0):
    """Adaptive penalty: grow by ``beta`` when the residual ratio exceeds
    ``gamma``, shrink when it drops below ``1/gamma``."""
    if not dual_delta > 0:
        return alpha
    ratio = primal_res / dual_delta
    if ratio > gamma:
        return beta * alpha
    if ratio < 1.0 / gamma:
        return alpha / beta
    return alpha


def _armijo(f_target, f_bb, x, value, direction, slope, step, cfg):
    """Backtracking along a retracted curve. Returns ``(x, value, step)`` or None."""
    for _ in range(cfg.max_backtracks):
        try:
            cand = circle_retract(x, direction, step)
        except RetractionError:
            step *= cfg.shrink
            continue
        cand_value, _ = madmm_sub_value_grad(cand, f_target, f_bb)
        if cand_value <= value + cfg.sufficient_decrease * step * slope:
            return cand, cand_value, step
        step *= cfg.shrink
    return None


def rcg_solve(f_target, f_bb, init, cfg=RcgConfig()):
    """Minimize ``||F_target - F_RF F_BB||^2`` over unit-modulus ``F_RF``.

    Riemannian conjugate gradient with Polak-Ribiere+ directions, projection
    as vector transport, and Armijo backtracking. The first trial step of
    each line search is twice the previous accepted displacement (the very
    first uses ``cfg.initial_step``).

    Returns
    -------
    f_rf : ndarray
        Final unit-modulus iterate.
    trace : RcgTrace
        Objective and gradient-norm history; ``status`` is ``"converged"``,
        ``"max_iterations"`` or ``"linesearch_failed"``.
    """
    x = np.array(init, dtype=np.complex128)
    trace = RcgTrace()
    value, egrad = madmm_sub_value_grad(x, f_target, f_bb)
    grad = circle_project(x, egrad)
    gg = inner(grad, grad)
    direction = -grad
    step_len = None
    while True:
        if math.sqrt(gg) < cfg.grad_tol:
            trace.status = "converged"
            break
        if trace.iterations >= cfg.k_max:
            trace.status = "max_iterations"
            break
        slope = inner(grad, direction)
        if slope >= 0:
            direction = -grad
            slope = -gg
        dnorm = math.sqrt(inner(direction, direction))
        step = cfg.initial_step if step_len is None else 2.0 * step_len / dnorm
        found = _armijo(f_target, f_bb, x, value, direction, slope, step, cfg)
        if found is None and slope != -gg:
            direction = -grad
            found = _armijo(f_target, f_bb, x, value, direction, -gg, step, cfg)
        if found is None:
            trace.status = "linesearch_failed"
            break
        x_new, value, step = found
        step_len = step * math.sqrt(inner(direction, direction))

        _, egrad = madmm_sub_value_grad(x_new, f_target, f_bb)
        grad_new = circle_project(x_new, egrad)
        moved_grad = circle_project(x_new, grad)
        sigma = max(0.0, inner(grad_new, grad_new - moved_grad) / gg)
        direction = -grad_new + sigma * circle_project(x_new, direction)
        x, grad = x_new, grad_new
        gg = inner(grad, grad)
        trace.iterations += 1
        trace.values.append(value)
        trace.grad_norms.append(math.sqrt(gg))
    trace.final_grad_norm = math.sqrt(gg)
    return x, trace


def init_state(refs, n_rf, cfg=MadmmConfig(), seed=0):
    """Random-phase ``F_RF``, least-squares ``F_BB`` toward ``F_Com``,
    ``F = F_RF F_BB`` at full power, zero dual, ``alpha = alpha0``."""
    rng = make_rng(seed)
    f_rf = circle_random(rng, (refs.n_tx, n_rf))
    f_bb = fbb_update(f_rf, refs.f_com)
    f = f_rf @ f_bb
    f = f * (math.sqrt(refs.n_streams) / np.linalg.norm(f))
    return MadmmState(f=f, f_rf=f_rf, f_bb=f_bb, dual=np.zeros_like(f), alpha=cfg.alpha0)


def madmm_solve(refs, phi, cfg=MadmmConfig(), init=None, n_rf=None, seed=0):
    """Manifold ADMM for the fully-connected hybrid precoder.

    Parameters
    ----------
    refs : ReferencePair
        Communication and radar references.
    phi : float
        Trade-off weight in ``[0, 1]``.
    cfg : MadmmConfig
    init : MadmmState, optional
        Starting state; built by :func:`init_state` from ``n_rf`` and
        ``seed`` when omitted.

    Stops after ``cfg.n_max`` iterations or once both the primal residual
    ``||F - F_RF F_BB||_F`` and the change of ``F`` fall below
    ``cfg.primal_tol``.

    Returns
    -------
    HybridBeamformer, SolverReport
        The returned pair is rescaled so ``||F_RF F_BB||_F^2 = Ns``.
    """
    if init is None:
        if n_rf is None:
            raise ValueError("pass either init or n_rf")
        init = init_state(refs, n_rf, cfg, seed)
    state = replace(init)
    report = SolverReport()
    report.initial_objective = weighted_objective(state.f_rf @ state.f_bb, refs, phi)
    t0 = time.perf_counter()
    report.status = "max_iterations"
    for n in range(1, cfg.n_max + 1):
        f_prev = state.f
        try:
            state.f = f_update(state, refs, phi)
            target = state.f + state.dual / state.alpha
            state.f_rf, rcg_trace = rcg_solve(target, state.f_bb, state.f_rf, cfg.rcg)
            state.f_bb = fbb_update(state.f_rf, target)
        except HybridBFError as exc:
            raise SolverError(f"MADMM failed: {exc}", iteration=n) from exc
        residual = state.f - state.f_rf @ state.f_bb
        dual_step = state.alpha * residual
        state.dual = state.dual + dual_step
        primal = float(np.linalg.norm(residual))
        state.alpha = penalty_update(state.alpha, primal ** 2, float(np.linalg.norm(dual_step)),
                                     cfg.beta, cfg.gamma)
        state.iter = n
        report.objective_trace.append(weighted_objective(state.f_rf @ state.f_bb, refs, phi))
        report.primal_residual_trace.append(primal)
        report.grad_norm_trace.append(rcg_trace.final_grad_norm)
        report.iterations = n
        # a zero residual alone is not enough: with N_RF = N_t and a zero dual
        # the least-squares F_BB fits any F exactly
        if primal < cfg.primal_tol and np.linalg.norm(state.f - f_prev) < cfg.primal_tol:
            report.status = "converged"
            break
    report.wall_time = 1e3 * (time.perf_counter() - t0)
    f_eff = state.f_rf @ state.f_bb
    scale = math.sqrt(refs.n_streams) / np.linalg.norm(f_eff)
    return HybridBeamformer(FULL, state.f_rf, state.f_bb * scale), report
