"""Partially-connected hybrid design by Riemannian trust region.

The variables ``(F_PS, F_BB)`` live on circle x sphere. Each iteration
builds the second-order model from the Riemannian gradient and Hessian,
solves the trust-region subproblem approximately with truncated CG
(Steihaug-Toint), retracts, and accepts or rejects by the ratio of actual
to predicted decrease.
"""

from dataclasses import dataclass, field
import math
import time

import numpy as np

from .beamformer import PARTIAL, HybridBeamformer, SolverReport
from .channel import make_rng
from .errors import HybridBFError, SolverError
from .manifold import (
    circle_random,
    product_dim,
    product_inner,
    product_project,
    product_retract,
    sphere_random,
)
from .objective import (
    PartialPoint,
    baseband_radius,
    egrad_partial,
    objective,
    rgrad_from_egrad,
    rhess_partial,
)


@dataclass(frozen=True)
class TcgConfig:
    max_inner: int = None  # None: manifold dimension
    kappa: float = 0.1
    theta: float = 1.0

    def __post_init__(self):
        if self.max_inner is not None and self.max_inner < 1:
            raise ValueError("max_inner must be >= 1")
        if not (0 < self.kappa < 1 and self.theta > 0):
            raise ValueError("need 0 < kappa < 1 and theta > 0")


@dataclass(frozen=True)
class TrConfig:
    """Trust-region settings.

    ``delta_bar``/``delta0`` default to ``sqrt(dim)`` and ``delta_bar / 8``
    when left as ``None``. ``min_step`` is the accepted-displacement stop;
    ``rho_regularization`` (in units of machine epsilon times ``max(1, |J|)``)
    is added to both sides of the ratio to keep it meaningful once the
    decreases reach round-off level.
    """

    delta_bar: float = None
    delta0: float = None
    rho_prime: float = 0.1
    k_max: int = 200
    grad_tol: float = 1e-6
    min_step: float = 1e-6
    tcg: TcgConfig = field(default_factory=TcgConfig)
    rho_regularization: float = 1e3

    def __post_init__(self):
        if not 0 <= self.rho_prime < 0.25:
            raise ValueError("rho_prime must lie in [0, 1/4)")
        if self.delta_bar is not None and not self.delta_bar > 0:
            raise ValueError("delta_bar must be positive")
        if self.delta0 is not None:
            if not self.delta0 > 0:
                raise ValueError("delta0 must be positive")
            if self.delta_bar is not None and not self.delta0 < self.delta_bar:
                raise ValueError("delta0 must be smaller than delta_bar")
        if self.k_max < 0 or self.grad_tol < 0 or self.min_step < 0:
            raise ValueError("k_max, grad_tol and min_step must be non-negative")

    def radii(self, dim):
        delta_bar = self.delta_bar if self.delta_bar is not None else math.sqrt(dim)
        delta0 = self.delta0 if self.delta0 is not None else delta_bar / 8.0
        if not 0 < delta0 < delta_bar:
            raise ValueError("need 0 < delta0 < delta_bar")
        return delta_bar, delta0


@dataclass
class TrState:
    point: PartialPoint
    delta: float
    rho: float = float("nan")
    iter: int = 0


class _Model:
    """Gradient and Hessian-vector products at a fixed point (cached egrad)."""

    def __init__(self, pt, mask, refs, phi):
        self.pt, self.mask, self.refs, self.phi = pt, mask, refs, phi
        self.value = objective(pt, mask, refs, phi)
        self.egrad = egrad_partial(pt, mask, refs, phi)
        self.grad = rgrad_from_egrad(pt, *self.egrad)

    def hess(self, z):
        return rhess_partial(self.pt, self.mask, self.refs, self.phi, z,
                             egrad=self.egrad, strict=False)

    def __call__(self, z):
        return self.value + product_inner(self.grad, z) + 0.5 * product_inner(self.hess(z), z)


def model_value(pt, z, refs, phi, mask):
    """Second-order model ``J + <grad, z> + 1/2 <Hess[z], z>`` at ``pt``."""
    return _Model(pt, mask, refs, phi)(z)


def truncated_cg(grad, hess, delta, project=None, max_inner=100, kappa=0.1, theta=1.0):
    """Steihaug-Toint truncated CG for ``min <g,z> + 1/2 <H z, z>``, ``||z|| <= delta``.

    ``grad`` and the outputs of ``hess`` must support ``+``, scalar ``*`` and
    :func:`product_inner`. ``project`` (optional) re-projects the residual
    onto the tangent space to stop round-off drift.

    Returns
    -------
    z, hz, reason
        The step, ``H z``, and a short stop reason.
    """
    z = grad * 0.0
    hz = grad * 0.0
    r = grad
    r_r = product_inner(r, r)
    norm_r0 = math.sqrt(r_r)
    if norm_r0 == 0.0:
        return z, hz, "zero_gradient"
    d = -r
    z_z, z_d, d_d = 0.0, 0.0, r_r
    model = 0.0
    for _ in range(max_inner):
        hd = hess(d)
        d_hd = product_inner(d, hd)
        alpha = r_r / d_hd if d_hd > 0 else float("inf")
        z_z_new = z_z + 2 * alpha * z_d + alpha * alpha * d_d if d_hd > 0 else float("inf")
        if d_hd <= 0 or z_z_new >= delta * delta:
            tau = (-z_d + math.sqrt(z_d * z_d + d_d * (delta * delta - z_z))) / d_d
            z = z + tau * d
            hz = hz + tau * hd
            return z, hz, "negative_curvature" if d_hd <= 0 else "exceeded_radius"
        z_new = z + alpha * d
        hz_new = hz + alpha * hd
        model_new = product_inner(grad, z_new) + 0.5 * product_inner(z_new, hz_new)
        if model_new >= model:
            return z, hz, "model_increased"
        z, hz, z_z, model = z_new, hz_new, z_z_new, model_new
        r = r + alpha * hd
        if project is not None:
            r = project(r)
        r_r_new = product_inner(r, r)
        if math.sqrt(r_r_new) <= norm_r0 * min(norm_r0 ** theta, kappa):
            return z, hz, "residual"
        beta = r_r_new / r_r
        r_r = r_r_new
        d = -r + beta * d
        z_d = beta * (z_d + alpha * d_d)
        d_d = r_r + beta * beta * d_d
    return z, hz, "max_inner"


def tcg_subproblem(pt, refs, phi, mask, delta, cfg=TcgConfig(), model=None):
    """Approximate trust-region step at ``pt`` with radius ``delta``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    m = model if model is not None else _Model(pt, mask, refs, phi)
    max_inner = cfg.max_inner or product_dim(pt.f_ps.shape[0], pt.f_ps.shape[1], pt.f_bb.shape[1])
    z, _, _ = truncated_cg(
        m.grad, m.hess, delta, project=lambda v: product_project(pt, v),
        max_inner=max_inner, kappa=cfg.kappa, theta=cfg.theta,
    )
    return z


def rho_ratio(pt, candidate, z, refs, phi, mask, model=None, regularization=0.0):
    """Actual over predicted decrease.

    A predicted decrease below ``1e-15 |J|`` is treated as ``1`` when the
    actual change is equally negligible and as ``-inf`` (reject) otherwise.
    ``regularization`` is an absolute amount added to both sides.
    """
    m = model if model is not None else _Model(pt, mask, refs, phi)
    j0 = m.value
    num = j0 - objective(candidate, mask, refs, phi)
    den = -(product_inner(m.grad, z) + 0.5 * product_inner(m.hess(z), z))
    num += regularization
    den += regularization
    tiny = 1e-15 * abs(j0)
    if abs(den) < tiny or den == 0.0:
        return 1.0 if abs(num) <= tiny else -math.inf
    return num / den


def accept_step(state, candidate, rho, rho_prime):
    """Candidate when ``rho > rho_prime`` (strict), otherwise the current point."""
    return candidate if rho > rho_prime else state.point


def radius_update(delta, rho, step_norm, delta_bar):
    if rho < 0.25:
        return 0.25 * delta
    if rho > 0.75 and abs(step_norm - delta) <= 1e-10 * delta:
        return min(2.0 * delta, delta_bar)
    return delta


def init_point(n_tx, n_rf, n_streams, seed=0):
    """Uniform random phases for ``F_PS``, Gaussian ``F_BB`` scaled onto the sphere."""
    rng = make_rng(seed)
    radius = baseband_radius(n_tx, n_rf, n_streams)
    return PartialPoint(
        circle_random(rng, (n_tx, n_rf)),
        sphere_random(rng, (n_rf, n_streams), radius),
        radius,
    )


def rpmtr_solve(refs, phi, mask, cfg=TrConfig(), init=None, seed=0):
    """Riemannian product-manifold trust region for the partially-connected design.

    Returns the beamformer ``(F_PS o F_D, F_BB)`` and a report whose
    ``grad_norm_trace`` holds the Riemannian gradient norm after every
    iteration.
    """
    n_tx, n_rf = mask.shape
    if init is None:
        init = init_point(n_tx, n_rf, refs.n_streams, seed)
    if init.f_ps.shape != (n_tx, n_rf) or init.f_bb.shape != (n_rf, refs.n_streams):
        raise ValueError("initial point does not match the mask/reference dimensions")
    init.check(atol=1e-10)
    delta_bar, delta = cfg.radii(product_dim(n_tx, n_rf, refs.n_streams))
    state = TrState(init, delta)
    report = SolverReport()
    t0 = time.perf_counter()
    model = _Model(state.point, mask, refs, phi)
    grad_norm = model.grad.norm()
    report.initial_objective = model.value
    report.initial_grad_norm = grad_norm
    report.status = "converged" if grad_norm <= cfg.grad_tol else "max_iterations"
    while state.iter < cfg.k_max and grad_norm > cfg.grad_tol:
        k = state.iter + 1
        try:
            z = tcg_subproblem(state.point, refs, phi, mask, state.delta, cfg.tcg, model)
            candidate = product_retract(state.point, z)
        except HybridBFError as exc:
            raise SolverError(f"RPM-TR failed: {exc}", iteration=k) from exc
        reg = cfg.rho_regularization * np.finfo(float).eps * max(1.0, abs(model.value))
        state.rho = rho_ratio(state.point, candidate, z, refs, phi, mask, model, reg)
        step_norm = z.norm()
        new_point = accept_step(state, candidate, state.rho, cfg.rho_prime)
        state.delta = radius_update(state.delta, state.rho, step_norm, delta_bar)
        state.iter = k
        accepted = new_point is candidate
        if accepted:
            state.point = new_point
            model = _Model(state.point, mask, refs, phi)
            grad_norm = model.grad.norm()
        report.objective_trace.append(model.value)
        report.grad_norm_trace.append(grad_norm)
        report.iterations = k
        if grad_norm <= cfg.grad_tol:
            report.status = "converged"
            break
        if accepted and step_norm < cfg.min_step:
            report.status = "small_step"
            break
    report.wall_time = 1e3 * (time.perf_counter() - t0)
    pt = state.point
    return HybridBeamformer(PARTIAL, pt.f_ps * mask.matrix, pt.f_bb), report
