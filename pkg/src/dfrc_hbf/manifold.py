"""Complex-circle and scaled-sphere manifolds, and their product.

Points are plain complex arrays. The circle manifold holds matrices whose
entries all have unit modulus; the sphere holds matrices of fixed Frobenius
norm ``radius``. Both are Riemannian submanifolds of ``C^{m x n}`` with the
real inner product ``<P, Q> = Re tr(P^H Q)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import RetractionError

TANGENT_ATOL = 1e-10


def inner(x, y):
    """Real Euclidean inner product ``Re tr(x^H y)``."""
    return float(np.real(np.vdot(x, y)))


@dataclass(frozen=True)
class TangentPair:
    """Tangent vector on the product manifold: (phase-shifter part, baseband part)."""

    z_ps: np.ndarray
    z_bb: np.ndarray

    def __add__(self, other):
        return TangentPair(self.z_ps + other.z_ps, self.z_bb + other.z_bb)

    def __sub__(self, other):
        return TangentPair(self.z_ps - other.z_ps, self.z_bb - other.z_bb)

    def __mul__(self, c):
        return TangentPair(c * self.z_ps, c * self.z_bb)

    __rmul__ = __mul__

    def __neg__(self):
        return TangentPair(-self.z_ps, -self.z_bb)

    def norm(self):
        return float(np.sqrt(product_inner(self, self)))

    @classmethod
    def zeros_like(cls, pt):
        return cls(np.zeros_like(pt.f_ps), np.zeros_like(pt.f_bb))


def product_inner(x, y):
    return inner(x.z_ps, y.z_ps) + inner(x.z_bb, y.z_bb)


# -- complex circle -----------------------------------------------------------

def is_circle_point(p, atol=1e-12):
    return bool(np.all(np.abs(np.abs(p) - 1.0) <= atol))


def circle_random(rng, shape):
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, shape))


def circle_project(p, v):
    """Orthogonal projection of ``v`` onto the tangent space at ``p``."""
    return v - np.real(v.conj() * p) * p


def circle_tangency_error(p, z):
    return float(np.max(np.abs(np.real(z * p.conj())), initial=0.0))


def check_circle_tangent(p, z, atol=TANGENT_ATOL):
    err = circle_tangency_error(p, z)
    if err > atol:
        raise ValueError(f"direction is not tangent to the circle manifold (error {err:.2e})")


def circle_retract(p, v, step=1.0):
    """Entrywise normalization ``(p + step v) / |p + step v|``."""
    q = p + step * v
    mag = np.abs(q)
    if np.any(mag == 0.0):
        idx = tuple(int(i) for i in np.argwhere(mag == 0.0)[0])
        raise RetractionError(f"retraction hit a zero entry at {idx}", index=idx)
    return q / mag


def circle_ehess_to_rhess(p, egrad, ehess_dir, z, strict=True):
    """Riemannian Hessian on the circle from Euclidean gradient/Hessian data.

    ``Proj_p(ehess_dir - Re(egrad^* o p) o z)``: the Weingarten correction
    of the circle embedded in ``C^{m x n}``.
    """
    if strict:
        check_circle_tangent(p, z)
    return circle_project(p, ehess_dir - np.real(egrad.conj() * p) * z)


# -- scaled sphere ------------------------------------------------------------

def is_sphere_point(f, radius, atol=1e-12):
    return abs(np.linalg.norm(f) - radius) <= atol


def sphere_random(rng, shape, radius):
    g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return radius * g / np.linalg.norm(g)


def sphere_project(f, v):
    """``v - (Re tr(f^H v) / ||f||^2) f``."""
    return v - (inner(f, v) / inner(f, f)) * f


def sphere_tangency_error(f, z):
    return abs(inner(f, z))


def check_sphere_tangent(f, z, atol=TANGENT_ATOL):
    err = sphere_tangency_error(f, z)
    if err > atol * max(np.linalg.norm(f) * np.linalg.norm(z), 1.0):
        raise ValueError(f"direction is not tangent to the sphere (error {err:.2e})")


def sphere_retract(f, v, step=1.0, radius=None):
    """``radius (f + step v) / ||f + step v||_F``; radius defaults to ``||f||_F``."""
    if radius is None:
        radius = np.linalg.norm(f)
    q = f + step * v
    nq = np.linalg.norm(q)
    if nq == 0.0:
        raise RetractionError("sphere retraction of a zero matrix")
    return (radius / nq) * q


def sphere_ehess_to_rhess(f, egrad, ehess_dir, z, strict=True):
    """``Proj_f(ehess_dir) - (Re tr(f^H egrad) / ||f||^2) z``."""
    if strict:
        check_sphere_tangent(f, z)
    return sphere_project(f, ehess_dir) - (inner(f, egrad) / inner(f, f)) * z


# -- product ------------------------------------------------------------------

def product_project(pt, v):
    return TangentPair(circle_project(pt.f_ps, v.z_ps), sphere_project(pt.f_bb, v.z_bb))


def product_retract(pt, z, step=1.0):
    """Componentwise retraction; returns a point of the same type as ``pt``."""
    return type(pt)(
        circle_retract(pt.f_ps, z.z_ps, step),
        sphere_retract(pt.f_bb, z.z_bb, step, pt.radius),
        pt.radius,
    )


def product_dim(n_tx, n_rf, n_streams):
    """Real dimension of circle(n_tx x n_rf) x sphere(n_rf x n_streams)."""
    return n_tx * n_rf + 2 * n_rf * n_streams - 1
