"""Membrane Laplacian: assembly, energy form, Poisson solves, dual norm and
the discrete Poincare constant.

The assembled matrix ``A`` is the integrated (finite-volume) form of
``-div(D grad u)`` with Dirichlet outer walls and a Kedem-Katchalsky
membrane, so that ``v @ A @ w`` is the discrete energy form

    B[v, w] = sum_faces c_f (v_a - v_b)(w_a - w_b) + sum_walls c_w v_a w_a.

The lumped mass matrix is ``diag(cell volumes)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Real

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import DimensionError, InvalidParameterError, NoConvergenceError


@dataclass(frozen=True, eq=False)
class MembraneOperator:
    """Assembled symmetric positive definite membrane operator.

    ``membrane_kappa`` is the flux coefficient across the membrane:
    ``D * k`` for a scalar diffusion (species operator, flux
    ``D k [u]``) and ``k`` when diffusion is given per subdomain.
    """

    mesh: object
    matrix: sp.csr_matrix
    diffusion: object
    side_diffusion: tuple
    permeability: float
    membrane_kappa: float
    face_conductance: np.ndarray
    wall_conductance: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def mass(self):
        return self.mesh.volumes

    @property
    def membrane_conductance(self):
        return self.face_conductance[self.mesh.membrane_faces]

    @property
    def n(self):
        return self.mesh.n_cells

    def implicit_solver(self, dt):
        """Factorised solver for ``(M + dt A) x = b`` (cached per dt)."""
        key = ("implicit", float(dt))
        if key not in self._cache:
            lhs = sp.diags(self.mass) + float(dt) * self.matrix
            self._cache[key] = splu(lhs.tocsc()).solve
        return self._cache[key]

    def direct_solver(self):
        if "direct" not in self._cache:
            self._cache["direct"] = splu(self.matrix.tocsc()).solve
        return self._cache["direct"]


@dataclass(frozen=True)
class EllipticSolveReport:
    solution: np.ndarray
    iterations: int
    residual: float


def _positive(name, value):
    if not isinstance(value, Real) or not np.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{name} must be a positive number, got {value!r}")
    return float(value)


def assemble(mesh, diffusion, permeability):
    """Assemble the membrane operator on ``mesh``.

    Parameters
    ----------
    mesh : MembraneMesh
    diffusion : float or (float, float)
        Scalar ``D`` (one species) or per-subdomain ``(D1, D2)``.
    permeability : float
        Membrane permeability ``k``.

    Each membrane face couples its two cells through the half-cell
    resistances in series with the membrane resistance,
    ``c = area / (d1/D1 + 1/kappa + d2/D2)``; this keeps the scheme exact on
    piecewise-linear steady profiles. Interior faces carry ``D area / dist``
    and wall faces ``D area / half-dist`` on the diagonal.
    """
    k = _positive("permeability", permeability)
    if isinstance(diffusion, Real):
        d1 = d2 = _positive("diffusion", diffusion)
        kappa = d1 * k
        diffusion = d1
    else:
        try:
            d1, d2 = diffusion
        except (TypeError, ValueError):
            raise InvalidParameterError(f"diffusion must be a number or a pair, got {diffusion!r}")
        d1, d2 = _positive("diffusion", d1), _positive("diffusion", d2)
        kappa = k
        diffusion = (d1, d2)

    side_d = np.array([0.0, d1, d2])
    a, b = mesh.face_cells[:, 0], mesh.face_cells[:, 1]
    da, db = side_d[mesh.subdomain[a]], side_d[mesh.subdomain[b]]
    resistance = mesh.face_half[:, 0] / da + mesh.face_half[:, 1] / db
    resistance = resistance + np.where(mesh.face_membrane, 1.0 / kappa, 0.0)
    cond = mesh.face_area / resistance
    wall = side_d[mesh.subdomain[mesh.wall_cell]] * mesh.wall_area / mesh.wall_dist

    n = mesh.n_cells
    diag = np.zeros(n)
    np.add.at(diag, a, cond)
    np.add.at(diag, b, cond)
    np.add.at(diag, mesh.wall_cell, wall)
    rows = np.concatenate([a, b, np.arange(n)])
    cols = np.concatenate([b, a, np.arange(n)])
    vals = np.concatenate([-cond, -cond, diag])
    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    matrix.sum_duplicates()
    return MembraneOperator(
        mesh=mesh,
        matrix=matrix,
        diffusion=diffusion,
        side_diffusion=(d1, d2),
        permeability=k,
        membrane_kappa=kappa,
        face_conductance=cond,
        wall_conductance=wall,
    )


def _check(op, v):
    v = np.asarray(v, dtype=float)
    if v.shape != (op.n,):
        raise DimensionError(f"expected a field of shape ({op.n},), got {v.shape}")
    return v


def bilinear_form(op, v, w):
    """Discrete energy form ``B[v, w] = v^T A w`` (membrane jump included)."""
    v, w = _check(op, v), _check(op, w)
    return float(v @ (op.matrix @ w))


def conjugate_gradient(matrix, rhs, tol=1e-12, maxiter=None, x0=None):
    """Jacobi-preconditioned CG for a sparse SPD ``matrix``.

    Stops when ``||r|| <= tol * ||rhs||``. Returns ``(x, iterations,
    relative_residual)``; raises NoConvergenceError at ``maxiter`` (default
    ``50 * n``).
    """
    n = rhs.size
    maxiter = 50 * n if maxiter is None else maxiter
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return np.zeros(n), 0, 0.0
    inv_diag = 1.0 / matrix.diagonal()
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = rhs - matrix @ x
    z = inv_diag * r
    p = z.copy()
    rz = r @ z
    relres = np.linalg.norm(r) / bnorm
    for it in range(1, maxiter + 1):
        if relres <= tol:
            return x, it - 1, relres
        q = matrix @ p
        alpha = rz / (p @ q)
        x += alpha * p
        r -= alpha * q
        relres = np.linalg.norm(r) / bnorm
        z = inv_diag * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    if relres <= tol:
        return x, maxiter, relres
    raise NoConvergenceError(
        f"CG did not reach tol={tol:g} in {maxiter} iterations (residual {relres:.3e})",
        residual=relres, iterations=maxiter)


def solve_poisson(op, rhs, tol=1e-12, maxiter=None):
    """Solve ``A w = M rhs`` with preconditioned CG."""
    if not tol > 0:
        raise InvalidParameterError("tol must be positive")
    rhs = _check(op, rhs)
    w, iters, res = conjugate_gradient(op.matrix, op.mass * rhs, tol=tol, maxiter=maxiter)
    return EllipticSolveReport(solution=w, iterations=iters, residual=res)


def _require_unit_diffusion(op):
    if op.side_diffusion != (1.0, 1.0):
        raise InvalidParameterError(
            "dual norm and Poincare constant need the plain operator (diffusion=1)")


def dual_norm(op, f, tol=1e-12, method="cg"):
    """Discrete (H^1)* norm ``sqrt(f^T M A^{-1} M f) = B[w, w]^{1/2}``.

    ``op`` must be the plain (diffusion 1) membrane operator. ``method``
    selects CG (``"cg"``) or the cached sparse LU factor (``"direct"``).
    """
    _require_unit_diffusion(op)
    f = _check(op, f)
    if method == "direct":
        w = op.direct_solver()(op.mass * f)
    elif method == "cg":
        w = solve_poisson(op, f, tol=tol).solution
    else:
        raise InvalidParameterError(f"unknown method {method!r}")
    # w^T A w == w^T M f for the exact solve; the latter is cheaper
    return float(np.sqrt(max(w @ (op.mass * f), 0.0)))


def smallest_eigenpair(op, tol=1e-8, maxiter=2000, cg_tol=1e-13):
    """Smallest eigenvalue of ``A v = lambda M v`` by inverse power iteration.

    Starts from the constant vector (the ground state is positive). Stops
    when the relative change of the Rayleigh quotient drops below ``tol``.
    """
    m = op.mass
    v = np.ones(op.n)
    v /= np.sqrt(v @ (m * v))
    lam = (v @ (op.matrix @ v))
    for it in range(1, maxiter + 1):
        v, _, _ = conjugate_gradient(op.matrix, m * v, tol=cg_tol, x0=v / lam)
        v /= np.sqrt(v @ (m * v))
        lam_new = v @ (op.matrix @ v)
        change = abs(lam_new - lam) / abs(lam_new)
        lam = lam_new
        if change < tol:
            return float(lam), v
    raise NoConvergenceError(
        f"inverse power iteration stagnated after {maxiter} iterations", residual=change,
        iterations=maxiter)


def poincare_constant(op, tol=1e-8):
    """``C_P = 1 / lambda_min`` so that ``||v||_M^2 <= C_P B[v, v]``."""
    _require_unit_diffusion(op)
    lam, _ = smallest_eigenpair(op, tol=tol)
    return 1.0 / lam
