"""Reaction vector fields, their bounded regularisations, the C^2 truncation
and a sampling-based checker for the structural hypotheses.

A reaction maps concentrations ``u`` of shape ``(m, ...)`` to rates of the
same shape. The hypotheses checked are, on ``[0, M]^m``:

* growth:          |f_i(u)| <= C (1 + sum_j u_j^2)
* mass control:    sum_j f_j(u) <= C (1 + sum_j u_j)
* quasi-positivity f_i(u) >= 0 whenever u_i = 0
* local Lipschitz  sum_i |f_i(u) - f_i(v)| <= C_M sum_j |u_j - v_j|
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidDataError, InvalidParameterError

QUASI_POSITIVITY_TOL = 1e-12
DIVERGENCE_FACTOR = 1.5


@dataclass(frozen=True)
class ReactionSystem:
    """A reaction field with its declared structural constants.

    ``lipschitz(M)`` returns the declared ``C_M`` on ``[0, M]^m``.
    """

    m: int
    func: Callable[[np.ndarray], np.ndarray]
    C: float
    lipschitz: Callable[[float], float]
    label: str
    params: dict = field(default_factory=dict)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape[0] != self.m:
            raise InvalidParameterError(f"{self.label} expects {self.m} species, got {u.shape[0]}")
        return self.func(u)


@dataclass(frozen=True)
class RegularizedReaction:
    """``f_i^n = f_i / (1 + (1/n) sum_j |f_j|)``; bounded by ``n``."""

    base: ReactionSystem
    n: int

    @property
    def m(self):
        return self.base.m

    @property
    def C(self):
        return self.base.C

    @property
    def label(self):
        return f"{self.base.label}@n={self.n}"

    def lipschitz(self, M):
        return self.base.lipschitz(M)

    def __call__(self, u):
        f = self.base(u)
        return f / (1.0 + np.abs(f).sum(axis=0) / self.n)


def regularize(system, n):
    if int(n) != n or n < 1:
        raise InvalidParameterError(f"regularisation level must be an integer >= 1, got {n}")
    return RegularizedReaction(system, int(n))


# -- builtin systems --------------------------------------------------------

def builtin_zero(m=1):
    return ReactionSystem(m, np.zeros_like, 0.0, lambda M: 0.0, "zero", {"m": m})


def builtin_annihilation():
    """``f_1 = f_2 = -u_1 u_2``."""

    def func(u):
        r = -u[0] * u[1]
        return np.stack([r, r])

    return ReactionSystem(2, func, 1.0, lambda M: 2.0 * M, "annihilation")


def builtin_linear_growth(m=2):
    """``f_i = u_i``; mass control holds with ``C = 1`` and no better."""
    return ReactionSystem(m, lambda u: u.copy(), 1.0, lambda M: 1.0, "linear_growth", {"m": m})


def builtin_constant_loss(m=2):
    """``f_1 = -1``: violates quasi-positivity on purpose."""

    def func(u):
        f = np.zeros_like(u)
        f[0] = -1.0
        return f

    return ReactionSystem(m, func, 1.0, lambda M: 0.0, "constant_loss", {"m": m})


# Species order: Ran-GTP, Ran-GDP, importin/Ran complex, cargo, importin,
# importin/cargo complex. Each entry: (reactants, products, conserves mass).
TRANSPORT_SPECIES = ("R_t", "R_d", "T_r", "C", "T", "T_c")
TRANSPORT_REACTIONS = (
    ((0,), (1,), True),          # R_t -> R_d
    ((1,), (0,), True),          # R_d -> R_t
    ((0, 4), (2,), False),       # R_t + T -> T_r
    ((3, 4), (5,), False),       # C + T -> T_c
    ((5, 0), (3, 2), True),      # T_c + R_t -> C + T_r
    ((2, 3), (5, 0), True),      # T_r + C -> T_c + R_t
)


def builtin_transport_demo(rates, conservative=False):
    """Six-species mass-action stand-in for a nuclear transport network.

    Every reaction has at most two reactants, consumes at least as many
    molecules as it produces, and each loss term of ``f_i`` carries ``u_i``,
    so sum f <= 0 and quasi-positivity hold by construction. With
    ``conservative=True`` the binding reactions that lose mass are dropped
    and ``sum_i f_i == 0``.
    """
    rates = np.asarray(rates, dtype=float)
    if rates.shape != (len(TRANSPORT_REACTIONS),):
        raise InvalidParameterError(f"transport_demo needs {len(TRANSPORT_REACTIONS)} rates")
    if np.any(~np.isfinite(rates)) or np.any(rates < 0):
        raise InvalidParameterError("rates must be nonnegative")
    if conservative:
        keep = np.array([c for _, _, c in TRANSPORT_REACTIONS])
        rates = np.where(keep, rates, 0.0)
    m = len(TRANSPORT_SPECIES)
    stoich = np.zeros((m, len(rates)))
    for r, (reac, prod, _) in enumerate(TRANSPORT_REACTIONS):
        for s in reac:
            stoich[s, r] -= 1
        for s in prod:
            stoich[s, r] += 1

    def func(u):
        flux = np.stack([rates[r] * np.prod([u[s] for s in reac], axis=0)
                         for r, (reac, _, _) in enumerate(TRANSPORT_REACTIONS)])
        return np.tensordot(stoich, flux, axes=1)

    absnu = np.abs(stoich)
    # each monomial u_a or u_a u_b is <= 1 + sum u^2
    C = float((absnu @ rates).max())
    order = np.array([len(reac) for reac, _, _ in TRANSPORT_REACTIONS])
    col = absnu.sum(axis=0) * rates

    def lipschitz(M):
        return float(np.sum(col * np.where(order == 2, M, 1.0)))

    return ReactionSystem(m, func, C, lipschitz, "transport_demo",
                          {"rates": rates.tolist(), "conservative": bool(conservative)})


REACTIONS = {
    "zero": builtin_zero,
    "annihilation": builtin_annihilation,
    "transport_demo": builtin_transport_demo,
    "linear_growth": builtin_linear_growth,
    "constant_loss": builtin_constant_loss,
}


def make_reaction(label, params=None, m=None):
    """Build a registered reaction by label."""
    params = dict(params or {})
    if label not in REACTIONS:
        raise InvalidParameterError(
            f"unknown reaction {label!r}; available: {', '.join(sorted(REACTIONS))}")
    if label in ("zero", "linear_growth", "constant_loss") and m is not None:
        params.setdefault("m", m)
    return REACTIONS[label](**params)


# -- hypothesis checker -----------------------------------------------------

@dataclass
class HypothesisReport:
    label: str
    M: float
    samples: int
    growth_C: float
    mass_C: float
    mass_C_raw: float
    quasi_positive: bool
    min_boundary_value: float
    lipschitz_CM: float
    doubled: dict
    diverged: list
    declared: dict
    failures: list

    @property
    def passed(self):
        return not self.failures

    def summary(self):
        head = (f"{self.label} on [0,{self.M:g}]^m, {self.samples} samples: growth C~{self.growth_C:.4g}, "
                f"mass C~{self.mass_C_raw:.4g}, min boundary f_i={self.min_boundary_value:.3g}, "
                f"C_M~{self.lipschitz_CM:.4g} (declared C={self.declared['C']:g}, "
                f"C_M={self.declared['C_M']:g})")
        return head + ("" if self.passed else "; " + "; ".join(self.failures))


def _estimates(system, M, samples, rng):
    m = system.m
    u = rng.uniform(0.0, M, size=(m, samples))
    u[:, 0] = 0.0
    u[:, 1] = M
    f = system(u)
    sq = 1.0 + (u ** 2).sum(axis=0)
    growth = float(np.max(np.abs(f) / sq))
    mass_raw = float(np.max(f.sum(axis=0) / (1.0 + u.sum(axis=0))))

    min_boundary = np.inf
    for i in range(m):
        ub = u.copy()
        ub[i] = 0.0
        min_boundary = min(min_boundary, float(system(ub)[i].min()))

    # far pairs and nearby pairs (the latter probe the derivative)
    half = samples // 2
    v_far = u[:, half:2 * half]
    u_far = u[:, :half]
    step = 1e-6 * M * rng.choice([-1.0, 1.0], size=u.shape)
    v_near = np.clip(u + step, 0.0, M)
    uu = np.concatenate([u_far, u], axis=1)
    vv = np.concatenate([v_far, v_near], axis=1)
    du = np.abs(uu - vv).sum(axis=0)
    ok = du > 0
    df = np.abs(system(uu) - system(vv)).sum(axis=0)
    lip = float(np.max(df[ok] / du[ok])) if ok.any() else 0.0
    return {"growth": growth, "mass_raw": mass_raw, "min_boundary": min_boundary,
            "lipschitz": lip, "finite": bool(np.all(np.isfinite(f)))}


def check_hypotheses(system, M, samples, seed=0):
    """Sample ``[0, M]^m`` uniformly and estimate the structural constants.

    The check fails when quasi-positivity is violated (beyond 1e-12), when
    an estimate is not finite or grows by more than 50% when the sample
    count doubles, or when an estimate exceeds a declared constant.
    """
    if not M > 0:
        raise InvalidParameterError("M must be positive")
    if samples < 1000:
        raise InvalidParameterError("at least 1000 samples are required")
    est = _estimates(system, M, samples, np.random.default_rng(seed))
    est2 = _estimates(system, M, 2 * samples, np.random.default_rng(seed + 1))

    failures, diverged = [], []
    if not (est["finite"] and est2["finite"]):
        failures.append("reaction returned non-finite values")
    quasi = est["min_boundary"] >= -QUASI_POSITIVITY_TOL and est2["min_boundary"] >= -QUASI_POSITIVITY_TOL
    if not quasi:
        failures.append(f"quasi-positivity violated (min f_i on u_i=0: "
                        f"{min(est['min_boundary'], est2['min_boundary']):.3e})")
    for key in ("growth", "lipschitz"):
        a, b = est[key], est2[key]
        if not np.isfinite(b) or b > DIVERGENCE_FACTOR * a + 1e-12:
            diverged.append(key)
    a, b = max(est["mass_raw"], 0.0), max(est2["mass_raw"], 0.0)
    if b > DIVERGENCE_FACTOR * a + 1e-12:
        diverged.append("mass")
    for key in diverged:
        failures.append(f"{key} estimate diverges under sample doubling")

    growth = max(est["growth"], est2["growth"])
    mass_raw = max(est["mass_raw"], est2["mass_raw"])
    lip = max(est["lipschitz"], est2["lipschitz"])
    declared = {"C": system.C, "C_M": system.lipschitz(M)}
    slack = 1 + 1e-9
    if growth > declared["C"] * slack + 1e-12:
        failures.append(f"growth estimate {growth:.6g} exceeds declared C={declared['C']:.6g}")
    if mass_raw > declared["C"] * slack + 1e-12:
        failures.append(f"mass-control estimate {mass_raw:.6g} exceeds declared C={declared['C']:.6g}")
    if lip > declared["C_M"] * (1 + 1e-6) + 1e-12:
        failures.append(f"Lipschitz estimate {lip:.6g} exceeds declared C_M={declared['C_M']:.6g}")

    return HypothesisReport(
        label=system.label, M=float(M), samples=int(samples),
        growth_C=growth, mass_C=max(mass_raw, 0.0), mass_C_raw=mass_raw,
        quasi_positive=quasi,
        min_boundary_value=min(est["min_boundary"], est2["min_boundary"]),
        lipschitz_CM=lip,
        doubled={k: est2[k] for k in ("growth", "mass_raw", "lipschitz")},
        diverged=diverged, declared=declared, failures=failures,
    )


# -- initial data regularisation ----------------------------------------------

def _bump(q):
    out = np.zeros_like(q)
    inside = q < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - q[inside] ** 2))
    return out


def mollify_initial(u0, n, mesh):
    """Clip ``u0`` at level ``n`` and smooth it with a bump kernel of radius
    ``1/n``, separately inside each subdomain.

    Kernel weights are renormalised per cell, so constants are reproduced
    exactly and no mass is smeared across the membrane.
    """
    u0 = mesh.check_field(u0)
    if np.any(u0 < 0):
        raise InvalidDataError("initial data must be nonnegative")
    if int(n) != n or n < 1:
        raise InvalidParameterError("n must be an integer >= 1")
    clipped = np.minimum(u0, float(n))
    delta = 1.0 / n
    out = np.empty_like(clipped)
    for side in (1, 2):
        idx = np.flatnonzero(mesh.subdomain == side)
        pts = mesh.centers[idx]
        tree = cKDTree(pts)
        pairs = tree.query_pairs(delta, output_type="ndarray")
        i, j = pairs[:, 0], pairs[:, 1]
        w = _bump(np.linalg.norm(pts[i] - pts[j], axis=1) / delta)
        self_w = _bump(np.zeros(1))[0]
        vals = clipped[idx]
        num = self_w * vals
        den = np.full(idx.size, self_w)
        np.add.at(num, i, w * vals[j])
        np.add.at(num, j, w * vals[i])
        np.add.at(den, i, w)
        np.add.at(den, j, w)
        out[idx] = num / den
    return out


# -- truncation ---------------------------------------------------------------

@dataclass(frozen=True)
class Truncation:
    """C^2 cap at level ``b``: identity on ``[0, b-2]``, cosine transition
    of width 2, constant ``b - 1`` on ``[b, inf)``."""

    b: float
    width: float = 2.0

    def _s(self, sigma):
        return np.asarray(sigma, dtype=float) - (self.b - self.width)

    def __call__(self, sigma):
        s = self._s(sigma)
        sc = np.clip(s, 0.0, self.width)
        layer = sc / 2 + np.sin(np.pi * sc / 2) / np.pi
        return np.where(s <= 0, np.asarray(sigma, dtype=float), self.b - self.width + layer)

    def d1(self, sigma):
        s = self._s(sigma)
        sc = np.clip(s, 0.0, self.width)
        return np.where(s <= 0, 1.0, 0.5 * (1 + np.cos(np.pi * sc / 2)))

    def d2(self, sigma):
        s = self._s(sigma)
        inside = (s > 0) & (s < self.width)
        return np.where(inside, -np.pi / 4 * np.sin(np.pi * np.clip(s, 0, self.width) / 2), 0.0)


def make_truncation(b):
    if not np.isfinite(b) or b < 4:
        raise InvalidParameterError(f"truncation level must be >= 4, got {b}")
    return Truncation(float(b))
