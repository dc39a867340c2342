"""Functionals evaluated along discrete trajectories.

Per-snapshot densities (mass, L2 norms, face-gradient energies, membrane
traces) are shared by the streaming records written during a run and by the
post-hoc checks below, which are pure functions of a trajectory. Time
integrals use the right-endpoint rule over the steps actually taken, which
is the quadrature under which the implicit scheme satisfies the energy
inequalities exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elliptic import assemble, dual_norm, solve_poisson
from .errors import (InsufficientDataError, InvalidParameterError, KKMembraneError,
                     OpenProblemError)
from .mesh import membrane_traces

OPEN_PROBLEM_MSG = (
    "the L2 key estimate is only established for equal membrane permeabilities "
    "k_1 = ... = k_m; extending it to distinct k_i is an open problem")


# -- snapshot densities -------------------------------------------------------

def masses(mesh, u):
    return np.atleast_2d(u) @ mesh.volumes


def l2_norms(mesh, u):
    u = np.atleast_2d(u)
    return np.sqrt((u ** 2) @ mesh.volumes)


def jump_l2(mesh, u, operators):
    """``sqrt(sum_i int_Gamma [u_i]^2)`` with flux-consistent traces."""
    total = 0.0
    area = mesh.face_area[mesh.membrane_faces]
    for ui, op in zip(np.atleast_2d(u), operators):
        tr = membrane_traces(mesh, ui, op)
        total += float(area @ (tr[:, 1] - tr[:, 0]) ** 2)
    return float(np.sqrt(total))


def _intra(mesh):
    f = mesh.interior_faces
    return f, mesh.face_cells[f, 0], mesh.face_cells[f, 1]


def gradient_energy(mesh, w, diffusion=1.0, level=None, wall_values=None, operator=None):
    """Face-gradient energy ``D int |grad w|^2`` inside the subdomains.

    With ``level=b`` only faces whose two adjacent values (the wall value for
    Dirichlet faces) satisfy ``|w| <= b`` are counted. ``wall_values``
    overrides the zero Dirichlet value per wall face. Given the assembled
    ``operator``, the half cells between the membrane and the adjacent cell
    centres are added using the reconstructed traces (unrestricted).
    """
    extra = 0.0
    if operator is not None:
        mem = mesh.membrane_faces
        a, b = mesh.face_cells[mem, 0], mesh.face_cells[mem, 1]
        tr = membrane_traces(mesh, w, operator)
        d1, d2 = operator.side_diffusion
        area, half = mesh.face_area[mem], mesh.face_half[mem]
        extra = float(area @ (d1 * (w[a] - tr[:, 0]) ** 2 / half[:, 0]
                              + d2 * (w[b] - tr[:, 1]) ** 2 / half[:, 1]))
    f, a, b = _intra(mesh)
    coef = mesh.face_area[f] / mesh.face_dist[f]
    dw = w[a] - w[b]
    ww = np.zeros(mesh.wall_cell.size) if wall_values is None else np.asarray(wall_values, float)
    wcoef = mesh.wall_area / mesh.wall_dist
    dwall = w[mesh.wall_cell] - ww
    if level is not None:
        keep = (np.abs(w[a]) <= level) & (np.abs(w[b]) <= level)
        coef = np.where(keep, coef, 0.0)
        wkeep = (np.abs(w[mesh.wall_cell]) <= level) & (np.abs(ww) <= level)
        wcoef = np.where(wkeep, wcoef, 0.0)
    return float(diffusion * (coef @ dw ** 2 + wcoef @ dwall ** 2)) + extra


def weighted_gradient_density(mesh, w, alpha):
    """``int |grad (1 + |w|)^alpha|^2`` at one instant, summed over the
    faces inside each subdomain."""
    phi = (1.0 + np.abs(w)) ** alpha
    f, a, b = _intra(mesh)
    return float(mesh.face_area[f] / mesh.face_dist[f] @ (phi[a] - phi[b]) ** 2)


def lbeta_gradient_density(mesh, w, beta):
    """``int |grad w|^beta`` with face-diamond quadrature over the faces
    inside each subdomain."""
    f, a, b = _intra(mesh)
    dist = mesh.face_dist[f]
    return float((mesh.face_area[f] * dist) @ np.abs((w[a] - w[b]) / dist) ** beta)


def lbeta_trace_density(mesh, w, beta, operator=None):
    """``int_Gamma |w^1|^beta + |w^2|^beta``."""
    tr = membrane_traces(mesh, w, operator)
    area = mesh.face_area[mesh.membrane_faces]
    return float(area @ (np.abs(tr[:, 0]) ** beta + np.abs(tr[:, 1]) ** beta))


def _finite(name, value):
    if not np.all(np.isfinite(value)):
        raise KKMembraneError(f"non-finite value in monitor {name}")
    return value


# -- key estimate -------------------------------------------------------------

@dataclass
class KeyEstimateState:
    """Streaming evaluation of the weighted-energy functional

        E(t) = 1/2 ||U(t)||_*^2 + 1/2 int_0^t int U V,

    with ``U = e^{-Ct} sum u_i``, ``V = e^{-Ct} sum D_i u_i`` and the dual
    norm taken through the plain membrane Laplacian with permeability ``k``.
    ``G`` solves ``-Delta G = C`` with the same conditions and
    ``C1 = ||G||^2 / (2 min D)``.
    """

    mesh: object
    diffusions: np.ndarray
    k: float
    C: float
    plain: object = None
    G: np.ndarray = None
    C1: float = 0.0
    int_UV: float = 0.0
    int_u2: float = 0.0
    E0: float = float("nan")
    dual0: float = float("nan")

    @classmethod
    def create(cls, mesh, diffusions, permeabilities, C):
        ks = np.asarray(permeabilities, dtype=float)
        if np.any(ks != ks[0]):
            raise OpenProblemError(OPEN_PROBLEM_MSG)
        if C < 0:
            raise InvalidParameterError("mass-control constant must be nonnegative")
        plain = assemble(mesh, 1.0, float(ks[0]))
        G = solve_poisson(plain, np.full(mesh.n_cells, float(C)), tol=1e-14).solution
        D = np.asarray(diffusions, dtype=float)
        C1 = float(mesh.volumes @ G ** 2) / (2 * D.min())
        return cls(mesh=mesh, diffusions=D, k=float(ks[0]), C=float(C), plain=plain, G=G, C1=C1)

    def hats(self, t, u):
        u = np.atleast_2d(u)
        e = np.exp(-self.C * t)
        return e * u.sum(axis=0), e * (self.diffusions @ u)

    def dual(self, t, u):
        U, _ = self.hats(t, u)
        return dual_norm(self.plain, U, method="direct")

    def start(self, u0):
        self.dual0 = self.dual(0.0, u0)
        self.E0 = 0.5 * self.dual0 ** 2
        return self.E0

    def advance(self, dt, t_new, u_new):
        U, V = self.hats(t_new, u_new)
        self.int_UV += dt * float(self.mesh.volumes @ (U * V))
        self.int_u2 += dt * float(np.sum((np.atleast_2d(u_new) ** 2) @ self.mesh.volumes))

    def energy(self, t, u):
        d = self.dual(t, u)
        return d, 0.5 * d ** 2 + 0.5 * self.int_UV

    @property
    def diffusion_min(self):
        return float(self.diffusions.min())

    def C3(self, T):
        return (2.0 / self.diffusion_min) * (self.E0 + self.C1 * T) * np.exp(2 * self.C * T)


@dataclass
class KeyEstimateReport:
    times: np.ndarray
    dual: np.ndarray
    energy: np.ndarray
    bound: np.ndarray
    E0: float
    C: float
    C1: float
    C3: float
    space_time_l2: float
    slack: float
    passed_energy: bool
    passed_l2: bool
    worst_margin: float

    @property
    def passed(self):
        return self.passed_energy and self.passed_l2

    def lines(self):
        return [
            f"E(t) <= E(0) + C1 t (1+{self.slack:g}): max E - bound = {self.worst_margin:.3e} "
            f"[E0={self.E0:.6e}, C1={self.C1:.6e}] -> {'PASS' if self.passed_energy else 'FAIL'}",
            f"sum_i int int u_i^2 = {self.space_time_l2:.6e} <= C3 = {self.C3:.6e} -> "
            f"{'PASS' if self.passed_l2 else 'FAIL'}",
        ]


def key_estimate_check(trajectory, C=None, slack=0.05, every_step=True):
    """Replay a trajectory through :class:`KeyEstimateState` and check

        E(t) <= E(0) + C1 t (1 + slack)         at every stored step,
        sum_i int int u_i^2 <= C3 = (2/min D)(E(0) + C1 T) e^{2CT}.

    Raises OpenProblemError when the species permeabilities differ.
    """
    C = trajectory.mass_control_C if C is None else C
    ks = [op.permeability for op in trajectory.operators]
    D = [op.diffusion for op in trajectory.operators]
    st = KeyEstimateState.create(trajectory.mesh, D, ks, C)
    fields, times = trajectory.fields, trajectory.times
    st.start(fields[0])
    ts, duals, Es = [0.0], [st.dual0], [st.E0]
    for j in range(1, len(times)):
        st.advance(times[j] - times[j - 1], times[j], fields[j])
        if every_step or trajectory.outer[j]:
            d, E = st.energy(times[j], fields[j])
            ts.append(times[j])
            duals.append(d)
            Es.append(E)
    ts, duals, Es = map(np.asarray, (ts, duals, Es))
    _finite("key estimate", Es)
    bound = st.E0 + st.C1 * ts * (1 + slack)
    tol = 1e-12 * max(1.0, st.E0)
    margin = float(np.max(Es - bound))
    T = float(times[-1])
    C3 = st.C3(T)
    return KeyEstimateReport(
        times=ts, dual=duals, energy=Es, bound=bound, E0=st.E0, C=float(C), C1=st.C1,
        C3=C3, space_time_l2=st.int_u2, slack=slack,
        passed_energy=margin <= tol, passed_l2=st.int_u2 <= C3, worst_margin=margin)


# -- truncation energy --------------------------------------------------------

@dataclass
class TruncationEnergyReport:
    b: float
    lhs: float
    rhs: float
    int_abs_f: float
    int_f: float
    initial_l1: float
    slack: float
    signed_source_negative: bool

    @property
    def passed(self):
        return self.lhs <= self.rhs * (1 + self.slack) + 1e-14

    def line(self):
        flag = " (signed int f < 0)" if self.signed_source_negative else ""
        return (f"b={self.b:g}: D int_(|w|<=b) |grad w|^2 = {self.lhs:.6e} <= "
                f"b[int|f| + int|w0|] = {self.rhs:.6e}{flag} -> {'PASS' if self.passed else 'FAIL'}")


def truncation_energy_check(trajectory, b, species=0, slack=0.10):
    """Check ``D int_{|w|<=b} |grad w|^2 <= b [int int |f| + int |w0|]``.

    The source is the reaction actually applied over each step. The signed
    integral is reported as well; when it is negative the literal signed
    bound is not meaningful and the absolute-value form is the one checked.
    """
    if not b > 0:
        raise InvalidParameterError("truncation level must be positive")
    mesh = trajectory.mesh
    D = trajectory.operators[species].diffusion
    fields = trajectory.fields[:, species]
    src = trajectory.sources[:, species]
    dts = np.diff(trajectory.times)
    lhs = sum(dt * gradient_energy(mesh, w, D, level=b) for dt, w in zip(dts, fields[1:]))
    int_abs_f = float(dts @ (np.abs(src) @ mesh.volumes)) if dts.size else 0.0
    int_f = float(dts @ (src @ mesh.volumes)) if dts.size else 0.0
    w0 = float(mesh.volumes @ np.abs(fields[0]))
    rhs = b * (int_abs_f + w0)
    _finite("truncation energy", [lhs, rhs])
    return TruncationEnergyReport(b=float(b), lhs=float(lhs), rhs=float(rhs), int_abs_f=int_abs_f,
                                  int_f=int_f, initial_l1=w0, slack=slack,
                                  signed_source_negative=int_f < 0)


# -- a priori norms -----------------------------------------------------------

def _check_alpha(alpha):
    if not 0 <= alpha < 0.5:
        raise InvalidParameterError(f"alpha must lie in [0, 1/2), got {alpha}")


def weighted_gradient_norm(trajectory, alpha, species=0):
    """``int_0^T int |grad (1 + |w|)^alpha|^2`` for ``0 <= alpha < 1/2``."""
    _check_alpha(alpha)
    mesh = trajectory.mesh
    dts = np.diff(trajectory.times)
    vals = [weighted_gradient_density(mesh, w, alpha) for w in trajectory.fields[1:, species]]
    return float(_finite("weighted gradient", dts @ np.asarray(vals))) if vals else 0.0


def lbeta_gradient_and_trace(trajectory, beta, species=0):
    """Return ``(int_0^T int |grad w|^beta, int_0^T int_Gamma |w^1|^beta + |w^2|^beta)``.

    The bound is only claimed for ``1 <= beta < d/(d-1)``; other exponents
    are still reported.
    """
    mesh = trajectory.mesh
    op = trajectory.operators[species]
    dts = np.diff(trajectory.times)
    fields = trajectory.fields[1:, species]
    g = np.array([lbeta_gradient_density(mesh, w, beta) for w in fields])
    tr = np.array([lbeta_trace_density(mesh, w, beta, op) for w in fields])
    if not dts.size:
        return 0.0, 0.0
    return float(_finite("lbeta", dts @ g)), float(_finite("trace", dts @ tr))


def beta_in_bounded_range(beta, dim):
    return beta >= 1 and (dim == 1 or beta < dim / (dim - 1))


# -- time translation ---------------------------------------------------------

@dataclass
class TranslationReport:
    h: np.ndarray
    omega: np.ndarray
    slope: float
    stationary: bool
    floor: float = 0.45

    @property
    def passed(self):
        return self.stationary or self.slope >= self.floor


def time_translation_modulus(trajectory, shifts, species=0, floor=0.45):
    """Fit the decay exponent of ``omega(h) = int int |w(t+h) - w(t)|``.

    ``shifts`` are integer multiples of the (uniform) stored step. All
    ``omega(h)`` are integrated over the common window ``[0, T - h_max]``
    so that a field linear in time gives slope exactly 1.
    """
    shifts = sorted(int(s) for s in shifts)
    if len(shifts) < 4:
        raise InsufficientDataError("need at least 4 shift values")
    if shifts[0] < 1:
        raise InvalidParameterError("shifts must be positive step multiples")
    times = trajectory.times
    dts = np.diff(times)
    if dts.size == 0 or np.ptp(dts) > 1e-9 * dts.max():
        raise InsufficientDataError("time translation needs a uniformly stepped trajectory")
    dt = float(dts.mean())
    w = trajectory.fields[:, species]
    vol = trajectory.mesh.volumes
    window = w.shape[0] - shifts[-1]
    if window < 2:
        raise InsufficientDataError("trajectory too short for the largest shift")
    omega = np.array([dt * np.sum(np.abs(w[s:s + window] - w[:window]) @ vol) for s in shifts])
    h = dt * np.asarray(shifts, dtype=float)
    _finite("omega", omega)
    if np.all(omega == 0):
        return TranslationReport(h=h, omega=omega, slope=float("nan"), stationary=True, floor=floor)
    slope = float(np.polyfit(np.log(h), np.log(omega), 1)[0])
    return TranslationReport(h=h, omega=omega, slope=slope, stationary=False, floor=floor)


# -- streaming records --------------------------------------------------------

@dataclass
class MonitorRecord:
    t: float
    masses: tuple
    total_mass: float
    l2: tuple
    dual_norm_U: float | None
    E_t: float | None
    jump_l2: float
    min_value: float
    extras: dict = field(default_factory=dict)

    def columns(self):
        m = len(self.masses)
        cols = ["t"] + [f"mass_{i + 1}" for i in range(m)] + ["mass_total"]
        cols += [f"l2_{i + 1}" for i in range(m)]
        if self.dual_norm_U is not None:
            cols += ["dual_norm_U", "E_t"]
        cols += ["jump_L2", "min_value"] + list(self.extras)
        return cols

    def values(self):
        vals = [self.t, *self.masses, self.total_mass, *self.l2]
        if self.dual_norm_U is not None:
            vals += [self.dual_norm_U, self.E_t]
        vals += [self.jump_l2, self.min_value, *self.extras.values()]
        return vals


class StreamingMonitors:
    """Accumulates the optional time integrals during a run, step by step,
    using the same densities as the post-hoc checks."""

    def __init__(self, mesh, operators, spec, u0):
        self.mesh, self.operators, self.spec = mesh, operators, spec
        self.levels = tuple(spec.truncation_levels)
        if spec.weighted_gradient_alpha is not None:
            _check_alpha(spec.weighted_gradient_alpha)
        s = spec.truncation_species
        self.trunc_lhs = dict.fromkeys(self.levels, 0.0)
        self.int_abs_f = 0.0
        self.w0_l1 = float(mesh.volumes @ np.abs(u0[s])) if self.levels else 0.0
        self.weighted = 0.0
        self.lbeta = [0.0, 0.0]
        self.flux_balance = 0.0

    def advance(self, dt, u_new, f_used, budget_residual):
        mesh, spec = self.mesh, self.spec
        if self.levels:
            s = spec.truncation_species
            D = self.operators[s].diffusion
            self.int_abs_f += dt * float(mesh.volumes @ np.abs(f_used[s]))
            for b in self.levels:
                self.trunc_lhs[b] += dt * gradient_energy(mesh, u_new[s], D, level=b)
        a = spec.apriori_species
        if spec.weighted_gradient_alpha is not None:
            self.weighted += dt * weighted_gradient_density(mesh, u_new[a], spec.weighted_gradient_alpha)
        if spec.lbeta is not None:
            self.lbeta[0] += dt * lbeta_gradient_density(mesh, u_new[a], spec.lbeta)
            self.lbeta[1] += dt * lbeta_trace_density(mesh, u_new[a], spec.lbeta, self.operators[a])
        self.flux_balance = max(self.flux_balance, float(budget_residual))

    def extras(self):
        out = {}
        for b in self.levels:
            out[f"trunc_lhs_b{b:g}"] = self.trunc_lhs[b]
            out[f"trunc_rhs_b{b:g}"] = b * (self.int_abs_f + self.w0_l1)
        if self.spec.weighted_gradient_alpha is not None:
            out["weighted_grad"] = self.weighted
        if self.spec.lbeta is not None:
            out["lbeta_grad"], out["lbeta_trace"] = self.lbeta
        if self.spec.flux_balance:
            out["flux_balance"] = self.flux_balance
        return out


def make_record(t, u, mesh, operators, key_state=None, streaming=None):
    ms = masses(mesh, u)
    dual = E = None
    if key_state is not None:
        dual, E = key_state.energy(t, u)
    rec = MonitorRecord(
        t=float(t), masses=tuple(float(x) for x in ms), total_mass=float(ms.sum()),
        l2=tuple(float(x) for x in l2_norms(mesh, u)), dual_norm_U=dual, E_t=E,
        jump_l2=jump_l2(mesh, u, operators), min_value=float(np.min(u)),
        extras=streaming.extras() if streaming is not None else {})
    _finite("record", rec.values())
    return rec
