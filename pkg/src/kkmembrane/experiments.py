"""Verification campaigns: standard scenarios, sweeps, refinement studies
and the named verification suites used by the command line.

Every campaign returns plain tables plus a list of :class:`Check` verdicts
that print both sides of the inequality they test.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .elliptic import assemble, bilinear_form, dual_norm, poincare_constant, solve_poisson
from .errors import InsufficientDataError, InvalidParameterError, OpenProblemError
from .mesh import build_interval_mesh, build_rect_mesh
from .monitors import (key_estimate_check, time_translation_modulus, truncation_energy_check)
from .parabolic import (MeshSpec, MonitorSpec, SimConfig, SpeciesSpec, membrane_flux_and_jump,
                        simulate, steady_profile, steady_state)
from .reactions import (builtin_annihilation, builtin_constant_loss, builtin_transport_demo,
                        check_hypotheses, make_truncation)

SUITES = ("elliptic", "reactions", "parabolic", "monitors", "campaigns")
TRANSPORT_RATES = (1.0, 0.5, 0.3, 0.2, 0.8, 0.6)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


@dataclass
class Table:
    name: str
    columns: list
    rows: list = field(default_factory=list)

    def add(self, *row):
        self.rows.append(list(row))

    def column(self, name):
        return [r[self.columns.index(name)] for r in self.rows]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([f"{v:.15e}" if isinstance(v, float) else v for v in r])


@dataclass
class Campaign:
    name: str
    tables: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def summary(self):
        lines = [f"campaign: {self.name}"] + [c.line() for c in self.checks]
        lines.append(f"verdict: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for t in self.tables:
            t.write_csv(out / f"{t.name}.csv")
        (out / "summary.txt").write_text(self.summary())


# -- standard scenarios -------------------------------------------------------

def spike(center=0.5, width=1 / 64, mass=1.0):
    return {"type": "spike", "center": center, "width": width, "mass": mass}


def standard_annihilation(n_cells=128, t_end=1.0, dt=1e-3, **monitors):
    """Two annihilating species, both a unit-mass spike of width 1/64 at
    x = 0.5 on the unit-unit interval."""
    mon = dict(key_estimate=True, truncation_levels=(4.0, 8.0, 16.0))
    mon.update(monitors)
    return SimConfig(mesh=MeshSpec(n1=n_cells // 2, n2=n_cells // 2),
                     species=(SpeciesSpec(initial=spike()), SpeciesSpec(initial=spike())),
                     reaction="annihilation", t_end=t_end, dt=dt, monitors=MonitorSpec(**mon))


def tall_spike(regularization=None, n_cells=128, t_end=1.0, dt=1e-3):
    """Species 1 is a one-cell spike of height 1e3; species 2 a unit sine."""
    h = 2.0 / n_cells
    return SimConfig(mesh=MeshSpec(n1=n_cells // 2, n2=n_cells // 2),
                     species=(SpeciesSpec(initial={"type": "box", "lo": 0.5 - h, "hi": 0.5,
                                                   "value": 1e3}),
                              SpeciesSpec(initial={"type": "sine", "amplitude": 1.0})),
                     reaction="annihilation", regularization=regularization,
                     t_end=t_end, dt=dt)


def rough_heat(n_cells=128, t_end=0.5, dt=1e-3, seed=0):
    return SimConfig(mesh=MeshSpec(n1=n_cells // 2, n2=n_cells // 2),
                     species=(SpeciesSpec(initial={"type": "rough", "mean": 1.0, "seed": seed}),),
                     t_end=t_end, dt=dt)


def transient_heat(n_cells=32, dt=0.01, t_end=0.1, D=1.0, k=1.0):
    return SimConfig(mesh=MeshSpec(n1=n_cells // 2, n2=n_cells // 2),
                     species=(SpeciesSpec(D=D, k=k, initial={"type": "sine"}),),
                     t_end=t_end, dt=dt)


def apriori_1d(n_cells, alpha=0.4, beta=1.5):
    return standard_annihilation(n_cells, key_estimate=False, truncation_levels=(),
                                 weighted_gradient_alpha=alpha, lbeta=beta)


def apriori_2d(ny, alpha=0.4, beta=1.5, t_end=0.1, dt=1e-3):
    """Two annihilating species, box data on ``(0.25, 0.75)^2``; mesh
    ``2 ny x ny``."""
    box = {"type": "box", "lo": [0.25, 0.25], "hi": [0.75, 0.75], "value": 2.0}
    return SimConfig(mesh=MeshSpec(dim=2, n1=ny, n2=ny, ny=ny),
                     species=(SpeciesSpec(initial=box), SpeciesSpec(initial=box)),
                     reaction="annihilation", t_end=t_end, dt=dt,
                     monitors=MonitorSpec(weighted_gradient_alpha=alpha, lbeta=beta))


# -- helpers ------------------------------------------------------------------

def space_time_l1(traj_a, traj_b):
    """``int_0^T int |a - b|`` per species over the common outer steps."""
    a, b = traj_a.outer_fields, traj_b.outer_fields
    if a.shape != b.shape:
        raise InvalidParameterError("trajectories are not on the same grid")
    dts = np.diff(traj_a.outer_times)
    return dts @ (np.abs(a[1:] - b[1:]) @ traj_a.mesh.volumes)


def restrict(mesh_spec_fine, u):
    """Average a factor-2 refined field onto the coarse grid."""
    u = np.atleast_2d(u)
    ms = mesh_spec_fine
    if ms.n1 % 2 or ms.n2 % 2 or (ms.dim == 2 and ms.ny % 2):
        raise InvalidParameterError("restriction needs even cell counts")
    if ms.dim == 1:
        return 0.5 * (u[:, 0::2] + u[:, 1::2])
    ny = ms.ny
    blocks, off = [], 0
    for nx in (ms.n1, ms.n2):
        b = u[:, off:off + nx * ny].reshape(u.shape[0], ny // 2, 2, nx // 2, 2)
        blocks.append(b.mean(axis=(2, 4)).reshape(u.shape[0], -1))
        off += nx * ny
    return np.concatenate(blocks, axis=1)


def _orders(errors, ratios):
    e = np.asarray(errors, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(e[:-1] / e[1:]) / np.log(np.asarray(ratios, dtype=float))


# -- campaigns ----------------------------------------------------------------

def regularization_sweep(config, n_values):
    """Run ``config`` at each regularisation level and report
    ``d_k = ||u^{n_{k+1}} - u^{n_k}||_{L1(Q_T)}`` per species.

    Passes when ``d_k`` is strictly decreasing for every species, or when all
    ``d_k`` vanish (regularisation inactive).
    """
    n_values = list(n_values)
    if len(n_values) < 3 or any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise InsufficientDataError("need at least 3 strictly increasing levels")
    trajs = []
    for n in n_values:
        res = simulate(replace(config, regularization=int(n)))
        if not res.ok:
            raise InvalidParameterError(f"run at n={n} failed: {res.error}")
        trajs.append(res.trajectory)
    m = config.m
    table = Table("regularization_sweep",
                  ["n_k", "n_k1"] + [f"d_{i + 1}" for i in range(m)] + ["d_total"])
    d = []
    for (n0, t0), (n1, t1) in zip(zip(n_values, trajs), zip(n_values[1:], trajs[1:])):
        dk = space_time_l1(t1, t0)
        d.append(dk)
        table.add(int(n0), int(n1), *[float(x) for x in dk], float(dk.sum()))
    d = np.array(d)
    checks = []
    if np.all(d == 0):
        checks.append(Check("regularization sweep", True, "all d_k = 0 (regularisation inactive)"))
    else:
        bad = [(k, i) for i in range(m) for k in range(len(d) - 1) if not d[k + 1, i] < d[k, i]]
        detail = ", ".join(f"{x:.6e}" for x in d.sum(axis=1))
        if bad:
            k, i = bad[0]
            detail += (f"; species {i + 1}: d({n_values[k + 1]},{n_values[k + 2]})="
                       f"{d[k + 1, i]:.6e} >= d({n_values[k]},{n_values[k + 1]})={d[k, i]:.6e}")
        checks.append(Check("d_k strictly decreasing", not bad, detail))
    return Campaign("regularization_sweep", [table], checks), d


def steady_study(n_values=(4, 16, 64, 256), length1=1.0, length2=1.0, D=(1.0, 1.0), k=1.0,
                 a=1.0, c=0.0, tol=1e-10):
    """Steady fixture at several resolutions against the closed form."""
    table = Table("steady", ["n_cells", "flux", "jump", "max_error", "flux_error", "jump_error"])
    checks = []
    for n in n_values:
        mesh = build_interval_mesh(length1, length2, n // 2, n // 2)
        u, op = steady_state(mesh, D, k, a, c)
        exact = steady_profile(mesh, D, k, a, c)
        J, jump = membrane_flux_and_jump(op, u)
        err = float(np.max(np.abs(u - exact(mesh.centers[:, 0]))))
        row = (n, J, jump, err, abs(J - exact.flux), abs(jump - exact.jump))
        table.add(*row)
        ok = max(row[3:]) <= tol
        checks.append(Check(f"steady exact n={n}", ok,
                            f"J={J:.15f} (exact {exact.flux:.15f}), jump={jump:.15f}, "
                            f"max|u-u_exact|={err:.2e} <= {tol:g}"))
    return Campaign("steady", [table], checks)


def refinement_study(config, levels=4, min_order=0.8):
    """Simultaneous ``(h, dt)`` halving; successive-difference L1 orders of
    the final state (self-convergence, fine solutions restricted to the
    coarse grid)."""
    if levels < 3:
        raise InsufficientDataError("need at least 3 refinement levels")
    finals, specs = [], []
    for lvl in range(levels):
        cfg = replace(config, mesh=config.mesh.refined(2 ** lvl), dt=config.dt / 2 ** lvl)
        res = simulate(cfg, keep_trajectory=False)
        if not res.ok:
            raise InvalidParameterError(f"level {lvl} failed: {res.error}")
        finals.append((res.state.u, res.mesh))
        specs.append(cfg.mesh)
    errs = []
    for lvl in range(levels - 1):
        coarse, mesh = finals[lvl]
        fine = restrict(specs[lvl + 1], finals[lvl + 1][0])
        errs.append(float(np.sum(np.abs(fine - coarse) @ mesh.volumes)))
    orders = _orders(errs, [2.0] * (len(errs) - 1))
    table = Table("refinement", ["level", "n_cells", "dt", "l1_difference", "order"])
    for lvl, e in enumerate(errs):
        table.add(lvl, finals[lvl][1].n_cells, config.dt / 2 ** lvl, e,
                  float(orders[lvl - 1]) if lvl else float("nan"))
    ok = bool(np.all(orders >= min_order))
    check = Check("transient self-convergence order", ok,
                  f"orders {', '.join(f'{o:.3f}' for o in orders)} >= {min_order}")
    return Campaign("refinement", [table], [check]), orders


def dt_study(config, dt_values, min_order=0.8):
    """Refine ``dt`` on a frozen mesh; self-convergence order in time."""
    dt_values = sorted(dt_values, reverse=True)
    if len(dt_values) < 3:
        raise InsufficientDataError("need at least 3 time steps")
    finals = []
    for dt in dt_values:
        res = simulate(replace(config, dt=dt), keep_trajectory=False)
        if not res.ok:
            raise InvalidParameterError(f"dt={dt} failed: {res.error}")
        finals.append(res.state.u)
    vol = res.mesh.volumes
    errs = [float(np.sum(np.abs(b - a) @ vol)) for a, b in zip(finals, finals[1:])]
    orders = _orders(errs, [dt_values[i] / dt_values[i + 1] for i in range(1, len(errs))])
    table = Table("dt_refinement", ["dt", "l1_difference", "order"])
    for i, e in enumerate(errs):
        table.add(dt_values[i], e, float(orders[i - 1]) if i else float("nan"))
    ok = bool(np.all(orders >= min_order))
    return Campaign("dt_refinement", [table],
                    [Check("time order", ok, f"orders {', '.join(f'{o:.3f}' for o in orders)}")]), orders


def mesh_study(config, factors, min_order=0.8):
    """Refine the mesh only (factor-2 steps) at fixed ``dt``."""
    factors = sorted(int(f) for f in factors)
    if len(factors) < 3 or any(b != 2 * a for a, b in zip(factors, factors[1:])):
        raise InsufficientDataError("need at least 3 successive doublings, e.g. 1,2,4")
    finals, specs = [], []
    for f in factors:
        cfg = replace(config, mesh=config.mesh.refined(f))
        res = simulate(cfg, keep_trajectory=False)
        if not res.ok:
            raise InvalidParameterError(f"factor {f} failed: {res.error}")
        finals.append((res.state.u, res.mesh))
        specs.append(cfg.mesh)
    errs = [float(np.sum(np.abs(restrict(specs[i + 1], finals[i + 1][0]) - finals[i][0])
                         @ finals[i][1].volumes)) for i in range(len(factors) - 1)]
    orders = _orders(errs, [2.0] * (len(errs) - 1))
    table = Table("mesh_refinement", ["factor", "n_cells", "l1_difference", "order"])
    for i, e in enumerate(errs):
        table.add(factors[i], finals[i][1].n_cells, e, float(orders[i - 1]) if i else float("nan"))
    ok = bool(np.all(orders >= min_order))
    return Campaign("mesh_refinement", [table],
                    [Check("space order", ok, f"orders {', '.join(f'{o:.3f}' for o in orders)}")]), orders


def poincare_study(n_values=(64, 128, 256), k_values=(0.1, 1.0, 10.0), length1=1.0, length2=2.0,
                   rtol=0.05):
    """``C_P`` on 1D meshes with ``n`` cells per unit length for each ``k``.

    The default geometry is asymmetric: on a mirror-symmetric interval the
    ground state has no jump across the membrane and ``C_P`` does not depend
    on ``k``.
    """
    if len(n_values) < 3:
        raise InsufficientDataError("need at least 3 refinement levels")
    table = Table("poincare", ["n", "k", "C_P"])
    cp = {}
    for n in n_values:
        mesh = build_interval_mesh(length1, length2, int(n * length1), int(n * length2))
        for k in k_values:
            cp[n, k] = poincare_constant(assemble(mesh, 1.0, k))
            table.add(int(n), float(k), cp[n, k])
    n1, n2 = n_values[-2], n_values[-1]
    checks = []
    for k in k_values:
        change = abs(cp[n2, k] - cp[n1, k]) / cp[n1, k]
        checks.append(Check(f"C_P refinement k={k:g}", change < rtol,
                            f"|C_P({n2}) - C_P({n1})|/C_P({n1}) = {change:.2e} < {rtol}"))
    for n in n_values:
        vals = [cp[n, k] for k in k_values]
        ok = all(b < a for a, b in zip(vals, vals[1:]))
        checks.append(Check(f"C_P decreasing in k (n={n})", ok,
                            ", ".join(f"k={k:g}: {v:.6f}" for k, v in zip(k_values, vals))))
    return Campaign("poincare", [table], checks), cp


def a_priori_study(configs, rtol=0.10):
    """Final values of the optional a priori monitors over a refinement
    family; passes when successive values differ by at most ``rtol``."""
    keys = ("weighted_grad", "lbeta_grad", "lbeta_trace")
    table = Table("a_priori", ["n_cells"] + list(keys))
    vals = []
    for cfg in configs:
        res = simulate(cfg, keep_trajectory=False)
        if not res.ok:
            raise InvalidParameterError(f"run failed: {res.error}")
        ex = res.records[-1].extras
        row = [ex.get(k, float("nan")) for k in keys]
        vals.append(row)
        table.add(res.mesh.n_cells, *row)
    vals = np.array(vals)
    checks = []
    for j, key in enumerate(keys):
        col = vals[:, j]
        if np.all(np.isnan(col)):
            continue
        rel = np.abs(np.diff(col)) / np.abs(col[:-1])
        checks.append(Check(f"{key} stable", bool(np.all(rel <= rtol)),
                            f"values {', '.join(f'{v:.6e}' for v in col)}; max rel change "
                            f"{rel.max():.3e} <= {rtol}"))
    return Campaign("a_priori", [table], checks), vals


def k_sweep(config, k_values):
    """Run with every species permeability set to each ``k``."""
    k_values = sorted(float(k) for k in k_values)
    table = Table("k_sweep", ["k", "total_mass_T", "jump_L2_T", "dual_norm_U_T", "C_P"])
    mesh = config.mesh.build()
    checks = []
    cps = []
    for k in k_values:
        cfg = replace(config, species=tuple(replace(s, k=k) for s in config.species))
        res = simulate(cfg, keep_trajectory=False)
        if not res.ok:
            checks.append(Check(f"run k={k:g}", False, res.error))
            continue
        rec = res.records[-1]
        cp = poincare_constant(assemble(mesh, 1.0, k)) if mesh.dim == 1 else float("nan")
        cps.append(cp)
        table.add(k, rec.total_mass, rec.jump_l2, rec.dual_norm_U, cp)
    if mesh.dim == 1 and len(cps) == len(k_values):
        ok = all(b <= a * (1 + 1e-9) for a, b in zip(cps, cps[1:]))
        checks.append(Check("C_P nonincreasing in k", ok, ", ".join(f"{c:.6f}" for c in cps)))
    return Campaign("k_sweep", [table], checks)


# -- named checks used by the verification suites -----------------------------

def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def check_steady():
    camp, sec = _timed(lambda: steady_study(n_values=(4, 16, 64, 256)))
    return camp.checks + [
        Check("steady runtime", sec < 1.0, f"{sec:.3f} s < 1 s")]


def check_dual_norm_oracle(n_trials=20, seed=0, rtol=1e-8):
    mesh = build_interval_mesh(1.0, 1.0, 32, 32)
    op = assemble(mesh, 1.0, 1.0)
    A = op.matrix.toarray()
    M = np.diag(op.mass)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_trials):
        f = rng.standard_normal(mesh.n_cells)
        exact = math.sqrt(f @ M @ np.linalg.solve(A, M @ f))
        worst = max(worst, abs(dual_norm(op, f) - exact) / exact)
    return [Check("dual norm vs dense solve", worst <= rtol, f"max rel error {worst:.2e} <= {rtol}")]


def check_operator_structure():
    checks = []
    for mesh in (build_interval_mesh(1.0, 2.0, 8, 16), build_rect_mesh(1.0, 1.0, 1.0, 4, 4, 4)):
        op = assemble(mesh, 1.0, 1.0)
        A = op.matrix.toarray()
        asym = float(np.max(np.abs(A - A.T)))
        lam = float(np.linalg.eigvalsh(A).min())
        checks.append(Check(f"operator symmetric/SPD dim={mesh.dim}", asym == 0 and lam > 0,
                            f"max|A-A^T|={asym:g}, lambda_min={lam:.3e}"))
        rng = np.random.default_rng(1)
        v, w = rng.standard_normal((2, mesh.n_cells))
        cs = abs(bilinear_form(op, v, w)) <= math.sqrt(bilinear_form(op, v, v) * bilinear_form(op, w, w))
        checks.append(Check(f"energy Cauchy-Schwarz dim={mesh.dim}", cs, ""))
        g = solve_poisson(op, np.ones(mesh.n_cells)).solution
        checks.append(Check(f"G >= 0 dim={mesh.dim}", bool(g.min() >= 0), f"min G = {g.min():.3e}"))
    return checks


def check_poincare():
    camp, _ = poincare_study()
    mesh = build_interval_mesh(1.0, 1.0, 64, 64)
    cp = poincare_constant(assemble(mesh, 1.0, 1e8))
    ref = (2.0 / np.pi) ** 2
    return camp.checks + [Check("C_P transparent membrane", abs(cp - ref) / ref < 0.05,
                                f"C_P={cp:.6f} vs (L/pi)^2={ref:.6f}")]


def check_truncation_object(n_grid=10_000):
    checks = []
    for b in (4.0, 10.0, 100.0):
        tr = make_truncation(b)
        s = np.linspace(0.0, b + 5.0, n_grid)
        d1, d2 = tr.d1(s), tr.d2(s)
        ident = s <= b - 2
        plateau = s >= b
        ok = (d1.min() >= 0 and d1.max() <= 1 and d2.min() >= -1 and d2.max() <= 0
              and np.allclose(tr(s[ident]), s[ident], rtol=0, atol=1e-12)
              and np.all(d1[plateau] == 0) and np.ptp(tr(s[plateau])) <= 1e-12)
        # C^2: second derivative continuous across the layer edges
        eps = 1e-7
        jumps = max(abs(float(tr.d2(x + eps) - tr.d2(x - eps))) for x in (b - 2, b))
        ok = ok and jumps < 1e-6
        checks.append(Check(f"T_b invariants b={b:g}", bool(ok),
                            f"T'' in [{d2.min():.4f}, {d2.max():.4f}], T'' jump {jumps:.1e}"))
    return checks


def check_hypothesis_suite(samples=100_000, M=10.0):
    checks = []
    for sys_ in (builtin_annihilation(), builtin_transport_demo(TRANSPORT_RATES)):
        rep = check_hypotheses(sys_, M, samples)
        checks.append(Check(f"hypotheses {sys_.label}", rep.passed, rep.summary()))
    rep = check_hypotheses(builtin_constant_loss(), M, samples)
    checks.append(Check("constant loss rejected on quasi-positivity",
                        not rep.quasi_positive and not rep.passed,
                        f"min f_i on u_i=0: {rep.min_boundary_value:g}"))
    return checks


def check_standard_run(n_cells=128):
    """Key estimate, positivity, mass decay, flux continuity and truncation
    energy on the standard annihilation run."""
    cfg = standard_annihilation(n_cells)
    res, sec = _timed(lambda: simulate(cfg))
    if not res.ok:
        return [Check("standard run", False, res.error)]
    traj = res.trajectory
    key = key_estimate_check(traj, slack=0.05)
    checks = [Check("key estimate E(t) bound", key.passed_energy, key.lines()[0]),
              Check("key estimate space-time L2 <= C3", key.passed_l2, key.lines()[1]),
              Check("standard run runtime", sec < 30, f"{sec:.2f} s < 30 s")]
    min_u = float(traj.fields.min())
    checks.append(Check("nonnegativity", min_u >= -1e-12, f"min u = {min_u:.3e} >= -1e-12"))
    mass = np.concatenate([[traj.fields[0].sum(axis=0) @ res.mesh.volumes],
                           [r.total_mass for r in res.records]])
    inc = float(np.max(np.diff(mass)))
    checks.append(Check("total mass nonincreasing", inc <= 1e-14 * mass[0],
                        f"max step increase {inc:.3e}"))
    checks.append(Check("per-side mass budgets balance", res.state.budget_max <= 1e-12,
                        f"max residual {res.state.budget_max:.3e} <= 1e-12"))
    for b in (4.0, 8.0, 16.0):
        rep = truncation_energy_check(traj, b, species=0, slack=0.10)
        checks.append(Check(f"truncation energy b={b:g}", rep.passed, rep.line()))
    return checks


def check_dissipation(n_cells=64):
    """With ``f = 0`` and ``C = 0`` the dual norm of the total never grows."""
    cfg = SimConfig(mesh=MeshSpec(n1=n_cells // 2, n2=n_cells // 2),
                    species=(SpeciesSpec(D=1.0, initial=spike(0.5, 0.1, 1.0)),
                             SpeciesSpec(D=2.0, initial={"type": "rough", "seed": 3})),
                    t_end=0.2, dt=1e-3)
    res = simulate(cfg)
    rep = key_estimate_check(res.trajectory, C=0.0, slack=0.0)
    inc = float(np.max(np.diff(rep.dual)))
    return [Check("dual norm nonincreasing (f=0)", inc <= 1e-12, f"max step increase {inc:.3e}")]


def check_distinct_k_refused():
    cfg = SimConfig(species=(SpeciesSpec(k=1.0, initial={"type": "sine"}),
                             SpeciesSpec(k=2.0, initial={"type": "sine"})),
                    mesh=MeshSpec(n1=8, n2=8), t_end=0.01, dt=1e-3)
    res = simulate(cfg)
    try:
        key_estimate_check(res.trajectory)
    except OpenProblemError as e:
        return [Check("distinct k refused by key estimate", res.ok, str(e))]
    return [Check("distinct k refused by key estimate", False, "no error raised")]


def check_translation(shifts=(1, 2, 4, 10)):
    res = simulate(rough_heat())
    rep = time_translation_modulus(res.trajectory, shifts)
    return [Check("time-translation exponent", rep.passed,
                  f"slope {rep.slope:.3f} >= {rep.floor} over h = {rep.h[0]:g}..{rep.h[-1]:g}")]


def check_refinement():
    camp, orders = refinement_study(transient_heat(), levels=5, min_order=0.9)
    steady = steady_study(n_values=(4, 8, 16, 32, 64))
    dt_camp, _ = dt_study(transient_heat(n_cells=64), [0.01 / 2 ** j for j in range(5)], 0.9)
    return camp.checks + dt_camp.checks + [
        Check("steady exact at all levels", steady.passed,
              f"max error {max(steady.tables[0].column('max_error')):.2e}")]


def check_regularization():
    camp, _ = regularization_sweep(tall_spike(), [1, 4, 16, 64])
    return camp.checks


def check_a_priori():
    c1, _ = a_priori_study([apriori_1d(n) for n in (64, 128, 256)])
    c2, _ = a_priori_study([apriori_2d(ny) for ny in (16, 32, 64)])
    return ([replace(c, name=f"1D {c.name}") for c in c1.checks if c.name.startswith("weighted")]
            + [replace(c, name=f"2D {c.name}") for c in c2.checks])


SUITE_CHECKS = {
    "elliptic": (check_operator_structure, check_dual_norm_oracle, check_poincare, check_steady),
    "reactions": (check_truncation_object, check_hypothesis_suite),
    "parabolic": (check_standard_run, check_refinement),
    "monitors": (check_dissipation, check_distinct_k_refused, check_translation),
    "campaigns": (check_regularization, check_a_priori),
}


def verify_suite(name):
    """Run a named suite (or ``all``) and return its checks."""
    names = SUITES if name == "all" else (name,)
    for n in names:
        if n not in SUITE_CHECKS:
            raise InvalidParameterError(f"unknown suite {n!r}; available: all, {', '.join(SUITES)}")
    checks = []
    for n in names:
        for fn in SUITE_CHECKS[n]:
            checks.extend(fn())
    return Campaign(f"verify-{name}", [], checks)
