"""Time integration of the membrane reaction-diffusion system.

Each species solves ``(M + dt A_i) u_i^new = M (u_i + dt f_i(u))``: implicit
diffusion with the membrane coupling inside ``A_i`` and an explicit
(optionally regularised) reaction. A step is split into dyadic substeps
whenever the explicit predictor would go negative.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction

import numpy as np

from .elliptic import assemble
from .errors import (ConfigError, InvalidGeometryError, InvalidParameterError,
                     KKMembraneError, PositivityError)
from .mesh import build_interval_mesh, build_rect_mesh, membrane_traces
from .monitors import KeyEstimateState, StreamingMonitors, make_record
from .reactions import REACTIONS, make_reaction, mollify_initial, regularize

INITIAL_TYPES = ("zero", "constant", "box", "spike", "sine", "rough", "indicator")


# -- configuration ------------------------------------------------------------

@dataclass(frozen=True)
class MeshSpec:
    dim: int = 1
    length1: float = 1.0
    length2: float = 1.0
    n1: int = 64
    n2: int = 64
    height: float = 1.0
    ny: int = 16

    def build(self):
        if self.dim == 1:
            return build_interval_mesh(self.length1, self.length2, self.n1, self.n2)
        if self.dim == 2:
            return build_rect_mesh(self.length1, self.length2, self.height, self.n1, self.n2, self.ny)
        raise InvalidGeometryError(f"dim must be 1 or 2, got {self.dim}")

    def refined(self, factor):
        """Same geometry with every cell count multiplied by ``factor``."""
        return replace(self, n1=self.n1 * factor, n2=self.n2 * factor, ny=self.ny * factor)


@dataclass(frozen=True)
class SpeciesSpec:
    D: float = 1.0
    k: float = 1.0
    initial: dict = field(default_factory=lambda: {"type": "zero"})


@dataclass(frozen=True)
class MonitorSpec:
    key_estimate: bool = False
    truncation_levels: tuple = ()
    truncation_species: int = 0
    weighted_gradient_alpha: float | None = None
    lbeta: float | None = None
    apriori_species: int = 0
    flux_balance: bool = True


@dataclass(frozen=True)
class SimConfig:
    """Everything that determines a run."""

    mesh: MeshSpec = field(default_factory=MeshSpec)
    species: tuple = (SpeciesSpec(),)
    reaction: str = "zero"
    reaction_params: dict = field(default_factory=dict)
    regularization: int | None = None
    regularize_initial: bool = False
    t_end: float = 1.0
    dt: float = 1e-3
    monitors: MonitorSpec = field(default_factory=MonitorSpec)
    mass_control_C: float | None = None
    boundary_values: tuple | None = None
    positivity_tol: float = 1e-12
    min_dt: float = 1e-12

    def __post_init__(self):
        self.validate()

    @property
    def m(self):
        return len(self.species)

    @property
    def n_steps(self):
        return max(1, math.ceil(self.t_end / self.dt - 1e-9))

    def outer_time(self, step):
        return self.t_end if step >= self.n_steps else step * self.dt

    @property
    def equal_k(self):
        return len({s.k for s in self.species}) == 1

    def validate(self):
        def bad(msg, *path):
            raise ConfigError(msg, path)

        if not self.species:
            bad("at least one species is required", "species")
        for i, s in enumerate(self.species):
            for name in ("D", "k"):
                v = getattr(s, name)
                if not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                    bad(f"species[{i}].{name} must be a positive number, got {v!r}", "species", i, name)
            kind = s.initial.get("type", "zero") if isinstance(s.initial, dict) else None
            if kind not in INITIAL_TYPES:
                bad(f"species[{i}].initial.type must be one of {', '.join(INITIAL_TYPES)}",
                    "species", i, "initial")
        if not self.dt > 0:
            bad(f"dt must be positive, got {self.dt}", "dt")
        if not self.t_end >= self.dt:
            bad(f"t_end must be >= dt, got t_end={self.t_end}, dt={self.dt}", "t_end")
        if self.reaction not in REACTIONS:
            bad(f"unknown reaction {self.reaction!r}; available: {', '.join(sorted(REACTIONS))}",
                "reaction")
        if self.regularization is not None and (int(self.regularization) != self.regularization
                                                or self.regularization < 1):
            bad("regularization must be null or an integer >= 1", "regularization")
        if self.monitors.key_estimate and not self.equal_k:
            bad("the key-estimate monitor needs equal permeabilities k_1 = ... = k_m "
                "(distinct k_i is an open problem)", "monitors", "key_estimate")
        mon = self.monitors
        for name in ("truncation_species", "apriori_species"):
            if not 0 <= getattr(mon, name) < self.m:
                bad(f"monitors.{name} out of range", "monitors", name)
        if any(b <= 0 for b in mon.truncation_levels):
            bad("truncation levels must be positive", "monitors", "truncation_levels")
        a = mon.weighted_gradient_alpha
        if a is not None and not 0 <= a < 0.5:
            bad("weighted_gradient_alpha must lie in [0, 1/2)", "monitors", "weighted_gradient_alpha")
        if mon.lbeta is not None and mon.lbeta < 1:
            bad("lbeta must be >= 1", "monitors", "lbeta")
        if self.mass_control_C is not None and self.mass_control_C < 0:
            bad("mass_control_C must be nonnegative", "mass_control_C")
        if self.boundary_values is not None:
            if len(self.boundary_values) != 2 or min(self.boundary_values) < 0:
                bad("boundary_values must be two nonnegative numbers", "boundary_values")
        if not self.positivity_tol >= 0 or not self.min_dt > 0:
            bad("tolerances must be nonnegative (min_dt positive)", "tolerances")

    def build_reaction(self):
        try:
            r = make_reaction(self.reaction, self.reaction_params, m=self.m)
        except TypeError as e:
            raise ConfigError(f"bad parameters for reaction {self.reaction!r}: {e}",
                              ("reaction", "params"))
        if r.m != self.m:
            raise ConfigError(f"reaction {self.reaction!r} has {r.m} species, config has {self.m}",
                              ("species",))
        return regularize(r, self.regularization) if self.regularization else r

    def to_dict(self):
        d = asdict(self)
        d["species"] = [asdict(s) for s in self.species]
        d["monitors"]["truncation_levels"] = list(self.monitors.truncation_levels)
        tol = {"positivity": d.pop("positivity_tol"), "min_dt": d.pop("min_dt")}
        d["reaction"] = {"label": d.pop("reaction"), "params": d.pop("reaction_params")}
        d["tolerances"] = tol
        if self.boundary_values is not None:
            d["boundary_values"] = list(self.boundary_values)
        return d

    @classmethod
    def from_dict(cls, data):
        return config_from_dict(data)


_TOP_KEYS = ("mesh", "species", "reaction", "regularization", "regularize_initial", "t_end", "dt",
             "monitors", "mass_control_C", "boundary_values", "tolerances")


def _typed(value, kind, path):
    name = path[-1]
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be true or false", path)
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer, got {value!r}", path)
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number, got {value!r}", path)
        return float(value)
    return value


def _section(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(f"{path[-1]} must be an object", path)
    kinds = {"dim": int, "n1": int, "n2": int, "ny": int, "length1": float, "length2": float,
             "height": float, "key_estimate": bool, "truncation_species": int,
             "apriori_species": int, "flux_balance": bool}
    fields_ = cls.__dataclass_fields__
    out = {}
    for key, value in data.items():
        if key not in fields_:
            raise ConfigError(f"unknown key {key!r} in {path[-1]}; allowed: {', '.join(fields_)}",
                              path + (key,))
        p = path + (key,)
        if key == "truncation_levels":
            if not isinstance(value, list):
                raise ConfigError("truncation_levels must be a list", p)
            value = tuple(_typed(v, float, p) for v in value)
        elif key in ("weighted_gradient_alpha", "lbeta"):
            value = None if value is None else _typed(value, float, p)
        else:
            value = _typed(value, kinds.get(key), p)
        out[key] = value
    return cls(**out)


def config_from_dict(data):
    """Build a validated :class:`SimConfig` from a JSON-like tree.

    Raises ConfigError whose ``path`` names the offending key.
    """
    if not isinstance(data, dict):
        raise ConfigError("configuration must be an object")
    for key in data:
        if key not in _TOP_KEYS:
            raise ConfigError(f"unknown key {key!r}; allowed: {', '.join(_TOP_KEYS)}", (key,))
    kw = {}
    if "mesh" in data:
        kw["mesh"] = _section(MeshSpec, data["mesh"], ("mesh",))
    if "monitors" in data:
        kw["monitors"] = _section(MonitorSpec, data["monitors"], ("monitors",))
    if "species" not in data:
        raise ConfigError("missing required key 'species'", ())
    sp = data["species"]
    if not isinstance(sp, list) or not sp:
        raise ConfigError("species must be a nonempty list", ("species",))
    species = []
    for i, s in enumerate(sp):
        p = ("species", i)
        if not isinstance(s, dict):
            raise ConfigError(f"species[{i}] must be an object", p)
        for key in s:
            if key not in ("D", "k", "initial"):
                raise ConfigError(f"unknown key {key!r} in species[{i}]", p + (key,))
        init = s.get("initial", {"type": "zero"})
        if not isinstance(init, dict):
            raise ConfigError(f"species[{i}].initial must be an object", p + ("initial",))
        species.append(SpeciesSpec(D=_typed(s.get("D", 1.0), float, p + ("D",)),
                                   k=_typed(s.get("k", 1.0), float, p + ("k",)), initial=init))
    kw["species"] = tuple(species)
    if "reaction" in data:
        r = data["reaction"]
        if isinstance(r, str):
            kw["reaction"] = r
        elif isinstance(r, dict):
            if "label" not in r:
                raise ConfigError("reaction.label is required", ("reaction",))
            kw["reaction"] = r["label"]
            kw["reaction_params"] = dict(r.get("params", {}))
        else:
            raise ConfigError("reaction must be a label or an object", ("reaction",))
    for key, kind in (("t_end", float), ("dt", float), ("regularize_initial", bool)):
        if key in data:
            kw[key] = _typed(data[key], kind, (key,))
    for key in ("regularization", "mass_control_C"):
        if data.get(key) is not None:
            kw[key] = _typed(data[key], int if key == "regularization" else float, (key,))
    if data.get("boundary_values") is not None:
        bv = data["boundary_values"]
        if not isinstance(bv, list):
            raise ConfigError("boundary_values must be a list [a, c]", ("boundary_values",))
        kw["boundary_values"] = tuple(_typed(v, float, ("boundary_values",)) for v in bv)
    tol = data.get("tolerances", {})
    if not isinstance(tol, dict):
        raise ConfigError("tolerances must be an object", ("tolerances",))
    for key in tol:
        if key not in ("positivity", "min_dt"):
            raise ConfigError(f"unknown key {key!r} in tolerances", ("tolerances", key))
    if "positivity" in tol:
        kw["positivity_tol"] = _typed(tol["positivity"], float, ("tolerances", "positivity"))
    if "min_dt" in tol:
        kw["min_dt"] = _typed(tol["min_dt"], float, ("tolerances", "min_dt"))
    cfg = SimConfig(**kw)
    if "reaction" in data:
        try:
            cfg.build_reaction()
        except InvalidParameterError as e:
            raise ConfigError(str(e), ("reaction",))
    return cfg


# -- initial data -------------------------------------------------------------

def _cell_bounds(mesh):
    """Lower/upper corners of every cell, shape ``(N, dim)`` each."""
    if mesh.dim == 1:
        w = mesh.volumes[:, None]
    else:
        dy = mesh.lengths[2] / mesh.shape[2]
        w = np.stack([mesh.volumes / dy, np.full(mesh.n_cells, dy)], axis=1)
    return mesh.centers - w / 2, mesh.centers + w / 2


def _box_average(mesh, lo, hi):
    """Fraction of each cell covered by the box ``[lo, hi]``."""
    clo, chi = _cell_bounds(mesh)
    lo = np.broadcast_to(np.atleast_1d(np.asarray(lo, float)), (mesh.dim,))
    hi = np.broadcast_to(np.atleast_1d(np.asarray(hi, float)), (mesh.dim,))
    if np.any(hi <= lo):
        raise InvalidParameterError("box needs hi > lo")
    overlap = np.clip(np.minimum(chi, hi) - np.maximum(clo, lo), 0.0, None)
    return np.prod(overlap / (chi - clo), axis=1)


def initial_field(mesh, spec):
    """Cell values for one species from an initial-data description.

    Types: ``zero``; ``constant`` (value); ``box`` (lo, hi, value) with exact
    cell-overlap averaging; ``spike`` (center, width, mass), a box of the
    given mass; ``sine`` (amplitude), a product of sines vanishing on the
    outer boundary; ``rough`` (mean, seed), i.i.d. uniform on ``[0, 2 mean]``;
    ``indicator`` (side, value).
    """
    kind = spec.get("type", "zero")
    n = mesh.n_cells
    if kind == "zero":
        return np.zeros(n)
    if kind == "constant":
        return np.full(n, float(spec.get("value", 1.0)))
    if kind == "box":
        return float(spec.get("value", 1.0)) * _box_average(mesh, spec["lo"], spec["hi"])
    if kind == "spike":
        c = np.atleast_1d(np.asarray(spec.get("center", mesh.lengths[0] / 2), float))
        w = float(spec.get("width", 0.05))
        c = np.broadcast_to(c, (mesh.dim,))
        height = float(spec.get("mass", 1.0)) / w ** mesh.dim
        return height * _box_average(mesh, c - w / 2, c + w / 2)
    if kind == "sine":
        L = mesh.lengths[0] + mesh.lengths[1]
        u = np.sin(np.pi * mesh.centers[:, 0] / L)
        if mesh.dim == 2:
            u = u * np.sin(np.pi * mesh.centers[:, 1] / mesh.lengths[2])
        return float(spec.get("amplitude", 1.0)) * u
    if kind == "rough":
        rng = np.random.default_rng(int(spec.get("seed", 0)))
        return rng.uniform(0.0, 2.0 * float(spec.get("mean", 1.0)), n)
    if kind == "indicator":
        return float(spec.get("value", 1.0)) * (mesh.subdomain == int(spec.get("side", 2)))
    raise InvalidParameterError(f"unknown initial type {kind!r}; available: {', '.join(INITIAL_TYPES)}")


def initial_state(config, mesh):
    u = np.stack([initial_field(mesh, s.initial) for s in config.species])
    if np.any(u < 0):
        raise InvalidParameterError("initial data must be nonnegative")
    if config.regularization and config.regularize_initial:
        u = np.stack([mollify_initial(ui, config.regularization, mesh) for ui in u])
    return u


# -- state and trajectory -----------------------------------------------------

@dataclass(frozen=True)
class Substep:
    dt: float
    t: float
    u: np.ndarray
    f: np.ndarray
    budget_residual: float


@dataclass(frozen=True)
class SimState:
    """Time, fields ``u`` of shape ``(m, N)``, outer step index and running
    space-time integrals (right-endpoint rule)."""

    t: float
    step: int
    u: np.ndarray
    int_u2: np.ndarray
    int_abs_f: np.ndarray
    int_f: np.ndarray
    min_value: float
    budget_max: float = 0.0
    n_substeps: int = 0
    substeps: tuple = ()

    @classmethod
    def initial(cls, u0):
        m = u0.shape[0]
        z = np.zeros(m)
        return cls(t=0.0, step=0, u=u0, int_u2=z, int_abs_f=z.copy(), int_f=z.copy(),
                   min_value=float(u0.min()))


@dataclass
class Trajectory:
    """Stored snapshots at every (sub)step.

    ``fields[j]`` is the state at ``times[j]``; ``sources[j]`` is the reaction
    applied over ``(times[j], times[j+1])``; ``outer[j]`` marks snapshots at
    outer step boundaries.
    """

    mesh: object
    operators: list
    times: np.ndarray
    fields: np.ndarray
    sources: np.ndarray
    outer: np.ndarray
    mass_control_C: float = 0.0

    @classmethod
    def from_fields(cls, mesh, operators, times, fields, sources=None, mass_control_C=0.0):
        fields = np.asarray(fields, dtype=float)
        if fields.ndim == 2:
            fields = fields[:, None, :]
        times = np.asarray(times, dtype=float)
        if sources is None:
            sources = np.zeros((fields.shape[0] - 1,) + fields.shape[1:])
        return cls(mesh=mesh, operators=list(operators), times=times, fields=fields,
                   sources=np.asarray(sources, dtype=float), outer=np.ones(times.size, bool),
                   mass_control_C=mass_control_C)

    @property
    def outer_fields(self):
        return self.fields[self.outer]

    @property
    def outer_times(self):
        return self.times[self.outer]


class _TrajectoryBuilder:
    def __init__(self, u0):
        self.times, self.fields, self.sources, self.outer = [0.0], [u0], [], [True]

    def add(self, sub, is_outer):
        self.times.append(sub.t)
        self.fields.append(sub.u)
        self.sources.append(sub.f)
        self.outer.append(is_outer)

    def build(self, mesh, operators, C):
        m, n = self.fields[0].shape
        src = np.array(self.sources) if self.sources else np.zeros((0, m, n))
        return Trajectory(mesh=mesh, operators=list(operators), times=np.array(self.times),
                          fields=np.array(self.fields), sources=src, outer=np.array(self.outer),
                          mass_control_C=C)


# -- stepping -----------------------------------------------------------------

def boundary_lift(operators, values):
    """Integrated source ``(m, N)`` that imposes Dirichlet values ``(a, c)``
    on the side-1 and side-2 walls; ``None`` for homogeneous walls."""
    if values is None:
        return None
    mesh = operators[0].mesh
    g = np.where(mesh.wall_side == 1, values[0], values[1])
    return np.stack([np.bincount(mesh.wall_cell, op.wall_conductance * g, minlength=mesh.n_cells)
                     for op in operators])


def budget_residual(mesh, operators, h, u_old, u_new, f, lift=None):
    """Largest per-species, per-side mass-budget imbalance over one substep.

    For side 1: change of mass - reaction input + wall outflow + membrane
    outflow; for side 2 the membrane term enters with the opposite sign.
    """
    mem = mesh.membrane_faces
    a, b = mesh.face_cells[mem, 0], mesh.face_cells[mem, 1]
    side = mesh.subdomain
    worst = 0.0
    for i, op in enumerate(operators):
        dm = mesh.volumes * (u_new[i] - u_old[i] - h * f[i])
        if lift is not None:
            dm = dm - h * lift[i]
        wall = h * op.wall_conductance * u_new[i, mesh.wall_cell]
        across = h * float(op.membrane_conductance @ (u_new[i, a] - u_new[i, b]))
        for lam, sign in ((1, 1.0), (2, -1.0)):
            r = dm[side == lam].sum() + wall[mesh.wall_side == lam].sum() + sign * across
            worst = max(worst, abs(r))
    return worst


def _substep(u, f, h, operators, lift):
    rhs = operators[0].mass * (u + h * f)
    if lift is not None:
        rhs = rhs + h * lift
    return np.stack([op.implicit_solver(h)(rhs[i]) for i, op in enumerate(operators)])


def step_imex(state, config, operators, reaction=None):
    """Advance one outer step; returns the new :class:`SimState`.

    The outer step is covered by dyadic substeps ``dt / 2^j``: whenever the
    explicit predictor ``u + h f(u)`` drops below ``-positivity_tol`` the
    substep is halved. Raises PositivityError once ``h < min_dt``.
    """
    reaction = config.build_reaction() if reaction is None else reaction
    mesh = operators[0].mesh
    lift = boundary_lift(operators, config.boundary_values)
    tol = config.positivity_tol
    t0, target = state.t, config.outer_time(state.step + 1)
    span = target - t0
    done, level = Fraction(0), 0
    u = state.u
    int_u2, int_abs_f, int_f = state.int_u2.copy(), state.int_abs_f.copy(), state.int_f.copy()
    min_value, budget = state.min_value, state.budget_max
    subs = []
    while done < 1:
        f = reaction(u)
        if not np.all(np.isfinite(f)):
            raise KKMembraneError(f"non-finite reaction values at t={t0 + float(done) * span:g}")
        level = 0
        frac = 1 - done
        while True:
            h = float(frac) * span
            pred = u + h * f
            if pred.min() >= -tol:
                break
            level += 1
            frac = Fraction(1, 2 ** level)
            while frac > 1 - done:
                frac /= 2
            if float(frac) * span < config.min_dt:
                i, c = np.unravel_index(np.argmin(pred), pred.shape)
                raise PositivityError(
                    f"positivity guard hit the step floor {config.min_dt:g}: species {i + 1}, "
                    f"cell {c}, predictor {pred[i, c]:.3e}", species=int(i), cell=int(c),
                    value=float(pred[i, c]))
        new = _substep(u, f, h, operators, lift)
        if new.min() < -tol:
            i, c = np.unravel_index(np.argmin(new), new.shape)
            raise PositivityError(f"species {i + 1} negative after diffusion solve at cell {c}",
                                  species=int(i), cell=int(c), value=float(new[i, c]))
        done += frac
        t = target if done == 1 else t0 + float(done) * span
        res = budget_residual(mesh, operators, h, u, new, f, lift)
        vol = mesh.volumes
        int_u2 += h * ((new ** 2) @ vol)
        int_abs_f += h * (np.abs(f) @ vol)
        int_f += h * (f @ vol)
        min_value = min(min_value, float(new.min()))
        budget = max(budget, res)
        subs.append(Substep(dt=h, t=t, u=new, f=f, budget_residual=res))
        u = new
    return SimState(t=target, step=state.step + 1, u=u, int_u2=int_u2, int_abs_f=int_abs_f,
                    int_f=int_f, min_value=min_value, budget_max=budget,
                    n_substeps=state.n_substeps + len(subs), substeps=tuple(subs))


# -- driver -------------------------------------------------------------------

@dataclass
class SimResult:
    config: SimConfig
    mesh: object
    operators: list
    records: list
    state: SimState
    trajectory: Trajectory | None
    mass_control_C: float
    error: str | None = None

    @property
    def ok(self):
        return self.error is None


def build_operators(config, mesh):
    return [assemble(mesh, s.D, s.k) for s in config.species]


def simulate(config, keep_trajectory=True):
    """Run to ``t_end``; one :class:`MonitorRecord` per outer step.

    Step errors stop the run; the records and trajectory gathered so far
    are returned with ``error`` set.
    """
    mesh = config.mesh.build()
    operators = build_operators(config, mesh)
    reaction = config.build_reaction()
    C = reaction.C if config.mass_control_C is None else config.mass_control_C
    u0 = initial_state(config, mesh)
    state = SimState.initial(u0)
    key = None
    if config.equal_k:
        key = KeyEstimateState.create(mesh, [s.D for s in config.species],
                                      [s.k for s in config.species], C)
        key.start(u0)
    stream = StreamingMonitors(mesh, operators, config.monitors, u0)
    builder = _TrajectoryBuilder(u0) if keep_trajectory else None
    records, error = [], None
    for _ in range(config.n_steps):
        try:
            state = step_imex(state, config, operators, reaction)
        except KKMembraneError as e:
            error = f"{type(e).__name__} at t={state.t:.6g}: {e}"
            break
        for j, sub in enumerate(state.substeps):
            if key is not None:
                key.advance(sub.dt, sub.t, sub.u)
            stream.advance(sub.dt, sub.u, sub.f, sub.budget_residual)
            if builder is not None:
                builder.add(sub, j == len(state.substeps) - 1)
        records.append(make_record(state.t, state.u, mesh, operators, key, stream))
    traj = builder.build(mesh, operators, C) if builder is not None else None
    return SimResult(config=config, mesh=mesh, operators=operators, records=records, state=state,
                     trajectory=traj, mass_control_C=C, error=error)


# -- steady fixture -----------------------------------------------------------

@dataclass(frozen=True)
class SteadyProfile:
    """Exact steady solution on the interval: flux ``J`` (positive towards
    increasing x), jump ``u2 - u1 = -J/k`` and the two membrane values."""

    length1: float
    length2: float
    D1: float
    D2: float
    k: float
    a: float
    c: float

    @property
    def flux(self):
        return (self.a - self.c) / (self.length1 / self.D1 + self.length2 / self.D2 + 1.0 / self.k)

    @property
    def jump(self):
        return -self.flux / self.k

    @property
    def traces(self):
        J = self.flux
        return self.a - J * self.length1 / self.D1, self.c + J * self.length2 / self.D2

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        J, L = self.flux, self.length1 + self.length2
        return np.where(x < self.length1, self.a - J * x / self.D1, self.c + J * (L - x) / self.D2)


def _pair(D):
    return (float(D), float(D)) if np.isscalar(D) else tuple(float(d) for d in D)


def steady_state(mesh, D, k, a, c):
    """Solve the stationary problem with wall values ``a`` (x=0), ``c`` (x=L).

    ``D`` is a scalar or a per-side pair; the membrane flux is ``k [u]``.
    Returns ``(u, operator)``.
    """
    if mesh.dim != 1:
        raise InvalidGeometryError("steady_state is a 1D fixture")
    if a < 0 or c < 0:
        raise InvalidParameterError("boundary values must be nonnegative")
    op = assemble(mesh, _pair(D), k)
    rhs = boundary_lift([op], (a, c))[0]
    return op.direct_solver()(rhs), op


def steady_profile(mesh, D, k, a, c):
    d1, d2 = _pair(D)
    return SteadyProfile(mesh.lengths[0], mesh.lengths[1], d1, d2, float(k), float(a), float(c))


def membrane_flux_and_jump(op, u):
    """Discrete membrane flux (per unit area, from side 1 to side 2) and the
    jump ``u2 - u1`` of the reconstructed traces, averaged over the faces."""
    mesh = op.mesh
    mem = mesh.membrane_faces
    a, b = mesh.face_cells[mem, 0], mesh.face_cells[mem, 1]
    q = op.membrane_conductance / mesh.face_area[mem] * (u[a] - u[b])
    tr = membrane_traces(mesh, u, op)
    return float(q.mean()), float((tr[:, 1] - tr[:, 0]).mean())


__all__ = [
    "MeshSpec", "SpeciesSpec", "MonitorSpec", "SimConfig", "config_from_dict", "initial_field",
    "initial_state", "SimState", "Substep", "Trajectory", "step_imex", "simulate", "SimResult",
    "build_operators", "boundary_lift", "budget_residual", "steady_state", "steady_profile",
    "SteadyProfile", "membrane_flux_and_jump"
]
