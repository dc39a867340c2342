from dataclasses import replace

import numpy as np
import pytest

from kkmembrane.errors import ConfigError, InvalidGeometryError, PositivityError
from kkmembrane.mesh import build_interval_mesh, build_rect_mesh, membrane_traces
from kkmembrane.parabolic import (MeshSpec, MonitorSpec, SimConfig, SimState, SpeciesSpec,
                                  build_operators, config_from_dict, initial_field,
                                  membrane_flux_and_jump, simulate, steady_profile, steady_state,
                                  step_imex)

SPIKE = {"type": "spike", "center": 0.5, "width": 1 / 64, "mass": 1.0}


def one_species(initial, **kw):
    kw.setdefault("mesh", MeshSpec(n1=16, n2=16))
    kw.setdefault("t_end", 0.05)
    kw.setdefault("dt", 0.01)
    return SimConfig(species=(SpeciesSpec(initial=initial),), **kw)


def pair(a, b, **kw):
    kw.setdefault("mesh", MeshSpec(n1=32, n2=32))
    kw.setdefault("t_end", 0.1)
    kw.setdefault("dt", 1e-3)
    kw.setdefault("reaction", "annihilation")
    return SimConfig(species=(SpeciesSpec(initial=a), SpeciesSpec(initial=b)), **kw)


def test_zero_stays_zero():
    cfg = one_species({"type": "zero"})
    mesh = cfg.mesh.build()
    ops = build_operators(cfg, mesh)
    st = SimState.initial(np.zeros((1, mesh.n_cells)))
    for _ in range(3):
        st = step_imex(st, cfg, ops)
    assert np.all(st.u == 0)
    assert st.step == 3 and st.t == pytest.approx(0.03)


def test_heat_l2_decreasing():
    res = simulate(one_species({"type": "rough", "seed": 1}))
    l2 = [np.sqrt(res.trajectory.fields[0, 0] ** 2 @ res.mesh.volumes)] + [r.l2[0] for r in res.records]
    assert all(b <= a for a, b in zip(l2, l2[1:]))


def test_lifted_source_converges_to_steady_profile():
    cfg = one_species({"type": "zero"}, boundary_values=(1.0, 0.0), t_end=20.0, dt=0.05)
    res = simulate(cfg, keep_trajectory=False)
    exact = steady_profile(res.mesh, 1.0, 1.0, 1.0, 0.0)
    np.testing.assert_allclose(res.state.u[0], exact(res.mesh.centers[:, 0]), atol=1e-6)


def test_steady_equilibrium():
    m = build_interval_mesh(1, 1, 8, 8)
    u, op = steady_state(m, 1.0, 1.0, 0.4, 0.4)
    np.testing.assert_allclose(u, 0.4, rtol=1e-13)
    J, jump = membrane_flux_and_jump(op, u)
    assert abs(J) < 1e-14 and abs(jump) < 1e-14


def test_steady_series_resistance():
    # J = (a - c) / (L1/D1 + L2/D2 + 1/k) = 1/3, [u] = -J/k
    m = build_interval_mesh(1, 1, 10, 10)
    u, op = steady_state(m, (1.0, 1.0), 1.0, 1.0, 0.0)
    J, jump = membrane_flux_and_jump(op, u)
    assert J == pytest.approx(1 / 3, abs=1e-10)
    assert jump == pytest.approx(-1 / 3, abs=1e-10)
    np.testing.assert_allclose(membrane_traces(m, u, op)[0], [2 / 3, 1 / 3], atol=1e-10)
    x = m.centers[:, 0]
    exact = np.where(x < 1, 1 - x / 3, (2 - x) / 3)
    np.testing.assert_allclose(u, exact, atol=1e-10)


def test_steady_unequal_sides():
    m = build_interval_mesh(1.0, 2.0, 8, 16)
    u, op = steady_state(m, (2.0, 0.5), 3.0, 2.0, 0.5)
    J, jump = membrane_flux_and_jump(op, u)
    Jx = 1.5 / (1 / 2 + 2 / 0.5 + 1 / 3)
    assert J == pytest.approx(Jx, abs=1e-12)
    assert jump == pytest.approx(-Jx / 3, abs=1e-12)


def test_steady_transparent_limit():
    m = build_interval_mesh(1, 1, 10, 10)
    u, op = steady_state(m, 1.0, 1e9, 1.0, 0.0)
    J, jump = membrane_flux_and_jump(op, u)
    assert abs(jump) < 1e-8
    assert J == pytest.approx(0.5, abs=1e-8)


def test_steady_rejects_2d_and_negative():
    with pytest.raises(InvalidGeometryError):
        steady_state(build_rect_mesh(1, 1, 1, 2, 2, 2), 1.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        steady_state(build_interval_mesh(1, 1, 2, 2), 1.0, 1.0, -1.0, 0.0)


def test_one_record_when_t_end_equals_dt():
    res = simulate(one_species({"type": "sine"}, t_end=0.01, dt=0.01))
    assert len(res.records) == 1
    assert res.records[0].t == 0.01


def test_last_step_lands_on_t_end():
    res = simulate(one_species({"type": "sine"}, t_end=0.025, dt=0.01))
    assert [r.t for r in res.records] == pytest.approx([0.01, 0.02, 0.025], abs=0)


def test_symmetric_data_symmetric_solution():
    res = simulate(pair(SPIKE, SPIKE))
    f = res.trajectory.fields
    assert np.max(np.abs(f[:, 0] - f[:, 1])) <= 1e-12


def test_deterministic():
    a = simulate(pair(SPIKE, {"type": "rough", "seed": 2}))
    b = simulate(pair(SPIKE, {"type": "rough", "seed": 2}))
    assert [r.values() for r in a.records] == [r.values() for r in b.records]


def test_mass_nonincreasing_and_budget():
    res = simulate(pair(SPIKE, {"type": "sine"}))
    mass = [res.trajectory.fields[0].sum(axis=0) @ res.mesh.volumes] + [r.total_mass for r in res.records]
    assert np.all(np.diff(mass) <= 0)
    assert res.state.budget_max <= 1e-12
    assert res.state.min_value >= -1e-12


def test_budget_balances_in_2d_with_distinct_k():
    cfg = SimConfig(mesh=MeshSpec(dim=2, n1=6, n2=6, ny=6),
                    species=(SpeciesSpec(D=1.0, k=0.3, initial={"type": "indicator", "side": 1}),
                             SpeciesSpec(D=2.0, k=3.0, initial={"type": "sine"})),
                    reaction="annihilation", t_end=0.05, dt=0.01)
    res = simulate(cfg)
    assert res.ok and res.state.budget_max <= 1e-12
    assert res.records[0].dual_norm_U is None
    assert "dual_norm_U" not in res.records[0].columns()


def test_comparison_principle():
    lo = simulate(one_species({"type": "sine", "amplitude": 1.0}, t_end=0.2))
    hi = simulate(one_species({"type": "sine", "amplitude": 1.0}, t_end=0.2,
                              boundary_values=None, mesh=MeshSpec(n1=16, n2=16)))
    hi2 = simulate(replace(hi.config, species=(SpeciesSpec(initial={"type": "constant", "value": 1.0}),)))
    assert np.all(hi2.trajectory.fields >= lo.trajectory.fields - 1e-15)


def test_positivity_guard_substeps():
    # u + dt f(u) = 1500 (1 - 1.5) < 0 forces dyadic substeps
    tall = {"type": "box", "lo": 0.484375, "hi": 0.5, "value": 1500.0}
    res = simulate(pair(tall, tall, mesh=MeshSpec(n1=64, n2=64), t_end=0.01))
    assert res.ok
    assert res.state.n_substeps > len(res.records)
    assert res.state.min_value >= -1e-12
    assert np.all(np.diff(res.trajectory.times) > 0)
    assert res.records[-1].total_mass > 0


def test_positivity_floor_raises():
    cfg = SimConfig(mesh=MeshSpec(n1=8, n2=8),
                    species=(SpeciesSpec(initial={"type": "zero"}), SpeciesSpec()),
                    reaction="constant_loss", t_end=0.02, dt=0.01, min_dt=1e-4)
    mesh = cfg.mesh.build()
    with pytest.raises(PositivityError) as err:
        step_imex(SimState.initial(np.zeros((2, mesh.n_cells))), cfg, build_operators(cfg, mesh))
    assert err.value.species == 0
    res = simulate(cfg)
    assert not res.ok and "PositivityError" in res.error
    assert res.records == [] and res.trajectory.times.tolist() == [0.0]


def test_initial_spike_mass_exact():
    for mesh in (build_interval_mesh(1, 1, 64, 64), build_rect_mesh(1, 1, 1, 16, 16, 16)):
        c = [0.5] if mesh.dim == 1 else [0.5, 0.5]
        u = initial_field(mesh, {"type": "spike", "center": c, "width": 0.1, "mass": 2.0})
        assert u @ mesh.volumes == pytest.approx(2.0, rel=1e-12)


def test_initial_box_cell_average():
    m = build_interval_mesh(1, 1, 4, 4)
    u = initial_field(m, {"type": "box", "lo": 0.1, "hi": 0.3, "value": 4.0})
    # cell [0, .25] covered on [.1, .25] -> 0.6, cell [.25, .5] on [.25, .3] -> 0.2
    np.testing.assert_allclose(u[:3], [4 * 0.6, 4 * 0.2, 0.0])


def test_initial_indicator_and_unknown():
    m = build_interval_mesh(1, 1, 4, 4)
    assert initial_field(m, {"type": "indicator", "side": 2}).tolist() == [0] * 4 + [1] * 4
    with pytest.raises(ValueError):
        initial_field(m, {"type": "gauss"})


@pytest.mark.parametrize("kw", [dict(dt=0.0), dict(dt=0.1, t_end=0.05), dict(reaction="nope"),
                                dict(regularization=0)])
def test_config_invariants(kw):
    with pytest.raises(ConfigError):
        one_species({"type": "zero"}, **kw)


def test_config_equal_k_for_key_estimate():
    with pytest.raises(ConfigError, match="open problem") as err:
        SimConfig(species=(SpeciesSpec(k=1.0), SpeciesSpec(k=2.0)), reaction="annihilation",
                  monitors=MonitorSpec(key_estimate=True))
    assert err.value.path == ("monitors", "key_estimate")
    SimConfig(species=(SpeciesSpec(k=1.0), SpeciesSpec(k=2.0)), reaction="annihilation")


def test_config_species_mismatch():
    cfg = SimConfig(species=(SpeciesSpec(),), reaction="annihilation")
    with pytest.raises(ConfigError):
        cfg.build_reaction()


def test_config_roundtrip():
    cfg = pair(SPIKE, {"type": "sine"}, regularization=4,
               monitors=MonitorSpec(key_estimate=True, truncation_levels=(4.0,)))
    assert config_from_dict(cfg.to_dict()) == cfg


def test_regularized_initial_data_clipped():
    tall = {"type": "box", "lo": 0.484375, "hi": 0.5, "value": 1e3}
    cfg = pair(tall, {"type": "sine"}, regularization=4, regularize_initial=True, t_end=0.01,
               dt=0.01)
    res = simulate(cfg)
    assert res.trajectory.fields[0].max() <= 4.0
