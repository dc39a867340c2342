import numpy as np
import pytest

from kkmembrane.errors import InvalidDataError, InvalidParameterError
from kkmembrane.mesh import build_interval_mesh, build_rect_mesh
from kkmembrane.reactions import (builtin_annihilation, builtin_constant_loss,
                                  builtin_linear_growth, builtin_transport_demo, builtin_zero,
                                  check_hypotheses, make_reaction, make_truncation,
                                  mollify_initial, regularize)

RATES = [1.0, 0.5, 0.3, 0.2, 0.8, 0.6]


def test_annihilation_values():
    f = builtin_annihilation()
    np.testing.assert_array_equal(f(np.array([0.0, 0.0])), [0.0, 0.0])
    np.testing.assert_array_equal(f(np.array([1.0, 1.0])), [-1.0, -1.0])
    u2 = np.linspace(0, 50, 11)
    assert np.all(f(np.stack([np.zeros_like(u2), u2]))[0] == 0)
    assert f.C == 1.0 and f.lipschitz(10.0) == 20.0


def test_species_count_checked():
    with pytest.raises(InvalidParameterError):
        builtin_annihilation()(np.zeros(3))


def test_transport_zero_rates():
    f = builtin_transport_demo([0.0] * 6)
    u = np.random.default_rng(0).uniform(0, 10, (6, 100))
    assert np.all(f(u) == 0)


def test_transport_negative_rate():
    with pytest.raises(InvalidParameterError):
        builtin_transport_demo([1.0, -0.1, 0, 0, 0, 0])
    with pytest.raises(InvalidParameterError):
        builtin_transport_demo([1.0, 1.0])


def test_transport_conservative_sum_zero():
    f = builtin_transport_demo(RATES, conservative=True)
    u = np.random.default_rng(1).uniform(0, 10, (6, 1000))
    s = f(u).sum(axis=0)
    assert np.max(np.abs(s)) <= 1e-12 * np.max(np.abs(f(u)))


def test_transport_mass_control_and_quasi_positivity():
    f = builtin_transport_demo(RATES)
    u = np.random.default_rng(2).uniform(0, 10, (6, 1000))
    assert np.all(f(u).sum(axis=0) <= 1e-12)
    for i in range(6):
        ub = u.copy()
        ub[i] = 0
        assert np.all(f(ub)[i] >= 0)


def test_checker_annihilation():
    rep = check_hypotheses(builtin_annihilation(), 10.0, 10_000)
    assert rep.passed
    assert rep.quasi_positive and rep.min_boundary_value == 0
    assert rep.mass_C_raw <= 0


def test_checker_transport():
    assert check_hypotheses(builtin_transport_demo(RATES), 10.0, 10_000).passed


def test_checker_linear_growth_mass_estimate():
    # sup of (u1+u2)/(1+u1+u2) on [0,10]^2 is 20/21
    rep = check_hypotheses(builtin_linear_growth(), 10.0, 10_000)
    assert rep.passed
    assert rep.mass_C_raw == pytest.approx(20 / 21, rel=1e-12)


def test_checker_rejects_constant_loss():
    rep = check_hypotheses(builtin_constant_loss(), 10.0, 10_000)
    assert not rep.quasi_positive
    assert not rep.passed
    assert rep.min_boundary_value == -1.0


def test_checker_detects_understated_constant():
    f = builtin_annihilation()
    fake = type(f)(2, f.func, 1.0, lambda M: 0.5 * M, "bad")
    rep = check_hypotheses(fake, 10.0, 10_000)
    assert not rep.passed
    assert any("Lipschitz" in s for s in rep.failures)


def test_checker_sample_floor():
    with pytest.raises(InvalidParameterError):
        check_hypotheses(builtin_annihilation(), 10.0, 999)
    with pytest.raises(InvalidParameterError):
        check_hypotheses(builtin_annihilation(), 0.0, 1000)


def test_regularize_zero():
    r = regularize(builtin_zero(2), 3)
    assert np.all(r(np.ones((2, 5))) == 0)


def test_regularize_hand_value():
    r = regularize(builtin_annihilation(), 1)
    np.testing.assert_allclose(r(np.array([10.0, 10.0])), [-100 / 201, -100 / 201], rtol=1e-15)


def test_regularize_bound_and_sign():
    base = builtin_transport_demo(RATES)
    u = np.random.default_rng(4).uniform(0, 50, (6, 2000))
    for n in (1, 5, 40):
        fn, f = regularize(base, n)(u), base(u)
        assert np.all(np.abs(fn) <= np.minimum(np.abs(f), n) + 1e-15)
        assert np.all(np.sign(fn) == np.sign(f))


def test_regularize_sup_error_monotone():
    base = builtin_annihilation()
    g = np.linspace(0, 10, 101)
    u = np.stack(np.meshgrid(g, g)).reshape(2, -1)
    f = base(u)
    errs = [np.max(np.abs(regularize(base, n)(u) - f)) for n in (1, 2, 4, 8, 16, 32, 64)]
    assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_regularize_error_scales_like_one_over_n():
    # |f_i^n - f_i| = |f_i| S / (n + S) <= |f_i| S / n with S = sum |f_j|
    base = builtin_transport_demo(RATES)
    rng = np.random.default_rng(5)
    u = rng.uniform(0, 10, (6, 20_000))
    f = base(u)
    cap = np.max(np.abs(f) * np.abs(f).sum(axis=0))
    for n in (1, 4, 16, 64, 256):
        err = np.max(np.abs(regularize(base, n)(u) - f))
        assert n * err <= cap * (1 + 1e-12)
    err_hi = np.max(np.abs(regularize(base, 10**6)(u) - f))
    assert 10**6 * err_hi == pytest.approx(cap, rel=1e-3)


def test_regularize_invalid():
    for n in (0, -1, 1.5):
        with pytest.raises(InvalidParameterError):
            regularize(builtin_annihilation(), n)


def test_make_reaction_unknown_lists_labels():
    with pytest.raises(InvalidParameterError, match="annihilation.*transport_demo"):
        make_reaction("nope")


def test_make_reaction_species_count():
    assert make_reaction("zero", m=3).m == 3
    assert make_reaction("transport_demo", {"rates": RATES}).m == 6


def test_mollify_constant_fixed():
    m = build_interval_mesh(1, 1, 32, 32)
    out = mollify_initial(np.full(m.n_cells, 0.7), 4, m)
    np.testing.assert_allclose(out, 0.7, rtol=1e-14)


def test_mollify_clips_spike():
    m = build_interval_mesh(1, 1, 16, 16)
    u0 = np.zeros(m.n_cells)
    u0[5] = 1e3
    out = mollify_initial(u0, 1, m)
    assert out.max() <= 1.0
    assert out.min() >= 0.0


def test_mollify_no_smoothing_across_membrane():
    m = build_interval_mesh(1, 1, 16, 16)
    u0 = (m.subdomain == 2).astype(float)
    np.testing.assert_array_equal(mollify_initial(u0, 1, m), u0)


def test_mollify_converges_in_l1():
    m = build_rect_mesh(1, 1, 1, 32, 32, 32)
    cx, cy = m.centers.T
    u0 = ((np.abs(cx - 0.5) < 0.2) & (np.abs(cy - 0.5) < 0.2)).astype(float)
    d = [m.volumes @ np.abs(mollify_initial(u0, n, m) - u0) for n in (2, 4, 8, 16)]
    assert all(b < a for a, b in zip(d, d[1:]))


def test_mollify_rejects_negative():
    m = build_interval_mesh(1, 1, 4, 4)
    with pytest.raises(InvalidDataError):
        mollify_initial(-np.ones(8), 2, m)


def test_truncation_identity_region():
    t = make_truncation(6.0)
    assert t(0.0) == 0 and t.d1(0.0) == 1 and t.d2(0.0) == 0


def test_truncation_plateau():
    b = 6.0
    t = make_truncation(b)
    assert t.d1(b) == 0 and t.d2(b) == 0
    s = np.linspace(b, b + 100, 50)
    assert np.ptp(t(s)) == 0
    assert t(b) == pytest.approx(b - 1, abs=1e-14)


def test_truncation_second_derivative_floor():
    t = make_truncation(10.0)
    s = np.linspace(0, 15, 100_001)
    assert t.d2(s).min() >= -np.pi / 4 - 1e-15


def test_truncation_derivatives_consistent():
    t = make_truncation(5.0)
    s = np.linspace(2.5, 5.5, 31)
    eps = 1e-6
    np.testing.assert_allclose((t(s + eps) - t(s - eps)) / (2 * eps), t.d1(s), atol=1e-8)
    np.testing.assert_allclose((t.d1(s + eps) - t.d1(s - eps)) / (2 * eps), t.d2(s), atol=1e-6)


def test_truncation_level_floor():
    with pytest.raises(InvalidParameterError):
        make_truncation(3.9)
