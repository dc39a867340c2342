import numpy as np
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kkmembrane.elliptic import assemble, bilinear_form, conjugate_gradient, dual_norm
from kkmembrane.mesh import build_interval_mesh
from kkmembrane.reactions import builtin_annihilation, make_truncation, regularize

MESH = build_interval_mesh(1.0, 0.5, 6, 3)
N = MESH.n_cells
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
fields = arrays(float, N, elements=finite)
perm = st.floats(0.05, 20.0)


@settings(max_examples=50, deadline=None)
@given(fields, fields, perm)
def test_form_symmetric_and_cauchy_schwarz(v, w, k):
    op = assemble(MESH, 1.0, k)
    bvw = bilinear_form(op, v, w)
    assert abs(bvw - bilinear_form(op, w, v)) <= 1e-10 * (1 + abs(bvw))
    bound = np.sqrt(bilinear_form(op, v, v) * bilinear_form(op, w, w))
    assert abs(bvw) <= bound * (1 + 1e-12) + 1e-12


@settings(max_examples=50, deadline=None)
@given(fields, fields, perm)
def test_duality_inequality(f, v, k):
    op = assemble(MESH, 1.0, k)
    pairing = float((f * op.mass * v).sum())
    dn = dual_norm(op, f, method="direct")
    assert abs(pairing) <= dn * np.sqrt(bilinear_form(op, v, v)) * (1 + 1e-9) + 1e-12


@settings(max_examples=50, deadline=None)
@given(arrays(float, N, elements=st.floats(-5, 5)), perm, st.floats(1e-4, 1.0))
def test_implicit_step_is_monotone(u, k, dt):
    # (M + dt A)^{-1} M maps nonnegative data to nonnegative data
    op = assemble(MESH, (1.0, 2.0), k)
    solve = op.implicit_solver(dt)
    pos = np.abs(u)
    out = solve(op.mass * pos)
    assert out.min() >= -1e-14
    lo = solve(op.mass * np.minimum(u, pos))
    assert np.all(lo <= out + 1e-12)


@settings(max_examples=30, deadline=None)
@given(fields, perm)
def test_cg_matches_dense(rhs, k):
    op = assemble(MESH, 1.0, k)
    A = op.matrix.toarray()
    x, _, res = conjugate_gradient(op.matrix, rhs, tol=1e-13)
    exact = sla.solve(A, rhs, assume_a="pos")
    assert np.linalg.norm(x - exact) <= 1e-9 * (1 + np.linalg.norm(exact))


pairs = arrays(float, (2, 5), elements=st.floats(0, 1e4))


@settings(max_examples=100, deadline=None)
@given(pairs, st.integers(1, 1000))
def test_regularization_sign_and_bound(u, n):
    base = builtin_annihilation()
    f, fn = base(u), regularize(base, n)(u)
    assert np.all(np.sign(fn) == np.sign(f))
    assert np.all(np.abs(fn) <= np.abs(f) + 1e-300)
    assert np.all(np.abs(fn).sum(axis=0) <= n * (1 + 1e-12))


@settings(max_examples=100, deadline=None)
@given(arrays(float, 5, elements=st.floats(0, 1e4)), st.integers(0, 1), st.integers(1, 1000))
def test_regularization_keeps_quasi_positivity(other, i, n):
    u = np.zeros((2, 5))
    u[1 - i] = other
    assert np.all(regularize(builtin_annihilation(), n)(u)[i] >= 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(4, 200), st.floats(-10, 300), st.floats(-10, 300))
def test_truncation_is_one_lipschitz(b, x, y):
    T = make_truncation(b)
    assert abs(float(T(x)) - float(T(y))) <= abs(x - y) * (1 + 1e-12) + 1e-12
