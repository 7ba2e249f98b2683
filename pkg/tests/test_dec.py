import dataclasses

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from weightedhodge.dec import assemble, assemble_twisted, dirichlet_restrict, write_coo
from weightedhodge.errors import AssemblyError
from weightedhodge.geometry import estimate_curvature
from weightedhodge.mesh import extract_domain, make_sphere, make_torus
from weightedhodge.weights import radial_weight, smooth_random_weight, zero_weight

SMALL_TORUS = make_torus(2.0, 1.0, 16, 8)
SMALL_SPHERE = make_sphere(1.0, 2)


def dense_spectrum(pair):
    A = pair.L.toarray()
    return sla.eigh(0.5 * (A + A.T), np.diag(pair.M), eigvals_only=True)


@pytest.fixture(scope="module", params=["sphere", "torus"])
def small(request):
    m = SMALL_SPHERE if request.param == "sphere" else SMALL_TORUS
    return m, estimate_curvature(m)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([0, 1]))
def test_weighted_adjointness(seed, p):
    m = SMALL_TORUS
    ops = assemble(m, w=smooth_random_weight(m, seed=seed % 50, amplitude=1.0))
    rng = np.random.default_rng(seed)
    a = rng.normal(size=m.n_simplices(p))
    b = rng.normal(size=m.n_simplices(p + 1))
    lhs = ops.inner(p + 1, ops.differential(p) @ a, b)
    rhs = ops.inner(p, a, ops.codifferential(p + 1) @ b)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12 * np.linalg.norm(a) * np.linalg.norm(b))


def test_stars_positive_everywhere(small):
    m, c = small
    for w in (zero_weight(m), radial_weight(m, c, 1.0), smooth_random_weight(m, seed=3, c=c)):
        ops = assemble(m, w=w)
        for s in ops.stars + ops.wstars:
            assert np.all(s > 0)


def test_pair_is_hodge_laplacian(small):
    m, c = small
    ops = assemble(m, w=smooth_random_weight(m, seed=2, c=c))
    rng = np.random.default_rng(0)
    W = ops.wstars
    x0 = rng.normal(size=m.n_vertices)
    np.testing.assert_allclose(ops.pair(0).L @ x0, W[0] * (ops.codifferential(1) @ (ops.d0 @ x0)), atol=1e-10)
    x1 = rng.normal(size=m.n_edges)
    lap1 = ops.codifferential(2) @ (ops.d1 @ x1) + ops.d0 @ (ops.codifferential(1) @ x1)
    np.testing.assert_allclose(ops.pair(1).L @ x1, W[1] * lap1, atol=1e-10)
    x2 = rng.normal(size=m.n_faces)
    np.testing.assert_allclose(ops.pair(2).L @ x2, W[2] * (ops.d1 @ (ops.codifferential(2) @ x2)), atol=1e-10)


def test_pairs_symmetric_psd(small):
    m, c = small
    ops = assemble(m, w=radial_weight(m, c, 1.0))
    for p in range(3):
        pr = ops.pair(p)
        assert abs(pr.L - pr.L.T).max() == 0
        assert dense_spectrum(pr)[0] > -1e-10 * pr.scale


@pytest.mark.parametrize("kind", ["radial", "random"])
def test_gauge_invariance(small, kind):
    m, c = small
    w = radial_weight(m, c, 0.8) if kind == "radial" else smooth_random_weight(m, seed=11, amplitude=1.0, c=c)
    ops = assemble(m, w=w)
    tw = assemble_twisted(m, ops=ops)
    plain = assemble(m)
    for p in range(3):
        a = dense_spectrum(tw.pair(p))
        b = dense_spectrum(plain.pair(p))
        scale = np.abs(b).max()
        assert np.abs(a - b).max() <= 1e-10 * scale


def test_constant_weight_same_spectrum():
    m = SMALL_SPHERE
    c = estimate_curvature(m)
    w = radial_weight(m, c, 3.0)     # f = 3/2 on the unit sphere
    a = dense_spectrum(assemble(m, w=w).pair(1))
    b = dense_spectrum(assemble(m).pair(1))
    np.testing.assert_allclose(a, b, atol=1e-10 * b.max())


def _constant_weight(m, value):
    w = zero_weight(m)
    return dataclasses.replace(w, kind="custom", f=np.full(m.n_vertices, float(value)))


def test_weight_underflow_rejected():
    with pytest.raises(AssemblyError, match="non-positive"):
        assemble(SMALL_SPHERE, w=_constant_weight(SMALL_SPHERE, 800.0))


def test_non_finite_weight_rejected():
    with pytest.raises(AssemblyError, match="non-finite"):
        assemble(SMALL_SPHERE, w=_constant_weight(SMALL_SPHERE, np.inf))


def test_twist_overflow_rejected():
    with pytest.raises(AssemblyError, match="overflow"):
        assemble_twisted(SMALL_SPHERE, w=_constant_weight(SMALL_SPHERE, -705.0))


def test_dirichlet_restrict():
    m = SMALL_SPHERE
    ops = assemble(m)
    dom = extract_domain(m, m.vertices[:, 2] > 0.1)
    for p in range(3):
        full = ops.pair(p)
        r = dirichlet_restrict(full, dom)
        idx = dom.interior(p)
        np.testing.assert_array_equal(r.index, idx)
        assert abs(r.L - full.L[idx][:, idx]).max() == 0
        np.testing.assert_array_equal(r.M, full.M[idx])
    whole = extract_domain(m, np.ones(m.n_vertices, dtype=bool))
    assert dirichlet_restrict(ops.pair(1), whole) is ops.pair(1)
    # a single kept vertex has no interior edges
    lone = extract_domain(m, np.arange(m.n_vertices) == 0)
    with pytest.raises(AssemblyError, match="no interior 1-simplices"):
        dirichlet_restrict(ops.pair(1), lone)


def test_dirichlet_interlacing():
    # min-max: restricting to a subspace raises every eigenvalue
    m = SMALL_SPHERE
    ops = assemble(m)
    dom = extract_domain(m, m.vertices[:, 2] > -0.3)
    full = dense_spectrum(ops.pair(0))
    sub = dense_spectrum(dirichlet_restrict(ops.pair(0), dom))
    assert np.all(sub >= full[:len(sub)] - 1e-10)


def test_write_coo(tmp_path):
    ops = assemble(SMALL_SPHERE)
    p = tmp_path / "d0.coo"
    write_coo(ops.d0, p)
    lines = p.read_text().splitlines()
    assert lines[0] == f"# {SMALL_SPHERE.n_edges} {SMALL_SPHERE.n_vertices} {2 * SMALL_SPHERE.n_edges}"
    rows = np.loadtxt(p, comments="#")
    assert rows.shape == (2 * SMALL_SPHERE.n_edges, 3)
    assert set(rows[:, 2]) == {-1.0, 1.0}
    write_coo(ops.pair(0).M, tmp_path / "m.coo")
    m = np.loadtxt(tmp_path / "m.coo", comments="#")
    np.testing.assert_allclose(m[:, 2], ops.pair(0).M, rtol=1e-11)
