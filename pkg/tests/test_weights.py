import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weightedhodge.errors import WeightError
from weightedhodge.geometry import estimate_curvature
from weightedhodge.mesh import SurfaceMesh, dual_volumes, make_sphere
from weightedhodge.weights import (
    H_l,
    custom_weight,
    dH_l,
    distance_weight,
    face_gradients,
    load_weight_csv,
    radial_weight,
    scal_f,
    smooth_random_weight,
    t_f_on_forms,
    zero_weight,
)


@pytest.fixture(scope="module")
def offcentre():
    m = make_sphere(1.0, 4)
    m = SurfaceMesh(m.vertices + np.array([0.4, -0.2, 0.1]), m.faces)
    return m, estimate_curvature(m)


def test_radial_closed_forms_against_fits(offcentre):
    m, c = offcentre
    a = 0.7
    w = radial_weight(m, c, a)
    num = custom_weight(m, 0.5 * a * np.einsum("vk,vk->v", m.vertices, m.vertices), c)
    np.testing.assert_allclose(w.f, num.f)
    scale = a * np.abs(m.vertices).max() ** 2
    assert np.abs(w.df2 - num.df2).max() < 0.01 * scale
    assert np.abs(w.grad - num.grad).max() < 0.01 * a * 1.5
    assert np.abs(w.hess - num.hess).max() < 0.03 * a
    A = dual_volumes(m).vertex_areas
    rel = np.sqrt(np.sum(A * (w.lap - num.lap) ** 2) / np.sum(A * w.lap ** 2))
    assert rel < 0.05


def test_shrinker_weight(shrinker4, curv_shrinker4):
    w = radial_weight(shrinker4, curv_shrinker4, 1.0)
    assert w.df2.min() >= 0 and w.df2.max() < 1e-8
    # Δf = a(-n + <X,ν> tr S) = -2 + √2 · √2 = 0 up to the curvature fit
    assert np.abs(w.lap).max() < 0.02
    np.testing.assert_allclose(scal_f(curv_shrinker4, w), 1.0, atol=0.02)
    # T_f^{[1]} = a(I - <X,ν> S) vanishes on the shrinker; T^{[0]} = 0 always
    assert np.abs(t_f_on_forms(w, 1, curv_shrinker4)).max() < 0.02
    assert np.abs(t_f_on_forms(w, 0, curv_shrinker4)).max() == 0


def test_flat_disk_radial(disk4):
    m = disk4.mesh
    c = estimate_curvature(m)
    w = radial_weight(m, c, 2.0)
    np.testing.assert_allclose(w.hess, np.broadcast_to(2.0 * np.eye(2), w.hess.shape), atol=1e-12)
    np.testing.assert_allclose(w.lap, -4.0, atol=1e-12)
    np.testing.assert_allclose(scal_f(c, w), 4.0, atol=1e-10)


def test_linear_function_exact(disk4):
    m = disk4.mesh
    c = estimate_curvature(m)
    f = m.vertices[:, 0] + 2 * m.vertices[:, 1]
    w = custom_weight(m, f, c)
    iv = disk4.interior_vertices
    # gradient in the vertex frame has the ambient gradient's norm
    np.testing.assert_allclose(w.df2, 5.0, atol=1e-10)
    np.testing.assert_allclose(w.hess, 0.0, atol=1e-9)
    np.testing.assert_allclose(w.lap[iv], 0.0, atol=1e-9)
    np.testing.assert_allclose(face_gradients(m, f), np.broadcast_to([1.0, 2.0, 0.0], (m.n_faces, 3)), atol=1e-10)


def test_quadratic_laplacian_on_disk(disk4):
    m = disk4.mesh
    f = m.vertices[:, 0] ** 2 + m.vertices[:, 1] ** 2
    w = custom_weight(m, f)
    iv = disk4.interior_vertices
    np.testing.assert_allclose(w.lap[iv], -4.0, rtol=0.02)
    np.testing.assert_allclose(w.hess, np.broadcast_to(2 * np.eye(2), w.hess.shape), atol=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.floats(-50, 50))
def test_constant_shift_invariance(shift):
    m = make_sphere(1.0, 2)
    c = estimate_curvature(m)
    f = np.sin(m.vertices[:, 0]) + m.vertices[:, 2] ** 2
    w1, w2 = custom_weight(m, f, c), custom_weight(m, f + shift, c)
    np.testing.assert_allclose(w2.grad, w1.grad, atol=1e-7)
    np.testing.assert_allclose(w2.hess, w1.hess, atol=1e-6)
    np.testing.assert_allclose(w2.lap, w1.lap, atol=1e-8 * (1 + abs(shift)))


def test_constant_weight_has_no_derivatives(sphere4, curv_sphere4):
    w = custom_weight(sphere4, np.full(sphere4.n_vertices, 3.0), curv_sphere4)
    assert w.df2.min() >= 0 and w.df2.max() < 1e-8
    assert np.abs(w.hess).max() < 1e-10
    assert np.abs(w.lap).max() < 1e-10


def test_comparison_functions():
    assert H_l(0.5, 0.0) == pytest.approx(2.0)
    assert H_l(1.0, 1.0) == pytest.approx(1 / np.tan(1.0))
    assert H_l(1.0, -1.0) == pytest.approx(1.3130352854993312)
    assert H_l(0.5, 4.0) == pytest.approx(2 / np.tan(1.0))
    np.testing.assert_allclose(dH_l(np.array([0.0, 1e-9]), 1.0), 1.0)
    assert dH_l(0.0, -3.0, n=4) == 3.0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 2.0), st.floats(-2.0, 2.0))
def test_comparison_monotone_in_curvature(r, l):
    # larger curvature bound gives smaller comparison mean curvature (before the conjugate radius)
    if l > 0 and np.sqrt(l) * r >= 3.0:
        return
    assert H_l(r, l) <= H_l(r, l - 0.1) + 1e-12


def test_distance_weight_on_flat_disk(disk4):
    m = disk4.mesh
    centre = int(np.argmin(np.linalg.norm(m.vertices, axis=1)))
    w, cd = distance_weight(m, centre, 1.0, {"l": 0.0})
    r = np.linalg.norm(m.vertices - m.vertices[centre], axis=1)
    assert np.all(cd.d >= r - 1e-12)
    assert np.all(cd.d - r <= cd.error_bound)
    np.testing.assert_allclose(w.f, 0.5 * cd.d ** 2)
    assert not cd.singular.any()
    np.testing.assert_allclose(cd.H_values["l"][r > 0], 1 / cd.d[r > 0])


def test_distance_weight_singular_set():
    m = make_sphere(1.0, 3)
    top = int(np.argmax(m.vertices[:, 2]))
    with pytest.warns(RuntimeWarning, match="conjugate"):
        _, cd = distance_weight(m, top, 1.0, {"l": 1.2})
    assert cd.singular.any()
    np.testing.assert_array_equal(cd.singular, np.sqrt(1.2) * cd.d >= np.pi)
    assert np.all(m.vertices[cd.singular, 2] < -0.5)
    # edge paths use chords, so they may undercut the arc length slightly
    gc = np.arccos(np.clip(m.vertices @ m.vertices[top], -1, 1))
    h = np.linalg.norm(np.diff(m.vertices[m.edges], axis=1), axis=2).max()
    assert np.all(cd.d >= gc * np.sin(h / 2) / (h / 2) - 1e-9)
    assert np.all(cd.d <= gc * 2 / np.sqrt(3) + h)


def test_weight_argument_errors(sphere4, curv_sphere4):
    with pytest.raises(WeightError):
        radial_weight(sphere4, curv_sphere4, 0.0)
    with pytest.raises(WeightError):
        distance_weight(sphere4, 0, -1.0)
    with pytest.raises(WeightError):
        distance_weight(sphere4, 10 ** 6, 1.0)
    with pytest.raises(WeightError, match="unknown curvature bound"):
        distance_weight(sphere4, 0, 1.0, {"kappa": 1.0})
    with pytest.raises(WeightError):
        custom_weight(sphere4, np.ones(3), curv_sphere4)
    bad = np.ones(sphere4.n_vertices)
    bad[5] = np.nan
    with pytest.raises(WeightError, match="vertex 5"):
        custom_weight(sphere4, bad, curv_sphere4)


def test_weight_csv(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("vertex,f\n2,0.5\n0,1.5\n1,-2\n")
    np.testing.assert_array_equal(load_weight_csv(p, 3), [1.5, -2.0, 0.5])
    cases = {
        "0,1\n1,2\n": "missing",
        "0,1\n0,2\n1,3\n2,4\n": "twice",
        "0,1\n1,nan\n2,3\n": "non-finite",
        "0,1\n1,2\n5,3\n": "out of range",
        "0,1\n1,x\n2,3\n": "expected",
    }
    for text, msg in cases.items():
        p.write_text(text)
        with pytest.raises(WeightError, match=msg):
            load_weight_csv(p, 3)


def test_samples_are_averages(sphere3):
    w = smooth_random_weight(sphere3, seed=1)
    fv, fe, ff = w.samples(sphere3)
    np.testing.assert_allclose(fe, w.f[sphere3.edges].mean(axis=1))
    np.testing.assert_allclose(ff, w.f[sphere3.faces].mean(axis=1))


def test_random_weight_is_seeded(sphere3):
    a = smooth_random_weight(sphere3, seed=4)
    b = smooth_random_weight(sphere3, seed=4)
    c = smooth_random_weight(sphere3, seed=5)
    assert np.array_equal(a.f, b.f)
    assert not np.allclose(a.f, c.f)
    assert a.describe() == "random(seed=4)"


def test_zero_weight(sphere3):
    w = zero_weight(sphere3)
    assert w.is_zero and w.describe() == "zero"
    assert not w.f.any()


def test_tf_closed_form_mismatch_detected(offcentre):
    m, c = offcentre
    w = radial_weight(m, c, 1.0)
    other = estimate_curvature(make_sphere(1.0, 4))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(WeightError, match="closed-form"):
            t_f_on_forms(w, 1, other)
