import numpy as np
import pytest

from weightedhodge.dec import assemble, dirichlet_restrict
from weightedhodge.errors import SolverError
from weightedhodge.geometry import estimate_curvature
from weightedhodge.mesh import extract_domain, make_disk, make_sphere, make_torus
from weightedhodge.spectra import (
    classify,
    f_betti,
    first_exact_eigenvalue,
    kernel_tolerance,
    solve,
    write_eigenvectors_csv,
    write_spectrum_csv,
)
from weightedhodge.weights import radial_weight, smooth_random_weight

DISK_J01 = 2.404825557695773 ** 2       # first Dirichlet eigenvalue of the unit disk
DISK_J11 = 3.831705970207512 ** 2


@pytest.fixture(scope="module")
def sphere_ops(sphere4):
    return assemble(sphere4)


def test_sphere_functions(sphere_ops):
    lam = solve(sphere_ops.pair(0), 12).eigenvalues
    assert abs(lam[0]) < 1e-10
    np.testing.assert_allclose(lam[1:4], 2.0, rtol=0.02)
    np.testing.assert_allclose(lam[4:9], 6.0, rtol=0.02)
    assert lam[9] > 11.0


def test_sphere_one_forms(sphere_ops):
    res = classify(solve(sphere_ops.pair(1), 10), sphere_ops)
    np.testing.assert_allclose(res.eigenvalues[:6], 2.0, rtol=0.02)
    assert res.eigenvalues[6] > 5.5
    assert res.kernel_dim == 0
    assert sorted(res.tags[:6]) == ["co-exact"] * 3 + ["exact"] * 3
    assert first_exact_eigenvalue(sphere_ops, 1) == pytest.approx(2.0, rel=0.02)


def test_sphere_two_forms(sphere_ops):
    res = classify(solve(sphere_ops.pair(2), 6), sphere_ops)
    assert res.tags[0] == "harmonic"
    np.testing.assert_allclose(res.eigenvalues[1:4], 2.0, rtol=0.02)
    assert set(res.tags[1:4]) == {"exact"}
    assert first_exact_eigenvalue(sphere_ops, 2) == pytest.approx(2.0, rel=0.02)


def test_spectra_approximately_dual(sphere_ops):
    # Hodge duality holds in the limit only: V != F, so the 0- and 2-form spectra differ at O(h²)
    a = solve(sphere_ops.pair(0), 9).eigenvalues
    b = solve(sphere_ops.pair(2), 9).eigenvalues
    np.testing.assert_allclose(a[1:], b[1:], rtol=0.01)
    assert np.abs(a[1:] - b[1:]).max() > 1e-6


def test_disk_dirichlet(disk5):
    ops = assemble(disk5.mesh)
    lam = solve(dirichlet_restrict(ops.pair(0), disk5), 3).eigenvalues
    assert lam[0] == pytest.approx(DISK_J01, rel=0.03)
    assert lam[1] == pytest.approx(DISK_J11, rel=0.03)
    assert lam[1] == pytest.approx(lam[2], rel=1e-3)
    assert lam[1] / lam[0] == pytest.approx(2.539, abs=0.05)


def test_nested_domains_monotone(disk4):
    ops = assemble(disk4.mesh)
    inner = extract_domain(disk4.mesh, disk4.vertex_mask & (np.linalg.norm(disk4.mesh.vertices, axis=1) < 0.7))
    big = solve(dirichlet_restrict(ops.pair(0), disk4), 6).eigenvalues
    small = solve(dirichlet_restrict(ops.pair(0), inner), 6).eigenvalues
    assert np.all(small >= big - 1e-10)
    # the inner Dirichlet boundary lies between radius 0.7 and the next ring out
    h = 1.0 / 2 ** 4
    assert 1 / (0.7 + h) ** 2 <= small[0] / big[0] <= 1 / 0.7 ** 2


SMALL = {
    "sphere1": lambda: make_sphere(1.0, 1),
    "torus16": lambda: make_torus(2.0, 1.0, 16, 8),
}


@pytest.mark.parametrize("name", sorted(SMALL))
@pytest.mark.parametrize("p", [0, 1, 2])
def test_dense_lanczos_agree(name, p):
    m = SMALL[name]()
    w = smooth_random_weight(m, seed=1)
    pr = assemble(m, w=w).pair(p)
    if pr.dim > 500:
        pytest.skip("oracle comparison is limited to small instances")
    k = min(20, pr.dim - 2)
    a = solve(pr, k, method="lanczos").eigenvalues
    b = solve(pr, k, method="dense").eigenvalues
    scale = np.abs(b).max()
    np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-8 * scale)


@pytest.mark.parametrize("weight", ["zero", "radial", "random"])
def test_betti_numbers(weight, sphere4, torus, curv_sphere4, curv_torus):
    for m, c, want in ((sphere4, curv_sphere4, (1, 0, 1)), (torus, curv_torus, (1, 2, 1))):
        w = {"zero": None, "radial": radial_weight(m, c, 1.0) if weight == "radial" else None,
             "random": smooth_random_weight(m, seed=5, c=c) if weight == "random" else None}[weight]
        ops = assemble(m, w=w)
        assert tuple(f_betti(ops, p) for p in range(3)) == want


def test_torus_harmonic_forms_tagged(torus):
    ops = assemble(torus)
    res = classify(solve(ops.pair(1), 6), ops)
    assert res.tags[:2] == ("harmonic", "harmonic")
    assert "harmonic" not in res.tags[2:]


def test_classification_partitions_and_is_consistent(sphere_ops):
    res = classify(solve(sphere_ops.pair(1), 16), sphere_ops)
    assert len(res.tags) == res.k
    assert set(res.tags) <= {"harmonic", "exact", "co-exact"}
    for t, dn, cn, lam in zip(res.tags, res.d_norm2, res.codiff_norm2, res.eigenvalues):
        # ‖dω‖² + ‖δω‖² = λ for unit eigenforms
        assert dn + cn == pytest.approx(lam, rel=1e-6)
        if t == "exact":
            assert dn <= 1e-6 * lam
        if t == "co-exact":
            assert cn <= 1e-6 * lam


def test_eigenvectors_orthonormal_and_residuals(sphere_ops):
    pr = sphere_ops.pair(1)
    res = solve(pr, 8)
    G = res.eigenvectors.T @ (pr.M[:, None] * res.eigenvectors)
    np.testing.assert_allclose(G, np.eye(8), atol=1e-9)
    assert res.residuals.max() <= 1e-8 * pr.scale
    assert res.meta["max_residual"] == res.residuals.max()


def test_solve_is_deterministic(sphere_ops):
    a = solve(sphere_ops.pair(1), 8, seed=3)
    b = solve(sphere_ops.pair(1), 8, seed=3)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_solver_errors(sphere_ops):
    pr = sphere_ops.pair(0)
    with pytest.raises(SolverError):
        solve(pr, 0)
    with pytest.raises(SolverError):
        solve(pr, pr.dim + 1)
    with pytest.raises(SolverError, match="dense oracle"):
        solve(sphere_ops.pair(1), 4, method="dense")
    with pytest.raises(SolverError, match="unknown method"):
        solve(pr, 4, method="magic")
    with pytest.raises(SolverError):
        first_exact_eigenvalue(sphere_ops, 0)


def test_kernel_tolerance():
    assert kernel_tolerance([0.0, 1e-14, 2.0, 2.0, 2.0, 6.0, 6.0], scale=10.0) == pytest.approx(1e-8 * 3.6)
    assert kernel_tolerance([0.0, 0.0], scale=5.0) == pytest.approx(5e-8)


def test_csv_outputs(tmp_path, sphere_ops):
    res = classify(solve(sphere_ops.pair(0), 5), sphere_ops)
    write_spectrum_csv(res, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "index,eigenvalue,classification,residual"
    assert lines[1].split(",")[2] == "harmonic"
    assert len(lines) == 6
    write_eigenvectors_csv(res, tmp_path / "v.csv")
    rows = np.loadtxt(tmp_path / "v.csv", delimiter=",", skiprows=1)
    assert rows.shape == (sphere_ops.mesh.n_vertices, 6)


def test_restricted_result_scatter(disk4):
    ops = assemble(disk4.mesh)
    res = solve(dirichlet_restrict(ops.pair(1), disk4), 3)
    full = res.full_vectors(disk4.mesh.n_edges)
    assert np.all(full[disk4.mesh.boundary_edges] == 0)
    np.testing.assert_array_equal(full[disk4.interior_edges], res.eigenvectors)
