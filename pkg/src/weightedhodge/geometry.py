"""Per-vertex curvature of an immersed surface in R^3.

Sign conventions, used everywhere in the package:

* ``normals`` are outward (induced by face orientation; fixtures are built
  outward), and ``shape`` is ``S = dν`` for that normal, so a round sphere of
  radius r has ``S = I / r`` and ``H = tr S / 2 = 1 / r > 0``.
* The mean curvature vector is ``-H ν`` (it points inward on spheres), so for
  a normal vector Z the second fundamental form in direction Z is
  ``II_Z = -<Z, ν> S``. In particular the inward normal gives ``II = S``;
  that is what :func:`sff_on_forms` extends to forms.
* Laplacians are positive (``Δ = δ d``), hence ``Δ X = n H ν``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import EstimatorError
from .extalg import SymEndo, extend_field
from .mesh import SurfaceMesh, dual_volumes

__all__ = [
    "CurvatureField",
    "estimate_curvature",
    "tangent_frames",
    "vertex_normals",
    "fit_quadrics",
    "sff_on_forms",
    "bochner_ext",
    "gamma_M",
]


@dataclass(frozen=True, eq=False)
class CurvatureField:
    """Curvature samples at the vertices of a surface (n = 2, codimension 1)."""

    normals: np.ndarray          # (V, 3) outward unit normals
    frames: np.ndarray           # (V, 3, 2) orthonormal tangent basis (columns)
    shape: np.ndarray            # (V, 2, 2) S = dν in the tangent basis
    k1: np.ndarray
    k2: np.ndarray
    H: np.ndarray                # tr S / n
    H_laplacian: np.ndarray      # <Δ X, ν> / n from the discrete Laplacian
    K: np.ndarray                # angle defect / dual area, det S on the boundary
    dim: int = 2

    @property
    def n_vertices(self):
        return len(self.H)

    @property
    def mean_curvature_vector(self):
        return -self.H[:, None] * self.normals

    @property
    def scal(self):
        return 2.0 * self.K

    @property
    def sff_norm2(self):
        return self.k1 ** 2 + self.k2 ** 2

    @property
    def gauss_fit(self):
        return self.k1 * self.k2

    def shape_endo(self, v):
        return SymEndo(self.shape[v])

    @cached_property
    def gamma(self):
        return gamma_M(self)

    def flipped(self):
        """Same field for the opposite normal orientation."""
        frames = self.frames[:, :, ::-1]
        S = -self.shape[:, ::-1, ::-1]
        return CurvatureField(-self.normals, frames, S, -self.k2, -self.k1, -self.H,
                              -self.H_laplacian, self.K, self.dim)


def vertex_normals(m: SurfaceMesh):
    """Area-weighted average of incident face normals."""
    v, f = m.vertices, m.faces
    cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    acc = np.zeros_like(v)
    for k in range(3):
        np.add.at(acc, f[:, k], cross)
    norm = np.linalg.norm(acc, axis=1)
    if np.any(norm == 0):
        raise EstimatorError(f"vertex {int(np.argmin(norm))} has no normal")
    return acc / norm[:, None]


def tangent_frames(normals):
    """Right-handed orthonormal tangent bases, shape (V, 3, 2)."""
    nrm = np.asarray(normals, dtype=float)
    axis = np.zeros_like(nrm)
    axis[np.arange(len(nrm)), np.argmin(np.abs(nrm), axis=1)] = 1.0
    t1 = np.cross(nrm, axis)
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.cross(nrm, t1)
    return np.stack([t1, t2], axis=2)


def _design(x, y):
    return np.stack([x, y, 0.5 * x * x, x * y, 0.5 * y * y], axis=-1)


def _solve_group(A, b):
    # batched least squares through the SVD; returns solution and a rank flag
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    ok = s[:, -1] > 1e-8 * s[:, 0]
    s_inv = np.where(s > 1e-12 * s[:, :1], 1.0 / np.where(s > 0, s, 1.0), 0.0)
    coef = np.einsum("gji,gj,gkj,gk->gi", Vt, s_inv, U, b)
    return coef, ok


def fit_quadrics(m: SurfaceMesh, values, normals, frames=None, rings=(2, 3)):
    """Fit ``g(x,y) - g(0) = a x + b y + (A x² + 2 B x y + C y²) / 2`` around each vertex.

    ``values`` is either None (fit the height along ``normals``) or a
    per-vertex scalar. Coordinates are the neighbour offsets projected onto
    the tangent frame of ``normals``. Vertices whose 2-ring does not
    determine the fit retry with the 3-ring; failure after that raises.

    ``frames`` defaults to :func:`tangent_frames` of ``normals``.
    Returns ``(coef, frames)`` with ``coef`` of shape (V, 5).
    """
    X = m.vertices
    V = m.n_vertices
    if frames is None:
        frames = tangent_frames(normals)
    coef = np.zeros((V, 5))
    todo = np.arange(V)
    for k in rings:
        if len(todo) == 0:
            break
        nb = m.rings(k)
        sizes = np.array([len(nb[v]) for v in todo])
        failed = []
        for s in np.unique(sizes):
            vs = todo[sizes == s]
            if s < 5:
                failed.extend(vs.tolist())
                continue
            idx = np.stack([nb[v] for v in vs])
            P = X[idx] - X[vs][:, None, :]
            x = np.einsum("gsk,gk->gs", P, frames[vs, :, 0])
            y = np.einsum("gsk,gk->gs", P, frames[vs, :, 1])
            if values is None:
                rhs = np.einsum("gsk,gk->gs", P, normals[vs])
            else:
                rhs = values[idx] - values[vs][:, None]
            h = np.sqrt(np.mean(x * x + y * y, axis=1))[:, None]
            A = _design(x / h, y / h)
            c, ok = _solve_group(A, rhs)
            c[:, :2] /= h
            c[:, 2:] /= h ** 2
            coef[vs[ok]] = c[ok]
            failed.extend(vs[~ok].tolist())
        todo = np.array(sorted(failed), dtype=int)
    if len(todo):
        raise EstimatorError(f"quadric fit is rank deficient at vertex {int(todo[0])}")
    return coef, frames


def _angle_defect(m: SurfaceMesh):
    ang = np.bincount(m.faces.ravel(), weights=m.corner_angles.ravel(), minlength=m.n_vertices)
    return 2 * np.pi - ang


def estimate_curvature(m: SurfaceMesh, dv=None) -> CurvatureField:
    """Shape operator by quadric fits, K by angle defect, H cross-checked by Δ X."""
    if dv is None:
        dv = dual_volumes(m)
    nrm = vertex_normals(m)
    # one correction step: tilt the normal by the fitted gradient, then refit
    for _ in range(2):
        coef, frames = fit_quadrics(m, None, nrm)
        grad = coef[:, :2]
        tilt = nrm - np.einsum("vkj,vj->vk", frames, grad)
        nrm = tilt / np.linalg.norm(tilt, axis=1, keepdims=True)
    coef, frames = fit_quadrics(m, None, nrm)
    g = np.sqrt(1.0 + np.sum(coef[:, :2] ** 2, axis=1))
    hess = np.stack([np.stack([coef[:, 2], coef[:, 3]], -1),
                     np.stack([coef[:, 3], coef[:, 4]], -1)], -2)
    S = -hess / g[:, None, None]
    S = 0.5 * (S + np.swapaxes(S, 1, 2))
    ev = np.linalg.eigvalsh(S)
    k2, k1 = ev[:, 0], ev[:, 1]
    H = 0.5 * (k1 + k2)

    w = dv.edge_dual_lengths / dv.edge_lengths
    L = m.d0.T @ (w[:, None] * (m.d0 @ m.vertices))
    H_lap = np.einsum("vk,vk->v", L / dv.vertex_areas[:, None], nrm) / 2.0

    K = _angle_defect(m) / dv.vertex_areas
    bnd = m.boundary_vertices
    K[bnd] = (k1 * k2)[bnd]
    for a in (nrm, frames, S, k1, k2, H, H_lap, K):
        a.setflags(write=False)
    return CurvatureField(nrm, frames, S, k1, k2, H, H_lap, K)


def sff_on_forms(c: CurvatureField, p: int):
    """Per-vertex ``II^{[p]}`` for the inward normal, shape (V, C, C)."""
    if p not in (0, 1, 2):
        raise ValueError("p must be 0, 1 or 2")
    return extend_field(c.shape, p)


def bochner_ext(c: CurvatureField, p: int):
    """Per-vertex ``𝔅^{[p]} = n H II^{[p]} - (II^{[p]})²`` (flat ambient space)."""
    B = sff_on_forms(c, p)
    return c.dim * c.H[:, None, None] * B - B @ B


def gamma_M(c: CurvatureField):
    """Largest product of distinct principal curvatures; for surfaces max K."""
    return float(np.max(c.K))
