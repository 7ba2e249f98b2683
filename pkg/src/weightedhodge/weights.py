"""Weight functions f and their derived fields.

Every :class:`WeightField` carries, per vertex, the tangential gradient (in
the tangent frames of the curvature field it was built with), ``|df|²``,
the positive Laplacian ``Δf`` and the Hessian as a 2x2 matrix in the same
frames, so it can be combined pointwise with the shape operator.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csgraph

from .errors import WeightError
from .extalg import extend_field
from .geometry import CurvatureField, estimate_curvature, fit_quadrics
from .mesh import SurfaceMesh, dual_volumes

__all__ = [
    "WeightField",
    "ComparisonData",
    "zero_weight",
    "radial_weight",
    "custom_weight",
    "distance_weight",
    "smooth_random_weight",
    "load_weight_csv",
    "face_gradients",
    "t_f_on_forms",
    "scal_f",
    "H_l",
    "dH_l",
]


@dataclass(frozen=True, eq=False)
class WeightField:
    kind: str
    params: dict
    f: np.ndarray            # (V,)
    grad_faces: np.ndarray   # (F, 3) gradient of f on each face, ambient coordinates
    grad: np.ndarray         # (V, 2) tangential gradient in the curvature frames
    df2: np.ndarray          # (V,) |df|²
    lap: np.ndarray          # (V,) Δf, positive convention
    hess: np.ndarray         # (V, 2, 2) Hessian in the curvature frames
    extra: dict = field(default_factory=dict)   # closed-form ingredients (radial: "Xn" = <X,ν>)

    @property
    def is_zero(self):
        return self.kind == "zero"

    def samples(self, m: SurfaceMesh):
        """f at vertices, edge midpoints and face barycentres (endpoint averages)."""
        f = self.f
        return f, f[m.edges].mean(axis=1), f[m.faces].mean(axis=1)

    def describe(self):
        if not self.params:
            return self.kind
        args = ",".join(f"{k}={v:.12g}" if isinstance(v, float) else f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}({args})"


@dataclass(frozen=True, eq=False)
class ComparisonData:
    """Geodesic-distance data for weights ``f = a d²/2``."""

    x0: int
    d: np.ndarray
    bounds: dict
    H_values: dict           # bound name -> H_l(d) per vertex
    singular: np.ndarray     # vertices with sqrt(l) d >= pi for some positive bound
    error_bound: np.ndarray  # a priori bound on (graph distance - true distance) on flat patches

    def dH(self, key, n=2):
        return dH_l(self.d, self.bounds[key], n)


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


def H_l(r, l, n=2):
    """Comparison mean curvature of geodesic spheres of radius r in the model space of curvature l."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        if l > 0:
            s = np.sqrt(l)
            return (n - 1) * s / np.tan(s * r)
        if l == 0:
            return (n - 1) / r
        s = np.sqrt(-l)
        return (n - 1) * s / np.tanh(s * r)


def dH_l(r, l, n=2):
    """``r H_l(r)``, continuous at r = 0 with value n - 1."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = r * H_l(r, l, n)
    return np.where(r == 0, float(n - 1), out)


def face_gradients(m: SurfaceMesh, f):
    """Gradient of the piecewise linear interpolant of f on every face."""
    v, F = m.vertices, m.faces
    cross = np.cross(v[F[:, 1]] - v[F[:, 0]], v[F[:, 2]] - v[F[:, 0]])
    dbl = np.linalg.norm(cross, axis=1)
    nrm = cross / dbl[:, None]
    g = np.zeros((len(F), 3))
    for k in range(3):
        # gradient of the hat function at corner k: n x (opposite edge) / 2A
        e = v[F[:, (k + 2) % 3]] - v[F[:, (k + 1) % 3]]
        g += f[F[:, k], None] * np.cross(nrm, e) / dbl[:, None]
    return g


def _vertex_laplacian(m, dv, f):
    w = dv.edge_dual_lengths / dv.edge_lengths
    return (m.d0.T @ (w * (m.d0 @ f))) / dv.vertex_areas


def zero_weight(m: SurfaceMesh) -> WeightField:
    V, F = m.n_vertices, m.n_faces
    arrs = (np.zeros(V), np.zeros((F, 3)), np.zeros((V, 2)), np.zeros(V), np.zeros(V), np.zeros((V, 2, 2)))
    _freeze(*arrs)
    return WeightField("zero", {}, *arrs)


def radial_weight(m: SurfaceMesh, c: CurvatureField, a: float) -> WeightField:
    """``f = a |X|² / 2`` with every derived field in closed form."""
    a = float(a)
    if not a > 0:
        raise WeightError("radial weight needs a > 0")
    X = m.vertices
    nu = c.normals
    Xn = np.einsum("vk,vk->v", X, nu)
    X2 = np.einsum("vk,vk->v", X, X)
    f = 0.5 * a * X2
    grad = a * np.einsum("vkj,vk->vj", c.frames, X)
    df2 = a * a * np.maximum(X2 - Xn ** 2, 0.0)
    lap = a * (-c.dim + Xn * np.trace(c.shape, axis1=1, axis2=2))
    hess = a * (np.eye(2) - Xn[:, None, None] * c.shape)
    bary = X[m.faces].mean(axis=1)
    fn = m.face_normals
    grad_faces = a * (bary - np.einsum("fk,fk->f", bary, fn)[:, None] * fn)
    _freeze(f, grad_faces, grad, df2, lap, hess)
    _freeze(Xn)
    return WeightField("radial", {"a": a}, f, grad_faces, grad, df2, lap, hess, {"Xn": Xn})


def custom_weight(m: SurfaceMesh, samples, c: CurvatureField | None = None, dv=None,
                  kind="custom", params=None) -> WeightField:
    """Derived fields of an arbitrary vertex function, all computed numerically."""
    f = np.array(samples, dtype=float).reshape(-1)
    if f.shape != (m.n_vertices,):
        raise WeightError(f"expected {m.n_vertices} samples, got {f.size}")
    if not np.all(np.isfinite(f)):
        raise WeightError(f"non-finite weight sample at vertex {int(np.flatnonzero(~np.isfinite(f))[0])}")
    if c is None:
        c = estimate_curvature(m)
    if dv is None:
        dv = dual_volumes(m)
    coef, _ = fit_quadrics(m, f, c.normals, frames=c.frames)
    grad = coef[:, :2].copy()
    hess = np.stack([np.stack([coef[:, 2], coef[:, 3]], -1),
                     np.stack([coef[:, 3], coef[:, 4]], -1)], -2)
    df2 = np.sum(grad ** 2, axis=1)
    lap = _vertex_laplacian(m, dv, f)
    grad_faces = face_gradients(m, f)
    _freeze(f, grad_faces, grad, df2, lap, hess)
    return WeightField(kind, dict(params or {}), f, grad_faces, grad, df2, lap, hess)


def smooth_random_weight(m: SurfaceMesh, seed=0, amplitude=0.5, modes=4, c=None, dv=None) -> WeightField:
    """Seeded random smooth function: a few low-frequency sinusoids of the position."""
    rng = np.random.default_rng(seed)
    X = m.vertices
    scale = np.ptp(X, axis=0).max()
    dirs = rng.normal(size=(modes, 3))
    freq = rng.uniform(0.5, 1.5, size=modes) * (2 * np.pi / scale)
    phase = rng.uniform(0, 2 * np.pi, size=modes)
    amp = rng.uniform(-1, 1, size=modes)
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    f = amplitude * np.sum(amp * np.sin((X @ dirs.T) * freq + phase), axis=1) / modes
    return custom_weight(m, f, c=c, dv=dv, kind="random", params={"seed": int(seed)})


def distance_weight(m: SurfaceMesh, x0: int, a: float, bounds=None, c=None, dv=None):
    """``f = a d_{x0}² / 2`` with d the shortest edge-path distance.

    ``bounds`` is ``{"l": l}`` (Ricci lower bound ``(n-1) l``) and/or
    ``{"l1": l1, "l2": l2}`` (sectional curvature between l1 and l2).
    Vertices where a positive bound puts d past the first conjugate point
    (``sqrt(l) d >= pi``) are flagged and a warning is issued.
    """
    a = float(a)
    if not a > 0:
        raise WeightError("distance weight needs a > 0")
    x0 = int(x0)
    if not 0 <= x0 < m.n_vertices:
        raise WeightError(f"base vertex {x0} out of range")
    X = m.vertices
    e = m.edges
    lengths = np.linalg.norm(X[e[:, 1]] - X[e[:, 0]], axis=1)
    G = m.adjacency.copy().tocoo()
    G.data = np.linalg.norm(X[G.row] - X[G.col], axis=1)
    d = csgraph.dijkstra(G.tocsr(), directed=False, indices=x0)
    if not np.all(np.isfinite(d)):
        raise WeightError("mesh is disconnected; distance undefined")
    bounds = {k: float(v) for k, v in (bounds or {}).items()}
    unknown = set(bounds) - {"l", "l1", "l2"}
    if unknown:
        raise WeightError(f"unknown curvature bound(s) {sorted(unknown)}")
    singular = np.zeros(m.n_vertices, dtype=bool)
    H_values = {}
    for key, l in bounds.items():
        H_values[key] = H_l(d, l)
        if l > 0:
            singular |= np.sqrt(l) * d >= np.pi
    if singular.any():
        warnings.warn(f"{int(singular.sum())} vertices lie beyond the comparison conjugate radius; "
                      "they are excluded from extremal bounds", RuntimeWarning, stacklevel=2)
    # edge paths on a triangulation whose edge directions leave no angular gap above
    # 60 degrees stretch straight segments by at most 2/sqrt(3); one extra edge for snapping
    error_bound = (2 / np.sqrt(3) - 1) * d + lengths.max()
    w = custom_weight(m, 0.5 * a * d ** 2, c=c, dv=dv, kind="distance",
                      params={"x0": x0, "a": a, **bounds})
    _freeze(d, singular, error_bound)
    return w, ComparisonData(x0, d, bounds, H_values, singular, error_bound)


def load_weight_csv(path, n_vertices):
    """Read a two-column CSV (vertex index, f). A header row is allowed."""
    f = np.full(n_vertices, np.nan)
    seen = np.zeros(n_vertices, dtype=bool)
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                idx, val = int(row[0]), float(row[1])
            except (ValueError, IndexError):
                if lineno == 1:
                    continue
                raise WeightError(f"{path}:{lineno}: expected 'vertex,value'") from None
            if not 0 <= idx < n_vertices:
                raise WeightError(f"{path}:{lineno}: vertex {idx} out of range")
            if seen[idx]:
                raise WeightError(f"{path}:{lineno}: vertex {idx} given twice")
            seen[idx] = True
            f[idx] = val
    if not seen.all():
        raise WeightError(f"{path}: missing values for {int((~seen).sum())} vertices")
    if not np.all(np.isfinite(f)):
        raise WeightError(f"{path}: non-finite weight value")
    return f


def t_f_on_forms(w: WeightField, p: int, c: CurvatureField | None = None, tol=1e-9):
    """Per-vertex ``T_f^{[p]}``, the Hessian of f extended to p-forms.

    For radial weights with ``c`` given, the closed form
    ``a (p I + II^{[p]}_{X^N})`` is evaluated as well and must agree.
    """
    if p not in (0, 1, 2):
        raise ValueError("p must be 0, 1 or 2")
    T = extend_field(w.hess, p)
    if w.kind == "radial" and c is not None and p > 0:
        a = w.params["a"]
        # X^N = <X,ν>ν, so II_{X^N} = -<X,ν> S
        Xn = w.extra["Xn"]
        closed = a * (p * np.eye(T.shape[-1]) - Xn[:, None, None] * extend_field(c.shape, p))
        err = np.abs(closed - T).max()
        if err > tol * max(np.abs(T).max(), a):
            raise WeightError(f"closed-form T_f disagrees with the Hessian extension by {err:.3g}")
    return T


def scal_f(c: CurvatureField, w: WeightField):
    return c.scal - w.lap
