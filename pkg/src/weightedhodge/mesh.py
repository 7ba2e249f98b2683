"""Triangulated surfaces, analytic fixtures, dual volumes and Dirichlet domains.

A :class:`SurfaceMesh` is an oriented simplicial 2-complex embedded in R^3.
Edges are stored as sorted vertex pairs and carry the orientation
``low -> high``; faces keep the orientation they were given in, which must be
consistent across every shared edge.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.spatial import Delaunay

from .errors import MeshError

__all__ = [
    "SurfaceMesh",
    "DualVolumes",
    "DomainMesh",
    "load_mesh",
    "write_mesh",
    "make_sphere",
    "make_torus",
    "make_disk",
    "dual_volumes",
    "extract_domain",
]


class SurfaceMesh:
    """Oriented triangle mesh with edge/face incidence built at construction.

    Parameters
    ----------
    vertices : (V, 3) array_like of float
    faces : (F, 3) array_like of int
        Vertex triples. All faces must induce opposite orientations on each
        interior edge.

    Raises
    ------
    MeshError
        ``code`` is one of ``"index"``, ``"degenerate"``, ``"duplicate"``,
        ``"non_manifold"`` or ``"orientation"``.
    """

    def __init__(self, vertices, faces):
        vertices = np.array(vertices, dtype=float)
        faces = np.array(faces, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise MeshError("vertices must have shape (V, 3)", code="parse")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise MeshError("non-triangle face", code="non_triangle")
        if len(faces) == 0:
            raise MeshError("mesh has no faces", code="parse")
        if faces.min() < 0 or faces.max() >= len(vertices):
            raise MeshError("face index out of range", code="index")
        if not np.all(np.isfinite(vertices)):
            raise MeshError("non-finite vertex coordinate", code="parse")

        bad = (faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2]) | (faces[:, 0] == faces[:, 2])
        if bad.any():
            raise MeshError(f"face {int(np.flatnonzero(bad)[0])} repeats a vertex", code="degenerate")
        _, counts = np.unique(np.sort(faces, axis=1), axis=0, return_counts=True)
        if (counts > 1).any():
            raise MeshError("duplicate face", code="duplicate")

        vertices.setflags(write=False)
        faces.setflags(write=False)
        self.vertices = vertices
        self.faces = faces

        # half-edges (a,b), (b,c), (c,a) of every face
        he = np.stack([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]], axis=1)
        he_flat = he.reshape(-1, 2)
        keys = np.sort(he_flat, axis=1)
        edges, inverse, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        if (counts > 2).any():
            e = edges[np.flatnonzero(counts > 2)[0]]
            raise MeshError(f"non-manifold edge ({e[0]}, {e[1]})", code="non_manifold")
        signs = np.where(he_flat[:, 0] < he_flat[:, 1], 1, -1)
        orient_sum = np.bincount(inverse, weights=signs, minlength=len(edges))
        interior = counts == 2
        if np.any(orient_sum[interior] != 0):
            e = edges[np.flatnonzero(interior & (orient_sum != 0))[0]]
            raise MeshError(f"inconsistent orientation across edge ({e[0]}, {e[1]})", code="orientation")

        edges.setflags(write=False)
        self.edges = edges
        self.face_edges = inverse.reshape(-1, 3)
        self.face_edge_signs = signs.reshape(-1, 3)
        self.edge_face_count = counts
        self.boundary_edges = counts == 1
        bverts = np.zeros(len(vertices), dtype=bool)
        bverts[edges[self.boundary_edges].ravel()] = True
        self.boundary_vertices = bverts
        self.boundary_faces = self.boundary_edges[self.face_edges].any(axis=1)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def is_closed(self):
        return not self.boundary_edges.any()

    def n_simplices(self, p):
        return (self.n_vertices, self.n_edges, self.n_faces)[p]

    @cached_property
    def d0(self):
        """Signed vertex-to-edge incidence, shape (E, V)."""
        E = self.n_edges
        rows = np.repeat(np.arange(E), 2)
        cols = self.edges.ravel()
        vals = np.tile([-1.0, 1.0], E)
        return sparse.csr_matrix((vals, (rows, cols)), shape=(E, self.n_vertices))

    @cached_property
    def d1(self):
        """Signed edge-to-face incidence, shape (F, E)."""
        F = self.n_faces
        rows = np.repeat(np.arange(F), 3)
        return sparse.csr_matrix(
            (self.face_edge_signs.ravel().astype(float), (rows, self.face_edges.ravel())),
            shape=(F, self.n_edges),
        )

    @cached_property
    def adjacency(self):
        """Symmetric 0/1 vertex adjacency (CSR)."""
        V = self.n_vertices
        i, j = self.edges[:, 0], self.edges[:, 1]
        A = sparse.coo_matrix((np.ones(2 * len(i)), (np.r_[i, j], np.r_[j, i])), shape=(V, V))
        A = A.tocsr()
        A.data[:] = 1.0
        return A

    def rings(self, k):
        """Per-vertex index arrays of the closed k-ring neighbourhood (vertex excluded)."""
        cache = self.__dict__.setdefault("_rings", {})
        if k in cache:
            return cache[k]
        V = self.n_vertices
        A = self.adjacency + sparse.identity(V, format="csr")
        R = sparse.identity(V, format="csr")
        for _ in range(k):
            R = R @ A
            R.data[:] = 1.0
        R = R.tocsr()
        out = []
        for v in range(V):
            nb = R.indices[R.indptr[v]:R.indptr[v + 1]]
            out.append(nb[nb != v])
        cache[k] = out
        return out

    @cached_property
    def vertex_faces(self):
        """Sparse (V, F) incidence with ones where a face contains a vertex."""
        F = self.n_faces
        rows = self.faces.ravel()
        cols = np.repeat(np.arange(F), 3)
        return sparse.csr_matrix((np.ones(3 * F), (rows, cols)), shape=(self.n_vertices, F))

    @cached_property
    def face_normals(self):
        """Unit normals induced by face orientation."""
        v = self.vertices
        f = self.faces
        n = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
        norm = np.linalg.norm(n, axis=1)
        return n / np.where(norm > 0, norm, 1.0)[:, None]

    @cached_property
    def corner_angles(self):
        """Interior angle at each face corner, shape (F, 3)."""
        v = self.vertices
        f = self.faces
        out = np.empty(f.shape)
        for k in range(3):
            a = v[f[:, (k + 1) % 3]] - v[f[:, k]]
            b = v[f[:, (k + 2) % 3]] - v[f[:, k]]
            cos = np.einsum("ij,ij->i", a, b)
            sin = np.linalg.norm(np.cross(a, b), axis=1)
            out[:, k] = np.arctan2(sin, cos)
        return out

    def flipped(self):
        """Same surface with every face orientation reversed."""
        return SurfaceMesh(self.vertices, self.faces[:, ::-1])

    def __repr__(self):
        return f"SurfaceMesh(V={self.n_vertices}, E={self.n_edges}, F={self.n_faces}, chi={self.euler_characteristic})"


@dataclass(frozen=True)
class DualVolumes:
    """Dual cell measures of a mesh.

    ``edge_fallback`` marks edges whose circumcentric dual was not positive
    and which therefore carry the barycentric broken-segment length.
    """

    vertex_areas: np.ndarray
    edge_dual_lengths: np.ndarray
    edge_lengths: np.ndarray
    face_areas: np.ndarray
    edge_fallback: np.ndarray

    @property
    def total_area(self):
        return float(self.face_areas.sum())


@dataclass(frozen=True)
class DomainMesh:
    """A surface together with the simplices that carry Dirichlet unknowns.

    Every simplex touching an excluded vertex is removed, so forms on the
    domain vanish identically there.
    """

    mesh: SurfaceMesh
    interior_vertices: np.ndarray
    interior_edges: np.ndarray
    interior_faces: np.ndarray
    vertex_mask: np.ndarray = field(repr=False)

    def interior(self, p):
        return (self.interior_vertices, self.interior_edges, self.interior_faces)[p]

    @property
    def is_whole(self):
        return bool(self.vertex_mask.all())

    @property
    def boundary_vertices(self):
        """Excluded vertices sharing an edge with a kept vertex."""
        e = self.mesh.edges
        m = self.vertex_mask
        cross = m[e[:, 0]] != m[e[:, 1]]
        b = np.zeros_like(m)
        b[e[cross].ravel()] = True
        return np.flatnonzero(b & ~m)


def _mixed_areas(m: SurfaceMesh, areas):
    # Voronoi share of each corner; obtuse faces split area/2 to the obtuse
    # corner and area/4 to the others, so the shares still partition the face
    v, f = m.vertices, m.faces
    ang = m.corner_angles
    cot = 1.0 / np.tan(ang)
    share = np.empty(f.shape)
    for k in range(3):
        i, j, l = f[:, k], f[:, (k + 1) % 3], f[:, (k + 2) % 3]
        share[:, k] = (np.sum((v[j] - v[i]) ** 2, axis=1) * cot[:, (k + 2) % 3]
                       + np.sum((v[l] - v[i]) ** 2, axis=1) * cot[:, (k + 1) % 3]) / 8.0
    obtuse = ang >= np.pi / 2
    bad = obtuse.any(axis=1)
    share[bad] = np.where(obtuse[bad], 0.5, 0.25) * areas[bad, None]
    return np.bincount(f.ravel(), weights=share.ravel(), minlength=m.n_vertices)


def dual_volumes(m: SurfaceMesh, scheme="circumcentric") -> DualVolumes:
    """Lumped dual cells.

    ``scheme="circumcentric"`` (default): vertex cells are mixed Voronoi
    areas and edge duals have length ``|e| (cot a + cot b) / 2``. Where that
    length is not positive (non-Delaunay edges) the edge falls back to the
    barycentric broken segment from its midpoint to the incident face
    barycentres, so every entry stays strictly positive.

    ``scheme="barycentric"``: one third of every incident face per vertex
    and broken-segment edge duals everywhere.
    """
    if scheme not in ("circumcentric", "barycentric"):
        raise ValueError(f"unknown dual scheme {scheme!r}")
    v = m.vertices
    f = m.faces
    cross = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    scale = max(np.ptp(v, axis=0).max(), 1.0) ** 2
    tiny = areas <= 1e-14 * scale
    if tiny.any():
        i = int(np.flatnonzero(tiny)[0])
        raise MeshError(f"degenerate face {i} has zero area", code="degenerate")

    e = m.edges
    fe = m.face_edges
    edge_lengths = np.linalg.norm(v[e[:, 1]] - v[e[:, 0]], axis=1)
    bary = v[f].mean(axis=1)
    mids = 0.5 * (v[e[:, 0]] + v[e[:, 1]])
    seg = np.linalg.norm(bary[:, None, :] - mids[fe], axis=2)
    bary_len = np.bincount(fe.ravel(), weights=seg.ravel(), minlength=m.n_edges)

    if scheme == "barycentric":
        vertex_areas = np.bincount(f.ravel(), weights=np.repeat(areas / 3.0, 3), minlength=m.n_vertices)
        dual_len = bary_len
        fallback = np.ones(m.n_edges, dtype=bool)
    else:
        vertex_areas = _mixed_areas(m, areas)
        # face edge k is (k, k+1); the opposite corner is k+2
        half_cot = 0.5 / np.tan(m.corner_angles[:, [2, 0, 1]])
        ratio = np.bincount(fe.ravel(), weights=half_cot.ravel(), minlength=m.n_edges)
        dual_len = ratio * edge_lengths
        fallback = dual_len <= 1e-12 * edge_lengths
        dual_len = np.where(fallback, bary_len, dual_len)

    for a in (vertex_areas, edge_lengths, dual_len, areas, fallback):
        a.setflags(write=False)
    return DualVolumes(vertex_areas, dual_len, edge_lengths, areas, fallback)


def extract_domain(m: SurfaceMesh, predicate) -> DomainMesh:
    """Keep the simplices whose vertices all satisfy ``predicate``.

    ``predicate`` is either a boolean mask over vertices or a callable taking
    the (V, 3) vertex array and returning such a mask.
    """
    mask = predicate(m.vertices) if callable(predicate) else predicate
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (m.n_vertices,):
        raise MeshError("vertex predicate must give one boolean per vertex", code="domain")
    if not mask.any():
        raise MeshError("domain has empty interior", code="domain")
    iv = np.flatnonzero(mask)
    ie = np.flatnonzero(mask[m.edges].all(axis=1))
    iff = np.flatnonzero(mask[m.faces].all(axis=1))
    mask = mask.copy()
    for a in (iv, ie, iff, mask):
        a.setflags(write=False)
    return DomainMesh(m, iv, ie, iff, mask)


# ---------------------------------------------------------------------------
# fixtures


def _icosahedron():
    t = (1.0 + 5.0 ** 0.5) / 2.0
    v = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
    ], dtype=float)
    f = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ])
    return v / np.linalg.norm(v, axis=1, keepdims=True), f


def _subdivide(v, f):
    he = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    edges, inv = np.unique(np.sort(he, axis=1), axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    F = len(f)
    mid = len(v) + inv.reshape(3, F).T  # columns: ab, bc, ca
    new_v = 0.5 * (v[edges[:, 0]] + v[edges[:, 1]])
    ab, bc, ca = mid[:, 0], mid[:, 1], mid[:, 2]
    a, b, c = f[:, 0], f[:, 1], f[:, 2]
    new_f = np.concatenate([
        np.stack([a, ab, ca], axis=1),
        np.stack([b, bc, ab], axis=1),
        np.stack([c, ca, bc], axis=1),
        np.stack([ab, bc, ca], axis=1),
    ])
    return np.vstack([v, new_v]), new_f


def make_sphere(radius=1.0, level=3) -> SurfaceMesh:
    """Icosphere: ``level`` rounds of 4-to-1 subdivision, projected to the sphere.

    Faces are oriented so that induced normals point outward.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    v, f = _icosahedron()
    for _ in range(level):
        v, f = _subdivide(v, f)
        v = v / np.linalg.norm(v, axis=1, keepdims=True)
    n = np.cross(v[f[:, 1]] - v[f[:, 0]], v[f[:, 2]] - v[f[:, 0]])
    if np.einsum("ij,ij->i", n, v[f].mean(axis=1)).min() < 0:
        f = f[:, ::-1]
    return SurfaceMesh(radius * v, f)


def make_torus(R=2.0, r=1.0, nu=32, nv=16) -> SurfaceMesh:
    """Torus of revolution around the z axis, outward oriented.

    ``nu`` vertices around the axis, ``nv`` around the tube. For even ``nv``
    odd rows are shifted half a cell in ``u`` so that all triangles are
    acute; odd ``nv`` falls back to a plain diagonal split of the grid.
    """
    if nu < 3 or nv < 3:
        raise ValueError("nu and nv must be >= 3")
    if not 0 < r < R:
        raise ValueError("need 0 < r < R")
    stagger = nv % 2 == 0
    i, j = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
    shift = 0.5 * (j % 2) if stagger else 0.0 * j
    U = 2 * np.pi * (i + shift) / nu
    W = 2 * np.pi * j / nv
    ring = R + r * np.cos(W)
    verts = np.stack([ring * np.cos(U), ring * np.sin(U), r * np.sin(W)], axis=-1).reshape(-1, 3)

    i, j = i.ravel(), j.ravel()
    idx = lambda a, b: (a % nu) * nv + (b % nv)  # noqa: E731
    if stagger:
        even = j % 2 == 0
        # even row j: vertex i sits below the gap between i-1 and i of row j+1
        up = np.where(even[:, None],
                      np.stack([idx(i, j), idx(i + 1, j), idx(i, j + 1)], 1),
                      np.stack([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)], 1))
        down = np.where(even[:, None],
                        np.stack([idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)], 1),
                        np.stack([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)], 1))
        faces = np.concatenate([up, down])
    else:
        v00, v10, v11, v01 = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
        faces = np.concatenate([np.stack([v00, v10, v11], 1), np.stack([v00, v11, v01], 1)])
    return SurfaceMesh(verts, faces)


def make_disk(radius=1.0, level=3) -> DomainMesh:
    """Flat disk in the plane z = 0 built from concentric rings.

    ``2**level`` rings, ring ``i`` holding ``6 i`` equally spaced vertices
    (odd rings rotated half a step), joined by a Delaunay triangulation.
    The boundary loop has ``6 * 2**level`` vertices and the returned domain
    excludes it.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be positive")
    N = 2 ** level
    pts = [np.zeros((1, 2))]
    for i in range(1, N + 1):
        th = 2 * np.pi * (np.arange(6 * i) + 0.5 * (i % 2)) / (6 * i)
        pts.append((radius * i / N) * np.stack([np.cos(th), np.sin(th)], axis=1))
    xy = np.vstack(pts)
    faces = Delaunay(xy).simplices.copy()
    a = xy[faces[:, 1]] - xy[faces[:, 0]]
    b = xy[faces[:, 2]] - xy[faces[:, 0]]
    cw = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0] < 0
    faces[cw] = faces[cw][:, [0, 2, 1]]
    verts = np.column_stack([xy, np.zeros(len(xy))])
    mesh = SurfaceMesh(verts, faces)
    return extract_domain(mesh, ~mesh.boundary_vertices)


# ---------------------------------------------------------------------------
# file formats


def _tokens(path):
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                yield line


def _load_off(path):
    lines = _tokens(path)
    try:
        head = next(lines)
        if head.upper().startswith("OFF"):
            rest = head[3:].split()
            counts = rest if rest else next(lines).split()
        else:
            raise MeshError("missing OFF header", code="parse")
        nv, nf = int(counts[0]), int(counts[1])
        verts = [[float(x) for x in next(lines).split()[:3]] for _ in range(nv)]
        faces = []
        for _ in range(nf):
            tok = next(lines).split()
            k = int(tok[0])
            if k != 3:
                raise MeshError("non-triangle face", code="non_triangle")
            faces.append([int(x) for x in tok[1:4]])
    except StopIteration:
        raise MeshError("unexpected end of OFF file", code="parse") from None
    except (ValueError, IndexError) as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"cannot parse OFF file: {exc}", code="parse") from None
    return verts, faces


def _load_obj(path):
    verts, faces = [], []
    try:
        for line in _tokens(path):
            tok = line.split()
            if tok[0] == "v":
                verts.append([float(x) for x in tok[1:4]])
            elif tok[0] == "f":
                if len(tok) != 4:
                    raise MeshError("non-triangle face", code="non_triangle")
                idx = []
                for t in tok[1:]:
                    k = int(t.split("/")[0])
                    idx.append(k - 1 if k > 0 else len(verts) + k)
                faces.append(idx)
    except ValueError as exc:
        if isinstance(exc, MeshError):
            raise
        raise MeshError(f"cannot parse OBJ file: {exc}", code="parse") from None
    return verts, faces


def load_mesh(path, format=None) -> SurfaceMesh:
    """Read a triangle mesh from an OFF or OBJ file."""
    fmt = (format or os.path.splitext(str(path))[1].lstrip(".")).upper()
    if fmt == "OFF":
        verts, faces = _load_off(path)
    elif fmt == "OBJ":
        verts, faces = _load_obj(path)
    else:
        raise MeshError(f"unknown mesh format {fmt!r}", code="parse")
    if not verts or not faces:
        raise MeshError("mesh file has no vertices or faces", code="parse")
    return SurfaceMesh(np.array(verts), np.array(faces))


def write_mesh(m: SurfaceMesh, path):
    """Write OFF with round-trip exact float formatting."""
    with open(path, "w") as fh:
        fh.write("OFF\n")
        fh.write(f"{m.n_vertices} {m.n_faces} {m.n_edges}\n")
        for x, y, z in m.vertices:
            fh.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")
        for a, b, c in m.faces:
            fh.write(f"3 {a} {b} {c}\n")
