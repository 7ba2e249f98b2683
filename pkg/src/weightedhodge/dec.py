"""Weighted discrete exterior calculus on triangle meshes.

Forms are cochains: one value per p-simplex. The weighted inner product on
p-cochains is the diagonal star ``W_p^f = e^{-f} W_p``, the codifferential is
the exact adjoint ``δ_f = (W_{p-1}^f)^{-1} d^T W_p^f`` and the drift Hodge
Laplacian on p-forms is represented by the symmetric pair

    L_p^f = d_p^T W_{p+1}^f d_p + W_p^f d_{p-1} (W_{p-1}^f)^{-1} d_{p-1}^T W_p^f,
    M_p^f = W_p^f,

whose generalized eigenvalues are the eigenvalues of Δ_f.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from .errors import AssemblyError
from .mesh import DomainMesh, DualVolumes, SurfaceMesh, dual_volumes
from .weights import WeightField, zero_weight

__all__ = [
    "DecOperators",
    "TwistedOperators",
    "OperatorPair",
    "assemble",
    "assemble_twisted",
    "dirichlet_restrict",
    "write_coo",
]

EXP_LIMIT = 700.0


@dataclass(frozen=True, eq=False)
class OperatorPair:
    """A symmetric stiffness matrix with its diagonal mass (a 1-D array)."""

    L: sparse.csr_matrix
    M: np.ndarray
    p: int
    index: np.ndarray | None = None    # simplices kept by a restriction, None for all

    @property
    def dim(self):
        return self.L.shape[0]

    @property
    def Mmat(self):
        return sparse.diags(self.M, format="csr")

    @property
    def scale(self):
        """Rough size of the spectrum: largest diagonal ratio L_ii / M_i."""
        d = self.L.diagonal() / self.M
        return float(max(np.abs(d).max(), 1e-300)) if d.size else 1.0


def _diag(x):
    return sparse.diags(x, format="csr")


def _sym(A):
    A = A.tocsr()
    return ((A + A.T) * 0.5).tocsr()


def _check_stars(stars, label):
    for p, s in enumerate(stars):
        bad = ~(np.isfinite(s) & (s > 0))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise AssemblyError(f"{label} star W{p} has a non-positive entry at simplex {i}"
                                " (degenerate cell or weight too large; rescale f)")


def _laplacian_pair(d0, d1, W, p):
    W0, W1, W2 = W
    if p == 0:
        L = d0.T @ _diag(W1) @ d0
    elif p == 1:
        L = d1.T @ _diag(W2) @ d1 + _diag(W1) @ d0 @ _diag(1.0 / W0) @ d0.T @ _diag(W1)
    elif p == 2:
        L = _diag(W2) @ d1 @ _diag(1.0 / W1) @ d1.T @ _diag(W2)
    else:
        raise ValueError("p must be 0, 1 or 2")
    return _sym(L)


class DecOperators:
    """Incidence operators, unweighted and weighted stars, and Laplacian pairs."""

    def __init__(self, mesh: SurfaceMesh, dv: DualVolumes, weight: WeightField):
        self.mesh = mesh
        self.dv = dv
        self.weight = weight
        self.d = (mesh.d0, mesh.d1)
        self.stars = (
            np.asarray(dv.vertex_areas, dtype=float),
            dv.edge_dual_lengths / dv.edge_lengths,
            1.0 / dv.face_areas,
        )
        _check_stars(self.stars, "unweighted")
        samples = weight.samples(mesh)
        for s in samples:
            if not np.all(np.isfinite(s)):
                raise AssemblyError("weight has non-finite samples")
        self.samples = samples
        self.wstars = tuple(W * np.exp(-s) for W, s in zip(self.stars, samples))
        _check_stars(self.wstars, "weighted")
        for a in self.stars + self.wstars:
            a.setflags(write=False)

    @property
    def d0(self):
        return self.d[0]

    @property
    def d1(self):
        return self.d[1]

    def pair(self, p) -> OperatorPair:
        return self._pairs[p]

    @cached_property
    def _pairs(self):
        return tuple(OperatorPair(_laplacian_pair(self.d0, self.d1, self.wstars, p), self.wstars[p], p)
                     for p in range(3))

    def unweighted_pair(self, p) -> OperatorPair:
        return OperatorPair(_laplacian_pair(self.d0, self.d1, self.stars, p), self.stars[p], p)

    def codifferential(self, p):
        """δ_f from p-cochains to (p-1)-cochains."""
        if p not in (1, 2):
            raise ValueError("codifferential needs p in (1, 2)")
        W = self.wstars
        return (_diag(1.0 / W[p - 1]) @ self.d[p - 1].T @ _diag(W[p])).tocsr()

    def differential(self, p):
        if p not in (0, 1):
            raise ValueError("differential needs p in (0, 1)")
        return self.d[p]

    def inner(self, p, a, b):
        """Weighted L² inner product of p-cochains (columns allowed)."""
        return a.T @ (self.wstars[p][:, None] * b) if np.ndim(b) == 2 else a.T @ (self.wstars[p] * b)

    def n_simplices(self, p):
        return self.mesh.n_simplices(p)


@dataclass(frozen=True, eq=False)
class TwistedOperators:
    """Gauge-twisted differentials ``S_{p+1} d_p S_p^{-1}`` and their Laplacian pairs."""

    ops: DecOperators
    scalings: tuple          # diag(e^{f/2}) samples per degree
    dt: tuple                # twisted d0, d1

    def pair(self, p) -> OperatorPair:
        return OperatorPair(_laplacian_pair(self.dt[0], self.dt[1], self.ops.wstars, p), self.ops.wstars[p], p)


def assemble(m: SurfaceMesh, dv: DualVolumes | None = None, w: WeightField | None = None) -> DecOperators:
    if dv is None:
        dv = dual_volumes(m)
    if w is None:
        w = zero_weight(m)
    return DecOperators(m, dv, w)


def assemble_twisted(m: SurfaceMesh, dv: DualVolumes | None = None, w: WeightField | None = None,
                     ops: DecOperators | None = None) -> TwistedOperators:
    if ops is None:
        ops = assemble(m, dv, w)
    if max(np.abs(s).max() for s in ops.samples) > EXP_LIMIT:
        raise AssemblyError(f"|f| exceeds {EXP_LIMIT:g}; e^(f/2) would overflow, rescale the weight")
    S = tuple(np.exp(0.5 * s) for s in ops.samples)
    dt = tuple((_diag(S[p + 1]) @ ops.d[p] @ _diag(1.0 / S[p])).tocsr() for p in range(2))
    return TwistedOperators(ops, S, dt)


def dirichlet_restrict(pair: OperatorPair, dom: DomainMesh) -> OperatorPair:
    """Keep rows and columns of interior p-simplices (forms extended by zero)."""
    idx = np.asarray(dom.interior(pair.p))
    if idx.size == 0:
        raise AssemblyError(f"domain has no interior {pair.p}-simplices")
    if idx.size == pair.dim:
        return pair
    L = pair.L[idx][:, idx].tocsr()
    return OperatorPair(L, pair.M[idx], pair.p, idx)


def write_coo(A, path):
    """Write a sparse (or diagonal 1-D) operator as 'row col value' lines."""
    if np.ndim(A) == 1:
        A = sparse.diags(A)
    A = sparse.coo_matrix(A)
    order = np.lexsort((A.col, A.row))
    with open(path, "w") as fh:
        fh.write(f"# {A.shape[0]} {A.shape[1]} {A.nnz}\n")
        for i, j, v in zip(A.row[order], A.col[order], A.data[order]):
            fh.write(f"{i} {j} {v:.12g}\n")
