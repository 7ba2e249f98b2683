"""Generalized symmetric eigensolves for operator pairs, with classification.

``solve`` returns the k smallest eigenpairs of ``L x = λ M x`` (M diagonal
positive). The sparse path is ARPACK shift-invert around a small shift with
a deterministic start vector; the dense path is a LAPACK oracle.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
from scipy import sparse
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from .dec import DecOperators, OperatorPair, dirichlet_restrict
from .errors import SolverError
from .mesh import DomainMesh

__all__ = [
    "SpectrumResult",
    "solve",
    "classify",
    "kernel_tolerance",
    "first_exact_eigenvalue",
    "f_betti",
    "write_spectrum_csv",
    "write_eigenvectors_csv",
    "DENSE_LIMIT",
]

DENSE_LIMIT = 2000
KERNEL_REL = 1e-8


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    p: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray           # (dim, k), M-orthonormal columns
    residuals: np.ndarray              # ||L x - λ M x||_{M^-1}
    kernel_tol: float
    meta: dict = field(default_factory=dict)
    tags: tuple = ()
    d_norm2: np.ndarray | None = None          # ||dω||² per eigenform
    codiff_norm2: np.ndarray | None = None     # ||δ_f ω||² per eigenform
    index: np.ndarray | None = None            # simplex ids of the rows (restricted pairs)

    @property
    def k(self):
        return len(self.eigenvalues)

    @property
    def kernel_dim(self):
        return int(np.sum(self.eigenvalues < self.kernel_tol))

    @property
    def positive(self):
        return self.eigenvalues[self.eigenvalues >= self.kernel_tol]

    def first_positive(self):
        pos = self.positive
        if pos.size == 0:
            raise SolverError("no positive eigenvalue among the computed pairs; increase k")
        return float(pos[0])

    def full_vectors(self, n_simplices):
        """Eigenvectors scattered back onto all simplices (zero outside the domain)."""
        if self.index is None:
            return self.eigenvectors
        out = np.zeros((n_simplices, self.k))
        out[self.index] = self.eigenvectors
        return out


def kernel_tolerance(eigenvalues, scale):
    """1e-8 times the mean of the first five clearly positive eigenvalues."""
    lam = np.sort(np.asarray(eigenvalues))
    pos = lam[lam > 1e-6 * max(scale, 1e-300)]
    if pos.size == 0:
        return KERNEL_REL * scale
    return KERNEL_REL * float(pos[:5].mean())


def _residuals(pair, vals, vecs):
    R = pair.L @ vecs - pair.M[:, None] * vecs * vals[None, :]
    return np.sqrt(np.sum(R * R / pair.M[:, None], axis=0))


def _rayleigh_ritz(pair, X):
    A = X.T @ (pair.L @ X)
    B = X.T @ (pair.M[:, None] * X)
    A = 0.5 * (A + A.T)
    B = 0.5 * (B + B.T)
    vals, Y = sla.eigh(A, B)
    return vals, X @ Y


def _dense(pair, k):
    if pair.dim > DENSE_LIMIT:
        raise SolverError(f"dense oracle limited to dimension {DENSE_LIMIT}, got {pair.dim}")
    A = pair.L.toarray()
    A = 0.5 * (A + A.T)
    vals, vecs = sla.eigh(A, np.diag(pair.M), subset_by_index=[0, k - 1])
    return vals, vecs


def solve(pair: OperatorPair, k: int, method="lanczos", seed=0, sigma=None) -> SpectrumResult:
    """k smallest eigenpairs of the pair."""
    n = pair.dim
    if k < 1 or k > n:
        raise SolverError(f"k={k} out of range for dimension {n}")
    scale = pair.scale
    meta = {"method": method, "dim": n, "seed": int(seed)}
    if method == "dense" or (method == "lanczos" and k >= n - 1):
        vals, vecs = _dense(pair, k)
        meta["method"] = "dense"
        meta["shifts"] = []
    elif method == "lanczos":
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(n)
        Mm = pair.Mmat
        ncv = min(n, max(2 * k + 1, 40))
        shifts = [0.0 if sigma is None else float(sigma), -1e-6 * scale, -1e-3 * scale]
        tried = []
        vals = vecs = None
        for s in shifts:
            tried.append(s)
            try:
                w, X = eigsh(pair.L.tocsc(), k=k, M=Mm, sigma=s, which="LM", v0=v0, ncv=ncv, tol=0)
            except (RuntimeError, ArpackError, ArpackNoConvergence, ValueError):
                continue
            if not np.all(np.isfinite(w)) or not np.all(np.isfinite(X)):
                continue
            w, X = _rayleigh_ritz(pair, X)
            res = _residuals(pair, w, X)
            if np.all(res <= 1e-8 * scale):
                vals, vecs = w, X
                break
        if vals is None:
            raise SolverError(f"shift-invert failed after shifts {tried}")
        meta["shifts"] = tried
    else:
        raise SolverError(f"unknown method {method!r}")
    order = np.argsort(vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    # deterministic sign: largest-magnitude entry positive
    piv = np.argmax(np.abs(vecs), axis=0)
    vecs = vecs * np.sign(vecs[piv, np.arange(vecs.shape[1])])[None, :]
    res = _residuals(pair, vals, vecs)
    meta["max_residual"] = float(res.max())
    meta["scale"] = scale
    return SpectrumResult(pair.p, vals, vecs, res, kernel_tolerance(vals, scale), meta, index=pair.index)


def _clusters(vals, rel):
    groups, start = [], 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] > rel * max(abs(vals[i]), 1e-300):
            groups.append(list(range(start, i)))
            start = i
    return groups


def _restricted_ops(ops: DecOperators, res: SpectrumResult):
    """d and δ_f acting on the rows present in the result, padded by zero."""
    p = res.p
    n_p = ops.n_simplices(p)
    X = res.full_vectors(n_p)
    dX = ops.d[p] @ X if p < 2 else None
    cX = ops.codifferential(p) @ X if p > 0 else None
    return X, dX, cX


def classify(res: SpectrumResult, ops: DecOperators, tol=1e-6, cluster_rel=1e-6) -> SpectrumResult:
    """Tag eigenpairs harmonic / exact / co-exact / mixed.

    Inside (numerically) degenerate clusters the basis is first rotated to
    diagonalize ``||dω||²``, which separates exact from co-exact parts.
    """
    p = res.p
    W = ops.wstars
    vecs = res.eigenvectors.copy()
    vals = res.eigenvalues
    X, dX, _ = _restricted_ops(ops, replace(res, eigenvectors=vecs))
    if dX is not None:
        for g in _clusters(vals, cluster_rel):
            if len(g) < 2:
                continue
            Q = dX[:, g].T @ (W[p + 1][:, None] * dX[:, g])
            _, R = np.linalg.eigh(0.5 * (Q + Q.T))
            vecs[:, g] = vecs[:, g] @ R
    res = replace(res, eigenvectors=vecs)
    X, dX, cX = _restricted_ops(ops, res)
    dn = np.sum(W[p + 1][:, None] * dX * dX, axis=0) if dX is not None else np.zeros(res.k)
    cn = np.sum(W[p - 1][:, None] * cX * cX, axis=0) if cX is not None else np.zeros(res.k)
    tags = []
    for lam, a, b in zip(vals, dn, cn):
        if lam < res.kernel_tol:
            tags.append("harmonic")
        elif a <= tol * lam:
            tags.append("exact")
        elif b <= tol * lam:
            tags.append("co-exact")
        else:
            tags.append("mixed")
    return replace(res, tags=tuple(tags), d_norm2=dn, codiff_norm2=cn)


def _exact_pair(ops: DecOperators, p, dom: DomainMesh | None):
    # nonzero spectrum of δ_f d on (p-1)-forms; for p = 2 its transpose
    # factorization on 2-forms has the small kernel
    if p == 1:
        pair = ops.pair(0)
    elif p == 2:
        pair = ops.pair(2)
    else:
        raise SolverError("first exact eigenvalue needs p in (1, 2): δ_f d vanishes on top-degree forms")
    if dom is not None:
        pair = dirichlet_restrict(pair, dom)
    return pair


def first_exact_eigenvalue(ops: DecOperators, p: int, dom: DomainMesh | None = None, k=8, method="lanczos",
                           seed=0) -> float:
    """Smallest positive eigenvalue of Δ_f on exact p-forms."""
    pair = _exact_pair(ops, p, dom)
    k = min(k, pair.dim)
    while True:
        res = solve(pair, k, method=method, seed=seed)
        if res.positive.size or k == pair.dim:
            return res.first_positive()
        k = min(2 * k, pair.dim)


def f_betti(ops: DecOperators, p: int, dom: DomainMesh | None = None, k=12, method="lanczos", seed=0,
            kernel_rel=KERNEL_REL, gap_ratio=10.0) -> int:
    """Dimension of the kernel of the (possibly restricted) Laplacian pair."""
    pair = ops.pair(p)
    if dom is not None:
        pair = dirichlet_restrict(pair, dom)
    k = min(k, pair.dim)
    while True:
        res = solve(pair, k, method=method, seed=seed)
        lam = res.eigenvalues
        pos = lam[lam > 1e-6 * pair.scale]
        if pos.size >= min(5, pair.dim - (lam.size - pos.size)) or k == pair.dim:
            break
        k = min(2 * k, pair.dim)
    tol = kernel_rel * float(pos[:5].mean()) if pos.size else kernel_rel * pair.scale
    zero = lam[lam < tol]
    rest = lam[lam >= tol]
    if zero.size and rest.size:
        top = max(zero.max(), tol * 1e-3)
        if rest[0] / top < gap_ratio or rest[0] < 1e-4 * float(pos[:5].mean()):
            raise SolverError(f"kernel of the p={p} pair is ambiguous "
                              f"(smallest nonzero eigenvalue {rest[0]:.3g}); refine the mesh")
    return int(zero.size)


def write_spectrum_csv(res: SpectrumResult, path):
    tags = res.tags or ("",) * res.k
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "eigenvalue", "classification", "residual"])
        for i, (lam, t, r) in enumerate(zip(res.eigenvalues, tags, res.residuals)):
            w.writerow([i, f"{lam:.12g}", t, f"{r:.12g}"])


def write_eigenvectors_csv(res: SpectrumResult, path):
    ids = res.index if res.index is not None else np.arange(res.eigenvectors.shape[0])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["simplex"] + [f"v{i}" for i in range(res.k)])
        for s, row in zip(ids, res.eigenvectors):
            w.writerow([int(s)] + [f"{x:.12g}" for x in row])
