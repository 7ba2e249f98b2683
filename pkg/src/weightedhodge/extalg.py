"""Pointwise exterior algebra over R^n.

p-forms are coefficient vectors over the increasing multi-indices of
``{0, ..., n-1}`` in lexicographic order, so ``e^{01}`` has index 0 in
Λ^2(R^3). The basis is orthonormal for the induced inner product.

All products are table driven: for each ``(n, p, q)`` a small dense sign
tensor is built once and cached, and the array-level helpers
(``wedge_arrays``, ``interior_arrays``, ``extend_field``) apply it with
``einsum`` over arbitrary leading axes. The :class:`PForm` wrapper is the
single-point convenience on top.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb, factorial

import numpy as np

__all__ = [
    "MAX_DIM",
    "PForm",
    "SymEndo",
    "FormEndo",
    "basis",
    "wedge",
    "interior",
    "extend_endo",
    "extend_field",
    "wedge_arrays",
    "interior_arrays",
    "frame_sum_checks",
    "frame_sums",
    "FrameSumReport",
]

MAX_DIM = 8


def _check_dim(n):
    if not 1 <= n <= MAX_DIM:
        raise ValueError(f"dimension {n} outside 1..{MAX_DIM}")


def _check_degree(n, p):
    _check_dim(n)
    if not 0 <= p <= n:
        raise ValueError(f"degree {p} outside 0..{n}")


@lru_cache(maxsize=None)
def basis(n, p):
    """Increasing multi-indices of length p, in lexicographic order."""
    _check_degree(n, p)
    return tuple(combinations(range(n), p))


@lru_cache(maxsize=None)
def _index(n, p):
    return {I: k for k, I in enumerate(basis(n, p))}


def _perm_sign(seq):
    # parity by counting inversions; sequences are at most MAX_DIM long
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


@lru_cache(maxsize=None)
def _wedge_table(n, p, q):
    if p + q > n:
        raise ValueError("degree exceeds dimension")
    out = np.zeros((comb(n, p), comb(n, q), comb(n, p + q)))
    idx = _index(n, p + q)
    for a, I in enumerate(basis(n, p)):
        for b, J in enumerate(basis(n, q)):
            if set(I) & set(J):
                continue
            K = tuple(sorted(I + J))
            out[a, b, idx[K]] = _perm_sign(I + J)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _interior_table(n, p):
    # T[i, a, b]: coefficient of e^{J_b} in e_i ⌟ e^{I_a}
    if p < 1:
        raise ValueError("cannot contract scalar")
    out = np.zeros((n, comb(n, p), comb(n, p - 1)))
    idx = _index(n, p - 1)
    for a, I in enumerate(basis(n, p)):
        for pos, i in enumerate(I):
            J = I[:pos] + I[pos + 1:]
            out[i, a, idx[J]] = -1.0 if pos % 2 else 1.0
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _extension_table(n, p):
    # E[i, j] is the matrix of e^i ∧ (e_j ⌟ .) on Λ^p
    C = comb(n, p)
    out = np.zeros((n, n, C, C))
    if p == 0:
        out.setflags(write=False)
        return out
    W = _wedge_table(n, 1, p - 1)      # (n, C_{p-1}, C_p)
    T = _interior_table(n, p)          # (n, C_p, C_{p-1})
    # (e^i ∧ e_j⌟ ω)_c = Σ_{a,b} ω_a T[j,a,b] W[i,b,c]
    out[:] = np.einsum("jab,ibc->ijca", T, W)
    out.setflags(write=False)
    return out


def wedge_arrays(a, p, b, q, n):
    """Wedge product of coefficient arrays with shapes (..., C(n,p)), (..., C(n,q))."""
    _check_degree(n, p)
    _check_degree(n, q)
    if p + q > n:
        raise ValueError("degree exceeds dimension")
    return np.einsum("...i,...j,ijk->...k", a, b, _wedge_table(n, p, q))


def interior_arrays(v, a, p, n):
    """Contract vectors (..., n) into p-form arrays (..., C(n,p)) in the first slot."""
    _check_degree(n, p)
    if p < 1:
        raise ValueError("cannot contract scalar")
    return np.einsum("...i,...a,iab->...b", v, a, _interior_table(n, p))


def extend_field(A, p):
    """Derivation extension of a field of endomorphisms.

    ``A`` has shape (..., n, n); the result has shape (..., C(n,p), C(n,p))
    and equals ``Σ_ij A_ij e^i ∧ (e_j ⌟ .)``. Its eigenvalues are the sums of
    p distinct eigenvalues of A (when A is symmetric).
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[-1]
    _check_degree(n, p)
    return np.einsum("...ij,ijab->...ab", A, _extension_table(n, p))


@dataclass(frozen=True, eq=False)
class PForm:
    """A p-form at a point of an n-dimensional inner-product space."""

    p: int
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        _check_degree(self.n, self.p)
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.shape != (comb(self.n, self.p),):
            raise ValueError(f"expected {comb(self.n, self.p)} coefficients, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, n, p):
        return cls(p, n, np.zeros(comb(n, p)))

    @classmethod
    def basis_form(cls, n, I):
        """Basis form e^I for a multi-index I (0-based, any order; sign applied)."""
        I = tuple(I)
        if len(set(I)) < len(I):
            return cls.zeros(n, len(I))
        out = np.zeros(comb(n, len(I)))
        out[_index(n, len(I))[tuple(sorted(I))]] = _perm_sign(I)
        return cls(len(I), n, out)

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        return cls(1, len(v), v)

    def __getitem__(self, I):
        return self.coeffs[_index(self.n, self.p)[tuple(I)]]

    def _same(self, other):
        if not isinstance(other, PForm) or (other.n, other.p) != (self.n, self.p):
            raise ValueError("forms of different type")

    def __add__(self, other):
        self._same(other)
        return PForm(self.p, self.n, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._same(other)
        return PForm(self.p, self.n, self.coeffs - other.coeffs)

    def __mul__(self, s):
        return PForm(self.p, self.n, self.coeffs * float(s))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __xor__(self, other):
        return wedge(self, other)

    def inner(self, other):
        self._same(other)
        return float(self.coeffs @ other.coeffs)

    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def allclose(self, other, atol=1e-12):
        self._same(other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0, atol=atol))

    def __repr__(self):
        terms = [f"{c:+.6g} e^{''.join(map(str, I))}" for I, c in zip(basis(self.n, self.p), self.coeffs) if c]
        return f"PForm(p={self.p}, n={self.n}: {' '.join(terms) or '0'})"


class SymEndo:
    """Symmetric endomorphism of R^n, stored as its upper triangle.

    The full matrix is rebuilt from the triangle, so it is exactly symmetric.
    Input deviating from symmetry by more than ``tol`` (relative) is rejected.
    """

    def __init__(self, entries, tol=1e-12):
        A = np.asarray(entries, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("endomorphism must be square")
        _check_dim(A.shape[0])
        scale = max(np.abs(A).max(), 1.0)
        if np.abs(A - A.T).max() > tol * scale:
            raise ValueError("matrix is not symmetric")
        self.n = A.shape[0]
        iu = np.triu_indices(self.n)
        self._tri = A[iu].copy()
        self._tri.setflags(write=False)

    @property
    def matrix(self):
        M = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n)
        M[iu] = self._tri
        M.T[iu] = self._tri
        return M

    def eigvalsh(self):
        return np.linalg.eigvalsh(self.matrix)

    def __matmul__(self, v):
        return self.matrix @ v

    def __repr__(self):
        return f"SymEndo(n={self.n}, eig={np.round(self.eigvalsh(), 6).tolist()})"


@dataclass(frozen=True, eq=False)
class FormEndo:
    """Symmetric endomorphism of Λ^p(R^n)."""

    p: int
    n: int
    entries: np.ndarray

    def __post_init__(self):
        _check_degree(self.n, self.p)
        A = np.array(self.entries, dtype=float)
        C = comb(self.n, self.p)
        if A.shape != (C, C):
            raise ValueError(f"expected shape ({C}, {C}), got {A.shape}")
        scale = max(np.abs(A).max(), 1.0)
        if np.abs(A - A.T).max() > 1e-12 * scale:
            raise ValueError("form endomorphism is not symmetric")
        A = 0.5 * (A + A.T)
        A.setflags(write=False)
        object.__setattr__(self, "entries", A)

    def __call__(self, w: PForm) -> PForm:
        if (w.n, w.p) != (self.n, self.p):
            raise ValueError("form type does not match endomorphism")
        return PForm(self.p, self.n, self.entries @ w.coeffs)

    def eigvalsh(self):
        return np.linalg.eigvalsh(self.entries)


def wedge(a: PForm, b: PForm) -> PForm:
    if a.n != b.n:
        raise ValueError("forms live in different dimensions")
    if a.p + b.p > a.n:
        raise ValueError("degree exceeds dimension")
    return PForm(a.p + b.p, a.n, wedge_arrays(a.coeffs, a.p, b.coeffs, b.p, a.n))


def interior(v, a: PForm) -> PForm:
    """Contraction ``v ⌟ a`` in the first slot."""
    v = np.asarray(v, dtype=float)
    if a.p == 0:
        raise ValueError("cannot contract scalar")
    if v.shape != (a.n,):
        raise ValueError(f"vector must have length {a.n}")
    return PForm(a.p - 1, a.n, interior_arrays(v, a.coeffs, a.p, a.n))


def extend_endo(A, p) -> FormEndo:
    """Extend a symmetric endomorphism to p-forms as a derivation.

    ``(A^{[p]} ω)(X_1, ..., X_p) = Σ_k ω(X_1, ..., A X_k, ..., X_p)``.
    """
    M = A.matrix if isinstance(A, SymEndo) else np.asarray(A, dtype=float)
    n = M.shape[0]
    _check_degree(n, p)
    return FormEndo(p, n, extend_field(M, p))


@dataclass(frozen=True)
class FrameSumReport:
    n: int
    p: int
    wedge_sum: float
    wedge_expected: float
    interior_sum: float
    interior_expected: float

    @property
    def wedge_error(self):
        return abs(self.wedge_sum - self.wedge_expected)

    @property
    def interior_error(self):
        return abs(self.interior_sum - self.interior_expected)


def _minors(T, p):
    """All p×p minors of the row family T (..., N, n): shape (..., C(N,p), C(n,p))."""
    N, n = T.shape[-2:]
    rows = list(combinations(range(N), p))
    cols = basis(n, p)
    if p == 0:
        return np.ones(T.shape[:-2] + (1, 1))
    ri = np.array(rows)
    ci = np.array(cols)
    sub = T[..., ri[:, None, :, None], ci[None, :, None, :]]
    return np.linalg.det(sub)


def frame_sums(T, p, X=None):
    """Vectorized frame sums for projected frames T of shape (..., N, n).

    Row i of T holds ``(∂x_i)^T`` in an orthonormal tangent basis. Returns
    ``(Σ|u_{i1} ∧ ... ∧ u_{ip}|², Σ|X ⌟ (u_{i1} ∧ ... ∧ u_{ip})|²)`` summed over
    all ordered index tuples; the second entry is None when X is None.
    """
    T = np.asarray(T, dtype=float)
    n = T.shape[-1]
    _check_degree(n, p)
    # coefficient of e^K in u_I = det T[I, K]; ordered tuples contribute p! each
    M = _minors(T, p)
    wsum = factorial(p) * np.sum(M ** 2, axis=(-2, -1))
    if X is None:
        return wsum, None
    if p == 0:
        return wsum, np.zeros_like(wsum)
    X = np.asarray(X, dtype=float)
    contracted = interior_arrays(X[..., None, :], M, p, n)
    isum = factorial(p) * np.sum(contracted ** 2, axis=(-2, -1))
    return wsum, isum


def frame_sum_checks(n, p, frame, X=None, tol=1e-10) -> FrameSumReport:
    """Evaluate the two frame-sum identities at one point.

    ``frame`` is the (N, n) family of projected ambient basis vectors. Its
    Gram matrix ``frame.T @ frame`` must be the identity (the projections of
    an orthonormal ambient basis onto an isometric tangent space).
    """
    T = np.asarray(frame, dtype=float)
    if T.ndim != 2 or T.shape[1] != n:
        raise ValueError(f"frame must have shape (N, {n})")
    _check_degree(n, p)
    gram_dev = np.abs(T.T @ T - np.eye(n)).max()
    if gram_dev > tol:
        raise ValueError(f"frame is not isometric (Gram deviation {gram_dev:.3g})")
    if X is None:
        X = np.zeros(n)
        X[0] = 1.0
    X = np.asarray(X, dtype=float)
    wsum, isum = frame_sums(T, p, X)
    return FrameSumReport(
        n, p,
        float(wsum), float(factorial(p) * comb(n, p)),
        float(isum), float(factorial(p) * comb(n - 1, p - 1) * (X @ X)) if p >= 1 else 0.0,
    )
