"""Evaluators for the eigenvalue inequalities of the drift Hodge Laplacian.

Each evaluator returns an :class:`InequalityReport` whose ``slack`` is
oriented so that ``slack >= 0`` means the inequality holds; a report passes
when ``slack >= -tolerance``. Continuous extrema (inf/sup over the domain)
are realized as min/max over the vertices of the domain, and integrals
``∫ g |ω|² dμ_f`` as vertex sums with weights ``A_v e^{-f_v}``, normalized
so that every sampled eigenform has unit weighted norm.

Curvature terms follow the conventions of :mod:`weightedhodge.geometry`:
``II^{[p]}`` is the shape operator ``S`` extended to p-forms,
``𝔅^{[p]} = n H II^{[p]} - (II^{[p]})²`` and, for the normal vector
``Z = c ν``, ``II_Z = -c S``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, inf

import numpy as np
from scipy import sparse

from .dec import DecOperators, OperatorPair, assemble, dirichlet_restrict
from .errors import ConfigError, SolverError, WeightedHodgeError
from .extalg import extend_field
from .geometry import CurvatureField, bochner_ext, estimate_curvature, sff_on_forms
from .mesh import DomainMesh, SurfaceMesh, dual_volumes, extract_domain
from .spectra import SpectrumResult, classify, f_betti, first_exact_eigenvalue, solve
from .weights import ComparisonData, WeightField, dH_l, t_f_on_forms, zero_weight

__all__ = [
    "InequalityReport",
    "Setting",
    "PointwiseRicci",
    "JacobiOperator",
    "make_setting",
    "pointwise_ricci",
    "sample_forms",
    "thm11_gap",
    "thm11_upper",
    "gallot_meyer_f",
    "vanishing_check",
    "yang_recursion",
    "cor13_recursion",
    "cor14_bound",
    "cor41_radial",
    "distance_weight_bounds",
    "jacobi_operator",
    "jacobi",
    "recursion_grid",
    "closed_suite",
    "REL_TOL",
]

REL_TOL = 0.05
STRUCT_TOL = 1e-10


@dataclass
class InequalityReport:
    theorem: str
    left: float
    right: float
    slack: float
    tolerance: float
    passed: bool | None
    status: str
    inputs: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @classmethod
    def judge(cls, theorem, left, right, slack, scale, inputs, rel_tol=REL_TOL, details=None):
        tol = rel_tol * max(scale, 1e-12)
        ok = bool(slack >= -tol)
        return cls(theorem, float(left), float(right), float(slack), float(tol), ok,
                   "pass" if ok else "fail", dict(inputs), dict(details or {}))

    @classmethod
    def no_judgement(cls, theorem, status, left=np.nan, right=np.nan, inputs=None, details=None):
        return cls(theorem, float(left), float(right), float("nan"), float("nan"), None, status,
                   dict(inputs or {}), dict(details or {}))

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "inputs": self.inputs,
            "left": self.left,
            "right": self.right,
            "slack": self.slack,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "status": self.status,
            "details": self.details,
        }


# ---------------------------------------------------------------------------
# problem bundle


class Setting:
    """Everything the evaluators need about one (surface or domain, weight) pair.

    Spectra are solved lazily and cached per degree; asking for more
    eigenpairs than cached triggers a larger solve.
    """

    def __init__(self, mesh: SurfaceMesh, weight: WeightField | None = None, domain: DomainMesh | None = None,
                 curv: CurvatureField | None = None, dv=None, comparison: ComparisonData | None = None,
                 label="", method="lanczos", seed=0):
        self.mesh = mesh
        self.dv = dv if dv is not None else dual_volumes(mesh)
        self.curv = curv if curv is not None else estimate_curvature(mesh, self.dv)
        self.weight = weight if weight is not None else zero_weight(mesh)
        self.domain = None if domain is None or domain.is_whole else domain
        self.comparison = comparison
        self.label = label
        self.method = method
        self.seed = seed
        self.ops: DecOperators = assemble(mesh, self.dv, self.weight)
        self._spectra = {}

    @property
    def n(self):
        return self.curv.dim

    @property
    def is_closed(self):
        return self.domain is None and self.mesh.is_closed

    @property
    def omega(self):
        """Boolean mask of the vertices over which extrema are taken."""
        if self.domain is None:
            return np.ones(self.mesh.n_vertices, dtype=bool)
        return np.asarray(self.domain.vertex_mask)

    @property
    def mu(self):
        return self.dv.vertex_areas * np.exp(-self.weight.f)

    def pair(self, p) -> OperatorPair:
        pr = self.ops.pair(p)
        return dirichlet_restrict(pr, self.domain) if self.domain is not None else pr

    def spectrum(self, p, k) -> SpectrumResult:
        pr = self.pair(p)
        k = min(k, pr.dim)
        have = self._spectra.get(p)
        if have is None or have.k < k:
            res = classify(solve(pr, k, method=self.method, seed=self.seed), self.ops)
            self._spectra[p] = res
            have = res
        return have

    def eigenvalues(self, p, k):
        return self.spectrum(p, k).eigenvalues[:k]

    def first_positive(self, p, k=12):
        while True:
            res = self.spectrum(p, k)
            if res.positive.size or res.k == self.pair(p).dim:
                return res.first_positive()
            k *= 2

    def describe(self):
        dom = "closed" if self.domain is None else f"domain({len(self.domain.interior_vertices)} vertices)"
        return {"mesh": self.label or repr(self.mesh), "region": dom, "weight": self.weight.describe()}


def make_setting(source, weight=None, **kw) -> Setting:
    """Build a :class:`Setting` from a SurfaceMesh or DomainMesh."""
    if isinstance(source, DomainMesh):
        return Setting(source.mesh, weight, domain=source, **kw)
    return Setting(source, weight, **kw)


# ---------------------------------------------------------------------------
# pointwise curvature endomorphisms


@dataclass(frozen=True, eq=False)
class PointwiseRicci:
    p: int
    ricci: np.ndarray        # 𝔅 + T_f, (V, C, C)
    sff_sq: np.ndarray       # (II^{[p]})², (V, C, C)
    bochner: np.ndarray      # 𝔅^{[p]}
    tf: np.ndarray           # T_f^{[p]}

    def ricci_N(self, weight: WeightField, N: float, n=2):
        """``Ric^{(p)}_{N,f} = Ric^{(p)}_f - (df ∧ df⌟) / (N - (n - p + 1))``."""
        if np.isinf(N):
            return self.ricci
        g = weight.grad
        rank_one = extend_field(g[:, :, None] * g[:, None, :], self.p)
        return self.ricci - rank_one / (N - (n - self.p + 1))


def pointwise_ricci(s: Setting, p: int) -> PointwiseRicci:
    B = bochner_ext(s.curv, p)
    T = t_f_on_forms(s.weight, p, s.curv)
    II = sff_on_forms(s.curv, p)
    return PointwiseRicci(p, B + T, II @ II, B, T)


def _min_eig(field, mask):
    if field.shape[-1] == 0:
        return 0.0
    return float(np.linalg.eigvalsh(field[mask]).min())


# ---------------------------------------------------------------------------
# eigenform sampling


def _hat_gradients(m: SurfaceMesh):
    v, F = m.vertices, m.faces
    cross = np.cross(v[F[:, 1]] - v[F[:, 0]], v[F[:, 2]] - v[F[:, 0]])
    dbl = np.linalg.norm(cross, axis=1)
    nrm = cross / dbl[:, None]
    g = np.empty((len(F), 3, 3))
    for k in range(3):
        e = v[F[:, (k + 2) % 3]] - v[F[:, (k + 1) % 3]]
        g[:, k] = np.cross(nrm, e) / dbl[:, None]
    return g


def sample_forms(s: Setting, p: int, cochains) -> np.ndarray:
    """Pointwise coefficients of p-cochains at vertices, shape (V, C(2,p), k).

    0-forms are their vertex values. 1-forms are Whitney-interpolated to face
    barycentres, area-averaged to vertices and expressed in the vertex tangent
    frames. 2-forms are face densities, sign-aligned with the vertex normal
    and area-averaged. Values outside the domain are zero.
    """
    m = s.mesh
    X = np.asarray(cochains, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    V = m.n_vertices
    A = s.dv.face_areas
    VF = m.vertex_faces
    area_sum = VF @ A
    if p == 0:
        out = X[:, None, :].copy()
    elif p == 1:
        g = _hat_gradients(m)
        # oriented face-edge values: face edge k runs from corner k to corner k+1
        vals = m.face_edge_signs[:, :, None] * X[m.face_edges]          # (F, 3, k)
        w = np.zeros((m.n_faces, 3, X.shape[1]))
        for k in range(3):
            a, b = k, (k + 1) % 3
            w += (g[:, b] - g[:, a])[:, :, None] * vals[:, k][:, None, :] / 3.0
        acc = VF @ (A[:, None] * w.reshape(m.n_faces, -1))
        vec = (acc / area_sum[:, None]).reshape(V, 3, -1)
        out = np.einsum("vkj,vkq->vjq", s.curv.frames, vec)
    elif p == 2:
        sign = np.sign(np.einsum("fk,vk->vf", m.face_normals, s.curv.normals)) if V * m.n_faces <= 4e7 else None
        if sign is None:
            VFc = VF.tocoo()
            sgn = np.sign(np.einsum("ik,ik->i", m.face_normals[VFc.col], s.curv.normals[VFc.row]))
            S = sparse.csr_matrix((sgn, (VFc.row, VFc.col)), shape=VF.shape)
        else:
            S = VF.multiply(sign).tocsr()
        out = (S @ X / area_sum[:, None])[:, None, :]
    else:
        raise ValueError("p must be 0, 1 or 2")
    out[~s.omega] = 0.0
    return out


def _form_integrals(s: Setting, p: int, res: SpectrumResult, k: int):
    """Normalized quadratures of the first k eigenforms.

    Returns a callable ``integ(g)`` for scalar fields g (V,) or endomorphism
    fields (V, C, C) giving the k values ``∫ <g ω_i, ω_i> dμ_f``.
    """
    vecs = res.full_vectors(s.mesh.n_simplices(p))[:, :k]
    c = sample_forms(s, p, vecs)                        # (V, C, k)
    mu = s.mu * s.omega
    norm = np.einsum("v,vck,vck->k", mu, c, c)
    if np.any(norm <= 0):
        raise SolverError("an eigenform vanishes at every sampled vertex; refine the mesh")

    def integ(g):
        g = np.asarray(g, dtype=float)
        if g.ndim == 1:
            return np.einsum("v,v,vck,vck->k", mu, g, c, c) / norm
        return np.einsum("v,vab,vak,vbk->k", mu, g, c, c) / norm

    return integ


# ---------------------------------------------------------------------------
# evaluators, one report per inequality


def thm11_gap(s: Setting, p: int, include_zero=False, rel_tol=REL_TOL, k=12) -> InequalityReport:
    """``λ_{1,p,f} - λ_{1,p-1,f} >= (1/p) inf min eig(𝔅 + T_f - (II^{[p]})²)``."""
    if p < 1:
        raise ValueError("gap bound needs p >= 1")
    lam_p = s.first_positive(p, k)
    lam_q = float(s.spectrum(p - 1, k).eigenvalues[0]) if include_zero else s.first_positive(p - 1, k)
    R = pointwise_ricci(s, p)
    right = _min_eig(R.ricci - R.sff_sq, s.omega) / p
    left = lam_p - lam_q
    scale = max(abs(lam_p), abs(lam_q), abs(right))
    return InequalityReport.judge(
        "thm1.1-gap" + ("-zero" if include_zero else ""), left, right, left - right, scale,
        {**s.describe(), "p": p, "include_zero": include_zero}, rel_tol,
        {"lambda_p": lam_p, "lambda_p_minus_1": lam_q})


def _upper_integrand(s: Setting, p: int):
    n = s.n
    c, w = s.curv, s.weight
    scal_term = p * (p - 1) / (n * (n - 1)) * c.scal if n > 1 else 0.0
    return p * n * c.H ** 2 - scal_term + p / n * w.df2


def _vol_average(s: Setting, g):
    mu = s.mu * s.omega
    return float(np.sum(mu * g) / np.sum(mu))


def thm11_upper(s: Setting, p: int, rel_tol=REL_TOL, k=8) -> InequalityReport:
    """``λ'_{1,p,f} <= Vol_f^{-1} ∫ (p n |H|² - p(p-1)/(n(n-1)) Scal + (p/n)|df|²) dμ_f``."""
    if p < 1:
        raise ValueError("upper bound needs p >= 1")
    if not s.is_closed:
        raise ConfigError("the upper bound is stated for closed surfaces")
    left = first_exact_eigenvalue(s.ops, p, k=k, method=s.method, seed=s.seed)
    right = _vol_average(s, _upper_integrand(s, p))
    return InequalityReport.judge("thm1.1-upper", left, right, right - left, max(abs(left), abs(right)),
                                  {**s.describe(), "p": p}, rel_tol)


def gallot_meyer_f(s: Setting, p: int, N=inf, gamma=None, rel_tol=REL_TOL, k=8) -> InequalityReport:
    """``Ric^{(p)}_{N,f} >= p(n-p) γ  ⟹  λ'_{1,p,f} >= p(n-p) γ N/(N-1)``."""
    n = s.n
    N = float(N)
    if not (N < 0 or N > n - p + 1):
        raise ConfigError(f"N={N} outside the admissible range (-inf, 0) U ({n - p + 1}, inf)")
    if not 1 <= p <= n:
        raise ValueError("p must be between 1 and n")
    if not s.is_closed:
        raise ConfigError("the estimate is stated for closed surfaces")
    R = pointwise_ricci(s, p)
    hyp = _min_eig(R.ricci_N(s.weight, N, n), s.omega)
    c = p * (n - p)
    inputs = {**s.describe(), "p": p, "N": N if np.isfinite(N) else "inf"}
    if c == 0:
        return InequalityReport.no_judgement("gallot-meyer-f", "vacuous (p(n-p) = 0)", inputs=inputs)
    if gamma is None:
        gamma = hyp / c
    gamma = float(gamma)
    inputs["gamma"] = gamma
    if gamma <= 0 or hyp < c * gamma - STRUCT_TOL * max(1.0, abs(hyp)):
        return InequalityReport.no_judgement("gallot-meyer-f", "hypothesis fails", inputs=inputs,
                                             details={"min_ricci_N": hyp})
    factor = 1.0 if np.isinf(N) else N / (N - 1)
    right = c * gamma * factor
    left = first_exact_eigenvalue(s.ops, p, k=k, method=s.method, seed=s.seed)
    return InequalityReport.judge("gallot-meyer-f", left, right, left - right, max(abs(left), abs(right)),
                                  inputs, rel_tol, {"min_ricci_N": hyp})


def vanishing_check(s: Setting, p: int) -> InequalityReport:
    """If ``𝔅^{[p]} > Δf/2 + |df|²/4`` everywhere then the p-th f-Betti number is zero."""
    if not s.is_closed:
        raise ConfigError("the vanishing criterion is stated for closed surfaces")
    B = bochner_ext(s.curv, p)
    w = s.weight
    margin_field = np.linalg.eigvalsh(B).min(axis=-1) if B.shape[-1] else np.zeros(s.mesh.n_vertices)
    margin = float(np.min(margin_field - 0.5 * w.lap - 0.25 * w.df2))
    b = f_betti(s.ops, p, method=s.method, seed=s.seed)
    inputs = {**s.describe(), "p": p}
    details = {"criterion_margin": margin, "betti": b}
    if margin <= 0:
        return InequalityReport.no_judgement("vanishing", "criterion not met", left=b, right=0,
                                             inputs=inputs, details=details)
    ok = b == 0
    return InequalityReport(theorem="vanishing", left=float(b), right=0.0, slack=float(-b), tolerance=0.0,
                            passed=ok, status="pass" if ok else "fail", inputs=inputs, details=details)


# ---------------------------------------------------------------------------
# recursion formulas


def _recursion(theorem, lam, brackets, k, alpha, n, inputs, rel_tol, details=None):
    lam = np.asarray(lam, dtype=float)
    gaps = np.maximum(lam[k] - lam[:k], 0.0)
    left = float(np.sum(gaps ** alpha))
    c = 4.0 / n if alpha <= 2 else 2.0 * alpha / n
    with np.errstate(divide="ignore", invalid="ignore"):
        pw = np.where(gaps > 0, gaps ** (alpha - 1), 0.0 if alpha > 1 else (1.0 if alpha == 1 else np.inf))
    right = float(c * np.sum(pw * np.asarray(brackets)))
    scale = max(abs(left), abs(right), float(np.max(np.abs(lam[:k + 1]))) ** alpha)
    d = {"eigenvalues": lam[:k + 1].tolist(), "brackets": np.asarray(brackets).tolist(), "factor": c}
    d.update(details or {})
    return InequalityReport.judge(theorem, left, right, right - left, scale,
                                  {**inputs, "k": k, "alpha": alpha}, rel_tol, d)


def _check_k(s, p, k):
    if k < 1:
        raise ValueError("recursion formulas need k >= 1")
    res = s.spectrum(p, k + 1)
    if res.k < k + 1:
        raise SolverError(f"need {k + 1} eigenpairs but the p={p} problem has dimension {res.k}")
    return res


def yang_recursion(s: Setting, p: int, k: int, alpha=2.0, rel_tol=REL_TOL) -> InequalityReport:
    """Recursion inequality with per-eigenform curvature integrals."""
    res = _check_k(s, p, k)
    integ = _form_integrals(s, p, res, k)
    R = pointwise_ricci(s, p)
    n = s.n
    w, c = s.weight, s.curv
    lam = res.eigenvalues[:k + 1]
    br = (lam[:k] - integ(R.ricci) + n * n / 4 * integ(c.H ** 2) - 0.25 * integ(2 * w.lap + w.df2))
    return _recursion("thm1.2", lam, br, k, alpha, n, {**s.describe(), "p": p}, rel_tol)


def _deltas(s: Setting, p: int):
    R = pointwise_ricci(s, p)
    n = s.n
    w, c = s.weight, s.curv
    om = s.omega
    d1 = _min_eig(R.ricci, om)
    d2 = float(np.max((n * n * c.H ** 2 - 2 * w.lap - w.df2)[om]))
    return d1, d2


def cor13_recursion(s: Setting, p: int, k: int, alpha=2.0, rel_tol=REL_TOL) -> InequalityReport:
    """Recursion inequality with the extremal constants δ₁, δ₂ in place of integrals."""
    res = _check_k(s, p, k)
    d1, d2 = _deltas(s, p)
    lam = res.eigenvalues[:k + 1]
    br = lam[:k] - d1 + 0.25 * d2
    return _recursion("cor1.3", lam, br, k, alpha, s.n, {**s.describe(), "p": p}, rel_tol,
                      {"delta1": d1, "delta2": d2})


def cor14_bound(closed: Setting, dom: Setting, p: int, k: int, rel_tol=REL_TOL) -> InequalityReport:
    """``λ_{k+1} <= (δ₁ - δ₂/4)(1 - (1+4/n)k^{2/n}) + (1+4/n)k^{2/n} · average``.

    δ₁, δ₂ and λ_{k+1} come from ``dom``; the average of the upper-bound
    integrand is taken over the closed surface ``closed``.
    """
    if k < 1:
        raise ValueError("the bound is evaluated for k >= 1")
    n = dom.n
    res = _check_k(dom, p, k)
    d1, d2 = _deltas(dom, p)
    avg = _vol_average(closed, _upper_integrand(closed, p))
    ck = (1 + 4.0 / n) * k ** (2.0 / n)
    right = (d1 - 0.25 * d2) * (1 - ck) + ck * avg
    left = float(res.eigenvalues[k])
    return InequalityReport.judge("cor1.4", left, right, right - left, max(abs(left), abs(right)),
                                  {**dom.describe(), "closed": closed.describe()["mesh"], "p": p, "k": k},
                                  rel_tol, {"delta1": d1, "delta2": d2, "average": avg})


def cor41_radial(s: Setting, p: int, k: int, alpha=2.0, a=None, rel_tol=REL_TOL) -> InequalityReport:
    """Recursion inequality for ``f = a|X|²/2`` written with closed-form terms only."""
    w, c = s.weight, s.curv
    if w.kind != "radial":
        raise ConfigError("this corollary needs a radial weight")
    a = w.params["a"] if a is None else float(a)
    if abs(a - w.params["a"]) > 1e-12 * a:
        raise ConfigError("parameter a does not match the radial weight")
    res = _check_k(s, p, k)
    integ = _form_integrals(s, p, res, k)
    n = s.n
    X = s.mesh.vertices
    Xn = w.extra["Xn"]
    X2 = np.einsum("vk,vk->v", X, X)
    II = sff_on_forms(c, p)
    # a X^N + n H⃗ = (a<X,ν> - nH) ν, and II_{cν} = -c S
    coef = a * Xn - n * c.H
    lam = res.eigenvalues[:k + 1]
    br = (lam[:k] + integ(coef[:, None, None] * II) + integ(II @ II) - a * p + n * a / 2
          - a * a / 4 * integ(X2) + 0.25 * integ(coef ** 2))
    return _recursion("cor4.1", lam, br, k, alpha, n, {**s.describe(), "p": p, "a": a}, rel_tol)


def distance_weight_bounds(s: Setting, p: int, k: int, alpha=2.0, variant="ricci", rel_tol=REL_TOL) -> InequalityReport:
    """Recursion inequalities for ``f = a d_{x0}²/2`` using comparison geometry.

    ``variant="ricci"`` needs the bound ``l`` (Ric >= (n-1) l);
    ``variant="sectional"`` needs ``l1 <= K <= l2``.
    """
    cd = s.comparison
    w, c = s.weight, s.curv
    if w.kind != "distance" or cd is None:
        raise ConfigError("this corollary needs a distance weight")
    a = w.params["a"]
    n = s.n
    inputs = {**s.describe(), "p": p, "variant": variant}
    if np.any(s.omega & cd.singular):
        return InequalityReport.no_judgement(f"distance-{variant}", "precondition fails: domain meets the cut locus",
                                             inputs=inputs)
    om = s.omega
    d = cd.d
    base = n * n * c.H ** 2 - a * a * d ** 2
    res = _check_k(s, p, k)
    lam = res.eigenvalues[:k + 1]
    if variant == "ricci":
        if "l" not in cd.bounds:
            raise ConfigError("missing curvature bound l")
        d2 = float(np.max((base + 2 * a * (1 + dH_l(d, cd.bounds["l"], n)))[om]))
        R = pointwise_ricci(s, p)
        d1 = _min_eig(R.ricci, om)
        br = lam[:k] - d1 + 0.25 * d2
        inputs["l"] = cd.bounds["l"]
        details = {"delta1": d1, "delta2": d2}
    elif variant == "sectional":
        if "l1" not in cd.bounds or "l2" not in cd.bounds:
            raise ConfigError("missing curvature bounds l1, l2")
        l1, l2 = cd.bounds["l1"], cd.bounds["l2"]
        d2 = _sectional_delta2(base, a, p, n, dH_l(d, l1, n), dH_l(d, l2, n), l2, om)
        integ = _form_integrals(s, p, res, k)
        II = sff_on_forms(c, p)
        br = lam[:k] - integ(n * c.H[:, None, None] * II) + integ(II @ II) + 0.25 * d2
        inputs.update(l1=l1, l2=l2)
        details = {"delta2": d2}
    else:
        raise ConfigError(f"unknown variant {variant!r}")
    return _recursion(f"distance-{variant}", lam, br, k, alpha, n, inputs, rel_tol, details)


def _sectional_delta2(base, a, p, n, dH1, dH2, l2, mask):
    if l2 <= 0:
        t = -4 * a * ((p - 1) * dH2 / (n - 1) + 1)
    else:
        t = -4 * a * p * dH2 / (n - 1)
    return float(np.max((base + t + 2 * a * (1 + dH1))[mask]))


# ---------------------------------------------------------------------------
# Jacobi operator and index


@dataclass(frozen=True, eq=False)
class JacobiOperator:
    pair: OperatorPair
    potential: np.ndarray        # Hess f(ν,ν) + |II|² per vertex
    fmin_residual: np.ndarray    # n H + ∂f/∂ν per vertex (nan when unknown)
    a: float
    gamma: float
    n: int

    def d(self, l, p):
        return comb(self.n + 1, p + 1) * (l - 1) + 1

    @property
    def fmin_sup(self):
        r = np.abs(self.fmin_residual)
        return float(r.max()) if not np.isnan(r).all() else float("nan")


def jacobi_operator(s: Setting, hess_nn=None, a=None) -> JacobiOperator:
    """``L_f = Δ_f - (Hess f(ν,ν) + |II|²)`` on functions of a closed hypersurface.

    For radial weights ``Hess f = a · I`` in R^3 and the f-minimality residual
    ``n H + ∂f/∂ν`` is known in closed form; other weights need ``hess_nn``
    (per vertex) and ``a`` supplied by the caller.
    """
    if not s.is_closed:
        raise ConfigError("the Jacobi operator is built on closed hypersurfaces")
    w, c = s.weight, s.curv
    V = s.mesh.n_vertices
    if w.kind == "radial":
        a_w = w.params["a"]
        hn = np.full(V, a_w) if hess_nn is None else np.asarray(hess_nn, dtype=float)
        a = a_w if a is None else float(a)
        # ∂f/∂ν for the inward normal: -a<X,ν>; the mean curvature term is n H = tr S
        resid = w.extra["Xn"] * a_w - np.trace(c.shape, axis1=1, axis2=2)
    else:
        if hess_nn is None or a is None:
            raise ConfigError("non-radial weights need the ambient Hessian Hess f(ν,ν) and its lower bound a")
        hn = np.broadcast_to(np.asarray(hess_nn, dtype=float), (V,))
        resid = np.full(V, np.nan)
    q = hn + c.sff_norm2
    base = s.ops.pair(0)
    W0 = s.ops.wstars[0]
    L = (base.L - sparse.diags(W0 * q)).tocsr()
    return JacobiOperator(OperatorPair(L, W0, 0), q, resid, float(a), c.gamma, s.n)


def _jacobi_spectrum(J: JacobiOperator, k, s: Setting):
    sigma = -float(J.potential.max()) - 1.0
    return solve(J.pair, min(k, J.pair.dim), method=s.method, seed=s.seed, sigma=sigma)


def jacobi(s: Setting, p=1, L=3, hess_nn=None, a=None, rel_tol=REL_TOL, fmin_tol=0.05):
    """Index of the Jacobi operator and the eigenvalue comparison table.

    Returns ``(J, summary, reports)`` where ``summary`` holds the Jacobi
    spectrum, the index and the two index lower bounds.
    """
    if p < 1:
        raise ConfigError("the comparison needs p >= 1")
    J = jacobi_operator(s, hess_nn, a)
    n = s.n
    advisory = not (J.fmin_sup < fmin_tol)
    # grow the solve until a nonnegative eigenvalue shows up
    k = max(L, 10)
    while True:
        spec = _jacobi_spectrum(J, k, s)
        if spec.eigenvalues[-1] > 0 or spec.k == J.pair.dim:
            break
        k *= 2
    lam_J = spec.eigenvalues
    neg_tol = 1e-8 * J.pair.scale
    index = int(np.sum(lam_J < -neg_tol))

    thr = (p + 1) * J.a - J.gamma * p * (p - 1)
    need = max(J.d(L, p), 8)
    while True:
        sp = s.spectrum(p, need)
        if sp.eigenvalues[-1] >= thr or sp.k == s.pair(p).dim:
            break
        need *= 2
    lam_p = sp.eigenvalues
    beta = int(np.sum(lam_p < thr))
    C = comb(n + 1, p + 1)

    inputs = {**s.describe(), "p": p, "a": J.a, "gamma_M": J.gamma}
    reports = []
    for l in range(1, L + 1):
        dl = J.d(l, p)
        if dl > len(lam_p):
            raise SolverError(f"need {dl} eigenvalues of the p={p} problem")
        if l > len(lam_J):
            raise SolverError(f"need {l} Jacobi eigenvalues")
        left = float(lam_J[l - 1])
        right = float(lam_p[dl - 1] - (p + 1) * J.a + J.gamma * p * (p - 1))
        scale = max(abs(left), abs(right), abs(float(lam_p[dl - 1])))
        r = InequalityReport.judge("thm1.5", left, right, right - left, scale, {**inputs, "l": l, "d(l)": dl},
                                   rel_tol)
        reports.append(r)

    b6 = beta / C
    reports.append(InequalityReport.judge("cor1.6", float(index), b6, index - b6, 0.0,
                                          {**inputs, "beta": beta}, 0.0))
    hyp7 = p * (p - 1) * J.gamma <= p + 1
    b_p = f_betti(s.ops, p, method=s.method, seed=s.seed)
    b7 = b_p / C + n + 1
    if hyp7:
        reports.append(InequalityReport.judge("cor1.7", float(index), b7, index - b7, 0.0,
                                              {**inputs, "betti": b_p}, 0.0))
    else:
        reports.append(InequalityReport.no_judgement("cor1.7", "hypothesis fails", index, b7, inputs))
    if advisory:
        for r in reports:
            r.status += " (advisory: not f-minimal)"
            r.details["fmin_sup"] = J.fmin_sup
    summary = {
        "index": index,
        "jacobi_eigenvalues": lam_J.tolist(),
        "fmin_residual_sup": J.fmin_sup,
        "f_minimal": not advisory,
        "beta": beta,
        "cor1.6_bound": b6,
        "cor1.7_bound": b7,
        "betti_p": b_p,
        "a": J.a,
        "gamma_M": J.gamma,
    }
    return J, summary, reports


# ---------------------------------------------------------------------------
# grids


GRID_P = (0, 1, 2)
GRID_ALPHA = (1.5, 2.0, 3.0)
GRID_K = (1, 2, 3, 4, 5)


def recursion_grid(s: Setting, ps=GRID_P, alphas=GRID_ALPHA, ks=GRID_K, closed: Setting | None = None, rel_tol=REL_TOL):
    """Recursion reports for every (p, α, k): the general recursion and its
    δ-form, plus the radial and distance variants when the weight allows, and
    the closed-average bound (p >= 1) when the enclosing closed surface is given."""
    out = []
    kind = s.weight.kind
    for p in ps:
        for alpha in alphas:
            for k in ks:
                out.append(yang_recursion(s, p, k, alpha, rel_tol))
                out.append(cor13_recursion(s, p, k, alpha, rel_tol))
                if kind == "radial":
                    out.append(cor41_radial(s, p, k, alpha, rel_tol=rel_tol))
                if kind == "distance" and s.comparison is not None:
                    for v in ("ricci", "sectional"):
                        if v == "ricci" and "l" not in s.comparison.bounds:
                            continue
                        if v == "sectional" and not {"l1", "l2"} <= set(s.comparison.bounds):
                            continue
                        out.append(distance_weight_bounds(s, p, k, alpha, v, rel_tol))
        if closed is not None and p >= 1:
            for k in ks:
                out.append(cor14_bound(closed, s, p, k, rel_tol))
    return out


def closed_suite(s: Setting, ps=(1, 2), N=inf, rel_tol=REL_TOL):
    """The spectral gap (both readings) and upper bound, the weighted Gallot–Meyer
    estimate and the vanishing criterion on a closed surface."""
    out = []
    for p in ps:
        out.append(thm11_gap(s, p, rel_tol=rel_tol))
        out.append(thm11_gap(s, p, include_zero=True, rel_tol=rel_tol))
        out.append(thm11_upper(s, p, rel_tol=rel_tol))
        if p * (s.n - p) > 0:
            out.append(gallot_meyer_f(s, p, N=N, rel_tol=rel_tol))
        out.append(vanishing_check(s, p))
    return out
