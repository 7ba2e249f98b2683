"""Command-line driver: ``weightedhodge {spectrum,verify,jacobi,report}``.

Every run is described by a :class:`RunConfig`, assembled from an optional
``key = value`` config file and command-line flags (flags win). Outputs go to
``--out``, else ``$WEIGHTEDHODGE_OUT``, else the config file's ``out``, else
``./weightedhodge-out``. Numbers are written with 12 significant digits and
no timestamps, so identical configs give byte-identical files.

Exit codes: 0 all requested reports pass, 1 some report fails, 2 invalid
configuration, 3 mesh/solver/estimator failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .dec import write_coo
from .errors import ConfigError, WeightedHodgeError
from .geometry import estimate_curvature
from .inequalities import (
    GRID_ALPHA,
    GRID_K,
    GRID_P,
    REL_TOL,
    InequalityReport,
    Setting,
    closed_suite,
    cor13_recursion,
    cor14_bound,
    cor41_radial,
    distance_weight_bounds,
    gallot_meyer_f,
    jacobi,
    recursion_grid,
    thm11_gap,
    thm11_upper,
    vanishing_check,
    yang_recursion,
)
from .mesh import DomainMesh, SurfaceMesh, extract_domain, load_mesh, make_disk, make_sphere, make_torus
from .spectra import write_eigenvectors_csv, write_spectrum_csv
from .weights import distance_weight, load_weight_csv, radial_weight, smooth_random_weight, zero_weight

ENV_OUT = "WEIGHTEDHODGE_OUT"
DEFAULT_OUT = "weightedhodge-out"
THEOREMS = ("thm11-gap", "thm11-upper", "gallot-meyer", "vanishing", "yang", "cor13", "cor14", "cor41", "distance")


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    fixture: str = "sphere:1,4"
    weight: str = "zero"
    domain: str = ""
    p: list = field(default_factory=lambda: [0])
    k: int = 12
    alpha: list = field(default_factory=lambda: [2.0])
    method: str = "lanczos"
    seed: int = 0
    rel_tol: float = REL_TOL
    bounds: str = ""
    theorem: list = field(default_factory=list)
    all: bool = False
    N: float = math.inf
    levels: list = field(default_factory=list)
    hess_nn: str = ""
    hess_a: float = math.nan
    jacobi_l: int = 3
    eigenvectors: bool = False
    dump_ops: bool = False
    out: str = ""

    def normalized(self) -> dict:
        """Canonical, order-stable dict; ``parse_config(to_text(...))`` reproduces it."""
        d = asdict(self)
        d.pop("out")
        return d

    def to_text(self) -> str:
        lines = []
        for k, v in self.normalized().items():
            if isinstance(v, list):
                v = ",".join(_fmt_scalar(x) for x in v)
            else:
                v = _fmt_scalar(v)
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"


def _fmt_scalar(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "inf" if math.isinf(x) and x > 0 else ("nan" if math.isnan(x) else f"{x:.12g}")
    return str(x)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key, raw):
    t = _FIELD_TYPES[key]
    raw = raw.strip() if isinstance(raw, str) else raw
    try:
        if t == "bool":
            if isinstance(raw, bool):
                return raw
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if t == "int":
            return int(raw)
        if t == "float":
            return float(raw)
        if t == "list":
            if isinstance(raw, list):
                items = raw
            else:
                items = [x for x in raw.split(",") if x.strip()]
            conv = {"p": int, "alpha": float, "levels": int, "theorem": str}[key]
            return [conv(x.strip() if isinstance(x, str) else x) for x in items]
        return str(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_config(text: str) -> dict:
    """Parse ``key = value`` lines ('#' comments allowed); unknown keys are rejected."""
    out = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {ln}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"config line {ln}: unknown key {key!r}")
        out[key] = _coerce(key, val)
    return out


def build_config(args) -> RunConfig:
    vals = {}
    if getattr(args, "config", None):
        try:
            vals.update(parse_config(Path(args.config).read_text()))
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e}") from None
    for name in _FIELD_TYPES:
        v = getattr(args, name, None)
        if v is None or v is False and name in vals:
            continue
        vals[name] = _coerce(name, v) if isinstance(v, str) and _FIELD_TYPES[name] != "str" else v
    env = os.environ.get(ENV_OUT)
    if not getattr(args, "out", None) and env:
        vals["out"] = env
    cfg = RunConfig(**vals)
    if cfg.method not in ("lanczos", "dense"):
        raise ConfigError(f"unknown method {cfg.method!r}")
    for t in cfg.theorem:
        if t not in THEOREMS:
            raise ConfigError(f"unknown theorem {t!r}; choose from {', '.join(THEOREMS)}")
    if any(p not in (0, 1, 2) for p in cfg.p):
        raise ConfigError("degrees must be 0, 1 or 2")
    if cfg.k < 1:
        raise ConfigError("k must be positive")
    return cfg


# ---------------------------------------------------------------------------
# fixtures, domains, weights


@dataclass
class Problem:
    mesh: SurfaceMesh
    kind: str
    params: tuple
    domain: DomainMesh | None


def _numbers(spec, body, count=None):
    try:
        vals = [float(x) for x in body.split(",")] if body else []
    except ValueError:
        raise ConfigError(f"bad numbers in {spec!r}") from None
    if count is not None and len(vals) != count:
        raise ConfigError(f"{spec!r}: expected {count} comma-separated numbers")
    return vals


def load_fixture(spec: str) -> Problem:
    kind, _, body = spec.partition(":")
    if kind == "sphere":
        r, lev = _numbers(spec, body, 2)
        return Problem(make_sphere(r, int(lev)), "sphere", (r, int(lev)), None)
    if kind == "torus":
        R, r, nu, nv = _numbers(spec, body, 4)
        return Problem(make_torus(R, r, int(nu), int(nv)), "torus", (R, r, int(nu), int(nv)), None)
    if kind == "disk":
        r, lev = _numbers(spec, body, 2)
        d = make_disk(r, int(lev))
        return Problem(d.mesh, "disk", (r, int(lev)), d)
    path = Path(spec)
    if path.suffix.lower() not in (".off", ".obj"):
        raise ConfigError(f"unknown fixture {spec!r}: use sphere:r,L | torus:R,r,nu,nv | disk:r,L | a .off/.obj path")
    if not path.exists():
        raise ConfigError(f"mesh file not found: {spec}")
    return Problem(load_mesh(path), "file", (str(path),), None)


def apply_domain(prob: Problem, spec: str) -> Problem:
    if not spec:
        return prob
    kind, _, body = spec.partition(":")
    X = prob.mesh.vertices
    if kind == "cap":
        (z0,) = _numbers(spec, body, 1)
        mask = X[:, 2] > z0
    elif kind == "patch":
        (u0,) = _numbers(spec, body, 1)
        mask = np.abs(np.arctan2(X[:, 1], X[:, 0])) < u0
    elif kind == "ball":
        v, rad = _numbers(spec, body, 2)
        v = int(v)
        if not 0 <= v < len(X):
            raise ConfigError(f"ball centre {v} out of range")
        mask = np.linalg.norm(X - X[v], axis=1) < rad
    else:
        raise ConfigError(f"unknown domain {spec!r}: use cap:z0 | patch:u0 | ball:v,radius")
    if prob.domain is not None:
        mask &= prob.domain.vertex_mask
    return Problem(prob.mesh, prob.kind, prob.params, extract_domain(prob.mesh, mask))


def fixture_bounds(prob: Problem, override: str) -> dict:
    """Curvature bounds for distance weights: exact for the generated fixtures."""
    b = {}
    if prob.kind == "sphere":
        l = 1.0 / prob.params[0] ** 2
        b = {"l": l, "l1": l, "l2": l}
    elif prob.kind == "disk":
        b = {"l": 0.0, "l1": 0.0, "l2": 0.0}
    elif prob.kind == "torus":
        R, r = prob.params[:2]
        lo, hi = -1.0 / (r * (R - r)), 1.0 / (r * (R + r))
        b = {"l": lo, "l1": lo, "l2": hi}
    if override:
        for item in override.split(","):
            key, eq, val = item.partition("=")
            key = key.strip()
            if not eq or key not in ("l", "l1", "l2"):
                raise ConfigError(f"bad bound {item!r}; use l=..,l1=..,l2=..")
            try:
                b[key] = float(val)
            except ValueError:
                raise ConfigError(f"bad bound {item!r}") from None
    return b


def build_setting(cfg: RunConfig, prob: Problem | None = None) -> Setting:
    if prob is None:
        prob = apply_domain(load_fixture(cfg.fixture), cfg.domain)
    m = prob.mesh
    curv = estimate_curvature(m)
    kind, _, body = cfg.weight.partition(":")
    cd = None
    if kind == "zero" and not body:
        w = zero_weight(m)
    elif kind == "radial":
        (a,) = _numbers(cfg.weight, body, 1)
        w = radial_weight(m, curv, a)
    elif kind == "random":
        (seed,) = _numbers(cfg.weight, body, 1)
        w = smooth_random_weight(m, int(seed), c=curv)
    elif kind == "dist":
        x0, a = _numbers(cfg.weight, body, 2)
        if x0 != int(x0) or not 0 <= x0 < m.n_vertices:
            raise ConfigError(f"distance weight centre must be a vertex index, got {x0:g}")
        bounds = fixture_bounds(prob, cfg.bounds)
        if not bounds:
            raise ConfigError("distance weights on file meshes need --bounds l=..,l1=..,l2=..")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            w, cd = distance_weight(m, int(x0), a, bounds, curv)
    elif kind == "file":
        if not body:
            raise ConfigError("file weight needs a path")
        from .weights import custom_weight
        w = custom_weight(m, load_weight_csv(body, m.n_vertices), curv)
    else:
        raise ConfigError(f"unknown weight {cfg.weight!r}: use zero | radial:a | dist:x0,a | file:path | random:seed")
    label = cfg.fixture + (f" [{cfg.domain}]" if cfg.domain else "")
    return Setting(m, w, domain=prob.domain, curv=curv, comparison=cd, label=label, method=cfg.method, seed=cfg.seed)


# ---------------------------------------------------------------------------
# output


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.12g}")
    if isinstance(x, dict):
        return {str(k): _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    return x


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(_num(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _table(reports):
    rows = [("theorem", "p", "k", "alpha", "left", "right", "slack", "tol", "status")]
    for r in reports:
        i = r.inputs
        rows.append((r.theorem, str(i.get("p", "")), str(i.get("k", i.get("l", ""))), _fmt_scalar(i.get("alpha", "")),
                     f"{r.left:.6g}", f"{r.right:.6g}", f"{r.slack:.3g}", f"{r.tolerance:.3g}", r.status))
    widths = [max(len(row[j]) for row in rows) for j in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows) + "\n"


def _outdir(cfg):
    d = Path(cfg.out or DEFAULT_OUT)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _mesh_stats(s: Setting):
    m = s.mesh
    st = {"vertices": m.n_vertices, "edges": m.n_edges, "faces": m.n_faces,
          "euler_characteristic": m.euler_characteristic, "closed": m.is_closed,
          "total_area": s.dv.total_area, "circumcentric_fallback_edges": int(np.sum(s.dv.edge_fallback))}
    if s.domain is not None:
        st["domain_vertices"] = int(len(s.domain.interior_vertices))
    return st


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(cfg: RunConfig) -> int:
    s = build_setting(cfg)
    out = _outdir(cfg)
    solver = {}
    for p in cfg.p:
        res = s.spectrum(p, cfg.k)
        write_spectrum_csv(res, out / f"spectrum_p{p}.csv")
        if cfg.eigenvectors:
            write_eigenvectors_csv(res, out / f"eigenvectors_p{p}.csv")
        solver[f"p{p}"] = {**res.meta, "k": res.k, "kernel_tol": res.kernel_tol, "kernel_dim": res.kernel_dim}
    if cfg.dump_ops:
        _dump_ops(s, out, cfg.p)
    write_json(out / "meta.json", {"config": cfg.normalized(), "mesh": _mesh_stats(s),
                                   "weight": s.weight.describe(), "solver": solver, "version": __version__})
    return 0


def _dump_ops(s: Setting, out: Path, ps):
    write_coo(s.ops.d0, out / "d0.coo")
    write_coo(s.ops.d1, out / "d1.coo")
    for p in ps:
        pr = s.pair(p)
        write_coo(pr.L, out / f"L{p}.coo")
        write_coo(pr.M, out / f"M{p}.coo")


def _verify_reports(cfg: RunConfig, s: Setting, prob: Problem):
    closed = s.is_closed
    if cfg.all:
        if closed:
            reps = closed_suite(s, N=cfg.N, rel_tol=cfg.rel_tol)
            reps += recursion_grid(s, GRID_P, GRID_ALPHA, GRID_K, rel_tol=cfg.rel_tol)
        else:
            reps = [thm11_gap(s, p, rel_tol=cfg.rel_tol) for p in (1, 2)]
            encl = None
            if prob.mesh.is_closed:
                encl = Setting(s.mesh, s.weight, curv=s.curv, dv=s.dv, label=cfg.fixture, method=cfg.method,
                               seed=cfg.seed)
            reps += recursion_grid(s, GRID_P, GRID_ALPHA, GRID_K, closed=encl, rel_tol=cfg.rel_tol)
        return reps
    wanted = cfg.theorem or [t for t in THEOREMS if t != "cor14"]
    kind = s.weight.kind
    reps = []
    for p in cfg.p:
        if p >= 1 and "thm11-gap" in wanted:
            reps.append(thm11_gap(s, p, rel_tol=cfg.rel_tol))
        if closed and p >= 1:
            if "thm11-upper" in wanted:
                reps.append(thm11_upper(s, p, rel_tol=cfg.rel_tol))
            if "gallot-meyer" in wanted and p * (s.n - p) > 0:
                reps.append(gallot_meyer_f(s, p, N=cfg.N, rel_tol=cfg.rel_tol))
        if closed and "vanishing" in wanted:
            reps.append(vanishing_check(s, p))
        for alpha in cfg.alpha:
            if "yang" in wanted:
                reps.append(yang_recursion(s, p, cfg.k, alpha, cfg.rel_tol))
            if "cor13" in wanted:
                reps.append(cor13_recursion(s, p, cfg.k, alpha, cfg.rel_tol))
            if "cor41" in wanted and kind == "radial":
                reps.append(cor41_radial(s, p, cfg.k, alpha, rel_tol=cfg.rel_tol))
            if "distance" in wanted and kind == "distance":
                for v in ("ricci", "sectional"):
                    reps.append(distance_weight_bounds(s, p, cfg.k, alpha, v, cfg.rel_tol))
        if "cor14" in wanted:
            if closed or not prob.mesh.is_closed:
                raise ConfigError("cor14 needs a domain (--domain) inside a closed fixture")
            encl = Setting(s.mesh, s.weight, curv=s.curv, dv=s.dv, method=cfg.method, seed=cfg.seed)
            reps.append(cor14_bound(encl, s, p, cfg.k, cfg.rel_tol))
    return reps


def _refinement(cfg: RunConfig):
    """Sharpness sweep: slack of the sphere-sharp bounds as the fixture is refined."""
    kind, _, body = cfg.fixture.partition(":")
    if kind not in ("sphere", "disk"):
        raise ConfigError("--levels needs a sphere or disk fixture")
    r = _numbers(cfg.fixture, body, 2)[0]
    rows = []
    for lev in cfg.levels:
        c = RunConfig(**{**asdict(cfg), "fixture": f"{kind}:{_fmt_scalar(r)},{lev}", "levels": []})
        s = build_setting(c)
        if kind == "sphere":
            reps = [thm11_gap(s, 1, rel_tol=cfg.rel_tol), thm11_upper(s, 1, rel_tol=cfg.rel_tol)]
        else:
            reps = [yang_recursion(s, 0, 1, 2.0, cfg.rel_tol)]
        rows.append({"level": lev, "vertices": s.mesh.n_vertices,
                     "reports": [r.to_dict() for r in reps]})
    return rows


def cmd_verify(cfg: RunConfig) -> int:
    prob = apply_domain(load_fixture(cfg.fixture), cfg.domain)
    s = build_setting(cfg, prob)
    reps = _verify_reports(cfg, s, prob)
    out = _outdir(cfg)
    write_json(out / "verify.json", [r.to_dict() for r in reps])
    (out / "verify.txt").write_text(_table(reps))
    ok = all(r.passed is not False for r in reps)
    if cfg.levels:
        rows = _refinement(cfg)
        write_json(out / "refinement.json", rows)
        ok &= all(r["pass"] is not False for row in rows for r in row["reports"])
    if cfg.dump_ops:
        _dump_ops(s, out, cfg.p)
    return 0 if ok else 1


def _load_column(path, n):
    return load_weight_csv(path, n)


def cmd_jacobi(cfg: RunConfig) -> int:
    s = build_setting(cfg)
    hess = a = None
    if cfg.hess_nn:
        hess = _load_column(cfg.hess_nn, s.mesh.n_vertices)
    if not math.isnan(cfg.hess_a):
        a = cfg.hess_a
    ps = [p for p in cfg.p if p >= 1] or [1]
    out = _outdir(cfg)
    doc = {"config": cfg.normalized(), "mesh": _mesh_stats(s), "weight": s.weight.describe(), "degrees": []}
    ok = True
    all_reports = []
    for p in ps:
        J, summary, reps = jacobi(s, p, cfg.jacobi_l, hess_nn=hess, a=a, rel_tol=cfg.rel_tol)
        table = [{"l": r.inputs["l"], "d(l)": r.inputs["d(l)"], "lambda_l_jacobi": r.left, "bound": r.right,
                  "slack": r.slack, "pass": r.passed} for r in reps if r.theorem == "thm1.5"]
        doc["degrees"].append({"p": p, **summary, "thm1.5_table": table, "reports": [r.to_dict() for r in reps]})
        all_reports += reps
        # advisory reports (not f-minimal) do not decide the exit code
        if summary["f_minimal"]:
            ok &= all(r.passed is not False for r in reps)
    doc["index"] = doc["degrees"][0]["index"]
    write_json(out / "jacobi.json", doc)
    (out / "jacobi.txt").write_text(f"index: {doc['index']}\n" + _table(all_reports))
    return 0 if ok else 1


def cmd_report(cfg: RunConfig) -> int:
    out = Path(cfg.out or DEFAULT_OUT)
    found = {name: out / name for name in ("meta.json", "verify.json", "jacobi.json", "refinement.json")
             if (out / name).exists()}
    spectra = sorted(out.glob("spectrum_p*.csv")) if out.exists() else []
    if cfg.fixture_given:
        prob = apply_domain(load_fixture(cfg.fixture), cfg.domain)
        _write_curvature(prob, out)
    elif not found and not spectra:
        raise ConfigError(f"nothing to report in {out}")
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    for f in spectra:
        rows = np.genfromtxt(f, delimiter=",", names=True, dtype=None, encoding="utf-8")
        rows = np.atleast_1d(rows)
        lines.append(f"{f.name}: {len(rows)} eigenvalues, smallest "
                     + ", ".join(f"{v:.6g}" for v in rows["eigenvalue"][:6]))
        with open(out / (f.stem + ".dat"), "w") as fh:
            fh.write("# index eigenvalue\n")
            for i, v in zip(rows["index"], rows["eigenvalue"]):
                fh.write(f"{int(i)} {float(v):.12g}\n")
    if "verify.json" in found:
        reps = json.loads(found["verify.json"].read_text())
        npass = sum(r["pass"] is True for r in reps)
        nfail = sum(r["pass"] is False for r in reps)
        lines.append(f"verify: {len(reps)} reports, {npass} pass, {nfail} fail, {len(reps) - npass - nfail} without judgement")
        for r in reps:
            if r["pass"] is False:
                lines.append(f"  FAIL {r['theorem']} p={r['inputs'].get('p')} slack={r['slack']}")
        with open(out / "slack.dat", "w") as fh:
            fh.write("# row theorem p k alpha slack tolerance\n")
            for i, r in enumerate(reps):
                if r["slack"] is None:
                    continue
                inp = r["inputs"]
                fh.write(f"{i} {r['theorem']} {inp.get('p', -1)} {inp.get('k', inp.get('l', -1))} "
                         f"{_fmt_scalar(float(inp.get('alpha', math.nan)))} {r['slack']:.12g} {r['tolerance']:.12g}\n")
    if "jacobi.json" in found:
        doc = json.loads(found["jacobi.json"].read_text())
        for d in doc["degrees"]:
            lines.append(f"jacobi p={d['p']}: index {d['index']}, cor1.6 bound {d['cor1.6_bound']}, "
                         f"cor1.7 bound {d['cor1.7_bound']}, f-minimal {d['f_minimal']}")
        with open(out / "jacobi_spectrum.dat", "w") as fh:
            fh.write("# index eigenvalue\n")
            for i, v in enumerate(doc["degrees"][0]["jacobi_eigenvalues"]):
                fh.write(f"{i} {v:.12g}\n")
    if "refinement.json" in found:
        rows = json.loads(found["refinement.json"].read_text())
        names = [r["theorem"] for r in rows[0]["reports"]]
        for j, name in enumerate(names):
            with open(out / f"refinement_{name}.dat", "w") as fh:
                fh.write("# level vertices slack tolerance\n")
                for row in rows:
                    r = row["reports"][j]
                    fh.write(f"{row['level']} {row['vertices']} {r['slack']:.12g} {r['tolerance']:.12g}\n")
            lines.append(f"refinement {name}: " + ", ".join(
                f"L{row['level']} slack {row['reports'][j]['slack']:.4g}" for row in rows))
    if cfg.fixture_given:
        lines.append("curvature.csv written")
    text = "\n".join(lines) + "\n"
    (out / "summary.txt").write_text(text)
    sys.stdout.write(text)
    return 0


def _write_curvature(prob: Problem, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    c = estimate_curvature(prob.mesh)
    with open(out / "curvature.csv", "w") as fh:
        fh.write("vertex,k1,k2,H,K,nx,ny,nz\n")
        for i in range(prob.mesh.n_vertices):
            vals = (c.k1[i], c.k2[i], c.H[i], c.K[i], *c.normals[i])
            fh.write(f"{i}," + ",".join(f"{v:.12g}" for v in vals) + "\n")


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def make_parser():
    ap = _Parser(prog="weightedhodge", description="Spectra of drift Hodge Laplacians on triangle meshes "
                                                   "and checks of their eigenvalue inequalities.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="key = value config file (flags win)")
        p.add_argument("--fixture", help="sphere:r,L | torus:R,r,nu,nv | disk:r,L | mesh.off/.obj")
        p.add_argument("--weight", help="zero | radial:a | dist:x0,a | file:path | random:seed")
        p.add_argument("--domain", help="cap:z0 | patch:u0 | ball:v,radius (Dirichlet subdomain)")
        p.add_argument("--bounds", help="curvature bounds for distance weights, l=..,l1=..,l2=..")
        p.add_argument("-p", dest="p", help="form degree(s), comma separated")
        p.add_argument("-k", dest="k", type=int, help="eigenpair count (spectrum) or recursion index k (verify)")
        p.add_argument("--alpha", help="exponent(s) for the recursion formulas, comma separated")
        p.add_argument("--method", choices=("lanczos", "dense"))
        p.add_argument("--seed", type=int)
        p.add_argument("--rel-tol", dest="rel_tol", type=float, help="relative slack tolerance")
        p.add_argument("--out", help=f"output directory (else ${ENV_OUT}, else ./{DEFAULT_OUT})")
        p.add_argument("--dump-ops", dest="dump_ops", action="store_true", default=None,
                       help="write d0, d1, L_p, M_p in coordinate format")

    sp = sub.add_parser("spectrum", help="eigenvalues of Δ_f per degree")
    common(sp)
    sp.add_argument("--eigenvectors", action="store_true", default=None)

    vp = sub.add_parser("verify", help="evaluate the inequalities")
    common(vp)
    vp.add_argument("--all", action="store_true", default=None, help="run the full grid")
    vp.add_argument("--theorem", action="append", help=f"one of {', '.join(THEOREMS)} (repeatable)")
    vp.add_argument("--N", dest="N", type=float, help="dimension parameter of the Gallot–Meyer estimate")
    vp.add_argument("--levels", help="refinement levels for a sharpness sweep, e.g. 3,4,5")

    jp = sub.add_parser("jacobi", help="index of the weighted Jacobi operator")
    common(jp)
    jp.add_argument("--hess-nn", dest="hess_nn", help="CSV (vertex, value) of the ambient Hess f(ν,ν)")
    jp.add_argument("--hess-a", dest="hess_a", type=float, help="lower bound a of the ambient Hessian")
    jp.add_argument("-L", dest="jacobi_l", type=int, help="rows of the eigenvalue comparison table")

    rp = sub.add_parser("report", help="summarize an output directory")
    common(rp)
    return ap


def _error_record(cfg_out, exc, code):
    rec = {"error": type(exc).__name__, "code": getattr(exc, "code", None), "message": str(exc), "exit": code}
    sys.stderr.write(json.dumps(rec) + "\n")
    if cfg_out:
        try:
            d = Path(cfg_out)
            d.mkdir(parents=True, exist_ok=True)
            write_json(d / "error.json", rec)
        except OSError:
            pass


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out_hint = os.environ.get(ENV_OUT, "")
    try:
        args = make_parser().parse_args(argv)
        if getattr(args, "theorem", None):
            args.theorem = list(args.theorem)
        out_hint = args.out or out_hint
        cfg = build_config(args)
        out_hint = cfg.out or DEFAULT_OUT
        cfg.fixture_given = args.fixture is not None
        cmd = {"spectrum": cmd_spectrum, "verify": cmd_verify, "jacobi": cmd_jacobi, "report": cmd_report}
        return cmd[args.command](cfg)
    except SystemExit as e:          # --help / --version
        return int(e.code or 0)
    except ConfigError as e:
        _error_record(out_hint, e, 2)
        return 2
    except WeightedHodgeError as e:
        _error_record(out_hint, e, 3)
        return 3


if __name__ == "__main__":
    sys.exit(main())
