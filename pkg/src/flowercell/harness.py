"""Monte Carlo experiment orchestration with deterministic substreams.

Replicates are keyed by (seed, model tag, lambda index, replicate index),
so any partition of the replicate range over workers reproduces the serial
run bit for bit.  Chunks are plain dicts built from JSON-able body/domain
specs, which keeps the parallel path picklable.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import laws
from .cell import (cell_metrics, crofton_zero_cell, flower_area_defect,
                   support_point, voronoi_zero_cell)
from .errors import ExperimentError, UnboundedCellError, ValidationError
from .geometry import body_from_json
from .report import EstimatorReport, Welford
from .sampling import (sample_conditioned_lines,
                       sample_conditioned_points, sample_nucleus)

DEFAULT_TOLERANCES = {
    "efron-se": 3.0,            # combined standard errors
    "theorem-constant": 0.15,   # relative
    "density-ks-p": 0.01,       # minimal KS p-value
    "steiner-var": 0.15,        # relative
    "steiner-mean-se": 3.0,
    "limit-shape": 0.05,        # absolute Hausdorff threshold
}

KNOWN_CHECKS = ("efron", "theorem-constant", "density-ks",
                "steiner-gaussian", "limit-shape")


@dataclass
class ExperimentConfig:
    model: str  # voronoi | crofton | steiner | shape
    lambdas: list
    replicates: int
    seed: int
    body: dict = None
    domain: dict = None
    checks: list = field(default_factory=list)
    radius_factor: float = 1.3
    radius: float = None  # absolute truncation radius override
    ks_theta: float = 0.0
    tolerances: dict = field(default_factory=dict)
    max_unbounded_frac: float = 0.01

    def __post_init__(self):
        if self.model not in ("voronoi", "crofton", "steiner", "shape"):
            raise ValidationError(f"unknown model {self.model!r}")
        if self.replicates < 1:
            raise ValidationError("replicates must be >= 1")
        lams = [float(v) for v in self.lambdas]
        if not lams or any(v <= 0 for v in lams) or \
                any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValidationError("lambdas must be positive and strictly "
                                  "increasing")
        self.lambdas = lams
        for c in self.checks:
            if c not in KNOWN_CHECKS:
                raise ValidationError(f"unknown check {c!r}")
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}

    @staticmethod
    def from_json(spec):
        if isinstance(spec, str):
            spec = json.loads(spec)
        return ExperimentConfig(**spec)


@dataclass(frozen=True)
class CheckResult:
    name: str
    lam: float
    passed: bool
    detail: str


@dataclass
class ExperimentResult:
    reports: list
    checks: list
    raw: dict  # per-lambda arrays for downstream analysis

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks)


def worker_count():
    value = os.environ.get("FLOWERCELL_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


# ---------------- replicate chunks ----------------

def _run_chunk(payload):
    """Compute one chunk of replicates; pure function of the payload."""
    model = payload["model"]
    if model == "shape":
        from .shape import antiorthotomic, domain_from_json
        from .geometry import hausdorff_support
        from .sampling import domain_exclusion
        domain = domain_from_json(payload["domain"])
        curve = antiorthotomic(domain)
        excl = domain_exclusion(domain)
        out = {"hausdorff": [], "unbounded": 0}
        for rep in payload["reps"]:
            sample = sample_conditioned_points(
                payload["lam"], None, radius=payload["radius"],
                seed=payload["seed"], stream=("S", payload["li"], rep),
                exclusion=excl)
            try:
                cell = voronoi_zero_cell(sample)
            except UnboundedCellError:
                out["unbounded"] += 1
                continue
            out["hausdorff"].append(hausdorff_support(cell, curve))
        return out

    body = body_from_json(payload["body"])
    lam, li, seed = payload["lam"], payload["li"], payload["seed"]
    out = {"defect_area": [], "defect_perimeter": [], "n_vertices": [],
           "flower_defect": [], "ks_y": [], "unbounded": 0}
    for rep in payload["reps"]:
        try:
            if model == "voronoi":
                sample = sample_conditioned_points(
                    lam, body, radius=payload["radius"], seed=seed,
                    stream=("V", li, rep))
                cell = voronoi_zero_cell(sample)
            else:
                sample = sample_conditioned_lines(
                    lam, body, radius=payload["radius"], seed=seed,
                    stream=("C", li, rep))
                cell = crofton_zero_cell(sample)
        except UnboundedCellError:
            out["unbounded"] += 1
            continue
        met = cell_metrics(cell, body, with_hausdorff=False)
        out["defect_area"].append(met.defect_area)
        out["defect_perimeter"].append(met.defect_perimeter)
        out["n_vertices"].append(float(met.n_vertices))
        if payload["efron"] and model == "voronoi":
            out["flower_defect"].append(flower_area_defect(cell, body))
        if payload["ks_theta"] is not None and model == "voronoi":
            out["ks_y"].append(support_point(cell, body,
                                             payload["ks_theta"])[1])
    return out


def _merge_chunks(chunks):
    merged = {}
    for ch in chunks:
        for key, val in ch.items():
            if key == "unbounded":
                merged[key] = merged.get(key, 0) + val
            else:
                merged.setdefault(key, []).extend(val)
    return merged


def _chunk_payloads(cfg, lam, li, radius):
    reps = list(range(cfg.replicates))
    workers = worker_count()
    size = max(1, (len(reps) + 4 * workers - 1) // (4 * workers)) \
        if workers > 1 else len(reps)
    base = {
        "model": cfg.model, "body": cfg.body, "domain": cfg.domain,
        "lam": lam, "li": li, "seed": cfg.seed, "radius": radius,
        "efron": "efron" in cfg.checks,
        "ks_theta": cfg.ks_theta if "density-ks" in cfg.checks else None,
    }
    return [dict(base, reps=reps[k:k + size])
            for k in range(0, len(reps), size)]


def _map_chunks(payloads):
    workers = worker_count()
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_chunk, payloads))
    return [_run_chunk(p) for p in payloads]


# ---------------- experiment drivers ----------------

def _welford_of(values):
    acc = Welford()
    for v in values:
        acc.add(float(v))
    return acc


def _cell_model_reports(cfg, lam, li, data):
    body = body_from_json(cfg.body)
    cls = laws.BodyClass.SMOOTH if body.kind == "smooth" \
        else laws.BodyClass.POLYGON
    model = laws.Model.VORONOI if cfg.model == "voronoi" else laws.Model.CROFTON
    reports = []
    for functional, key in ((laws.Functional.DEFECT_AREA, "defect_area"),
                            (laws.Functional.DEFECT_PERIMETER,
                             "defect_perimeter"),
                            (laws.Functional.VERTICES, "n_vertices")):
        tc = laws.theorem_constant(laws.LawSpec(model, cls, functional), body)
        factor = tc.rate.factor(lam)
        acc = _welford_of(np.asarray(data[key]) / factor)
        reports.append(EstimatorReport.from_welford(
            f"{cfg.model}.{functional.value}.rescaled", lam, acc,
            theory_value=tc.value, rescale_rate=tc.rate.value, seed=cfg.seed))
    if "efron" in cfg.checks:
        acc_n = _welford_of(data["n_vertices"])
        reports.append(EstimatorReport.from_welford(
            f"{cfg.model}.efron.vertices", lam, acc_n, theory_value=None,
            rescale_rate="", seed=cfg.seed))
        if cfg.model == "voronoi":
            acc_f = _welford_of(4.0 * lam * np.asarray(data["flower_defect"]))
            name = "voronoi.efron.flower_defect"
        else:
            acc_f = _welford_of(lam * np.asarray(data["defect_perimeter"]))
            name = "crofton.efron.perimeter_defect"
        reports.append(EstimatorReport.from_welford(
            name, lam, acc_f, theory_value=None, rescale_rate="",
            seed=cfg.seed))
    return reports


def run_experiment_full(cfg):
    """Run the experiment and evaluate its enabled checks."""
    reports, checks, raw = [], [], {}
    if cfg.model in ("voronoi", "crofton"):
        body = body_from_json(cfg.body)
        extent = 2.0 * body.max_support() if cfg.model == "voronoi" \
            else body.max_support()
        radius = cfg.radius if cfg.radius is not None else \
            max(cfg.radius_factor, 1.05) * 2.0 * body.max_support()
        if radius <= extent:
            radius = 1.5 * extent
        for li, lam in enumerate(cfg.lambdas):
            data = _merge_chunks(_map_chunks(_chunk_payloads(
                cfg, lam, li, radius)))
            n_bad = data["unbounded"]
            if n_bad > cfg.max_unbounded_frac * cfg.replicates:
                raise ExperimentError(
                    f"{n_bad}/{cfg.replicates} unbounded replicates at "
                    f"lambda={lam:g}")
            raw[lam] = data
            reports.extend(_cell_model_reports(cfg, lam, li, data))
        checks = _evaluate_cell_checks(cfg, reports, raw)
    elif cfg.model == "steiner":
        reports, checks, raw = _run_steiner(cfg)
    else:
        reports, checks, raw = _run_shape(cfg)
    return ExperimentResult(reports=reports, checks=checks, raw=raw)


def run_experiment(cfg):
    """Spec-level entry point: the estimator reports only."""
    return run_experiment_full(cfg).reports


def _evaluate_cell_checks(cfg, reports, raw):
    by = {(r.name, r.lam): r for r in reports}
    checks = []
    tol = cfg.tolerances
    for lam in cfg.lambdas:
        if "efron" in cfg.checks:
            lhs = by[f"{cfg.model}.efron.vertices", lam]
            rhs_name = "voronoi.efron.flower_defect" if cfg.model == "voronoi" \
                else "crofton.efron.perimeter_defect"
            rhs = by[rhs_name, lam]
            gap = abs(lhs.mean - rhs.mean)
            budget = tol["efron-se"] * float(np.hypot(lhs.std_error,
                                                      rhs.std_error))
            checks.append(CheckResult(
                "efron", lam, gap <= budget,
                f"|{lhs.mean:.4f} - {rhs.mean:.4f}| = {gap:.4f} "
                f"vs {budget:.4f}"))
        if "theorem-constant" in cfg.checks:
            for fn in ("defect_area", "defect_perimeter", "vertices"):
                r = by[f"{cfg.model}.{fn}.rescaled", lam]
                rel = abs(r.mean - r.theory_value) / abs(r.theory_value)
                checks.append(CheckResult(
                    f"theorem-constant.{fn}", lam,
                    rel <= tol["theorem-constant"],
                    f"rescaled {r.mean:.5f} vs {r.theory_value:.5f} "
                    f"(rel {rel:.2%})"))
        if "density-ks" in cfg.checks and cfg.model == "voronoi":
            checks.append(_ks_check(cfg, lam, raw[lam]["ks_y"],
                                    tol["density-ks-p"]))
    return checks


def _ks_check(cfg, lam, ys, p_min):
    from scipy import stats

    body = body_from_json(cfg.body)
    grid, cdf = laws.f_s_y_cdf_grid(body, cfg.ks_theta)
    # Y decays at the defect-perimeter rate; rescale symbolically
    sample = np.asarray(ys) / laws.Rate.LAM_NEG_2_3.factor(lam)
    res = stats.ks_1samp(sample, lambda y: np.interp(y, grid, cdf))
    return CheckResult("density-ks", lam, bool(res.pvalue > p_min),
                       f"KS D={res.statistic:.4f} p={res.pvalue:.4f} "
                       f"(n={len(sample)})")


def _run_steiner(cfg):
    body = body_from_json(cfg.body)
    reports, checks, raw = [], [], {}
    tol = cfg.tolerances
    for lam in cfg.lambdas:
        z = sample_nucleus(lam, body, cfg.replicates, seed=cfg.seed)
        scaled = np.sqrt(lam) * z
        raw[lam] = {"scaled_nucleus": scaled}
        acc_x, acc_y, acc_v = Welford(), Welford(), Welford()
        for row in scaled:
            acc_x.add(row[0])
            acc_y.add(row[1])
        mx, my = acc_x.mean, acc_y.mean
        for row in scaled:
            acc_v.add((row[0] - mx) ** 2)
            acc_v.add((row[1] - my) ** 2)
        reports.append(EstimatorReport.from_welford(
            "steiner.mean_x", lam, acc_x, 0.0, "", cfg.seed))
        reports.append(EstimatorReport.from_welford(
            "steiner.mean_y", lam, acc_y, 0.0, "", cfg.seed))
        reports.append(EstimatorReport.from_welford(
            "steiner.coord_variance", lam, acc_v,
            laws.NUCLEUS_COORD_VARIANCE, "", cfg.seed))
        if "steiner-gaussian" in cfg.checks:
            var = acc_v.mean
            rel = abs(var - laws.NUCLEUS_COORD_VARIANCE) / \
                laws.NUCLEUS_COORD_VARIANCE
            ok_var = rel <= tol["steiner-var"]
            ok_mean = (abs(mx) <= tol["steiner-mean-se"] * acc_x.std_error
                       and abs(my) <= tol["steiner-mean-se"] * acc_y.std_error)
            checks.append(CheckResult(
                "steiner-gaussian", lam, ok_var and ok_mean,
                f"var {var:.5f} vs {laws.NUCLEUS_COORD_VARIANCE:.5f} "
                f"(rel {rel:.2%}), mean ({mx:.4f}, {my:.4f})"))
    return reports, checks, raw


def _run_shape(cfg):
    from .shape import domain_from_json, limit_shape_check

    domain = domain_from_json(cfg.domain)
    reports, checks, raw = [], [], {}
    for li, lam in enumerate(cfg.lambdas):
        rep = limit_shape_check(domain, lam, cfg.replicates, cfg.seed)
        reports.append(rep)
        raw[lam] = {"hausdorff_mean": rep.mean}
        if "limit-shape" in cfg.checks:
            ok = rep.mean < cfg.tolerances["limit-shape"]
            checks.append(CheckResult(
                "limit-shape", lam, ok,
                f"mean d_H = {rep.mean:.4f} vs {cfg.tolerances['limit-shape']}"))
    if "limit-shape" in cfg.checks and len(cfg.lambdas) > 1:
        means = [raw[lam]["hausdorff_mean"] for lam in cfg.lambdas]
        mono = all(b < a for a, b in zip(means, means[1:]))
        checks.append(CheckResult(
            "limit-shape.monotone", cfg.lambdas[-1], mono,
            f"means {['%.4f' % m for m in means]}"))
    return reports, checks, raw
