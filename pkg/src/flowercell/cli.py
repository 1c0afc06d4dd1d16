"""Command-line interface.

Subcommands: simulate (one realization to CSV/JSON/SVG), estimate (Monte
Carlo experiment with exported tables, report figure, and pass/fail
checks), constants (limit constants for a body), shape (domain
decomposition and overlay), render (scene to SVG).

Exit codes: 0 all enabled checks pass, 1 usage/validation error,
2 statistical check failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import laws
from .cell import crofton_zero_cell, voronoi_zero_cell
from .errors import FlowercellError
from .geometry import body_from_json
from .harness import ExperimentConfig, run_experiment_full
from .render import render_svg, save_report_figure
from .report import export
from .sampling import sample_conditioned_lines, sample_conditioned_points


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _add_common(p):
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--radius", type=float, default=None,
                   help="absolute truncation radius override")
    p.add_argument("--out", default=".", help="output directory")


def _apply_overrides(spec, args):
    if args.seed is not None:
        spec["seed"] = args.seed
    if args.lam is not None:
        spec["lambdas"] = [args.lam]
    if args.reps is not None:
        spec["replicates"] = args.reps
    if getattr(args, "radius", None) is not None:
        spec["radius"] = args.radius
    return spec


def _cmd_simulate(args):
    spec = _apply_overrides(_load_json(args.config), args)
    cfg = ExperimentConfig(**{k: v for k, v in spec.items()
                              if k in ExperimentConfig.__dataclass_fields__})
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    body = body_from_json(cfg.body)
    lam = cfg.lambdas[0]
    if cfg.model == "crofton":
        sample = sample_conditioned_lines(lam, body, radius=cfg.radius,
                                          seed=cfg.seed)
        cell = crofton_zero_cell(sample)
        rows = sample.lines
        header = ["r", "theta"]
    else:
        sample = sample_conditioned_points(lam, body, radius=cfg.radius,
                                           seed=cfg.seed)
        cell = voronoi_zero_cell(sample)
        rows = sample.points
        header = ["x", "y"]
    with open(out / "sample.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
    with open(out / "cell.json", "w") as fh:
        json.dump(cell.to_json(), fh, indent=2)
        fh.write("\n")
    scene = {"body": body, "cell": cell}
    if cfg.model == "voronoi":
        scene["points"] = sample.points
        scene["flower_scale"] = 2.0
    render_svg(scene, out / "scene.svg")
    print(f"wrote {out / 'sample.csv'}, {out / 'cell.json'}, "
          f"{out / 'scene.svg'}")
    return 0


def _cmd_estimate(args):
    spec = _apply_overrides(_load_json(args.config), args)
    cfg = ExperimentConfig(**spec)
    result = run_experiment_full(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    export(result.reports, "csv", out / "reports.csv")
    export(result.reports, "json", out / "reports.json")
    save_report_figure(result.reports, out / "reports.png")
    for chk in result.checks:
        status = "PASS" if chk.passed else "FAIL"
        print(f"[{status}] {chk.name} @ lambda={chk.lam:g}: {chk.detail}")
    print(f"wrote {out / 'reports.csv'}, {out / 'reports.json'}, "
          f"{out / 'reports.png'}")
    return 0 if result.all_passed else 2


def _cmd_constants(args):
    spec = _load_json(args.config)
    body = body_from_json(spec["body"] if "body" in spec else spec)
    rows = laws.all_constants(body)
    if args.format == "json":
        payload = [{"name": c.name, "constant": c.value, "rate": c.rate.value}
                   for c in rows]
        text = json.dumps(payload, indent=2) + "\n"
    else:
        lines = ["name,constant,rate"]
        lines += [f"{c.name},{c.value!r},{c.rate.value}" for c in rows]
        text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    return 0


def _cmd_shape(args):
    from .sampling import domain_exclusion, sample_conditioned_points as scp
    from .shape import antiorthotomic, domain_from_json, domain_limit_constants

    spec = _apply_overrides(_load_json(args.config), args)
    domain = domain_from_json(spec["domain"])
    curve = antiorthotomic(domain)
    decomp = curve.decomposition
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "is_flower_already": decomp.is_flower_already,
        "contact_arcs": [list(a) for a in decomp.contact_arcs],
        "filler_arcs": [{"center": arc.center.tolist(),
                         "radius": arc.radius,
                         "interval": list(arc.interval)}
                        for arc in decomp.filler_arcs],
        "constants": {fn.value: domain_limit_constants(domain, fn)
                      for fn in laws.Functional},
    }
    with open(out / "decomposition.json", "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    lam = float(spec.get("lambdas", [1000.0])[0])
    seed = int(spec.get("seed", 0))
    excl = domain_exclusion(domain)
    sample = scp(lam, None, radius=2.5 * excl.r_max, seed=seed,
                 exclusion=excl)
    cell = voronoi_zero_cell(sample)
    render_svg({"domain": domain, "flower": curve.decomposition,
                "gamma": curve.points, "cell": cell}, out / "shape.svg")
    print(f"wrote {out / 'decomposition.json'}, {out / 'shape.svg'}")
    return 0


def _cmd_render(args):
    spec = _load_json(args.config)
    scene = {}
    if "body" in spec:
        scene["body"] = body_from_json(spec["body"])
        if "flower_scale" in spec:
            scene["flower_scale"] = spec["flower_scale"]
    if "points" in spec:
        scene["points"] = np.asarray(spec["points"], dtype=float)
    if "gamma" in spec:
        scene["gamma"] = np.asarray(spec["gamma"], dtype=float)
    out = args.out if args.out != "." else "scene.svg"
    render_svg(scene, out)
    print(f"wrote {out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="flowercell",
        description="Conditioned Poisson-Voronoi / Crofton zero cells: "
                    "simulation, limit constants, and verification")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one realization to CSV/JSON/SVG")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="Monte Carlo experiment with checks")
    _add_common(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("constants", help="limit constants for a body")
    p.add_argument("--config", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_constants)

    p = sub.add_parser("shape", help="domain decomposition and overlay")
    _add_common(p)
    p.set_defaults(func=_cmd_shape)

    p = sub.add_parser("render", help="scene JSON to SVG")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_render)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FlowercellError, FileNotFoundError, KeyError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
