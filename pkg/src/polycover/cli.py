"""``polycover`` command line.

Exit codes: 0 success, 2 invalid input, 3 non-convergence (the report is
still written), 4 IO failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import yaml

from .errors import DegenerateInput, InfeasibleFit, InvalidArgument, NumericalBlowup
from .metrics import RunReport
from .pipeline import PolygonSpec, RunConfig, generate_polygon, run, strict_params
from .svg import render_report, render_svg

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGENCE, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("polycover")


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    data = {k: getattr(config, k) for k in RunConfig.TOP_KEYS}
    if args.seed is not None:
        data["seed"] = args.seed
    if args.samples is not None:
        data["estimator"] = {**config.estimator, "samples": args.samples}
    return RunConfig(**data)


def _execute(config: RunConfig, json_path, svg_path) -> tuple[int, RunReport]:
    result = run(config)
    report = result.report
    if json_path:
        Path(json_path).write_text(report.to_json() + "\n")
    if svg_path:
        render_svg(result.polygon, result.final, report, svg_path)
    if not report.converged:
        for message in report.messages:
            log.warning("%s", message)
    return (EXIT_OK if report.converged else EXIT_NONCONVERGENCE), report


def _guarded(fn, *a) -> int:
    try:
        return fn(*a)
    except (InvalidArgument, DegenerateInput, InfeasibleFit) as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INVALID
    except NumericalBlowup as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        log.error("io error: %s", exc)
        return EXIT_IO


def _cmd_run(args) -> int:
    config = _apply_overrides(RunConfig.load(args.config), args)
    json_path = args.out or config.output.get("json")
    svg_path = args.svg or config.output.get("svg")
    code, report = _execute(config, json_path, svg_path)
    if not json_path and not args.quiet:
        print(report.to_json())
    return code


def _batch_one(path: str, out_dir: str, seed, samples, with_svg: bool) -> tuple[str, int]:
    logging.basicConfig(level=logging.WARNING)
    ns = argparse.Namespace(seed=seed, samples=samples)

    def go():
        config = _apply_overrides(RunConfig.load(path), ns)
        stem = Path(path).stem
        svg = str(Path(out_dir) / f"{stem}.svg") if with_svg else None
        return _execute(config, str(Path(out_dir) / f"{stem}.json"), svg)[0]

    return path, _guarded(go)


def _cmd_batch(args) -> int:
    directory = Path(args.directory)
    configs = sorted(p for p in directory.iterdir() if p.suffix in (".yaml", ".yml", ".json"))
    out_dir = Path(args.out or directory / "reports")
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(str(p), str(out_dir), args.seed, args.samples, bool(args.svg)) for p in configs]
    worst = EXIT_OK
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        for path, code in pool.map(_batch_one, *zip(*jobs)) if jobs else []:
            if not args.quiet:
                print(f"{code}\t{path}")
            worst = max(worst, code)
    return worst


def _cmd_render(args) -> int:
    report = RunReport.from_dict(json.loads(Path(args.report).read_text()))
    out = args.svg or args.out or str(Path(args.report).with_suffix(".svg"))
    render_report(report, out, encircling_points=args.encircling_points, voronoi=args.voronoi)
    return EXIT_OK


def _cmd_gen_polygon(args) -> int:
    source = Path(args.spec)
    if source.suffix in (".yaml", ".yml", ".json") and source.exists():
        data = yaml.safe_load(source.read_text())
        spec = strict_params(PolygonSpec, data, "polygon")
    else:
        spec = PolygonSpec.parse(args.spec)
    poly = generate_polygon(spec, args.seed or 0)
    text = json.dumps({"vertices": poly.vertices.tolist(), "area": poly.area, "perimeter": poly.perimeter}, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    elif not args.quiet:
        print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polycover", description="Cover a convex polygon with n congruent circles.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="override the global seed")
    common.add_argument("--samples", type=int, help="override the Monte Carlo sample count")
    common.add_argument("--out", help="output path (report JSON, or directory for batch)")
    common.add_argument("--svg", nargs="?", const=True, default=None, help="also write an SVG (path for run/render)")
    common.add_argument("--quiet", action="store_true", help="suppress stdout output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run one configuration file")
    p.add_argument("config")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("batch", parents=[common], help="run every config in a directory concurrently")
    p.add_argument("directory")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=_cmd_batch)

    p = sub.add_parser("render", parents=[common], help="render a report JSON to SVG")
    p.add_argument("report")
    p.add_argument("--encircling-points", action="store_true")
    p.add_argument("--voronoi", action="store_true")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("gen-polygon", parents=[common], help="generate a polygon from a spec string or file")
    p.add_argument("spec", help="e.g. regular_ngon:k=6,circumradius=1 or a YAML/JSON file")
    p.set_defaults(func=_cmd_gen_polygon)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO, format="%(levelname)s %(message)s")
    if args.command in ("run", "render") and args.svg is True:
        args.svg = None if args.command == "render" else str(Path(args.out or "report.json").with_suffix(".svg"))
    return _guarded(args.func, args)


if __name__ == "__main__":
    sys.exit(main())
