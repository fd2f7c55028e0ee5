import json
import math
import shutil
from pathlib import Path

import numpy as np
import pytest
import yaml

from polycover.cli import EXIT_INVALID, EXIT_IO, EXIT_NONCONVERGENCE, EXIT_OK, main
from polycover.errors import DegenerateInput
from polycover.coverage import AreaEstimator, EstimatorParams
from polycover.geometry import CircleConfiguration, ConvexPolygon, is_convex, signed_distance
from polycover.pipeline import ConfigError, PolygonSpec, RunConfig, generate_polygon, run, run_pipeline
from polycover.svg import render_svg, view_box

DATA = Path(__file__).parent / "data"
CONFIGS = Path(__file__).parent.parent / "configs"
SQUARE = {"kind": "rectangle", "params": {"w": 10, "h": 10}}


def small_config(**overrides):
    data = {"polygon": SQUARE, "n": 7, "r": 1.0, "seed": 3, "estimator": {"samples": 50_000}}
    data.update(overrides)
    return RunConfig.from_dict(data)


def timing_free(report_dict):
    return {k: v for k, v in report_dict.items() if k != "wall_time_ms"}


# --- polygon generation -----------------------------------------------------------


def test_rectangle_and_hexagon():
    rect = generate_polygon(PolygonSpec("rectangle", {"w": 4, "h": 2}))
    assert len(rect) == 4 and rect.area == pytest.approx(8.0)
    hexagon = generate_polygon(PolygonSpec.parse("regular_ngon:k=6,circumradius=1"))
    assert len(hexagon) == 6 and hexagon.area == pytest.approx(3 * math.sqrt(3) / 2)


def test_random_convex_contains_its_points():
    poly = generate_polygon(PolygonSpec("random_convex", {"point_count": 30, "seed": 7}))
    pts = np.random.default_rng(7).uniform(0, 10, size=(30, 2))
    assert is_convex(poly.vertices)
    assert np.all(signed_distance(pts, poly) >= -1e-9)
    again = generate_polygon(PolygonSpec("random_convex", {"point_count": 30, "seed": 7}))
    np.testing.assert_array_equal(poly.vertices, again.vertices)


def test_transform_applied():
    poly = generate_polygon(PolygonSpec.parse("rectangle:w=4,h=2,rotation=0,tx=3,ty=-1"))
    assert poly.vertices.min(axis=0) == pytest.approx([3.0, -1.0])


def test_bad_polygon_specs():
    with pytest.raises(ConfigError):
        PolygonSpec("triangle")
    with pytest.raises(ConfigError):
        PolygonSpec("rectangle", {"w": 1, "depth": 2})
    with pytest.raises(ConfigError):
        generate_polygon(PolygonSpec("rectangle", {"w": 1}))
    with pytest.raises(ConfigError):
        PolygonSpec.parse("rectangle:w")


# --- configuration ------------------------------------------------------------------


@pytest.mark.parametrize(
    "data",
    [
        {"polygon": SQUARE, "n": 7, "r": 1.0, "colour": "red"},
        {"polygon": SQUARE, "n": 7},
        {"polygon": SQUARE, "n": 0, "r": 1.0},
        {"polygon": SQUARE, "n": 7, "r": -1.0},
        {"polygon": SQUARE, "n": 7, "r": 1.0, "dynamics": {"friction": 1}},
        {"polygon": SQUARE, "n": 7, "r": 1.0, "boundary": {"eta": -1}},
        {"polygon": SQUARE, "n": 7, "r": 1.0, "output": {"pdf": "x"}},
        {"polygon": "square", "n": 7, "r": 1.0},
    ],
)
def test_invalid_configs_rejected(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_derived_seeds_are_stable_and_distinct():
    seeds = small_config().derived_seeds()
    assert seeds == small_config().derived_seeds()
    assert len(set(seeds.values())) == 3
    assert small_config(seed=4).derived_seeds() != seeds


def test_corpus_configs_load():
    for path in sorted(CONFIGS.glob("*.yaml")):
        RunConfig.load(path)


# --- pipeline ---------------------------------------------------------------------


def test_single_circle_run():
    cfg = small_config(n=1, estimator={"samples": 400_000})
    result = run(cfg)
    rep = result.report
    est = AreaEstimator(result.polygon, EstimatorParams(**rep.estimator_meta))
    err = est.error_bound(result.final.centers, 1.0) / 100
    assert abs(rep.coverage_rate - math.pi / 100) <= err
    assert signed_distance(result.final.centers, result.polygon).min() > 0
    assert rep.converged and rep.min_gap is math.inf


def test_seven_circle_run_and_monotonicity():
    result = run(small_config(estimator={"samples": 200_000}))
    rep = result.report
    assert rep.min_gap >= -0.05 * 2
    est = AreaEstimator(result.polygon, EstimatorParams(**rep.estimator_meta))
    err = est.error_bound(result.final.centers, 1.0) / 100
    assert rep.coverage_rate >= 7 * math.pi / 100 - 2 * err - max(0.0, -rep.min_gap) * 7 * 2 / 100
    assert rep.coverage_rate >= rep.stages["initialization"]["coverage_rate"]
    assert set(rep.stages) == {"initialization", "dynamics", "boundary"}
    assert rep.dynamics_trace and rep.estimator_meta["samples"] == 200_000


def test_pipeline_is_deterministic():
    a = run_pipeline(small_config()).to_dict()
    b = run_pipeline(small_config()).to_dict()
    assert json.dumps(timing_free(a), sort_keys=True) == json.dumps(timing_free(b), sort_keys=True)


def test_stage_label_on_failure():
    collinear = RunConfig.from_dict({"polygon": [[0, 0], [1, 0], [2, 0]], "n": 3, "r": 1.0})
    with pytest.raises(DegenerateInput, match=r"^\[config\]"):
        run_pipeline(collinear)


# --- SVG ----------------------------------------------------------------------------


def test_svg_golden_file():
    poly = ConvexPolygon([(0, 0), (10, 0), (10, 10), (0, 10)])
    cfg = CircleConfiguration(np.array([[2.5, 2.5], [7.5, 2.5], [5.0, 7.0]]), 2.0)
    text = render_svg(poly, cfg, encircling_points=True, voronoi=True)
    assert text == (DATA / "golden_three_circles.svg").read_text()


def test_svg_counts_and_view_box():
    poly = ConvexPolygon([(0, 0), (10, 0), (10, 10), (0, 10)])
    assert render_svg(poly, None).count("<circle") == 0
    cfg = CircleConfiguration(np.random.default_rng(0).uniform(1, 9, size=(7, 2)), 1.0)
    assert render_svg(poly, cfg).count("<circle") == 7
    assert view_box(poly) == pytest.approx((-0.5, -10.5, 11.0, 11.0))


# --- command line ---------------------------------------------------------------------


def write_yaml(path, data):
    path.write_text(yaml.safe_dump(data))
    return path


def test_cli_run_writes_report_and_svg(tmp_path):
    cfg = write_yaml(tmp_path / "c.yaml", {"polygon": SQUARE, "n": 7, "r": 1.0, "seed": 2, "estimator": {"samples": 20_000}})
    out = tmp_path / "r.json"
    assert main(["run", str(cfg), "--out", str(out), "--svg", "--quiet"]) == EXIT_OK
    data = json.loads(out.read_text())
    assert data["n"] == 7 and data["schema_version"] == "1.0"
    assert (tmp_path / "r.svg").read_text().count("<circle") >= 7
    # rerun with the same seed: identical modulo timing
    out2 = tmp_path / "r2.json"
    main(["run", str(cfg), "--out", str(out2), "--quiet"])
    assert timing_free(json.loads(out2.read_text())) == timing_free(data)


def test_cli_seed_and_samples_override(tmp_path):
    cfg = write_yaml(tmp_path / "c.yaml", {"polygon": SQUARE, "n": 3, "r": 1.0})
    out = tmp_path / "r.json"
    assert main(["run", str(cfg), "--seed", "9", "--samples", "1234", "--out", str(out), "--quiet"]) == EXIT_OK
    assert json.loads(out.read_text())["estimator_meta"]["samples"] == 1234


def test_cli_exit_codes(tmp_path):
    bad = write_yaml(tmp_path / "bad.yaml", {"polygon": SQUARE, "n": 7, "r": 1.0, "mystery": 1})
    assert main(["run", str(bad), "--quiet"]) == EXIT_INVALID
    assert main(["run", str(tmp_path / "missing.yaml"), "--quiet"]) == EXIT_IO
    capped = write_yaml(
        tmp_path / "capped.yaml",
        {"polygon": SQUARE, "n": 7, "r": 1.0, "estimator": {"samples": 10_000}, "dynamics": {"max_rounds": 1}},
    )
    out = tmp_path / "capped.json"
    assert main(["run", str(capped), "--out", str(out), "--quiet"]) == EXIT_NONCONVERGENCE
    assert json.loads(out.read_text())["converged"] is False


def test_cli_batch_and_render(tmp_path):
    cfgs = tmp_path / "cfgs"
    cfgs.mkdir()
    write_yaml(cfgs / "a.yaml", {"polygon": SQUARE, "n": 2, "r": 1.0, "estimator": {"samples": 10_000}})
    write_yaml(cfgs / "b.yaml", {"polygon": SQUARE, "n": 2})
    out = tmp_path / "reports"
    assert main(["batch", str(cfgs), "--out", str(out), "--jobs", "1", "--quiet"]) == EXIT_INVALID
    assert (out / "a.json").exists() and not (out / "b.json").exists()
    svg = tmp_path / "a.svg"
    assert main(["render", str(out / "a.json"), "--svg", str(svg), "--voronoi", "--encircling-points", "--quiet"]) == EXIT_OK
    assert svg.read_text().startswith("<?xml")


def test_cli_gen_polygon(tmp_path, capsys):
    assert main(["gen-polygon", "regular_ngon:k=6,circumradius=1"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["area"] == pytest.approx(3 * math.sqrt(3) / 2)
    spec = write_yaml(tmp_path / "p.yaml", {"kind": "random_convex", "params": {"point_count": 30, "seed": 7}})
    out = tmp_path / "p.json"
    assert main(["gen-polygon", str(spec), "--out", str(out)]) == EXIT_OK
    assert len(json.loads(out.read_text())["vertices"]) >= 3
    assert main(["gen-polygon", "hexagon:k=6", "--quiet"]) == EXIT_INVALID


def test_cli_batch_corpus(tmp_path):
    corpus = tmp_path / "corpus"
    shutil.copytree(CONFIGS, corpus)
    assert main(["batch", str(corpus), "--out", str(tmp_path / "out"), "--samples", "20000", "--quiet"]) == EXIT_OK
    assert len(list((tmp_path / "out").glob("*.json"))) == len(list(CONFIGS.glob("*.yaml")))
