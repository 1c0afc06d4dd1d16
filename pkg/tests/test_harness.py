import json
import os
import xml.etree.ElementTree as ET

import pytest

import flowercell as fc
from flowercell.errors import ExperimentError, ValidationError
from flowercell.report import CSV_HEADER, Welford, load_json

DISK_SPEC = {"kind": "smooth", "model": "disk", "params": {"radius": 1.0}}
SQUARE_SPEC = {"kind": "polygon", "vertices": [[1, -1], [1, 1], [-1, 1],
                                               [-1, -1]]}


def small_cfg(**over):
    base = dict(model="voronoi", lambdas=[80.0], replicates=40, seed=21,
                body=DISK_SPEC, checks=["efron"])
    base.update(over)
    return fc.ExperimentConfig(**base)


class TestWelford:
    def test_against_numpy(self, rng):
        xs = rng.normal(2.0, 3.0, 500)
        acc = Welford()
        for x in xs:
            acc.add(x)
        assert acc.mean == pytest.approx(xs.mean(), rel=1e-12)
        assert acc.variance == pytest.approx(xs.var(ddof=1), rel=1e-10)

    def test_merge(self, rng):
        xs = rng.normal(0, 1, 400)
        a, b = Welford(), Welford()
        for x in xs[:150]:
            a.add(x)
        for x in xs[150:]:
            b.add(x)
        a.merge(b)
        assert a.mean == pytest.approx(xs.mean(), rel=1e-12)
        assert a.variance == pytest.approx(xs.var(ddof=1), rel=1e-10)


class TestReports:
    def test_roundtrip_json(self, tmp_path):
        rep = fc.EstimatorReport(name="x", lam=10.0, n=5, mean=1.0,
                                 variance=0.2, std_error=0.2,
                                 ci95=(1 - 0.392, 1 + 0.392),
                                 theory_value=1.1,
                                 rescale_rate="lambda^(-2/3)", seed=3)
        path = tmp_path / "r.json"
        fc.export([rep], "json", path)
        back = load_json(path)
        assert back == [rep]
        fc.export(back, "json", tmp_path / "r2.json")
        assert (tmp_path / "r.json").read_text() == \
            (tmp_path / "r2.json").read_text()

    def test_csv_header_and_rows(self, tmp_path):
        rep = fc.EstimatorReport(name="x", lam=10.0, n=5, mean=1.0,
                                 variance=0.2, std_error=0.2,
                                 ci95=(1 - 0.392, 1 + 0.392),
                                 theory_value=None,
                                 rescale_rate="", seed=3)
        path = tmp_path / "r.csv"
        fc.export([rep], "csv", path)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert len(lines) == 2

    def test_empty_csv_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        fc.export([], "csv", path)
        assert path.read_text().splitlines() == [",".join(CSV_HEADER)]

    def test_negative_variance_rejected(self):
        with pytest.raises(ValidationError):
            fc.EstimatorReport(name="x", lam=1.0, n=1, mean=0.0,
                               variance=-1.0, std_error=0.0,
                               ci95=(0.0, 0.0), theory_value=None,
                               rescale_rate="", seed=0)


class TestConfig:
    def test_lambdas_must_increase(self):
        with pytest.raises(ValidationError):
            small_cfg(lambdas=[100.0, 50.0])

    def test_replicates_positive(self):
        with pytest.raises(ValidationError):
            small_cfg(replicates=0)

    def test_unknown_check(self):
        with pytest.raises(ValidationError):
            small_cfg(checks=["telepathy"])

    def test_unknown_model(self):
        with pytest.raises(ValidationError):
            small_cfg(model="hyperbolic")

    def test_from_json(self):
        cfg = fc.ExperimentConfig.from_json(json.dumps(
            dict(model="voronoi", lambdas=[10.0], replicates=2, seed=1,
                 body=DISK_SPEC)))
        assert cfg.lambdas == [10.0]


class TestRunExperiment:
    def test_deterministic_reports(self):
        r1 = fc.run_experiment(small_cfg())
        r2 = fc.run_experiment(small_cfg())
        assert r1 == r2

    def test_efron_check_passes(self):
        res = fc.run_experiment_full(small_cfg(replicates=600))
        efron = [c for c in res.checks if c.name == "efron"]
        assert efron and all(c.passed for c in efron)

    def test_parallel_matches_serial(self):
        cfg = small_cfg(replicates=30)
        serial = fc.run_experiment(cfg)
        os.environ["FLOWERCELL_THREADS"] = "3"
        try:
            parallel = fc.run_experiment(cfg)
        finally:
            del os.environ["FLOWERCELL_THREADS"]
        assert serial == parallel

    def test_crofton_model(self):
        cfg = small_cfg(model="crofton", checks=["efron"], replicates=300,
                        lambdas=[60.0])
        res = fc.run_experiment_full(cfg)
        efron = [c for c in res.checks if c.name == "efron"]
        assert efron and all(c.passed for c in efron)

    def test_steiner_model(self):
        cfg = fc.ExperimentConfig(model="steiner", lambdas=[2000.0],
                                  replicates=1500, seed=4, body=DISK_SPEC,
                                  checks=["steiner-gaussian"])
        res = fc.run_experiment_full(cfg)
        assert all(c.passed for c in res.checks)
        names = {r.name for r in res.reports}
        assert "steiner.coord_variance" in names

    def test_shape_model(self):
        cfg = fc.ExperimentConfig(
            model="shape", lambdas=[300.0, 900.0], replicates=4, seed=9,
            domain={"d": "disk", "params": {"radius": 1.0,
                                            "center": [0.3, 0.0]}},
            checks=["limit-shape"], tolerances={"limit-shape": 0.5})
        res = fc.run_experiment_full(cfg)
        assert len(res.reports) == 2
        mono = [c for c in res.checks if c.name == "limit-shape.monotone"]
        assert mono

    def test_unbounded_fraction_raises(self):
        cfg = small_cfg(lambdas=[1e-6], replicates=4, checks=[])
        with pytest.raises(ExperimentError):
            fc.run_experiment_full(cfg)

    def test_forced_stat_failure_detected(self):
        cfg = small_cfg(checks=["theorem-constant"], replicates=25,
                        tolerances={"theorem-constant": 1e-9})
        res = fc.run_experiment_full(cfg)
        assert not res.all_passed


class TestRenderSvg:
    def test_empty_scene_valid(self, tmp_path):
        path = fc.render_svg({}, tmp_path / "empty.svg")
        ET.parse(path)

    def test_body_and_cell_scene(self, tmp_path, unit_square):
        from tests_helpers_cell import square_cell
        cell = square_cell()
        path = fc.render_svg({"body": unit_square, "cell": cell},
                             tmp_path / "scene.svg")
        root = ET.parse(path).getroot()
        paths = root.findall(".//{http://www.w3.org/2000/svg}path")
        assert len(paths) == 2

    def test_deterministic_bytes(self, tmp_path, unit_square):
        p1 = fc.render_svg({"body": unit_square}, tmp_path / "a.svg")
        p2 = fc.render_svg({"body": unit_square}, tmp_path / "b.svg")
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_large_point_scene_under_budget(self, tmp_path, rng):
        pts = rng.normal(0, 1, (10_000, 2))
        path = fc.render_svg({"points": pts}, tmp_path / "big.svg")
        assert os.path.getsize(path) < 5 * 1024 * 1024
        ET.parse(path)

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ValidationError):
            fc.render_svg({"sprite": 1}, tmp_path / "x.svg")


class TestReportFigure:
    def test_figure_written(self, tmp_path):
        reports = fc.run_experiment(small_cfg(replicates=10, checks=[]))
        out = fc.save_report_figure(reports, tmp_path / "fig.png")
        assert os.path.getsize(out) > 1000
