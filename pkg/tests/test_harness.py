import json
import math

import numpy as np
import pytest

from bandspectra.cli import main as cli_main
from bandspectra.config import ExperimentConfig, parse_model
from bandspectra.errors import ValidationError
from bandspectra.harness import (
    _batch_slices,
    _oracle_chunk,
    emit_reports,
    run_clt,
    run_lln,
    run_oracle_check,
    spectrum_svg_text,
    summary_csv_text,
)
from bandspectra.histogram import Histogram
from bandspectra.process import DriverSpec, Kernel, ProcessModel

WHITE = ProcessModel(Kernel.impulse(), DriverSpec.gaussian())
WHITE_RAD = ProcessModel(Kernel.impulse(), DriverSpec.rademacher())
MA1 = ProcessModel(Kernel.moving_average([1.0, 0.5]), DriverSpec.gaussian())


def small_config(**overrides):
    base = dict(
        model=WHITE,
        schedule=((32, 128, 4),),
        k_list=(1, 2),
        replicas=6,
        seed=99,
        eigen_replicas=3,
        bins=20,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestConfigValidation:
    def test_collects_all_violations(self):
        cfg = small_config(schedule=((8, 0, 12),), k_list=(), replicas=0)
        with pytest.raises(ValidationError) as err:
            cfg.validate()
        text = str(err.value)
        assert "n=0" in text
        assert "b=12" in text
        assert "k_list" in text
        assert "replicas" in text

    def test_bandwidth_bounds(self):
        with pytest.raises(ValidationError):
            small_config(schedule=((16, 64, 0),)).validate()
        small_config(schedule=((16, 64, 16),)).validate()  # b = p allowed

    def test_k_cap(self):
        with pytest.raises(ValidationError):
            small_config(k_list=(1, 6)).validate()

    def test_trend_requires_increasing_p(self):
        cfg = small_config(
            schedule=((32, 128, 4), (32, 256, 4)), trend_checks=True
        )
        with pytest.raises(ValidationError):
            cfg.validate()

    def test_json_round_trip(self, tmp_path):
        raw = {
            "model": {
                "kernel": [[0, 1.0], [1, 0.5]],
                "driver": {"family": "rademacher"},
            },
            "schedule": [[16, 64, 2]],
            "k_list": [1, 2],
            "replicas": 10,
            "seed": 7,
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(raw))
        cfg = ExperimentConfig.from_json_file(path)
        cfg.validate()
        assert cfg.model.kernel.coefficients == (1.0, 0.5)
        assert cfg.model.driver.family == "rademacher"
        echo = cfg.to_dict()
        assert echo["schedule"] == [[16, 64, 2]]

    def test_unknown_family(self):
        with pytest.raises(ValidationError):
            parse_model({"kernel": [[0, 1.0]], "driver": {"family": "cauchy"}})

    def test_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{nope")
        with pytest.raises(ValidationError):
            ExperimentConfig.from_json_file(path)


class TestRunLln:
    def test_small_run_fields(self):
        report = run_lln(small_config())
        assert len(report.sizes) == 1
        s = report.sizes[0]
        assert s.eigen_replicas == 3
        assert set(s.moment_mean) == {1, 2}
        assert s.moment_rel_err[1] < 0.2
        assert s.empirical_hist.total_mass == pytest.approx(1.0)
        assert s.reference_hist.total_mass == pytest.approx(1.0, abs=1e-9)
        assert s.l1 is not None
        assert report.variance_trend_ok is None

    def test_no_eigen_mode(self):
        report = run_lln(small_config(eigen_replicas=0))
        assert report.sizes[0].empirical_hist is None
        assert report.sizes[0].l1 is None

    def test_trend_fields(self):
        cfg = small_config(
            schedule=((16, 64, 3), (24, 96, 3)), replicas=8, eigen_replicas=2
        )
        report = run_lln(cfg)
        assert set(report.variance_trend_ok) == {1, 2}
        assert report.l1_trend_ok in (True, False)

    def test_single_size_skips_trends(self):
        report = run_lln(small_config(trend_checks=False))
        assert report.variance_trend_ok is None
        assert report.l1_trend_ok is None

    def test_worker_counts_agree(self):
        cfg1 = small_config(workers=1)
        cfg3 = small_config(workers=3)
        r1 = run_lln(cfg1)
        r3 = run_lln(cfg3)
        assert summary_csv_text(r1) == summary_csv_text(r3)


class TestRunClt:
    def test_replica_floor(self):
        with pytest.raises(ValidationError, match="200"):
            run_clt(small_config(replicas=50))

    def test_small_run(self):
        cfg = small_config(
            schedule=((24, 240, 2),), k_list=(1, 2), replicas=240, eigen_replicas=0
        )
        report = run_clt(cfg)
        s = report.sizes[0]
        assert s.sample_cov.shape == (2, 2)
        assert np.allclose(s.sample_cov, s.sample_cov.T)
        assert np.linalg.eigvalsh(s.sample_cov)[0] >= -1e-12
        assert np.all(np.isfinite(s.z))
        assert s.skew_se == pytest.approx(math.sqrt(6 / 240))

    def test_degenerate_target_uses_absolute_rule(self):
        cfg = ExperimentConfig(
            model=WHITE_RAD, schedule=((16, 160, 1),), k_list=(1,),
            replicas=200, seed=5, eigen_replicas=0,
        )
        report = run_clt(cfg)
        s = report.sizes[0]
        assert abs(s.target_cov[0, 0]) < 0.05
        # the statistic is degenerate at b >= 0 only for b = 0-free traces;
        # variance is tiny and the absolute rule applies
        assert s.entry_pass(0, 0) == (abs(s.sample_cov[0, 0]) < 0.05)

    def test_band_ratio_warning(self):
        cfg = small_config(schedule=((32, 64, 16),), replicas=200, eigen_replicas=0)
        with pytest.warns(UserWarning, match="b/n"):
            run_clt(cfg)


class TestRunOracle:
    def test_tiny_grid_z_scores(self):
        cfg = ExperimentConfig(
            model=MA1, schedule=((4, 3, 1),), k_list=(1, 2), replicas=40_000,
            seed=31337, oracle_orders=((1,), (2,), (1, 1), (2, 1)),
        )
        report = run_oracle_check(cfg, chunk_size=16_384)
        assert len(report.rows) == 4
        for row in report.rows:
            assert abs(row.z) <= 5.0
        assert report.max_abs_z <= 5.0

    def test_exact_degenerate_statistic(self):
        cfg = ExperimentConfig(
            model=WHITE_RAD, schedule=((3, 2, 0),), k_list=(1,),
            replicas=5_000, seed=11, oracle_orders=((1,), (1, 1)),
        )
        report = run_oracle_check(cfg)
        for row in report.rows:
            assert row.z == 0.0  # trace is deterministic here

    def test_chunking_invariant(self):
        cfg = ExperimentConfig(
            model=MA1, schedule=((3, 2, 1),), k_list=(1,), replicas=4_000,
            seed=8, oracle_orders=((1,),),
        )
        a = run_oracle_check(cfg, chunk_size=1_000)
        b = run_oracle_check(cfg, chunk_size=4_000)
        assert a.rows[0].estimate == b.rows[0].estimate

    def test_replica_batch_independence(self):
        # variance of batch means must match the iid prediction, catching
        # stream collisions
        out = _oracle_chunk((MA1, 4, 3, 1, [1], 77, 0, 0, 20_000))
        vals = out[1]
        batch_means = np.array([vals[sl].mean() for sl in _batch_slices(20_000)])
        ratio = batch_means.var(ddof=1) * 1000 / vals.var(ddof=1)
        assert 0.3 < ratio < 3.0


class TestEmitReports:
    def test_files_written(self, tmp_path):
        report = run_lln(small_config())
        written = emit_reports(report, tmp_path)
        names = {w.name for w in written}
        assert names == {"summary.csv", "manifest.txt", "histograms.tsv", "spectrum.svg"}
        text = (tmp_path / "summary.csv").read_text()
        assert text.startswith("experiment,p,n,b,k,l,sample_value,target_value,se,z,pass")
        manifest = (tmp_path / "manifest.txt").read_text()
        assert "seed: 99" in manifest
        assert "bandspectra" in manifest
        tsv = (tmp_path / "histograms.tsv").read_text().splitlines()
        assert tsv[0] == "bin_left\tbin_right\tempirical_mass\treference_mass"
        assert len(tsv) == 21
        svg = (tmp_path / "spectrum.svg").read_text()
        assert svg.startswith("<svg")
        assert "empirical" in svg and "reference" in svg

    def test_rerun_is_byte_identical(self, tmp_path):
        report1 = run_lln(small_config())
        report2 = run_lln(small_config())
        emit_reports(report1, tmp_path / "a")
        emit_reports(report2, tmp_path / "b")
        for name in ("summary.csv", "histograms.tsv", "manifest.txt", "spectrum.svg"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_clt_report_has_no_histograms(self, tmp_path):
        cfg = small_config(
            schedule=((16, 160, 2),), k_list=(1,), replicas=200, eigen_replicas=0
        )
        written = emit_reports(run_clt(cfg), tmp_path)
        names = {w.name for w in written}
        assert names == {"summary.csv", "manifest.txt"}

    def test_svg_handles_point_mass(self):
        edges = np.array([0.0, 1.0, 2.0])
        emp = Histogram(edges=edges, masses=np.array([1.0, 0.0]))
        ref = Histogram(edges=edges, masses=np.array([0.0, 1.0]))
        svg = spectrum_svg_text(emp, ref)
        assert svg.count("<rect") >= 3  # background plus one bar per series


class TestCli:
    def test_missing_config_file(self, capsys):
        code = cli_main(["lln", "--config", "/nonexistent/x.json"])
        assert code == 2

    def test_invalid_config(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"model": {"kernel": [[0, 1.0]],
                                              "driver": {"family": "gaussian"}},
                                    "schedule": [[8, 16, 12]],
                                    "k_list": [1], "replicas": 2, "seed": 1}))
        assert cli_main(["lln", "--config", str(path)]) == 2

    def test_partitions_audit(self, capsys):
        assert cli_main(["partitions", "audit", "--k", "2"]) == 0
        out = capsys.readouterr().out
        assert "0 violations" in out

    def test_lln_end_to_end(self, tmp_path, capsys):
        cfg = {
            "model": {"kernel": [[0, 1.0]], "driver": {"family": "gaussian"}},
            "schedule": [[16, 64, 2]],
            "k_list": [1],
            "replicas": 4,
            "seed": 3,
            "eigen_replicas": 2,
            "out_dir": str(tmp_path / "out"),
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        code = cli_main(["lln", "--config", str(path)])
        assert code == 0
        assert (tmp_path / "out" / "summary.csv").exists()

    def test_oracle_accepts_zero_bandwidth(self, tmp_path):
        cfg = {
            "model": {"kernel": [[0, 1.0]], "driver": {"family": "rademacher"}},
            "schedule": [[3, 2, 0], [3, 2, 1]],
            "k_list": [1],
            "replicas": 2000,
            "seed": 12,
            "trend_checks": False,
            "oracle_orders": [[1]],
            "out_dir": str(tmp_path / "oracle"),
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        assert cli_main(["oracle", "--config", str(path)]) == 0
        assert cli_main(["lln", "--config", str(path)]) == 2  # b=0 stays invalid here

    def test_limits_dump(self, tmp_path):
        cfg = {
            "model": {"kernel": [[0, 1.0], [1, 0.5]], "driver": {"family": "rademacher"}},
            "schedule": [[16, 64, 2]],
            "k_list": [1, 2],
            "replicas": 4,
            "seed": 3,
            "out_dir": str(tmp_path / "lim"),
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        assert cli_main(["limits", "--config", str(path)]) == 0
        table = (tmp_path / "lim" / "limit_table.csv").read_text()
        assert table.startswith("kind,k,l,i,j,value")

    def test_seed_override_changes_manifest(self, tmp_path):
        cfg = {
            "model": {"kernel": [[0, 1.0]], "driver": {"family": "gaussian"}},
            "schedule": [[8, 32, 2]],
            "k_list": [1],
            "replicas": 3,
            "seed": 3,
            "eigen_replicas": 0,
            "out_dir": str(tmp_path / "o1"),
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        assert cli_main(["lln", "--config", str(path), "--seed", "44"]) == 0
        assert "seed: 44" in (tmp_path / "o1" / "manifest.txt").read_text()
