"""Tests for the experiment harness and the command line front end."""

import csv
import io
import json

import numpy as np
import pytest

import roma.experiments as ex
from roma.cli import main
from roma.data import Label
from roma.errors import ValidationError
from roma.synth import SynthSpec, export_dataset, make_dataset


def tiny(experiment, **overrides):
    kw = dict(n=30, rank=3, num_points=40, trials=3, seed=11, workers=1)
    kw.update(overrides)
    return ex.default_config(experiment).replace(**kw)


def rows_sans_time(result):
    rows = []
    for row in ex.result_rows(result):
        row = dict(row)
        row.pop("wall_time_s", None)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# the six runners


def test_validate_threshold_tiny():
    cfg = tiny("validate-threshold", gamma_grid=(0.2, 0.5))
    result = ex.run_experiment(cfg)
    assert ex.audit(result)
    assert len(result.records) == 2 * cfg.trials
    assert len(result.summary) == 2
    for row in result.summary:
        assert row["trials"] == cfg.trials
        assert 0.0 <= row["holds_fraction"] <= 1.0
        assert row["mean_min_outlier_q"] > 0.0
        assert 0.0 < row["zeta"] < np.pi / 2


@pytest.mark.filterwarnings("ignore:Gaussian angle surrogate")
def test_oip_erp_tiny():
    cfg = tiny("oip-erp", gamma_grid=(0.2,), snr_grid=(20.0,), trials=4)
    result = ex.run_experiment(cfg)
    assert ex.audit(result)
    (row,) = result.summary
    assert row["trials"] == 4
    for key in ("alpha_oip", "alpha_erp", "erp_union_alpha"):
        assert 0.0 <= row[key] <= 1.0
    assert row["theory_oip_alpha"] == 1.0 / cfg.num_points
    # the impossibility bound may be vacuous (negative) at tiny sizes
    assert row["theory_erp_alpha_lower"] <= 1.0


def test_phase_inliers_tiny():
    cfg = tiny("phase-inliers", num_points=50, ratio_grid=(0.1,),
               inlier_grid=(20, 40), trials=2)
    result = ex.run_experiment(cfg)
    assert ex.audit(result)
    assert [row["rank"] for row in result.summary] == [3, 3]
    for row in result.summary:
        assert 0.0 <= row["mean_inlier_recovery"] <= 1.0


def test_phase_inliers_guards():
    with pytest.raises(ValidationError):
        ex.run_experiment(tiny("phase-inliers", ratio_grid=(0.05,)))  # rank 2
    with pytest.raises(ValidationError):
        ex.run_experiment(tiny("phase-inliers", num_points=50,
                               ratio_grid=(0.1,), inlier_grid=(50,)))


def test_phase_recovery_tiny():
    cfg = tiny("phase-recovery", n=20, rank=4, inlier_grid=(30,),
               outlier_grid=(10,), trials=2)
    result = ex.run_experiment(cfg)
    assert ex.audit(result)
    (row,) = result.summary
    # noiseless, well separated: recovery is clean
    assert row["recovered_fraction"] == 1.0
    assert row["mean_lre"] < ex.RECOVERY_CUTOFF


def test_structured_tiny():
    cfg = tiny("structured", n=30, rank=4, mu_grid=(0.2,),
               split_grid=((40, 20),), trials=2, snr_db=None)
    result = ex.run_experiment(cfg)
    assert ex.audit(result)
    (row,) = result.summary
    assert row["recovered_fraction"] == 1.0
    assert row["exact_fraction"] == 1.0
    assert {"mu", "num_inliers", "num_structured"} <= set(row)


def test_mixed_tiny():
    cfg = tiny("mixed", n=30, rank=4, num_inliers=40, outlier_grid=(10,),
               trials=3)
    result = ex.run_experiment(cfg)
    assert ex.audit(result)
    for rec in result.records:
        assert 0 <= rec.metrics["num_structured"] <= 10
    (row,) = result.summary
    assert 0.0 <= row["recovered_fraction"] <= 1.0


def test_validate_threshold_gamma_guards():
    with pytest.raises(ValidationError):
        ex.run_experiment(tiny("validate-threshold", gamma_grid=(1.0,)))
    with pytest.raises(ValidationError, match="zero outliers"):
        ex.run_experiment(tiny("validate-threshold", gamma_grid=(0.005,),
                               trials=1))


# ---------------------------------------------------------------------------
# determinism


def test_runs_are_deterministic_up_to_wall_time():
    cfg = tiny("validate-threshold", gamma_grid=(0.3,), trials=3)
    assert rows_sans_time(ex.run_experiment(cfg)) == \
        rows_sans_time(ex.run_experiment(cfg))


def test_worker_count_does_not_change_results():
    serial = tiny("mixed", n=30, rank=4, num_inliers=40,
                  outlier_grid=(8, 12), trials=3, workers=1)
    pooled = serial.replace(workers=3)
    assert rows_sans_time(ex.run_experiment(serial)) == \
        rows_sans_time(ex.run_experiment(pooled))


def test_trial_seeds_are_distinct_and_stable():
    seeds = {ex._trial_seed(1, ci, t) for ci in range(4) for t in range(25)}
    assert len(seeds) == 100
    assert ex._trial_seed(1, 2, 3) == ex._trial_seed(1, 2, 3)
    assert ex._trial_seed(1, 2, 3) != ex._trial_seed(2, 2, 3)


def test_audit_catches_tampered_metrics():
    result = ex.run_experiment(tiny("validate-threshold", gamma_grid=(0.3,),
                                    trials=1))
    result.records[0].metrics["oip_success"] = \
        not result.records[0].metrics["oip_success"]
    with pytest.raises(AssertionError, match="oip_success"):
        ex.audit(result)


# ---------------------------------------------------------------------------
# configs


def test_default_config_per_experiment():
    assert ex.default_config("phase-recovery").rank == 20
    assert ex.default_config("structured").stage == "roma-n"
    assert ex.default_config("validate-threshold").gamma_grid[0] == 0.05
    assert ex.default_config("phase-inliers").snr_db is None
    with pytest.raises(ValidationError):
        ex.default_config("nope")


def test_run_experiment_rejects_unknown_name():
    with pytest.raises(ValidationError):
        ex.run_experiment(ex.ExperimentConfig(experiment="nope"))


def test_config_from_dict():
    cfg = ex.config_from_dict({"experiment": "phase-recovery", "trials": 2,
                               "inlier_grid": [30, 60],
                               "split_grid": [[10, 5], [20, 10]]})
    assert cfg.rank == 20            # experiment defaults applied first
    assert cfg.trials == 2
    assert cfg.inlier_grid == (30, 60)
    assert cfg.split_grid == ((10, 5), (20, 10))
    with pytest.raises(ValidationError, match="unknown config fields"):
        ex.config_from_dict({"experiment": "mixed", "bogus": 1})


# ---------------------------------------------------------------------------
# serialization


def test_result_rows_and_csv_round_trip():
    cfg = tiny("validate-threshold", gamma_grid=(0.3,), trials=2)
    result = ex.run_experiment(cfg)
    rows = ex.result_rows(result)
    kinds = [row["kind"] for row in rows]
    assert kinds == ["trial", "trial", "summary"]
    assert rows[0]["trial"] == 0 and rows[0]["seed"] == result.records[0].seed

    parsed = list(csv.DictReader(io.StringIO(ex.render_csv(result))))
    assert len(parsed) == 3
    assert parsed[0]["kind"] == "trial"
    assert parsed[2]["kind"] == "summary"
    assert parsed[2]["trial"] == ""  # summary rows leave trial fields blank
    assert float(parsed[2]["holds_fraction"]) == result.summary[0]["holds_fraction"]


def test_render_json_shape():
    cfg = tiny("mixed", n=30, rank=4, num_inliers=40, outlier_grid=(8,), trials=1)
    result = ex.run_experiment(cfg)
    payload = json.loads(ex.render_json(result))
    assert payload["experiment"] == "mixed"
    assert payload["config"]["num_inliers"] == 40
    assert len(payload["trials"]) == 1
    assert len(payload["summary"]) == 1


# ---------------------------------------------------------------------------
# command line


@pytest.fixture(scope="module")
def planted(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    ds = make_dataset(SynthSpec(n=40, num_points=60, rank=4, gamma=0.2, seed=3))
    csv_path = root / "pts.csv"
    export_dataset(ds, csv_path, "points-as-columns")
    names = ["outlier" if v == int(Label.OUTLIER) else "inlier"
             for v in ds.matrix.labels]
    labels_path = root / "labels.txt"
    labels_path.write_text("\n".join(names) + "\n")
    return csv_path, labels_path, ds


def test_cli_detect(planted, capsys):
    csv_path, labels_path, ds = planted
    assert main(["--input", str(csv_path), "--labels", str(labels_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["stage"] == "roma"
    assert report["n"] == 40 and report["num_points"] == 60
    assert sorted(report["outliers"]) == sorted(ds.outlier_indices.tolist())
    assert report["truth"]["oip_success"] and report["truth"]["erp_success"]
    assert report["truth"]["num_true_outliers"] == 12
    assert len(report["scores"]["q"]) == 60


def test_cli_detect_two_stage_and_recover(planted, capsys):
    csv_path, _, _ = planted
    code = main(["--input", str(csv_path), "--stage", "roma-n", "--recover"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["stage"] == "roma-n"
    stage2 = report["stage2"]
    assert stage2["inlier_head"] != stage2["outlier_head"]
    assert set(stage2) >= {"stage1_outliers", "survivors", "na_survivors",
                           "labels_swapped"}
    assert report["recovered"]["rank"] >= 1
    assert len(report["recovered"]["basis"]) == 40


def test_cli_detect_rows_orientation(tmp_path, capsys):
    ds = make_dataset(SynthSpec(n=40, num_points=60, rank=4, gamma=0.2, seed=3))
    path = tmp_path / "rows.csv"
    export_dataset(ds, path, "points-as-rows")
    assert main(["--input", str(path), "--orientation", "rows"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["num_points"] == 60
    assert sorted(report["outliers"]) == sorted(ds.outlier_indices.tolist())


def test_cli_detect_numeric_labels(planted, tmp_path, capsys):
    csv_path, _, ds = planted
    numeric = tmp_path / "numeric.txt"
    numeric.write_text(",".join(str(int(v)) for v in ds.matrix.labels))
    assert main(["--input", str(csv_path), "--labels", str(numeric)]) == 0
    assert json.loads(capsys.readouterr().out)["truth"]["erp_success"]


def test_cli_detect_out_file(planted, tmp_path):
    csv_path, _, _ = planted
    out = tmp_path / "report.json"
    assert main(["--input", str(csv_path), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["num_outliers"] == 12


def test_cli_experiment_csv_and_json(capsys):
    argv = ["--experiment", "validate-threshold", "--gamma-grid", "0.3",
            "--trials", "2", "--n", "30", "--subspace-rank", "3",
            "--num-points", "40", "--seed", "11"]
    assert main(argv) == 0
    table = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert len(table) == 3

    assert main(argv + ["--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["experiment"] == "validate-threshold"
    assert payload["config"]["gamma_grid"] == [0.3]
    assert payload["config"]["trials"] == 2


def test_cli_config_file_and_overrides(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "experiment": "validate-threshold", "n": 30, "rank": 3,
        "num_points": 40, "gamma_grid": [0.3], "trials": 4, "seed": 11}))
    argv = ["--experiment", "validate-threshold", "--config", str(cfg_path),
            "--trials", "1", "--format", "json"]
    assert main(argv) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["config"]["trials"] == 1      # flag beats file
    assert payload["config"]["num_points"] == 40  # file beats default


def test_cli_noiseless_flag(capsys):
    argv = ["--experiment", "validate-threshold", "--gamma-grid", "0.3",
            "--trials", "1", "--n", "30", "--subspace-rank", "3",
            "--num-points", "40", "--noiseless", "--format", "json"]
    assert main(argv) == 0
    assert json.loads(capsys.readouterr().out)["config"]["snr_db"] is None


@pytest.mark.parametrize("argv", [
    [],                                            # detect without --input
    ["--input", "/no/such/file.csv"],
    ["--experiment", "mixed", "--config", "/no/such/cfg.json"],
])
def test_cli_exit_2_on_bad_input(argv, capsys):
    assert main(argv) == 2
    assert "error:" in capsys.readouterr().err


def test_cli_exit_2_on_config_conflicts(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"experiment": "mixed"}))
    argv = ["--experiment", "structured", "--config", str(bad)]
    assert main(argv) == 2
    assert "conflicts" in capsys.readouterr().err

    bad.write_text(json.dumps([1, 2, 3]))
    assert main(["--experiment", "mixed", "--config", str(bad)]) == 2

    bad.write_text(json.dumps({"experiment": "mixed", "bogus": 1}))
    assert main(["--experiment", "mixed", "--config", str(bad)]) == 2


def test_cli_exit_3_on_infeasible_generator(capsys):
    argv = ["--experiment", "validate-threshold", "--gamma-grid", "0.5",
            "--trials", "1", "--num-points", "40", "--outlier-model",
            "bounded-cone", "--theta-max", "0.05"]
    assert main(argv) == 3
    assert "error:" in capsys.readouterr().err
