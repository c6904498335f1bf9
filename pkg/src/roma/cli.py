"""Command line front end.

Two jobs: run the detector on a CSV matrix (``--experiment detect``, the
default) and run the Monte Carlo experiment suites.  Results go to --out or
stdout; --format picks csv or json for experiment tables.  Exit codes:
0 success, 2 bad input or config, 3 infeasible generator.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import experiments
from .data import Label, Partition, load_csv_matrix
from .detector import roma, roma_n
from .errors import FeasibilityError, RomaError
from .experiments import ExperimentConfig, config_from_dict, default_config
from .subspace import lre, recover_subspace

__all__ = ["main", "build_parser"]

_MODES = ("theoretical", "adapted")
_STAGES = ("roma", "roma-n")
_CHOICES = ("detect",) + experiments.EXPERIMENTS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="roma",
        description="Angle-based outlier detection for subspace recovery.")
    p.add_argument("--experiment", choices=_CHOICES, default="detect",
                   help="what to run (default: detect on --input)")
    p.add_argument("--config", metavar="FILE",
                   help="JSON config for experiments; explicit flags override it")
    p.add_argument("--out", metavar="FILE", help="write results here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="experiment output format (detect always emits json)")

    d = p.add_argument_group("detect")
    d.add_argument("--input", metavar="CSV", help="data matrix, one point per column")
    d.add_argument("--labels", metavar="FILE",
                   help="true labels (inlier/outlier or 0/1, one per point) "
                        "for scoring the detection")
    d.add_argument("--orientation", choices=("columns", "rows"), default="columns",
                   help="whether points are columns or rows of --input")
    d.add_argument("--mode", choices=_MODES, default=None,
                   help="threshold center: pi/2 (theoretical, the default) or "
                        "the sample mean angle (adapted)")
    d.add_argument("--stage", choices=_STAGES, default=None,
                   help="one-stage (default) or two-stage detection")
    d.add_argument("--rank-disambiguate", action="store_true",
                   help="let stage two swap cluster labels by comparing "
                        "rank-to-size ratios")
    d.add_argument("--recover", action="store_true",
                   help="also compute an orthonormal basis from the estimated inliers")
    d.add_argument("--rank", type=int, default=None,
                   help="basis rank for --recover (default: auto)")

    e = p.add_argument_group("experiments")
    e.add_argument("--trials", type=int, default=None, help="trials per grid cell")
    e.add_argument("--seed", type=int, default=None, help="master seed")
    e.add_argument("--workers", type=int, default=None, help="worker pool size")
    e.add_argument("--n", dest="dim", type=int, default=None, help="ambient dimension")
    e.add_argument("--subspace-rank", type=int, default=None,
                   help="true subspace dimension")
    e.add_argument("--num-points", type=int, default=None, help="total points N")
    e.add_argument("--num-inliers", type=int, default=None,
                   help="inlier count (mixed experiment)")
    e.add_argument("--snr-db", type=float, default=None,
                   help="additive noise level; omit for the config default")
    e.add_argument("--noiseless", action="store_true", help="force snr_db = None")
    e.add_argument("--gamma-grid", type=float, nargs="+", default=None,
                   help="outlier fractions to sweep")
    e.add_argument("--snr-grid", type=float, nargs="+", default=None,
                   help="SNR values to sweep (oip-erp)")
    e.add_argument("--mu-grid", type=float, nargs="+", default=None,
                   help="outlier cluster spreads to sweep (structured)")
    e.add_argument("--inlier-grid", type=int, nargs="+", default=None,
                   help="inlier counts to sweep (phase maps)")
    e.add_argument("--outlier-grid", type=int, nargs="+", default=None,
                   help="outlier counts to sweep (phase-recovery, mixed)")
    e.add_argument("--ratio-grid", type=float, nargs="+", default=None,
                   help="rank/dimension ratios to sweep (phase-inliers)")
    e.add_argument("--outlier-model",
                   choices=("unstructured", "clustered", "bounded-cone"), default=None)
    e.add_argument("--mu", type=float, default=None, help="outlier cluster spread")
    e.add_argument("--nu", type=float, default=None, help="inlier cluster spread")
    e.add_argument("--theta-max", type=float, default=None,
                   help="cone half-angle for bounded-cone outliers")
    return p


def _read_labels(path, num_points: int) -> np.ndarray:
    names = {"inlier": int(Label.INLIER), "outlier": int(Label.OUTLIER),
             "0": int(Label.INLIER), "1": int(Label.OUTLIER)}
    tokens = []
    with open(path, newline="") as fh:
        for line in fh:
            tokens.extend(t.strip().lower() for t in line.replace(",", " ").split())
    if len(tokens) != num_points:
        raise RomaError(f"{path}: got {len(tokens)} labels for {num_points} points")
    try:
        values = [names[t] for t in tokens]
    except KeyError as bad:
        raise RomaError(f"{path}: unrecognized label {bad.args[0]!r}") from None
    return np.asarray(values, dtype=np.int8)


def _truth_block(partition: Partition, labels: np.ndarray) -> dict:
    flags = experiments._truth_flags(partition, labels)
    flags["num_true_outliers"] = int((labels == int(Label.OUTLIER)).sum())
    return flags


def _detect_report(args) -> dict:
    if not args.input:
        raise RomaError("detect needs --input")
    mode = args.mode or "theoretical"
    stage = args.stage or "roma"
    orientation = f"points-as-{args.orientation}"
    matrix = load_csv_matrix(args.input, orientation=orientation)
    if stage == "roma":
        res = roma(matrix, mode)
        stage2 = None
    else:
        res2 = roma_n(matrix, mode, rank_disambiguate=args.rank_disambiguate)
        res = res2.stage1
        stage2 = res2
    final = res.partition if stage2 is None else stage2.partition
    report = {
        "input": args.input,
        "n": matrix.n,
        "num_points": matrix.num_points,
        "stage": stage,
        "threshold": dataclasses.asdict(res.threshold),
        "outliers": final.outliers.tolist(),
        "num_outliers": int(final.outliers.size),
        "scores": {"q": res.scores.q.tolist(),
                   "na": res.scores.na.tolist(),
                   "mean_theta": res.scores.mean_theta},
    }
    if stage2 is not None:
        report["stage2"] = {
            "stage1_outliers": res.partition.outliers.tolist(),
            "survivors": stage2.survivors.tolist(),
            "na_survivors": stage2.na_survivors.tolist(),
            "inlier_head": stage2.inlier_head,
            "outlier_head": stage2.outlier_head,
            "labels_swapped": stage2.labels_swapped,
        }
    if args.recover:
        rank = "auto" if args.rank is None else args.rank
        basis = recover_subspace(matrix, final.inliers, rank=rank)
        report["recovered"] = {"rank": basis.rank,
                               "basis": basis.values.tolist()}
        if matrix.true_basis is not None:
            report["recovered"]["lre"] = lre(matrix.true_basis, basis)
    if args.labels:
        truth = _read_labels(args.labels, matrix.num_points)
        report["truth"] = _truth_block(final, truth)
    return report


_FLAG_FIELDS = {
    # argparse dest -> ExperimentConfig field
    "trials": "trials", "seed": "seed", "workers": "workers",
    "dim": "n", "subspace_rank": "rank", "num_points": "num_points",
    "num_inliers": "num_inliers", "snr_db": "snr_db",
    "gamma_grid": "gamma_grid", "snr_grid": "snr_grid", "mu_grid": "mu_grid",
    "inlier_grid": "inlier_grid", "outlier_grid": "outlier_grid",
    "ratio_grid": "ratio_grid", "outlier_model": "outlier_model",
    "mu": "mu", "nu": "nu", "theta_max": "theta_max",
    "mode": "mode", "stage": "stage", "rank_disambiguate": "rank_disambiguate",
}


def _experiment_config(args) -> ExperimentConfig:
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise RomaError(f"{args.config}: expected a JSON object")
        loaded.setdefault("experiment", args.experiment)
        if loaded["experiment"] != args.experiment:
            raise RomaError(
                f"--experiment {args.experiment} conflicts with config file "
                f"experiment {loaded['experiment']!r}")
        cfg = config_from_dict(loaded)
    else:
        cfg = default_config(args.experiment)
    overrides = {}
    for dest, field in _FLAG_FIELDS.items():
        value = getattr(args, dest)
        # store_true flags: absence means "leave the config alone"
        if dest == "rank_disambiguate" and value is False:
            continue
        if value is not None:
            if isinstance(value, list):
                value = tuple(value)
            overrides[field] = value
    if args.noiseless:
        overrides["snr_db"] = None
    return cfg.replace(**overrides)


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.experiment == "detect":
            report = _detect_report(args)
            _emit(json.dumps(report, indent=1), args.out)
            return 0
        cfg = _experiment_config(args)
        result = experiments.run_experiment(cfg)
        if args.format == "json":
            _emit(experiments.render_json(result), args.out)
        else:
            _emit(experiments.render_csv(result), args.out)
        return 0
    except FeasibilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (RomaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
