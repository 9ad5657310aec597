"""Command-line front end for the analytics pipeline.

Subcommands: clean, indicators, evaluate, correlate, turning-points,
predict, expand, report. Outputs land under ``--out`` in one directory
per match id; file names encode the subcommand and a hash of the
effective configuration, so identical configurations overwrite their own
previous outputs and nothing else. All writes are atomic
(write-to-temp-then-rename) and byte-deterministic for a fixed config.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path

import numpy as np

from . import grnn, momentum
from .errors import DataError
from .fuzzy import momentum_series
from .indicators import INDICATOR_NAMES, compute_indicators, pca_reduce, segment_labels
from .ingest import (
    MatchTimeline,
    flatten_timelines,
    impute_missing,
    load_matches,
    missing_rate,
    outlier_report,
    points_csv_text,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    data: str = ""
    match: str = ""
    player: int = 0            # 0 = both players
    out: str = "out"
    format: str = "csv"
    seed: int = 0
    segmentation: str = "set"
    window: int = 20
    pca_components: int = 10
    folds: int = 5
    sigma_min: float = 0.01
    sigma_max: float = 2.0
    sigma_count: int = 40
    split_fraction: float = 0.7
    threshold: float = 0.5
    run_min: int = 3
    lookback: int = 50
    drop_final: bool = True

    def cv_config(self) -> grnn.CvConfig:
        grid = tuple(
            float(s) for s in np.geomspace(self.sigma_min, self.sigma_max, self.sigma_count)
        )
        return grnn.CvConfig(
            folds=self.folds,
            sigma_grid=grid,
            split_fraction=self.split_fraction,
            decision_threshold=self.threshold,
            seed=self.seed,
        )

    def digest(self) -> str:
        # the output directory does not change what gets computed
        payload = json.dumps(
            {f.name: getattr(self, f.name) for f in dc_fields(self) if f.name != "out"},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:10]


_CONFIG_TYPES = {f.name: f.type for f in dc_fields(RunConfig)}


def parse_config_file(path: str | Path) -> dict:
    """Flat ``key = value`` configuration file; '#' starts a comment."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = body.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise UsageError(f"{path}:{lineno}: unknown option {key!r}")
        values[key] = _coerce(key, raw.strip())
    return values


def _coerce(key: str, raw: str):
    kind = _CONFIG_TYPES[key]
    try:
        if kind == "bool":
            if raw.lower() in ("1", "true", "yes"):
                return True
            if raw.lower() in ("0", "false", "no"):
                return False
            raise ValueError(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {raw!r}") from exc


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_rows(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    atomic_write_text(path, buf.getvalue())


def write_json(path: Path, payload) -> None:
    atomic_write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_table(path_base: Path, fmt: str, header: list[str], rows: list[list]):
    """Emit a small table as CSV or JSON records depending on --format."""
    if fmt == "json":
        payload = [dict(zip(header, row)) for row in rows]
        write_json(path_base.with_suffix(".json"), payload)
        return path_base.with_suffix(".json")
    write_rows(path_base.with_suffix(".csv"), header, rows)
    return path_base.with_suffix(".csv")


def _load(config: RunConfig) -> list[MatchTimeline]:
    if not config.data:
        raise UsageError("--data is required")
    path = Path(config.data)
    if not path.exists():
        raise DataError(f"dataset not found: {path}")
    return load_matches(path)


def _select_match(timelines: list[MatchTimeline], config: RunConfig) -> MatchTimeline:
    if not config.match:
        raise UsageError("--match is required for this subcommand")
    for tl in timelines:
        if tl.match_id == config.match:
            return tl
    available = ", ".join(tl.match_id for tl in timelines)
    raise DataError(f"unknown match id {config.match!r}; available: {available}")


def _players(config: RunConfig) -> list[int]:
    if config.player == 0:
        return [1, 2]
    if config.player in (1, 2):
        return [config.player]
    raise UsageError(f"--player must be 1 or 2, got {config.player}")


def _outdir(config: RunConfig, match_id: str) -> Path:
    return Path(config.out) / (match_id or "all")


def cmd_clean(config: RunConfig) -> list[Path]:
    timelines = _load(config)
    if config.match:
        timelines = [_select_match(timelines, config)]
    records = flatten_timelines(timelines)
    before = missing_rate(records)
    box = outlier_report(records)
    cleaned = impute_missing(records)

    outdir = _outdir(config, config.match)
    digest = config.digest()
    paths = []

    clean_path = outdir / f"clean-{digest}.csv"
    atomic_write_text(clean_path, points_csv_text(cleaned))
    paths.append(clean_path)

    paths.append(
        write_table(
            outdir / f"missing-{digest}",
            config.format,
            ["column", "missing_rate"],
            [[c, r] for c, r in sorted(before.rates.items())],
        )
    )
    box_rows = [
        [c, s.minimum, s.q1, s.median, s.q3, s.maximum, s.lower_fence,
         s.upper_fence, s.outlier_count]
        for c, s in sorted(box.columns.items())
    ]
    paths.append(
        write_table(
            outdir / f"boxplot-{digest}",
            config.format,
            ["column", "min", "q1", "median", "q3", "max",
             "lower_fence", "upper_fence", "outlier_count"],
            box_rows,
        )
    )
    return paths


def cmd_indicators(config: RunConfig) -> list[Path]:
    timelines = _load(config)
    if config.match:
        timelines = [_select_match(timelines, config)]
    rows = []
    matrix = []
    for tl in timelines:
        labels = segment_labels(tl, config.segmentation)
        for player in _players(config):
            vectors = compute_indicators(tl, player, config.segmentation)
            for label, vec in zip(labels, vectors):
                rows.append([tl.match_id, player, label])
                matrix.append(vec.as_array())
    matrix = np.asarray(matrix)
    k = min(config.pca_components, max(1, min(matrix.shape[0] - 1, matrix.shape[1])))
    result = pca_reduce(matrix, k)
    header = (
        ["match_id", "player", "segment"]
        + list(INDICATOR_NAMES)
        + [f"pc{i + 1}" for i in range(k)]
    )
    full_rows = [
        meta + [float(v) for v in vec] + [float(s) for s in score_row]
        for meta, vec, score_row in zip(rows, matrix, result.scores)
    ]
    outdir = _outdir(config, config.match)
    path = outdir / f"indicators-{config.digest()}.csv"
    write_rows(path, header, full_rows)
    return [path]


def cmd_evaluate(config: RunConfig) -> list[Path]:
    timelines = _load(config)
    tl = _select_match(timelines, config)
    rows = []
    for player in _players(config):
        for point in momentum_series(tl, player, config.window):
            rows.append([tl.match_id, point.elapsed_seconds, player, point.score])
    rows.sort(key=lambda r: (r[1], r[2]))
    outdir = _outdir(config, tl.match_id)
    path = outdir / f"momentum-{config.digest()}.csv"
    write_rows(path, ["match_id", "elapsed_seconds", "player", "momentum_score"], rows)
    return [path]


def cmd_correlate(config: RunConfig) -> list[Path]:
    timelines = _load(config)
    tl = _select_match(timelines, config)
    paths = []
    for player in _players(config):
        samples = momentum.extract_momentum_samples(
            tl, player, drop_final=config.drop_final
        )
        corr = momentum.correlation_matrix(samples)
        keep = [
            i
            for i in range(len(corr.labels))
            if not np.isnan(np.delete(corr.r[i], i)).all()
        ]
        header = ["feature"] + [corr.labels[j] for j in keep]
        rows = [
            [corr.labels[i]] + [float(corr.r[i, j]) for j in keep]
            for i in keep
        ]
        outdir = _outdir(config, tl.match_id)
        path = outdir / f"correlation-p{player}-{config.digest()}.csv"
        write_rows(path, header, rows)
        paths.append(path)
    return paths


def cmd_turning_points(config: RunConfig) -> list[Path]:
    timelines = _load(config)
    tl = _select_match(timelines, config)
    paths = []
    outdir = _outdir(config, tl.match_id)
    digest = config.digest()
    for player in _players(config):
        samples = momentum.extract_momentum_samples(
            tl, player, drop_final=config.drop_final
        )
        turns = momentum.detect_turning_points(
            samples, lookback=config.lookback, run_min=config.run_min
        )
        dump_rows = []
        for turn in turns:
            for s in turn.window:
                dump_rows.append(
                    [turn.index, turn.direction, s.index, s.s1, s.s2, s.s3,
                     s.s4, s.omega]
                )
        dump = outdir / f"turning-windows-p{player}-{digest}.csv"
        write_rows(
            dump,
            ["turn_index", "direction", "sample_index", "S1", "S2", "S3", "S4",
             "omega"],
            dump_rows,
        )
        paths.append(dump)

        groups = momentum.group_turning_windows(turns)
        stat_rows = []
        if groups:
            stats = momentum.turning_point_stats(groups)
            for direction in sorted(stats.stats):
                for feature in momentum.FEATURE_NAMES:
                    s = stats.stats[direction][feature]
                    stat_rows.append(
                        [direction, feature, s.mean, s.mode, s.variance,
                         s.trimmed_mean]
                    )
        table = outdir / f"turning-stats-p{player}-{digest}.csv"
        write_rows(
            table,
            ["direction", "feature", "mean", "mode", "variance", "trimmed_mean"],
            stat_rows,
        )
        paths.append(table)
    return paths


def _prediction_inputs(tl: MatchTimeline, player: int, config: RunConfig):
    samples = momentum.extract_momentum_samples(
        tl, player, drop_final=config.drop_final
    )
    x, y = momentum.sample_matrix(samples)
    return samples, x, y


def cmd_predict(config: RunConfig) -> list[Path]:
    timelines = _load(config)
    tl = _select_match(timelines, config)
    paths = []
    outdir = _outdir(config, tl.match_id)
    digest = config.digest()
    cv = config.cv_config()
    for player in _players(config):
        _, x, y = _prediction_inputs(tl, player, config)
        split = grnn.chronological_split(len(y), config.split_fraction)
        model = grnn.train_cv(x[:split], y[:split], cv)
        report = grnn.evaluate(model, x[split:], y[split:], config.threshold)

        payload = {
            "match_id": tl.match_id,
            "player": player,
            "sigma": model.sigma,
            "threshold": config.threshold,
            "n_train": int(split),
            "n_test": int(len(y) - split),
            "mse": report.mse,
            "acc": report.acc,
        }
        jpath = outdir / f"predict-report-p{player}-{digest}.json"
        write_json(jpath, payload)
        paths.append(jpath)

        rows = [
            [split + i + 1, actual, predicted, raw, actual - raw]
            for i, (actual, predicted, raw) in enumerate(report.predictions)
        ]
        cpath = outdir / f"predict-points-p{player}-{digest}.csv"
        write_rows(
            cpath, ["sample_index", "actual", "predicted", "raw", "error"], rows
        )
        paths.append(cpath)
    return paths


def cmd_expand(config: RunConfig) -> list[Path]:
    timelines = _load(config)
    tl = _select_match(timelines, config)
    paths = []
    outdir = _outdir(config, tl.match_id)
    digest = config.digest()
    cv = config.cv_config()
    for player in _players(config):
        samples, x, y = _prediction_inputs(tl, player, config)
        extras = momentum.extra_feature_columns(tl, player)
        extras = {k: v[: len(y)] for k, v in extras.items()}
        order = grnn.rank_extras_by_correlation(extras, y)
        sweep = grnn.expand_features(x, extras, y, cv, ranked_names=order)

        rows = [
            [i, step.added_feature, step.feature_count, step.mse, step.acc,
             step.sigma]
            for i, step in enumerate(sweep.steps)
        ]
        cpath = outdir / f"expand-p{player}-{digest}.csv"
        write_rows(
            cpath,
            ["step", "added_feature", "feature_count", "mse", "acc", "sigma"],
            rows,
        )
        paths.append(cpath)

        best_mse = sweep.best_by_mse
        best_acc = sweep.best_by_acc
        payload = {
            "match_id": tl.match_id,
            "player": player,
            "baseline_mse": sweep.steps[0].mse,
            "baseline_acc": sweep.steps[0].acc,
            "best_mse": best_mse.mse,
            "best_mse_features": best_mse.feature_count,
            "best_acc": best_acc.acc,
            "best_acc_features": best_acc.feature_count,
        }
        jpath = outdir / f"expand-summary-p{player}-{digest}.json"
        write_json(jpath, payload)
        paths.append(jpath)
    return paths


def cmd_report(config: RunConfig) -> list[Path]:
    """One JSON per match: missing data, correlations, prediction quality."""
    timelines = _load(config)
    tl = _select_match(timelines, config)
    records = list(tl.records)
    rates = missing_rate(records).rates
    cv = config.cv_config()
    payload = {
        "match_id": tl.match_id,
        "players": {"1": tl.records[0].player1, "2": tl.records[0].player2},
        "points": len(records),
        "missing_rates": {k: v for k, v in sorted(rates.items())},
        "per_player": {},
    }
    for player in _players(config):
        samples, x, y = _prediction_inputs(tl, player, config)
        corr = momentum.correlation_matrix(samples)
        omega_row = {
            label: (None if np.isnan(corr.r[-1, i]) else float(corr.r[-1, i]))
            for i, label in enumerate(corr.labels[:-1])
        }
        split = grnn.chronological_split(len(y), config.split_fraction)
        model = grnn.train_cv(x[:split], y[:split], cv)
        report = grnn.evaluate(model, x[split:], y[split:], config.threshold)
        payload["per_player"][str(player)] = {
            "omega_correlations": omega_row,
            "baseline": {"mse": report.mse, "acc": report.acc, "sigma": model.sigma},
        }
    outdir = _outdir(config, tl.match_id)
    path = outdir / f"report-{config.digest()}.json"
    write_json(path, payload)
    return [path]


_COMMANDS = {
    "clean": cmd_clean,
    "indicators": cmd_indicators,
    "evaluate": cmd_evaluate,
    "correlate": cmd_correlate,
    "turning-points": cmd_turning_points,
    "predict": cmd_predict,
    "expand": cmd_expand,
    "report": cmd_report,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tennis-momentum", description=__doc__)
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--data", help="point-by-point CSV path")
    parser.add_argument("--match", help="match id filter")
    parser.add_argument("--player", type=int, choices=(0, 1, 2),
                        help="0 (both, default), 1 or 2")
    parser.add_argument("--out", help="output directory (default: out)")
    parser.add_argument("--format", choices=("csv", "json"),
                        help="report format (default: csv)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--segmentation", choices=("set", "game"))
    parser.add_argument("--window", type=int, help="momentum window (points)")
    parser.add_argument("--pca-components", type=int, dest="pca_components")
    parser.add_argument("--folds", type=int)
    parser.add_argument("--sigma-min", type=float, dest="sigma_min")
    parser.add_argument("--sigma-max", type=float, dest="sigma_max")
    parser.add_argument("--sigma-count", type=int, dest="sigma_count")
    parser.add_argument("--split-fraction", type=float, dest="split_fraction")
    parser.add_argument("--threshold", type=float)
    parser.add_argument("--run-min", type=int, dest="run_min")
    parser.add_argument("--lookback", type=int)
    parser.add_argument("--keep-final-sample", action="store_true",
                        help="keep the last point (stand-in label) in samples")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if args.config:
        if not Path(args.config).exists():
            raise UsageError(f"config file not found: {args.config}")
        for key, value in parse_config_file(args.config).items():
            setattr(config, key, value)
    for key in _CONFIG_TYPES:
        value = getattr(args, key, None)
        if value is not None:
            setattr(config, key, value)
    if args.keep_final_sample:
        config.drop_final = False
    return config


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = resolve_config(args)
        paths = _COMMANDS[args.command](config)
    except (UsageError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    for path in paths:
        print(path)
    return EXIT_OK


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
