"""Command-line surface: run/sweep persistence, real-data ingestion, compare.

Output layout: ``<out-dir>/<bias>/<p>/<run_index>/`` holds one run's
artifacts (``run_<stock>.csv``, ``agents.csv``, ``metrics.json``); a sweep
adds ``<out-dir>/<bias>/sweep_summary.csv``. All CSVs end with a metadata
comment carrying the config hash and master seed, and identical inputs
reproduce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

from .config import BIAS_KINDS, ConfigError, SimConfig, load_config
from .engine import RunOutput, run_simulation, run_sweep
from .stats import MetricsReport, metrics_for_prices, metrics_for_run


class CsvFormatError(ValueError):
    """Malformed real-data CSV; the message names the offending row."""


@dataclass(frozen=True, slots=True)
class RealSeriesRecord:
    """One daily observation of an ingested real price series."""

    date: date
    close: float
    volume: float


def ingest_real_csv(path: str) -> list[RealSeriesRecord]:
    """Parse and validate a ``date,close,volume`` CSV of daily prices."""
    records: list[RealSeriesRecord] = []
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != "date,close,volume":
        raise CsvFormatError("row 1: header must be exactly 'date,close,volume'")
    previous: date | None = None
    for row_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise CsvFormatError(f"row {row_number}: expected 3 fields, got {len(parts)}")
        try:
            day = date.fromisoformat(parts[0].strip())
        except ValueError as exc:
            raise CsvFormatError(f"row {row_number}: bad date {parts[0]!r}") from exc
        try:
            close = float(parts[1])
            volume = float(parts[2])
        except ValueError as exc:
            raise CsvFormatError(f"row {row_number}: non-numeric close or volume") from exc
        if close <= 0.0:
            raise CsvFormatError(f"row {row_number}: close must be positive, got {parts[1]}")
        if volume < 0.0:
            raise CsvFormatError(f"row {row_number}: volume must be non-negative, got {parts[2]}")
        if previous is not None and day <= previous:
            raise CsvFormatError(f"row {row_number}: dates must be strictly increasing")
        previous = day
        records.append(RealSeriesRecord(date=day, close=close, volume=volume))
    if not records:
        raise CsvFormatError("row 2: no data rows")
    return records


# -- deterministic writers ----------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int,)):
        return str(value)
    return repr(float(value))


def _p_label(p: float) -> str:
    return f"{float(p):g}"


def _meta_comment(config: SimConfig, run_index: int | None = None) -> str:
    tail = f" run={run_index}" if run_index is not None else ""
    return f"# config_hash={config.config_hash()} seed={config.seed}{tail}\n"


def run_dir(out_dir: str | Path, config: SimConfig, run_index: int) -> Path:
    return Path(out_dir) / config.bias / _p_label(config.biased_pct) / str(run_index)


def write_run_outputs(run: RunOutput, directory: str | Path, report: MetricsReport | None = None) -> Path:
    """Write one run's CSVs and metrics JSON into ``directory``."""
    config = run.config
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    learning = config.learning_steps
    for j in range(config.stocks):
        prices = run.prices[j]
        volumes = run.volumes[j]
        spreads = run.spreads[j]
        fundamentals = run.fundamentals[j]
        rows = ["t,phase,price,volume,spread,fundamental,bankrupt_count\n"]
        for t in range(1, len(prices)):
            phase = "learning" if t <= learning else "measured"
            rows.append(
                f"{t},{phase},{_fmt(prices[t])},{int(volumes[t])},"
                f"{_fmt(spreads[t])},{_fmt(fundamentals[t])},{int(run.bankrupt_count[t])}\n"
            )
        rows.append(_meta_comment(config, run.run_index))
        (directory / f"run_{j}.csv").write_text("".join(rows))

    rows = ["agent_id,bias,tau,h,g,rho,initial_nav,final_nav,bankrupt\n"]
    for a in run.agents:
        rows.append(
            f"{a.agent_id},{a.bias},{a.tau},{a.h},{_fmt(a.g)},{_fmt(a.rho)},"
            f"{_fmt(a.initial_nav)},{_fmt(a.final_nav)},{int(a.bankrupt)}\n"
        )
    rows.append(_meta_comment(config, run.run_index))
    (directory / "agents.csv").write_text("".join(rows))

    if report is None:
        report = metrics_for_run(run)
    (directory / "metrics.json").write_text(
        json.dumps(report.flat_dict(), sort_keys=True, indent=2) + "\n"
    )
    return directory


def write_sweep_summary(sweep, config: SimConfig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = ["bias,p,run,metric,value\n"]
    for p in sweep.p_grid:
        for run_index, report in enumerate(sweep.reports[p]):
            for metric, value in report.summary_rows():
                rows.append(f"{sweep.bias},{_p_label(p)},{run_index},{metric},{_fmt(value)}\n")
    rows.append(_meta_comment(config))
    path.write_text("".join(rows))
    return path


# -- commands ------------------------------------------------------------------


def _build_config(args) -> SimConfig:
    config = load_config(args.config) if args.config else SimConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "bias", None) is not None:
        overrides["bias"] = args.bias
    if getattr(args, "runs", None) is not None:
        overrides["runs"] = args.runs
    return replace(config, **overrides) if overrides else config


def _cmd_run(args) -> int:
    config = _build_config(args)
    run = run_simulation(config, run_index=0)
    directory = write_run_outputs(run, run_dir(args.out_dir, config, 0))
    print(directory)
    return 0


def _cmd_sweep(args) -> int:
    config = _build_config(args)
    try:
        p_grid = [float(part) for part in args.p_grid.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --p-grid value: {args.p_grid!r}") from exc
    if not p_grid:
        raise ConfigError("--p-grid must list at least one percentage")
    sweep = run_sweep(config, p_grid)
    for p in sweep.p_grid:
        cell_config = replace(config, biased_pct=p)
        for run, report in zip(sweep.cells[p], sweep.reports[p]):
            write_run_outputs(run, run_dir(args.out_dir, cell_config, run.run_index), report)
    path = write_sweep_summary(sweep, config, Path(args.out_dir) / config.bias / "sweep_summary.csv")
    print(path)
    return 0


def _cmd_analyze(args) -> int:
    records = ingest_real_csv(args.csv)
    report = metrics_for_prices(
        [r.close for r in records],
        volumes=[r.volume for r in records],
    )
    text = json.dumps(report.flat_dict(), sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
        print(args.out)
    else:
        sys.stdout.write(text)
    return 0


def _flatten_real_metrics(data: dict) -> dict[str, str]:
    flat: dict[str, str] = {}
    for key, value in data.items():
        if key == "run_length_histogram":
            for hk, count in value.items():
                flat[f"run_length_{hk}"] = _fmt(count)
        else:
            flat[key] = _fmt(value)
    return flat


def _cmd_compare(args) -> int:
    """Join a sweep summary with real-data metrics; no recomputation."""
    with open(args.real) as fh:
        real = _flatten_real_metrics(json.load(fh))
    rows = ["bias,p,run,metric,sim_value,real_value\n"]
    with open(args.summary) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "bias,p,run,metric,value":
        raise CsvFormatError("row 1: expected a sweep summary header 'bias,p,run,metric,value'")
    for line in lines[1:]:
        if not line.strip() or line.startswith("#"):
            continue
        bias, p, run_index, metric, value = line.split(",")
        rows.append(f"{bias},{p},{run_index},{metric},{value},{real.get(metric, '')}\n")
    text = "".join(rows)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
        print(args.out)
    else:
        sys.stdout.write(text)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(json.dumps({"error": message}), file=sys.stderr)
        self.exit(2)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="marketsim", description="Agent-based stock market simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, runs_flag=False):
        p.add_argument("--config", help="JSON config file (defaults apply when omitted)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--bias", choices=BIAS_KINDS, help="bias kind override")
        p.add_argument("--out-dir", default="out", help="output directory root")
        if runs_flag:
            p.add_argument("--runs", type=int, help="runs per sweep cell override")

    p_run = sub.add_parser("run", help="one simulation run, writing CSVs and metrics")
    add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="grid of runs over biased-population percentages")
    add_common(p_sweep, runs_flag=True)
    p_sweep.add_argument("--p-grid", default="0,50,100", help="comma-separated percentages")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_an = sub.add_parser("analyze", help="metric battery over a real date,close,volume CSV")
    p_an.add_argument("csv", help="input CSV path")
    p_an.add_argument("--out", help="write JSON here instead of stdout")
    p_an.set_defaults(func=_cmd_analyze)

    p_cmp = sub.add_parser("compare", help="join a sweep summary with analyze output")
    p_cmp.add_argument("--summary", required=True, help="sweep_summary.csv path")
    p_cmp.add_argument("--real", required=True, help="analyze JSON path")
    p_cmp.add_argument("--out", help="write the joined CSV here instead of stdout")
    p_cmp.set_defaults(func=_cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CsvFormatError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
