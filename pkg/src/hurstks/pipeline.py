"""Windowed analysis of volatility series from CSV to report.

A series of positive levels (implied or realized volatility) is
log-transformed, cut into fixed-length non-overlapping windows, and
each window's scaling exponent is estimated independently; the window
estimates are then tested for constancy, and two series can be
compared with a z-test.  Everything downstream of the master seed is
deterministic, and per-window random streams are derived by position
so windows could be processed in any order or in parallel.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from hurstks.fgn import Path, increments
from hurstks.ksdist import RescaledPair
from hurstks.minimize import EstimationResult, OptimizerConfig, estimate_hurst
from hurstks.permute import SCHEMES, PermutationPlan
from hurstks.stats import (
    AggregateReport,
    VarianceInputs,
    aggregate_windows,
    confidence_interval,
    estimator_sd,
    z_test_means,
)

__all__ = [
    "SeriesRecord",
    "WindowConfig",
    "RunManifest",
    "WindowRow",
    "SeriesReport",
    "RunReport",
    "CsvFormatError",
    "load_series",
    "log_transform",
    "load_intraday",
    "realized_vol",
    "window_partition",
    "parse_manifest",
    "run_static_analysis",
]

logger = logging.getLogger(__name__)

VALUE_SCALES = ("level", "log")


class CsvFormatError(ValueError):
    """Input file violates the expected CSV layout."""


@dataclass(frozen=True)
class SeriesRecord:
    """One observation: an ISO date and a finite value."""

    date: dt.date
    value: float


@dataclass(frozen=True)
class WindowConfig:
    """Windowing and estimation sizes for one analysis run.

    Parameters
    ----------
    window_length : int
        Points per window; the series is cut into consecutive
        non-overlapping windows of this length starting at the first
        observation, and the remainder is discarded.
    a_max : int
        Coarse lag of the increment comparison.
    subseq : int, optional
        Decorrelated subsample size per window; defaults to
        ``window_length - a_max`` so that both increment samples end
        up with the same size.
    alpha : float
        Level for the goodness-of-fit flag and confidence interval.
    """

    window_length: int = 1512
    a_max: int = 21
    subseq: int | None = None
    alpha: float = 0.05

    def __post_init__(self) -> None:
        if self.a_max <= 1:
            raise ValueError("a_max must exceed 1")
        if self.window_length <= self.a_max:
            raise ValueError("window_length must exceed a_max")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.subseq is not None and not (
            1 <= self.subseq <= self.window_length - self.a_max
        ):
            raise ValueError("subseq must lie in [1, window_length - a_max]")

    def resolved_subseq(self) -> int:
        return self.subseq if self.subseq is not None else self.window_length - self.a_max


@dataclass(frozen=True)
class RunManifest:
    """Full description of one analysis run.

    Numeric results depend only on the inputs, the window and
    optimizer settings, the permutation scheme, and ``master_seed``;
    ``out_dir`` merely says where the report files go.
    """

    inputs: tuple[str, ...]
    window: WindowConfig = WindowConfig()
    optimizer: OptimizerConfig = OptimizerConfig()
    perm_scheme: str = "uniform_sample"
    block_length: int = 128
    input_scale: str = "level"
    master_seed: int = 0
    out_dir: str = "."

    def __post_init__(self) -> None:
        if not 1 <= len(self.inputs) <= 2:
            raise ValueError("manifest needs one or two input files")
        if self.perm_scheme not in SCHEMES:
            raise ValueError(f"perm_scheme must be one of {SCHEMES}")
        if self.input_scale not in VALUE_SCALES:
            raise ValueError(f"input_scale must be one of {VALUE_SCALES}")


@dataclass(frozen=True)
class WindowRow:
    """Per-window output row."""

    window_index: int
    start_date: dt.date
    end_date: dt.date
    result: EstimationResult
    ci_lo: float
    ci_hi: float


@dataclass(frozen=True)
class SeriesReport:
    """Everything derived from one input series."""

    input: str
    rows_parsed: int
    rows_dropped: int
    n_windows: int
    remainder: int
    windows: tuple[WindowRow, ...]
    aggregate: AggregateReport | None


@dataclass(frozen=True)
class RunReport:
    """Result of a full analysis run (one or two series)."""

    series: tuple[SeriesReport, ...]
    z_stat: float | None
    z_p: float | None
    warnings: tuple[str, ...]


def _parse_series(file) -> tuple[list[SeriesRecord], int, int]:
    """Parse a date,value CSV; returns (records, rows_parsed, dropped)."""
    records: list[SeriesRecord] = []
    dropped = 0
    parsed = 0
    with open(file, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{file}: empty file") from None
        if [h.strip().lower() for h in header] != ["date", "value"]:
            raise CsvFormatError(f"{file}: header must be 'date,value'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != 2:
                raise CsvFormatError(f"{file}: line {lineno}: expected 2 fields")
            parsed += 1
            raw_date, raw_value = row[0].strip(), row[1].strip()
            try:
                date = dt.date.fromisoformat(raw_date)
            except ValueError:
                raise CsvFormatError(
                    f"{file}: line {lineno}: bad date {raw_date!r}"
                ) from None
            if raw_value == "":
                dropped += 1
                continue
            try:
                value = float(raw_value)
            except ValueError:
                raise CsvFormatError(
                    f"{file}: line {lineno}: bad value {raw_value!r}"
                ) from None
            if math.isnan(value):
                dropped += 1
                continue
            records.append(SeriesRecord(date=date, value=value))
    records.sort(key=lambda r: r.date)
    for prev, cur in zip(records, records[1:]):
        if prev.date == cur.date:
            raise CsvFormatError(f"{file}: duplicate date {cur.date.isoformat()}")
    return records, parsed, dropped


def load_series(file, value_scale: str = "level") -> list[SeriesRecord]:
    """Load a ``date,value`` CSV into date-ordered records.

    Parameters
    ----------
    file : path-like
        CSV file whose header is exactly ``date,value`` with ISO-8601
        dates.
    value_scale : str, optional
        ``"level"`` (the default) drops rows with missing or
        non-positive values, since a log transform follows;
        ``"log"`` means values are already on log scale and only
        missing values are dropped.

    Returns
    -------
    list of SeriesRecord
        Sorted by date.  Dropped-row counts go to the module logger,
        with a warning when they exceed 1% of data rows.

    Raises
    ------
    CsvFormatError
        On malformed headers, unparseable rows (with line number), or
        duplicate dates.
    """
    if value_scale not in VALUE_SCALES:
        raise ValueError(f"value_scale must be one of {VALUE_SCALES}")
    records, parsed, dropped = _parse_series(file)
    if value_scale == "level":
        kept = [r for r in records if r.value > 0.0]
        dropped += len(records) - len(kept)
        records = kept
    if dropped:
        level = logging.WARNING if dropped > 0.01 * max(parsed, 1) else logging.INFO
        logger.log(level, "%s: dropped %d of %d rows", file, dropped, parsed)
    return records


def log_transform(records: Sequence[SeriesRecord]) -> Path:
    """Natural log of the record values, as a path."""
    if len(records) < 2:
        raise ValueError("need at least two records")
    values = np.array([r.value for r in records])
    if np.any(values <= 0.0):
        raise ValueError("log transform needs positive values")
    return Path(np.log(values))


def load_intraday(file) -> dict[dt.date, list[float]]:
    """Load a ``date,time,log_return`` CSV grouped by day."""
    out: dict[dt.date, list[float]] = {}
    with open(file, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{file}: empty file") from None
        if [h.strip().lower() for h in header] != ["date", "time", "log_return"]:
            raise CsvFormatError(f"{file}: header must be 'date,time,log_return'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != 3:
                raise CsvFormatError(f"{file}: line {lineno}: expected 3 fields")
            try:
                date = dt.date.fromisoformat(row[0].strip())
                ret = float(row[2])
            except ValueError:
                raise CsvFormatError(f"{file}: line {lineno}: bad row") from None
            out.setdefault(date, []).append(ret)
    return out


def realized_vol(
    returns_by_day: Mapping[dt.date, Sequence[float]], min_obs: int = 30
) -> list[SeriesRecord]:
    """Daily realized volatility from intraday log returns.

    Each day's value is ``sqrt(sum(r_i^2))``.  Days with fewer than
    ``min_obs`` returns, and days whose returns are all zero, are
    dropped (logged).

    Returns
    -------
    list of SeriesRecord
        One positive value per retained day, sorted by date.
    """
    if min_obs < 2:
        raise ValueError("min_obs must be at least 2")
    records = []
    short_days = zero_days = 0
    for date in sorted(returns_by_day):
        rets = np.asarray(returns_by_day[date], dtype=float)
        if rets.size < min_obs:
            short_days += 1
            continue
        rv = float(np.sqrt(np.sum(rets**2)))
        if rv == 0.0:
            zero_days += 1
            continue
        records.append(SeriesRecord(date=date, value=rv))
    if short_days or zero_days:
        logger.info(
            "realized_vol: dropped %d short and %d all-zero days", short_days, zero_days
        )
    return records


def window_partition(path: Path, config: WindowConfig) -> list[Path]:
    """Cut a path into consecutive full windows, discarding the tail.

    Parameters
    ----------
    path : Path
        Series of at least one full window.
    config : WindowConfig
        Provides the window length.

    Returns
    -------
    list of Path
        ``len(path) // window_length`` windows, each of exactly
        ``window_length`` points, anchored at the start of the
        series; the remainder is logged and dropped.
    """
    n = len(path)
    size = config.window_length
    count = n // size
    if count == 0:
        raise ValueError(f"series of {n} points is shorter than one window ({size})")
    if n % size:
        logger.info("window_partition: discarding %d trailing points", n % size)
    return [Path(path.values[w * size : (w + 1) * size]) for w in range(count)]


_MANIFEST_KEYS = {
    "input": str,
    "input2": str,
    "input_scale": str,
    "window_length": int,
    "a_max": int,
    "subseq": int,
    "alpha": float,
    "optimizer": str,
    "grid_step": float,
    "tolerance": float,
    "max_evals": int,
    "prescan_points": int,
    "perm_scheme": str,
    "block_length": int,
    "seed": int,
    "out_dir": str,
}


def parse_manifest(file) -> RunManifest:
    """Read a flat ``key = value`` manifest file into a RunManifest.

    Blank lines and ``#`` comments are ignored; unknown keys are an
    error.  Keys mirror the manifest fields (``input`` and optional
    ``input2`` for the series, ``optimizer`` for the method name,
    ``seed`` for the master seed).
    """
    raw: dict[str, str] = {}
    with open(file) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise CsvFormatError(f"{file}: line {lineno}: expected 'key = value'")
            key, _, value = text.partition("=")
            key, value = key.strip(), value.strip()
            if key not in _MANIFEST_KEYS:
                raise CsvFormatError(f"{file}: line {lineno}: unknown key {key!r}")
            if key in raw:
                raise CsvFormatError(f"{file}: line {lineno}: duplicate key {key!r}")
            raw[key] = value
    if "input" not in raw:
        raise CsvFormatError(f"{file}: missing required key 'input'")
    try:
        typed = {k: _MANIFEST_KEYS[k](v) for k, v in raw.items()}
    except ValueError as exc:
        raise CsvFormatError(f"{file}: {exc}") from None
    inputs = [typed["input"]]
    if "input2" in typed:
        inputs.append(typed["input2"])
    window = WindowConfig(
        window_length=typed.get("window_length", 1512),
        a_max=typed.get("a_max", 21),
        subseq=typed.get("subseq"),
        alpha=typed.get("alpha", 0.05),
    )
    optimizer = OptimizerConfig(
        method=typed.get("optimizer", "brent"),
        grid_step=typed.get("grid_step", 1e-4),
        tolerance=typed.get("tolerance", 1e-6),
        max_evals=typed.get("max_evals", 10_000),
        prescan_points=typed.get("prescan_points", 0),
    )
    return RunManifest(
        inputs=tuple(inputs),
        window=window,
        optimizer=optimizer,
        perm_scheme=typed.get("perm_scheme", "uniform_sample"),
        block_length=typed.get("block_length", 128),
        input_scale=typed.get("input_scale", "level"),
        master_seed=typed.get("seed", 0),
        out_dir=typed.get("out_dir", "."),
    )


def _estimate_one_window(
    window: Path, manifest: RunManifest, series_idx: int, window_idx: int
) -> EstimationResult:
    wc = manifest.window
    pair = RescaledPair(
        fine=increments(window, 1),
        coarse=increments(window, wc.a_max),
        a_max=wc.a_max,
    )
    seeds = np.random.SeedSequence(
        manifest.master_seed, spawn_key=(series_idx, window_idx)
    ).generate_state(2)
    plan = PermutationPlan(
        scheme=manifest.perm_scheme,
        block_length=manifest.block_length,
        subsample_size=wc.resolved_subseq() if manifest.perm_scheme == "uniform_sample" else None,
        seed=int(seeds[0]),
    )
    optimizer = replace(manifest.optimizer, seed=int(seeds[1]))
    return estimate_hurst(pair, plan, optimizer, alpha=wc.alpha)


def _analyze_series(manifest: RunManifest, series_idx: int) -> tuple[SeriesReport, list[str]]:
    file = manifest.inputs[series_idx]
    records, parsed, dropped = _parse_series(file)
    warnings: list[str] = []
    if manifest.input_scale == "level":
        kept = [r for r in records if r.value > 0.0]
        dropped += len(records) - len(kept)
        records = kept
        if len(records) < 2:
            raise CsvFormatError(f"{file}: fewer than two usable rows")
        path = log_transform(records)
    else:
        if len(records) < 2:
            raise CsvFormatError(f"{file}: fewer than two usable rows")
        path = Path(np.array([r.value for r in records]))
    if dropped > 0.01 * max(parsed, 1):
        warnings.append(f"{file}: dropped {dropped} of {parsed} rows (>1%)")
    windows = window_partition(path, manifest.window)
    size = manifest.window.window_length
    rows = []
    for w, wpath in enumerate(windows):
        result = _estimate_one_window(wpath, manifest, series_idx, w)
        ci_lo, ci_hi = confidence_interval(
            result.h_hat,
            VarianceInputs(a_max=result.a_max, n=result.n, m=result.m),
            manifest.window.alpha,
        )
        rows.append(
            WindowRow(
                window_index=w,
                start_date=records[w * size].date,
                end_date=records[(w + 1) * size - 1].date,
                result=result,
                ci_lo=ci_lo,
                ci_hi=ci_hi,
            )
        )
    aggregate = None
    if len(rows) >= 2:
        sigma = estimator_sd(
            VarianceInputs(a_max=manifest.window.a_max, n=rows[0].result.n, m=rows[0].result.m)
        )
        aggregate = aggregate_windows([r.result.h_hat for r in rows], sigma)
    report = SeriesReport(
        input=str(file),
        rows_parsed=parsed,
        rows_dropped=dropped,
        n_windows=len(rows),
        remainder=len(path) % size,
        windows=tuple(rows),
        aggregate=aggregate,
    )
    return report, warnings


def _write_windows_csv(path: str, series: Iterable[SeriesReport]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "window_index",
                "start_date",
                "end_date",
                "h_hat",
                "delta_min",
                "critical",
                "significant",
                "ci_lo",
                "ci_hi",
            ]
        )
        for rep in series:
            for row in rep.windows:
                res = row.result
                writer.writerow(
                    [
                        row.window_index,
                        row.start_date.isoformat(),
                        row.end_date.isoformat(),
                        repr(res.h_hat),
                        repr(res.delta_min),
                        repr(res.critical_value),
                        "true" if res.significant else "false",
                        repr(row.ci_lo),
                        repr(row.ci_hi),
                    ]
                )


def _report_json(manifest: RunManifest, report: RunReport) -> dict:
    doc = {
        "settings": {
            "window_length": manifest.window.window_length,
            "a_max": manifest.window.a_max,
            "subseq": manifest.window.resolved_subseq(),
            "alpha": manifest.window.alpha,
            "optimizer": manifest.optimizer.method,
            "perm_scheme": manifest.perm_scheme,
            "input_scale": manifest.input_scale,
            "master_seed": manifest.master_seed,
        },
        "series": [],
        "z_stat": report.z_stat,
        "z_p": report.z_p,
        "warnings": list(report.warnings),
    }
    for rep in report.series:
        entry = {
            "input": rep.input,
            "rows_parsed": rep.rows_parsed,
            "rows_dropped": rep.rows_dropped,
            "n_windows": rep.n_windows,
            "remainder": rep.remainder,
            "windows": [
                {
                    "window_index": row.window_index,
                    "start_date": row.start_date.isoformat(),
                    "end_date": row.end_date.isoformat(),
                    "h_hat": row.result.h_hat,
                    "delta_min": row.result.delta_min,
                    "critical": row.result.critical_value,
                    "significant": row.result.significant,
                    "ci_lo": row.ci_lo,
                    "ci_hi": row.ci_hi,
                }
                for row in rep.windows
            ],
        }
        if rep.aggregate is not None:
            entry["aggregate"] = asdict(rep.aggregate)
        doc["series"].append(entry)
    return doc


def run_static_analysis(manifest: RunManifest) -> RunReport:
    """Run the full windowed analysis described by a manifest.

    Loads each input series, log-transforms it (unless the manifest
    says values are already logs), partitions it into windows,
    estimates the exponent per window with seeds derived from the
    master seed and the window position, and aggregates.  With two
    inputs, the mean exponents are compared by a z-test whose scale
    is the per-window standard deviation.

    Side effects: writes ``report.json`` and ``windows.csv`` into the
    manifest's ``out_dir``.  Two runs from the same manifest produce
    byte-identical files.

    Returns
    -------
    RunReport
    """
    series = []
    warnings: list[str] = []
    for idx in range(len(manifest.inputs)):
        rep, warns = _analyze_series(manifest, idx)
        series.append(rep)
        warnings.extend(warns)
    z_stat = z_p = None
    if len(series) == 2:
        means = []
        for rep in series:
            hs = [row.result.h_hat for row in rep.windows]
            means.append(float(np.mean(hs)))
        first = series[0].windows[0].result
        sigma = estimator_sd(
            VarianceInputs(a_max=first.a_max, n=first.n, m=first.m)
        )
        z_stat, z_p = z_test_means(means[0], means[1], sigma)
    report = RunReport(
        series=tuple(series), z_stat=z_stat, z_p=z_p, warnings=tuple(warnings)
    )
    os.makedirs(manifest.out_dir, exist_ok=True)
    with open(os.path.join(manifest.out_dir, "report.json"), "w") as fh:
        json.dump(_report_json(manifest, report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_windows_csv(os.path.join(manifest.out_dir, "windows.csv"), series)
    return report
