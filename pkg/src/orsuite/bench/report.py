"""Benchmark report serialization: CSV rows or an equivalent JSON object.

Floats are written with repr so parse(emit(report)) == report exactly. The
reference method is always the first row/entry.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

from ..core import ConfigError
from .harness import BenchmarkReport, MethodResult

CSV_HEADER = ["env", "method", "episodes", "seed", "mean", "std", "ratio", "seconds"]


def emit_report(report: BenchmarkReport, fmt: str, path: str | Path) -> Path:
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for r in report.results:
                writer.writerow(
                    [
                        report.env_id,
                        r.method,
                        report.episodes,
                        report.seed,
                        repr(r.mean),
                        repr(r.std),
                        repr(r.ratio),
                        repr(r.seconds),
                    ]
                )
    elif fmt == "json":
        data = {
            "env": report.env_id,
            "episodes": report.episodes,
            "seed": report.seed,
            "reference": report.reference,
            "results": [
                {
                    "method": r.method,
                    "mean": r.mean,
                    "std": r.std,
                    "ratio": r.ratio,
                    "seconds": r.seconds,
                }
                for r in report.results
            ],
        }
        path.write_text(json.dumps(data, indent=2) + "\n")
    else:
        raise ConfigError(f"unknown report format {fmt!r}; use csv or json")
    return path


def parse_report(path: str | Path, fmt: str | None = None) -> BenchmarkReport:
    """Inverse of emit_report; format inferred from the suffix when omitted."""
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower()
    if fmt == "csv":
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != CSV_HEADER:
                raise ConfigError(f"unexpected report header: {reader.fieldnames}")
            rows = list(reader)
        if not rows:
            raise ConfigError("report holds no rows")
        results = [
            MethodResult(
                method=row["method"],
                mean=float(row["mean"]),
                std=float(row["std"]),
                ratio=float(row["ratio"]),
                seconds=float(row["seconds"]),
            )
            for row in rows
        ]
        return BenchmarkReport(
            env_id=rows[0]["env"],
            episodes=int(rows[0]["episodes"]),
            seed=int(rows[0]["seed"]),
            results=results,
        )
    if fmt == "json":
        data = json.loads(Path(path).read_text())
        results = [
            MethodResult(
                method=entry["method"],
                mean=float(entry["mean"]),
                std=float(entry["std"]),
                ratio=float(entry["ratio"]),
                seconds=float(entry["seconds"]),
            )
            for entry in data["results"]
        ]
        report = BenchmarkReport(
            env_id=data["env"],
            episodes=int(data["episodes"]),
            seed=int(data["seed"]),
            results=results,
        )
        if report.reference != data.get("reference", report.reference):
            raise ConfigError("report reference method does not match first entry")
        return report
    raise ConfigError(f"unknown report format {fmt!r}; use csv or json")
