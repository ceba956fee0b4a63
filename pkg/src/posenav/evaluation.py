"""Localization accuracy evaluation: per-scene median errors and cumulative
error histograms (the report formats used for the benchmark tables)."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .posecore import Pose, rotational_error_deg
from . import svgplot


@dataclass(frozen=True)
class ErrorRecord:
    positional_error: float  # scene units
    rotational_error: float  # degrees

    def __post_init__(self):
        if self.positional_error < 0 or self.rotational_error < 0:
            raise ValueError("errors must be >= 0")


@dataclass(frozen=True)
class CumulativeHistogram:
    """Sorted error values with cumulative fractions; fraction i/N holds
    after the i-th sorted value, so the final fraction is exactly 1."""

    values: np.ndarray
    fractions: np.ndarray


def evaluate_predictions(pairs) -> list[ErrorRecord]:
    """Per-sample errors for (predicted Pose, truth Pose) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no prediction pairs to evaluate")
    records = []
    for predicted, truth in pairs:
        dist = float(
            np.linalg.norm(predicted.position.as_array() - truth.position.as_array())
        )
        records.append(
            ErrorRecord(dist, rotational_error_deg(predicted.rotation, truth.rotation))
        )
    return records


def _lower_median(values) -> float:
    ordered = sorted(values)
    return float(ordered[(len(ordered) - 1) // 2])


def median_errors(records) -> tuple[float, float]:
    """(median positional, median rotational) with the lower-median tie rule
    for even counts."""
    records = list(records)
    if not records:
        raise ValueError("median of empty record list")
    return (
        _lower_median(r.positional_error for r in records),
        _lower_median(r.rotational_error for r in records),
    )


def cumulative_histogram(values) -> CumulativeHistogram:
    values = np.asarray(list(values), dtype=float)
    if values.size == 0:
        raise ValueError("cumulative histogram of no values")
    ordered = np.sort(values)
    fractions = np.arange(1, ordered.size + 1, dtype=float) / ordered.size
    return CumulativeHistogram(ordered, fractions)


def dominates(a: CumulativeHistogram, b: CumulativeHistogram) -> bool:
    """True when run a's errors are no worse than run b's at every matched
    quantile and strictly better somewhere (a's curve sits left of b's)."""
    grid = np.linspace(0.0, 1.0, 101)[1:]
    qa = np.quantile(a.values, grid)
    qb = np.quantile(b.values, grid)
    return bool(np.all(qa <= qb) and np.any(qa < qb))


def write_histogram_csv(path, histograms: dict[str, CumulativeHistogram]):
    """CSV rows `error_type,value,cum_fraction` for one or more histograms."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["error_type", "value", "cum_fraction"])
        for error_type in sorted(histograms):
            hist = histograms[error_type]
            for v, f in zip(hist.values, hist.fractions):
                writer.writerow([error_type, repr(float(v)), repr(float(f))])


def read_histogram_csv(path) -> dict[str, CumulativeHistogram]:
    by_type: dict[str, list[tuple[float, float]]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            by_type.setdefault(row["error_type"], []).append(
                (float(row["value"]), float(row["cum_fraction"]))
            )
    return {
        k: CumulativeHistogram(
            np.array([v for v, _ in rows]), np.array([f for _, f in rows])
        )
        for k, rows in by_type.items()
    }


def render_histogram_svg(path, histograms: dict[str, CumulativeHistogram], title=""):
    """Cumulative step plot per error type, medians as dotted vertical lines."""
    curves = []
    vlines = []
    for error_type in sorted(histograms):
        hist = histograms[error_type]
        xs = [0.0] + [float(v) for v in hist.values]
        ys = [0.0] + [float(f) for f in hist.fractions]
        curves.append((error_type, xs, ys))
        vlines.append((_lower_median(hist.values), error_type))
    svgplot.step_chart(
        path,
        curves,
        vlines=vlines,
        title=title,
        xlabel="error",
        ylabel="cumulative fraction",
    )
