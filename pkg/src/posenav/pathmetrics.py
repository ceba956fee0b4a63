"""Metrics over time-ordered pose traces from the robot pathing runs.

In-place rotations: position spread in the (x, z) plane and yaw histogram
uniformity (36 bins, outlier bins removed with an IQR constant of 1.5).
Straight lines: least-squares residuals of the (x, z) positions and circular
yaw concentration.  Compound paths: averaged heading arrows every N samples
plus velocity-consistency flags.

The spread statistic is implemented exactly as reported,

    sigma_xz = (1 / (N - 1)) * sum_i sqrt((x_i - mean_x)^2 + (z_i - mean_z)^2)

i.e. a mean radial deviation with an N - 1 normalizer, not a textbook
standard deviation.  Yaw is measured about the world y (up) axis with 0 at
the -z facing and 90 degrees at the -x facing (a +90 degree rotation about
+y); yaw averages use circular statistics since real traces sit near the
0/360 wrap.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .posecore import Pose, Position, Quaternion, view_direction
from . import svgplot

NOMINAL_RATE_HZ = 30.0
YAW_BINS = 36
IQR_CONSTANT = 1.5


def _wrap_deg(angle: float) -> float:
    """Angle folded into [0, 360); guards the float-modulo edge where a tiny
    negative input rounds to exactly 360.0."""
    a = angle % 360.0
    return a if a < 360.0 else 0.0


class UndefinedYawError(ValueError):
    pass


class DegeneratePathError(ValueError):
    pass


class UndefinedMeanError(ValueError):
    pass


@dataclass
class PathTrace:
    """Time-ordered pose samples; nominally 30 per second."""

    times: np.ndarray
    poses: list[Pose]

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or len(self.poses) != self.times.size:
            raise ValueError("times and poses must have matching lengths")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("timestamps must be strictly increasing")

    def __len__(self):
        return self.times.size

    def xz(self) -> np.ndarray:
        return np.array(
            [[p.position.x, p.position.z] for p in self.poses], dtype=float
        )


@dataclass
class YawHistogram:
    counts: np.ndarray  # 36 bins over [0, 360)
    mean: float
    std: float
    filtered_mean: float
    filtered_std: float
    kept_bins: np.ndarray = field(default=None)


def load_trace_csv(path) -> PathTrace:
    """Trace CSV with columns t,x,y,z,qw,qx,qy,qz."""
    times, poses = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            times.append(float(row["t"]))
            poses.append(
                Pose(
                    Position(float(row["x"]), float(row["y"]), float(row["z"])),
                    Quaternion(
                        float(row["qw"]), float(row["qx"]), float(row["qy"]), float(row["qz"])
                    ),
                )
            )
    return PathTrace(np.array(times), poses)


def write_trace_csv(path, trace: PathTrace):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "x", "y", "z", "qw", "qx", "qy", "qz"])
        for t, pose in zip(trace.times, trace.poses):
            p, q = pose.position, pose.rotation
            writer.writerow([repr(float(v)) for v in (t, p.x, p.y, p.z, q.w, q.x, q.y, q.z)])


def xz_spread(trace: PathTrace) -> float:
    """Mean radial deviation in the (x, z) plane with the N - 1 normalizer."""
    if len(trace) < 2:
        raise ValueError("xz_spread needs at least two samples")
    xz = trace.xz()
    centred = xz - xz.mean(axis=0)
    return float(np.sqrt((centred**2).sum(axis=1)).sum() / (len(trace) - 1))


def yaw_of(pose: Pose) -> float:
    """Yaw of a pose in [0, 360) degrees about the world y (up) axis.

    0 is the -z facing; +90 is a quarter turn about +y.  Raises
    UndefinedYawError when the view direction is within 1e-9 of +/-y.
    """
    v = view_direction(pose)
    if math.hypot(v[0], v[2]) < 1e-9:
        raise UndefinedYawError("view direction is vertical; yaw undefined")
    return _wrap_deg(math.degrees(math.atan2(-v[0], -v[2])))


def yaw_histogram(trace: PathTrace) -> YawHistogram:
    """36-bin yaw histogram with raw and IQR-filtered count statistics.

    Bin k covers [10k, 10(k+1)) degrees.  Filtering removes bins whose
    counts fall outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR] and recomputes the
    mean/std over the surviving bins.
    """
    if len(trace) < YAW_BINS:
        raise ValueError(f"yaw_histogram needs at least {YAW_BINS} samples")
    yaws = np.array([yaw_of(p) for p in trace.poses])
    bins = np.floor(yaws / (360.0 / YAW_BINS)).astype(int) % YAW_BINS
    counts = np.bincount(bins, minlength=YAW_BINS).astype(float)
    q1, q3 = np.percentile(counts, [25, 75])
    iqr = q3 - q1
    lo, hi = q1 - IQR_CONSTANT * iqr, q3 + IQR_CONSTANT * iqr
    kept = (counts >= lo) & (counts <= hi)
    filtered = counts[kept]
    return YawHistogram(
        counts=counts,
        mean=float(counts.mean()),
        std=float(counts.std()),
        filtered_mean=float(filtered.mean()) if filtered.size else 0.0,
        filtered_std=float(filtered.std()) if filtered.size else 0.0,
        kept_bins=kept,
    )


@dataclass
class LineFit:
    slope: float
    intercept: float
    dependent: str  # "z" fitted on x, or "x" fitted on z for near-vertical paths


def line_fit_residuals(trace: PathTrace) -> tuple[float, float, LineFit]:
    """Ordinary least squares of the (x, z) positions.

    Fits z on x, or x on z when x varies less (near-vertical paths).
    Returns (total squared residuals, residuals per sample, fitted line).
    """
    if len(trace) < 3:
        raise ValueError("line fit needs at least three samples")
    xz = trace.xz()
    x, z = xz[:, 0], xz[:, 1]
    if np.allclose(xz, xz[0], atol=1e-12):
        raise DegeneratePathError("all positions identical; no line to fit")
    if np.var(x) >= np.var(z):
        a, b, dependent = x, z, "z"
    else:
        a, b, dependent = z, x, "x"
    am = a.mean()
    denom = float(((a - am) ** 2).sum())
    slope = float(((a - am) * (b - b.mean())).sum() / denom) if denom > 0 else 0.0
    intercept = float(b.mean() - slope * am)
    residuals = b - (slope * a + intercept)
    total = float((residuals**2).sum())
    return total, total / len(trace), LineFit(slope, intercept, dependent)


def yaw_concentration(trace: PathTrace) -> tuple[float, float]:
    """Circular mean and circular standard deviation of the yaws, degrees.

    The mean is the direction of the resultant of the unit headings; the
    std follows sqrt(-2 ln R) with R the mean resultant length, so 359 and
    1 average near 0 rather than 180.
    """
    if len(trace) < 2:
        raise ValueError("yaw_concentration needs at least two samples")
    yaws = np.radians([yaw_of(p) for p in trace.poses])
    c, s = np.cos(yaws).mean(), np.sin(yaws).mean()
    r = math.hypot(c, s)
    if r < 1e-9:
        raise UndefinedMeanError("zero resultant; circular mean undefined")
    mean = _wrap_deg(math.degrees(math.atan2(s, c)))
    std = math.degrees(math.sqrt(max(0.0, -2.0 * math.log(min(r, 1.0)))))
    return mean, std


@dataclass
class CompoundReport:
    xz: np.ndarray  # (N, 2) positions
    arrows: list  # (x, z, heading_deg) circular-mean heading per window
    speed_flags: list  # sample indices whose jump exceeds the speed budget
    stride: int
    max_speed: float


def compound_path_report(
    trace: PathTrace, stride: int = 16, max_speed: float = 1.0
) -> CompoundReport:
    """Path polyline with one averaged heading arrow per stride-sized window
    and velocity-consistency flags.

    A sample is flagged when the displacement from its predecessor exceeds
    max_speed / 30 (scene units per nominal frame).
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    xz = trace.xz()
    arrows = []
    for start in range(0, len(trace), stride):
        window = trace.poses[start : start + stride]
        yaws = np.radians([yaw_of(p) for p in window])
        c, s = np.cos(yaws).mean(), np.sin(yaws).mean()
        if math.hypot(c, s) < 1e-9:
            continue  # a perfectly balanced window has no average heading
        heading = _wrap_deg(math.degrees(math.atan2(s, c)))
        centre = xz[start : start + stride].mean(axis=0)
        arrows.append((float(centre[0]), float(centre[1]), heading))
    budget = max_speed / NOMINAL_RATE_HZ
    jumps = np.linalg.norm(np.diff(xz, axis=0), axis=1)
    speed_flags = [int(i) + 1 for i in np.nonzero(jumps > budget)[0]]
    return CompoundReport(xz, arrows, speed_flags, stride, max_speed)


def heading_vector(yaw_deg: float) -> tuple[float, float]:
    """Unit (x, z) facing for a yaw in degrees (yaw 0 faces -z)."""
    r = math.radians(yaw_deg)
    return -math.sin(r), -math.cos(r)


# ---------------------------------------------------------------------------
# Report writers
# ---------------------------------------------------------------------------


def write_spin_report(path_csv, path_svg, trace: PathTrace):
    """In-place-rotation report: spread, yaw-bin statistics, scatter SVG."""
    hist = yaw_histogram(trace)
    spread = xz_spread(trace)
    xz = trace.xz()
    mean_pos = xz.mean(axis=0)
    with open(path_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "num_samples",
                "mean_x",
                "mean_z",
                "sigma_xz",
                "yaw_bin_mean",
                "yaw_bin_std",
                "yaw_bin_mean_filtered",
                "yaw_bin_std_filtered",
            ]
        )
        writer.writerow(
            [
                len(trace),
                repr(float(mean_pos[0])),
                repr(float(mean_pos[1])),
                repr(spread),
                repr(hist.mean),
                repr(hist.std),
                repr(hist.filtered_mean),
                repr(hist.filtered_std),
            ]
        )
    svgplot.path_chart(path_svg, [tuple(p) for p in xz], title="in-place rotation")


def write_line_report(path_csv, path_svg, trace: PathTrace):
    """Straight-line report: residuals, yaw concentration, fitted-line SVG."""
    total, per_sample, fit = line_fit_residuals(trace)
    mean, std = yaw_concentration(trace)
    with open(path_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "num_samples",
                "residuals_squared",
                "residuals_squared_per_sample",
                "yaw_mean",
                "yaw_std",
            ]
        )
        writer.writerow(
            [len(trace), repr(total), repr(per_sample), repr(mean), repr(std)]
        )
    xz = trace.xz()
    if fit.dependent == "z":
        x0, x1 = float(xz[:, 0].min()), float(xz[:, 0].max())
        line = ((x0, fit.slope * x0 + fit.intercept), (x1, fit.slope * x1 + fit.intercept))
    else:
        z0, z1 = float(xz[:, 1].min()), float(xz[:, 1].max())
        line = ((fit.slope * z0 + fit.intercept, z0), (fit.slope * z1 + fit.intercept, z1))
    svgplot.path_chart(
        path_svg, [tuple(p) for p in xz], fitted_line=line, title="straight line"
    )


def write_compound_report(path_csv, path_svg, trace: PathTrace, stride=16, max_speed=1.0):
    """Compound-path report: polyline, heading arrows, speed flags."""
    report = compound_path_report(trace, stride=stride, max_speed=max_speed)
    with open(path_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "a", "b", "c"])
        for x, z in report.xz:
            writer.writerow(["position", repr(float(x)), repr(float(z)), ""])
        for x, z, heading in report.arrows:
            writer.writerow(["arrow", repr(float(x)), repr(float(z)), repr(heading)])
        for idx in report.speed_flags:
            writer.writerow(["speed_flag", idx, "", ""])
    arrows = [
        (x, z, *heading_vector(heading)) for x, z, heading in report.arrows
    ]
    svgplot.path_chart(
        path_svg,
        [tuple(p) for p in report.xz],
        arrows=arrows,
        flagged=report.speed_flags,
        title="compound path",
    )
