"""Occupancy-grid navigation simulator: Monte Carlo localization with a
hard accept/reject range filter, odometry and range-scan simulation, and
Dijkstra shortest-path planning with obstacle inflation.

Geometry lives in the (x, z) ground plane (y is up everywhere in this
package).  Grid row indices map to z and columns to x; headings are world
angles in radians measured from the +x axis toward +z.  Robot-frame motion
deltas (forward x, lateral z, yaw) are rotated by each particle's own
heading, matching an odometer that reports movement in the device frame.

The particle filter follows the classic recipe: uniform initialization over
free space, per-particle motion noise, and removal of any particle whose
simulated scan disagrees with the observed scan by more than a tolerance.
Removed particles re-initialize at the modal pose, a random legal pose, or
the pose barycentre; the adaptive variant always re-seeds a configurable
fraction of removals uniformly so the filter can recover from kidnapping.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .pgm import read_pgm, write_pgm


class InvalidPoseError(ValueError):
    pass


class NoFreeSpaceError(ValueError):
    pass


class NoPathError(ValueError):
    pass


class InvalidEndpointError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Occupancy grid
# ---------------------------------------------------------------------------


@dataclass
class OccupancyGrid:
    """Boolean occupancy raster; resolution is cells per metre."""

    occupied: np.ndarray  # (rows, cols) bool; row -> z, col -> x
    resolution: float
    origin: tuple[float, float] = (0.0, 0.0)  # world (x, z) of cell (0, 0) corner

    def __post_init__(self):
        self.occupied = np.asarray(self.occupied, dtype=bool)
        if self.occupied.ndim != 2:
            raise ValueError("occupancy raster must be 2-D")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")

    @property
    def rows(self):
        return self.occupied.shape[0]

    @property
    def cols(self):
        return self.occupied.shape[1]

    def world_size(self) -> tuple[float, float]:
        return self.cols / self.resolution, self.rows / self.resolution

    def cell_of(self, x: float, z: float) -> tuple[int, int]:
        col = int(math.floor((x - self.origin[0]) * self.resolution))
        row = int(math.floor((z - self.origin[1]) * self.resolution))
        return row, col

    def cell_centre(self, row: int, col: int) -> tuple[float, float]:
        x = self.origin[0] + (col + 0.5) / self.resolution
        z = self.origin[1] + (row + 0.5) / self.resolution
        return x, z

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.rows and 0 <= col < self.cols

    def is_free(self, x: float, z: float) -> bool:
        row, col = self.cell_of(x, z)
        return self.in_bounds(row, col) and not self.occupied[row, col]

    def free_cells(self) -> np.ndarray:
        return np.argwhere(~self.occupied)


def save_map(grid: OccupancyGrid, pgm_path):
    """Write the grid as a binary PGM (occupied black) plus a JSON sidecar
    carrying resolution and origin."""
    image = np.where(grid.occupied, 0, 255).astype(np.uint8)
    write_pgm(pgm_path, image)
    sidecar = Path(pgm_path).with_suffix(".json")
    with open(sidecar, "w") as fh:
        json.dump(
            {"resolution": grid.resolution, "origin": list(grid.origin)}, fh, indent=1
        )


def load_map(pgm_path) -> OccupancyGrid:
    image = read_pgm(pgm_path)
    sidecar = Path(pgm_path).with_suffix(".json")
    with open(sidecar) as fh:
        meta = json.load(fh)
    return OccupancyGrid(
        image < 128, float(meta["resolution"]), tuple(meta.get("origin", (0.0, 0.0)))
    )


# ---------------------------------------------------------------------------
# Range sensing (shared by the scan simulator and the particle filter)
# ---------------------------------------------------------------------------


@dataclass
class RangeScan:
    beam_angles: np.ndarray  # radians, relative to the device heading
    ranges: np.ndarray  # metres, in [0, max_range]
    max_range: float

    def __post_init__(self):
        self.beam_angles = np.asarray(self.beam_angles, dtype=float)
        self.ranges = np.asarray(self.ranges, dtype=float)
        if self.beam_angles.shape != self.ranges.shape:
            raise ValueError("beam_angles and ranges must align")
        if np.any(self.ranges < 0) or np.any(self.ranges > self.max_range + 1e-9):
            raise ValueError("ranges must lie in [0, max_range]")


def raycast_batch(grid: OccupancyGrid, xs, zs, angles, max_range: float) -> np.ndarray:
    """Distance to the first occupied cell along each ray, capped at
    max_range.  Rays are sampled every half cell, so reported ranges are
    accurate to one cell; rays leaving the map run to max_range."""
    xs = np.asarray(xs, dtype=float).ravel()
    zs = np.asarray(zs, dtype=float).ravel()
    angles = np.asarray(angles, dtype=float).ravel()
    step = 0.5 / grid.resolution
    n_steps = max(int(math.ceil(max_range / step)), 1)
    dists = np.minimum(np.arange(1, n_steps + 1) * step, max_range)
    px = xs[:, None] + np.cos(angles)[:, None] * dists[None, :]
    pz = zs[:, None] + np.sin(angles)[:, None] * dists[None, :]
    cols = np.floor((px - grid.origin[0]) * grid.resolution).astype(int)
    rows = np.floor((pz - grid.origin[1]) * grid.resolution).astype(int)
    inside = (cols >= 0) & (cols < grid.cols) & (rows >= 0) & (rows < grid.rows)
    hit = np.zeros(inside.shape, dtype=bool)
    hit[inside] = grid.occupied[rows[inside], cols[inside]]
    first = hit.argmax(axis=1)
    any_hit = hit.any(axis=1)
    return np.where(any_hit, dists[first], max_range)


def raycast(grid: OccupancyGrid, x: float, z: float, angle: float, max_range: float) -> float:
    """Single-ray range from a pose in free space along a world angle."""
    if not grid.is_free(x, z):
        raise InvalidPoseError(f"raycast start ({x:g}, {z:g}) is not in free space")
    return float(raycast_batch(grid, [x], [z], [angle], max_range)[0])


def simulate_scan(grid, x, z, yaw, config, rng=None) -> RangeScan:
    """Scan a real device would report at a pose: the filter's own raycast
    plus optional per-beam Gaussian range noise."""
    angles = yaw + config.beam_angles
    ranges = raycast_batch(grid, np.full_like(angles, x), np.full_like(angles, z), angles, config.max_range)
    if rng is not None and config.range_noise_sigma > 0:
        ranges = ranges + rng.normal(0.0, config.range_noise_sigma, size=ranges.shape)
        ranges = np.clip(ranges, 0.0, config.max_range)
    return RangeScan(config.beam_angles, ranges, config.max_range)


# ---------------------------------------------------------------------------
# Monte Carlo localization
# ---------------------------------------------------------------------------


@dataclass
class MclConfig:
    n_particles: int = 300
    odom_sigma: tuple[float, float, float] = (0.02, 0.02, 0.01)  # fwd, lat, yaw
    sensor_tolerance: float = 0.35  # mean abs beam discrepancy accepted, metres
    reinit: str = "random"  # "random" | "modal" | "barycentre"
    random_fraction: float = 0.0  # adaptive variant: removals re-seeded uniformly
    beam_angles: np.ndarray = field(
        default_factory=lambda: np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
    )
    max_range: float = 5.0
    range_noise_sigma: float = 0.03
    convergence_radius: float = 0.5
    convergence_fraction: float = 0.9
    sensor_mode: str = "reject"  # "reject" | "likelihood"
    reinit_jitter: float = 0.15  # metres of position jitter on modal/barycentre

    def __post_init__(self):
        self.beam_angles = np.asarray(self.beam_angles, dtype=float)
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if self.reinit not in ("random", "modal", "barycentre"):
            raise ValueError(f"unknown reinit strategy {self.reinit!r}")
        if self.sensor_mode not in ("reject", "likelihood"):
            raise ValueError(f"unknown sensor mode {self.sensor_mode!r}")
        if not 0.0 <= self.random_fraction <= 1.0:
            raise ValueError("random_fraction must lie in [0, 1]")


@dataclass
class ParticleSet:
    """Particle filter state: positions, headings, weights, rng, and config.

    Updates return new sets sharing the grid and config; the rng advances,
    which is what makes a fixed-seed run reproducible end to end.
    """

    xs: np.ndarray
    zs: np.ndarray
    yaws: np.ndarray
    weights: np.ndarray
    grid: OccupancyGrid
    config: MclConfig
    rng: np.random.Generator

    def __len__(self):
        return self.xs.size


def _uniform_poses(grid: OccupancyGrid, n: int, rng) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    free = grid.free_cells()
    if free.size == 0:
        raise NoFreeSpaceError("grid has no free cells")
    picks = free[rng.integers(0, len(free), size=n)]
    offsets = rng.random(size=(n, 2))
    xs = grid.origin[0] + (picks[:, 1] + offsets[:, 0]) / grid.resolution
    zs = grid.origin[1] + (picks[:, 0] + offsets[:, 1]) / grid.resolution
    yaws = rng.uniform(0.0, 2 * np.pi, size=n)
    return xs, zs, yaws


def init_uniform(grid: OccupancyGrid, config: MclConfig, seed: int) -> ParticleSet:
    """Particles uniform over free space with uniform headings."""
    rng = np.random.default_rng(seed)
    xs, zs, yaws = _uniform_poses(grid, config.n_particles, rng)
    return ParticleSet(xs, zs, yaws, np.ones(config.n_particles), grid, config, rng)


def motion_update(pset: ParticleSet, delta, noise) -> ParticleSet:
    """Move every particle by the odometry delta in its own frame plus
    Gaussian noise; particles that leave free space get weight 0."""
    dx, dz, dyaw = delta
    sx, sz, syaw = noise
    n = len(pset)
    eps = pset.rng.normal(0.0, 1.0, size=(n, 3)) * np.array([sx, sz, syaw])
    fwd = dx + eps[:, 0]
    lat = dz + eps[:, 1]
    c, s = np.cos(pset.yaws), np.sin(pset.yaws)
    xs = pset.xs + c * fwd - s * lat
    zs = pset.zs + s * fwd + c * lat
    yaws = (pset.yaws + dyaw + eps[:, 2]) % (2 * np.pi)
    cols = np.floor((xs - pset.grid.origin[0]) * pset.grid.resolution).astype(int)
    rows = np.floor((zs - pset.grid.origin[1]) * pset.grid.resolution).astype(int)
    inside = (
        (cols >= 0) & (cols < pset.grid.cols) & (rows >= 0) & (rows < pset.grid.rows)
    )
    free = np.zeros(n, dtype=bool)
    free[inside] = ~pset.grid.occupied[rows[inside], cols[inside]]
    weights = np.where(free, pset.weights, 0.0)
    return replace(pset, xs=xs, zs=zs, yaws=yaws, weights=weights)


def _circular_mean(yaws, weights=None) -> float:
    if weights is None:
        weights = np.ones_like(yaws)
    total = weights.sum()
    if total <= 0:
        weights = np.ones_like(yaws)
        total = weights.sum()
    c = float((np.cos(yaws) * weights).sum() / total)
    s = float((np.sin(yaws) * weights).sum() / total)
    return math.atan2(s, c) % (2 * np.pi)


def _scan_discrepancy(pset: ParticleSet, scan: RangeScan) -> np.ndarray:
    n, b = len(pset), scan.beam_angles.size
    angles = (pset.yaws[:, None] + scan.beam_angles[None, :]).ravel()
    xs = np.repeat(pset.xs, b)
    zs = np.repeat(pset.zs, b)
    expected = raycast_batch(pset.grid, xs, zs, angles, scan.max_range).reshape(n, b)
    return np.abs(expected - scan.ranges[None, :]).mean(axis=1)


def sensor_update(pset: ParticleSet, scan: RangeScan, grid: OccupancyGrid) -> ParticleSet:
    """Filter particles against an observed scan.

    reject mode: a particle survives when its mean absolute beam discrepancy
    is within the tolerance; removed particles re-initialize per the
    configured strategy, except that a random_fraction of them always
    re-seed uniformly (the adaptive variant).
    likelihood mode: weights are multiplied by a Gaussian likelihood of the
    discrepancy and systematically resampled when the effective sample size
    halves.
    """
    if scan.beam_angles.size == 0:
        raise ValueError("empty scan")
    config = pset.config
    disc = _scan_discrepancy(pset, scan)

    if config.sensor_mode == "likelihood":
        like = np.exp(-0.5 * (disc / max(config.sensor_tolerance, 1e-9)) ** 2)
        weights = pset.weights * like
        total = weights.sum()
        if total <= 1e-300:
            xs, zs, yaws = _uniform_poses(grid, len(pset), pset.rng)
            return replace(pset, xs=xs, zs=zs, yaws=yaws, weights=np.ones(len(pset)))
        norm = weights / total
        neff = 1.0 / float((norm**2).sum())
        if neff < len(pset) / 2:
            u0 = pset.rng.random()
            positions = (u0 + np.arange(len(pset))) / len(pset)
            idx = np.searchsorted(np.cumsum(norm), positions)
            idx = np.clip(idx, 0, len(pset) - 1)
            return replace(
                pset,
                xs=pset.xs[idx],
                zs=pset.zs[idx],
                yaws=pset.yaws[idx],
                weights=np.ones(len(pset)),
            )
        return replace(pset, weights=weights)

    survives = (disc <= config.sensor_tolerance) & (pset.weights > 0)
    xs, zs, yaws = pset.xs.copy(), pset.zs.copy(), pset.yaws.copy()
    weights = np.ones(len(pset))
    removed = np.nonzero(~survives)[0]
    if removed.size:
        uniform_mask = pset.rng.random(removed.size) < config.random_fraction
        n_uniform = int(uniform_mask.sum())
        if n_uniform:
            ux, uz, uy = _uniform_poses(grid, n_uniform, pset.rng)
            idx = removed[uniform_mask]
            xs[idx], zs[idx], yaws[idx] = ux, uz, uy
        rest = removed[~uniform_mask]
        if rest.size:
            xs, zs, yaws = _reinit_at_strategy(pset, survives, rest, xs, zs, yaws, grid)
    return replace(pset, xs=xs, zs=zs, yaws=yaws, weights=weights)


def _reinit_at_strategy(pset, survives, idx, xs, zs, yaws, grid):
    config = pset.config
    rng = pset.rng
    n = idx.size
    if config.reinit == "random" or not survives.any():
        ux, uz, uy = _uniform_poses(grid, n, rng)
        xs[idx], zs[idx], yaws[idx] = ux, uz, uy
        return xs, zs, yaws

    sx, sz, syaw = pset.xs[survives], pset.zs[survives], pset.yaws[survives]
    if config.reinit == "modal":
        cols = np.floor((sx - grid.origin[0]) * grid.resolution).astype(int)
        rows = np.floor((sz - grid.origin[1]) * grid.resolution).astype(int)
        keys = rows * grid.cols + cols
        values, counts = np.unique(keys, return_counts=True)
        best = values[np.lexsort((values, -counts))][0]  # ties -> lowest (row, col)
        in_mode = keys == best
        cx, cz = grid.cell_centre(int(best // grid.cols), int(best % grid.cols))
        yaw0 = _circular_mean(syaw[in_mode])
    else:  # barycentre
        cx, cz = float(sx.mean()), float(sz.mean())
        yaw0 = _circular_mean(syaw)

    jitter = rng.normal(0.0, config.reinit_jitter, size=(n, 2))
    yjit = rng.normal(0.0, 0.2, size=n)
    nx, nz = cx + jitter[:, 0], cz + jitter[:, 1]
    ny = (yaw0 + yjit) % (2 * np.pi)
    # jittered poses that land in occupied space fall back to random legal poses
    bad = np.array([not grid.is_free(a, b) for a, b in zip(nx, nz)])
    if bad.any():
        ux, uz, uy = _uniform_poses(grid, int(bad.sum()), rng)
        nx[bad], nz[bad], ny[bad] = ux, uz, uy
    xs[idx], zs[idx], yaws[idx] = nx, nz, ny
    return xs, zs, yaws


def convergence(pset: ParticleSet) -> tuple[bool, tuple[float, float, float], float]:
    """(converged, (x, z, yaw) estimate, dispersion).

    Converged when at least convergence_fraction of the particles lie within
    convergence_radius of the weighted barycentre; the estimate is the
    weighted barycentre plus circular-mean yaw, and dispersion the weighted
    mean distance from it.
    """
    w = pset.weights
    total = w.sum()
    if total <= 0:
        w = np.ones(len(pset))
        total = w.sum()
    bx = float((pset.xs * w).sum() / total)
    bz = float((pset.zs * w).sum() / total)
    yaw = _circular_mean(pset.yaws, w)
    dist = np.hypot(pset.xs - bx, pset.zs - bz)
    frac = float((w * (dist <= pset.config.convergence_radius)).sum() / total)
    dispersion = float((w * dist).sum() / total)
    return frac >= pset.config.convergence_fraction, (bx, bz, yaw), dispersion


# ---------------------------------------------------------------------------
# Closed-loop kidnapped-robot simulation
# ---------------------------------------------------------------------------


@dataclass
class SimStep:
    step: int
    true_pose: tuple[float, float, float]
    estimate: tuple[float, float, float]
    converged: bool
    error: float
    near_truth_fraction: float


@dataclass
class SimResult:
    steps: list[SimStep]
    particles: ParticleSet

    def converged_within(self, k: int, fraction: float = None) -> bool:
        """True when some step <= k has near-truth fraction above the
        configured convergence fraction."""
        needed = fraction if fraction is not None else self.particles.config.convergence_fraction
        return any(s.near_truth_fraction >= needed for s in self.steps[: k + 1])


def _wrap_angle(a: float) -> float:
    return (a + math.pi) % (2 * math.pi) - math.pi


def path_from_waypoints(waypoints, step_length: float) -> np.ndarray:
    """True-pose sequence (x, z, yaw) walking the waypoints at a fixed step,
    heading along each segment."""
    waypoints = [np.asarray(w, dtype=float) for w in waypoints]
    if len(waypoints) < 2:
        raise ValueError("need at least two waypoints")
    poses = []
    for a, b in zip(waypoints, waypoints[1:]):
        seg = b - a
        length = float(np.hypot(*seg))
        if length < 1e-12:
            continue
        heading = math.atan2(seg[1], seg[0])
        n = max(int(math.ceil(length / step_length)), 1)
        for i in range(n):
            p = a + seg * (i / n)
            poses.append((float(p[0]), float(p[1]), heading))
    final = waypoints[-1]
    poses.append((float(final[0]), float(final[1]), poses[-1][2] if poses else 0.0))
    return np.asarray(poses, dtype=float)


def simulate_kidnapped(
    grid: OccupancyGrid, true_path, config: MclConfig, seed: int, kidnap_steps=()
) -> SimResult:
    """Closed loop: the true robot walks true_path emitting noisy odometry
    and noisy scans; the filter consumes them (starting from a uniform
    population, i.e. the kidnapped state).  At steps listed in kidnap_steps
    the odometry reports no motion while the truth teleports."""
    true_path = np.asarray(true_path, dtype=float)
    for x, z, _ in true_path:
        if not grid.is_free(float(x), float(z)):
            raise InvalidPoseError(f"true path point ({x:g}, {z:g}) is not free")
    seeds = np.random.SeedSequence(seed).spawn(2)
    pset = init_uniform(grid, config, seeds[0])
    world_rng = np.random.default_rng(seeds[1])
    kidnap_steps = set(int(k) for k in kidnap_steps)

    records = []
    prev = true_path[0]
    for step in range(1, len(true_path)):
        cur = true_path[step]
        if step in kidnap_steps:
            delta = (0.0, 0.0, 0.0)
        else:
            disp = cur[:2] - prev[:2]
            c, s = math.cos(prev[2]), math.sin(prev[2])
            delta = (
                c * disp[0] + s * disp[1],
                -s * disp[0] + c * disp[1],
                _wrap_angle(cur[2] - prev[2]),
            )
        pset = motion_update(pset, delta, config.odom_sigma)
        scan = simulate_scan(grid, cur[0], cur[1], cur[2], config, rng=world_rng)
        pset = sensor_update(pset, scan, grid)
        converged, estimate, _dispersion = convergence(pset)
        err = math.hypot(estimate[0] - cur[0], estimate[1] - cur[1])
        near = np.hypot(pset.xs - cur[0], pset.zs - cur[1]) <= config.convergence_radius
        records.append(
            SimStep(
                step=step,
                true_pose=(float(cur[0]), float(cur[1]), float(cur[2])),
                estimate=estimate,
                converged=converged,
                error=err,
                near_truth_fraction=float(near.mean()),
            )
        )
        prev = cur
    return SimResult(records, pset)


def write_sim_log(path, result: SimResult):
    """Simulation log CSV: step,true_x,true_z,true_yaw,est_x,est_z,est_yaw,converged."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["step", "true_x", "true_z", "true_yaw", "est_x", "est_z", "est_yaw", "converged"]
        )
        for s in result.steps:
            writer.writerow(
                [
                    s.step,
                    *(repr(float(v)) for v in s.true_pose),
                    *(repr(float(v)) for v in s.estimate),
                    int(s.converged),
                ]
            )


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------


def load_scenario(path):
    """Scenario JSON: map path, legs of true-path waypoints (each leg after
    the first is a kidnap teleport), config overrides, step length, seed."""
    scenario_path = Path(path)
    with open(scenario_path) as fh:
        spec = json.load(fh)
    grid = load_map((scenario_path.parent / spec["map"]).resolve())
    step_length = float(spec.get("step_length", 0.15))
    legs = spec.get("legs")
    if legs is None:
        legs = [{"waypoints": spec["waypoints"]}]
    paths = [path_from_waypoints(leg["waypoints"], step_length) for leg in legs]
    kidnap_steps = []
    offset = 0
    for p in paths[:-1]:
        offset += len(p)
        kidnap_steps.append(offset)
    true_path = np.concatenate(paths, axis=0)
    cfg_kwargs = dict(spec.get("config", {}))
    if "beam_angles" in cfg_kwargs:
        cfg_kwargs["beam_angles"] = np.asarray(cfg_kwargs["beam_angles"], dtype=float)
    if "odom_sigma" in cfg_kwargs:
        cfg_kwargs["odom_sigma"] = tuple(cfg_kwargs["odom_sigma"])
    config = MclConfig(**cfg_kwargs)
    seed = int(spec.get("seed", 0))
    return grid, true_path, config, seed, kidnap_steps


# ---------------------------------------------------------------------------
# Dijkstra planning with obstacle inflation
# ---------------------------------------------------------------------------

_NEIGHBOURS = (
    (-1, -1, math.sqrt(2)),
    (-1, 0, 1.0),
    (-1, 1, math.sqrt(2)),
    (0, -1, 1.0),
    (0, 1, 1.0),
    (1, -1, math.sqrt(2)),
    (1, 0, 1.0),
    (1, 1, math.sqrt(2)),
)


def inflate(grid: OccupancyGrid, radius_m: float) -> np.ndarray:
    """Occupancy mask dilated so every cell within radius_m of an obstacle
    is blocked (Euclidean cell-centre distance)."""
    if radius_m <= 0:
        return grid.occupied.copy()
    r_cells = int(math.floor(radius_m * grid.resolution + 1e-9))
    out = grid.occupied.copy()
    for dr in range(-r_cells, r_cells + 1):
        for dc in range(-r_cells, r_cells + 1):
            if dr == 0 and dc == 0:
                continue
            if math.hypot(dr, dc) > radius_m * grid.resolution + 1e-9:
                continue
            shifted = np.zeros_like(grid.occupied)
            src = grid.occupied[
                max(0, -dr) : grid.rows - max(0, dr),
                max(0, -dc) : grid.cols - max(0, dc),
            ]
            shifted[
                max(0, dr) : grid.rows - max(0, -dr),
                max(0, dc) : grid.cols - max(0, -dc),
            ] = src
            out |= shifted
    return out


def dijkstra_plan(
    grid: OccupancyGrid,
    start: tuple[int, int],
    goal: tuple[int, int],
    inflation_radius: float = 0.0,
) -> list[tuple[int, int]]:
    """Minimal-cost 8-connected cell path (straight 1, diagonal sqrt 2)
    avoiding cells within inflation_radius of obstacles.  Ties in the queue
    break on (row, col) so the returned path is deterministic."""
    blocked = inflate(grid, inflation_radius)
    start = (int(start[0]), int(start[1]))
    goal = (int(goal[0]), int(goal[1]))
    for name, cell in (("start", start), ("goal", goal)):
        if not grid.in_bounds(*cell) or blocked[cell]:
            raise InvalidEndpointError(f"{name} cell {cell} is blocked or out of bounds")
    if start == goal:
        return [start]

    dist = {start: 0.0}
    prev = {}
    queue = [(0.0, start[0], start[1])]
    while queue:
        d, r, c = heapq.heappop(queue)
        if (r, c) == goal:
            break
        if d > dist.get((r, c), math.inf):
            continue
        for dr, dc, w in _NEIGHBOURS:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < grid.rows and 0 <= nc < grid.cols) or blocked[nr, nc]:
                continue
            nd = d + w
            if nd < dist.get((nr, nc), math.inf) - 1e-12:
                dist[(nr, nc)] = nd
                prev[(nr, nc)] = (r, c)
                heapq.heappush(queue, (nd, nr, nc))
    if goal not in dist:
        raise NoPathError(f"no path from {start} to {goal}")
    path = [goal]
    while path[-1] != start:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def path_cost(path) -> float:
    """Total cost of an 8-connected cell path (1 per straight, sqrt 2 per diagonal)."""
    total = 0.0
    for (r0, c0), (r1, c1) in zip(path, path[1:]):
        dr, dc = abs(r1 - r0), abs(c1 - c0)
        if dr > 1 or dc > 1 or (dr == 0 and dc == 0):
            raise ValueError("path is not 8-connected")
        total += math.sqrt(2) if dr == 1 and dc == 1 else 1.0
    return total


# ---------------------------------------------------------------------------
# Built-in test worlds
# ---------------------------------------------------------------------------


def make_room_map(resolution: float = 10.0) -> OccupancyGrid:
    """An 8 x 6 m room with an asymmetric interior: an L-shaped wall and two
    pillars, giving range scans a unique signature almost everywhere."""
    rows, cols = int(6 * resolution), int(8 * resolution)
    occ = np.zeros((rows, cols), dtype=bool)
    occ[0, :] = occ[-1, :] = True
    occ[:, 0] = occ[:, -1] = True
    # L-shaped wall: vertical stroke x ~ 3.0 m for z in [0, 2.4], then a foot
    occ[0 : int(2.4 * resolution), int(3.0 * resolution) : int(3.2 * resolution)] = True
    occ[
        int(2.2 * resolution) : int(2.4 * resolution),
        int(3.0 * resolution) : int(4.4 * resolution),
    ] = True
    # pillars
    occ[
        int(4.2 * resolution) : int(4.8 * resolution),
        int(1.2 * resolution) : int(1.8 * resolution),
    ] = True
    occ[
        int(3.6 * resolution) : int(4.4 * resolution),
        int(6.0 * resolution) : int(6.6 * resolution),
    ] = True
    return OccupancyGrid(occ, resolution)


def make_corridor_map(length_m: float = 24.0, width_m: float = 2.0, resolution: float = 10.0) -> OccupancyGrid:
    """A straight corridor along x, translationally symmetric away from its
    ends: interior scans are identical at every x, the structural aliasing
    that defeats a range-only filter."""
    rows, cols = int(width_m * resolution), int(length_m * resolution)
    occ = np.zeros((rows, cols), dtype=bool)
    occ[0, :] = occ[-1, :] = True
    occ[:, 0] = occ[:, -1] = True
    return OccupancyGrid(occ, resolution)
