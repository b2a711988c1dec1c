"""Polygon footprints and pairwise earliest-collision detection.

Objects are modeled as convex CCW polygons (oriented rectangles by default,
optionally with subdivided edges).  In the default mode two polygons count
as overlapping when a vertex of either lies inside the other, tested twice
per time instance (EGO over CO and CO over EGO).  That test misses the rare
crossing where rectangles intersect without containing a vertex, so an
exact separating-axis mode is available behind ``collision_mode="exact"``.

Every (EGO trajectory, CO trajectory) pair is independent; detection runs
over a flat pair index in contiguous chunks with deterministic output
placement, so any worker count produces the identical collision matrix.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import SimulationConfig
from .errors import ScenarioError

_TIME_CHUNK = 10
_PAIR_CHUNK = 16384


# ---------------------------------------------------------------------------
# Footprints

def _body_corners(length: float, width: float, subdivisions: int) -> np.ndarray:
    hl, hw = length / 2.0, width / 2.0
    corners = np.array([(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)])
    if subdivisions == 1:
        return corners
    points = []
    for i in range(4):
        a, b = corners[i], corners[(i + 1) % 4]
        for k in range(subdivisions):
            points.append(a + (b - a) * (k / subdivisions))
    return np.array(points)


def footprint(x, y, yaw, length: float, width: float, subdivisions: int = 1) -> np.ndarray:
    """Oriented rectangle (CCW) centered at the CoG, rotated by the body yaw.

    Sideslip does not rotate the footprint; the polygon follows the body.
    ``subdivisions`` splits each edge to add resolution.
    """
    return footprint_batch(np.array([[x, y, yaw]]), length, width, subdivisions)[0]


def footprint_batch(poses: np.ndarray, length: float, width: float,
                    subdivisions: int = 1) -> np.ndarray:
    """Footprints for pose rows (..., >=3 columns x, y, yaw) -> (..., V, 2)."""
    corners = _body_corners(length, width, subdivisions)
    x = poses[..., 0, None]
    y = poses[..., 1, None]
    c = np.cos(poses[..., 2, None])
    s = np.sin(poses[..., 2, None])
    bx = corners[:, 0]
    by = corners[:, 1]
    out = np.empty(poses.shape[:-1] + corners.shape)
    out[..., 0] = x + c * bx - s * by
    out[..., 1] = y + s * bx + c * by
    return out


# ---------------------------------------------------------------------------
# Overlap kernels (flat pair lists)

def _any_vertex_inside(polys: np.ndarray, points: np.ndarray) -> np.ndarray:
    """For each row: does any point lie inside the convex CCW polygon?

    Half-plane test; points exactly on the boundary count as inside.
    polys (N, V, 2), points (N, P, 2) -> (N,) bool.
    """
    v1 = polys
    v2 = np.roll(polys, -1, axis=1)
    ex = (v2[..., 0] - v1[..., 0])[:, :, None]
    ey = (v2[..., 1] - v1[..., 1])[:, :, None]
    px = points[..., 0][:, None, :]
    py = points[..., 1][:, None, :]
    cross = ex * (py - v1[..., 1][:, :, None]) - ey * (px - v1[..., 0][:, :, None])
    inside = np.all(cross >= 0.0, axis=1)
    return np.any(inside, axis=1)


def _containment_overlap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Double vertex-containment test (checked both ways), per pair row."""
    return _any_vertex_inside(a, b) | _any_vertex_inside(b, a)


def _sat_overlap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact separating-axis test for convex polygons, per pair row.

    Touching boundaries count as overlap, consistent with the boundary
    convention of the containment test.
    """
    overlap = np.ones(a.shape[0], dtype=bool)
    for poly in (a, b):
        v1 = poly
        v2 = np.roll(poly, -1, axis=1)
        ax = -(v2[..., 1] - v1[..., 1])
        ay = v2[..., 0] - v1[..., 0]
        proj_a = ax[:, :, None] * a[..., 0][:, None, :] + ay[:, :, None] * a[..., 1][:, None, :]
        proj_b = ax[:, :, None] * b[..., 0][:, None, :] + ay[:, :, None] * b[..., 1][:, None, :]
        sep = ((proj_a.max(axis=2) < proj_b.min(axis=2))
               | (proj_b.max(axis=2) < proj_a.min(axis=2)))
        overlap &= ~np.any(sep, axis=1)
    return overlap


def polygons_overlap(a: np.ndarray, b: np.ndarray, mode: str = "paper") -> bool:
    """Overlap of two convex CCW polygons (V, 2)."""
    a = np.asarray(a, dtype=float)[None]
    b = np.asarray(b, dtype=float)[None]
    if mode == "paper":
        return bool(_containment_overlap(a, b)[0])
    if mode == "exact":
        return bool(_sat_overlap(a, b)[0])
    raise ScenarioError(f"unknown collision mode {mode!r}")


# ---------------------------------------------------------------------------
# Earliest collision over trajectory pairs

@dataclass(frozen=True)
class CollisionMatrix:
    """Earliest colliding step per (EGO trajectory, CO trajectory) pair.

    steps[i, j] is the 0-based time-step index of the first overlap, or -1.
    column_objects maps each CO column to its object id.
    """

    steps: np.ndarray
    column_objects: tuple[str, ...]
    step_count: int

    @property
    def pair_count(self) -> int:
        return self.steps.size

    def colliding_pairs(self) -> np.ndarray:
        """(k, 3) array of (ego index, column, step), in pair-index order."""
        i, j = np.nonzero(self.steps >= 0)
        return np.column_stack([i, j, self.steps[i, j]])


def _overlap_rows(a: np.ndarray, b: np.ndarray, mode: str) -> np.ndarray:
    return _containment_overlap(a, b) if mode == "paper" else _sat_overlap(a, b)


def _overlap_block(ego_verts, co_verts, ego_centers, co_centers, reach,
                   ii, jj, t0, t1, mode):
    """Overlap booleans for the given pairs over steps [t0, t1)."""
    delta = ego_centers[ii, t0:t1] - co_centers[jj, t0:t1]
    near = (delta[..., 0] ** 2 + delta[..., 1] ** 2) <= reach[jj][:, None]
    overlap = np.zeros(near.shape, dtype=bool)
    if near.any():
        sel_pair, sel_t = np.nonzero(near)
        a = ego_verts[ii[sel_pair], t0 + sel_t]
        b = co_verts[jj[sel_pair], t0 + sel_t]
        overlap[sel_pair, sel_t] = _overlap_rows(a, b, mode)
    return overlap


def _scan_pair_chunk(ego_verts, co_verts, ego_centers, co_centers, reach,
                     i_arr, j_arr, mode, early_exit=True):
    steps = ego_verts.shape[1]
    n_pairs = i_arr.shape[0]
    result = np.full(n_pairs, -1, dtype=np.int32)
    if early_exit:
        active = np.arange(n_pairs)
        for t0 in range(0, steps, _TIME_CHUNK):
            if active.size == 0:
                break
            t1 = min(t0 + _TIME_CHUNK, steps)
            overlap = _overlap_block(ego_verts, co_verts, ego_centers, co_centers,
                                     reach, i_arr[active], j_arr[active], t0, t1, mode)
            hit = overlap.any(axis=1)
            first = overlap.argmax(axis=1)
            result[active[hit]] = t0 + first[hit]
            active = active[~hit]
    else:
        # Reference variant: evaluate every step, then take the first index.
        overlap_all = np.zeros((n_pairs, steps), dtype=bool)
        for t0 in range(0, steps, _TIME_CHUNK):
            t1 = min(t0 + _TIME_CHUNK, steps)
            overlap_all[:, t0:t1] = _overlap_block(
                ego_verts, co_verts, ego_centers, co_centers,
                reach, i_arr, j_arr, t0, t1, mode)
        hit = overlap_all.any(axis=1)
        result[hit] = overlap_all.argmax(axis=1)[hit].astype(np.int32)
    return result


def detect_collisions(ego_poses: np.ndarray, ego_dims: tuple[float, float],
                      co_poses_list: list[np.ndarray],
                      co_dims_list: list[tuple[float, float]],
                      co_ids: list[str],
                      config: SimulationConfig,
                      workers: int = 1,
                      early_exit: bool = True) -> CollisionMatrix:
    """Earliest-overlap scan over every (EGO, CO) trajectory combination.

    ego_poses (r_EGO, T, 5); each CO contributes a block of columns in object
    order.  CO-CO combinations are never checked.  Raises on step-count
    mismatch between trajectory sets.
    """
    steps = ego_poses.shape[1]
    for poses in co_poses_list:
        if poses.shape[1] != steps:
            raise ScenarioError("trajectory sets differ in step count")

    subdivisions = config.footprint_subdivisions
    ego_verts = footprint_batch(ego_poses, *ego_dims, subdivisions)
    ego_centers = ego_poses[:, :, :2]
    ego_radius = math.hypot(*ego_dims) / 2.0

    if not co_poses_list:
        return CollisionMatrix(steps=np.empty((ego_poses.shape[0], 0), dtype=np.int32),
                               column_objects=(), step_count=steps)

    co_verts = np.concatenate(
        [footprint_batch(poses, *dims, subdivisions)
         for poses, dims in zip(co_poses_list, co_dims_list)], axis=0)
    co_centers = np.concatenate([poses[:, :, :2] for poses in co_poses_list], axis=0)
    radii = np.concatenate(
        [np.full(poses.shape[0], math.hypot(*dims) / 2.0)
         for poses, dims in zip(co_poses_list, co_dims_list)])
    column_objects = tuple(
        obj_id for obj_id, poses in zip(co_ids, co_poses_list)
        for _ in range(poses.shape[0]))
    # Bounding-circle cull threshold per column: exact for both modes since
    # the polygons are contained in their circles.
    reach = (ego_radius + radii) ** 2

    r_ego = ego_poses.shape[0]
    r_co = co_verts.shape[0]
    total = r_ego * r_co
    matrix = np.full(total, -1, dtype=np.int32)

    chunks = [(lo, min(lo + _PAIR_CHUNK, total)) for lo in range(0, total, _PAIR_CHUNK)]

    def run(chunk):
        lo, hi = chunk
        pair_idx = np.arange(lo, hi)
        i_arr = pair_idx // r_co
        j_arr = pair_idx % r_co
        return lo, hi, _scan_pair_chunk(ego_verts, co_verts, ego_centers, co_centers,
                                        reach, i_arr, j_arr, config.collision_mode,
                                        early_exit)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(chunk) for chunk in chunks]
    for lo, hi, part in results:
        matrix[lo:hi] = part

    return CollisionMatrix(steps=matrix.reshape(r_ego, r_co),
                           column_objects=column_objects, step_count=steps)


# ---------------------------------------------------------------------------
# Workload counting

def count_pair_combinations(co_count: int, config: SimulationConfig) -> int:
    """r_col: trajectory combinations checked for a nominal full road."""
    return (co_count * config.co_path_count * config.ego_path_count
            * config.accel_profile_count ** 2)


def count_pose_combinations(co_count: int, config: SimulationConfig) -> int:
    """Pose pairs evaluated over the horizon: r_col * (T / tau)."""
    return count_pair_combinations(co_count, config) * config.steps


def undetectable_relative_speed(extent_a: float, extent_b: float, tau: float) -> float:
    """Relative speed needed to pass through undetected by the step scan.

    Two objects overlap along their motion while their centers are closer
    than (extent_a + extent_b)/2, a window of length extent_a + extent_b.
    Sampling every tau seconds cannot miss it unless the relative motion
    crosses the whole window within one step.
    """
    return (extent_a + extent_b) / tau
