"""Per-split MAC rate polytopes and the two-user capacity region boundary.

For each feasible split the cognitive users see a plain Gaussian MAC, so the
achievable rates form the usual polymatroid (a pentagon for two users).  The
overall region is the convex hull of the union of these polytopes over the
feasible set, which for two users is a 1-D curve swept by coordinate solving.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import (
    ChannelInstance,
    PowerSplit,
    UndefinedCoordinateError,
    relative_residual,
    solve_feasible_coordinate,
)

MAX_POLYTOPE_USERS = 10

SAMPLE_RESIDUAL_TOL = 1e-9


class UnsupportedSizeError(ValueError):
    """Operation is only defined for a bounded number of users."""


@dataclass(frozen=True)
class RatePolytope:
    """Rate bounds c_T for every nonempty user subset T, at a fixed split."""

    bounds: dict[frozenset, float]
    gamma: PowerSplit

    def bound(self, subset) -> float:
        return self.bounds[frozenset(subset)]


@dataclass(frozen=True)
class RegionBoundary:
    """Counterclockwise hull boundary of the two-user region, in bits."""

    points: list[tuple[float, float]]
    samples_used: int
    gamma_grid_step: float

    def max_sum_rate(self) -> float:
        return max(r1 + r2 for r1, r2 in self.points)


def polytope_for_gamma(ch: ChannelInstance, split: PowerSplit) -> RatePolytope:
    """Rate bound for every nonempty subset of users at this split."""
    k = ch.num_users
    if k > MAX_POLYTOPE_USERS:
        raise UnsupportedSizeError(
            f"subset enumeration capped at {MAX_POLYTOPE_USERS} users, got {k}"
        )
    effective = (1.0 - split.gamma**2) * ch.h**2 * ch.p
    bounds = {}
    for r in range(1, k + 1):
        for subset in itertools.combinations(range(k), r):
            snr = float(np.sum(effective[list(subset)])) / ch.sigma_c2
            bounds[frozenset(subset)] = 0.5 * math.log2(1.0 + snr)
    return RatePolytope(bounds=bounds, gamma=split)


def pentagon_vertices(poly: RatePolytope) -> list[tuple[float, float]]:
    """Vertices of the two-user rate pentagon, duplicates collapsed."""
    k = len(poly.gamma)
    if k != 2:
        raise UnsupportedSizeError(f"pentagon defined for 2 users, got {k}")
    c1 = poly.bound({0})
    c2 = poly.bound({1})
    c12 = poly.bound({0, 1})
    raw = [
        (0.0, 0.0),
        (c1, 0.0),
        (c1, c12 - c1),
        (c12 - c2, c2),
        (0.0, c2),
    ]
    vertices: list[tuple[float, float]] = []
    for pt in raw:
        if not vertices or pt != vertices[-1]:
            vertices.append(pt)
    if len(vertices) > 1 and vertices[-1] == vertices[0]:
        vertices.pop()
    return vertices


def _grid(step: float) -> np.ndarray:
    n = int(math.ceil(1.0 / step))
    values = np.minimum(np.arange(n + 1) * step, 1.0)
    values[-1] = 1.0
    return values


def sample_feasible_set(ch: ChannelInstance, grid_step: float) -> list[PowerSplit]:
    """Sample splits satisfying the primary-rate equality.

    Sweeps each coordinate direction: the swept coordinates run over the
    grid and the remaining one is solved from the feasibility quadratic.
    With no interference path at all, every split is feasible and the full
    grid is returned.
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    k = ch.num_users
    if k > 3:
        raise UnsupportedSizeError(f"feasible-set sampling supports up to 3 users, got {k}")
    grid = _grid(grid_step)
    if not np.any(ch.g > 0):
        return [
            PowerSplit(np.array(combo))
            for combo in itertools.product(grid, repeat=k)
        ]
    found: dict[tuple, PowerSplit] = {}
    for solved in range(k):
        if ch.g[solved] <= 0:
            continue
        others = [i for i in range(k) if i != solved]
        for combo in itertools.product(grid, repeat=len(others)):
            try:
                root = solve_feasible_coordinate(ch, np.array(combo), solved)
            except UndefinedCoordinateError:  # pragma: no cover - guarded above
                continue
            if root is None:
                continue
            gamma = np.empty(k)
            gamma[solved] = root
            for idx, value in zip(others, combo):
                gamma[idx] = value
            split = PowerSplit(gamma)
            if relative_residual(ch, split) <= SAMPLE_RESIDUAL_TOL:
                found.setdefault(tuple(np.round(gamma, 12)), split)
    if not found:
        warnings.warn(
            "no feasible split found despite nonzero interference",
            RuntimeWarning,
        )
    return [found[key] for key in sorted(found)]


def convex_hull(points) -> list[tuple[float, float]]:
    """Monotone-chain 2-D convex hull, counterclockwise, collinear dropped."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def hull_contains(
    hull: list[tuple[float, float]], point: tuple[float, float], tol: float = 1e-12
) -> bool:
    """Point-in-convex-polygon test against a counterclockwise hull."""
    if len(hull) == 1:
        return abs(point[0] - hull[0][0]) <= tol and abs(point[1] - hull[0][1]) <= tol
    if len(hull) == 2:
        (x1, y1), (x2, y2) = hull
        px, py = point
        cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
        if abs(cross) > tol:
            return False
        dot = (px - x1) * (x2 - x1) + (py - y1) * (y2 - y1)
        return -tol <= dot <= (x2 - x1) ** 2 + (y2 - y1) ** 2 + tol
    for i in range(len(hull)):
        x1, y1 = hull[i]
        x2, y2 = hull[(i + 1) % len(hull)]
        if (x2 - x1) * (point[1] - y1) - (y2 - y1) * (point[0] - x1) < -tol:
            return False
    return True


def region_boundary(ch: ChannelInstance, grid_step: float) -> RegionBoundary:
    """Hull boundary of the union of rate pentagons over the feasible set."""
    if ch.num_users != 2:
        raise UnsupportedSizeError(
            f"region boundary defined for 2 users, got {ch.num_users}"
        )
    samples = sample_feasible_set(ch, grid_step)
    vertices: list[tuple[float, float]] = [(0.0, 0.0)]
    for split in samples:
        vertices.extend(pentagon_vertices(polytope_for_gamma(ch, split)))
    hull = convex_hull(vertices)
    return RegionBoundary(points=hull, samples_used=len(samples), gamma_grid_step=grid_step)
