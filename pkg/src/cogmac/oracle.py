"""Independent validation: brute-force grid search, KKT checks, closed forms.

The grid search never reuses the sweep solver's machinery: each candidate is
projected onto the equality constraint through the per-coordinate quadratic,
so every evaluated point is feasible by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    ChannelInstance,
    PowerSplit,
    UndefinedCoordinateError,
    baseline_primary_rate,
    feasibility_residual,
    primary_rate,
    relative_residual,
    residual_scale,
    sum_rate,
)
from .region import UnsupportedSizeError, _grid
from .solver import SolverResult, SolverStatus

GRID_RESIDUAL_TOL = 1e-9

MAX_GRID_USERS = 3


@dataclass(frozen=True)
class OracleResult:
    best_gamma: PowerSplit
    best_sum_rate: float
    grid_step: float
    points_evaluated: int


@dataclass(frozen=True)
class KktReport:
    """Stationarity / feasibility / bound diagnostics for a solver output."""

    stationarity: dict[int, float]  # scaled derivative residual per user
    interior_users: tuple[int, ...]
    saturated_users: tuple[int, ...]
    feasibility_rel: float
    bounds_ok: bool
    stationarity_ok: bool
    feasibility_ok: bool
    passed: bool


def _projected_candidates(
    ch: ChannelInstance, solved: int, rest: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized feasibility projection onto coordinate `solved`.

    rest: (n, K-1) array of the other coordinates.  Returns (mask, root)
    where mask flags rows whose projected coordinate lies in [0, 1].
    Same quadratic as channel.solve_feasible_coordinate.
    """
    others = np.delete(np.arange(ch.num_users), solved)
    g_o, p_o = ch.g[others], ch.p[others]
    t = ch.h_p**2 * ch.p_p / ch.sigma_p2
    b = ch.primary_amplitude + rest @ (g_o * np.sqrt(p_o))
    a = t * (
        ch.sigma_p2
        + (1.0 - rest**2) @ (g_o**2 * p_o)
        + ch.g[solved] ** 2 * ch.p[solved]
    )
    x = ch.g[solved] * math.sqrt(ch.p[solved])
    disc = a * (1.0 + t) - t * b * b
    ok = disc >= 0.0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    root_plus = (-b + sq) / (x * (1.0 + t))
    root_minus = (-b - sq) / (x * (1.0 + t))
    # the "-" branch is never interior for b >= 0, but keep it for safety
    root = np.where(
        (root_plus >= -1e-12) & (root_plus <= 1.0 + 1e-12),
        root_plus,
        root_minus,
    )
    mask = ok & (root >= -1e-12) & (root <= 1.0 + 1e-12)
    return mask, np.clip(root, 0.0, 1.0)


def grid_search(ch: ChannelInstance, grid_step: float) -> OracleResult:
    """Exhaustive feasible search for the maximum sum rate.

    For each coordinate with g_k > 0 the other K-1 coordinates run over the
    grid and that coordinate is solved from the equality constraint.  Scan
    order is deterministic; ties break toward the earliest candidate.
    """
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    k = ch.num_users
    if k > MAX_GRID_USERS:
        raise UnsupportedSizeError(f"grid search supports up to {MAX_GRID_USERS} users, got {k}")

    if not np.any(ch.g > 0):
        gamma0 = PowerSplit.zeros(k)
        return OracleResult(
            best_gamma=gamma0,
            best_sum_rate=sum_rate(ch, gamma0),
            grid_step=grid_step,
            points_evaluated=1,
        )

    grid = _grid(grid_step)
    scale = residual_scale(ch)
    best_rate = -math.inf
    best_gamma: np.ndarray | None = None
    evaluated = 0
    h2p = ch.h**2 * ch.p
    for solved in range(k):
        if ch.g[solved] <= 0:
            continue
        others = np.delete(np.arange(k), solved)
        if others.size:
            mesh = np.meshgrid(*([grid] * others.size), indexing="ij")
            rest = np.stack([m.ravel() for m in mesh], axis=1)
        else:
            rest = np.zeros((1, 0))
        mask, root = _projected_candidates(ch, solved, rest)
        if not mask.any():
            continue
        rest_ok = rest[mask]
        root_ok = root[mask]
        gammas = np.empty((rest_ok.shape[0], k))
        gammas[:, others] = rest_ok
        gammas[:, solved] = root_ok
        # exact-feasibility recheck (relative residual)
        signal = ch.primary_amplitude + gammas @ (ch.g * np.sqrt(ch.p))
        noise = ch.sigma_p2 + (1.0 - gammas**2) @ (ch.g**2 * ch.p)
        phi = ch.sigma_p2 * signal**2 - ch.h_p**2 * ch.p_p * noise
        feasible = (
            np.abs(phi) <= GRID_RESIDUAL_TOL * scale
            if scale > 0
            else np.abs(phi) == 0.0
        )
        gammas = gammas[feasible]
        if gammas.shape[0] == 0:
            continue
        evaluated += gammas.shape[0]
        rates = (1.0 - gammas**2) @ h2p
        idx = int(np.argmax(rates))  # first max: lexicographically smallest
        candidate_rate = 0.5 * math.log2(1.0 + rates[idx] / ch.sigma_c2)
        if candidate_rate > best_rate:
            best_rate = candidate_rate
            best_gamma = gammas[idx]
    if best_gamma is None:
        raise RuntimeError("grid search found no feasible point")
    split = PowerSplit(best_gamma)
    return OracleResult(
        best_gamma=split,
        best_sum_rate=sum_rate(ch, split),
        grid_step=grid_step,
        points_evaluated=evaluated,
    )


def kkt_check(
    ch: ChannelInstance, result: SolverResult, tol: float = 1e-6
) -> KktReport:
    """Check the stationarity system, feasibility, and box bounds at a solution.

    Interior users (gamma_k < 1, g_k > 0) must have a vanishing scaled
    derivative; saturated users a derivative pushing toward the bound;
    users with g_k = 0 must sit at 0.
    """
    if result.status is SolverStatus.DEGENERATE_NO_INTERFERENCE:
        gamma = result.gamma_star.gamma
        ok = bool(np.all(gamma == 0.0))
        return KktReport(
            stationarity={},
            interior_users=tuple(range(ch.num_users)),
            saturated_users=(),
            feasibility_rel=relative_residual(ch, result.gamma_star),
            bounds_ok=ok,
            stationarity_ok=ok,
            feasibility_ok=True,
            passed=ok,
        )

    gamma = result.gamma_star.gamma
    lam = result.lambda_star
    s_p = ch.h_p**2 * ch.p_p
    x = ch.primary_amplitude + float(np.sum(ch.g * gamma * np.sqrt(ch.p)))
    sat_cut = 1.0 - 1e-9
    interior = tuple(k for k in range(ch.num_users) if gamma[k] < sat_cut)
    saturated = tuple(k for k in range(ch.num_users) if gamma[k] >= sat_cut)

    stationarity: dict[int, float] = {}
    stationarity_ok = True
    for k in range(ch.num_users):
        term_obj = -2.0 * ch.h[k] ** 2 * ch.p[k] * gamma[k]
        term_x = 2.0 * lam * ch.sigma_p2 * x * ch.g[k] * math.sqrt(ch.p[k])
        term_quad = 2.0 * lam * s_p * ch.g[k] ** 2 * ch.p[k] * gamma[k]
        deriv = term_obj + term_x + term_quad
        scale_k = max(abs(term_obj), abs(term_x), abs(term_quad), 2.0 * ch.h[k] ** 2 * ch.p[k])
        if scale_k == 0.0:
            scale_k = 1.0
        scaled = deriv / scale_k
        stationarity[k] = scaled
        if ch.g[k] <= 0:
            if abs(gamma[k]) > tol:
                stationarity_ok = False
        elif k in interior:
            if abs(scaled) > tol:
                stationarity_ok = False
        else:
            if scaled < -tol:
                stationarity_ok = False

    feas_rel = relative_residual(ch, result.gamma_star)
    feasibility_ok = feas_rel <= tol
    bounds_ok = bool(np.all(gamma >= 0.0) and np.all(gamma <= 1.0))
    return KktReport(
        stationarity=stationarity,
        interior_users=interior,
        saturated_users=saturated,
        feasibility_rel=feas_rel,
        bounds_ok=bounds_ok,
        stationarity_ok=stationarity_ok,
        feasibility_ok=feasibility_ok,
        passed=stationarity_ok and feasibility_ok and bounds_ok,
    )


def single_user_closed_form(ch: ChannelInstance) -> float:
    """Exact single-user cooperation ratio from the feasibility quadratic."""
    if ch.num_users != 1:
        raise UnsupportedSizeError(f"closed form defined for 1 user, got {ch.num_users}")
    if ch.g[0] <= 0:
        raise UndefinedCoordinateError("g[0] = 0: no interference to compensate")
    t = ch.h_p**2 * ch.p_p / ch.sigma_p2
    amp = ch.primary_amplitude
    gp = ch.g[0] * math.sqrt(ch.p[0])
    return (-amp + math.sqrt(ch.h_p**2 * ch.p_p + t * (1.0 + t) * gp**2)) / (
        gp * (1.0 + t)
    )


def random_instance(rng: np.random.Generator, num_users: int) -> ChannelInstance:
    """Instance generator for randomized suites.

    Gains uniform in [0.1, 2], powers uniform in [0.5, 10], noise variances
    uniform in [0.5, 2].
    """
    return ChannelInstance(
        h=rng.uniform(0.1, 2.0, num_users),
        g=rng.uniform(0.1, 2.0, num_users),
        p=rng.uniform(0.5, 10.0, num_users),
        h_p=rng.uniform(0.1, 2.0),
        p_p=rng.uniform(0.5, 10.0),
        sigma_p2=rng.uniform(0.5, 2.0),
        sigma_c2=rng.uniform(0.5, 2.0),
        f=rng.uniform(0.1, 2.0),
    )


def instance_suite(seed: int, count: int, sizes=(1, 2, 3)) -> list[ChannelInstance]:
    """Deterministic suite of random instances cycling through the sizes."""
    rng = np.random.default_rng(seed)
    return [random_instance(rng, sizes[i % len(sizes)]) for i in range(count)]
