"""Iterative grid search for the interference-graph threshold."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .allocation import PilotAssignment, copilot_sets, gcpa_allocate
from .graph import build_graph, eta_bounds, eta_matrix
from .metrics import achievable_rate, asymptotic_sinr
from .network import LargeScaleGains


@dataclass
class IgsIteration:
    lo: float
    hi: float
    step: float
    grid: np.ndarray
    scores: np.ndarray
    best: float        # incumbent threshold after this iteration
    best_score: float


@dataclass
class IgsTrace:
    iterations: list[IgsIteration] = field(default_factory=list)
    gamma_th: float = float("nan")
    evaluations: int = 0

    def rows(self):
        for t, it in enumerate(self.iterations, start=1):
            for g, s in zip(it.grid.tolist(), it.scores.tolist()):
                yield t, g, s

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "gamma", "score"])
            for t, g, s in self.rows():
                w.writerow([t, repr(g), repr(s)])


def grid_refine(
    score: Callable[[float], float],
    lo: float,
    hi: float,
    n: int,
    t: int,
) -> IgsTrace:
    """Maximize ``score`` over ``[lo, hi]`` by ``t`` rounds of ``n``-point grids.

    Round 1 samples ``[lo, hi]`` uniformly with step ``(hi - lo) / (n - 1)``.
    Each later round samples ``[best - step/2, best + step/2]`` clipped to
    ``[lo, hi]``. Ties go to the smaller point. The incumbent is carried
    between rounds without re-scoring it, so the best score never drops and
    ``score`` is called exactly ``n * t`` times.
    """
    if n < 2 or t < 1:
        raise ValueError("need n >= 2 and t >= 1")
    trace = IgsTrace()
    a, b = lo, hi
    best, best_score = None, -np.inf
    for _ in range(t):
        grid = np.linspace(a, b, n)
        step = (b - a) / (n - 1)
        scores = np.array([score(float(g)) for g in grid])
        trace.evaluations += n
        i = int(np.argmax(scores))
        cand, cand_score = float(grid[i]), float(scores[i])
        if best is None or cand_score > best_score or (cand_score == best_score and cand < best):
            best, best_score = cand, cand_score
        trace.iterations.append(IgsIteration(a, b, step, grid, scores, best, best_score))
        a, b = max(lo, best - step / 2), min(hi, best + step / 2)
    trace.gamma_th = best
    return trace


def mean_sinr_score(beta: LargeScaleGains, p: PilotAssignment, sinr_cap: float) -> float:
    return float(asymptotic_sinr(beta, copilot_sets(p), sinr_cap).per_user_sinr.mean())


def mean_rate_score(beta: LargeScaleGains, p: PilotAssignment, sinr_cap: float) -> float:
    sinr = asymptotic_sinr(beta, copilot_sets(p), sinr_cap)
    return float(achievable_rate(sinr, 0.0).per_user_rate.mean())


OBJECTIVES = {"sinr": mean_sinr_score, "rate": mean_rate_score}


def igs_search(
    beta: LargeScaleGains,
    n: int = 20,
    t: int = 2,
    objective: str | Callable = "sinr",
    sinr_cap: float = 1e4,
    scale: str = "linear",
) -> tuple[float, IgsTrace]:
    """Pick the GC-PA threshold for one set of large-scale gains.

    Every grid point builds the graph, runs GC-PA and scores the result
    (default: mean linear asymptotic SINR over users). Returns the selected
    threshold and the trace; ``trace.evaluations == n * t``.

    ``scale="log"`` runs the same search on ``log(eta)``. The trace then
    holds log-thresholds; the returned threshold is always in eta units.
    """
    if beta.L < 2:
        raise ValueError("threshold search needs at least two cells")
    score_fn = OBJECTIVES[objective] if isinstance(objective, str) else objective
    etas = eta_matrix(beta)
    lo, hi = eta_bounds(beta, etas)

    def score(gamma: float) -> float:
        p = gcpa_allocate(build_graph(beta, gamma, etas), beta.L, beta.K)
        return score_fn(beta, p, sinr_cap)

    if scale == "linear":
        trace = grid_refine(score, lo, hi, n, t)
        return trace.gamma_th, trace
    if scale == "log":
        trace = grid_refine(lambda x: score(float(np.exp(x))), np.log(lo), np.log(hi), n, t)
        return float(np.clip(np.exp(trace.gamma_th), lo, hi)), trace
    raise ValueError(f"unknown grid scale {scale!r}")


def igs_normalized(
    betas: list[LargeScaleGains],
    n: int = 20,
    t: int = 2,
    objective: str | Callable = "sinr",
    sinr_cap: float = 1e4,
) -> IgsTrace:
    """Grid search over the normalized threshold ``x`` in [0, 1], where drop
    ``d`` uses ``eta_min + x * (eta_max - eta_min)``, scoring the average
    over all drops. Produces a single trace for many drops."""
    score_fn = OBJECTIVES[objective] if isinstance(objective, str) else objective
    prepared = []
    for beta in betas:
        etas = eta_matrix(beta)
        prepared.append((beta, etas, eta_bounds(beta, etas)))

    def score(x: float) -> float:
        total = 0.0
        for beta, etas, (lo, hi) in prepared:
            gamma = hi if x >= 1.0 else lo + x * (hi - lo)
            p = gcpa_allocate(build_graph(beta, gamma, etas), beta.L, beta.K)
            total += score_fn(beta, p, sinr_cap)
        return total / len(prepared)

    return grid_refine(score, 0.0, 1.0, n, t)
