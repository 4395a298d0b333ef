"""Pilot allocators: greedy GC-PA, random, unrestricted greedy coloring, exhaustive.

Pilots are 1-based integers. User ``(j, k)`` is vertex ``j*K + k``.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import InterferenceGraph, same_cell_mask
from .network import LargeScaleGains


@dataclass(frozen=True)
class PilotAssignment:
    p: np.ndarray          # (L*K,) 1-based pilot index per user
    palette_size: int
    L: int
    K: int
    restricted: bool = True

    @property
    def by_cell(self) -> np.ndarray:
        return self.p.reshape(self.L, self.K)

    def is_per_cell_permutation(self) -> bool:
        target = np.arange(1, self.K + 1)
        return bool(np.all(np.sort(self.by_cell, axis=1) == target))

    def is_proper(self, graph: InterferenceGraph) -> bool:
        same = self.p[:, None] == self.p[None, :]
        return not np.any(same & graph.adjacency)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["cell", "user", "pilot"])
            for u, pilot in enumerate(self.p.tolist()):
                w.writerow([u // self.K + 1, u % self.K + 1, pilot])

    @classmethod
    def read_csv(cls, path, restricted: bool = True) -> "PilotAssignment":
        with open(path, newline="") as fh:
            rows = [(int(r["cell"]), int(r["user"]), int(r["pilot"])) for r in csv.DictReader(fh)]
        L = max(r[0] for r in rows)
        K = max(r[1] for r in rows)
        p = np.zeros(L * K, dtype=int)
        for cell, user, pilot in rows:
            p[(cell - 1) * K + user - 1] = pilot
        return cls(p=p, palette_size=int(p.max()), L=L, K=K, restricted=restricted)


@dataclass(frozen=True)
class CoPilotSets:
    """``mask[u, v]`` is True when ``v != u`` uses the same pilot as ``u``."""

    mask: np.ndarray

    def of(self, u: int) -> set[int]:
        return set(np.flatnonzero(self.mask[u]).tolist())


def copilot_sets(assignment: PilotAssignment) -> CoPilotSets:
    p = assignment.p
    mask = p[:, None] == p[None, :]
    np.fill_diagonal(mask, False)
    return CoPilotSets(mask=mask)


def _check_graph(graph: InterferenceGraph, L: int, K: int) -> None:
    n = L * K
    adj = graph.adjacency
    if adj.shape != (n, n):
        raise ValueError(f"graph has {adj.shape[0]} vertices, expected L*K = {n}")
    if not np.all(adj[same_cell_mask(L, K)]):
        raise ValueError("graph is missing intra-cell edges")
    if np.any(np.diag(adj)):
        raise ValueError("graph has self-loops")
    if not np.array_equal(adj, adj.T):
        raise ValueError("graph adjacency is not symmetric")


def selection_order(graph: InterferenceGraph) -> np.ndarray:
    """Users by decreasing inter-cell degree; ties go to the lower index."""
    degree = graph.inter_cell().sum(axis=1)
    return np.lexsort((np.arange(len(degree)), -degree))


def gcpa_allocate(graph: InterferenceGraph, L: int, K: int) -> PilotAssignment:
    """Greedy restricted-palette allocation over the interference graph.

    Users are visited by decreasing number of inter-cell neighbors. Each one
    takes, among the pilots still free in its cell, the pilot held by the
    fewest of its already-served neighbors (lowest index on ties).
    """
    _check_graph(graph, L, K)
    inter = graph.inter_cell()
    p = np.zeros(L * K, dtype=int)
    for u in selection_order(graph):
        cell = u // K
        free = np.ones(K + 1, dtype=bool)
        free[p[cell * K:(cell + 1) * K]] = False
        free[0] = False  # 0 marks "unassigned"
        counts = np.bincount(p[inter[u]], minlength=K + 1)
        counts = np.where(free, counts, np.iinfo(np.int64).max)
        p[u] = int(np.argmin(counts))
    return PilotAssignment(p=p, palette_size=K, L=L, K=K)


def random_allocate(L: int, K: int, rng: np.random.Generator) -> PilotAssignment:
    """Independent uniform permutation of the K pilots in every cell."""
    p = np.concatenate([rng.permutation(K) + 1 for _ in range(L)])
    return PilotAssignment(p=p, palette_size=K, L=L, K=K)


def gca_allocate(graph: InterferenceGraph) -> PilotAssignment:
    """Unrestricted greedy proper coloring.

    Same visiting order as :func:`gcpa_allocate`; each user gets the
    smallest color not used by an already-colored neighbor. The palette grows
    as needed, so the result uses ``C >= K`` pilots.
    """
    L, K = graph.L, graph.K
    _check_graph(graph, L, K)
    adj = graph.adjacency
    p = np.zeros(L * K, dtype=int)
    for u in selection_order(graph):
        taken = set(p[adj[u]].tolist())
        c = 1
        while c in taken:
            c += 1
        p[u] = c
    return PilotAssignment(p=p, palette_size=int(p.max()), L=L, K=K, restricted=False)


# ---------------------------------------------------------------------------
# exhaustive search


class BudgetExceeded(RuntimeError):
    pass


DEFAULT_BUDGET = 10**6


def n_candidates(L: int, K: int) -> int:
    """Size of the search space with cell 0 pinned: ``(K!)^(L-1)``."""
    return math.factorial(K) ** (L - 1)


def _objective_values(inv: np.ndarray, b2: np.ndarray, K: int, objective: str, cap: float) -> np.ndarray:
    """Objective for a batch of candidates.

    ``inv[n, c, lam]`` is the in-cell index of the user holding pilot ``lam``
    in cell ``c``. Each pilot is held by exactly one user per cell, so user
    in cell ``j`` sees interference from the holders in every other cell.
    """
    n_batch, L, _ = inv.shape
    users = inv + (np.arange(L) * K)[None, :, None]                 # (n, c, lam)
    # power[n, c, j, lam] = beta^2 of the holder in cell c, at BS j
    power = b2[users].transpose(0, 1, 3, 2)                           # (n, c, j, lam)
    total = power.sum(axis=1)                                          # (n, j, lam)
    idx = np.arange(L)
    signal = power[:, idx, idx, :]                                     # (n, j, lam)
    interf = total - signal
    with np.errstate(divide="ignore"):
        sinr = np.where(interf > 0, signal / interf, cap)
    sinr = np.minimum(sinr, cap)
    if objective == "rate":
        vals = np.log2(1.0 + sinr)
    elif objective == "sinr":
        vals = sinr
    else:
        raise ValueError(f"unknown objective {objective!r}")
    return vals.reshape(n_batch, -1).mean(axis=1)


@dataclass(frozen=True)
class SearchResult:
    assignment: PilotAssignment
    value: float
    evaluated: int


def exhaustive_search(
    beta: LargeScaleGains,
    objective: str = "rate",
    sinr_cap: float = 1e4,
    budget: int = DEFAULT_BUDGET,
    chunk: int = 1 << 14,
    pin_first: bool = True,
) -> SearchResult:
    """Enumerate per-cell permutations and keep the best under ``objective``.

    ``objective`` is ``"rate"`` (mean log2(1 + SINR)) or ``"sinr"`` (mean
    linear SINR), both on the capped asymptotic SINR. With ``pin_first`` the
    first cell keeps the identity permutation, which loses nothing since a
    global relabeling of pilots does not change any SINR. Enumeration order
    matches ``itertools.product`` over lexicographic permutations; ties keep
    the first candidate.
    """
    L, K = beta.L, beta.K
    free_cells = L - 1 if pin_first else L
    total = math.factorial(K) ** free_cells
    if total > budget:
        raise BudgetExceeded(f"{total} candidates exceed the enumeration budget {budget}")
    perms = np.array(list(itertools.permutations(range(K))), dtype=np.intp)
    # inverse permutations: holder of pilot lam -> in-cell user index
    inv_perms = np.argsort(perms, axis=1)
    b2 = beta.beta ** 2
    radix = (len(perms),) * free_cells
    best_val, best_idx, evaluated = -np.inf, 0, 0
    for start in range(0, total, chunk):
        ids = np.arange(start, min(start + chunk, total))
        digits = np.unravel_index(ids, radix) if free_cells else ()
        inv = np.empty((len(ids), L, K), dtype=np.intp)
        if pin_first:
            inv[:, 0, :] = np.arange(K)
        for c, d in enumerate(digits):
            inv[:, L - free_cells + c, :] = inv_perms[d]
        vals = _objective_values(inv, b2, K, objective, sinr_cap)
        evaluated += len(ids)
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val, best_idx = float(vals[i]), int(ids[i])
    digits = np.unravel_index(best_idx, radix) if free_cells else ()
    rows = [np.arange(K)] if pin_first else []
    rows += [perms[d] for d in digits]
    p = np.concatenate(rows) + 1
    return SearchResult(PilotAssignment(p=p, palette_size=K, L=L, K=K), best_val, evaluated)


def optimal_allocate(
    beta: LargeScaleGains,
    objective: str = "rate",
    sinr_cap: float = 1e4,
    budget: int = DEFAULT_BUDGET,
) -> PilotAssignment:
    return exhaustive_search(beta, objective, sinr_cap, budget).assignment
