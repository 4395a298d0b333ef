"""Potential inter-cell interference metric and the thresholded interference graph."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .network import LargeScaleGains


@dataclass(frozen=True)
class InterferenceGraph:
    adjacency: np.ndarray  # (L*K, L*K) bool
    threshold: float
    eta_bounds: tuple[float, float]
    L: int
    K: int

    @property
    def n(self) -> int:
        return self.L * self.K

    def same_cell(self) -> np.ndarray:
        return same_cell_mask(self.L, self.K)

    def inter_cell(self) -> np.ndarray:
        """Adjacency restricted to pairs in different cells."""
        return self.adjacency & ~self.same_cell()

    def edges(self) -> list[tuple[int, int]]:
        iu, iv = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(iu.tolist(), iv.tolist()))

    def write_edge_list(self, path) -> None:
        """One ``u v`` pair per line, vertex ``u = j*K + k`` (0-based)."""
        Path(path).write_text("".join(f"{u} {v}\n" for u, v in self.edges()))


def same_cell_mask(L: int, K: int) -> np.ndarray:
    """True for distinct users sharing a cell."""
    cell = np.repeat(np.arange(L), K)
    mask = cell[:, None] == cell[None, :]
    np.fill_diagonal(mask, False)
    return mask


def eta(beta: LargeScaleGains, u: int, v: int) -> float:
    """Potential ICI between users ``u`` and ``v`` if they shared a pilot.

    Sum of the two cross-to-direct power ratios, one at each user's BS.
    """
    j, jp = u // beta.K, v // beta.K
    if j == jp:
        raise ValueError(f"users {u} and {v} are in the same cell")
    b = beta.beta
    return float((b[v, j] / b[u, j]) ** 2 + (b[u, jp] / b[v, jp]) ** 2)


def eta_matrix(beta: LargeScaleGains) -> np.ndarray:
    """All pairwise ``eta`` values; same-cell entries (and the diagonal) are NaN."""
    b2 = beta.beta ** 2
    serving = beta.serving
    own = b2[np.arange(len(b2)), serving]            # beta_{u,j(u)}^2
    at_u = b2[:, serving]                            # at_u[v, u] = beta_{v,j(u)}^2
    ratio = at_u.T / own[:, None]                    # ratio[u, v] = beta_{v,j(u)}^2 / beta_{u,j(u)}^2
    out = ratio + ratio.T
    out[same_cell_mask(beta.L, beta.K)] = np.nan
    np.fill_diagonal(out, np.nan)
    return out


def eta_bounds(beta: LargeScaleGains, etas: np.ndarray | None = None) -> tuple[float, float]:
    if beta.L < 2:
        raise ValueError("eta bounds need at least two cells")
    etas = eta_matrix(beta) if etas is None else etas
    return float(np.nanmin(etas)), float(np.nanmax(etas))


def build_graph(
    beta: LargeScaleGains,
    gamma_th: float,
    etas: np.ndarray | None = None,
) -> InterferenceGraph:
    """Interference graph at threshold ``gamma_th``.

    Users in one cell are always adjacent; users in different cells are
    adjacent when ``eta > gamma_th`` (strict).
    """
    if not np.isfinite(gamma_th):
        raise ValueError("gamma_th must be finite")
    L, K = beta.L, beta.K
    etas = eta_matrix(beta) if etas is None else etas
    with np.errstate(invalid="ignore"):
        adj = etas > gamma_th
    adj |= same_cell_mask(L, K)
    bounds = eta_bounds(beta, etas) if L >= 2 else (float("nan"), float("nan"))
    return InterferenceGraph(adjacency=adj, threshold=float(gamma_th), eta_bounds=bounds, L=L, K=K)


def graph_from_adjacency(adjacency: np.ndarray, L: int, K: int) -> InterferenceGraph:
    """Wrap a hand-made adjacency (tests, debugging) as an InterferenceGraph."""
    adj = np.asarray(adjacency, dtype=bool)
    return InterferenceGraph(adjacency=adj, threshold=float("nan"),
                             eta_bounds=(float("nan"), float("nan")), L=L, K=K)
