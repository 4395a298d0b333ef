"""Hexagonal cell layout, user drops and channel coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig

SQRT3 = math.sqrt(3.0)

# unit steps between adjacent cell centers, 60 degrees apart starting on +x
_HEX_DIRS = np.array(
    [[math.cos(math.pi / 3 * i), math.sin(math.pi / 3 * i)] for i in range(6)]
)


@dataclass(frozen=True)
class CellLayout:
    centers: np.ndarray  # (L, 2) meters
    R: float

    @property
    def L(self) -> int:
        return len(self.centers)


@dataclass(frozen=True)
class UserDrop:
    """One placement of all users plus the shadowing of every user-BS link.

    ``positions`` has shape ``(L, K, 2)``; ``shadow_db`` has shape
    ``(L*K, L)`` with user ``(j, k)`` at row ``j*K + k``.
    """

    positions: np.ndarray
    shadow_db: np.ndarray

    @property
    def flat_positions(self) -> np.ndarray:
        return self.positions.reshape(-1, 2)


@dataclass(frozen=True)
class LargeScaleGains:
    """``beta[u, i]``: large-scale gain from user ``u`` to BS ``i``."""

    beta: np.ndarray
    L: int
    K: int

    def __post_init__(self):
        b = self.beta
        if b.shape != (self.L * self.K, self.L):
            raise ValueError(f"beta has shape {b.shape}, expected {(self.L * self.K, self.L)}")
        if not (np.all(np.isfinite(b)) and np.all(b > 0)):
            raise ValueError("beta entries must be positive and finite")

    @property
    def serving(self) -> np.ndarray:
        """Serving-cell index of every user."""
        return np.repeat(np.arange(self.L), self.K)

    def scaled(self, c: float) -> "LargeScaleGains":
        return LargeScaleGains(self.beta * c, self.L, self.K)


@dataclass(frozen=True)
class SmallScaleRealization:
    """Small-scale fading of every user-BS link for one channel use.

    Only ``norm_sq[u, i] = ||g_{u,i}||^2`` enters the SINR, so that is always
    present. ``g`` holds the full ``(L*K, L, M)`` complex vectors when they
    were materialized.
    """

    M: int
    norm_sq: np.ndarray
    g: np.ndarray | None = None


def hex_spiral(n: int) -> list[tuple[int, int]]:
    """First ``n`` cells of a hexagonal spiral in lattice coordinates, i.e.
    integer multiples of ``_HEX_DIRS[0]`` and ``_HEX_DIRS[1]``."""
    out = [(0, 0)]
    ring = 1
    # lattice coordinates in the (d0, d1) basis; d2 = d1 - d0
    steps = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)]
    while len(out) < n:
        a, b = ring * steps[0][0], ring * steps[0][1]
        for side in range(6):
            da, db = steps[(side + 2) % 6]
            for _ in range(ring):
                out.append((a, b))
                a, b = a + da, b + db
        ring += 1
    return out[:n]


def build_layout(L: int, R: float) -> CellLayout:
    """Centers of the first ``L`` cells of a hexagonal spiral.

    Cell 0 sits at the origin, ring 1 follows counter-clockwise from the +x
    axis, then ring 2, and so on. Adjacent centers are ``sqrt(3) * R`` apart.
    """
    if L < 1 or not R > 0:
        raise ValueError("need L >= 1 and R > 0")
    pitch = SQRT3 * R
    coords = np.array(hex_spiral(L), dtype=float)
    centers = pitch * (coords[:, :1] * _HEX_DIRS[0] + coords[:, 1:] * _HEX_DIRS[1])
    return CellLayout(centers=centers, R=float(R))


def in_hexagon(points: np.ndarray, R: float) -> np.ndarray:
    """Containment in the hexagon of circumradius ``R`` centered at the origin.

    The hexagon has its edge midpoints along ``_HEX_DIRS`` (pointy top), so
    it tiles with the lattice of :func:`build_layout`.
    """
    apothem = SQRT3 / 2 * R
    proj = np.abs(points @ _HEX_DIRS[:3].T)
    return np.all(proj <= apothem * (1 + 1e-12), axis=-1)


def _sample_cell(n: int, R: float, r_min: float, rng: np.random.Generator) -> np.ndarray:
    out = np.empty((0, 2))
    while len(out) < n:
        need = n - len(out)
        cand = rng.uniform(-R, R, size=(2 * need + 8, 2))
        d = np.hypot(cand[:, 0], cand[:, 1])
        ok = in_hexagon(cand, R) & (d >= r_min) & (d > 0)
        out = np.vstack([out, cand[ok][:need]])
    return out


def drop_users(layout: CellLayout, cfg: SystemConfig, rng: np.random.Generator) -> UserDrop:
    """Place ``K`` users uniformly in each hexagon outside the ``r_min`` disc
    and draw i.i.d. N(0, sigma_shadow_db^2) shadowing for every user-BS link."""
    L, K = layout.L, cfg.K
    positions = np.empty((L, K, 2))
    for j in range(L):
        positions[j] = layout.centers[j] + _sample_cell(K, layout.R, cfg.r_min, rng)
    shadow_db = rng.normal(0.0, cfg.sigma_shadow_db, size=(L * K, L))
    return UserDrop(positions=positions, shadow_db=shadow_db)


def distances(drop: UserDrop, layout: CellLayout) -> np.ndarray:
    """``(L*K, L)`` user-to-BS distances."""
    diff = drop.flat_positions[:, None, :] - layout.centers[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def compute_beta(drop: UserDrop, layout: CellLayout, cfg: SystemConfig) -> LargeScaleGains:
    r = distances(drop, layout)
    if np.any(r <= 0):
        raise ValueError("a user is co-located with a base station")
    z = 10.0 ** (drop.shadow_db / 10.0)
    beta = z / (r / layout.R) ** cfg.alpha
    return LargeScaleGains(beta=beta, L=layout.L, K=drop.positions.shape[1])


# above this many complex entries per realization the norms are drawn directly
VECTOR_LIMIT = 2_000_000


def sample_small_scale(
    cfg: SystemConfig,
    rng: np.random.Generator,
    n_users: int | None = None,
    method: str = "auto",
) -> SmallScaleRealization:
    """Draw ``g ~ CN(0, I_M)`` for every user-BS pair.

    ``method="vectors"`` materializes the complex vectors (real and imaginary
    parts N(0, 1/2)). ``method="gamma"`` draws ``||g||^2`` directly, which is
    Gamma(M, 1) distributed, and skips the vectors. ``"auto"`` picks vectors
    unless that would exceed ``VECTOR_LIMIT`` entries.
    """
    n_users = cfg.n_users if n_users is None else n_users
    shape = (n_users, cfg.L)
    if method == "auto":
        method = "vectors" if n_users * cfg.L * cfg.M <= VECTOR_LIMIT else "gamma"
    if method == "vectors":
        scale = math.sqrt(0.5)
        g = rng.normal(0.0, scale, size=shape + (cfg.M, 2)).view(np.complex128)[..., 0]
        norm_sq = np.einsum("uim,uim->ui", g.real, g.real) + np.einsum("uim,uim->ui", g.imag, g.imag)
        return SmallScaleRealization(M=cfg.M, norm_sq=norm_sq, g=g)
    if method == "gamma":
        return SmallScaleRealization(M=cfg.M, norm_sq=rng.gamma(cfg.M, 1.0, size=shape))
    raise ValueError(f"unknown method {method!r}")
