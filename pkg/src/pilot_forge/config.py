"""Scenario parameters, config-file parsing and RNG stream derivation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class SystemConfig:
    """Parameters of one multi-cell scenario.

    Defaults follow the usual desk setup: 7 cells of 8 users, 128 BS
    antennas, 500 m cells, pathloss exponent 3, 8 dB shadowing, 20 %
    pilot overhead and a 20 x 2 threshold grid search.
    """

    L: int = 7                  # cells
    K: int = 8                  # users per cell == pilots
    M: int = 128                # BS antennas
    R: float = 500.0            # cell radius (center to vertex), m
    alpha: float = 3.0          # pathloss exponent
    sigma_shadow_db: float = 8.0
    mu0: float = 0.2            # pilot overhead fraction
    r_min: float = 50.0         # exclusion radius around each BS, m
    rho_ul_db: float = 10.0     # uplink SNR of an unshadowed cell-edge user
    sinr_cap_db: float = 40.0
    igs_n: int = 20
    igs_t: int = 2
    seed: int = 0

    def __post_init__(self):
        errors = []
        if self.L < 1:
            errors.append("L must be >= 1")
        if self.K < 1:
            errors.append("K must be >= 1")
        if self.M < 1:
            errors.append("M must be >= 1")
        if not self.R > 0:
            errors.append("R must be > 0")
        if not self.alpha > 0:
            errors.append("alpha must be > 0")
        if self.sigma_shadow_db < 0:
            errors.append("sigma_shadow_db must be >= 0")
        if not 0 <= self.mu0 < 1:
            errors.append("mu0 must lie in [0, 1)")
        if not 0 <= self.r_min < self.R:
            errors.append("r_min must lie in [0, R)")
        if self.igs_n < 2:
            errors.append("igs_n must be >= 2")
        if self.igs_t < 1:
            errors.append("igs_t must be >= 1")
        if not 0 <= self.seed < 2**64:
            errors.append("seed must be an unsigned 64-bit integer")
        if errors:
            raise ValueError("; ".join(errors))

    @property
    def n_users(self) -> int:
        return self.L * self.K

    @property
    def rho_ul(self) -> float:
        return 10.0 ** (self.rho_ul_db / 10.0)

    @property
    def sinr_cap(self) -> float:
        return 10.0 ** (self.sinr_cap_db / 10.0)

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` text; ``#`` starts a comment.

    Values are returned as raw strings, typing happens in
    :func:`coerce_fields`.
    """
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        out[key] = value
    return out


def coerce_fields(cls, raw: dict[str, str]) -> dict:
    """Convert raw strings to the field types of dataclass ``cls``.

    Unknown keys are left out; the caller decides whether they are errors.
    """
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    out = {}
    for key, value in raw.items():
        if key not in types:
            continue
        kind = types[key]
        try:
            if kind in ("int", int):
                out[key] = int(value, 0)
            elif kind in ("float", float):
                out[key] = float(value)
            else:
                out[key] = value
        except ValueError as exc:
            raise ValueError(f"{key}: cannot parse {value!r} ({exc})") from None
    return out


def config_to_text(cfg) -> str:
    """Render a dataclass as ``key = value`` lines (round-trips through the parser)."""
    lines = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def rng_substream(seed: int, labels: Sequence[int] = ()) -> np.random.Generator:
    """Independent generator derived from ``seed`` and a path of integer labels.

    Uses numpy's ``SeedSequence`` spawn keys, so streams for different label
    paths are statistically independent and the mapping is stable across
    processes and worker counts.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(x) for x in labels))
    return np.random.Generator(np.random.PCG64(ss))


# purpose labels for rng_substream; second element after the trial index
STREAM_DROP = 0
STREAM_RANDOM_ALLOC = 1
STREAM_SMALL_SCALE = 2
