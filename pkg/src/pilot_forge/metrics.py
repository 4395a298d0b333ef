"""Uplink SINR, achievable rate and aggregation of per-user results."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .allocation import CoPilotSets
from .config import SystemConfig
from .network import LargeScaleGains, SmallScaleRealization


@dataclass(frozen=True)
class SinrReport:
    per_user_sinr: np.ndarray  # linear
    mode: str                  # "asymptotic" | "finite"
    M_used: int | None = None


@dataclass(frozen=True)
class RateReport:
    per_user_rate: np.ndarray  # bps/Hz
    overhead_used: float


def _sinr(signal: np.ndarray, interference: np.ndarray, cap: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(interference > 0, signal / interference, cap)
    return np.minimum(s, cap)


def _at_serving(values: np.ndarray, beta: LargeScaleGains) -> tuple[np.ndarray, np.ndarray]:
    """Split a (users, BS) array into own-BS entries and the
    ``[v, u] -> values[v, j(u)]`` matrix."""
    serving = beta.serving
    own = values[np.arange(len(values)), serving]
    return own, values[:, serving]


def asymptotic_sinr(beta: LargeScaleGains, copilots: CoPilotSets, sinr_cap: float = 1e4) -> SinrReport:
    """Large-antenna limit: own ``beta^2`` over the summed ``beta^2`` of co-pilot
    users, all seen at the user's own BS. Users with no co-pilot users, and
    any value above it, get ``sinr_cap``."""
    own, cross = _at_serving(beta.beta ** 2, beta)
    interference = np.einsum("uv,vu->u", copilots.mask, cross)
    return SinrReport(_sinr(own, interference, sinr_cap), "asymptotic")


def finite_m_sinr(
    beta: LargeScaleGains,
    smallscale: SmallScaleRealization,
    copilots: CoPilotSets,
    cfg: SystemConfig,
    noise: bool = True,
) -> SinrReport:
    """SINR at ``M`` antennas for one small-scale realization.

    With ``x = ||h_{u,j}||^2 = beta_{u,j} ||g_{u,j}||^2`` the signal is
    ``x^2``, each co-pilot user ``v`` contributes ``||h_{v,j}||^4`` and the
    noise term is ``x / rho_ul``. ``noise=False`` drops the noise term.
    """
    energy = beta.beta * smallscale.norm_sq
    own, cross = _at_serving(energy, beta)
    interference = np.einsum("uv,vu->u", copilots.mask, cross ** 2)
    if noise:
        interference = interference + own / cfg.rho_ul
    return SinrReport(_sinr(own ** 2, interference, cfg.sinr_cap), "finite", smallscale.M)


def overhead(mu0: float, palette_size: int, K: int) -> float:
    """Pilot overhead when ``palette_size`` pilots are needed instead of ``K``."""
    return mu0 * palette_size / K


def achievable_rate(sinr: SinrReport | np.ndarray, mu: float) -> RateReport:
    """``max(0, 1 - mu) * log2(1 + SINR)`` per user."""
    if mu < 0:
        raise ValueError("overhead must be non-negative")
    s = sinr.per_user_sinr if isinstance(sinr, SinrReport) else np.asarray(sinr)
    return RateReport(max(0.0, 1.0 - mu) * np.log2(1.0 + s), mu)


def mean_rate(reports: Iterable[RateReport]) -> RateReport:
    """Average per-user rates over small-scale realizations."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to average")
    return RateReport(np.mean([r.per_user_rate for r in reports], axis=0), reports[0].overhead_used)


@dataclass(frozen=True)
class Summary:
    values: np.ndarray  # sorted pooled samples
    cdf: np.ndarray     # rank / count
    mean: float
    q05: float
    q50: float
    q95: float


def lower_quantile(sorted_values: np.ndarray, q: float) -> float:
    """Empirical quantile taking the lower sample, i.e. the smallest value
    whose CDF reaches ``q``."""
    n = len(sorted_values)
    i = max(int(np.ceil(q * n)) - 1, 0)
    return float(sorted_values[i])


def aggregate(reports: Iterable[RateReport | np.ndarray]) -> Summary:
    """Pool per-user rates from many reports into an empirical CDF."""
    arrays = [r.per_user_rate if isinstance(r, RateReport) else np.asarray(r) for r in reports]
    if not arrays:
        raise ValueError("cannot aggregate an empty collection")
    values = np.sort(np.concatenate([a.ravel() for a in arrays]))
    n = len(values)
    return Summary(
        values=values,
        cdf=np.arange(1, n + 1) / n,
        mean=float(values.mean()),
        q05=lower_quantile(values, 0.05),
        q50=lower_quantile(values, 0.50),
        q95=lower_quantile(values, 0.95),
    )


def write_cdf_csv(path, summaries: dict[str, Summary]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scheme", "value_bpshz", "cdf"])
        for scheme, s in summaries.items():
            for v, c in zip(s.values.tolist(), s.cdf.tolist()):
                w.writerow([scheme, repr(v), repr(c)])
