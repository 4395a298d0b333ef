import numpy as np

from pilot_forge.config import SystemConfig, rng_substream
from pilot_forge.network import LargeScaleGains, build_layout, compute_beta, drop_users


def random_beta(L, K, seed, cfg=None):
    """Large-scale gains of one user drop."""
    cfg = cfg or SystemConfig(L=L, K=K)
    layout = build_layout(L, cfg.R)
    return compute_beta(drop_users(layout, cfg, rng_substream(seed, [0])), layout, cfg)


def lognormal_beta(L, K, rng):
    """Unstructured positive gains, for properties that must hold for any beta."""
    return LargeScaleGains(np.exp(rng.normal(0, 2, size=(L * K, L))), L, K)


# (criterion, passed, detail) rows printed by the terminal-summary hook
ACCEPTANCE_LOG: list[tuple[str, bool, str]] = []


def record(criterion: str, checks: dict[str, bool], detail: str) -> None:
    """Log one acceptance criterion, then fail the test if any check failed."""
    ok = all(checks.values())
    failed = [name for name, good in checks.items() if not good]
    ACCEPTANCE_LOG.append((criterion, ok, detail + (f" | failed: {', '.join(failed)}" if failed else "")))
    assert ok, f"{criterion}: failed checks {failed}; {detail}"
