"""Seeded Monte-Carlo experiments that compose the allocators and metrics."""

from __future__ import annotations

import csv
import dataclasses
import logging
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .allocation import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    PilotAssignment,
    copilot_sets,
    exhaustive_search,
    gca_allocate,
    gcpa_allocate,
    n_candidates,
    random_allocate,
)
from .config import (
    STREAM_DROP,
    STREAM_RANDOM_ALLOC,
    STREAM_SMALL_SCALE,
    SystemConfig,
    coerce_fields,
    config_to_text,
    parse_config_text,
    rng_substream,
)
from .graph import build_graph
from .igs import igs_normalized, igs_search
from .metrics import (
    Summary,
    achievable_rate,
    aggregate,
    asymptotic_sinr,
    finite_m_sinr,
    overhead,
    write_cdf_csv,
)
from .network import build_layout, compute_beta, drop_users, sample_small_scale

log = logging.getLogger(__name__)

SCHEMA_LINE = "pilot-forge-schema=1"
SCENARIOS = ("fig2a", "fig2b", "fig2c", "sweep", "single")
SCHEMES = ("random", "gca", "gcpa", "optimal")
MODES = ("asymptotic", "finite")
DEFAULT_M_GRID = (10, 100, 128, 1000, 10000)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    scenario: str
    cfg: SystemConfig = field(default_factory=SystemConfig)
    trials: int = 100
    inner_realizations: int = 20
    schemes: tuple[str, ...] = ("random", "gca", "gcpa")
    sinr_mode: str = "finite"
    output_path: str = "results"
    m_grid: tuple[int, ...] = ()
    workers: int = 1
    budget: int = DEFAULT_BUDGET
    igs_objective: str = "sinr"
    igs_scale: str = "linear"
    optimal_objective: str = "rate"

    def __post_init__(self):
        problems = []
        if self.scenario not in SCENARIOS:
            problems.append(f"unknown scenario {self.scenario!r}")
        if self.trials < 1:
            problems.append("trials must be >= 1")
        if self.inner_realizations < 1:
            problems.append("inner_realizations must be >= 1")
        bad = [s for s in self.schemes if s not in SCHEMES]
        if bad or not self.schemes:
            problems.append(f"schemes must be a non-empty subset of {SCHEMES}, got {self.schemes}")
        if self.sinr_mode not in MODES:
            problems.append(f"mode must be one of {MODES}")
        if any(m < 1 for m in self.m_grid):
            problems.append("antenna counts in m_grid must be >= 1")
        if self.workers < 1:
            problems.append("workers must be >= 1")
        if self.igs_objective not in ("sinr", "rate"):
            problems.append("igs_objective must be 'sinr' or 'rate'")
        if self.igs_scale not in ("linear", "log"):
            problems.append("igs_scale must be 'linear' or 'log'")
        if self.optimal_objective not in ("sinr", "rate"):
            problems.append("optimal_objective must be 'sinr' or 'rate'")
        if self.cfg.L < 2 and self.scenario != "single":
            problems.append("threshold search needs at least two cells")
        if problems:
            raise ConfigError("; ".join(problems))

    @property
    def antennas(self) -> tuple[int, ...]:
        return self.m_grid or (self.cfg.M,)

    def check_budget(self) -> None:
        if "optimal" in self.schemes:
            need = n_candidates(self.cfg.L, self.cfg.K)
            if need > self.budget:
                raise BudgetExceeded(
                    f"optimal scheme needs {need} candidates per drop, budget is {self.budget}")


# scenario defaults, applied before config file and CLI overrides
SCENARIO_DEFAULTS: dict[str, dict] = {
    "fig2a": dict(cfg=dict(L=7, K=8, M=128, igs_n=20, igs_t=2), trials=200,
                  schemes=("gcpa",), sinr_mode="asymptotic"),
    "fig2b": dict(cfg=dict(L=4, K=4, M=128), trials=1000,
                  schemes=("random", "gca", "gcpa", "optimal"), sinr_mode="finite"),
    "fig2c": dict(cfg=dict(L=7, K=8), trials=200, m_grid=DEFAULT_M_GRID,
                  schemes=("random", "gca", "gcpa"), sinr_mode="finite"),
    "sweep": dict(trials=200, m_grid=DEFAULT_M_GRID, sinr_mode="finite"),
    "single": dict(trials=1),
}

_SPEC_KEYS = {f.name for f in dataclasses.fields(ExperimentSpec)} - {"scenario", "cfg"}
_CFG_KEYS = {f.name for f in dataclasses.fields(SystemConfig)}
_ALIASES = {"mode": "sinr_mode", "out": "output_path"}


def make_spec(scenario: str, overrides: dict | None = None) -> ExperimentSpec:
    """Scenario defaults updated by ``overrides``.

    ``overrides`` maps field names of ExperimentSpec or SystemConfig (or the
    aliases ``mode``/``out``) to already-typed values.
    """
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    base = dict(SCENARIO_DEFAULTS[scenario])
    cfg_kw = dict(base.pop("cfg", {}))
    for key, value in (overrides or {}).items():
        key = _ALIASES.get(key, key)
        if key in _CFG_KEYS:
            cfg_kw[key] = value
        elif key in _SPEC_KEYS:
            base[key] = value
        else:
            raise ConfigError(f"unknown setting {key!r}")
    try:
        cfg = SystemConfig(**cfg_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentSpec(scenario=scenario, cfg=cfg, **base)


def parse_overrides(text: str) -> dict:
    """Typed overrides from ``key = value`` config text."""
    try:
        raw = {_ALIASES.get(k, k): v for k, v in parse_config_text(text).items()}
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    unknown = set(raw) - _SPEC_KEYS - _CFG_KEYS
    if unknown:
        raise ConfigError(f"unknown setting(s): {', '.join(sorted(unknown))}")
    out = {}
    try:
        out.update(coerce_fields(SystemConfig, {k: v for k, v in raw.items() if k in _CFG_KEYS}))
        for key in ("trials", "inner_realizations", "workers", "budget"):
            if key in raw:
                out[key] = int(raw[key], 0)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for key in ("sinr_mode", "output_path", "igs_objective", "igs_scale", "optimal_objective"):
        if key in raw:
            out[key] = raw[key]
    if "schemes" in raw:
        out["schemes"] = parse_list(raw["schemes"])
    if "m_grid" in raw:
        try:
            out["m_grid"] = tuple(int(x) for x in parse_list(raw["m_grid"]))
        except ValueError as exc:
            raise ConfigError(f"m_grid: {exc}") from None
    return out


def parse_list(text: str) -> tuple[str, ...]:
    return tuple(s.strip() for s in text.split(",") if s.strip())


# ---------------------------------------------------------------------------
# one trial


@dataclass
class TrialResult:
    trial: int
    gamma_th: float
    gca_palette: int
    rates: dict[str, dict[int, np.ndarray]]  # scheme -> M -> per-user rate


def allocate_all(spec: ExperimentSpec, beta, trial: int) -> tuple[dict[str, PilotAssignment], float]:
    cfg = spec.cfg
    L, K = cfg.L, cfg.K
    out: dict[str, PilotAssignment] = {}
    gamma = float("nan")
    if {"gca", "gcpa"} & set(spec.schemes):
        if L >= 2:
            gamma, _ = igs_search(beta, cfg.igs_n, cfg.igs_t, spec.igs_objective,
                                  cfg.sinr_cap, spec.igs_scale)
        graph = build_graph(beta, 0.0 if np.isnan(gamma) else gamma)  # L == 1: one clique
        if "gcpa" in spec.schemes:
            out["gcpa"] = gcpa_allocate(graph, L, K)
        if "gca" in spec.schemes:
            out["gca"] = gca_allocate(graph)
    if "random" in spec.schemes:
        out["random"] = random_allocate(L, K, rng_substream(cfg.seed, [trial, STREAM_RANDOM_ALLOC]))
    if "optimal" in spec.schemes:
        out["optimal"] = exhaustive_search(beta, spec.optimal_objective, cfg.sinr_cap,
                                           spec.budget).assignment
    return {s: out[s] for s in spec.schemes}, gamma


def run_trial(spec: ExperimentSpec, trial: int) -> TrialResult:
    """Drop users, allocate with every scheme and evaluate rates at each M."""
    cfg = spec.cfg
    layout = build_layout(cfg.L, cfg.R)
    drop = drop_users(layout, cfg, rng_substream(cfg.seed, [trial, STREAM_DROP]))
    beta = compute_beta(drop, layout, cfg)
    assignments, gamma = allocate_all(spec, beta, trial)
    copilots = {s: copilot_sets(a) for s, a in assignments.items()}
    mus = {s: overhead(cfg.mu0, a.palette_size, cfg.K) for s, a in assignments.items()}

    rates: dict[str, dict[int, np.ndarray]] = {s: {} for s in assignments}
    if spec.sinr_mode == "asymptotic":
        for s in assignments:
            r = achievable_rate(asymptotic_sinr(beta, copilots[s], cfg.sinr_cap), mus[s]).per_user_rate
            for M in spec.antennas:
                rates[s][M] = r
    else:
        for mi, M in enumerate(spec.antennas):
            cfg_m = cfg.replace(M=M)
            rng = rng_substream(cfg.seed, [trial, STREAM_SMALL_SCALE, mi])
            acc = {s: np.zeros(cfg.n_users) for s in assignments}
            # the same small-scale draws serve every scheme
            for _ in range(spec.inner_realizations):
                ss = sample_small_scale(cfg_m, rng)
                for s in assignments:
                    sinr = finite_m_sinr(beta, ss, copilots[s], cfg_m)
                    acc[s] += achievable_rate(sinr, mus[s]).per_user_rate
            for s in assignments:
                rates[s][M] = acc[s] / spec.inner_realizations
    gca_palette = assignments["gca"].palette_size if "gca" in assignments else 0
    return TrialResult(trial, gamma, gca_palette, rates)


def _run_trial_star(args):
    return run_trial(*args)


def run_trials(spec: ExperimentSpec) -> list[TrialResult]:
    jobs = [(spec, t) for t in range(spec.trials)]
    if spec.workers == 1:
        return [run_trial(*j) for j in jobs]
    with ProcessPoolExecutor(max_workers=spec.workers) as pool:
        # map keeps trial order, so the reduction below is scheduling-independent
        return list(pool.map(_run_trial_star, jobs, chunksize=max(1, spec.trials // (4 * spec.workers))))


# ---------------------------------------------------------------------------
# outputs


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    summaries: dict[str, dict[int, Summary]]  # scheme -> M -> summary
    trials: list[TrialResult]
    files: list[Path]
    igs_trace: object = None

    def mean(self, scheme: str, M: int | None = None) -> float:
        M = self.spec.antennas[0] if M is None else M
        return self.summaries[scheme][M].mean


def summarize(spec: ExperimentSpec, trials: list[TrialResult]) -> dict[str, dict[int, Summary]]:
    return {
        s: {M: aggregate([t.rates[s][M] for t in trials]) for M in spec.antennas}
        for s in spec.schemes
    }


def write_sweep_csv(path, summaries: dict[str, dict[int, Summary]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scheme", "M", "mean_rate_bpshz", "q05", "q50", "q95"])
        for scheme, per_m in summaries.items():
            for M, s in per_m.items():
                w.writerow([scheme, M, repr(s.mean), repr(s.q05), repr(s.q50), repr(s.q95)])


def write_trials_csv(path, trials: list[TrialResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "gamma_th", "gca_palette"])
        for t in trials:
            w.writerow([t.trial, repr(t.gamma_th), t.gca_palette])


def version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def manifest_text(spec: ExperimentSpec, config_text: str | None = None) -> str:
    lines = [SCHEMA_LINE, f"version = {version_string()}", f"scenario = {spec.scenario}",
             f"seed = {spec.cfg.seed}", "", "# system", config_to_text(spec.cfg).rstrip(),
             "", "# experiment"]
    for f in dataclasses.fields(spec):
        if f.name in ("scenario", "cfg"):
            continue
        value = getattr(spec, f.name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        lines.append(f"{f.name} = {value}")
    if config_text is not None:
        lines += ["", "# config file (verbatim)"] + [f"# | {ln}" for ln in config_text.splitlines()]
    return "\n".join(lines) + "\n"


def run_experiment(spec: ExperimentSpec, config_text: str | None = None) -> ExperimentResult:
    """Run ``spec`` and write its CSVs and manifest under ``spec.output_path``.

    fig2a writes ``igs_trace.csv`` (normalized thresholds averaged over
    drops). Every other scenario writes ``cdf_<scheme>.csv`` per scheme at
    the first antenna count, ``sweep.csv`` with one row per (scheme, M) and
    ``trials.csv``. All runs write ``manifest.txt``.
    """
    spec.check_budget()
    out = Path(spec.output_path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    files: list[Path] = []

    def emit(name: str, writer, *args) -> None:
        path = out / name
        try:
            writer(path, *args)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        files.append(path)

    if spec.scenario == "fig2a":
        trace = run_fig2a(spec)
        emit("igs_trace.csv", lambda p: trace.write_csv(p))
        emit("manifest.txt", lambda p: p.write_text(manifest_text(spec, config_text)))
        return ExperimentResult(spec, {}, [], files, igs_trace=trace)

    log.info("running %s: %d trials, schemes %s", spec.scenario, spec.trials, ",".join(spec.schemes))
    trials = run_trials(spec)
    summaries = summarize(spec, trials)
    first_m = spec.antennas[0]
    for scheme in spec.schemes:
        emit(f"cdf_{scheme}.csv", write_cdf_csv, {scheme: summaries[scheme][first_m]})
    emit("sweep.csv", write_sweep_csv, summaries)
    emit("trials.csv", write_trials_csv, trials)
    emit("manifest.txt", lambda p: p.write_text(manifest_text(spec, config_text)))
    return ExperimentResult(spec, summaries, trials, files)


def run_fig2a(spec: ExperimentSpec):
    """Drop-averaged grid search over the normalized threshold."""
    cfg = spec.cfg
    layout = build_layout(cfg.L, cfg.R)
    betas = []
    for trial in range(spec.trials):
        drop = drop_users(layout, cfg, rng_substream(cfg.seed, [trial, STREAM_DROP]))
        betas.append(compute_beta(drop, layout, cfg))
    return igs_normalized(betas, cfg.igs_n, cfg.igs_t, spec.igs_objective, cfg.sinr_cap)
