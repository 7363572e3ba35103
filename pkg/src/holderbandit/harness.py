"""Experiment orchestration: configs, reproducible cells, rate fits and CSV output.

A *cell* is one (algorithm, function, horizon T, seed) run.  Cells are
independent: every random stream a cell uses is derived from a SHA-256 hash
of the canonical JSON of exactly the settings that stream depends on, so a
cell's output never depends on which other cells run or in what order.

* the function instance (e.g. a random optimum) depends on (function, seed)
* the oracle noise depends on (function, noise, sigma, seed, T)
* the algorithm's own randomness depends on the whole cell
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from . import baselines, corral, meta
from .testbed import (
    HolderFunction,
    NoiseKind,
    NoiseModel,
    Oracle,
    certify,
    make_power_bump,
    make_quadratic,
    make_trig_mixture,
)
from .trace import ConfigError, RegretTrace

ALGORITHMS = ("ucb_meta", "ucb1_bins", "corral_meta", "adapt")

_FUNCTION_KEYS = {
    "power_bump": {"kind", "d", "alpha", "L", "x_star", "h"},
    "quadratic": {"kind", "d", "L", "x_star", "h", "Q"},
    "trig_mixture": {"kind", "d", "alpha", "amplitudes", "frequencies", "phases", "offset"},
    "constant": {"kind", "d", "value"},
}

_CONFIG_KEYS = {
    "function", "algorithm", "alpha", "L", "T", "horizons", "seeds", "delta", "sigma", "noise",
    "profile", "doubling", "R", "eta_override", "points_per_side", "workers", "output", "grid",
}

TRACE_COLUMNS = ["seed", "T", "t", "bin", "x", "y", "cum_regret"]
SUMMARY_COLUMNS = ["algorithm", "alpha_true", "alpha_input", "d", "T", "seed", "final_regret"]
FIT_COLUMNS = ["slope", "intercept", "r_squared", "n_points", "T_values", "mean_regrets"]


# --------------------------------------------------------------------------- config


@dataclass(frozen=True)
class ExperimentConfig:
    function: dict
    algorithm: str = "ucb_meta"
    horizons: tuple = (1024,)
    seeds: tuple = (0,)
    alpha: Optional[float] = None
    L: Optional[float] = None
    delta: float = 0.1
    sigma: float = 0.1
    noise: str = "gaussian"
    profile: object = "aggressive"
    doubling: bool = False
    R: float = 2.0
    eta_override: Optional[float] = None
    points_per_side: Optional[int] = None
    workers: int = 1
    output: Optional[str] = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        hs = list(self.horizons)
        if not hs or any(int(h) != h or h < 1 for h in hs):
            raise ConfigError("horizons must be positive integers")
        if any(b <= a for a, b in zip(hs, hs[1:])):
            raise ConfigError("horizons must be strictly increasing")
        if len(set(self.seeds)) != len(self.seeds) or not self.seeds:
            raise ConfigError("seeds must be a non-empty list of distinct integers")
        if not (0 < self.delta < 1):
            raise ConfigError("delta must lie in (0, 1)")
        if self.sigma < 0:
            raise ConfigError("sigma must be non-negative")
        if self.noise not in {k.value for k in NoiseKind}:
            raise ConfigError(f"unknown noise {self.noise!r}")
        if self.alpha is not None and self.alpha <= 0:
            raise ConfigError("alpha must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        _validate_function(self.function)

    @property
    def d(self) -> int:
        return int(self.function.get("d", 1))

    def cell_key(self) -> dict:
        """Settings that define a cell's behaviour (everything except seeds, horizons and plumbing)."""
        out = asdict(self)
        for k in ("horizons", "seeds", "workers", "output"):
            out.pop(k)
        return out


def _validate_function(spec: dict) -> None:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError("function must be an object with a 'kind'")
    kind = spec["kind"]
    if kind not in _FUNCTION_KEYS:
        raise ConfigError(f"unknown function kind {kind!r}; expected one of {sorted(_FUNCTION_KEYS)}")
    unknown = set(spec) - _FUNCTION_KEYS[kind]
    if unknown:
        raise ConfigError(f"unknown keys for function {kind!r}: {sorted(unknown)}")
    xs = spec.get("x_star")
    if isinstance(xs, str) and xs != "random":
        raise ConfigError("x_star must be a list of coordinates, null, or \"random\"")


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a config from parsed JSON; unknown keys are rejected."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "grid" in raw:
        raise ConfigError("'grid' is only valid for sweep configs")
    raw = dict(raw)
    if "function" not in raw:
        raise ConfigError("config needs a 'function'")
    if "T" in raw and "horizons" in raw:
        raise ConfigError("give either 'T' or 'horizons', not both")
    horizons = raw.pop("horizons", None)
    if "T" in raw:
        horizons = [raw.pop("T")]
    seeds = raw.pop("seeds", [0])
    if isinstance(seeds, int):
        seeds = list(range(seeds))
    try:
        return ExperimentConfig(
            horizons=tuple(int(h) for h in (horizons or [1024])),
            seeds=tuple(int(s) for s in seeds),
            **raw,
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def expand_sweep(raw: dict) -> list[ExperimentConfig]:
    """Cartesian product over ``grid``; keys are top-level names or ``function.<key>``."""
    raw = dict(raw)
    grid = raw.pop("grid", {}) or {}
    if not isinstance(grid, dict):
        raise ConfigError("'grid' must map keys to lists of values")
    names = list(grid)
    for name in names:
        top = name.split(".", 1)[0]
        if top not in _CONFIG_KEYS - {"grid"}:
            raise ConfigError(f"unknown grid key {name!r}")
        if not isinstance(grid[name], list) or not grid[name]:
            raise ConfigError(f"grid entry {name!r} must be a non-empty list")
    out = []
    for combo in itertools.product(*(grid[n] for n in names)):
        cfg = json.loads(json.dumps(raw))
        for name, value in zip(names, combo):
            if name.startswith("function."):
                cfg.setdefault("function", {})[name.split(".", 1)[1]] = value
            else:
                cfg[name] = value
        out.append(config_from_dict(cfg))
    return out


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None


# --------------------------------------------------------------------------- seeding


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


def derive_rng(*parts) -> np.random.Generator:
    """Generator seeded by the SHA-256 of the canonical JSON of ``parts``."""
    digest = hashlib.sha256(_canonical(list(parts)).encode()).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 32, 4)]
    return np.random.default_rng(np.random.SeedSequence(words))


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(_canonical(cfg.cell_key()).encode()).hexdigest()[:16]


# --------------------------------------------------------------------------- cells


def _certify_resolution(d: int) -> float:
    return max(1e-4, 2.0 * (5_000_000 ** (-1.0 / d)))


def build_function(spec: dict, seed: int) -> HolderFunction:
    """Instantiate (and certify) the function of one seed."""
    _validate_function(spec)
    kind = spec["kind"]
    d = int(spec.get("d", 1))
    x_star = spec.get("x_star")
    if x_star == "random":
        x_star = derive_rng("function", spec, seed).uniform(0.0, 1.0, size=d)
    try:
        if kind == "power_bump":
            f = make_power_bump(d, float(spec.get("alpha", 2.0)), float(spec.get("L", 1.0)), x_star, float(spec.get("h", 1.0)))
        elif kind == "quadratic":
            f = make_quadratic(d, float(spec.get("L", 1.0)), x_star, float(spec.get("h", 1.0)), spec.get("Q"))
        elif kind == "trig_mixture":
            f = make_trig_mixture(d, spec["amplitudes"], spec["frequencies"], spec.get("phases"),
                                  float(spec.get("offset", 0.0)), float(spec.get("alpha", 2.0)))
        else:
            f = make_trig_mixture(d, [0.0], [[0.0] * d], offset=float(spec.get("value", 0.0)))
        return certify(f, _certify_resolution(d))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid function spec: {exc}") from None


def run_cell(cfg: ExperimentConfig, T: int, seed: int) -> RegretTrace:
    f = build_function(cfg.function, seed)
    noise = NoiseModel(cfg.sigma, NoiseKind(cfg.noise))
    oracle = Oracle(f, noise, derive_rng("oracle", cfg.function, cfg.noise, cfg.sigma, seed, T))
    rng = derive_rng("algorithm", cfg.cell_key(), seed, T)
    alpha_in = cfg.alpha if cfg.alpha is not None else f.alpha
    L = cfg.L if cfg.L is not None else max(f.certified_L, 1e-12)
    try:
        if cfg.algorithm == "ucb_meta":
            mcfg = meta.MetaConfig(alpha_in, L, f.d, T, cfg.delta, cfg.sigma, cfg.profile, cfg.points_per_side)
            trace = meta.doubling_run(mcfg, oracle, f.f_star, T, rng) if cfg.doubling else meta.run(mcfg, oracle, f.f_star, rng)
        elif cfg.algorithm == "ucb1_bins":
            trace = baselines.run(T, f.d, oracle, f.f_star, rng)
        elif cfg.algorithm == "corral_meta":
            trace = corral.corral_meta_run(alpha_in, L, f.d, oracle, f.f_star, T, cfg.delta, cfg.sigma, rng,
                                           cfg.profile, cfg.eta_override, cfg.points_per_side)
        else:
            trace = corral.adapt_run(cfg.R, f.d, oracle, f.f_star, T, cfg.delta, cfg.sigma, rng, L,
                                     cfg.profile, cfg.eta_override, cfg.points_per_side)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    trace.meta.update(
        seed=seed, T=T, algorithm=cfg.algorithm, alpha_true=f.alpha, alpha_input=alpha_in,
        d=f.d, config_hash=config_hash(cfg),
    )
    return trace


def _run_cell_args(args) -> RegretTrace:
    return run_cell(*args)


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> list[RegretTrace]:
    """One trace per (horizon, seed), ordered by horizon then seed."""
    return run_many([cfg], workers)


def run_many(cfgs: Sequence[ExperimentConfig], workers: Optional[int] = None) -> list[RegretTrace]:
    jobs = [(cfg, T, s) for cfg in cfgs for T in cfg.horizons for s in cfg.seeds]
    if workers is None:
        workers = max((cfg.workers for cfg in cfgs), default=1)
    if workers <= 1 or len(jobs) <= 1:
        return [_run_cell_args(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_cell_args, jobs, chunksize=1))


def summarize(traces: Iterable[RegretTrace]) -> list[dict]:
    return [{
        "algorithm": tr.meta["algorithm"], "alpha_true": tr.meta["alpha_true"],
        "alpha_input": tr.meta["alpha_input"], "d": tr.meta["d"], "T": tr.meta["T"],
        "seed": tr.meta["seed"], "final_regret": tr.final_regret,
    } for tr in traces]


# --------------------------------------------------------------------------- rate fits


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points: tuple = field(default_factory=tuple)  # ((T, mean regret), ...)


def fit_rate(table: Iterable[tuple[float, float]]) -> RateFit:
    """OLS fit of ln(mean regret) on ln T; points with zero regret are dropped."""
    pts = [(float(T), float(r)) for T, r in table]
    if any(r < 0 for _, r in pts):
        raise ValueError("regrets must be non-negative")
    pts = [(T, r) for T, r in pts if r > 0]
    if len(pts) < 3:
        raise ValueError("fit_rate needs at least 3 points with positive regret")
    logs = np.log(np.array(pts))
    res = stats.linregress(logs[:, 0], logs[:, 1])
    return RateFit(float(res.slope), float(res.intercept), float(res.rvalue**2), tuple(pts))


def mean_regret_table(rows: Iterable[dict]) -> list[tuple[int, float]]:
    by_T: dict[int, list[float]] = {}
    for row in rows:
        by_T.setdefault(int(row["T"]), []).append(float(row["final_regret"]))
    return [(T, float(np.mean(v))) for T, v in sorted(by_T.items())]


def fit_groups(rows: Sequence[dict], keys: Sequence[str]) -> list[tuple[dict, RateFit]]:
    for k in keys:
        if rows and k not in rows[0]:
            raise ConfigError(f"unknown group key {k!r}")
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault(tuple(str(row[k]) for k in keys), []).append(row)
    return [(dict(zip(keys, g)), fit_rate(mean_regret_table(groups[g]))) for g in sorted(groups)]


def per_seed_slopes(rows: Sequence[dict]) -> dict[int, float]:
    by_seed: dict[int, list[dict]] = {}
    for row in rows:
        by_seed.setdefault(int(row["seed"]), []).append(row)
    return {s: fit_rate(mean_regret_table(r)).slope for s, r in sorted(by_seed.items())}


# --------------------------------------------------------------------------- CSV


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write(path, header: list[str], rows: Iterable[list]) -> None:
    """Write to a path, or to an already open text stream."""
    if hasattr(path, "write"):
        _write_rows(path, header, rows)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(fh, header, rows)


def _write_rows(fh, header, rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def write_traces(traces: Sequence[RegretTrace], path) -> None:
    with_base = any(tr.chosen_base is not None for tr in traces)
    header = TRACE_COLUMNS + (["chosen_base"] if with_base else [])

    def rows():
        for tr in traces:
            for i in range(len(tr)):
                row = [tr.meta.get("seed", 0), tr.meta.get("T", len(tr)), i + 1, int(tr.bins[i]),
                       ";".join(fmt(float(c)) for c in tr.xs[i]), float(tr.ys[i]), float(tr.cum_regret[i])]
                if with_base:
                    row.append(int(tr.chosen_base[i]) if tr.chosen_base is not None else -1)
                yield row

    _write(path, header, rows())


STEP_LOG_COLUMNS = ["t", "candidate", "ucb", "y", "theta_norm"]


def write_step_log(rows: Sequence[tuple], path) -> None:
    """Per-step record of one LinUCB instance (see ``MisspecLinUCB(record=True)``)."""
    _write(path, STEP_LOG_COLUMNS, rows)


def write_summary(rows: Sequence[dict], path) -> None:
    _write(path, SUMMARY_COLUMNS, ([r[c] for c in SUMMARY_COLUMNS] for r in rows))


def write_fits(fits: Sequence[tuple[dict, RateFit]], path, keys: Sequence[str] = ()) -> None:
    header = list(keys) + FIT_COLUMNS

    def rows():
        for group, fit in fits:
            yield [group.get(k, "") for k in keys] + [
                fit.slope, fit.intercept, fit.r_squared, len(fit.points),
                ";".join(fmt(int(T)) for T, _ in fit.points), ";".join(fmt(r) for _, r in fit.points)]

    _write(path, header, rows())


def emit_csv(items, path, keys: Sequence[str] = ()) -> None:
    """Write traces, summary rows or (group, RateFit) pairs; an empty list gives a trace header."""
    items = list(items)
    if not items or isinstance(items[0], RegretTrace):
        write_traces(items, path)
    elif isinstance(items[0], dict):
        write_summary(items, path)
    elif isinstance(items[0], RateFit):
        write_fits([({}, f) for f in items], path)
    else:
        write_fits(items, path, keys)


def _parse(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: _parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def read_traces(path) -> list[dict]:
    rows = read_csv(path)
    for row in rows:
        row["x"] = [float(c) for c in str(row["x"]).split(";")]
    return rows


# --------------------------------------------------------------------------- paired comparison


@dataclass(frozen=True)
class Comparison:
    meta_fit: RateFit
    baseline_fit: RateFit
    meta_seed_slopes: dict
    baseline_seed_slopes: dict

    @property
    def paired_wins(self) -> int:
        return sum(self.meta_seed_slopes[s] < self.baseline_seed_slopes[s] for s in self.meta_seed_slopes)


def compare(cfg: ExperimentConfig, workers: Optional[int] = None) -> tuple[Comparison, list[dict]]:
    """Run ``cfg`` and the ucb1_bins baseline on matched seeds and compare fitted slopes."""
    if cfg.algorithm == "ucb1_bins":
        raise ConfigError("compare needs a non-baseline algorithm")
    if len(cfg.horizons) < 3:
        raise ConfigError("compare needs at least 3 horizons to fit slopes")
    base_cfg = replace(cfg, algorithm="ucb1_bins")
    traces = run_many([cfg, base_cfg], workers)
    rows = summarize(traces)
    mine = [r for r in rows if r["algorithm"] == cfg.algorithm]
    theirs = [r for r in rows if r["algorithm"] == "ucb1_bins"]
    comp = Comparison(fit_rate(mean_regret_table(mine)), fit_rate(mean_regret_table(theirs)),
                      per_seed_slopes(mine), per_seed_slopes(theirs))
    return comp, rows


def write_comparison(comp: Comparison, path) -> None:
    rows = [["mean", comp.meta_fit.slope, comp.baseline_fit.slope, int(comp.meta_fit.slope < comp.baseline_fit.slope)]]
    for s, m in comp.meta_seed_slopes.items():
        b = comp.baseline_seed_slopes[s]
        rows.append([s, m, b, int(m < b)])
    _write(path, ["seed", "meta_slope", "baseline_slope", "meta_lower"], rows)


def slope_summary(fit: RateFit) -> str:
    return f"slope={fit.slope:.4f} intercept={fit.intercept:.4f} r2={fit.r_squared:.4f}"


def log_range(lo_exp: int, hi_exp: int) -> list[int]:
    return [2**k for k in range(lo_exp, hi_exp + 1)]


__all__ = [
    "ALGORITHMS", "ExperimentConfig", "RateFit", "Comparison", "config_from_dict", "expand_sweep", "load_json",
    "derive_rng", "config_hash", "build_function", "run_cell", "run_experiment", "run_many", "summarize",
    "fit_rate", "mean_regret_table", "fit_groups", "per_seed_slopes", "emit_csv", "write_traces",
    "write_summary", "write_fits", "read_csv", "read_traces", "compare", "write_comparison", "fmt",
    "log_range", "slope_summary",
]
