"""Experiment orchestration: repeated private runs, sensitivity probe,
accuracy table and throughput timing, with CSV output."""

from __future__ import annotations

import csv
import logging
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from dpfrugal import mechanisms as mech
from dpfrugal.estimator import (
    InitPolicy,
    QuantizationScheme,
    coupled_fold,
    dequantize,
    new_estimator,
    process_stream,
    quantize_array,
    warm_up,
)
from dpfrugal.oracle import RankedSample, exact_quantile, rank, target_rank
from dpfrugal.rng import COINS, NOISE, PROBE, substream
from dpfrugal.streams import Normal, dataset_label, generate

log = logging.getLogger(__name__)

# Table 2 defaults; n is the CI-scale default, FULL_N the full-reproduction one
DEFAULT_Q = 0.99
DEFAULT_N = 1_000_000
FULL_N = 10_000_000
DEFAULT_EPSILON = 1.0
DEFAULT_DELTA = 0.04
DEFAULT_RHO = 1.0
DEFAULT_REPS = 10
DEFAULT_ORACLE_CAP = 100_000_000
THROUGHPUT_BUFFER_CAP = 10_000_000

SWEEP_VALUES = {
    "q": [0.1, 0.3, 0.5, 0.99],
    "n": [10_000_000, 50_000_000, 75_000_000, 100_000_000],
    "epsilon": [0.1, 0.5, 1.0, 2.0],
    "delta": [0.01, 0.04, 0.08, 0.1],
    "rho": [0.1, 0.5, 1.0, 5.0],
    "dist": ["d1", "d2", "d3", "d4", "d5", "d6", "d7", "d8"],
}


def make_mechanism(name: str, epsilon: float = DEFAULT_EPSILON, delta: float = DEFAULT_DELTA,
                   rho: float = DEFAULT_RHO):
    name = name.lower()
    if name == "laplace":
        return mech.Laplace(epsilon)
    if name in ("gauss", "gaussian"):
        return mech.Gaussian(epsilon, delta)
    if name == "zcdp":
        return mech.Zcdp(rho)
    raise ValueError(f"unknown mechanism {name!r}; use laplace, gauss or zcdp")


@dataclass(frozen=True)
class ExperimentConfig:
    dist: object = field(default_factory=Normal)
    n: int = DEFAULT_N
    q: float = DEFAULT_Q
    mechanism: object = field(default_factory=lambda: mech.Laplace(DEFAULT_EPSILON))
    reps: int = DEFAULT_REPS
    master_seed: int = 0
    scheme: QuantizationScheme = QuantizationScheme()
    init_policy: InitPolicy = InitPolicy.ZERO
    oracle_cap: int = DEFAULT_ORACLE_CAP
    output: Path | None = None
    items: np.ndarray | None = None  # replay a fixed stream instead of generating one
    label: str | None = None

    def __post_init__(self):
        if self.items is not None:
            object.__setattr__(self, "n", int(len(self.items)))
        if self.n < 1:
            raise ValueError(f"stream length must be >= 1, got {self.n}")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"quantile must lie in [0, 1], got {self.q}")
        if self.master_seed < 0:
            raise ValueError("seed must be non-negative")
        if self.oracle_cap < 0:
            raise ValueError("oracle cap must be non-negative")


@dataclass
class RunRecord:
    rep: str
    dataset: str
    mechanism: str
    q: float
    n: int
    epsilon: float | None
    delta: float | None
    rho: float | None
    true_quantile: float | None
    raw_estimate: float
    private_estimate: float
    relative_error: float | None
    rank_error_fraction: float | None
    updates_per_sec: float
    saturation_count: float
    seed: int
    warning: str = ""


COLUMNS = [f.name for f in fields(RunRecord)]


def relative_error(released: float, truth: float) -> float:
    return abs(released - truth) / max(abs(truth), 1.0)


def _mechanism_params(spec) -> tuple:
    return (getattr(spec, "epsilon", None), getattr(spec, "delta", None), getattr(spec, "rho", None))


def run_single(config: ExperimentConfig, rep: int) -> RunRecord:
    """One repetition: stream, fold, release once, score."""
    scheme = config.scheme
    coins = substream(config.master_seed, rep, COINS)
    state = new_estimator(config.q, config.init_policy)
    score = config.n <= config.oracle_cap
    kept = []
    loop_time = 0.0
    saturation = 0
    if config.items is not None:
        chunks = [np.asarray(config.items, dtype=np.int64)]
    else:
        stream = generate(config.dist, config.n, config.master_seed, scheme, rep)
        chunks = stream.chunks()
    for chunk in chunks:
        if score:
            kept.append(chunk)
        t0 = time.perf_counter()
        state = process_stream(state, chunk, coins)
        loop_time += time.perf_counter() - t0
    if config.items is None:
        saturation = stream.saturation_count

    released = mech.privatize(state.m_tilde, config.mechanism, substream(config.master_seed, rep, NOISE))
    raw = dequantize(state.m_tilde, scheme)
    private = dequantize(released, scheme)
    eps, delta, rho = _mechanism_params(config.mechanism)
    record = RunRecord(
        rep=str(rep),
        dataset=config.label or dataset_label(config.dist),
        mechanism=config.mechanism.label,
        q=config.q,
        n=config.n,
        epsilon=eps,
        delta=delta,
        rho=rho,
        true_quantile=None,
        raw_estimate=raw,
        private_estimate=private,
        relative_error=None,
        rank_error_fraction=None,
        updates_per_sec=config.n / max(loop_time, 1e-9),
        saturation_count=saturation,
        seed=config.master_seed,
    )
    if score:
        sample = RankedSample(np.concatenate(kept))
        truth = dequantize(exact_quantile(sample, config.q), scheme)
        record.true_quantile = truth
        record.relative_error = relative_error(private, truth)
        record.rank_error_fraction = abs(rank(sample, released) - target_rank(config.n, config.q)) / config.n
    else:
        record.warning = "oracle_skipped"
        log.warning("n=%d exceeds oracle cap %d; error columns left blank", config.n, config.oracle_cap)
    return record


def _mean(values):
    values = [v for v in values if v is not None]
    if not values:
        return None
    return math.fsum(values) / len(values)


def aggregate(records: list[RunRecord]) -> RunRecord:
    """Mean row over repetitions; non-numeric columns are copied from the first row."""
    first = records[0]
    numeric = ("true_quantile", "raw_estimate", "private_estimate", "relative_error",
               "rank_error_fraction", "updates_per_sec", "saturation_count")
    means = {k: _mean([getattr(r, k) for r in records]) for k in numeric}
    warnings = sorted({r.warning for r in records if r.warning})
    return replace(first, rep="mean", warning=";".join(warnings), **means)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> tuple[list[RunRecord], RunRecord]:
    """Run every repetition, then append the mean row.

    Repetitions own disjoint substreams, so running them on ``workers``
    threads gives the same rows (apart from timings) as running them serially.
    """
    warm_up()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            records = list(pool.map(lambda rep: run_single(config, rep), range(config.reps)))
    else:
        records = [run_single(config, rep) for rep in range(config.reps)]
    mean = aggregate(records)
    if config.output is not None:
        write_csv(config.output, records + [mean])
    return records, mean


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(f, records: list[RunRecord]) -> None:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in records:
        w.writerow([_fmt(v) for v in asdict(r).values()])


def write_csv(path, records: list[RunRecord]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        write_rows(f, records)


def sweep(param: str, values: list, base: ExperimentConfig, mechanism: str = "laplace",
          epsilon: float = DEFAULT_EPSILON, delta: float = DEFAULT_DELTA, rho: float = DEFAULT_RHO,
          output=None) -> list[RunRecord]:
    """Vary one parameter, holding the rest at ``base``; returns every per-rep and mean row."""
    from dpfrugal.streams import parse_distribution

    if param not in SWEEP_VALUES:
        raise ValueError(f"cannot sweep {param!r}; choose from {sorted(SWEEP_VALUES)}")
    rows = []
    for value in values:
        kw = {"epsilon": epsilon, "delta": delta, "rho": rho}
        cfg = base
        if param in kw:
            kw[param] = float(value)
        elif param == "q":
            cfg = replace(cfg, q=float(value))
        elif param == "n":
            cfg = replace(cfg, n=int(float(value)))
        else:
            cfg = replace(cfg, dist=parse_distribution(str(value)))
        cfg = replace(cfg, mechanism=make_mechanism(mechanism, **kw), output=None)
        records, mean = run_experiment(cfg)
        rows.extend(records + [mean])
    if output is not None:
        write_csv(output, rows)
    return rows


@dataclass
class ProbeResult:
    immediate_max: int
    persistent_max: int
    trials: int
    attained: int  # trials whose immediate gap equals 2


def sensitivity_probe(dist, n: int, trials: int, seed: int, q: float = 0.5,
                      scheme: QuantizationScheme = QuantizationScheme()) -> ProbeResult:
    """Empirical global sensitivity under coupled coins.

    Each trial draws a stream, replaces one uniformly chosen position with a
    fresh draw from the same distribution, and runs both streams with the
    same coin sequence.
    """
    if n < 2:
        raise ValueError("sensitivity probe needs n >= 2")
    if trials < 1:
        raise ValueError("sensitivity probe needs at least one trial")
    warm_up()
    imm_max = pers_max = attained = 0
    for t in range(trials):
        items = generate(dist, n, seed, scheme, rep=t).items()
        coins = substream(seed, t, COINS).random(n)
        pick = substream(seed, t, PROBE)
        pos = int(pick.integers(0, n))
        repl, _ = quantize_array(dist.sample(pick, 1), scheme)
        imm, pers = coupled_fold(np.int64(0), q, items, coins, pos, np.int64(repl[0]))
        imm_max = max(imm_max, int(imm))
        pers_max = max(pers_max, int(pers))
        attained += int(imm) == 2
    return ProbeResult(imm_max, pers_max, trials, attained)


@dataclass
class AccuracyRow:
    mechanism: str
    params: str
    beta: float
    alpha: float
    one_sided: float  # fraction of draws with noise >= alpha
    two_sided: float  # fraction of draws with |noise| >= alpha
    draws: int


def default_mechanisms():
    return [mech.Laplace(DEFAULT_EPSILON), mech.Gaussian(DEFAULT_EPSILON, DEFAULT_DELTA), mech.Zcdp(DEFAULT_RHO)]


def accuracy_report(mechanisms=None, beta: float = 0.04, draws: int = 100_000,
                    seed: int = 0) -> list[AccuracyRow]:
    rows = []
    for i, spec in enumerate(mechanisms or default_mechanisms()):
        alpha = spec.accuracy(beta).alpha
        noise = spec.sample(substream(seed, i, NOISE), draws)
        eps, delta, rho = _mechanism_params(spec)
        params = " ".join(f"{k}={v}" for k, v in (("epsilon", eps), ("delta", delta), ("rho", rho)) if v is not None)
        rows.append(AccuracyRow(
            mechanism=spec.label,
            params=f"{params} s={spec.sensitivity}",
            beta=beta,
            alpha=alpha,
            one_sided=float(np.mean(noise >= alpha)),
            two_sided=float(np.mean(np.abs(noise) >= alpha)),
            draws=draws,
        ))
    return rows


def loop_seconds(buffer: np.ndarray, n: int, q: float, seed: int = 0) -> float:
    """Wall time to push ``n`` items through one estimator, cycling ``buffer``."""
    coins = substream(seed, 0, COINS)
    state = new_estimator(q)
    t0 = time.perf_counter()
    left = n
    while left > 0:
        k = min(left, buffer.shape[0])
        state = process_stream(state, buffer[:k], coins)
        left -= k
    return time.perf_counter() - t0


def throughput_bench(config: ExperimentConfig) -> float:
    """Median updates/s over ``config.reps`` timed loops; generation is excluded."""
    size = min(config.n, THROUGHPUT_BUFFER_CAP)
    buffer = generate(config.dist, size, config.master_seed, config.scheme).items()
    warm_up()
    times = [loop_seconds(buffer, config.n, config.q, config.master_seed + r) for r in range(config.reps)]
    return config.n / statistics.median(times)
