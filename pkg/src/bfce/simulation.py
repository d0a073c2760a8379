"""Monte-Carlo harness: synthetic streams, repeated fills, error metrics.

Each trial fills one filter from its own synthetic stream and records, the
first time the counter reaches each checkpoint ``s``, the exact number of
distinct elements seen so far together with the corrected and baseline
estimates.  Trial ``i`` uses seed ``base_seed + i`` for both the hash family
and the stream, so a table is a pure function of its configuration.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from collections.abc import Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .estimator import CORRECTED, PAPAPETROU, estimate_papapetrou, estimate_swamidass
from .exceptions import InvalidParameters, StreamExhausted
from .filter import BloomFilter
from .fpp import approx_fpp
from .hashing import MASK64

CSV_COLUMNS = ("estimator", "s", "trials", "mbe", "mbe_std", "mae", "mae_std", "rmse",
               "mean_true_n", "std_true_n", "predicted_std", "mean_stream_len")

THREADS_ENV = "BFCE_THREADS"


@dataclass(frozen=True)
class UniverseSpec:
    """Synthetic stream description.

    ``p_smax == 1`` gives a stream of distinct identifiers.  Otherwise
    identifiers are drawn uniformly with replacement from a universe of
    ``round(s_max / (1 - p_smax))`` elements, so that a fresh draw is new with
    probability about ``p_smax`` once ``s_max`` elements have been seen.
    """

    s_max: int
    p_smax: float = 1.0

    def __post_init__(self):
        if self.s_max < 1:
            raise InvalidParameters("s_max must be >= 1")
        if not 0.0 < self.p_smax <= 1.0:
            raise InvalidParameters(f"p_smax must lie in (0, 1], got {self.p_smax}")

    @property
    def replacement(self) -> bool:
        return self.p_smax < 1.0

    @property
    def universe_size(self) -> int | None:
        if not self.replacement:
            return None
        return round(self.s_max / (1.0 - self.p_smax))


def _id_map(rng: np.random.Generator) -> tuple[np.uint64, np.uint64]:
    # offset + i * odd is a bijection on 64-bit integers
    offset, mult = rng.integers(0, 2 ** 64, size=2, dtype=np.uint64)
    return offset, mult | np.uint64(1)


def _id_chunks(spec: UniverseSpec, seed: int, first: int = 4096,
               chunk: int = 4096) -> Iterator[np.ndarray]:
    rng = np.random.default_rng(seed & MASK64)
    offset, mult = _id_map(rng)
    size = first
    start = 0
    with np.errstate(over="ignore"):
        while True:
            if spec.replacement:
                idx = rng.integers(0, spec.universe_size, size=size, dtype=np.uint64)
            else:
                idx = np.arange(start, start + size, dtype=np.uint64)
                start += size
            yield offset + idx * mult
            size = chunk


def generate_stream(spec: UniverseSpec, seed: int) -> Iterator[int]:
    """Lazy stream of 64-bit element identifiers (hash via ``encode_id``)."""
    for ids in _id_chunks(spec, seed):
        yield from ids.tolist()


@dataclass(frozen=True)
class TrialRecord:
    s: int
    true_n: int
    corrected: float
    corrected_std: float
    papapetrou: float
    swamidass: float
    stream_len: int


class _Feeder:
    """Iterates (identifier, index row) pairs off a stream; tracks position and distinct count."""

    def __init__(self, filt: BloomFilter, spec: UniverseSpec, seed: int, first: int):
        self.spec = spec
        self.seen: set[int] | None = set() if spec.replacement else None
        self.pos = 0
        self.n = 0
        family = filt.family
        self._pairs = itertools.chain.from_iterable(
            zip(ids.tolist(), family.indices_u64(ids).tolist())
            for ids in _id_chunks(spec, seed, first=first))

    def __iter__(self):
        return self._pairs

    def exhausted(self) -> bool:
        # every universe element seen: the counter can never move again
        return self.seen is not None and self.n >= self.spec.universe_size


def _record(filt: BloomFilter, feeder: _Feeder) -> TrialRecord:
    acc = filt.correction
    m, k, ones = filt.m, filt.k, filt.ones
    return TrialRecord(
        s=filt.s, true_n=feeder.n, corrected=filt.s + acc.sum_mean,
        corrected_std=math.sqrt(acc.sum_var),
        papapetrou=estimate_papapetrou(m, k, ones) if ones < m else math.inf,
        swamidass=estimate_swamidass(m, k, ones) if ones < m else math.inf,
        stream_len=feeder.pos)


def _fill(filt: BloomFilter, feeder: _Feeder, checkpoints: Sequence[int], stop_s: int,
          batch: int = 0) -> list[TrialRecord]:
    records = []
    pending = sorted(set(checkpoints))
    if batch:
        first = {}
        for ident, row in feeder:
            feeder.pos += 1
            if ident not in first:
                first[ident] = row
                if len(first) == batch:
                    break
        feeder.n = len(first)
        if feeder.seen is not None:
            feeder.seen.update(first)
        filt.insert_batch_indices(first.values())
    i = 0
    while i < len(pending) and pending[i] <= filt.s:
        # checkpoints already covered by the batch
        records.append(_record(filt, feeder))
        i += 1
    if filt.s >= stop_s:
        return records
    seen = feeder.seen
    insert = filt.insert_counting_indices
    next_cp = pending[i] if i < len(pending) else None
    for ident, row in feeder:
        feeder.pos += 1
        if seen is None:
            feeder.n += 1
        elif ident not in seen:
            seen.add(ident)
            feeder.n += 1
        if insert(row):
            s = filt.s
            if s == next_cp:
                records.append(_record(filt, feeder))
                i += 1
                next_cp = pending[i] if i < len(pending) else None
            if s >= stop_s:
                return records
        elif seen is not None and feeder.exhausted():
            raise StreamExhausted(
                f"universe of {feeder.spec.universe_size} exhausted at s={filt.s} < {stop_s}")
    raise AssertionError("unreachable: streams are unbounded")


def _check_trial_args(spec: UniverseSpec, checkpoints: Sequence[int], stop_s: int):
    if stop_s < 1:
        raise InvalidParameters("stop_s must be >= 1")
    if checkpoints and max(checkpoints) > stop_s:
        raise InvalidParameters("checkpoints must not exceed stop_s")
    if any(c < 1 for c in checkpoints):
        raise InvalidParameters("checkpoints must be >= 1")
    if spec.replacement and stop_s >= spec.universe_size:
        raise StreamExhausted(
            f"stop_s={stop_s} cannot be reached from a universe of {spec.universe_size}")


def run_trial(m: int, k: int, seed: int, spec: UniverseSpec, checkpoints: Sequence[int],
              stop_s: int) -> list[TrialRecord]:
    """Fill one filter until ``s == stop_s``; one record per checkpoint.

    Raises:
        StreamExhausted: the universe is too small to reach ``stop_s``.
    """
    _check_trial_args(spec, checkpoints, stop_s)
    filt = BloomFilter(m, k, seed & MASK64)
    feeder = _Feeder(filt, spec, seed, first=stop_s + 64)
    return _fill(filt, feeder, checkpoints, stop_s)


@dataclass(frozen=True)
class MetricsRow:
    estimator: str
    s: int
    trials: int
    mbe: float
    mbe_std: float
    mae: float
    mae_std: float
    rmse: float
    mean_true_n: float
    std_true_n: float
    predicted_std: float
    mean_stream_len: float

    @property
    def std_of_bias(self) -> float:
        return self.mbe_std


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


@dataclass
class TrialMetrics:
    """Per-checkpoint metrics for each estimator.

    Errors are ``estimate - true_n``; standard deviations use ``ddof=1``.
    """

    trials: int
    rows: list[MetricsRow] = field(default_factory=list)

    def row(self, estimator: str, s: int) -> MetricsRow:
        for r in self.rows:
            if r.estimator == estimator and r.s == s:
                return r
        raise KeyError((estimator, s))

    def checkpoints(self) -> list[int]:
        return sorted({r.s for r in self.rows})

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
        return out.getvalue()

    def to_json_lines(self) -> str:
        return "".join(json.dumps(asdict(r)) + "\n" for r in self.rows)


def aggregate(per_trial: Sequence[Sequence[TrialRecord]],
              estimators: Sequence[str] = (CORRECTED, PAPAPETROU)) -> TrialMetrics:
    trials = len(per_trial)
    if trials < 2:
        raise InvalidParameters("need at least two trials")
    n_cp = len(per_trial[0])
    metrics = TrialMetrics(trials)
    for est in estimators:
        for j in range(n_cp):
            recs = [t[j] for t in per_trial]
            s = recs[0].s
            true_n = np.array([r.true_n for r in recs], dtype=np.float64)
            est_v = np.array([getattr(r, est) for r in recs], dtype=np.float64)
            err = est_v - true_n
            abs_err = np.abs(err)
            metrics.rows.append(MetricsRow(
                estimator=est, s=s, trials=trials,
                mbe=float(err.mean()), mbe_std=float(err.std(ddof=1)),
                mae=float(abs_err.mean()), mae_std=float(abs_err.std(ddof=1)),
                rmse=float(np.sqrt(np.mean(err * err))),
                mean_true_n=float(true_n.mean()), std_true_n=float(true_n.std(ddof=1)),
                predicted_std=float(np.mean([r.corrected_std for r in recs])),
                mean_stream_len=float(np.mean([r.stream_len for r in recs]))))
    return metrics


def default_checkpoints(stop_s: int, step: int = 500) -> list[int]:
    return sorted(set(range(step, stop_s + 1, step)) | {stop_s})


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise InvalidParameters(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InvalidParameters(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _trial_job(args):
    return run_trial(*args)


def _map_trials(fn, jobs: list, workers: int | None):
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) < 2:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def run_experiment(m: int, k: int, spec: UniverseSpec, trials: int,
                   checkpoints: Sequence[int] | None = None, stop_s: int | None = None,
                   base_seed: int = 0, workers: int | None = None) -> TrialMetrics:
    """Run ``trials`` independent fills and aggregate per checkpoint.

    ``stop_s`` defaults to ``spec.s_max`` and ``checkpoints`` to every 500
    states plus ``stop_s``.  ``workers`` overrides ``BFCE_THREADS``.
    """
    if trials < 2:
        raise InvalidParameters("trials must be >= 2")
    stop_s = spec.s_max if stop_s is None else stop_s
    checkpoints = default_checkpoints(stop_s) if checkpoints is None else sorted(set(checkpoints))
    _check_trial_args(spec, checkpoints, stop_s)
    jobs = [(m, k, base_seed + i, spec, checkpoints, stop_s) for i in range(trials)]
    return aggregate(_map_trials(_trial_job, jobs, workers))


@dataclass(frozen=True)
class BatchResult:
    """Mean of ``true_n - s`` at ``stop_s`` for the two filling methods."""

    mean_error_batch: float
    mean_error_one_by_one: float
    errors_batch: tuple[float, ...]
    errors_one_by_one: tuple[float, ...]


def _batch_job(args):
    m, k, b, seed, spec, stop_s = args
    out = []
    for batch in (b, 0):
        filt = BloomFilter(m, k, seed & MASK64)
        feeder = _Feeder(filt, spec, seed, first=stop_s + 64)
        rec = _fill(filt, feeder, [stop_s], stop_s, batch=batch)[-1]
        out.append(rec.true_n - rec.s)
    return tuple(out)


def run_batch_experiment(m: int, k: int, b: int, trials: int, stop_s: int,
                         base_seed: int = 0, spec: UniverseSpec | None = None,
                         workers: int | None = None) -> BatchResult:
    """Batch-start filling against plain one-by-one filling on the same streams.

    The batch arm inserts the first ``b`` distinct stream elements at once
    and continues one element at a time; the other arm consumes the same
    stream one element at a time throughout.
    """
    if not 0 <= b < stop_s:
        raise InvalidParameters("need 0 <= b < stop_s")
    if trials < 1:
        raise InvalidParameters("trials must be >= 1")
    spec = UniverseSpec(stop_s) if spec is None else spec
    _check_trial_args(spec, [stop_s], stop_s)
    jobs = [(m, k, b, base_seed + i, spec, stop_s) for i in range(trials)]
    pairs = _map_trials(_batch_job, jobs, workers)
    eb = tuple(float(p[0]) for p in pairs)
    eo = tuple(float(p[1]) for p in pairs)
    return BatchResult(float(np.mean(eb)), float(np.mean(eo)), eb, eo)


def overload_sweep(m: int, k: int, trials: int, s_values: Sequence[int],
                   base_seed: int = 0, workers: int | None = None) -> TrialMetrics:
    """Distinct-stream fills past the design capacity, up to ``max(s_values)``."""
    s_values = sorted(set(s_values))
    if not s_values:
        raise InvalidParameters("s_values must not be empty")
    top = s_values[-1]
    if approx_fpp(m, k, top) >= 0.5:
        raise InvalidParameters(f"FPP at s={top} is >= 0.5; sweep out of range")
    return run_experiment(m, k, UniverseSpec(top), trials, s_values, top, base_seed, workers)
