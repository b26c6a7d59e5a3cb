"""Synchronization mapping and the simulator / data-holder audit pair.

The mapping couples the noisy slice sizes of two neighboring executions so a
single step can absorb their difference. The simulator runs the slicing
session on one dataset while only querying the bit-holding side when the
differing element actually matters; holder-call counts and output
distributions are the executable form of the privacy argument, so this module
is the audit harness.
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .engine import OrderMap, RscSession, SliceComputation, as_elements, select_and_compute
from .mechanisms import PrivacyBudget, sample_geometric

__all__ = [
    "SyncOutcome",
    "SyncDist",
    "SimTranscript",
    "AuditResult",
    "DataHolder",
    "sync_threshold",
    "sync_gamma",
    "sync_map",
    "sync_map_exact_dist",
    "holder_query",
    "simulate",
    "direct_run",
    "audit_call_count",
    "estimate_tv",
]


class SyncOutcome(NamedTuple):
    alpha: int
    beta: int  # 1 = synchronized


class SyncDist(NamedTuple):
    outcomes: List[Tuple[Tuple[int, int], float]]  # ((alpha, beta), probability)
    tail: float  # aggregate mass on alpha > cutoff


def _check_epsilon(epsilon: float):
    if not (0.0 < epsilon <= 1.0):
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")


def sync_threshold(epsilon: float, i: int) -> float:
    """t_i = max(0, e^{-i eps} + e^{-(i+1) eps} - 1); non-increasing, <= e^{-(i+1) eps}."""
    _check_epsilon(epsilon)
    if i < 0:
        raise ValueError(f"i must be nonnegative, got {i}")
    return max(0.0, math.exp(-i * epsilon) + math.exp(-(i + 1) * epsilon) - 1.0)


def sync_gamma(epsilon: float) -> int:
    """Smallest i with t_i = 0; beyond it the mapping synchronizes surely."""
    _check_epsilon(epsilon)
    i = 0
    while sync_threshold(epsilon, i) > 0.0:
        i += 1
    return i


def sync_map(b: int, m: int, epsilon: float, rng: np.random.Generator) -> SyncOutcome:
    """Sample (alpha, beta) from R^b_eps(m).

    Support: b = 0 keeps alpha = m; b = 1 has alpha in {m, m-1} with
    alpha = m - 1 exactly when beta = 1.
    """
    _check_epsilon(epsilon)
    if b not in (0, 1):
        raise ValueError(f"b must be 0 or 1, got {b}")
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    if b == 1 and m == 0:
        return SyncOutcome(0, 0)
    t_m = sync_threshold(epsilon, m)
    if b == 0:
        stay = math.exp(-epsilon) if m == 0 else t_m * math.exp(m * epsilon)
        if rng.random() < stay:
            return SyncOutcome(m, 0)
        return SyncOutcome(m, 1)
    stay = t_m * math.exp((m + 1) * epsilon)
    if rng.random() < stay:
        return SyncOutcome(m, 0)
    return SyncOutcome(m - 1, 1)


def sync_map_exact_dist(b: int, epsilon: float, cutoff: int) -> SyncDist:
    """Exact distribution of R^b_eps(Geom(1 - e^-eps)) up to alpha = cutoff.

    Outcomes with alpha > cutoff are aggregated into the tail mass;
    listed probabilities plus the tail sum to 1.
    """
    _check_epsilon(epsilon)
    gamma = sync_gamma(epsilon)
    if cutoff < gamma + 1:
        raise ValueError(f"cutoff must be at least gamma + 1 = {gamma + 1}, got {cutoff}")

    def g(i: int) -> float:
        return math.exp(-i * epsilon) * (1.0 - math.exp(-epsilon))

    out = {}
    if b == 0:
        for i in range(cutoff + 1):
            stay = math.exp(-epsilon) if i == 0 else sync_threshold(epsilon, i) * math.exp(i * epsilon)
            out[(i, 0)] = g(i) * stay
            out[(i, 1)] = g(i) * (1.0 - stay)
        tail = math.exp(-(cutoff + 1) * epsilon)
    else:
        out[(0, 0)] = g(0)
        for i in range(1, cutoff + 2):
            stay = sync_threshold(epsilon, i) * math.exp((i + 1) * epsilon)
            if i <= cutoff:
                out[(i, 0)] = out.get((i, 0), 0.0) + g(i) * stay
            out[(i - 1, 1)] = g(i) * (1.0 - stay)
        tail = math.exp(-(cutoff + 2) * epsilon)
    outcomes = sorted(out.items())
    return SyncDist(outcomes, tail)


@dataclass
class SimTranscript:
    published: list
    holder_calls: int
    holder_steps: List[int]
    final_status: int
    final_diff: Optional[int]


def _apply_map(order_map: OrderMap, elements: Sequence[int]) -> List[int]:
    if len(elements) == 0:
        return []
    arr = np.asarray(elements, dtype=np.uint64)
    return [int(v) for v in order_map.apply(arr)]


def _diff_and_rank(short: List[int], long: List[int]) -> Tuple[int, int]:
    # first position where the mapped lists disagree; the inserted element
    # sits there and all later positions shift by one
    if len(long) != len(short) + 1:
        raise ValueError("order map is not adjacency preserving: output sizes differ by "
                         f"{len(long) - len(short)}")
    p0 = len(short)
    for j in range(len(short)):
        if short[j] != long[j]:
            p0 = j
            break
    if short[p0:] != long[p0 + 1:]:
        raise ValueError("order map is not adjacency preserving: suffixes disagree")
    return long[p0], p0 + 1


class DataHolder:
    """Holds the private bit; answers slice queries and tries to synchronize.

    First-phase queries slice the true dataset under the supplied map and
    report (q_hat, beta, result); slices are stored by step for the
    delayed-compute phase.
    """

    def __init__(self, b: int, epsilon: float, rng: np.random.Generator):
        _check_epsilon(epsilon)
        if b not in (0, 1):
            raise ValueError(f"b must be 0 or 1, got {b}")
        self.b = b
        self.epsilon = epsilon
        self._rng = rng
        self.stored = {}

    def query(self, data: Sequence[int], x: int, q: int, algorithm: Optional[Callable],
              order_map: OrderMap, step: Optional[int] = None):
        delta = sample_geometric(self.epsilon, self._rng)
        m_hat = q + delta
        base = list(data) + ([x] if self.b == 1 else [])
        ordered = _apply_map(order_map, base)
        slice_part = ordered[:m_hat]
        self.stored[step] = slice_part
        result = algorithm(np.asarray(slice_part, dtype=np.uint64)) if algorithm else None
        alpha, beta = sync_map(self.b, delta, self.epsilon, self._rng)
        return q + alpha, beta, result

    def delayed(self, step: int, algorithm: Callable):
        return algorithm(np.asarray(self.stored[step], dtype=np.uint64))


def holder_query(b: int, data, x: int, q: int, algorithm, order_map: OrderMap,
                 epsilon: float, rng: np.random.Generator):
    """One-shot data-holder query; returns (q_hat, beta, result)."""
    if q < 0:
        raise ValueError(f"q must be nonnegative, got {q}")
    return DataHolder(b, epsilon, rng).query(list(as_elements(data)), x, q,
                                             algorithm, order_map)


def simulate(data, x: int, b: int, script: Sequence[SliceComputation], epsilon: float,
             rng: np.random.Generator, delayed: Optional[Sequence[Tuple[int, Callable]]] = None
             ) -> SimTranscript:
    """Run the slicing session on (data, data + {x}) chosen by the hidden bit b.

    The simulator tracks (current data, diff element, status) and only
    queries the holder on steps where the slice depends on b; published
    results are distributed exactly as a direct run on the b-selected
    dataset. Optional second-phase requests (step index, algorithm) route to
    the simulator's stored slice or to the holder per where the true slice
    lives.
    """
    _check_epsilon(epsilon)
    holder = DataHolder(b, epsilon, rng)
    current = [int(v) for v in as_elements(data)]
    x_cur = int(x)
    status = 0
    published = []
    holder_steps = []
    sim_slices = {}

    for i, spec in enumerate(script):
        mapped = _apply_map(spec.map, current)
        if status == 0:
            mapped_with = _apply_map(spec.map, current + [x_cur])
            if mapped == mapped_with:
                status = 1  # map eliminated the diff element
        if status == 1:
            m_hat = spec.m + sample_geometric(epsilon, rng)
            slice_part = mapped[:m_hat]
            current = mapped[m_hat:]
            sim_slices[i] = slice_part
            result = spec.algorithm(np.asarray(slice_part, dtype=np.uint64)) \
                if spec.algorithm else None
        else:
            m_hat = spec.m + sample_geometric(epsilon, rng)
            x_prime, p = _diff_and_rank(mapped, mapped_with)
            if m_hat < p:
                # this round does not involve the diff element
                slice_part = mapped[:m_hat]
                current = mapped[m_hat:]
                x_cur = x_prime
                sim_slices[i] = slice_part
                result = spec.algorithm(np.asarray(slice_part, dtype=np.uint64)) \
                    if spec.algorithm else None
            else:
                q = max(p, spec.m)
                q_hat, new_status, result = holder.query(current, x_cur, q,
                                                         spec.algorithm, spec.map, step=i)
                holder_steps.append(i)
                if new_status == 0:
                    if q_hat > len(mapped):
                        # both executions exhausted; remainders are equal
                        current = []
                        status = 1
                    else:
                        y = mapped[q_hat - 1]
                        current = mapped[q_hat:]
                        x_cur = y
                else:
                    current = mapped[q_hat:]
                    status = 1
        published.append(result)

    for step, algorithm in delayed or []:
        if step in holder.stored:
            published.append(holder.delayed(step, algorithm))
        else:
            published.append(algorithm(np.asarray(sim_slices[step], dtype=np.uint64)))

    return SimTranscript(published=published, holder_calls=len(holder_steps),
                         holder_steps=holder_steps, final_status=status,
                         final_diff=None if status == 1 else x_cur)


def direct_run(data, script: Sequence[SliceComputation], epsilon: float,
               rng: np.random.Generator,
               delayed: Optional[Sequence[Tuple[int, Callable]]] = None) -> list:
    """Published outputs of a plain (non-simulated) slicing session."""
    session = RscSession(np.asarray(list(as_elements(data)), dtype=np.uint64),
                         tau=len(script), budget=PrivacyBudget(epsilon), k=1)
    published = []
    for spec in script:
        result, _ = select_and_compute(session, spec, rng)
        published.append(result)
    for step, algorithm in delayed or []:
        published.append(algorithm(session.stored_slices[step]))
    return published


@dataclass
class AuditResult:
    histogram: dict  # calls -> frequency
    tail: List[Tuple[int, float]]  # (w, empirical Pr[calls > w]) for w = 1..20
    mean: float
    trials: int


def audit_call_count(data, x: int, b: int, script, epsilon: float, trials: int,
                     rng: np.random.Generator) -> AuditResult:
    """Distribution of holder-call counts over repeated simulations."""
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    counts = np.empty(trials, dtype=np.int64)
    for trial in range(trials):
        counts[trial] = simulate(data, x, b, script, epsilon, rng).holder_calls
    histogram = dict(sorted(Counter(counts.tolist()).items()))
    tail = [(w, float(np.mean(counts > w))) for w in range(1, 21)]
    return AuditResult(histogram=histogram, tail=tail,
                       mean=float(counts.mean()), trials=trials)


def estimate_tv(samples_a: Sequence, samples_b: Sequence) -> float:
    """Empirical total-variation distance between two outcome samples."""
    ca, cb = Counter(samples_a), Counter(samples_b)
    na, nb = len(samples_a), len(samples_b)
    keys = set(ca) | set(cb)
    return 0.5 * sum(abs(ca[k] / na - cb[k] / nb) for k in keys)
