"""Reorder-slice-compute sessions.

A session repeatedly reorders its remaining data with a caller-supplied order
map, removes a prefix slice whose size carries geometric noise, and runs a DP
computation on the slice. Composition cost is independent of the number of
slices; `privacy_cost` reports the explicit conservative bound.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .mechanisms import PrivacyBudget, sample_geometric

__all__ = [
    "Dataset",
    "OrderMap",
    "SliceComputation",
    "RscSession",
    "select_and_compute",
    "delayed_compute",
    "privacy_cost",
    "holder_call_cap",
    "ascending_map",
    "descending_map",
    "axis_map",
    "HOLDER_CALL_CONSTANT",
]

# Explicit constants behind the O(.) of the composition theorems, documented
# rather than canonical: each first-phase holder call costs (3 eps, 2 delta),
# the number of calls exceeds w with probability at most (5/6)^w, and each
# delayed compute on a slice costs (2 eps, 2 delta).
HOLDER_CALL_CONSTANT = 1


class Dataset:
    """A multiset of domain elements; rows of a numpy array.

    Scalars live in X = [0, 2^L) when a bit length is declared; learner inputs
    are rows of d coordinates.
    """

    def __init__(self, elements, bit_length: Optional[int] = None):
        arr = elements.elements if isinstance(elements, Dataset) else np.asarray(elements)
        if bit_length is not None:
            if not (1 <= bit_length <= 64):
                raise ValueError(f"bit_length must lie in [1, 64], got {bit_length}")
            arr = arr.astype(np.uint64)
            if arr.size and bit_length < 64 and int(arr.max()) >= (1 << bit_length):
                raise ValueError(
                    f"element {int(arr.max())} out of range for {bit_length}-bit domain")
        self.elements = arr
        self.bit_length = bit_length

    def __len__(self):
        return int(self.elements.shape[0])


def as_elements(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.elements
    if isinstance(data, np.ndarray):
        return data
    return np.asarray(data)


@dataclass(frozen=True)
class OrderMap:
    """Deterministic, adjacency-preserving map from a multiset to a list.

    Adjacent inputs must yield equal or adjacent output lists. The sorting
    maps are permutations of their input; the embedding map relabels, and
    audit maps may drop elements, so permutation is a property of specific
    maps, not of the type.
    """

    name: str
    apply: Callable[[np.ndarray], np.ndarray]


def ascending_map() -> OrderMap:
    return OrderMap("ascending", lambda a: np.sort(a, kind="stable"))


def descending_map() -> OrderMap:
    return OrderMap("descending", lambda a: np.sort(a, kind="stable")[::-1])


def axis_map(axis: int, reverse: bool = False) -> OrderMap:
    """Order rows by coordinate `axis`, ties by the remaining coordinates.

    Gives the per-axis total order the rectangle learner slices under.
    """

    def apply(a: np.ndarray) -> np.ndarray:
        keys = [a[:, i] for i in range(a.shape[1] - 1, -1, -1) if i != axis]
        keys.append(a[:, axis])
        order = np.lexsort(tuple(keys))
        if reverse:
            order = order[::-1]
        return a[order]

    return OrderMap(f"axis{axis}{'-desc' if reverse else '-asc'}", apply)


@dataclass(frozen=True)
class SliceComputation:
    """One step request: slice `m` (+ noise) elements under `map`, run `algorithm`.

    `algorithm` is a (budget.epsilon, budget.delta)-DP computation on the
    slice, or None to slice without computing (the delayed-compute pattern).
    """

    m: int
    algorithm: Optional[Callable]
    map: OrderMap

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"requested slice size must be nonnegative, got {self.m}")


class RscSession:
    def __init__(self, data, tau: int, budget: PrivacyBudget, k: int = 1,
                 noisy_sizes: bool = True):
        if tau < 1:
            raise ValueError(f"tau must be at least 1, got {tau}")
        if not (0.0 < budget.epsilon <= 1.0):
            raise ValueError(f"per-step epsilon must lie in (0, 1], got {budget.epsilon}")
        if k < 1:
            raise ValueError(f"k must be at least 1, got {k}")
        self.remaining = as_elements(data)
        self.original_size = int(self.remaining.shape[0])
        self.stored_slices = {}
        self.step = 0
        self.tau = tau
        self.budget = budget
        self.k = k
        self.noisy_sizes = noisy_sizes
        self.delayed_used = {}


def select_and_compute(session: RscSession, spec: SliceComputation,
                       rng: np.random.Generator):
    """Run one slice step; returns (result or None, realized slice size m_hat).

    m_hat = m + Geom(1 - e^-eps) (or m exactly for deterministic-size
    sessions). When m_hat exceeds the remaining data, the slice takes
    everything; the regime checks of the callers keep this rare.
    """
    if session.step >= session.tau:
        raise RuntimeError(f"session exhausted: all {session.tau} steps used")
    m_hat = spec.m
    if session.noisy_sizes:
        m_hat += sample_geometric(session.budget.epsilon, rng)
    ordered = spec.map.apply(session.remaining)
    take = min(m_hat, ordered.shape[0])
    slice_part = ordered[:take]
    session.remaining = ordered[take:]
    session.stored_slices[session.step] = slice_part
    session.delayed_used[session.step] = 0
    session.step += 1
    result = spec.algorithm(slice_part) if spec.algorithm is not None else None
    return result, m_hat


def delayed_compute(session: RscSession, step_index: int, algorithm: Callable):
    """Run one more DP computation on a stored slice (at most k per slice)."""
    if step_index not in session.stored_slices:
        raise KeyError(f"no stored slice for step {step_index}")
    if session.delayed_used[step_index] >= session.k:
        raise RuntimeError(
            f"slice {step_index} already received {session.k} delayed compute(s)")
    session.delayed_used[step_index] += 1
    return algorithm(session.stored_slices[step_index])


def holder_call_cap(delta_hat: float) -> int:
    """Smallest w with (5/6)^w <= delta_hat: the holder-call count cap."""
    if not (0.0 < delta_hat < 1.0):
        raise ValueError(f"delta_hat must lie in (0, 1), got {delta_hat}")
    return math.ceil(math.log(1.0 / delta_hat) / math.log(6.0 / 5.0))


def privacy_cost(epsilon_step: float, delta_step: float, tau: int, k: int,
                 delta_hat: float, applications: int = 1) -> PrivacyBudget:
    """Conservative explicit privacy bound for RSC executions.

    eps_total = 3 * eps * c * max(applications, w) + 2 * k * eps, where
    w = holder_call_cap(delta_hat) and c = HOLDER_CALL_CONSTANT; the delta
    term is exact: delta_total = delta_hat + 2 * k * tau * delta.
    """
    if epsilon_step < 0 or delta_step < 0:
        raise ValueError("per-step budget must be nonnegative")
    if tau < 1 or k < 1 or applications < 1:
        raise ValueError("tau, k, and applications must be at least 1")
    w = holder_call_cap(delta_hat)
    eps_total = 3.0 * epsilon_step * HOLDER_CALL_CONSTANT * max(applications, w) \
        + 2.0 * k * epsilon_step
    delta_total = delta_hat + 2.0 * k * tau * delta_step
    return PrivacyBudget(eps_total, delta_total)
