"""Private interior-point solver over an implicit binary search tree.

The domain X = [0, 2^L) is the leaf set of a complete binary tree that is
never materialized: every vertex is an interval and every weight is two
binary searches on a sorted array, so 64-bit domains cost nothing extra.
Each recursion level slices off the t smallest and t largest points, checks a
noisy balance gate, and either finishes in a single heavy round or embeds the
remaining points into the short label domain {1..L} and recurses.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .engine import (Dataset, OrderMap, RscSession, SliceComputation, as_elements,
                     delayed_compute, descending_map, select_and_compute)
from .mechanisms import (PrivacyBudget, QualityFunction, choosing_mechanism,
                         exponential_mechanism, sample_laplace)

__all__ = [
    "Universe",
    "TreeVertex",
    "EmbeddedList",
    "IppParams",
    "RegimeError",
    "log_star",
    "trim_parameter",
    "regime_threshold",
    "f_ipp",
    "subtree_weight",
    "vertex_interval",
    "leftmost_leaf",
    "rightmost_leaf",
    "left_right_leaf",
    "embed",
    "embed_order_map",
    "gamma",
    "gamma_sensitivity_check",
    "one_heavy_round",
    "treelog",
    "ipp",
]


@dataclass(frozen=True)
class Universe:
    """The domain X = [0, 2^bit_length)."""

    bit_length: int

    def __post_init__(self):
        if not (1 <= self.bit_length <= 64):
            raise ValueError(f"bit_length must lie in [1, 64], got {self.bit_length}")

    @property
    def size(self) -> int:
        return 1 << self.bit_length


@dataclass(frozen=True)
class TreeVertex:
    """A subtree, identified by its depth and the high `depth` bits."""

    depth: int
    prefix: int

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError(f"depth must be nonnegative, got {self.depth}")
        if not (0 <= self.prefix < (1 << self.depth)):
            raise ValueError(f"prefix {self.prefix} out of range at depth {self.depth}")


@dataclass(frozen=True)
class EmbeddedList:
    """Output of the embedding: (label, element) pairs in reversed
    lexicographic order, the balance statistic, and the descent path."""

    pairs: List[Tuple[int, int]]
    gamma: int
    path: List[TreeVertex]


@dataclass(frozen=True)
class IppParams:
    """Per-step budget plus the trimming parameter and the shared gate noise."""

    epsilon: float
    delta: float
    t: int
    rho: float


class RegimeError(ValueError):
    """Dataset too small for the accuracy regime; raised instead of silently
    returning a point with no utility guarantee."""

    def __init__(self, message: str, required: int, provided: int):
        super().__init__(message)
        self.required = required
        self.provided = provided


def log_star(x) -> int:
    """Iterated logarithm: applications of log2 needed to bring x to <= 1."""
    if x < 1:
        raise ValueError(f"log_star requires x >= 1, got {x}")
    count = 0
    v = float(x)
    while v > 1.0:
        v = math.log2(v)
        count += 1
    return count


def trim_parameter(epsilon: float, delta: float) -> int:
    """t = ceil((100/eps) * ln(1/delta)), the per-level slice size."""
    if not (0.0 < epsilon <= 1.0):
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return math.ceil((100.0 / epsilon) * math.log(1.0 / delta))


def regime_threshold(universe: Universe, epsilon: float, delta: float) -> int:
    """Smallest dataset size the accuracy guarantee covers: 10 * t * log*|X|."""
    return 10 * trim_parameter(epsilon, delta) * log_star(universe.size)


def f_ipp(data, z) -> int:
    """min(#{x <= z}, #{x >= z}): positive iff z is an interior point."""
    arr = np.sort(as_elements(data).astype(np.uint64, copy=False))
    key = np.uint64(int(z))
    le = int(np.searchsorted(arr, key, side="right"))
    ge = arr.size - int(np.searchsorted(arr, key, side="left"))
    return min(le, ge)


def vertex_interval(v: TreeVertex, universe: Universe) -> Tuple[int, int]:
    """Half-open leaf interval [lo, hi) spanned by the subtree."""
    if v.depth > universe.bit_length:
        raise ValueError(f"depth {v.depth} exceeds tree height {universe.bit_length}")
    width = 1 << (universe.bit_length - v.depth)
    return v.prefix * width, (v.prefix + 1) * width


def leftmost_leaf(v: TreeVertex, universe: Universe) -> int:
    return vertex_interval(v, universe)[0]


def rightmost_leaf(v: TreeVertex, universe: Universe) -> int:
    return vertex_interval(v, universe)[1] - 1


def left_right_leaf(v: TreeVertex, universe: Universe) -> int:
    """Rightmost leaf of v's left child: the midpoint separating the children."""
    if v.depth >= universe.bit_length:
        raise ValueError("leaf vertices have no children")
    lo, hi = vertex_interval(v, universe)
    return lo + (hi - lo) // 2 - 1


def subtree_weight(sorted_data: np.ndarray, v: TreeVertex, universe: Universe) -> int:
    """Number of elements in v's interval; two binary searches on sorted input."""
    lo, hi = vertex_interval(v, universe)
    left = int(np.searchsorted(sorted_data, np.uint64(lo), side="left"))
    right = int(np.searchsorted(sorted_data, np.uint64(hi - 1), side="right"))
    return right - left


def _descend(sorted_data: np.ndarray, universe: Universe, visit: Callable):
    """Walk root to leaf along the heavier child (ties left), calling
    visit(vertex, left_child, w_left, right_child, w_right) per level; returns
    the final leaf vertex."""
    cur = TreeVertex(0, 0)
    for depth in range(universe.bit_length):
        left = TreeVertex(depth + 1, 2 * cur.prefix)
        right = TreeVertex(depth + 1, 2 * cur.prefix + 1)
        w_left = subtree_weight(sorted_data, left, universe)
        w_right = subtree_weight(sorted_data, right, universe)
        stop = visit(cur, left, w_left, right, w_right)
        if stop is not None:
            return stop
        cur = left if w_left >= w_right else right
    return cur


def _embed_arrays(arr: np.ndarray, universe: Universe):
    """Label each element with the level at which it leaves the greedy path.

    Returns (labels, elements) in reversed lexicographic order (label
    descending, element descending), the balance statistic gamma, and the
    descent path.
    """
    sorted_data = np.sort(arr.astype(np.uint64, copy=False))
    n = sorted_data.size
    labels = np.full(n, universe.bit_length, dtype=np.uint64)
    path = [TreeVertex(0, 0)]
    state = {"gamma": 0}

    def visit(cur, left, w_left, right, w_right):
        state["gamma"] = max(state["gamma"], min(w_left, w_right))
        light = right if w_left >= w_right else left
        heavy = left if w_left >= w_right else right
        lo, hi = vertex_interval(light, universe)
        i0 = int(np.searchsorted(sorted_data, np.uint64(lo), side="left"))
        i1 = int(np.searchsorted(sorted_data, np.uint64(hi - 1), side="right"))
        labels[i0:i1] = cur.depth + 1
        path.append(heavy)
        return None

    _descend(sorted_data, universe, visit)
    order = np.lexsort((sorted_data, labels))[::-1]
    return labels[order], sorted_data[order], state["gamma"], path


def embed(data, universe: Universe) -> EmbeddedList:
    """Greedy heavy-path embedding of the dataset into labels {1..bit_length}."""
    arr = Dataset(data, universe.bit_length).elements
    if arr.size == 0:
        raise ValueError("embedding requires a nonempty dataset")
    labels, elements, gamma_value, path = _embed_arrays(arr, universe)
    pairs = [(int(y), int(x)) for y, x in zip(labels, elements)]
    return EmbeddedList(pairs=pairs, gamma=gamma_value, path=path)


def _project_labels(arr: np.ndarray) -> np.ndarray:
    # label column of an embedded slice, shifted to the child domain {0..L-1}
    if arr.ndim == 2:
        return arr[:, 0] - np.uint64(1)
    return arr


def embed_order_map(universe: Universe) -> OrderMap:
    """Order map producing (label, element) rows in reversed lexicographic
    order; the engine slices rows, callers project out either column."""

    def apply(a: np.ndarray) -> np.ndarray:
        values = _project_labels(a)
        if values.size == 0:
            return np.empty((0, 2), dtype=np.uint64)
        labels, elements, _, _ = _embed_arrays(values, universe)
        return np.column_stack((labels, elements))

    return OrderMap(f"embed-{universe.bit_length}", apply)


def gamma(data, universe: Universe) -> int:
    """Max over the greedy path of the lighter-child weight; sensitivity 1."""
    arr = as_elements(data).astype(np.uint64, copy=False)
    sorted_data = np.sort(arr)
    state = {"gamma": 0}

    def visit(cur, left, w_left, right, w_right):
        state["gamma"] = max(state["gamma"], min(w_left, w_right))
        return None

    _descend(sorted_data, universe, visit)
    return state["gamma"]


def gamma_sensitivity_check(data, x, universe: Universe) -> int:
    """1 iff adding x moves the balance statistic by at most 1."""
    base = gamma(data, universe)
    arr = np.append(as_elements(data).astype(np.uint64, copy=False), np.uint64(x))
    return 1 if abs(gamma(arr, universe) - base) <= 1 else 0


def one_heavy_round(data, universe: Universe, t: int, epsilon: float,
                    rng: np.random.Generator):
    """Single-round interior point for datasets whose balance statistic is
    promised to be at least t/2.

    Walks the heavy path; at the first vertex where both children hold real
    mass (noisy check against t/4 with a fresh threshold draw), returns the
    boundary leaf between the children, and otherwise ends at a leaf.
    """
    arr = as_elements(data)
    if arr.size == 0:
        raise ValueError("one_heavy_round requires a nonempty dataset")
    sorted_data = np.sort(arr.astype(np.uint64, copy=False))
    rho = sample_laplace(1.0 / epsilon, rng)

    def visit(cur, left, w_left, right, w_right):
        w_min = min(w_left, w_right)
        if w_min > t / 10.0 and \
                w_min + sample_laplace(1.0 / epsilon, rng) >= t / 4.0 + rho:
            return left_right_leaf(cur, universe)
        return None

    out = _descend(sorted_data, universe, visit)
    if isinstance(out, TreeVertex):
        return out.prefix
    return int(out)


def _slice_levels(universe: Universe) -> int:
    levels = 0
    bits = universe.bit_length
    while (1 << bits) > 8:
        levels += 1
        bits = (bits - 1).bit_length()
    return levels


def _child_universe(universe: Universe) -> Universe:
    return Universe((universe.bit_length - 1).bit_length())


def _base_case(data, universe: Universe, epsilon: float, rng) -> int:
    quality = QualityFunction(evaluate=lambda d, z: f_ipp(d, z))
    choice = exponential_mechanism(list(range(universe.size)), quality,
                                   as_elements(data), epsilon, rng)
    return int(choice)


def _ascending_projected_map() -> OrderMap:
    return OrderMap("project-ascending", lambda a: np.sort(_project_labels(a)))


def _depth_vertex_quality(universe: Universe, depth: int,
                          elements: np.ndarray) -> QualityFunction:
    # adding one element raises exactly one depth-q vertex weight by 1, so
    # the function is 1-bounded; counts are tabulated once per slice
    shift = np.uint64(universe.bit_length - depth)
    if elements.size:
        prefixes, counts = np.unique(elements >> shift, return_counts=True)
        table = {int(p): int(c) for p, c in zip(prefixes, counts)}
    else:
        table = {}
    return QualityFunction(
        evaluate=lambda d, v: table.get(v.prefix, 0),
        bound_k=1,
        touched=lambda d: [TreeVertex(depth, p) for p in sorted(table)])


def _candidate_leaves(v: TreeVertex, universe: Universe) -> List[int]:
    if v.depth >= universe.bit_length:
        return [v.prefix]
    return sorted({leftmost_leaf(v, universe), rightmost_leaf(v, universe),
                   left_right_leaf(v, universe)})


def _recurse(universe: Universe, params: IppParams, rng, session: RscSession,
             strict: bool) -> int:
    if universe.size <= 8:
        return _base_case(_project_labels(session.remaining), universe,
                          params.epsilon, rng)

    t = params.t
    if strict and len(session.remaining) < 4 * t + 1:
        raise RegimeError(
            f"level needs more than {4 * t} points to populate its slices, "
            f"got {len(session.remaining)}", required=4 * t + 1,
            provided=len(session.remaining))

    low_step = session.step
    select_and_compute(session, SliceComputation(t, None, _ascending_projected_map()), rng)
    high_step = session.step
    select_and_compute(session, SliceComputation(t, None, descending_map()), rng)

    gate = gamma(session.remaining, universe) + sample_laplace(1.0 / params.epsilon, rng)
    if gate >= 3.0 * t / 4.0 + params.rho and len(session.remaining) > 0:
        return int(one_heavy_round(session.remaining, universe, t,
                                   params.epsilon, rng))

    embed_step = session.step
    select_and_compute(session, SliceComputation(2 * t, None, embed_order_map(universe)), rng)
    embedded_slice = session.stored_slices[embed_step]
    slice_elements = embedded_slice[:, 1] if embedded_slice.size else \
        np.empty(0, dtype=np.uint64)

    child_choice = _recurse(_child_universe(universe), params, rng, session, strict)
    depth = min(child_choice + 1, universe.bit_length)

    vertex = choosing_mechanism(_depth_vertex_quality(universe, depth, slice_elements),
                                slice_elements, params.epsilon, params.delta,
                                params.delta, rng, fallback=TreeVertex(depth, 0))
    candidates = _candidate_leaves(vertex, universe)

    border = np.concatenate([delayed_compute(session, low_step, lambda s: s),
                             delayed_compute(session, high_step, lambda s: s)])
    quality = QualityFunction(evaluate=lambda d, z: f_ipp(d, z))
    return int(exponential_mechanism(candidates, quality, border,
                                     params.epsilon, rng))


def treelog(universe: Universe, data, params: IppParams, rng: np.random.Generator,
            rsc_session_factory: Optional[Callable] = None, strict: bool = True) -> int:
    """One recursion pass of the interior-point search at a fixed per-step budget.

    Drives all slicing through a single reorder-slice-compute session; the
    border slices are consumed once each by a delayed computation, and the
    recursion operates on the session's shrinking remainder.
    """
    elements = Dataset(data, universe.bit_length).elements
    if universe.size <= 8:
        return _base_case(elements, universe, params.epsilon, rng)
    factory = rsc_session_factory or (
        lambda d, tau, k: RscSession(d, tau, PrivacyBudget(params.epsilon, params.delta), k))
    session = factory(elements, 3 * _slice_levels(universe), 1)
    return _recurse(universe, params, rng, session, strict)


def ipp(universe: Universe, data, epsilon: float, delta: float,
        rng: np.random.Generator, enforce_regime: bool = True,
        rsc_session_factory: Optional[Callable] = None) -> int:
    """Private interior point: returns z with min(data) <= z <= max(data)
    except with probability O(delta * log*|X|), for datasets in the size regime.

    Draws the shared gate noise once, then runs the level recursion.
    """
    elements = Dataset(data, universe.bit_length).elements
    t = trim_parameter(epsilon, delta)
    required = 10 * t * log_star(universe.size)
    if enforce_regime and elements.shape[0] < required:
        raise RegimeError(
            f"interior point at epsilon={epsilon}, delta={delta} on a "
            f"{universe.bit_length}-bit domain needs at least {required} points, "
            f"got {elements.shape[0]}", required=required, provided=elements.shape[0])
    params = IppParams(epsilon=epsilon, delta=delta, t=t,
                       rho=sample_laplace(1.0 / epsilon, rng))
    return treelog(universe, elements, params, rng,
                   rsc_session_factory=rsc_session_factory, strict=enforce_regime)
