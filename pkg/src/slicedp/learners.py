"""Private PAC learners built on the interior-point solver.

Thresholds: the decision boundary of a realizable sample is bracketed by the
largest positives and smallest negatives, and any interior point of that
window is a consistent-ish threshold; the window size is one interior-point
regime, so the sample complexity tracks log*|X| instead of log|X|.

Rectangles: one reorder-slice-compute session over the positive set takes two
slices per axis (smallest and largest under the per-axis order) and solves an
interior point on each, paying composition once for all 2d slices; there is
no sqrt(d) factor in the privacy cost.
"""

import csv
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .engine import Dataset, RscSession, SliceComputation, axis_map, select_and_compute
from .mechanisms import PrivacyBudget, sample_laplace
from .treelog import Universe, ipp, regime_threshold

__all__ = [
    "LabeledSample",
    "Hypothesis",
    "boundary_window_size",
    "threshold_sample_size",
    "learn_threshold_realizable",
    "rectangle_gate_threshold",
    "learn_rectangles",
    "load_labeled_csv",
]


@dataclass(frozen=True)
class LabeledSample:
    """Points with binary labels over a declared domain."""

    points: np.ndarray
    labels: np.ndarray
    universe: Universe

    def __post_init__(self):
        points = Dataset(self.points, self.universe.bit_length).elements
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.shape[0] != points.shape[0]:
            raise ValueError("labels must be one per point")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return int(self.points.shape[0])


@dataclass(frozen=True)
class Hypothesis:
    """Either a threshold (predict 1 iff x <= threshold), a product rectangle,
    or the all-zero predictor."""

    threshold: Optional[int] = None
    rectangle: Optional[List[Tuple[int, int]]] = None
    zero: bool = False

    def __post_init__(self):
        forms = (self.threshold is not None) + (self.rectangle is not None) + self.zero
        if forms != 1:
            raise ValueError("hypothesis must be exactly one of threshold, rectangle, zero")
        if self.rectangle is not None:
            for a, b in self.rectangle:
                if a > b:
                    raise ValueError(f"interval [{a}, {b}] is not well ordered")

    def predict(self, points) -> np.ndarray:
        arr = np.asarray(points, dtype=np.uint64)
        if self.zero:
            return np.zeros(arr.shape[0], dtype=np.int64)
        if self.threshold is not None:
            return (arr <= np.uint64(self.threshold)).astype(np.int64)
        inside = np.ones(arr.shape[0], dtype=bool)
        for axis, (a, b) in enumerate(self.rectangle):
            coord = arr[:, axis]
            inside &= (coord >= np.uint64(a)) & (coord <= np.uint64(b))
        return inside.astype(np.int64)


def boundary_window_size(universe: Universe, epsilon: float, delta: float) -> int:
    """Points taken per side of the decision boundary: half an interior-point
    regime, so the combined window feeds the solver exactly in regime."""
    return math.ceil(regime_threshold(universe, epsilon, delta) / 2)


def threshold_sample_size(universe: Universe, xi: float, beta: float,
                          epsilon: float, delta: float) -> int:
    """Sample size at which the learner guarantees error xi with confidence
    1 - beta: the window misclassifies at most 2 * window points, and a
    Chernoff argument converts the empirical gap to generalization."""
    window = boundary_window_size(universe, epsilon, delta)
    return math.ceil((4.0 / xi) * (2.0 * window + math.log(2.0 / beta)))


def learn_threshold_realizable(sample: LabeledSample, xi: float, beta: float,
                               epsilon: float, delta: float,
                               rng: np.random.Generator) -> Hypothesis:
    """Threshold hypothesis from a realizable sample (positives below the
    boundary): interior point of the boundary window, or the extreme
    threshold when one side is essentially absent."""
    if not (0.0 < xi < 1.0 and 0.0 < beta < 1.0):
        raise ValueError("xi and beta must lie in (0, 1)")
    if sample.points.ndim != 1:
        raise ValueError("threshold learning expects scalar points")
    universe = sample.universe
    positives = np.sort(sample.points[sample.labels == 1])
    negatives = np.sort(sample.points[sample.labels == 0])
    if positives.size and negatives.size and positives[-1] >= negatives[0]:
        raise ValueError(
            f"sample is not realizable by a threshold: positive point "
            f"{int(positives[-1])} is not below negative point {int(negatives[0])}")
    if negatives.size == 0:
        return Hypothesis(threshold=universe.size - 1)
    if positives.size == 0:
        return Hypothesis(threshold=0)
    window = boundary_window_size(universe, epsilon, delta)
    boundary = np.concatenate([positives[-window:], negatives[:window]])
    point = ipp(universe, boundary, epsilon, delta, rng, enforce_regime=False)
    return Hypothesis(threshold=int(point))


def rectangle_gate_threshold(universe: Universe, d: int, epsilon: float,
                             delta: float) -> float:
    """Positive count needed before slicing: 2d in-regime slices plus a
    Laplace tail margin."""
    m = regime_threshold(universe, epsilon, delta)
    return 2.0 * d * m + (4.0 / epsilon) * math.log(2.0 / delta)


def learn_rectangles(sample: LabeledSample, epsilon: float, delta: float,
                     rng: np.random.Generator) -> Hypothesis:
    """Product rectangle around the positive set, one slicing session total.

    Per axis, the smallest and largest (m + Noise) positives under the axis
    order each solve an interior point, giving that axis its interval. When a
    noisy count of the positives cannot fill the slices, predicting all-zero
    is already competitive and is returned instead.
    """
    points = sample.points
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    d = points.shape[1]
    if not (1 <= d <= 16):
        raise ValueError(f"dimension must lie in [1, 16], got {d}")
    universe = sample.universe
    positives = points[sample.labels == 1]
    gate = rectangle_gate_threshold(universe, d, epsilon, delta)
    if positives.shape[0] + sample_laplace(1.0 / epsilon, rng) < gate:
        return Hypothesis(zero=True)

    m = regime_threshold(universe, epsilon, delta)
    session = RscSession(positives, tau=2 * d, budget=PrivacyBudget(epsilon, delta),
                         k=1, noisy_sizes=True)
    intervals = []
    for axis in range(d):
        def solve(rows, axis=axis):
            coords = rows[:, axis] if rows.ndim == 2 else rows
            return ipp(universe, coords, epsilon, delta, rng, enforce_regime=False)

        low, _ = select_and_compute(session, SliceComputation(m, solve, axis_map(axis)), rng)
        high, _ = select_and_compute(
            session, SliceComputation(m, solve, axis_map(axis, reverse=True)), rng)
        a, b = int(low), int(high)
        if a > b:
            a, b = b, a
        intervals.append((a, b))
    return Hypothesis(rectangle=intervals)


def load_labeled_csv(path, bit_length: int) -> LabeledSample:
    """Rows of d coordinates plus a trailing 0/1 label."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [int(cell) for cell in row]
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise ValueError(f"line {lineno}: non-integer entry in {row!r}")
            if len(values) < 2:
                raise ValueError(f"line {lineno}: need at least one coordinate and a label")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ValueError(f"line {lineno}: expected {width} columns, got {len(values)}")
            if values[-1] not in (0, 1):
                raise ValueError(f"line {lineno}: label must be 0 or 1, got {values[-1]}")
            rows.append(values)
    if not rows:
        raise ValueError("labeled file has no rows")
    arr = np.asarray(rows, dtype=np.int64)
    points = arr[:, :-1].astype(np.uint64)
    if points.shape[1] == 1:
        points = points[:, 0]
    return LabeledSample(points=points, labels=arr[:, -1],
                         universe=Universe(bit_length))
