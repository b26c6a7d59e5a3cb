"""Shared oracles and harnesses for the test suite.

Everything here is deliberately independent of the library internals: counts
are recomputed with plain Python or scipy so library outputs are checked
against a second implementation, not against themselves.
"""

import math
from bisect import bisect_right
from collections import Counter

import numpy as np
from scipy import stats


def chi_squared_two_sample(counts_a, counts_b, min_expected=5.0):
    """Two-sample chi-squared statistic over a shared outcome histogram.

    Bins whose pooled expected count falls below min_expected are merged into
    the next bin (sorted by pooled frequency) before computing the statistic.
    Returns (statistic, degrees_of_freedom).
    """
    keys = sorted(set(counts_a) | set(counts_b), key=lambda k: (-(counts_a.get(k, 0) + counts_b.get(k, 0)), str(k)))
    n_a = sum(counts_a.values())
    n_b = sum(counts_b.values())
    if n_a == 0 or n_b == 0:
        raise ValueError("both samples must be nonempty")
    bins = []
    acc_a = acc_b = 0
    for key in keys:
        acc_a += counts_a.get(key, 0)
        acc_b += counts_b.get(key, 0)
        pooled = (acc_a + acc_b) * min(n_a, n_b) / (n_a + n_b)
        if pooled >= min_expected:
            bins.append((acc_a, acc_b))
            acc_a = acc_b = 0
    if acc_a or acc_b:
        if bins:
            last_a, last_b = bins.pop()
            bins.append((last_a + acc_a, last_b + acc_b))
        else:
            bins.append((acc_a, acc_b))
    if len(bins) < 2:
        return 0.0, 1
    stat = 0.0
    for o_a, o_b in bins:
        # two-sample statistic with sample-size weighting
        term = (o_a * math.sqrt(n_b / n_a) - o_b * math.sqrt(n_a / n_b)) ** 2
        stat += term / (o_a + o_b)
    return stat, len(bins) - 1


def chi_squared_critical(df, confidence=0.99):
    return float(stats.chi2.ppf(confidence, df))


def cumdist_oracle(a, b):
    """Max over thresholds of the below-or-equal count difference.

    Plain-Python reimplementation used to cross-check the library's version.
    """
    if len(a) != len(b):
        raise ValueError("equal sizes required")
    sa, sb = sorted(a), sorted(b)
    best = 0
    for z in sorted(set(sa) | set(sb)):
        best = max(best, abs(bisect_right(sa, z) - bisect_right(sb, z)))
    return best


def _common_path_depth(path_a, path_b):
    depth = -1
    for va, vb in zip(path_a, path_b):
        if va != vb:
            break
        depth = va.depth
    return depth


def insertion_relabel_check(embed_a, embed_b, x, limit):
    """Constructive form of the almost-adjacency property of the embedding.

    embed_a / embed_b are the embeddings of D and D + {x}. The entries that
    may need new labels are exactly those still unassigned when the two
    descent paths part ways: entries labeled deeper than the last common
    path vertex. Verifies that zone has at most `limit` entries on the D
    side and that its element multiset differs from the extended side's
    zone by one copy of x, then builds the relabeled list and confirms
    multiset adjacency. Returns the zone length.
    """
    pairs_a, pairs_b = embed_a.pairs, embed_b.pairs
    if len(pairs_b) != len(pairs_a) + 1:
        raise ValueError("pairs_b must contain exactly one extra entry")
    dv = _common_path_depth(embed_a.path, embed_b.path)
    # zones sit at the front: labels sort descending and zone labels are > dv
    zone_a = [p for p in pairs_a if p[0] > dv]
    zone_b = [p for p in pairs_b if p[0] > dv]
    assert pairs_a[:len(zone_a)] == zone_a and pairs_b[:len(zone_b)] == zone_b
    assert len(zone_a) <= limit, f"relabel zone {len(zone_a)} exceeds budget {limit}"

    # x lives in the zone when the paths actually deviated; otherwise the
    # zone element multisets agree and x sits in the common suffix
    elems_a = Counter(e for _, e in zone_a)
    elems_b = Counter(e for _, e in zone_b)
    assert dict(elems_b - elems_a) in ({x: 1}, {}) and not (elems_a - elems_b), \
        f"zone element multisets differ by {dict(elems_b - elems_a)}, expected one copy of {x}"

    # copy labels from zone_b onto zone_a by matching element values
    available = {}
    for label, elem in zone_b:
        available.setdefault(elem, []).append(label)
    relabeled = []
    for _, elem in zone_a:
        stack = available.get(elem)
        relabeled.append((stack.pop() if stack else None, elem))
    assert all(label is not None for label, _ in relabeled)
    modified = Counter(relabeled) + Counter(pairs_a[len(zone_a):])
    extra = Counter(pairs_b) - modified
    assert sum(extra.values()) == 1 and not (modified - Counter(pairs_b)), \
        "relabeled list is not adjacent to the extended list"
    (_, extra_elem), = extra.keys()
    assert extra_elem == x
    return len(zone_a)


def positionwise_relabel_labels(pairs_a, pairs_b, limit):
    """Labels of pairs_a with the first `limit` entries overwritten by
    pairs_b's labels at the same positions (equal-length lists)."""
    if len(pairs_a) != len(pairs_b):
        raise ValueError("equal lengths required")
    cut = min(limit, len(pairs_a))
    return [pairs_b[i][0] for i in range(cut)] + [p[0] for p in pairs_a[cut:]]


def clustered_instance(rng, n, bits, outliers):
    """One dominant value plus a few scattered ones; keeps the balance
    statistic of the embedding at most `outliers`."""
    top = (1 << bits) - 1
    center = int(rng.integers(0, top + 1))
    data = [center] * (n - outliers) + [int(v) for v in rng.integers(0, top + 1, size=outliers)]
    rng.shuffle(data)
    return data


def planted_box(rng, n_pos, n_neg, dims, bits, margin_frac=0.1, box=None):
    """Points labeled by an axis-aligned box with margin.

    Returns (points, labels, box) where box is a list of (lo, hi) per axis;
    pass box to draw fresh points from a previously planted one. Negatives
    are drawn outside the margin-inflated box.
    """
    top = (1 << bits) - 1
    if box is None:
        box = []
        for _ in range(dims):
            width = int(top * 0.4)
            lo = int(rng.integers(int(top * 0.05), top - width - int(top * 0.05)))
            box.append((lo, lo + width))
    pos = np.column_stack([rng.integers(lo, hi + 1, size=n_pos, dtype=np.uint64)
                           for lo, hi in box])
    margin = [max(1, int((hi - lo) * margin_frac)) for lo, hi in box]
    neg_rows = []
    while len(neg_rows) < n_neg:
        cand = rng.integers(0, top + 1, size=(n_neg, dims)).astype(np.uint64)
        inside = np.ones(len(cand), dtype=bool)
        for axis, (lo, hi) in enumerate(box):
            inside &= (cand[:, axis] >= lo - margin[axis]) & (cand[:, axis] <= hi + margin[axis])
        neg_rows.extend(cand[~inside].tolist())
    neg = np.array(neg_rows[:n_neg], dtype=np.uint64)
    points = np.vstack([pos, neg])
    labels = np.concatenate([np.ones(n_pos, dtype=np.int64), np.zeros(n_neg, dtype=np.int64)])
    return points, labels, box


def random_quasi_concave(rng, size, peak_value=None):
    """Random nonnegative quasi-concave integer table: rises to a single
    peak then falls (either side possibly empty)."""
    peak_pos = int(rng.integers(0, size))
    peak_value = int(rng.integers(1, 50)) if peak_value is None else peak_value
    rise = np.sort(rng.integers(0, peak_value + 1, size=peak_pos))
    fall = -np.sort(-rng.integers(0, peak_value + 1, size=size - peak_pos - 1))
    return np.concatenate([rise, [peak_value], fall]).astype(np.int64)
