"""Dynamic time warping over weight-vector sequences and the PrNet-DTW network distance.

The cost table is filled bottom-up (memoization of the DTW recursion), so a
pair of sequences of lengths n and m costs O(n*m) time and space.
``dtw_naive`` evaluates the same recursion without a table and exists only
as a reference for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .prnet import DEFAULT_MAX_DIPATHS, PropagationNetwork, WeightVector, extract_dipaths

_METRICS = {"euclidean": 0, "manhattan": 1}
NAIVE_MAX_LEN = 8


@dataclass(frozen=True)
class DtwConfig:
    element_distance: str = "euclidean"
    empty_vs_nonempty_distance: float = math.inf
    symmetrize: bool = False
    max_dipaths: int = DEFAULT_MAX_DIPATHS

    def __post_init__(self):
        if self.element_distance not in _METRICS:
            raise ValueError(f"unknown element distance {self.element_distance!r}")
        if not self.empty_vs_nonempty_distance >= 0:
            raise ValueError("empty_vs_nonempty_distance must be >= 0")

    @property
    def metric_code(self) -> int:
        return _METRICS[self.element_distance]


DEFAULT_CONFIG = DtwConfig()


@numba.njit(cache=True)
def _delta(a, b, metric):
    s = 0.0
    if metric == 0:
        for k in range(a.shape[0]):
            d = a[k] - b[k]
            s += d * d
        return math.sqrt(s)
    for k in range(a.shape[0]):
        s += abs(a[k] - b[k])
    return s


@numba.njit(cache=True)
def _fill(A, B, metric, costs):
    n, m = A.shape[0], B.shape[0]
    costs[0, 0] = 0.0
    for j in range(1, m + 1):
        costs[0, j] = np.inf
    for i in range(1, n + 1):
        costs[i, 0] = np.inf
        for j in range(1, m + 1):
            best = costs[i - 1, j - 1]
            if costs[i, j - 1] < best:
                best = costs[i, j - 1]
            if costs[i - 1, j] < best:
                best = costs[i - 1, j]
            costs[i, j] = _delta(A[i - 1], B[j - 1], metric) + best
    return costs[n, m]


@numba.njit(cache=True)
def _mean_min_dtw(flat1, off1, flat2, off2, metric, buf):
    n1 = off1.shape[0] - 1
    n2 = off2.shape[0] - 1
    total = 0.0
    for i in range(n1):
        A = flat1[off1[i]:off1[i + 1]]
        best = np.inf
        for j in range(n2):
            B = flat2[off2[j]:off2[j + 1]]
            d = _fill(A, B, metric, buf)
            if d < best:
                best = d
        total += best
    return total / n1


def _as_array(seq) -> np.ndarray:
    arr = np.array([tuple(v) for v in seq], dtype=np.float64).reshape(-1, 3)
    return arr


def delta(a: WeightVector, b: WeightVector, cfg: DtwConfig = DEFAULT_CONFIG) -> float:
    """Distance between two arc weight vectors (Euclidean unless configured otherwise)."""
    return float(_delta(_as_array([a])[0], _as_array([b])[0], cfg.metric_code))


def dtw_matrix(A: Sequence[WeightVector], B: Sequence[WeightVector],
               cfg: DtwConfig = DEFAULT_CONFIG) -> np.ndarray:
    """The full (|A|+1) x (|B|+1) cost table; entry [i, j] is DTW of the prefixes."""
    if len(A) == 0 or len(B) == 0:
        raise ValueError("dtw is undefined for an empty sequence")
    a, b = _as_array(A), _as_array(B)
    costs = np.empty((len(a) + 1, len(b) + 1))
    _fill(a, b, cfg.metric_code, costs)
    return costs


def dtw(A: Sequence[WeightVector], B: Sequence[WeightVector], cfg: DtwConfig = DEFAULT_CONFIG) -> float:
    return float(dtw_matrix(A, B, cfg)[-1, -1])


def dtw_naive(A: Sequence[WeightVector], B: Sequence[WeightVector], cfg: DtwConfig = DEFAULT_CONFIG) -> float:
    """Plain recursive DTW with no memo table. Exponential; test use only."""
    if len(A) == 0 or len(B) == 0:
        raise ValueError("dtw is undefined for an empty sequence")
    if len(A) > NAIVE_MAX_LEN or len(B) > NAIVE_MAX_LEN:
        raise ValueError(f"dtw_naive refuses sequences longer than {NAIVE_MAX_LEN}")
    if cfg.element_distance == "euclidean":
        def d(x, y):
            return math.sqrt(sum((p - q) ** 2 for p, q in zip(x, y)))
    else:
        def d(x, y):
            return sum(abs(p - q) for p, q in zip(x, y))

    def rec(i, j):
        if i == 0 and j == 0:
            return 0.0
        if i == 0 or j == 0:
            return math.inf
        return d(A[i - 1], B[j - 1]) + min(rec(i - 1, j - 1), rec(i, j - 1), rec(i - 1, j))

    return rec(len(A), len(B))


class PackedDipaths:
    """Dipaths of one network flattened into contiguous arrays for the distance kernel."""

    __slots__ = ("flat", "offsets", "max_len")

    def __init__(self, sequences: Sequence[Sequence[WeightVector]]):
        lengths = [len(s) for s in sequences]
        self.offsets = np.zeros(len(lengths) + 1, dtype=np.int64)
        np.cumsum(lengths, out=self.offsets[1:])
        rows = [tuple(v) for s in sequences for v in s]
        self.flat = np.array(rows, dtype=np.float64).reshape(-1, 3)
        self.max_len = max(lengths, default=0)

    @classmethod
    def from_network(cls, net: PropagationNetwork, max_dipaths: int = DEFAULT_MAX_DIPATHS) -> "PackedDipaths":
        return cls([p.elements for p in extract_dipaths(net, max_dipaths)])

    def __len__(self):
        return len(self.offsets) - 1


def _directed(p1: PackedDipaths, p2: PackedDipaths, cfg: DtwConfig) -> float:
    if len(p1) == 0 and len(p2) == 0:
        return 0.0
    if len(p1) == 0 or len(p2) == 0:
        return float(cfg.empty_vs_nonempty_distance)
    buf = np.empty((p1.max_len + 1, p2.max_len + 1))
    return float(_mean_min_dtw(p1.flat, p1.offsets, p2.flat, p2.offsets, cfg.metric_code, buf))


def prnet_dtw_packed(p1: PackedDipaths, p2: PackedDipaths, cfg: DtwConfig = DEFAULT_CONFIG) -> float:
    if cfg.symmetrize:
        return (_directed(p1, p2, cfg) + _directed(p2, p1, cfg)) / 2
    return _directed(p1, p2, cfg)


def prnet_dtw(P1: PropagationNetwork, P2: PropagationNetwork, cfg: DtwConfig = DEFAULT_CONFIG) -> float:
    """Mean over the dipaths of ``P1`` of the smallest DTW to any dipath of ``P2``.

    Not symmetric in general; set ``cfg.symmetrize`` to average both directions.
    """
    return prnet_dtw_packed(PackedDipaths.from_network(P1, cfg.max_dipaths),
                            PackedDipaths.from_network(P2, cfg.max_dipaths), cfg)
