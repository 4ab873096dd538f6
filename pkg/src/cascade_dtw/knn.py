"""Probabilistic (majority vote) and evidential k-NN over the PrNet-DTW distance."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import Mapping, Sequence

import numpy as np

from .belief import RULES, Frame, MassFunction, pignistic, simple_bba
from .dtw import DEFAULT_CONFIG, DtwConfig, PackedDipaths, prnet_dtw_packed
from .prnet import PropagationNetwork

log = logging.getLogger(__name__)

TIE_EPS = 1e-12


class LabeledCorpus:
    """Training networks with their class labels.

    Dipath decompositions are computed once and kept, so the corpus
    behaves as an immutable value after construction.
    """

    def __init__(self, networks: Sequence[PropagationNetwork], labels: Sequence[str] | None = None):
        self.networks = tuple(networks)
        if labels is None:
            labels = [n.label for n in self.networks]
        self.labels = tuple(labels)
        if len(self.labels) != len(self.networks):
            raise ValueError("one label per network is required")
        if any(lab is None for lab in self.labels):
            raise ValueError("every corpus network needs a class label")
        self._packed: dict[int, PackedDipaths] = {}
        self._gamma: dict = {}

    def __len__(self):
        return len(self.networks)

    @property
    def classes(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.labels)))

    def packed(self, i: int, cfg: DtwConfig = DEFAULT_CONFIG) -> PackedDipaths:
        p = self._packed.get(i)
        if p is None:
            p = self._packed[i] = PackedDipaths.from_network(self.networks[i], cfg.max_dipaths)
        return p

    def subset(self, indices: Sequence[int]) -> "LabeledCorpus":
        sub = LabeledCorpus([self.networks[i] for i in indices], [self.labels[i] for i in indices])
        sub._packed = {j: self._packed[i] for j, i in enumerate(indices) if i in self._packed}
        return sub


@dataclass(frozen=True)
class NeighborRecord:
    train_index: int
    label: str
    distance: float


@dataclass
class ClassificationResult:
    predicted: str
    scores: dict[str, float]
    neighbors: list[NeighborRecord]
    tie_broken: bool = False
    mass: MassFunction | None = None

    def to_dict(self) -> dict:
        out = {
            "predicted": self.predicted,
            "scores": self.scores,
            "tie_broken": self.tie_broken,
            "neighbors": [{"train_index": n.train_index, "label": n.label, "distance": n.distance}
                          for n in self.neighbors],
        }
        if self.mass is not None:
            out["mass"] = self.mass.to_records()
        return out


@dataclass(frozen=True)
class EvidentialParams:
    alpha0: float = 0.95
    beta: int = 1
    gamma: str | float | Mapping[str, float] = "auto"

    def __post_init__(self):
        if not 0.0 < self.alpha0 < 1.0:
            raise ValueError("alpha0 must lie in (0, 1)")
        if isinstance(self.beta, bool) or not isinstance(self.beta, int) or self.beta < 1:
            raise ValueError("beta must be a positive integer")
        g = self.gamma
        if isinstance(g, str):
            if g != "auto":
                raise ValueError(f"gamma must be 'auto', a number or a mapping, got {g!r}")
        elif isinstance(g, Mapping):
            if any(not v > 0 for v in g.values()):
                raise ValueError("every gamma must be > 0")
        elif not g > 0:
            raise ValueError("gamma must be > 0")


def query_distances(query: PropagationNetwork, corpus: LabeledCorpus,
                    cfg: DtwConfig = DEFAULT_CONFIG) -> np.ndarray:
    """prnet_dtw(query, example) for every corpus example; the query drives the mean."""
    q = PackedDipaths.from_network(query, cfg.max_dipaths)
    return np.array([prnet_dtw_packed(q, corpus.packed(i, cfg), cfg) for i in range(len(corpus))])


def nearest_neighbors(query: PropagationNetwork | None, corpus: LabeledCorpus, k: int,
                      cfg: DtwConfig = DEFAULT_CONFIG, distances=None) -> list[NeighborRecord]:
    """The ``k`` closest corpus examples, ascending; equal distances keep corpus order.

    ``distances`` may carry precomputed query-to-corpus distances, in which
    case ``query`` is not consulted.
    """
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if k > len(corpus):
        raise ValueError(f"k={k} exceeds corpus size {len(corpus)}")
    if distances is None:
        distances = query_distances(query, corpus, cfg)
    order = np.argsort(np.asarray(distances, dtype=float), kind="stable")[:k]
    return [NeighborRecord(int(i), corpus.labels[i], float(distances[i])) for i in order]


def classify_probabilistic(query, corpus: LabeledCorpus, k: int, cfg: DtwConfig = DEFAULT_CONFIG,
                           distances=None) -> ClassificationResult:
    neighbors = nearest_neighbors(query, corpus, k, cfg, distances)
    counts = dict.fromkeys(corpus.classes, 0)
    dist_by_class: dict[str, list[float]] = {}
    for n in neighbors:
        counts[n.label] += 1
        dist_by_class.setdefault(n.label, []).append(n.distance)
    top = max(counts.values())
    tied = [c for c, v in counts.items() if v == top]
    tie_broken = len(tied) > 1
    if tie_broken:
        # smallest mean neighbor distance, then label order
        predicted = min(tied, key=lambda c: (float(np.mean(dist_by_class[c])), c))
    else:
        predicted = tied[0]
    scores = {c: v / k for c, v in counts.items()}
    return ClassificationResult(predicted, scores, neighbors, tie_broken)


def neighbor_alpha(distance: float, alpha0: float, gamma: float, beta: int) -> float:
    """Evidence strength of a neighbor: alpha0 * exp(-gamma * distance**beta)."""
    if math.isinf(distance):
        return 0.0
    return alpha0 * math.exp(-gamma * distance ** beta)


def estimate_gamma(corpus: LabeledCorpus, cfg: DtwConfig = DEFAULT_CONFIG, beta: int = 1,
                   distances=None) -> dict[str, float]:
    """Per class, the inverse of the mean ``d**beta`` over ordered intra-class pairs.

    Non-finite distances (networks without dipaths) are left out. A class
    whose mean is zero falls back to gamma = 1 with a warning.
    ``distances`` may be a full corpus-by-corpus matrix.
    """
    members: dict[str, list[int]] = {}
    for i, lab in enumerate(corpus.labels):
        members.setdefault(lab, []).append(i)
    gammas = {}
    for lab in sorted(members):
        idx = members[lab]
        if len(idx) < 2:
            raise ValueError(f"class {lab!r} has fewer than 2 members; cannot estimate gamma")
        vals = []
        for i in idx:
            for j in idx:
                if i == j:
                    continue
                if distances is not None:
                    d = float(distances[i][j])
                else:
                    d = prnet_dtw_packed(corpus.packed(i, cfg), corpus.packed(j, cfg), cfg)
                if math.isfinite(d):
                    vals.append(d ** beta)
        mean = math.fsum(vals) / len(vals) if vals else 0.0
        if mean > 0:
            gammas[lab] = 1.0 / mean
        else:
            log.warning("class %r: mean intra-class distance is zero, using gamma = 1", lab)
            gammas[lab] = 1.0
    return gammas


def resolve_gamma(params: EvidentialParams, corpus: LabeledCorpus, cfg: DtwConfig = DEFAULT_CONFIG,
                  distances=None) -> dict[str, float]:
    g = params.gamma
    if isinstance(g, str):
        key = (cfg, params.beta)
        if key not in corpus._gamma:
            corpus._gamma[key] = estimate_gamma(corpus, cfg, params.beta, distances)
        return corpus._gamma[key]
    if isinstance(g, Mapping):
        missing = set(corpus.classes) - set(g)
        if missing:
            raise ValueError(f"no gamma given for classes {sorted(missing)}")
        return dict(g)
    return dict.fromkeys(corpus.classes, float(g))


def classify_evidential(query, corpus: LabeledCorpus, k: int, cfg: DtwConfig = DEFAULT_CONFIG,
                        params: EvidentialParams = EvidentialParams(), rule: str = "dempster",
                        distances=None, gamma: Mapping[str, float] | None = None) -> ClassificationResult:
    """Each neighbor becomes a simple mass function whose strength decays with its
    distance; the k masses are combined with ``rule`` and the class with the
    highest pignistic probability wins (label order breaks exact ties).
    """
    try:
        combine = RULES[rule]
    except KeyError:
        raise ValueError(f"unknown combination rule {rule!r}") from None
    neighbors = nearest_neighbors(query, corpus, k, cfg, distances)
    classes = corpus.classes
    if len(classes) == 1:
        # a one-label frame leaves nothing to weigh
        return ClassificationResult(classes[0], {classes[0]: 1.0}, neighbors)
    if gamma is None:
        gamma = resolve_gamma(params, corpus, cfg)
    frame = Frame(classes)
    masses = []
    for n in neighbors:
        a = neighbor_alpha(n.distance, params.alpha0, gamma[n.label], params.beta)
        masses.append(simple_bba(frame, n.label, a) if a > 0 else MassFunction.vacuous(frame))
    combined = reduce(combine, masses)
    bet = pignistic(combined)
    best = max(bet.values())
    tied = sorted(c for c, v in bet.items() if best - v <= TIE_EPS)
    return ClassificationResult(tied[0], bet, neighbors, len(tied) > 1, combined)
