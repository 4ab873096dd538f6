"""Repeated holdout evaluation, k sweeps and report formatting."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .belief import ConflictError
from .dtw import DEFAULT_CONFIG, DtwConfig, prnet_dtw_packed
from .knn import (EvidentialParams, LabeledCorpus, classify_evidential,
                  classify_probabilistic, resolve_gamma)
from .prnet import StructureError

Z95 = 1.96


@dataclass(frozen=True)
class ClassifierSpec:
    kind: str = "evid"                      # "prob" or "evid"
    cfg: DtwConfig = DEFAULT_CONFIG
    params: EvidentialParams = EvidentialParams()
    rule: str = "dempster"

    def __post_init__(self):
        if self.kind not in ("prob", "evid"):
            raise ValueError(f"classifier must be 'prob' or 'evid', got {self.kind!r}")

    @property
    def id(self) -> str:
        if self.kind == "prob":
            return "prnet-dtw-knn"
        return f"prnet-dtw-eknn[{self.rule}]"


@dataclass
class EvalReport:
    classifier: str
    k: int
    accuracy: float
    ci_halfwidth: float
    labels: list[str]
    confusion: list[list[int]]          # rows: true label, columns: predicted (+ "<error>" if any)
    split_accuracies: list[float]
    runtime_seconds: float
    n_decisions: int
    n_errors: int = 0
    seed: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def format_table(self) -> str:
        return f"{self.classifier:<28} k={self.k:<3} {100 * self.accuracy:6.2f}% ±{100 * self.ci_halfwidth:.2f}"


def wald_halfwidth(p: float, n: int, z: float = Z95) -> float:
    if n <= 0:
        return 0.0
    return z * math.sqrt(max(p * (1 - p), 0.0) / n)


def train_size(n: int, train_fraction: float) -> int:
    # rounding guard: 0.7 * 10 is 7.000000000000001 in binary floating point
    return math.ceil(round(n * train_fraction, 9))


def split(corpus: LabeledCorpus, train_fraction: float, seed: int, stratified: bool = False):
    """Random partition into (train, test) index arrays of sizes ceil(n*f) and the rest."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    n = len(corpus)
    n_train = train_size(n, train_fraction)
    if n_train >= n:
        raise ValueError(f"corpus of {n} is too small for a non-empty test set at fraction {train_fraction}")
    rng = np.random.default_rng(seed)
    if not stratified:
        perm = rng.permutation(n)
        return np.sort(perm[:n_train]), np.sort(perm[n_train:])
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(corpus.labels):
        by_class.setdefault(lab, []).append(i)
    # largest-remainder allocation of n_train across classes
    classes = sorted(by_class)
    exact = {c: len(by_class[c]) * n_train / n for c in classes}
    quota = {c: int(exact[c]) for c in classes}
    for c in sorted(classes, key=lambda c: (-(exact[c] - quota[c]), c))[: n_train - sum(quota.values())]:
        quota[c] += 1
    train, test = [], []
    for c in classes:
        idx = rng.permutation(by_class[c])
        train.extend(idx[: quota[c]])
        test.extend(idx[quota[c]:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


def distance_matrix(corpus: LabeledCorpus, cfg: DtwConfig = DEFAULT_CONFIG) -> np.ndarray:
    """D[i, j] = prnet_dtw(corpus[i], corpus[j]); row index is the query side."""
    n = len(corpus)
    D = np.zeros((n, n))
    packed = [corpus.packed(i, cfg) for i in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = prnet_dtw_packed(packed[i], packed[j], cfg)
    return D


def _plan_splits(corpus, train_fraction, repeats, seed, stratified):
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    seeds = np.random.SeedSequence(seed).generate_state(repeats)
    return [split(corpus, train_fraction, int(s), stratified) for s in seeds]


def _run(corpus, spec, ks, splits, D, strict, seed):
    labels = list(corpus.classes)
    pos = {lab: i for i, lab in enumerate(labels)}
    reports = []
    for k in ks:
        t0 = time.perf_counter()
        confusion = np.zeros((len(labels), len(labels) + 1), dtype=int)
        split_acc = []
        for train_idx, test_idx in splits:
            if k > len(train_idx):
                raise ValueError(f"k={k} exceeds training set size {len(train_idx)}")
            train = corpus.subset(train_idx)
            sub_D = D[np.ix_(train_idx, train_idx)]
            gamma, gamma_error = None, None
            if spec.kind == "evid" and len(train.classes) > 1:
                try:
                    gamma = resolve_gamma(spec.params, train, spec.cfg, distances=sub_D)
                except ValueError as exc:
                    if strict:
                        raise
                    gamma_error = exc
            hits = 0
            for q in test_idx:
                d = D[q, train_idx]
                truth = pos[corpus.labels[q]]
                try:
                    if gamma_error is not None:
                        raise gamma_error
                    if spec.kind == "prob":
                        res = classify_probabilistic(None, train, k, spec.cfg, distances=d)
                    else:
                        res = classify_evidential(None, train, k, spec.cfg, spec.params, spec.rule,
                                                  distances=d, gamma=gamma)
                    col = pos[res.predicted]
                except (ConflictError, StructureError, ValueError):
                    if strict:
                        raise
                    col = len(labels)
                confusion[truth, col] += 1
                hits += col == truth
            split_acc.append(hits / len(test_idx))
        total = int(confusion.sum())
        acc = float(np.trace(confusion[:, : len(labels)])) / total
        n_err = int(confusion[:, -1].sum())
        mat = confusion if n_err else confusion[:, : len(labels)]
        reports.append(EvalReport(spec.id, k, acc, wald_halfwidth(acc, total), labels, mat.tolist(),
                                  split_acc, time.perf_counter() - t0, total, n_err, seed))
    return reports


def evaluate(corpus: LabeledCorpus, spec: ClassifierSpec, k: int, repeats: int = 10, seed: int = 0,
             train_fraction: float = 0.9, stratified: bool = False, strict: bool = False,
             distances: np.ndarray | None = None) -> EvalReport:
    """Accuracy aggregated over ``repeats`` random holdout splits, with a 95% Wald interval."""
    return sweep_k(corpus, spec, [k], repeats, seed, train_fraction, stratified, strict, distances)[0]


def sweep_k(corpus: LabeledCorpus, spec: ClassifierSpec, k_values, repeats: int = 10, seed: int = 0,
            train_fraction: float = 0.9, stratified: bool = False, strict: bool = False,
            distances: np.ndarray | None = None) -> list[EvalReport]:
    """One report per k; every k sees the same splits so the results are paired."""
    ks = list(k_values)
    if not ks:
        raise ValueError("k_values is empty")
    if len(set(ks)) != len(ks):
        raise ValueError(f"duplicate k values in {ks}")
    if any(not isinstance(k, (int, np.integer)) or k < 1 for k in ks):
        raise ValueError(f"k values must be positive integers: {ks}")
    t0 = time.perf_counter()
    splits = _plan_splits(corpus, train_fraction, repeats, seed, stratified)
    D = distance_matrix(corpus, spec.cfg) if distances is None else distances
    setup = time.perf_counter() - t0
    reports = _run(corpus, spec, [int(k) for k in ks], splits, D, strict, seed)
    for r in reports:
        r.runtime_seconds += setup / len(reports)
    return reports


def format_reports(reports) -> str:
    head = f"{'Classifier':<28} {'k':<5} {'Accuracy':>8}"
    return "\n".join([head] + [r.format_table() for r in reports])
