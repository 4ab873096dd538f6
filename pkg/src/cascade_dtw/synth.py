"""Seeded generator of labeled synthetic propagation networks."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .knn import LabeledCorpus
from .prnet import Arc, PropagationNetwork, WeightVector


@dataclass(frozen=True)
class ClassProfile:
    label: str
    depth_range: tuple[int, int] = (2, 4)
    branching_range: tuple[int, int] = (1, 3)
    weight_means: tuple[float, float, float] = (0.5, 0.5, 0.5)
    weight_noise: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "depth_range", tuple(int(x) for x in self.depth_range))
        object.__setattr__(self, "branching_range", tuple(int(x) for x in self.branching_range))
        object.__setattr__(self, "weight_means", tuple(float(x) for x in self.weight_means))
        dmin, dmax = self.depth_range
        bmin, bmax = self.branching_range
        if not 1 <= dmin <= dmax:
            raise ValueError(f"{self.label}: bad depth_range {self.depth_range}")
        if not (0 <= bmin <= bmax and bmax >= 1):
            raise ValueError(f"{self.label}: bad branching_range {self.branching_range}")
        if len(self.weight_means) != 3 or not all(0.0 <= m <= 1.0 for m in self.weight_means):
            raise ValueError(f"{self.label}: weight_means must be three values in [0, 1]")
        if not self.weight_noise >= 0:
            raise ValueError(f"{self.label}: weight_noise must be >= 0")


def load_profiles(path) -> list[ClassProfile]:
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("profiles", [])
    return [ClassProfile(**p) for p in data]


def _weight(rng, profile):
    noise = rng.uniform(-profile.weight_noise, profile.weight_noise, size=3)
    w = np.clip(np.asarray(profile.weight_means) + noise, 0.0, 1.0)
    return WeightVector(*map(float, w))


def generate_network(profile: ClassProfile, rng: np.random.Generator, merge_prob: float = 0.0) -> PropagationNetwork:
    """A random cascade tree; with ``merge_prob`` > 0 some nodes gain a second parent."""
    depth = int(rng.integers(profile.depth_range[0], profile.depth_range[1] + 1))
    bmin, bmax = profile.branching_range
    arcs = []
    level = ["n0"]
    count = 1
    for d in range(1, depth + 1):
        nxt = []
        for pos, parent in enumerate(level):
            n_children = int(rng.integers(bmin, bmax + 1))
            if pos == 0 and n_children == 0:
                n_children = 1  # keep the drawn depth reachable
            for _ in range(n_children):
                child = f"n{count}"
                count += 1
                arcs.append(Arc(parent, child, _weight(rng, profile), d))
                if merge_prob > 0 and len(level) > 1 and rng.random() < merge_prob:
                    other = level[int(rng.integers(len(level)))]
                    if other != parent:
                        arcs.append(Arc(other, child, _weight(rng, profile), d))
                nxt.append(child)
        level = nxt
    return PropagationNetwork("n0", tuple(arcs), profile.label)


def generate(profiles: list[ClassProfile], n_per_class: int, seed: int, merge_prob: float = 0.0) -> LabeledCorpus:
    """``n_per_class`` networks per profile, in profile order. Same seed, same corpus."""
    if not profiles:
        raise ValueError("at least one profile is required")
    labels = [p.label for p in profiles]
    if len(set(labels)) != len(labels):
        raise ValueError("profile labels must be distinct")
    if n_per_class < 1:
        raise ValueError("n_per_class must be positive")
    if not 0.0 <= merge_prob <= 1.0:
        raise ValueError("merge_prob must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    nets = [generate_network(p, rng, merge_prob) for p in profiles for _ in range(n_per_class)]
    return LabeledCorpus(nets)
