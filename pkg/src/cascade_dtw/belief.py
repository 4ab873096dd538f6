"""Mass functions over a finite frame of class labels.

Subsets of the frame are stored as bitmasks over the ordered label tuple:
bit ``i`` set means ``labels[i]`` is in the subset, 0 is the empty set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

TOLERANCE = 1e-9
MAX_LABELS = 32


class ConflictError(ValueError):
    """Total conflict: all combined mass fell on the empty set."""


@dataclass(frozen=True)
class Frame:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(set(labels)) != len(labels):
            raise ValueError("frame labels must be distinct")
        if not 2 <= len(labels) <= MAX_LABELS:
            raise ValueError(f"frame needs between 2 and {MAX_LABELS} labels, got {len(labels)}")

    @property
    def omega(self) -> int:
        return (1 << len(self.labels)) - 1

    def mask(self, subset: Iterable[str]) -> int:
        m = 0
        for s in subset:
            try:
                m |= 1 << self.labels.index(s)
            except ValueError:
                raise ValueError(f"label {s!r} not in frame {self.labels}") from None
        return m

    def subset(self, mask: int) -> tuple[str, ...]:
        return tuple(s for i, s in enumerate(self.labels) if mask >> i & 1)


class MassFunction:
    """A basic belief assignment. Mass may sit on the empty set (unnormalized form)."""

    __slots__ = ("frame", "_m")

    def __init__(self, frame: Frame, masses: Mapping[int, float]):
        m = {}
        for mask, v in masses.items():
            if not 0 <= mask <= frame.omega:
                raise ValueError(f"subset mask {mask} outside the frame")
            if v < -TOLERANCE or not math.isfinite(v):
                raise ValueError(f"invalid mass {v} on {frame.subset(mask)}")
            if v > 0:
                m[mask] = m.get(mask, 0.0) + v
        total = math.fsum(m.values())
        if abs(total - 1.0) > TOLERANCE:
            raise ValueError(f"masses sum to {total}, expected 1")
        if total != 1.0:
            m = {k: v / total for k, v in m.items()}
        self.frame = frame
        self._m = m

    @classmethod
    def vacuous(cls, frame: Frame) -> "MassFunction":
        return cls(frame, {frame.omega: 1.0})

    @classmethod
    def from_sets(cls, frame: Frame, masses: Mapping[Iterable[str], float]) -> "MassFunction":
        acc: dict[int, float] = {}
        for subset, v in masses.items():
            k = frame.mask(subset)
            acc[k] = acc.get(k, 0.0) + v
        return cls(frame, acc)

    def __getitem__(self, mask: int) -> float:
        return self._m.get(mask, 0.0)

    def mass(self, subset: Iterable[str]) -> float:
        return self[self.frame.mask(subset)]

    def focal(self) -> dict[int, float]:
        return dict(self._m)

    @property
    def conflict(self) -> float:
        return self[0]

    def to_records(self) -> list[dict]:
        return [{"focal": list(self.frame.subset(k)), "mass": v} for k, v in sorted(self._m.items())]

    def __repr__(self):
        body = ", ".join(f"{set(self.frame.subset(k)) or '{}'}: {v:.6g}" for k, v in sorted(self._m.items()))
        return f"MassFunction({{{body}}})"


def simple_bba(frame: Frame, label: str, alpha: float) -> MassFunction:
    """Mass ``alpha`` on the singleton ``{label}`` and the rest on the whole frame."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return MassFunction(frame, {frame.mask([label]): alpha, frame.omega: 1.0 - alpha})


def _check_frames(m1: MassFunction, m2: MassFunction) -> None:
    if m1.frame != m2.frame:
        raise ValueError(f"frame mismatch: {m1.frame.labels} vs {m2.frame.labels}")


def _combine(m1, m2, op) -> dict[int, float]:
    out: dict[int, float] = {}
    for b, x in m1.focal().items():
        for c, y in m2.focal().items():
            k = op(b, c)
            out[k] = out.get(k, 0.0) + x * y
    return out


def combine_conjunctive(m1: MassFunction, m2: MassFunction) -> MassFunction:
    _check_frames(m1, m2)
    return MassFunction(m1.frame, _combine(m1, m2, lambda b, c: b & c))


def combine_disjunctive(m1: MassFunction, m2: MassFunction) -> MassFunction:
    _check_frames(m1, m2)
    return MassFunction(m1.frame, _combine(m1, m2, lambda b, c: b | c))


def combine_dempster(m1: MassFunction, m2: MassFunction) -> MassFunction:
    _check_frames(m1, m2)
    raw = _combine(m1, m2, lambda b, c: b & c)
    conflict = raw.pop(0, 0.0)
    if conflict >= 1.0 - TOLERANCE or not raw:
        raise ConflictError("total conflict between the combined mass functions")
    return MassFunction(m1.frame, {k: v / (1.0 - conflict) for k, v in raw.items()})


RULES = {
    "dempster": combine_dempster,
    "conjunctive": combine_conjunctive,
    "disjunctive": combine_disjunctive,
}


def pignistic(m: MassFunction) -> dict[str, float]:
    """Spread each focal set's mass evenly over its labels, discarding conflict."""
    conflict = m.conflict
    if conflict >= 1.0 - TOLERANCE:
        raise ConflictError("pignistic transform undefined when m(empty) = 1")
    labels = m.frame.labels
    bet = dict.fromkeys(labels, 0.0)
    scale = 1.0 - conflict
    for k, v in m.focal().items():
        if k == 0:
            continue
        members = m.frame.subset(k)
        share = v / (len(members) * scale)
        for s in members:
            bet[s] += share
    return bet
