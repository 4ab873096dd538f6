"""Propagation networks: single-source, time-ordered, arc-weighted DAGs."""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator

DEFAULT_MAX_DIPATHS = 10_000


class StructureError(ValueError):
    """Raised when a network violates the single-source DAG contract."""


@dataclass(frozen=True, order=True)
class WeightVector:
    """Follow, mention and retweet strengths of one arc, each in [0, 1]."""

    w_f: float
    w_m: float
    w_r: float

    def __post_init__(self):
        for name in ("w_f", "w_m", "w_r"):
            x = getattr(self, name)
            if not (math.isfinite(x) and 0.0 <= x <= 1.0):
                raise ValueError(f"{name}={x!r} outside [0, 1]")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.w_f, self.w_m, self.w_r)

    def __iter__(self):
        return iter(self.as_tuple())


def discretize(v: WeightVector) -> WeightVector:
    """Map every positive component to 1 and everything else to 0."""
    return WeightVector(*(1.0 if x > 0 else 0.0 for x in v))


@dataclass(frozen=True)
class Arc:
    src: str
    dst: str
    weight: WeightVector
    rank: int


@dataclass(frozen=True)
class Dipath:
    elements: tuple[WeightVector, ...]
    node_trace: tuple[str, ...]

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True)
class PropagationNetwork:
    source: str
    arcs: tuple[Arc, ...] = ()
    label: str | None = None
    nodes: frozenset[str] = field(default=frozenset())

    def __post_init__(self):
        # nodes are implied by the arcs and the source
        implied = {self.source}
        for a in self.arcs:
            implied.add(a.src)
            implied.add(a.dst)
        object.__setattr__(self, "arcs", tuple(self.arcs))
        object.__setattr__(self, "nodes", frozenset(self.nodes) | implied)

    def successors(self) -> dict[str, list[Arc]]:
        out: dict[str, list[Arc]] = defaultdict(list)
        for a in self.arcs:
            out[a.src].append(a)
        return out

    def with_label(self, label: str | None) -> "PropagationNetwork":
        return PropagationNetwork(self.source, self.arcs, label, self.nodes)

    def discretized(self) -> "PropagationNetwork":
        arcs = tuple(Arc(a.src, a.dst, discretize(a.weight), a.rank) for a in self.arcs)
        return PropagationNetwork(self.source, arcs, self.label, self.nodes)


def _has_cycle(nodes, succ) -> bool:
    color = dict.fromkeys(nodes, 0)
    for start in nodes:
        if color[start]:
            continue
        stack = [(start, iter(succ.get(start, ())))]
        color[start] = 1
        while stack:
            node, it = stack[-1]
            arc = next(it, None)
            if arc is None:
                color[node] = 2
                stack.pop()
            elif color[arc.dst] == 1:
                return True
            elif color[arc.dst] == 0:
                color[arc.dst] = 1
                stack.append((arc.dst, iter(succ.get(arc.dst, ()))))
    return False


def validate(net: PropagationNetwork) -> list[str]:
    """Return every violated structural invariant; an empty list means valid."""
    violations = []
    indeg = dict.fromkeys(net.nodes, 0)
    for a in net.arcs:
        indeg[a.dst] += 1
    roots = sorted(n for n, d in indeg.items() if d == 0)
    if roots != [net.source]:
        violations.append(f"single source: in-degree-0 nodes are {roots}, source is {net.source!r}")

    succ = net.successors()
    cyclic = _has_cycle(net.nodes, succ)
    if cyclic:
        violations.append("acyclic: the arc relation contains a cycle")

    seen = {net.source}
    frontier = [net.source]
    while frontier:
        n = frontier.pop()
        for a in succ.get(n, ()):
            if a.dst not in seen:
                seen.add(a.dst)
                frontier.append(a.dst)
    unreachable = net.nodes - seen
    if unreachable:
        violations.append(f"reachability: {sorted(unreachable)} not reachable from source")

    bad_rank = [(a.src, a.dst) for a in net.arcs
                if any(b.rank <= a.rank for b in succ.get(a.dst, ()))]
    if bad_rank:
        violations.append(f"rank order: rank does not increase after arcs {bad_rank}")
    return violations


def iter_dipaths(net: PropagationNetwork, max_dipaths: int = DEFAULT_MAX_DIPATHS) -> Iterator[Dipath]:
    succ = net.successors()
    # Deterministic order regardless of arc order in the input.
    for arcs in succ.values():
        arcs.sort(key=lambda a: (a.rank, a.dst))
    count = 0
    stack = [(net.source, (), (net.source,))]
    while stack:
        node, elems, trace = stack.pop()
        nxt = succ.get(node)
        if not nxt:
            if elems:
                count += 1
                if count > max_dipaths:
                    raise StructureError(f"network has more than {max_dipaths} dipaths")
                yield Dipath(elems, trace)
            continue
        for a in reversed(nxt):
            stack.append((a.dst, elems + (a.weight,), trace + (a.dst,)))


def extract_dipaths(net: PropagationNetwork, max_dipaths: int = DEFAULT_MAX_DIPATHS) -> list[Dipath]:
    """All maximal source-to-leaf paths, as sequences of arc weights.

    A node reachable along several routes yields one dipath per route.
    Raises StructureError on an invalid network or when the number of
    dipaths exceeds ``max_dipaths``.
    """
    problems = validate(net)
    if problems:
        raise StructureError("; ".join(problems))
    return list(iter_dipaths(net, max_dipaths))


# -- network file format (one JSON object per line) --

def network_to_dict(net: PropagationNetwork) -> dict:
    return {
        "source": net.source,
        "label": net.label,
        "arcs": [{"src": a.src, "dst": a.dst, "w": list(a.weight.as_tuple()), "rank": a.rank}
                 for a in net.arcs],
    }


def network_from_dict(obj: dict) -> PropagationNetwork:
    try:
        arcs = tuple(
            Arc(str(a["src"]), str(a["dst"]), WeightVector(*map(float, a["w"])), int(a["rank"]))
            for a in obj["arcs"]
        )
        label = obj.get("label")
        return PropagationNetwork(str(obj["source"]), arcs, None if label is None else str(label))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed network record: {exc}") from exc


def dump_networks(networks: Iterable[PropagationNetwork], path) -> None:
    with open(path, "w") as fh:
        for net in networks:
            fh.write(json.dumps(network_to_dict(net)) + "\n")


def load_networks(path) -> list[PropagationNetwork]:
    nets = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                nets.append(network_from_dict(json.loads(line)))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return nets
