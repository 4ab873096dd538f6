"""Independent reference computations used only by the tests.

None of these import the code they check: paths are enumerated
explicitly, and mass functions are plain dicts keyed by frozensets.
"""

import itertools
import math


def euclid(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def warping_paths(n, m):
    """Every monotone alignment of (0,0) to (n-1,m-1) with unit steps."""
    def walk(i, j, acc):
        acc = acc + [(i, j)]
        if (i, j) == (n - 1, m - 1):
            yield acc
            return
        if i + 1 < n:
            yield from walk(i + 1, j, acc)
        if j + 1 < m:
            yield from walk(i, j + 1, acc)
        if i + 1 < n and j + 1 < m:
            yield from walk(i + 1, j + 1, acc)
    yield from walk(0, 0, [])


def dtw_bruteforce(A, B, dist=euclid):
    return min(sum(dist(A[i], B[j]) for i, j in p) for p in warping_paths(len(A), len(B)))


def all_maximal_paths(arcs, source):
    """arcs: list of (src, dst, payload). Returns list of (node list, payload list)."""
    out = []

    def dfs(node, nodes, payloads):
        children = [(d, w) for s, d, w in arcs if s == node]
        if not children:
            if payloads:
                out.append((nodes, payloads))
            return
        for d, w in children:
            dfs(d, nodes + [d], payloads + [w])

    dfs(source, [source], [])
    return out


# -- mass functions as {frozenset: mass} --

def combine_products(m1, m2, setop):
    out = {}
    for (b, x), (c, y) in itertools.product(m1.items(), m2.items()):
        key = frozenset(setop(b, c))
        out[key] = out.get(key, 0.0) + x * y
    return out


def conjunctive(m1, m2):
    return combine_products(m1, m2, lambda b, c: b & c)


def disjunctive(m1, m2):
    return combine_products(m1, m2, lambda b, c: b | c)


def dempster(m1, m2):
    raw = conjunctive(m1, m2)
    k = raw.pop(frozenset(), 0.0)
    return {a: v / (1 - k) for a, v in raw.items()}


def betp(m, labels):
    k = m.get(frozenset(), 0.0)
    return {s: sum(v / (len(a) * (1 - k)) for a, v in m.items() if s in a) for s in labels}
