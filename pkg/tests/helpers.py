"""Seeded generators and independent brute-force oracles shared by the tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from markercoe.graph import Graph
from markercoe.marker import MarkerData, is_valid_marker, type_one, type_two


def random_walk(g: Graph, rng: random.Random, start: int, length: int) -> tuple[int, ...]:
    out, v = [], start
    for _ in range(length):
        e = rng.choice(g.out_edges(v))
        out.append(e)
        v = g.dst[e]
    return tuple(out)


def random_bridge(g: Graph, rng: random.Random, start: int, end: int, max_len: int, tries: int = 50):
    """Random path start -> end of length <= max_len (possibly empty when start == end)."""
    for _ in range(tries):
        n = rng.randint(0, max_len)
        w = random_walk(g, rng, start, n)
        v = g.dst[w[-1]] if w else start
        if v == end:
            return w
    return None


def random_markers(g: Graph, count: int, seed: int, max_data: int = 5, max_marker: int = 3) -> list[MarkerData]:
    """Distinct valid markers with data words of length <= max_data."""
    rng = random.Random(seed)
    found: list[MarkerData] = []
    seen = set()
    attempts = 0
    while len(found) < count:
        attempts += 1
        if attempts > 200000:
            raise RuntimeError("marker generator stalled")
        if rng.random() < 0.5:
            m = random_walk(g, rng, rng.randrange(g.num_vertices), rng.randint(1, max_marker))
            m2 = m
        else:
            m = (rng.randrange(g.num_edges),)
            m2 = (rng.randrange(g.num_edges),)
            if m == m2:
                continue
        s, t = g.dst[m[-1]], g.src[m2[0]]
        d = random_bridge(g, rng, s, t, max_data)
        d2 = random_bridge(g, rng, s, t, max_data)
        if d is None or d2 is None or d == d2:
            continue
        data = type_one(m, d, d2) if m == m2 else type_two(m[0], m2[0], d, d2)
        if data in seen:
            continue
        seen.add(data)
        if is_valid_marker(g, data):
            found.append(data)
    return found


# -- oracles -------------------------------------------------------------

def overlaps_oracle(w, w2) -> set[int]:
    """Quadratic definition: k with suffix_k(w) == prefix_k(w2)."""
    return {k for k in range(1, min(len(w), len(w2)) + 1) if tuple(w[len(w) - k:]) == tuple(w2[:k])}


def is_power_oracle(w) -> bool:
    n = len(w)
    return any(n % d == 0 and tuple(w) == tuple(w[:d]) * (n // d) for d in range(1, n))


def rotations(w):
    return [tuple(w[i:]) + tuple(w[:i]) for i in range(len(w))]


def primitive_classes_oracle(g: Graph, max_len: int) -> set[tuple[int, ...]]:
    """Least rotations of all primitive cycles, by exhaustive product."""
    out = set()
    for n in range(1, max_len + 1):
        for w in itertools.product(g.edges, repeat=n):
            if all(g.dst[a] == g.src[b] for a, b in zip(w, w[1:] + w[:1])) and not is_power_oracle(w):
                out.add(min(rotations(w)))
    return out


def orbit_frequency_oracle(w, v) -> Fraction:
    """Fraction of the |w| shifts of w^inf that lie in the cylinder of v."""
    n = len(w)
    hits = 0
    for i in range(n):
        point = [w[(i + j) % n] for j in range(len(v))]
        hits += point == list(v)
    return Fraction(hits, n)


def cokernel_oracle(m: list[list[int]], unit: list[int]) -> tuple[dict[int, int], int]:
    """Brute-force Z^n / M Z^n for det M != 0.

    Works in (Z/d)^n with d = |det M| (d Z^n lies in the image).  Returns
    ({k: |G[k]|} for k | d, order of the unit class).
    """
    from markercoe.homology import det

    d = abs(det(m))
    n = len(m)
    cols = [tuple(m[i][j] % d for i in range(n)) for j in range(n)]
    zero = (0,) * n
    span = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for x in frontier:
            for c in cols:
                y = tuple((a + b) % d for a, b in zip(x, c))
                if y not in span:
                    span.add(y)
                    nxt.append(y)
        frontier = nxt
    points = list(itertools.product(range(d), repeat=n))
    killed = {k: sum(tuple(k * a % d for a in x) in span for x in points) // len(span)
              for k in range(1, d + 1) if d % k == 0}
    u = tuple(a % d for a in unit)
    order = next(k for k in range(1, d + 1) if tuple(k * a % d for a in u) in span)
    return killed, order


def reachability_oracle(g: Graph, removed=()) -> list[set[int]]:
    """Transitive closure by repeated relaxation."""
    reach = [{v} for v in g.vertices]
    changed = True
    while changed:
        changed = False
        for e in g.edges:
            if e in removed:
                continue
            s, t = g.src[e], g.dst[e]
            for r in reach:
                if s in r and t not in r:
                    r.add(t)
                    changed = True
    return reach


def period_oracle(g: Graph, bound: int = 24) -> int:
    """gcd of the lengths of closed walks up to ``bound`` edges."""
    from math import gcd

    a = g.adjacency()
    n = g.num_vertices
    power = [[int(i == j) for j in range(n)] for i in range(n)]
    d = 0
    for k in range(1, bound + 1):
        power = [[sum(power[i][m] * a[m][j] for m in range(n)) for j in range(n)] for i in range(n)]
        if any(power[i][i] for i in range(n)):
            d = gcd(d, k)
    return d


def scan_oracle(data: MarkerData, letters, n_out: int) -> list[int]:
    """First n_out letters of the marker map on an infinite word given as a function of position."""
    a = list(data.m + data.d + data.m2)
    b = list(data.m + data.d2 + data.m2)
    md, md2 = list(data.m + data.d), list(data.m + data.d2)
    out, i = [], 0
    while len(out) < n_out:
        window = [letters(i + j) for j in range(max(len(a), len(b)))]
        if window[:len(a)] == a:
            out += md2
            i += len(md)
        elif window[:len(b)] == b:
            out += md
            i += len(md2)
        else:
            out.append(letters(i))
            i += 1
    return out[:n_out]


def overlap_conditions_oracle(data: MarkerData) -> bool:
    """Validity straight from the set-valued definitions."""
    m, m2, d, d2 = data.m, data.m2, data.d, data.d2
    a, b = m + d + m2, m + d2 + m2

    def sub(x, y):
        return any(y[i:i + len(x)] == x for i in range(len(y) - len(x) + 1))

    if sub(a, b) or sub(b, a):
        return False
    if m == m2:
        short = set(range(1, len(m) + 1))
        return (overlaps_oracle(a, b) <= short and overlaps_oracle(b, a) <= short
                and overlaps_oracle(a, a) <= short | {len(a)} and overlaps_oracle(b, b) <= short | {len(b)})
    return (not overlaps_oracle(a, b) and not overlaps_oracle(b, a)
            and overlaps_oracle(a, a) == {len(a)} and overlaps_oracle(b, b) == {len(b)})
