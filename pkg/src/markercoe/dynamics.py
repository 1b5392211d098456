"""Transitivity chains on primitive classes and the strong-proximality family.

Both constructions are verified rather than trusted: every chain is folded
through the class map before it is returned, and every pair cycle of the
proximality family is re-checked against the properties the markers need.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .graph import Graph, GraphError, classify, shortest_path
from .marker import (
    MarkerCoe,
    MarkerMove,
    check_overlap_conditions,
    f_phi_str,
    type_one,
    type_two,
)
from .measures import PeriodicCombo
from .rope import MarkerTransducer, Node, RopeStore
from .words import (
    CyclicClass,
    Word,
    class_of_str,
    cyclic_class,
    enc,
    is_cycle,
    is_primitive,
    overlaps,
    prime_decomposition,
    rotate,
)


class ConstructionError(RuntimeError):
    """A verified construction failed its own checks."""


# -- move chains ---------------------------------------------------------

@dataclass(frozen=True)
class MoveChain:
    moves: tuple[MarkerMove, ...]
    source: CyclicClass
    target: CyclicClass

    def __len__(self) -> int:
        return len(self.moves)

    def fold(self, cls: CyclicClass | None = None) -> CyclicClass:
        cls = cls or self.source
        s = enc(cls.rep)
        for mv in self.moves:
            s = f_phi_str(mv.coe, s)
        return class_of_str(s)

    def verified(self) -> bool:
        return self.fold() == self.target

    def reversed(self) -> "MoveChain":
        return MoveChain(tuple(reversed(self.moves)), self.target, self.source)

    def __add__(self, other: "MoveChain") -> "MoveChain":
        return MoveChain(self.moves + other.moves, self.source, other.target)

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "verified": self.verified(),
            "moves": [m.to_json() for m in self.moves],
        }


# -- primitive extensions -------------------------------------------------

def _cuts(g: Graph, c: Word) -> list[int]:
    """Letter offsets where the prime factors of the cycle end."""
    base = g.src[c[0]]
    return [i + 1 for i, e in enumerate(c) if g.dst[e] == base]


def is_primitive_extension(g: Graph, p: Sequence[int], q: Sequence[int]) -> bool:
    p, q = tuple(p), tuple(q)
    if q[:len(p)] != p or not is_cycle(g, q):
        return False
    cuts = _cuts(g, q)
    if len(p) not in cuts:
        return False
    s = enc(q)
    return all(is_primitive(s[:k]) for k in cuts if k >= len(p))


def unary_obstruction(g: Graph, p: Sequence[int]) -> Word | None:
    """The prime cycle q (if any) with p q^k a proper power for some small k.

    Only prime factors of p can obstruct; k runs up to l(p) + 2.
    """
    factors = prime_decomposition(g, p)
    sp = enc(p)
    bound = len(factors) + 2
    for q in sorted(set(factors), key=lambda w: (len(w), w)):
        sq = enc(q)
        for k in range(1, bound + 1):
            if not is_primitive(sp + sq * k):
                return q
    return None


def primitive_extension_all_edges(g: Graph, p: Sequence[int]) -> Word:
    """Append prime cycles through missing edges until every edge is used."""
    p = tuple(p)
    base = g.src[p[0]]
    q = p
    while True:
        missing = [e for e in g.edges if e not in set(q)]
        if not missing:
            return q
        e = missing[0]
        w1 = shortest_path(g, base, g.src[e])
        w2 = shortest_path(g, g.dst[e], base)
        if w1 is None or w2 is None:
            raise GraphError("graph is not strongly connected")
        prime = w1 + (e,) + w2
        if len(prime_decomposition(g, prime)) != 1:
            raise ConstructionError("connector is not a prime cycle")
        nxt = q + prime
        if not is_primitive(nxt):
            raise ConstructionError("extension lost primitivity")
        q = nxt


@dataclass(frozen=True)
class Bridge:
    """r = p s^m q t^n; ``r`` extends p and ``r_rot`` (a rotation of r) extends q."""

    r: Word
    r_rot: Word
    s: Word
    t: Word
    n: int
    m: int


def bridge_class(g: Graph, p: Sequence[int], q: Sequence[int], retries: int = 3) -> Bridge:
    p, q = tuple(p), tuple(q)
    if g.src[p[0]] != g.src[q[0]]:
        raise GraphError("cycles must share their base vertex")
    lp, lq = len(prime_decomposition(g, p)), len(prime_decomposition(g, q))
    if lp > lq:
        b = bridge_class(g, q, p, retries)
        return Bridge(b.r_rot, b.r, b.t, b.s, b.m, b.n)
    fp, fq = prime_decomposition(g, p), prime_decomposition(g, q)
    pool = sorted(set(fp) | set(fq), key=lambda w: (len(w), w))
    bad_p, bad_q = unary_obstruction(g, p), unary_obstruction(g, q)
    s_opts = [s for s in pool if s != bad_p and any(x != s for x in fp)]
    t_opts = [t for t in pool if t != bad_q and any(x != t for x in fq)]
    for s in s_opts:
        for t in t_opts:
            n = 2 * lq + 1
            for _ in range(retries + 1):
                m = n + lq - lp
                r = p + s * m + q + t * n
                r_rot = q + t * n + p + s * m
                if is_primitive_extension(g, p, r) and is_primitive_extension(g, q, r_rot):
                    return Bridge(r, r_rot, s, t, n, m)
                n *= 2
    raise ConstructionError("no bridge passed its certificates")


def extension_chain(g: Graph, p: Sequence[int], q: Sequence[int], validate: bool = True) -> MoveChain:
    """One type I move per appended prime factor: m = current prefix, D = {o, next factor}."""
    p, q = tuple(p), tuple(q)
    if not is_primitive_extension(g, p, q):
        raise ConstructionError("target is not a primitive extension")
    cuts = _cuts(g, q)
    moves = []
    for a, b in zip(cuts, cuts[1:]):
        if a < len(p):
            continue
        data = type_one(q[:a], (), q[a:b])
        coe = check_overlap_conditions(None, data, "prime extension") if validate else MarkerCoe(data, "prime extension")
        moves.append(MarkerMove(coe, f"extend by prime factor {len(moves) + 1}"))
    return MoveChain(tuple(moves), cyclic_class(None, p), cyclic_class(None, q))


def _rotation_at(g: Graph, c: Word, v: int) -> Word:
    for i, e in enumerate(c):
        if g.src[e] == v:
            return rotate(c, i)
    raise GraphError("cycle does not visit the vertex")


@lru_cache(maxsize=4096)
def _all_edges_chain(g: Graph, rep: Word) -> tuple[Word, MoveChain]:
    big = primitive_extension_all_edges(g, rep)
    return big, extension_chain(g, rep, big)


def _direct_extension(g: Graph, src: CyclicClass, dst: CyclicClass) -> MoveChain | None:
    """A single extension chain when one class extends a rotation of the other."""
    for a, b, flip in ((src, dst, False), (dst, src, True)):
        if a.length >= b.length:
            continue
        for i in range(a.length):
            p = rotate(a.rep, i)
            for j in range(b.length):
                q = rotate(b.rep, j)
                if q[:len(p)] == p and is_primitive_extension(g, p, q):
                    chain = extension_chain(g, p, q)
                    chain = chain.reversed() if flip else chain
                    chain = MoveChain(chain.moves, src, dst)
                    return chain if chain.verified() else None
    return None


def solve_transitivity(g: Graph, src: CyclicClass, dst: CyclicClass) -> MoveChain:
    """Fold-verified chain of marker moves carrying ``src`` to ``dst``."""
    if not src.primitive or not dst.primitive:
        raise GraphError("classes must be primitive")
    if src == dst:
        return MoveChain((), src, dst)
    direct = _direct_extension(g, src, dst)
    if direct is not None:
        return direct
    big_p, chain_p = _all_edges_chain(g, src.rep)
    big_q, chain_q = _all_edges_chain(g, dst.rep)
    base = g.src[big_p[0]]
    q_rot = _rotation_at(g, big_q, base)
    br = bridge_class(g, big_p, q_rot)
    mid_p = extension_chain(g, big_p, br.r)
    mid_q = extension_chain(g, q_rot, br.r_rot)
    tail = MoveChain(mid_q.moves, chain_q.target, mid_q.target).reversed() + chain_q.reversed()
    chain = chain_p + mid_p + tail
    chain = MoveChain(chain.moves, src, dst)
    if not chain.verified():
        raise ConstructionError("chain failed fold verification")
    return chain


# -- proximality family ---------------------------------------------------

@dataclass(frozen=True)
class PairCycle:
    e: int
    f: int
    p: Word

    @property
    def kind(self) -> str:
        return "I" if self.e == self.f else "II"

    def marker(self, n: int, validate: bool = True) -> MarkerCoe:
        d2 = self.p * n
        data = type_one((self.e,), (), d2) if self.e == self.f else type_two(self.e, self.f, (), d2)
        tag = f"pair ({self.e},{self.f}) n={n}"
        return check_overlap_conditions(None, data, tag) if validate else MarkerCoe(data, tag)


def pair_cycle_problems(g: Graph, e: int, f: int, p: Sequence[int], n_max: int = 4) -> list[str]:
    """Everything wrong with p as the data cycle for the pair (e, f)."""
    p = tuple(p)
    probs = []
    if not is_cycle(g, p) or g.src[p[0]] != g.dst[e]:
        return ["not a cycle at r(e)"]
    if not is_primitive(p):
        probs.append("not primitive")
    # every other pair must sit inside p itself, so that p^n carries it with positive density
    sp = enc(p)
    if enc((e, f)) in enc((e,) + p + (f,)):
        probs.append("ef segment in epf")
    for a in g.edges:
        for b in g.out_edges(g.dst[a]):
            if (a, b) != (e, f) and enc((a, b)) not in sp:
                probs.append(f"missing pair ({a},{b})")
    words = {n: (e,) + p * n + (f,) for n in range(1, n_max + 1)}
    ef = enc((e, f))
    extra = {1} if e == f else set()
    for n, w in words.items():
        if ef in enc(w):
            probs.append(f"ef segment for n={n}")
        if overlaps(w, w) != {len(w)} | extra:
            probs.append(f"self overlap for n={n}")
        for k, w2 in words.items():
            if k != n and overlaps(w, w2) != extra:
                probs.append(f"cross overlap ({n},{k})")
    return probs


def _covering_cycle(g: Graph, start_edge: int, end_vertex: int, avoid: set[int]) -> Word:
    """Walk from start_edge through every pair of edges outside ``avoid``, ending at end_vertex."""
    allowed = [x for x in g.edges if x not in avoid]
    todo = {(a, b) for a in allowed for b in allowed if g.dst[a] == g.src[b]}
    walk = [start_edge]

    def bfs(goal) -> list[int] | None:
        prev = {walk[-1]: None}
        dq = deque([walk[-1]])
        while dq:
            x = dq.popleft()
            if goal(x) and x != walk[-1]:
                path = []
                while x != walk[-1]:
                    path.append(x)
                    x = prev[x]
                return path[::-1]
            for y in allowed:
                if g.src[y] == g.dst[x] and y not in prev:
                    prev[y] = x
                    dq.append(y)
        return None

    while todo:
        last = walk[-1]
        direct = sorted(b for a, b in todo if a == last)
        if direct:
            walk.append(direct[0])
        else:
            heads = {a for a, _ in todo}
            path = bfs(lambda x: x in heads)
            if path is None:
                raise ConstructionError("pair graph is not strongly connected")
            walk.extend(path)
        for a, b in zip(walk, walk[1:]):
            todo.discard((a, b))
    if g.dst[walk[-1]] != end_vertex:
        path = bfs(lambda x: g.dst[x] == end_vertex)
        if path is None:
            raise ConstructionError("cannot close the covering walk")
        walk.extend(path)
    return tuple(walk)


def _rose_pair_cycle(g: Graph, e: int, f: int, reps: int = 1) -> Word:
    others = [x for x in g.edges if x not in (e, f)]
    rest = [x for x in g.edges if x != e]
    if e != f:
        e1 = others[0]
        # the doubled leading e puts the pair ee inside p as well
        q = [e, e] + [x for y in others for x in (e, y)] + [e, e1, f, e]
        pairs = [(a, b) for a in rest for b in rest]
        pairs.remove((e1, e1))
        pairs.remove((f, f))
        r = [e1, e1] + [x for ab in pairs for x in ab] + [f, f]
        word = q + r * reps
        return tuple(word[1:-1])
    # e = f: q = e e1 e e2 ... e eN e, and r avoids starting with e1
    q = [e] + [x for y in others for x in (y, e)]
    first = others[-1]
    pairs = [(a, b) for a in rest for b in rest]
    pairs.remove((first, first))
    r = [first, first] + [x for ab in pairs for x in ab]
    # a second e e1 after the r block keeps that pair inside p
    word = q + r * reps + [e, others[0]] + r
    return tuple(word[1:])


def _multi_vertex_pair_cycle(g: Graph, e: int, f: int, reps: int = 1) -> Word:
    v = g.src[f]
    outs = [x for x in g.out_edges(v) if x != f]
    non_loops = [x for x in outs if g.dst[x] != v]
    if not non_loops:
        raise ConstructionError("no non-loop edge leaves s(f)")
    f1 = non_loops[0]
    outs.remove(f1)
    fs = [f1] + outs
    cycles = []
    for fi in fs:
        if fi == e:
            cycles.append((e,))
            continue
        mid = shortest_path(g, g.dst[fi], g.src[e], removed=(e,))
        if mid is None:
            raise ConstructionError("E minus e is not strongly connected")
        cycles.append((fi,) + mid + (e,))
    head = [e] + [x for c in cycles for x in c]
    seg = enc(head)
    into = [x for x in g.in_edges(g.src[e]) if x != e and enc((x, e)) not in seg]
    if not into:
        # at least one block f1 ... e_j e, so that e f1 also occurs inside p
        into = [x for x in g.in_edges(g.src[e]) if x != e][:1]
    q = [x for c in cycles for x in c]
    for ej in into:
        mid = shortest_path(g, g.dst[f1], g.src[ej], removed=(e,))
        if mid is None:
            raise ConstructionError("E minus e is not strongly connected")
        q += [f1, *mid, ej, e]
    r = _covering_cycle(g, f1, v, {e})
    return tuple(q) + r * reps


def _search_pair_cycle(g: Graph, e: int, f: int, seed: int = 0, tries: int = 200) -> Word | None:
    """Randomized covering walks from r(e), checked against the pair-cycle properties."""
    rng = random.Random(seed)
    v = g.dst[e]
    edges = list(g.edges)
    for _ in range(tries):
        todo = {(a, b) for a in edges for b in g.out_edges(g.dst[a]) if (a, b) != (e, f)}
        walk = [e]
        steps = 0
        while (todo or g.dst[walk[-1]] != v or walk[-1] == e or len(walk) < 2) and steps < 50 * len(edges) ** 2:
            steps += 1
            choices = [b for b in g.out_edges(g.dst[walk[-1]]) if (walk[-1], b) != (e, f)]
            fresh = [b for b in choices if (walk[-1], b) in todo]
            nxt = rng.choice(fresh or choices)
            todo.discard((walk[-1], nxt))
            walk.append(nxt)
            if not todo and g.dst[nxt] == v and nxt != e:
                todo.discard((nxt, f))
                if (nxt, f) != (e, f):
                    break
        p = tuple(walk[1:])
        if p and not pair_cycle_problems(g, e, f, p):
            return p
    return None


def all_e2_cycle(g: Graph, e: int, f: int) -> Word:
    """Primitive cycle p at r(e) with e p f covering E^2 minus ef and clean overlaps."""
    c = classify(g)
    if not c.two_edge_connected:
        raise GraphError("graph must be 2-edge-connected")
    if g.num_vertices == 1 and g.num_edges == 2:
        raise GraphError("the 2-rose is handled by a separate construction")
    if g.dst[e] != g.src[f]:
        raise GraphError("(e, f) is not a path")
    builder = _rose_pair_cycle if g.num_vertices == 1 else _multi_vertex_pair_cycle
    # smallest exponent of r that passes verification
    for reps in range(1, 6):
        try:
            p = builder(g, e, f, reps)
        except ConstructionError:
            break
        if not pair_cycle_problems(g, e, f, p):
            return p
    p = _search_pair_cycle(g, e, f)
    if p is None:
        raise ConstructionError(f"no verified pair cycle for ({e},{f})")
    return p


@dataclass(frozen=True)
class ProximalityFamily:
    graph: Graph
    pairs: tuple[PairCycle, ...]

    @property
    def target(self) -> CyclicClass:
        return cyclic_class(None, self.pairs[0].p)

    def markers(self, n: int, validate: bool = True) -> list[MarkerCoe]:
        return [pc.marker(n, validate) for pc in self.pairs]

    def to_json(self) -> dict:
        return {"pairs": [{"e": pc.e, "f": pc.f, "p": list(pc.p), "kind": pc.kind} for pc in self.pairs]}


def proximality_family(g: Graph) -> ProximalityFamily:
    pairs = [(a, b) for a in g.edges for b in g.out_edges(g.dst[a])]
    pairs.sort()
    return ProximalityFamily(g, tuple(PairCycle(a, b, all_e2_cycle(g, a, b)) for a, b in pairs))


# -- compositions on compressed classes -----------------------------------

@dataclass
class CompressedCombo:
    """Weighted classes stored as ropes; frequencies are exact."""

    store: RopeStore
    terms: list[tuple[Fraction, Node]]

    @property
    def mass(self) -> Fraction:
        return sum((w * node.length for w, node in self.terms), Fraction(0))

    def count(self, pats: frozenset) -> Fraction:
        return sum((w * self.store.cyclic_count(node, pats) for w, node in self.terms), Fraction(0))

    def value(self, v: Sequence[int]) -> Fraction:
        return self.count(frozenset([enc(v)])) / self.mass

    def explicit(self, limit: int = 1 << 16) -> PeriodicCombo:
        if any(node.length > limit for _, node in self.terms):
            raise ValueError("classes too long to materialize")
        return PeriodicCombo(tuple((w, class_of_str(self.store.text(node))) for w, node in self.terms))


def _apply_stage(store: RopeStore, fam: ProximalityFamily, i: int, n: int, combo: CompressedCombo,
                 validate: bool) -> CompressedCombo:
    pc = fam.pairs[i]
    phi = pc.marker(n, validate)
    tx = MarkerTransducer(store, phi, data_power=(enc(pc.p), n))
    return CompressedCombo(store, [(w, tx.cyclic(node)) for w, node in combo.terms])


def run_composition(fam: ProximalityFamily, n: int, start: PeriodicCombo, validate: bool = True,
                    _before_last: list | None = None) -> CompressedCombo:
    """Push ``start`` through phi_n^(N), then phi_n^(N-1), ..., then phi_n^(1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    store = RopeStore()
    combo = CompressedCombo(store, [(w, store.leaf(enc(c.rep))) for w, c in start.terms])
    for i in range(len(fam.pairs) - 1, -1, -1):
        if i == 0 and _before_last is not None:
            _before_last.append(combo)
        combo = _apply_stage(store, fam, i, n, combo, validate)
    return combo


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    s: Fraction
    delta: Fraction
    bound: Fraction | None

    @property
    def bound_ok(self) -> bool | None:
        return None if self.bound is None else self.s >= self.bound


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple[ConvergenceRow, ...]
    threshold: Fraction
    reached: int | None

    def to_tsv(self) -> str:
        lines = ["n\tS\tS_decimal\tbound\tdelta"]
        for r in self.rows:
            b = "-" if r.bound is None else f"{float(r.bound):.6f}"
            lines.append(f"{r.n}\t{r.s.numerator}/{r.s.denominator}\t{float(r.s):.6f}\t{b}\t{float(r.delta):.6f}")
        lines.append(f"# reached\t{self.reached if self.reached is not None else 'not reached'}")
        return "\n".join(lines) + "\n"


def target_patterns(fam: ProximalityFamily, k: int) -> frozenset:
    p = enc(fam.pairs[0].p)
    return frozenset((p[j:] + p[:j]) * k for j in range(len(p)))


def convergence_row(fam: ProximalityFamily, start: PeriodicCombo, k: int, n: int) -> ConvergenceRow:
    before: list[CompressedCombo] = []
    result = run_composition(fam, n, start, _before_last=before)
    s = result.count(target_patterns(fam, k)) / result.mass
    first = fam.pairs[0]
    prev = before[0]
    delta = prev.count(frozenset([enc((first.e, first.f))])) / prev.mass
    plen = len(first.p)
    bound = None
    if n > k and delta > 0:
        bound = Fraction(plen * (n - k)) / (n * plen + 1 / delta)
    return ConvergenceRow(n, s, delta, bound)


def convergence_report(fam: ProximalityFamily, start: PeriodicCombo, k: int, eps: Fraction,
                       n_max: int) -> ConvergenceReport:
    if k < 1 or n_max < 1 or not 0 < eps < 1:
        raise ValueError("need K >= 1, n_max >= 1 and 0 < eps < 1")
    rows = tuple(convergence_row(fam, start, k, n) for n in range(1, n_max + 1))
    threshold = 1 - Fraction(eps)
    reached = next((r.n for r in rows if r.s >= threshold), None)
    return ConvergenceReport(rows, threshold, reached)


def infsum_total(pc: PairCycle, cls: CyclicClass, n_max: int) -> Fraction:
    """Sum over n <= n_max of n |p| freq(e p^n f, eta_[w])."""
    from .measures import freq

    total = Fraction(0)
    for n in range(1, n_max + 1):
        total += n * len(pc.p) * freq((pc.e,) + pc.p * n + (pc.f,), cls)
    return total


def default_start_classes(g: Graph) -> list[CyclicClass]:
    """Five short classes of distinct lengths used by the CLI and the acceptance run."""
    from .words import enumerate_primitive_classes

    classes = enumerate_primitive_classes(g, 4)
    picks: list[CyclicClass] = []
    for length in (1, 1, 2, 3, 4):
        for c in classes:
            if c.length == length and c not in picks:
                picks.append(c)
                break
    return picks
