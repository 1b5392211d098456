"""Periodic measures and their exact cylinder frequencies.

Invariant measures are represented by finite positive combinations of the
periodic measures eta_[p] (point masses on the |p| shifts of p^inf).  All
numbers are :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .graph import Graph, GraphError, all_paths, higher_edge_graph, remove_edge, shortest_path
from .marker import MarkerCoe, apply_point, cocycle_pair, f_phi
from .words import (
    CyclicClass,
    EpPoint,
    Word,
    class_of_str,
    enc,
    is_primitive,
    occurrence_count,
    require_path,
)


@dataclass(frozen=True)
class PeriodicMeasure:
    cls: CyclicClass

    @property
    def mass(self) -> int:
        return self.cls.length


@dataclass(frozen=True)
class PeriodicCombo:
    """Sum of ``weight * eta_[p]`` over the terms.

    Weights multiply the unnormalized measures (mass |p|).  Use
    :meth:`normalized` to build a combination of probability measures.
    """

    terms: tuple[tuple[Fraction, CyclicClass], ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("empty combination")
        for w, c in self.terms:
            if w <= 0:
                raise ValueError("weights must be positive")
            if not c.primitive:
                raise ValueError("periodic measures need primitive classes")

    @classmethod
    def single(cls, c: CyclicClass) -> "PeriodicCombo":
        return cls(((Fraction(1), c),))

    @classmethod
    def of(cls, items: Iterable[tuple[Fraction | int, CyclicClass]]) -> "PeriodicCombo":
        return cls(tuple((Fraction(w), c) for w, c in items))

    @classmethod
    def normalized(cls, items: Iterable[tuple[Fraction | int, CyclicClass]]) -> "PeriodicCombo":
        """Combination of the probability measures eta_[p] / |p|."""
        return cls(tuple((Fraction(w) / c.length, c) for w, c in items))

    @property
    def mass(self) -> Fraction:
        return sum((w * c.length for w, c in self.terms), Fraction(0))

    def value(self, v: Sequence[int]) -> Fraction:
        """Normalized measure of the cylinder Z(v)."""
        total = sum((w * occurrence_count(v, c) for w, c in self.terms), Fraction(0))
        return total / self.mass

    def merged(self) -> "PeriodicCombo":
        acc: dict[CyclicClass, Fraction] = {}
        for w, c in self.terms:
            acc[c] = acc.get(c, Fraction(0)) + w
        return PeriodicCombo(tuple(sorted(((w, c) for c, w in acc.items()), key=lambda t: (t[1].length, t[1].rep))))

    def to_json(self) -> list:
        return [{"weight": str(w), "class": c.to_json()} for w, c in self.terms]


def freq(v: Sequence[int], m: PeriodicMeasure | CyclicClass) -> Fraction:
    cls = m.cls if isinstance(m, PeriodicMeasure) else m
    return Fraction(occurrence_count(v, cls), cls.length)


@dataclass(frozen=True)
class FreqVector:
    depth: int
    values: dict[Word, Fraction]

    def __getitem__(self, v: Sequence[int]) -> Fraction:
        return self.values[tuple(v)]

    def consistency_errors(self, g: Graph) -> list[str]:
        """Violations of unit mass and one-letter-extension additivity."""
        errs = []
        total = sum(self.values[(e,)] for e in g.edges)
        if total != 1:
            errs.append(f"length-1 mass is {total}")
        for v, x in self.values.items():
            if len(v) < self.depth and v:
                ext = sum(self.values[v + (e,)] for e in g.out_edges(g.dst[v[-1]]))
                if ext != x:
                    errs.append(f"{v}: {x} != {ext}")
        return errs

    def to_tsv(self, g: Graph) -> str:
        rows = []
        for v, x in self.values.items():
            if v:
                rows.append(f"{g.format_word(v)}\t{x.numerator}/{x.denominator}")
        return "\n".join(rows) + "\n"


def words_up_to(g: Graph, depth: int) -> list[Word]:
    out: list[Word] = []
    for n in range(1, depth + 1):
        out += all_paths(g, n)
    return out


def freq_vector(g: Graph, m: PeriodicCombo, depth: int) -> FreqVector:
    return FreqVector(depth, {v: m.value(v) for v in words_up_to(g, depth)})


def proj_distance(g: Graph, m1: PeriodicCombo, m2: PeriodicCombo, depth: int) -> Fraction:
    return max(abs(m1.value(v) - m2.value(v)) for v in words_up_to(g, depth))


def pushforward(phi: MarkerCoe, m: PeriodicCombo) -> PeriodicCombo:
    """Each eta_[p] goes to eta_[F(p)] with its weight unchanged."""
    return PeriodicCombo(tuple((w, f_phi(phi, c)) for w, c in m.terms))


# -- integral formula oracle ----------------------------------------------

def psi_indicator(phi: MarkerCoe, v: Sequence[int], x: EpPoint) -> int:
    """Psi applied to the indicator of Z(v), evaluated at x."""
    k, l = cocycle_pair(phi, x)
    fx = apply_point(phi, x)
    fsx = apply_point(phi, x.shift(1))
    plus = sum(1 for i in range(l) if fx.shift(i).starts_with(v))
    minus = sum(1 for j in range(k) if fsx.shift(j).starts_with(v))
    return plus - minus


def pushforward_oracle(phi: MarkerCoe, cls: CyclicClass, v: Sequence[int]) -> int:
    """Orbit sum of psi_indicator over the |p| shifts of p^inf."""
    base = EpPoint.make((), cls.rep)
    return sum(psi_indicator(phi, v, base.shift(i)) for i in range(cls.length))


# -- subshifts and approximation -----------------------------------------

def forbid_word_subshift(g: Graph, n: int, w: Sequence[int]) -> tuple[Graph, list[Word]]:
    """E^[N] with the edge labelled ``w`` removed, plus the E^N labels of the remaining edges."""
    w = require_path(g, w)
    if len(w) != n:
        raise GraphError("word length must equal N")
    h, labels = higher_edge_graph(g, n)
    idx = labels.index(w)
    return remove_edge(h, idx), labels[:idx] + labels[idx + 1:]


def flatten_cycle(labels: Sequence[Word], cycle: Sequence[int]) -> Word:
    """Send a cycle of a higher edge graph to the word of first letters."""
    return tuple(labels[e][0] for e in cycle)


def class_word_frequencies(word: str, depth: int) -> dict[str, int]:
    """Counts of every cyclic window of length <= depth in the periodic word."""
    n = len(word)
    text = word * (-(-depth // n) + 1)
    counts: dict[str, int] = {}
    for r in range(1, depth + 1):
        for i in range(n):
            key = text[i:i + r]
            counts[key] = counts.get(key, 0) + 1
    return counts


def _distance_to_word(g: Graph, target: PeriodicCombo, word: str, depth: int,
                      words: list[Word], tv: dict[Word, Fraction]) -> Fraction:
    counts = class_word_frequencies(word, depth)
    n = len(word)
    return max(abs(Fraction(counts.get(enc(v), 0), n) - tv[v]) for v in words)


@dataclass(frozen=True)
class Approximation:
    cls: CyclicClass
    distance: Fraction
    scale: int


def approximate_by_periodic(g: Graph, m: PeriodicCombo, depth: int, eps: Fraction,
                            max_scale: int = 1 << 12) -> Approximation:
    """A single primitive class within ``eps`` of ``m`` at the given depth.

    Concatenates powers of the representatives (exponents proportional to the
    weights) with shortest connecting paths, doubling the scale until close.
    """
    terms = m.merged().terms
    if len(terms) == 1:
        c = terms[0][1]
        return Approximation(c, Fraction(0), 1)
    denom = 1
    for w, _ in terms:
        denom = lcm(denom, w.denominator)
    base = [int(w * denom) for w, _ in terms]
    reps = [c.rep for _, c in terms]
    connectors = []
    for i, r in enumerate(reps):
        nxt = reps[(i + 1) % len(reps)]
        path = shortest_path(g, g.src[r[0]], g.src[nxt[0]])
        if path is None:
            raise GraphError("graph is not strongly connected")
        connectors.append(path)
    words = words_up_to(g, depth)
    tv = {v: m.value(v) for v in words}
    best: Approximation | None = None
    scale = 1
    while scale <= max_scale:
        ks = [b * scale for b in base]
        for bump in range(len(reps) + 1):
            if bump:
                ks[bump - 1] += 1
            word = enc(tuple(x for r, k, c in zip(reps, ks, connectors) for x in r * k + c))
            if is_primitive(word):
                break
        else:
            scale *= 2
            continue
        dist = _distance_to_word(g, m, word, depth, words, tv)
        cand = Approximation(class_of_str(word), dist, scale)
        if best is None or dist < best.distance:
            best = cand
        if dist <= eps:
            return cand
        scale *= 2
    raise ApproximationError(f"scale cap reached; best distance {best.distance if best else None}", best)


class ApproximationError(RuntimeError):
    def __init__(self, message: str, best: Approximation | None):
        super().__init__(message)
        self.best = best
