"""Paths, cycles, cyclic classes, overlaps and occurrence counts.

A word is a tuple of edge ids; the empty path is ``()``.  Most inner loops
encode words as ``str`` (one code point per edge) so that matching runs in C.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

from .graph import Graph, GraphError, classify

Word = tuple[int, ...]


def enc(word: Sequence[int]) -> str:
    return "".join(map(chr, word))


def dec(text: str) -> Word:
    return tuple(map(ord, text))


# -- paths and cycles -----------------------------------------------------

def is_path(g: Graph, word: Sequence[int]) -> bool:
    if any(e not in g.edges for e in word):
        return False
    return all(g.dst[a] == g.src[b] for a, b in zip(word, word[1:]))


def require_path(g: Graph, word: Sequence[int]) -> Word:
    word = tuple(word)
    if not is_path(g, word):
        raise GraphError(f"not a path: {g.format_word(word) if all(e in g.edges for e in word) else word}")
    return word


def is_cycle(g: Graph, word: Sequence[int]) -> bool:
    return len(word) > 0 and is_path(g, word) and g.dst[word[-1]] == g.src[word[0]]


def require_cycle(g: Graph, word: Sequence[int]) -> Word:
    word = tuple(word)
    if not is_cycle(g, word):
        raise GraphError("not a cycle")
    return word


def prime_decomposition(g: Graph, cycle: Sequence[int]) -> list[Word]:
    """Cut the cycle each time the walk returns to its base vertex."""
    cycle = require_cycle(g, cycle)
    base = g.src[cycle[0]]
    out, start = [], 0
    for i, e in enumerate(cycle):
        if g.dst[e] == base:
            out.append(cycle[start:i + 1])
            start = i + 1
    return out


def prime_path_length(g: Graph, cycle: Sequence[int]) -> int:
    return len(prime_decomposition(g, cycle))


def is_prime(g: Graph, cycle: Sequence[int]) -> bool:
    return prime_path_length(g, cycle) == 1


def is_primitive(word: Sequence[int]) -> bool:
    """True iff the word is not a proper power."""
    if not word:
        return False
    s = enc(word) if not isinstance(word, str) else word
    return (s + s).find(s, 1) == len(s)


def primitive_root(word: Sequence[int]) -> Word:
    s = enc(word)
    k = (s + s).find(s, 1)
    return tuple(word[:k])


def least_period(word: Sequence[int]) -> int:
    """Length of the primitive root (the word is a power of a word this long)."""
    s = enc(word)
    return (s + s).find(s, 1)


def rotate(word: Sequence[int], k: int) -> Word:
    word = tuple(word)
    if not word:
        return word
    k %= len(word)
    return word[k:] + word[:k]


def least_rotation(word: Sequence) -> int:
    """Booth's algorithm: offset of the lexicographically least rotation."""
    s = list(word) * 2
    n = len(s)
    fail = [-1] * n
    k = 0
    for j in range(1, n):
        sj = s[j]
        i = fail[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = fail[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            fail[j - k] = -1
        else:
            fail[j - k] = i + 1
    return k


def canonical_rotation(word: Sequence[int]) -> Word:
    return rotate(word, least_rotation(word)) if word else ()


@dataclass(frozen=True, order=True)
class CyclicClass:
    """Rotation class of a cycle, keyed by its least rotation."""

    rep: Word
    primitive: bool
    size: int

    @property
    def length(self) -> int:
        return len(self.rep)

    def rotations(self) -> list[Word]:
        return [rotate(self.rep, k) for k in range(self.size)]

    def to_json(self) -> dict:
        return {"rep": list(self.rep), "primitive": self.primitive}

    @classmethod
    def from_json(cls, g: Graph, data: dict) -> "CyclicClass":
        return cyclic_class(g, data["rep"])


def cyclic_class(g: Graph | None, cycle: Sequence[int]) -> CyclicClass:
    """Class of ``cycle``; pass ``g=None`` to skip the cycle check in hot loops."""
    cycle = tuple(cycle) if g is None else require_cycle(g, cycle)
    if not cycle:
        raise GraphError("empty cycle")
    rep = canonical_rotation(cycle)
    period = least_period(rep)
    return CyclicClass(rep, period == len(rep), period)


def class_of_str(s: str) -> CyclicClass:
    """Fast path: class of an encoded cycle (no graph check)."""
    k = least_rotation(s)
    rep = s[k:] + s[:k]
    period = (rep + rep).find(rep, 1)
    return CyclicClass(dec(rep), period == len(rep), period)


# -- overlaps and occurrences --------------------------------------------

def overlaps(w: Sequence[int], w2: Sequence[int]) -> set[int]:
    """S(w, w2): lengths k > 0 with suffix_k(w) == prefix_k(w2).

    Computed from the prefix function of ``w2 # w``.
    """
    if not w or not w2:
        return set()
    s = list(w2) + [None] + list(w)
    pi = [0] * len(s)
    for i in range(1, len(s)):
        k = pi[i - 1]
        while k and s[i] != s[k]:
            k = pi[k - 1]
        if s[i] == s[k]:
            k += 1
        pi[i] = k
    out = set()
    k = pi[-1]
    while k:
        out.add(k)
        k = pi[k - 1]
    return out


def contains(word: Sequence[int], sub: Sequence[int]) -> bool:
    return enc(sub) in enc(word)


def count_segments(word: Sequence[int], sub: Sequence[int]) -> int:
    """Number of (possibly overlapping) occurrences of ``sub`` in ``word``."""
    return _count_overlapping(enc(word), enc(sub))


def _count_overlapping(text: str, pat: str) -> int:
    if not pat:
        return len(text) + 1
    count, i = 0, text.find(pat)
    while i != -1:
        count += 1
        i = text.find(pat, i + 1)
    return count


def cyclic_occurrences(w: str, pat: str) -> list[int]:
    """Positions i in [0, |w|) where ``pat`` starts in the periodic word w^inf."""
    n = len(w)
    reps = -(-(len(pat) + n) // n)
    text = w * reps
    out, i = [], text.find(pat)
    while i != -1 and i < n:
        out.append(i)
        i = text.find(pat, i + 1)
    return out


def occurrence_count(v: Sequence[int], cls: CyclicClass | Sequence[int]) -> int:
    """<v, [w]>: rotations w(k) of the class with v a prefix of w(k)^inf."""
    rep = cls.rep if isinstance(cls, CyclicClass) else tuple(cls)
    if not v:
        return len(rep)
    return len(cyclic_occurrences(enc(rep), enc(v)))


# -- prime-factor periodicity --------------------------------------------

@dataclass(frozen=True)
class CyclicShiftWitness:
    """Outcome of the shifted prime-factor comparison.

    ``factor_period`` is the least period in prime factors, ``letter_period``
    the least period in edges and ``bound`` is GCD(k, N).
    """

    factor_period: int
    letter_period: int
    bound: int


def general_cyclic_check(g: Graph, cycle: Sequence[int], k: int) -> CyclicShiftWitness | None:
    """Compare p[k, N-1] p[0, k-2] with p[0, N-2] on prime factors."""
    factors = prime_decomposition(g, cycle)
    n = len(factors)
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in [1, {n - 1}]")
    if factors[k:] + factors[:k - 1] != factors[:n - 1]:
        return None
    fp = next(d for d in range(1, n + 1) if n % d == 0 and factors == factors[:d] * (n // d))
    return CyclicShiftWitness(fp, least_period(cycle), gcd(k, n))


# -- enumeration -----------------------------------------------------------

def enumerate_primitive_classes(g: Graph, max_len: int) -> list[CyclicClass]:
    """All primitive classes with |p| <= max_len, by (length, rep).

    Walks the prenecklace tree (Fruchtman-Kociumaka-Meng ordering) over the
    edge alphabet, pruning prefixes that are not paths.
    """
    if not classify(g).sft_valid:
        raise GraphError("graph is not a valid SFT graph (needs strong connectivity, not a circle)")
    return list(iter_primitive_classes(g, max_len))


def iter_primitive_classes(g: Graph, max_len: int) -> list[CyclicClass]:
    ne = g.num_edges
    src, dst = g.src, g.dst
    out: list[Word] = []
    a = [0] * (max_len + 1)

    def walk(t: int, p: int) -> None:
        # a[1..t-1] fixed, p its prenecklace period
        if t - 1 >= 1 and p == t - 1 and dst[a[t - 1]] == src[a[1]]:
            out.append(tuple(a[1:t]))
        if t > max_len:
            return
        prev = a[t - 1] if t > 1 else None
        first = 0 if t == 1 else a[t - p]
        for j in range(first, ne):
            if prev is not None and src[j] != dst[prev]:
                continue
            a[t] = j
            walk(t + 1, p if j == first and t > 1 else t)

    walk(1, 1)
    out.sort(key=lambda w: (len(w), w))
    return [CyclicClass(w, True, len(w)) for w in out]


# -- eventually periodic points -----------------------------------------

@dataclass(frozen=True)
class EpPoint:
    """The eventually periodic path ``prefix cycle^inf`` in normal form.

    The cycle is primitive and the prefix is as short as possible, so equal
    fields are equivalent to equal infinite paths.  The cycle is the rotation
    that follows the prefix, not the least rotation of its class.
    """

    prefix: Word
    cycle: Word

    @classmethod
    def make(cls, prefix: Sequence[int], cycle: Sequence[int], g: Graph | None = None) -> "EpPoint":
        prefix, cycle = tuple(prefix), tuple(cycle)
        if not cycle:
            raise GraphError("eventually periodic point needs a nonempty cycle")
        if g is not None:
            require_cycle(g, cycle)
            if prefix:
                require_path(g, prefix + cycle[:1])
        cycle = primitive_root(cycle)
        while prefix and prefix[-1] == cycle[-1]:
            prefix = prefix[:-1]
            cycle = cycle[-1:] + cycle[:-1]
        return cls(prefix, cycle)

    def letters(self, n: int) -> Word:
        """First n letters of the infinite path."""
        out = list(self.prefix[:n])
        while len(out) < n:
            out.extend(self.cycle)
        return tuple(out[:n])

    def shift(self, k: int = 1) -> "EpPoint":
        prefix, cycle = self.prefix, self.cycle
        if k <= len(prefix):
            return EpPoint.make(prefix[k:], cycle)
        return EpPoint.make((), rotate(cycle, k - len(prefix)))

    def starts_with(self, word: Sequence[int]) -> bool:
        return self.letters(len(word)) == tuple(word)

    def cyclic_class(self) -> CyclicClass:
        return cyclic_class(None, self.cycle)

    def to_json(self) -> dict:
        return {"prefix": list(self.prefix), "cycle": list(self.cycle)}


def tail_equivalent(x: EpPoint, y: EpPoint) -> bool:
    return x.cyclic_class() == y.cyclic_class()


def all_words(g: Graph, n: int) -> Iterable[Word]:
    from .graph import all_paths

    return all_paths(g, n)
