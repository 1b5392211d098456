"""Marker continuous orbit equivalences.

A marker COE swaps the segments ``A = m d m'`` and ``B = m d' m'`` in a
greedy left-to-right scan.  Type I has ``m == m'``; type II has two distinct
single-edge markers.  Everything here works on the code-point encoding of
words (see :func:`markercoe.words.enc`) internally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .graph import Graph, GraphError
from .words import (
    CyclicClass,
    EpPoint,
    Word,
    class_of_str,
    cyclic_occurrences,
    dec,
    enc,
    is_path,
    overlaps,
    rotate,
    tail_equivalent,
)


class MarkerError(ValueError):
    """Marker data that is malformed or violates the overlap conditions."""

    def __init__(self, message: str, violations: list["Violation"] | None = None):
        super().__init__(message)
        self.violations = violations or []


@dataclass(frozen=True)
class Violation:
    condition: str
    offending: tuple[int, ...]

    def to_json(self) -> dict:
        return {"condition": self.condition, "offending": list(self.offending)}


@dataclass(frozen=True)
class MarkerData:
    m: Word
    m2: Word
    d: Word
    d2: Word

    @property
    def kind(self) -> str:
        return "I" if self.m == self.m2 else "II"

    def to_json(self) -> dict:
        return {"kind": self.kind, "m": list(self.m), "m2": list(self.m2),
                "d": list(self.d), "d2": list(self.d2)}

    @classmethod
    def from_json(cls, data: dict | str) -> "MarkerData":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            m = tuple(data["m"])
            m2 = tuple(data.get("m2", m))
            md = cls(m, m2, tuple(data["d"]), tuple(data["d2"]))
        except (KeyError, TypeError) as exc:
            raise MarkerError(f"malformed marker JSON: {exc}") from None
        if "kind" in data and data["kind"] != md.kind:
            raise MarkerError(f"kind {data['kind']!r} does not match markers")
        return md


def type_one(m: Sequence[int], d: Sequence[int], d2: Sequence[int]) -> MarkerData:
    return MarkerData(tuple(m), tuple(m), tuple(d), tuple(d2))


def type_two(m: int, m2: int, d: Sequence[int], d2: Sequence[int]) -> MarkerData:
    return MarkerData((m,), (m2,), tuple(d), tuple(d2))


def overlap_violations(g: Graph | None, data: MarkerData) -> list[Violation]:
    """All failing overlap conditions; raises on structural errors.

    ``g=None`` skips the composability checks (used when the data is known
    to come from paths of a graph).
    """
    m, m2, d, d2 = data.m, data.m2, data.d, data.d2
    if not m or not m2:
        raise MarkerError("markers must be nonempty")
    if d == d2:
        raise MarkerError("data words must differ")
    if data.kind == "II" and (len(m) != 1 or len(m2) != 1):
        raise MarkerError("type II markers must be single edges")
    a, b = m + d + m2, m + d2 + m2
    if g is not None and not (is_path(g, a) and is_path(g, b)):
        raise MarkerError("marker and data words are not composable")

    out = []
    sa, sb = enc(a), enc(b)
    if sa in sb:
        out.append(Violation("mdm' is a subword of md'm'", ()))
    if sb in sa:
        out.append(Violation("md'm' is a subword of mdm'", ()))
    if data.kind == "I":
        short = set(range(1, len(m) + 1))
        for name, x, y, allowed in (
            ("S(mdm, md'm)", a, b, short),
            ("S(md'm, mdm)", b, a, short),
            ("S(mdm, mdm)", a, a, short | {len(a)}),
            ("S(md'm, md'm)", b, b, short | {len(b)}),
        ):
            bad = overlaps(x, y) - allowed
            if bad:
                out.append(Violation(name, tuple(sorted(bad))))
    else:
        for name, x, y, allowed in (
            ("S(mdm', md'm')", a, b, set()),
            ("S(md'm', mdm')", b, a, set()),
            ("S(mdm', mdm')", a, a, {len(a)}),
            ("S(md'm', md'm')", b, b, {len(b)}),
        ):
            got = overlaps(x, y)
            if got != allowed:
                out.append(Violation(name, tuple(sorted(got ^ allowed))))
    return out


@dataclass(frozen=True)
class MarkerCoe:
    """Validated marker COE; construct with :func:`check_overlap_conditions`."""

    data: MarkerData
    tag: str = field(default="", compare=False)

    @property
    def kind(self) -> str:
        return self.data.kind

    @cached_property
    def a(self) -> Word:
        return self.data.m + self.data.d + self.data.m2

    @cached_property
    def b(self) -> Word:
        return self.data.m + self.data.d2 + self.data.m2

    @cached_property
    def _s(self) -> tuple[str, str, str, str, str, str]:
        """(A, B, md, md', m, m') encoded."""
        m, m2, d, d2 = self.data.m, self.data.m2, self.data.d, self.data.d2
        return enc(self.a), enc(self.b), enc(m + d), enc(m + d2), enc(m), enc(m2)

    @property
    def contraction(self) -> tuple[int, int]:
        """c = min(|A|,|B|)/max(|A|,|B|) as a (numerator, denominator) pair."""
        la, lb = len(self.a), len(self.b)
        return min(la, lb), max(la, lb)

    def to_json(self) -> dict:
        out = self.data.to_json()
        if self.tag:
            out["tag"] = self.tag
        return out


def check_overlap_conditions(g: Graph | None, data: MarkerData, tag: str = "") -> MarkerCoe:
    bad = overlap_violations(g, data)
    if bad:
        detail = "; ".join(f"{v.condition} has {list(v.offending)}" if v.offending else v.condition for v in bad)
        raise MarkerError(f"overlap conditions fail: {detail}", bad)
    return MarkerCoe(data, tag)


def is_valid_marker(g: Graph | None, data: MarkerData) -> bool:
    try:
        return not overlap_violations(g, data)
    except MarkerError:
        return False


# -- the map on paths --------------------------------------------------

def _scan(phi: MarkerCoe, text: str, start: int, stop: int) -> tuple[str, int]:
    """Rewrite ``text`` from ``start`` while the cursor is below ``stop``.

    Returns (output, final cursor).  Matches only consult ``text``, so the
    caller guarantees enough lookahead.
    """
    sa, sb, smd, smd2, _, _ = phi._s
    la, lb = len(smd), len(smd2)
    out = []
    i = start
    while i < stop:
        if text.startswith(sa, i):
            out.append(smd2)
            i += la
        elif text.startswith(sb, i):
            out.append(smd)
            i += lb
        else:
            out.append(text[i])
            i += 1
    return "".join(out), i


def apply_prefix(g: Graph, phi: MarkerCoe, x: Sequence[int], out_len: int) -> Word:
    """First ``out_len`` letters of phi(y) for every infinite extension y of x."""
    num, den = phi.contraction
    if out_len > (num * len(x)) // den:
        raise MarkerError(f"out_len {out_len} exceeds floor(c*|x|) = {(num * len(x)) // den}")
    if out_len <= 0:
        return ()
    x = tuple(x)
    if x and not is_path(g, x):
        raise GraphError("input is not a path")
    out = determined_image(phi, x)
    if len(out) < out_len:
        raise MarkerError(f"only {len(out)} output letters are determined by this input")
    return out[:out_len]


def determined_image(phi: MarkerCoe, x: Sequence[int]) -> Word:
    """The longest output prefix shared by phi(y) for all extensions y of x.

    The scan stops at the first cursor where the branch depends on letters
    beyond x.  (Near that point c*|x| letters need not be determined.)
    """
    text = enc(x)
    sa, sb, smd, smd2, _, _ = phi._s
    out = []
    i = 0
    while i < len(text):
        rest = text[i:]
        hit_a, hit_b = _match_state(rest, sa), _match_state(rest, sb)
        if hit_a is None or (hit_a is False and hit_b is None):
            break
        if hit_a:
            out.append(smd2)
            i += len(smd)
        elif hit_b:
            out.append(smd)
            i += len(smd2)
        else:
            out.append(text[i])
            i += 1
    return dec("".join(out))


def _match_state(rest: str, pat: str) -> bool | None:
    """True/False if ``pat`` surely does/doesn't start here, None if undecided."""
    if rest.startswith(pat):
        return True
    if pat.startswith(rest):
        return None
    return False


def apply_point(phi: MarkerCoe, x: EpPoint) -> EpPoint:
    """Exact image of ``prefix cycle^inf``.

    Cursor positions past the prefix are tracked by their phase modulo the
    cycle length; the first repeated phase closes the output period.
    """
    w, p = enc(x.prefix), enc(x.cycle)
    look = max(len(phi.a), len(phi.b))
    n = len(p)
    copies = -(-(look * (n + 3)) // n) + 1
    text = w + p * copies
    sa, sb, smd, smd2, _, _ = phi._s
    out: list[str] = []
    olen = 0
    seen: dict[int, int] = {}
    i = 0
    while True:
        if i >= len(w):
            phase = (i - len(w)) % n
            if phase in seen:
                o1 = seen[phase]
                flat = "".join(out)
                return EpPoint.make(dec(flat[:o1]), dec(flat[o1:]))
            seen[phase] = olen
        if i + look > len(text):
            raise MarkerError("internal: periodicity not detected within the unroll bound")
        if text.startswith(sa, i):
            out.append(smd2)
            olen += len(smd2)
            i += len(smd)
        elif text.startswith(sb, i):
            out.append(smd)
            olen += len(smd)
            i += len(smd2)
        else:
            out.append(text[i])
            olen += 1
            i += 1


def cocycle_pair(phi: MarkerCoe, x: EpPoint) -> tuple[int, int]:
    """(k(x), l(x)) with sigma^k(phi(sigma x)) == sigma^l(phi(x))."""
    m = len(phi.data.m)
    d, d2 = len(phi.data.d), len(phi.data.d2)
    if x.starts_with(phi.a):
        return m - 1 + d, m + d2
    if x.starts_with(phi.b):
        return m - 1 + d2, m + d
    return 0, 1


# -- cyclic classes ----------------------------------------------------

def _good_starts(phi: MarkerCoe, w: str) -> list[int]:
    """Rotation offsets of ``w`` that are good representatives."""
    sa, sb, smd, smd2, _, _ = phi._s
    n = len(w)
    occ_a = cyclic_occurrences(w, sa)
    occ_b = cyclic_occurrences(w, sb)
    if phi.kind == "I":
        # starts with m and ends with md or md': the wrap sits inside an occurrence
        starts = {(i + len(smd)) % n for i in occ_a} | {(i + len(smd2)) % n for i in occ_b}
    else:
        # ends with mdm' or md'm'
        starts = {(i + len(sa)) % n for i in occ_a} | {(i + len(sb)) % n for i in occ_b}
    return sorted(starts)


def _least(w: str, starts: list[int]) -> str:
    return min(w[k:] + w[:k] for k in starts)


def good_representative(phi: MarkerCoe, cls: CyclicClass) -> Word:
    w = enc(cls.rep)
    starts = _good_starts(phi, w)
    if not starts:
        return cls.rep
    return dec(_least(w, starts))


def f_bar(phi: MarkerCoe, w: Sequence[int]) -> Word:
    """The rewriting of a good representative (an encoded scan of one period)."""
    return dec(_f_bar_str(phi, enc(w)))


def _f_bar_str(phi: MarkerCoe, w: str) -> str:
    sa, sb, _, _, sm, _ = phi._s
    if phi.kind == "I":
        if not _wrap_hit(phi, w):
            return w
        y = w + sm
        out, i = _scan(phi, y, 0, len(w))
        if i != len(w):
            raise MarkerError("internal: scan overran the terminal marker; not a good representative")
        return out
    if not _wrap_hit(phi, w):
        return w
    out, i = _scan(phi, w, 0, len(w))
    if i != len(w):
        raise MarkerError("internal: scan overran the period; not a good representative")
    return out


def _wrap_hit(phi: MarkerCoe, w: str) -> bool:
    sa, sb, *_ = phi._s
    return bool(cyclic_occurrences(w, sa) or cyclic_occurrences(w, sb))


def f_phi(phi: MarkerCoe, cls: CyclicClass) -> CyclicClass:
    """Image class under the induced map on primitive classes."""
    if not cls.primitive:
        raise MarkerError("f_phi is exposed on primitive classes only")
    return class_of_str(f_phi_str(phi, enc(cls.rep)))


def f_phi_str(phi: MarkerCoe, w: str) -> str:
    """Encoded hot path: returns some representative of the image class."""
    starts = _good_starts(phi, w)
    if not starts:
        return w
    k = starts[0]
    return _f_bar_str(phi, w[k:] + w[:k])


# -- inner swaps -------------------------------------------------------

@dataclass(frozen=True)
class InnerSwap:
    """Swap of the disjoint cylinders Z(w1 z) and Z(w2 z) sharing the tail z^inf."""

    w1: Word
    w2: Word
    tail: Word

    @property
    def identity(self) -> bool:
        return self.w1 == self.w2

    def acts_on_class(self, cls: CyclicClass) -> CyclicClass:
        # a finite modification never changes the tail class
        return cls

    def to_json(self) -> dict:
        return {"w1": list(self.w1), "w2": list(self.w2), "tail": list(self.tail), "identity": self.identity}


def inner_swap(x: EpPoint, y: EpPoint) -> InnerSwap:
    """Prefixes w1, w2 of x and y, ending where a common tail starts, with disjoint cylinders."""
    if not tail_equivalent(x, y):
        raise MarkerError("points are not tail equivalent")
    if x == y:
        return InnerSwap(x.prefix, x.prefix, x.cycle)
    p = x.cycle
    # align y's cycle to x's rotation
    for shift in range(len(p)):
        if rotate(y.cycle, shift) == p:
            break
    y_prefix = y.prefix + y.cycle[:shift]
    w1, w2 = x.prefix, y_prefix
    # extend both by whole periods until neither is a prefix of the other
    while w1 == w2[:len(w1)] or w2 == w1[:len(w2)]:
        w1, w2 = w1 + p, w2 + p
    return InnerSwap(w1, w2, p)


@dataclass(frozen=True)
class MarkerMove:
    """A marker COE used as one step of a chain, with where it came from."""

    coe: MarkerCoe
    provenance: str = ""

    def to_json(self) -> dict:
        return {"provenance": self.provenance, "marker": self.coe.data.to_json()}
