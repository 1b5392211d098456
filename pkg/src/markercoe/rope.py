"""Compressed words for iterated marker rewriting.

Repeated application of marker maps with long data words ``p^n`` produces
cycles far too long to store.  A :class:`RopeStore` keeps hash-consed nodes

* ``Leaf(s)``: an explicit encoded string,
* ``Cat(children)``: concatenation,
* ``Pow(child, k)``: ``child`` repeated ``k`` times,

and rewrites them with a memoized transducer.  A marker scan only looks
``L - 1`` letters ahead (``L`` the longest marker segment), so the output of
a node depends on the entry carry and that much right context only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .marker import MarkerCoe, f_phi_str


class Node:
    __slots__ = ("kind", "a", "k", "length", "uid")

    def __init__(self, kind: str, a, k: int, length: int, uid: int):
        self.kind = kind
        self.a = a
        self.k = k
        self.length = length
        self.uid = uid

    def __repr__(self) -> str:
        return f"Node({self.kind}, len={self.length})"


class RopeError(RuntimeError):
    pass


class RopeStore:
    """Intern table plus caches; nodes from different stores must not mix."""

    merge_limit = 64
    inline_limit = 8

    def __init__(self):
        self._table: dict = {}
        self._prefix: dict = {}
        self._suffix: dict = {}
        self._counts: dict = {}
        self.empty = self._intern(("L", ""), lambda uid: Node("L", "", 0, 0, uid))

    def _intern(self, key, make):
        node = self._table.get(key)
        if node is None:
            node = make(len(self._table))
            self._table[key] = node
        return node

    def __len__(self) -> int:
        return len(self._table)

    # -- constructors ----------------------------------------------------

    def leaf(self, s: str) -> Node:
        return self._intern(("L", s), lambda uid: Node("L", s, 0, len(s), uid))

    def cat(self, parts) -> Node:
        flat: list[Node] = []
        for p in parts:
            if p.length == 0:
                continue
            # small concatenations are inlined; large ones stay shared subtrees
            if p.kind == "C" and len(p.a) <= self.inline_limit:
                flat.extend(p.a)
            else:
                flat.append(p)
        merged: list[Node] = []
        for p in flat:
            if (merged and p.kind == "L" and merged[-1].kind == "L"
                    and merged[-1].length + p.length <= self.merge_limit):
                merged[-1] = self.leaf(merged[-1].a + p.a)
            else:
                merged.append(p)
        if not merged:
            return self.empty
        if len(merged) == 1:
            return merged[0]
        kids = tuple(merged)
        key = ("C", tuple(x.uid for x in kids))
        return self._intern(key, lambda uid: Node("C", kids, 0, sum(x.length for x in kids), uid))

    def power(self, node: Node, k: int) -> Node:
        if k <= 0 or node.length == 0:
            return self.empty
        if k == 1:
            return node
        if node.kind == "P":
            return self.power(node.a, node.k * k)
        if node.kind == "L" and node.length * k <= self.merge_limit:
            return self.leaf(node.a * k)
        key = ("P", node.uid, k)
        return self._intern(key, lambda uid: Node("P", node, k, node.length * k, uid))

    # -- reading ---------------------------------------------------------

    def prefix(self, node: Node, n: int) -> str:
        """First min(n, |node|) letters."""
        if node.length <= n and node.kind == "L":
            return node.a
        key = (node.uid, n)
        hit = self._prefix.get(key)
        if hit is not None:
            return hit
        if node.kind == "L":
            out = node.a[:n]
        elif node.kind == "C":
            buf, need = [], n
            for c in node.a:
                if need <= 0:
                    break
                piece = self.prefix(c, need)
                buf.append(piece)
                need -= len(piece)
            out = "".join(buf)
        else:
            child = node.a
            if child.length >= n:
                out = self.prefix(child, n)
            else:
                reps = min(node.k, -(-n // child.length))
                out = (self.prefix(child, child.length) * reps)[:n]
        self._prefix[key] = out
        return out

    def suffix(self, node: Node, n: int) -> str:
        """Last min(n, |node|) letters."""
        if node.length <= n and node.kind == "L":
            return node.a
        key = (node.uid, n)
        hit = self._suffix.get(key)
        if hit is not None:
            return hit
        if node.kind == "L":
            out = node.a[-n:] if n else ""
        elif node.kind == "C":
            buf, need = [], n
            for c in reversed(node.a):
                if need <= 0:
                    break
                piece = self.suffix(c, need)
                buf.append(piece)
                need -= len(piece)
            out = "".join(reversed(buf))
        else:
            child = node.a
            if child.length >= n:
                out = self.suffix(child, n)
            else:
                reps = min(node.k, -(-n // child.length))
                whole = self.prefix(child, child.length) * reps
                out = whole[-n:] if n else ""
        self._suffix[key] = out
        return out

    def text(self, node: Node) -> str:
        return self.prefix(node, node.length)

    def periodic_prefix(self, node: Node, n: int) -> str:
        """First n letters of node^inf."""
        if node.length >= n:
            return self.prefix(node, n)
        s = self.text(node)
        return (s * (-(-n // len(s))))[:n]

    # -- window counting -------------------------------------------------

    def _state(self, node: Node, pats: frozenset, lam: int):
        """(count, prefix, suffix) of windows of length lam lying inside node."""
        key = (node.uid, pats)
        hit = self._counts.get(key)
        if hit is not None:
            return hit
        if node.kind == "L":
            s = node.a
            cnt = sum(1 for i in range(len(s) - lam + 1) if s[i:i + lam] in pats)
            st = (cnt, s[:lam - 1], s[-(lam - 1):] if lam > 1 else "", len(s))
        elif node.kind == "C":
            st = None
            for c in node.a:
                cs = self._state(c, pats, lam)
                st = cs if st is None else _combine(st, cs, pats, lam)
        else:
            st = _power_state(self._state(node.a, pats, lam), node.k, pats, lam)
        self._counts[key] = st
        return st

    def count(self, node: Node, pats: frozenset) -> int:
        """Occurrences of any pattern (all of one length) inside the linear word."""
        lam = len(next(iter(pats)))
        return self._state(node, pats, lam)[0]

    def cyclic_count(self, node: Node, pats: frozenset) -> int:
        """Occurrences of any pattern in the periodic word node^inf, per period."""
        lam = len(next(iter(pats)))
        if node.length < 2 * lam:
            s = self.text(node)
            text = s * (-(-(lam + len(s)) // len(s)) + 1)
            return sum(1 for i in range(len(s)) if text[i:i + lam] in pats)
        cnt, pre, suf, _ = self._state(node, pats, lam)
        junction = suf + pre
        return cnt + sum(1 for i in range(len(junction) - lam + 1) if junction[i:i + lam] in pats)


@lru_cache(maxsize=1 << 16)
def _cross(x1: str, p2: str, pats: frozenset, lam: int) -> int:
    """Windows that start in x1 and end in p2."""
    junction = x1 + p2
    start = max(0, len(x1) - lam + 1)
    return sum(1 for i in range(start, len(x1)) if i + lam <= len(junction) and junction[i:i + lam] in pats)


def _combine(s1, s2, pats, lam):
    c1, p1, x1, n1 = s1
    c2, p2, x2, n2 = s2
    w = lam - 1
    cross = _cross(x1, p2, pats, lam)
    pre = p1 if n1 >= w else (p1 + p2)[:w]
    suf = x2 if n2 >= w else (x1 + x2)[-w:] if w else ""
    return (c1 + c2 + cross, pre, suf, n1 + n2)


def _power_state(st, k, pats, lam):
    result = None
    base = st
    while k:
        if k & 1:
            result = base if result is None else _combine(result, base, pats, lam)
        k >>= 1
        if k:
            base = _combine(base, base, pats, lam)
    return result


@dataclass
class _Replacements:
    md: Node
    md2: Node


class MarkerTransducer:
    """Memoized marker scan over ropes of one store.

    ``data_power`` lets callers describe the data word ``d'`` as a power
    ``base^k`` so that replacements stay compressed.
    """

    def __init__(self, store: RopeStore, phi: MarkerCoe, data_power: tuple[str, int] | None = None,
                 explicit_limit: int | None = None):
        self.store = store
        self.phi = phi
        sa, sb, smd, smd2, sm, _ = phi._s
        self.sa, self.sb = sa, sb
        self.la, self.lb = len(smd), len(smd2)
        self.look = max(len(sa), len(sb))
        self.memo: dict = {}
        self.rep = _Replacements(self._compressed(smd, sm, data_power, phi.data.d),
                                 self._compressed(smd2, sm, data_power, phi.data.d2))
        self.explicit_limit = explicit_limit if explicit_limit is not None else 4 * self.look + 64

    def _compressed(self, whole: str, sm: str, data_power, data) -> Node:
        st = self.store
        if data_power is not None:
            base, k = data_power
            if len(data) == len(base) * k and whole == sm + base * k:
                return st.cat([st.leaf(sm), st.power(st.leaf(base), k)])
        return st.leaf(whole) if len(whole) <= 4096 else st.cat([st.leaf(whole[i:i + 4096]) for i in range(0, len(whole), 4096)])

    def process(self, node: Node, carry: int, ctx: str) -> tuple[Node, int]:
        """Rewrite ``node`` entered with ``carry`` letters already consumed.

        ``ctx`` is the next ``look - 1`` letters after the node.
        """
        if carry >= node.length:
            return self.store.empty, carry - node.length
        key = (node.uid, carry, ctx)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if node.kind == "L":
            res = self._leaf(node.a, carry, ctx)
        elif node.kind == "C":
            res = self._cat(node, carry, ctx)
        else:
            res = self._pow(node, carry, ctx)
        self.memo[key] = res
        return res

    def _leaf(self, s: str, carry: int, ctx: str) -> tuple[Node, int]:
        st = self.store
        text = s + ctx
        sa, sb, la, lb = self.sa, self.sb, self.la, self.lb
        pieces: list[Node] = []
        buf: list[str] = []
        i, n = carry, len(s)
        while i < n:
            if text.startswith(sa, i):
                if buf:
                    pieces.append(st.leaf("".join(buf)))
                    buf = []
                pieces.append(self.rep.md2)
                i += la
            elif text.startswith(sb, i):
                if buf:
                    pieces.append(st.leaf("".join(buf)))
                    buf = []
                pieces.append(self.rep.md)
                i += lb
            else:
                buf.append(text[i])
                i += 1
        if buf:
            pieces.append(st.leaf("".join(buf)))
        return st.cat(pieces), i - n

    def _cat(self, node: Node, carry: int, ctx: str) -> tuple[Node, int]:
        st = self.store
        w = self.look - 1
        kids = node.a
        ctxs = [""] * len(kids)
        nxt = ctx
        for j in range(len(kids) - 1, -1, -1):
            ctxs[j] = nxt
            nxt = (st.prefix(kids[j], w) + nxt)[:w] if kids[j].length < w else st.prefix(kids[j], w)
        outs = []
        for j, kid in enumerate(kids):
            o, carry = self.process(kid, carry, ctxs[j])
            outs.append(o)
        return st.cat(outs), carry

    def _pow(self, node: Node, carry: int, ctx: str) -> tuple[Node, int]:
        st = self.store
        child, k = node.a, node.k
        w = self.look - 1
        tail = min(k, -(-w // child.length)) if w else 0
        head = k - tail
        outs: list[Node] = []
        if head:
            inner = st.periodic_prefix(child, w)
            seen: dict[int, int] = {}
            carries: list[int] = []
            houts: list[Node] = []
            j = 0
            while j < head:
                if carry in seen:
                    mu = seen[carry]
                    lam = j - mu
                    q, rem = divmod(head - j, lam)
                    cycle = st.cat(houts[mu:j])
                    houts.append(st.power(cycle, q))
                    houts.extend(houts[mu:mu + rem])
                    carry = carries[mu + rem]
                    break
                seen[carry] = j
                carries.append(carry)
                o, carry = self.process(child, carry, inner)
                houts.append(o)
                j += 1
            outs.extend(houts)
        if tail:
            body = st.text(child) if child.length < w else None
            for r in range(tail - 1, -1, -1):
                if body is not None:
                    c = (body * r + ctx)[:w]
                else:
                    c = (st.prefix(child, w) + ctx)[:w] if r else ctx
                o, carry = self.process(child, carry, c)
                outs.append(o)
        return st.cat(outs), carry

    def cyclic(self, node: Node) -> Node:
        """A representative of the image class of the periodic word node^inf."""
        st = self.store
        if node.length <= self.explicit_limit:
            return st.leaf(f_phi_str(self.phi, st.text(node)))
        ctx = st.periodic_prefix(node, self.look - 1)
        carry = 0
        for _ in range(4):
            out, nxt = self.process(node, carry, ctx)
            if nxt == carry:
                return out
            carry = nxt
        raise RopeError("scan did not synchronise on the periodic word")
