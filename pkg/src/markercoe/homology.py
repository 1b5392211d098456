"""Integer linear algebra for the groupoid homology of an edge shift.

H0 is the cokernel of I - A^t with the unit given by the all-ones vertex
vector, H1 its kernel.  The Smith form comes with unimodular transforms and
is re-verified on every call.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import gcd, prod

from .graph import Graph, GraphError, classify, from_adjacency, higher_edge_graph

Matrix = list[list[int]]


class HomologyError(RuntimeError):
    pass


# -- small matrix helpers ------------------------------------------------

def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in cols] for row in a]


def transpose(a: Matrix) -> Matrix:
    return [list(r) for r in zip(*a)]


def det(a: Matrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(a)
    m = [row[:] for row in a]
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1] if n else 1


def adjacency_matrix(g: Graph) -> Matrix:
    return [list(r) for r in g.adjacency()]


def i_minus_at(g: Graph) -> Matrix:
    a = adjacency_matrix(g)
    n = len(a)
    return [[int(i == j) - a[j][i] for j in range(n)] for i in range(n)]


# -- Smith normal form ---------------------------------------------------

@dataclass(frozen=True)
class SnfResult:
    """U M V = D with D diagonal and d_1 | d_2 | ... (zeros last)."""

    diagonal: tuple[int, ...]
    u: Matrix = field(repr=False)
    v: Matrix = field(repr=False)
    shape: tuple[int, int]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)

    @property
    def kernel_rank(self) -> int:
        return self.shape[1] - self.rank

    @property
    def free_rank(self) -> int:
        """Free rank of the cokernel."""
        return self.shape[0] - self.rank

    @property
    def torsion(self) -> tuple[int, ...]:
        return tuple(d for d in self.diagonal if d > 1)


def smith_normal_form(m: Matrix) -> SnfResult:
    """Elementary row/column reduction with smallest-pivot selection."""
    rows, cols = len(m), len(m[0]) if m else 0
    if rows == 0 or cols == 0:
        raise ValueError("matrix must be non-empty")
    a = [list(map(int, r)) for r in m]
    u, v = identity(rows), identity(cols)

    def row_op(i, j, q):  # row_i -= q row_j
        a[i] = [x - q * y for x, y in zip(a[i], a[j])]
        u[i] = [x - q * y for x, y in zip(u[i], u[j])]

    def col_op(i, j, q):  # col_i -= q col_j
        for r in a:
            r[i] -= q * r[j]
        for r in v:
            r[i] -= q * r[j]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    t = 0
    while t < min(rows, cols):
        nz = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            done = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    row_op(i, t, a[i][t] // a[t][t])
                    if a[i][t]:
                        swap_rows(t, i)
                        done = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    col_op(j, t, a[t][j] // a[t][t])
                    if a[t][j]:
                        swap_cols(t, j)
                        done = False
            if not done:
                continue
            # pivot must divide the rest of the block
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if a[i][j] % a[t][t]), None)
            if bad is None:
                break
            row_op(t, bad[0], -1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    diag = tuple(a[i][i] for i in range(min(rows, cols)))
    res = SnfResult(diag, u, v, (rows, cols))
    _verify_snf(m, res)
    return res


def _verify_snf(m: Matrix, res: SnfResult) -> None:
    rows, cols = res.shape
    prod_ = matmul(matmul(res.u, m), res.v)
    for i in range(rows):
        for j in range(cols):
            want = res.diagonal[i] if i == j else 0
            if prod_[i][j] != want:
                raise HomologyError("Smith form failed re-multiplication")
    if abs(det(res.u)) != 1 or abs(det(res.v)) != 1:
        raise HomologyError("Smith transforms are not unimodular")
    nz = [d for d in res.diagonal if d]
    if any(d < 0 for d in res.diagonal) or any(b % a for a, b in zip(nz, nz[1:])):
        raise HomologyError("invariant factors fail the divisibility chain")
    if 0 in res.diagonal and any(res.diagonal[res.diagonal.index(0):]):
        raise HomologyError("zero invariant factors must come last")


# -- groups --------------------------------------------------------------

@dataclass(frozen=True)
class AbelianInvariant:
    """Z^free_rank + sum of Z/m_i, with an optional unit class.

    ``unit`` holds coordinates in the Smith basis: the first entries are
    residues mod the torsion factors, the rest are free coordinates.
    """

    free_rank: int
    torsion: tuple[int, ...]
    unit: tuple[int, ...] | None = None

    @property
    def finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self) -> int | None:
        return prod(self.torsion) if self.finite else None

    @property
    def trivial(self) -> bool:
        return self.finite and not self.torsion

    def unit_order(self) -> int | None:
        """Order of the unit class (None when infinite or absent)."""
        if self.unit is None:
            return None
        k = len(self.torsion)
        if any(self.unit[k:]):
            return None
        out = 1
        for m, x in zip(self.torsion, self.unit):
            out = out * (m // gcd(m, x)) // gcd(out, m // gcd(m, x))
        return out

    def __str__(self) -> str:
        parts = ["Z" if self.free_rank == 1 else f"Z^{self.free_rank}"] if self.free_rank else []
        parts += [f"Z/{m}" for m in self.torsion]
        return " ⊕ ".join(parts) if parts else "0"

    def to_json(self) -> dict:
        out = {"free_rank": self.free_rank, "torsion": list(self.torsion), "text": str(self)}
        if self.unit is not None:
            out["unit"] = list(self.unit)
        return out


def cokernel(m: Matrix, vector: list[int] | None = None) -> AbelianInvariant:
    """Z^rows / image(m), optionally with the class of ``vector``."""
    res = smith_normal_form(m)
    rows = res.shape[0]
    keep = [i for i in range(rows) if i >= len(res.diagonal) or res.diagonal[i] != 1]
    tors_idx = [i for i in keep if i < len(res.diagonal) and res.diagonal[i] > 1]
    free_idx = [i for i in keep if i not in tors_idx]
    unit = None
    if vector is not None:
        y = [sum(a * b for a, b in zip(row, vector)) for row in res.u]
        unit = tuple([y[i] % res.diagonal[i] for i in tors_idx] + [y[i] for i in free_idx])
    return AbelianInvariant(len(free_idx), tuple(res.diagonal[i] for i in tors_idx), unit)


@dataclass(frozen=True)
class Homology:
    h0: AbelianInvariant
    h1_rank: int
    snf: SnfResult = field(repr=False)

    def to_json(self) -> dict:
        return {"H0": self.h0.to_json(), "H1_rank": self.h1_rank, "invariant_factors": list(self.snf.diagonal)}


def groupoid_homology(g: Graph) -> Homology:
    if not classify(g).sft_valid:
        raise GraphError("graph is not a valid SFT graph")
    m = i_minus_at(g)
    snf = smith_normal_form(m)
    h0 = cokernel(m, [1] * g.num_vertices)
    return Homology(h0, snf.kernel_rank, snf)


def abelianization_FD(g: Graph) -> AbelianInvariant:
    """(H0 tensor Z/2) + H1 for the commutator quotient."""
    h = groupoid_homology(g)
    twos = [2 for m in h.h0.torsion if m % 2 == 0] + [2] * h.h0.free_rank
    return AbelianInvariant(h.h1_rank, tuple(twos))


@dataclass(frozen=True)
class Verdict:
    simple: bool
    reason: str

    def __bool__(self) -> bool:
        return self.simple


def out_D_cstar_simple(g: Graph) -> Verdict:
    h0 = groupoid_homology(g).h0
    if not h0.finite:
        return Verdict(False, f"H0 = {h0} is infinite")
    even = [m for m in h0.torsion if m % 2 == 0]
    if even:
        return Verdict(False, f"2-torsion in H0 = {h0}")
    return Verdict(True, f"H0 = {h0} is finite without 2-torsion")


# -- unit-preserving isomorphism -----------------------------------------

def _prime_powers(n: int) -> dict[int, int]:
    out, p = {}, 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _local_data(inv: AbelianInvariant) -> dict:
    """Per prime: sorted exponents of the cyclic factors and, for the unit,
    the multiset of (factor exponent, valuation) pairs.  Two finite groups with
    distinguished elements are isomorphic as pairs iff these agree."""
    out: dict[int, tuple] = {}
    primes = set()
    for m in inv.torsion:
        primes |= set(_prime_powers(m))
    for p in sorted(primes):
        items = []
        for m, x in zip(inv.torsion, inv.unit or (0,) * len(inv.torsion)):
            k = _prime_powers(m).get(p, 0)
            if not k:
                continue
            pk = p ** k
            r = x % pk
            val = k if r == 0 else next(v for v in range(k) if r % p ** (v + 1))
            items.append((k, val))
        out[p] = _height_profile(p, items)
    return out


def _height_profile(p: int, items: list[tuple[int, int]]) -> tuple:
    """Isomorphism type of (finite p-group, element) via Ulm-style invariants.

    The element (x_i) in sum Z/p^{k_i} is classified by the exponents k_i and
    the height sequence of x, i.e. for each t the p-height of p^t x.
    """
    ks = tuple(sorted(k for k, _ in items))
    heights = []
    for t in range(max(ks, default=0) + 1):
        # p^t x has coordinate valuations v_i + t, capped at k_i
        hs = [min(v + t, k) for k, v in items]
        live = [h for (k, _), h in zip(items, hs) if h < k]
        heights.append(min(live) if live else None)
    return ks, tuple(heights)


def isomorphic_with_unit(a: AbelianInvariant, b: AbelianInvariant) -> bool | None:
    """Exact for finite groups; None (undecided) when either side is infinite."""
    if a.free_rank != b.free_rank:
        return False
    if a.free_rank:
        if sorted(a.torsion) != sorted(b.torsion):
            return False
        return None
    if a.order != b.order:
        return False
    return _local_data(a) == _local_data(b)


def brute_force_iso_with_unit(a: AbelianInvariant, b: AbelianInvariant) -> bool:
    """Search all homomorphisms between small finite groups (oracle)."""
    if not (a.finite and b.finite) or a.order != b.order:
        return False
    ga = list(itertools.product(*[range(m) for m in a.torsion]))
    gb_mod = b.torsion

    def add(x, y):
        return tuple((p + q) % m for p, q, m in zip(x, y, gb_mod))

    def scale(x, k):
        return tuple((p * k) % m for p, m in zip(x, gb_mod))

    gb = list(itertools.product(*[range(m) for m in gb_mod]))
    # images of the generators of a; the generator of Z/m must go to an m-torsion element
    choices = [[y for y in gb if not any(scale(y, m))] for m in a.torsion]
    ua = a.unit or (0,) * len(a.torsion)
    ub = b.unit or (0,) * len(b.torsion)
    for imgs in itertools.product(*choices):
        def f(x):
            acc = tuple(0 for _ in gb_mod)
            for c, y in zip(x, imgs):
                acc = add(acc, scale(y, c))
            return acc

        if f(ua) != tuple(ub):
            continue
        if len({f(x) for x in ga}) == len(gb):
            return True
    return False


# -- the 2-edge-connected model -------------------------------------------

@dataclass(frozen=True)
class EktwRecord:
    two_edge_connected: bool
    factors_match: bool
    kernel_match: bool
    det_sign_match: bool
    unit_match: bool | None
    unit_check: str
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return (self.two_edge_connected and self.factors_match and self.kernel_match
                and self.det_sign_match and self.unit_match is not False)

    def to_json(self) -> dict:
        return {
            "two_edge_connected": self.two_edge_connected,
            "invariant_factors_match": self.factors_match,
            "kernel_rank_match": self.kernel_match,
            "det_sign_match": self.det_sign_match,
            "unit_match": self.unit_match,
            "unit_check": self.unit_check,
            "notes": list(self.notes),
            "passed": self.passed,
        }


@dataclass(frozen=True)
class EktwModel:
    graph: Graph
    b_matrix: Matrix
    swapped: bool
    record: EktwRecord

    def to_json(self) -> dict:
        return {
            "adjacency": [list(r) for r in self.graph.adjacency()],
            "B": self.b_matrix,
            "C_swap": self.swapped,
            "record": self.record.to_json(),
        }


def _sign(x: int) -> int:
    return (x > 0) - (x < 0)


def _b_matrix(ms: list[int], bs: list[int]) -> Matrix:
    k = len(ms)
    rows = [[1] * (k + 1)]
    for i in range(k):
        rows.append([bs[i] + (ms[i] if j == i + 1 else 0) for j in range(k + 1)])
    return rows


def _c_swap(n: int) -> Matrix:
    c = identity(n)
    c[-1], c[-2] = c[-2], c[-1]
    return c


def ektw_model(g: Graph, search: int = 6) -> EktwModel:
    """A 2-edge-connected graph F with the same H0 (with unit), H1 and det sign."""
    h = groupoid_homology(g)
    h0 = h.h0
    ms = list(h0.torsion) + [0] * h0.free_rank
    units = list(h0.unit or ())
    if not ms:
        ms, units = [1], [0]
    # sign of det(I - A) is the flow invariant; compare it directly
    target_det = _sign(det(i_minus_at(g)))
    notes = []
    for bump in range(search):
        bs = []
        for m, u in zip(ms, units):
            if m > 1:
                b = (1 - u) % m or m
            else:
                b = 1
            bs.append(b + bump * (m if m > 1 else 1))
        if bump:
            notes.append(f"b vector raised by {bump} periods")
        bmat = _b_matrix(ms, bs)
        n = len(bmat)
        # I - A_F^t = -B, so det(I - A_F) = (-1)^n det B
        d = (-1) ** n * det(bmat)
        swapped = False
        if _sign(d) != target_det:
            bmat = matmul(bmat, _c_swap(n))
            swapped = True
        af = [[x + int(i == j) for j, x in enumerate(r)] for i, r in enumerate(transpose(bmat))]
        if any(x < 0 for r in af for x in r):
            continue
        f = from_adjacency(af)
        if not classify(f).two_edge_connected:
            f2, _ = higher_edge_graph(f, 2)
            notes.append("replaced by the 2nd higher edge graph")
            f = f2
        rec = _verify_model(g, h, f, notes)
        if rec.passed:
            return EktwModel(f, bmat, swapped, rec)
    raise HomologyError("no verified model found within the search bound")


def _verify_model(g: Graph, h: Homology, f: Graph, notes: list[str]) -> EktwRecord:
    cf = classify(f)
    hf = groupoid_homology(f)
    factors = hf.h0.torsion == h.h0.torsion and hf.h0.free_rank == h.h0.free_rank
    ker = hf.h1_rank == h.h1_rank
    sign_g = _sign(det(i_minus_at(g)))
    sign_f = _sign(det(i_minus_at(f)))
    unit = isomorphic_with_unit(h.h0, hf.h0)
    how = "exact (finite H0, height invariants)" if h.h0.finite else "undecided for infinite H0; torsion and rank matched"
    return EktwRecord(cf.two_edge_connected and cf.sft_valid, factors, ker, sign_g == sign_f, unit, how, tuple(notes))
