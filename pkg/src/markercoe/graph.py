"""Finite directed multigraphs and the structural predicates used downstream.

Vertices and edges are dense integer ids.  Edge order (by id) is the total
order every later module uses for canonical representatives.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from math import gcd
from typing import Iterable, Sequence


class GraphError(ValueError):
    """Raised for malformed graphs or operations outside their domain."""


@dataclass(frozen=True)
class Graph:
    """Directed multigraph ``E = (E0, E1)`` with source/range maps.

    ``src[e]`` and ``dst[e]`` are the source and range vertex of edge ``e``.
    ``labels`` are optional display names (one per edge).
    """

    num_vertices: int
    src: tuple[int, ...]
    dst: tuple[int, ...]
    labels: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.num_vertices < 1:
            raise GraphError("graph needs at least one vertex")
        if len(self.src) != len(self.dst):
            raise GraphError("src and dst must have equal length")
        for e, (s, t) in enumerate(zip(self.src, self.dst)):
            if not (0 <= s < self.num_vertices and 0 <= t < self.num_vertices):
                raise GraphError(f"edge {e} has dangling endpoint ({s}->{t})")
        if self.labels is not None and len(self.labels) != len(self.src):
            raise GraphError("one label per edge required")

    @property
    def vertices(self) -> range:
        return range(self.num_vertices)

    @property
    def edges(self) -> range:
        return range(len(self.src))

    @property
    def num_edges(self) -> int:
        return len(self.src)

    def out_edges(self, v: int) -> list[int]:
        return [e for e in self.edges if self.src[e] == v]

    def in_edges(self, v: int) -> list[int]:
        return [e for e in self.edges if self.dst[e] == v]

    def adjacency(self) -> list[list[int]]:
        """Vertex adjacency matrix ``A[u][v]`` = number of edges u -> v."""
        a = [[0] * self.num_vertices for _ in self.vertices]
        for s, t in zip(self.src, self.dst):
            a[s][t] += 1
        return a

    def label(self, e: int) -> str:
        return self.labels[e] if self.labels else str(e)

    def format_word(self, word: Sequence[int]) -> str:
        if not word:
            return "o"
        if self.labels and all(len(x) == 1 for x in self.labels):
            return "".join(self.labels[e] for e in word)
        return " ".join(self.label(e) for e in word)

    def parse_word(self, text: str) -> tuple[int, ...]:
        """Parse ``"aab"`` (single-letter labels) or ``"0 1 1"`` into edge ids."""
        text = text.strip()
        if text in ("", "o"):
            return ()
        lookup = {name: e for e, name in enumerate(self.labels or ())}
        tokens = text.replace(",", " ").split()
        if len(tokens) == 1 and lookup and all(len(x) == 1 for x in lookup) and text not in lookup:
            tokens = list(text)
        word = []
        for tok in tokens:
            if tok in lookup:
                word.append(lookup[tok])
            else:
                try:
                    e = int(tok)
                except ValueError:
                    raise GraphError(f"unknown edge {tok!r}") from None
                if e not in self.edges:
                    raise GraphError(f"unknown edge id {e}")
                word.append(e)
        return tuple(word)

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        out = {
            "vertices": list(self.vertices),
            "edges": [{"id": e, "src": s, "dst": t} for e, (s, t) in enumerate(zip(self.src, self.dst))],
        }
        if self.labels:
            for item, name in zip(out["edges"], self.labels):
                item["label"] = name
        return out

    @classmethod
    def from_json(cls, data: dict | str) -> "Graph":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            vertices = list(data["vertices"])
            edges = sorted(data["edges"], key=lambda item: item["id"])
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph JSON: {exc}") from None
        if vertices != list(range(len(vertices))):
            raise GraphError("vertex ids must be 0..|V|-1")
        if [item["id"] for item in edges] != list(range(len(edges))):
            raise GraphError("edge ids must be 0..|E|-1")
        labels = None
        if edges and all("label" in item for item in edges):
            labels = tuple(str(item["label"]) for item in edges)
        return cls(len(vertices), tuple(item["src"] for item in edges),
                   tuple(item["dst"] for item in edges), labels)


def from_adjacency(matrix: Sequence[Sequence[int]]) -> Graph:
    """Graph with ``matrix[u][v]`` parallel edges u -> v, edges ordered row-major."""
    n = len(matrix)
    src, dst = [], []
    for u in range(n):
        if len(matrix[u]) != n:
            raise GraphError("adjacency matrix must be square")
        for v in range(n):
            if matrix[u][v] < 0:
                raise GraphError("negative adjacency entry")
            src += [u] * matrix[u][v]
            dst += [v] * matrix[u][v]
    return Graph(n, tuple(src), tuple(dst))


# -- builders -------------------------------------------------------------

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def rose(n: int) -> Graph:
    """The n-rose: one vertex with n loops labelled a, b, c, ..."""
    if n < 1:
        raise GraphError("rose needs n >= 1")
    labels = tuple(_LETTERS[i] if n <= 26 else f"e{i}" for i in range(n))
    return Graph(1, (0,) * n, (0,) * n, labels)


def subdivided_circle(n: int) -> Graph:
    if n < 1:
        raise GraphError("subdivided circle needs n >= 1")
    return Graph(n, tuple(range(n)), tuple((i + 1) % n for i in range(n)))


def higman_thompson(n: int, r: int) -> Graph:
    """Graph of the r x r matrix with ``M[0][r-1] = n`` and 1s on the subdiagonal.

    For r = 1 this is ``rose(n)``.
    """
    if n < 2 or r < 1:
        raise GraphError("higman_thompson needs n >= 2 and r >= 1")
    if r == 1:
        return rose(n)
    m = [[0] * r for _ in range(r)]
    m[0][r - 1] = n
    for i in range(1, r):
        m[i][i - 1] = 1
    return from_adjacency(m)


def theta() -> Graph:
    """Vertices u=0, v=1; edges e1, e2: u -> v and f1, f2: v -> u."""
    return Graph(2, (0, 0, 1, 1), (1, 1, 0, 0), ("e1", "e2", "f1", "f2"))


def bipartite_double(g: Graph) -> Graph:
    """Graph on V x {0,1} with an edge (s,i) -> (t,1-i) for each edge and each i."""
    src, dst = [], []
    for e in g.edges:
        for i in (0, 1):
            src.append(2 * g.src[e] + i)
            dst.append(2 * g.dst[e] + 1 - i)
    return Graph(2 * g.num_vertices, tuple(src), tuple(dst))


# -- connectivity ---------------------------------------------------------

def strongly_connected_components(g: Graph, removed: Iterable[int] = ()) -> list[list[int]]:
    """Tarjan's algorithm (iterative); ``removed`` edges are ignored."""
    skip = set(removed)
    succ = [[] for _ in g.vertices]
    for e in g.edges:
        if e not in skip:
            succ[g.src[e]].append(g.dst[e])
    index = [-1] * g.num_vertices
    low = [0] * g.num_vertices
    on_stack = [False] * g.num_vertices
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in g.vertices:
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(sorted(comp))
    return comps


def is_strongly_connected(g: Graph, removed: Iterable[int] = ()) -> bool:
    return len(strongly_connected_components(g, removed)) == 1


def is_two_edge_connected(g: Graph) -> bool:
    return is_strongly_connected(g) and all(is_strongly_connected(g, (e,)) for e in g.edges)


def period(g: Graph) -> int:
    """GCD of cycle lengths via BFS levels: gcd of level[s] + 1 - level[t] over edges."""
    if not is_strongly_connected(g):
        raise GraphError("period requires a strongly connected graph")
    level = bfs_levels(g, 0)
    d = 0
    for e in g.edges:
        d = gcd(d, level[g.src[e]] + 1 - level[g.dst[e]])
    return abs(d)


def bfs_levels(g: Graph, root: int) -> list[int]:
    level = [-1] * g.num_vertices
    level[root] = 0
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for e in g.out_edges(v):
            t = g.dst[e]
            if level[t] == -1:
                level[t] = level[v] + 1
                queue.append(t)
    return level


def shortest_path(g: Graph, start: int, goal: int, removed: Iterable[int] = (),
                  avoid_vertices: Iterable[int] = ()) -> tuple[int, ...] | None:
    """Shortest edge path from vertex ``start`` to ``goal`` (empty if equal).

    Intermediate vertices in ``avoid_vertices`` are not entered (the goal may be one).
    """
    if start == goal:
        return ()
    skip = set(removed)
    blocked = set(avoid_vertices) - {goal}
    prev: dict[int, int] = {start: -1}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for e in g.out_edges(v):
            if e in skip:
                continue
            t = g.dst[e]
            if t in prev or t in blocked:
                continue
            prev[t] = e
            if t == goal:
                path = []
                while t != start:
                    e = prev[t]
                    path.append(e)
                    t = g.src[e]
                return tuple(reversed(path))
            queue.append(t)
    return None


# -- classification -------------------------------------------------------

@dataclass(frozen=True)
class GraphClassification:
    strongly_connected: bool
    two_edge_connected: bool
    is_subdivided_circle: int | None
    is_rose: int | None
    period: int | None
    sft_valid: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _subdivided_circle_size(g: Graph) -> int | None:
    if g.num_edges != g.num_vertices:
        return None
    if not is_strongly_connected(g):
        return None
    if all(len(g.out_edges(v)) == 1 for v in g.vertices):
        return g.num_vertices
    return None


def classify(g: Graph) -> GraphClassification:
    # an edgeless vertex is not an irreducible graph
    sc = g.num_edges > 0 and is_strongly_connected(g)
    circle = _subdivided_circle_size(g)
    return GraphClassification(
        strongly_connected=sc,
        two_edge_connected=sc and is_two_edge_connected(g),
        is_subdivided_circle=circle,
        is_rose=g.num_edges if g.num_vertices == 1 else None,
        period=period(g) if sc else None,
        sft_valid=sc and circle is None,
    )


def require_sft(g: Graph) -> None:
    c = classify(g)
    if not c.strongly_connected:
        raise GraphError("graph is not strongly connected")
    if c.is_subdivided_circle:
        raise GraphError(f"graph is the subdivided circle S^1_{c.is_subdivided_circle}")


def periodic_decomposition(g: Graph) -> tuple[list[list[int]], Graph, list[tuple[int, ...]]]:
    """Return (vertex classes, quotient graph E_0, the length-d paths labelling E_0's edges).

    Vertex class i holds vertices at BFS level congruent to i mod d from vertex 0.
    """
    d = period(g)
    level = bfs_levels(g, 0)
    classes = [[v for v in g.vertices if level[v] % d == i] for i in range(d)]
    base = classes[0]
    index = {v: i for i, v in enumerate(base)}
    paths = sorted(p for v in base for p in paths_from(g, v, d))
    e0 = Graph(len(base), tuple(index[g.src[p[0]]] for p in paths), tuple(index[g.dst[p[-1]]] for p in paths))
    return classes, e0, paths


def paths_from(g: Graph, v: int, n: int) -> list[tuple[int, ...]]:
    """All paths of length n starting at vertex v, in lexicographic edge order."""
    out = [()]
    ends = [v]
    for _ in range(n):
        nxt, nends = [], []
        for p, t in zip(out, ends):
            for e in g.out_edges(t):
                nxt.append(p + (e,))
                nends.append(g.dst[e])
        out, ends = nxt, nends
    return out


def all_paths(g: Graph, n: int) -> list[tuple[int, ...]]:
    """E^n in lexicographic order of edge sequences."""
    if n == 0:
        return [()]
    out = []
    for e in g.edges:
        out += [(e,) + p for p in paths_from(g, g.dst[e], n - 1)]
    return out


def is_primitive_matrix(a: Sequence[Sequence[int]]) -> bool:
    """Some power (exponent <= n^2 - 2n + 2, Wielandt) is entrywise positive."""
    n = len(a)
    pattern = [[1 if x else 0 for x in row] for row in a]
    power = [row[:] for row in pattern]
    for _ in range(max(1, n * n - 2 * n + 2)):
        if all(all(row) for row in power):
            return True
        power = [[1 if any(power[i][k] and pattern[k][j] for k in range(n)) else 0
                  for j in range(n)] for i in range(n)]
    return all(all(row) for row in power)


def higher_edge_graph(g: Graph, n: int) -> tuple[Graph, list[tuple[int, ...]]]:
    """N-th higher edge graph and the E^N path labelling each of its edges.

    Vertices are E^{N-1} and edges E^N, both in lexicographic order.  For N = 1
    the single vertex-path is the empty path at each vertex.
    """
    if n < 1:
        raise GraphError("N must be >= 1")
    if n == 1:
        return g, [(e,) for e in g.edges]
    verts = all_paths(g, n - 1)
    vindex = {w: i for i, w in enumerate(verts)}
    edges = all_paths(g, n)
    src = tuple(vindex[w[:-1]] for w in edges)
    dst = tuple(vindex[w[1:]] for w in edges)
    labels = None
    if g.labels:
        labels = tuple("".join(g.labels[x] for x in w) if all(len(l) == 1 for l in g.labels)
                       else ".".join(g.labels[x] for x in w) for w in edges)
    return Graph(len(verts), src, dst, labels), edges


def remove_edge(g: Graph, e: int) -> Graph:
    """Same vertices, edge e deleted; later edge ids shift down by one."""
    if e not in g.edges:
        raise GraphError(f"unknown edge id {e}")
    keep = [x for x in g.edges if x != e]
    labels = tuple(g.labels[x] for x in keep) if g.labels else None
    return Graph(g.num_vertices, tuple(g.src[x] for x in keep), tuple(g.dst[x] for x in keep), labels)


def isomorphic_small(g: Graph, h: Graph) -> bool:
    """Brute-force isomorphism test for tiny graphs (test helper)."""
    if (g.num_vertices, g.num_edges) != (h.num_vertices, h.num_edges):
        return False
    from itertools import permutations

    ag = g.adjacency()
    ah = h.adjacency()
    for perm in permutations(range(g.num_vertices)):
        if all(ag[u][v] == ah[perm[u]][perm[v]] for u, v in product(g.vertices, repeat=2)):
            return True
    return False
