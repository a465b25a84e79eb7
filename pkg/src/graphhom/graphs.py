"""Half-edge multigraphs: canonical forms, automorphisms, enumeration.

A graph is a set of integer half-edges, a fixed-point-free pairing on them
(the edges) and a map from half-edges to vertices.  Loops and parallel edges
are ordinary.  Edges are written as ``(h, h')`` with ``h < h'`` and are
directed from the vertex of ``h`` to the vertex of ``h'``; that convention
fixes the signs of cycles.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

__all__ = [
    "InvalidGraph",
    "LoopContraction",
    "OutOfScope",
    "HalfEdgeGraph",
    "CycleBasis",
    "DEFAULT_CAPS",
    "canonicalize",
    "automorphisms",
    "is_isomorphic",
    "rose",
    "theta",
    "dumbbell",
    "contract_edge",
    "expand_vertex",
    "vertex_splits",
    "cycle_basis",
    "cycle_coordinates",
    "h1_matrix",
    "integer_det",
    "permutation_sign",
    "enumerate_graphs",
]


class InvalidGraph(ValueError):
    pass


class LoopContraction(ValueError):
    pass


class OutOfScope(ValueError):
    pass


DEFAULT_CAPS = {"rank": 4, "ribbon_weight": 15, "tree_arity": 6}


def permutation_sign(seq: Iterable) -> int:
    """Sign of the permutation sorting ``seq`` (entries distinct)."""
    seq = list(seq)
    sign = 1
    seen = [False] * len(seq)
    order = sorted(range(len(seq)), key=seq.__getitem__)
    for i in range(len(seq)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def integer_det(mat: list[list]) -> int:
    n = len(mat)
    if n == 0:
        return 1
    m = [[Fraction(x) for x in row] for row in mat]
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c]), None)
        if p is None:
            return 0
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            if m[r][c]:
                f = m[r][c] / m[c][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    assert det.denominator == 1
    return int(det)


class HalfEdgeGraph:
    """Immutable half-edge multigraph."""

    __slots__ = ("_pair", "_vertex", "_flags", "_key")

    def __init__(self, pairing: Iterable[tuple[int, int]], vertex_of: Mapping[int, int]):
        pair: dict[int, int] = {}
        for a, b in pairing:
            a, b = int(a), int(b)
            if a == b or a in pair or b in pair:
                raise InvalidGraph("pairing must be a fixed-point-free involution")
            pair[a] = b
            pair[b] = a
        vertex = {int(h): int(v) for h, v in vertex_of.items()}
        if set(vertex) != set(pair):
            raise InvalidGraph("vertex_of and pairing cover different half-edges")
        flags: dict[int, list[int]] = {}
        for h in sorted(vertex):
            flags.setdefault(vertex[h], []).append(h)
        self._pair = pair
        self._vertex = vertex
        self._flags = {v: tuple(hs) for v, hs in sorted(flags.items())}
        self._key = (tuple(sorted((a, b) for a, b in pair.items() if a < b)),
                     tuple(sorted(vertex.items())))

    # basic structure -----------------------------------------------------
    @property
    def half_edges(self) -> tuple[int, ...]:
        return tuple(sorted(self._pair))

    def pair(self, h: int) -> int:
        return self._pair[h]

    def vertex(self, h: int) -> int:
        return self._vertex[h]

    @property
    def vertex_of(self) -> dict[int, int]:
        return dict(self._vertex)

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(self._flags)

    def flags(self, v: int) -> tuple[int, ...]:
        return self._flags[v]

    def valence(self, v: int) -> int:
        return len(self._flags[v])

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return self._key[0]

    def is_loop(self, edge: tuple[int, int]) -> bool:
        return self._vertex[edge[0]] == self._vertex[edge[1]]

    def edge_of(self, h: int) -> tuple[int, int]:
        o = self._pair[h]
        return (h, o) if h < o else (o, h)

    @property
    def num_edges(self) -> int:
        return len(self._pair) // 2

    @property
    def num_vertices(self) -> int:
        return len(self._flags)

    @property
    def rank(self) -> int:
        return self.num_edges - self.num_vertices + 1

    def key(self):
        return self._key

    def __eq__(self, other):
        return isinstance(other, HalfEdgeGraph) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"HalfEdgeGraph(v={self.num_vertices}, e={self.num_edges}, edges={list(self.edges)})"

    def is_connected(self) -> bool:
        if not self._flags:
            return True
        start = next(iter(self._flags))
        seen = {start}
        todo = [start]
        while todo:
            v = todo.pop()
            for h in self._flags[v]:
                w = self._vertex[self._pair[h]]
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return len(seen) == len(self._flags)

    def validate(self, min_valence: int = 3, min_rank: int = 2) -> "HalfEdgeGraph":
        if not self._pair:
            raise InvalidGraph("empty graph")
        if not self.is_connected():
            raise InvalidGraph("graph is not connected")
        low = [v for v in self._flags if len(self._flags[v]) < min_valence]
        if low:
            raise InvalidGraph(f"vertices {low} have valence < {min_valence}")
        if self.rank < min_rank:
            raise InvalidGraph(f"rank {self.rank} < {min_rank}")
        return self

    def relabel(self, mapping: Mapping[int, int]) -> "HalfEdgeGraph":
        """Rename half-edges by ``mapping`` (vertices keep their ids)."""
        return HalfEdgeGraph(((mapping[a], mapping[b]) for a, b in self.edges),
                             {mapping[h]: v for h, v in self._vertex.items()})

    def to_json(self) -> dict:
        return {
            "half_edges": list(self.half_edges),
            "pairing": [list(e) for e in self.edges],
            "vertex_of": {str(h): v for h, v in sorted(self._vertex.items())},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "HalfEdgeGraph":
        try:
            g = cls([tuple(p) for p in data["pairing"]],
                    {int(h): int(v) for h, v in data["vertex_of"].items()})
        except (KeyError, TypeError) as exc:
            raise InvalidGraph(f"malformed graph JSON: {exc}") from exc
        if "half_edges" in data and sorted(int(h) for h in data["half_edges"]) != list(g.half_edges):
            raise InvalidGraph("half_edges does not match pairing")
        return g


def rose(n: int) -> HalfEdgeGraph:
    """One vertex with ``n`` loops."""
    return HalfEdgeGraph(((2 * i, 2 * i + 1) for i in range(n)), {h: 0 for h in range(2 * n)})


def theta() -> HalfEdgeGraph:
    return HalfEdgeGraph([(0, 1), (2, 3), (4, 5)], {0: 0, 2: 0, 4: 0, 1: 1, 3: 1, 5: 1})


def dumbbell() -> HalfEdgeGraph:
    return HalfEdgeGraph([(0, 1), (2, 3), (4, 5)], {0: 0, 1: 0, 2: 0, 3: 1, 4: 1, 5: 1})


# canonical forms ---------------------------------------------------------

def _multiplicities(g: HalfEdgeGraph) -> dict[tuple[int, int], int]:
    mult: dict[tuple[int, int], int] = {}
    for a, b in g.edges:
        u, w = g.vertex(a), g.vertex(b)
        k = (u, w) if u <= w else (w, u)
        mult[k] = mult.get(k, 0) + 1
    return mult


def _vertex_classes(g: HalfEdgeGraph, mult) -> list[list[int]]:
    """Vertices grouped by an isomorphism-invariant signature, refined once."""
    def base(v):
        loops = mult.get((v, v), 0)
        nbr = sorted(m for (a, b), m in mult.items() if a != b and v in (a, b))
        return (g.valence(v), loops, tuple(nbr))

    sig = {v: base(v) for v in g.vertices}
    for _ in range(2):
        new = {}
        for v in g.vertices:
            around = []
            for (a, b), m in mult.items():
                if a != b and v in (a, b):
                    around.append((sig[b if a == v else a], m))
            new[v] = (sig[v], tuple(sorted(around)))
        sig = new
    groups: dict = {}
    for v in g.vertices:
        groups.setdefault(sig[v], []).append(v)
    return [groups[k] for k in sorted(groups)]


def _orderings(classes: list[list[int]]):
    for parts in itertools.product(*(itertools.permutations(c) for c in classes)):
        yield [v for part in parts for v in part]


def _encode(order: list[int], mult) -> tuple:
    pos = {v: i for i, v in enumerate(order)}
    out = []
    for (a, b), m in mult.items():
        i, j = pos[a], pos[b]
        if i > j:
            i, j = j, i
        out.extend([(i, j)] * m)
    return tuple(sorted(out))


@lru_cache(maxsize=200_000)
def _canonical_cached(key):
    g = HalfEdgeGraph(key[0], dict(key[1]))
    mult = _multiplicities(g)
    classes = _vertex_classes(g, mult)
    best, best_order = None, None
    for order in _orderings(classes):
        enc = _encode(order, mult)
        if best is None or enc < best:
            best, best_order = enc, order
    pos = {v: i for i, v in enumerate(best_order)}
    slots: dict[tuple[int, int], list[int]] = {}
    for k, (i, j) in enumerate(best):
        slots.setdefault((i, j), []).append(k)
    iso: dict[int, int] = {}
    for a, b in g.edges:
        i, j = pos[g.vertex(a)], pos[g.vertex(b)]
        if i <= j:
            k = slots[(i, j)].pop(0)
            iso[a], iso[b] = 2 * k, 2 * k + 1
        else:
            k = slots[(j, i)].pop(0)
            iso[b], iso[a] = 2 * k, 2 * k + 1
    canon_pairs = [(2 * k, 2 * k + 1) for k in range(len(best))]
    canon_vertex = {}
    for k, (i, j) in enumerate(best):
        canon_vertex[2 * k] = i
        canon_vertex[2 * k + 1] = j
    return (tuple(canon_pairs), tuple(sorted(canon_vertex.items()))), tuple(sorted(iso.items()))


def canonicalize(g: HalfEdgeGraph) -> tuple[HalfEdgeGraph, dict[int, int]]:
    """Canonical representative of the isomorphism class of ``g``.

    The canonical graph has vertices ``0..v-1`` and edge ``k`` made of
    half-edges ``2k`` (at the smaller vertex) and ``2k+1``.  Returns the
    canonical graph and a half-edge bijection ``g -> canonical``.
    """
    ckey, iso = _canonical_cached(g.key())
    return HalfEdgeGraph(ckey[0], dict(ckey[1])), dict(iso)


def is_isomorphic(g1: HalfEdgeGraph, g2: HalfEdgeGraph) -> bool:
    return canonicalize(g1)[0] == canonicalize(g2)[0]


@lru_cache(maxsize=50_000)
def _automorphisms_canonical(ckey) -> tuple[tuple[tuple[int, int], ...], ...]:
    c = HalfEdgeGraph(ckey[0], dict(ckey[1]))
    mult = _multiplicities(c)
    classes = _vertex_classes(c, mult)
    target = _encode(list(c.vertices), mult)
    groups: dict[tuple[int, int], list[int]] = {}
    for k, (a, b) in enumerate(c.edges):
        groups.setdefault((c.vertex(a), c.vertex(b)), []).append(k)
    result = []
    for order in _orderings(classes):
        # order[i] is the vertex sent to position i; perm maps old -> new
        perm = {v: i for i, v in enumerate(order)}
        if _encode(order, mult) != target:
            continue
        choices = []
        for (i, j), ks in sorted(groups.items()):
            pi, pj = perm[i], perm[j]
            swapped = pi > pj
            tgt = groups[(min(pi, pj), max(pi, pj))]
            opts = []
            for bij in itertools.permutations(tgt):
                flips = itertools.product((False, True), repeat=len(ks)) if i == j else [(swapped,) * len(ks)]
                for fl in flips:
                    m = {}
                    for k, k2, f in zip(ks, bij, fl):
                        if f:
                            m[2 * k], m[2 * k + 1] = 2 * k2 + 1, 2 * k2
                        else:
                            m[2 * k], m[2 * k + 1] = 2 * k2, 2 * k2 + 1
                    opts.append(m)
            choices.append(opts)
        for combo in itertools.product(*choices):
            phi = {}
            for m in combo:
                phi.update(m)
            result.append(tuple(sorted(phi.items())))
    return tuple(sorted(set(result)))


def automorphisms(g: HalfEdgeGraph) -> list[dict[int, int]]:
    """All half-edge automorphisms of ``g`` (identity first)."""
    c, iso = canonicalize(g)
    inv = {b: a for a, b in iso.items()}
    out = []
    for phi in _automorphisms_canonical(c.key()):
        phi = dict(phi)
        out.append({h: inv[phi[iso[h]]] for h in g.half_edges})
    ident = {h: h for h in g.half_edges}
    out.sort(key=lambda m: (m != ident, sorted(m.items())))
    return out


# local moves -------------------------------------------------------------

def contract_edge(g: HalfEdgeGraph, edge: tuple[int, int]) -> tuple[HalfEdgeGraph, dict[int, int]]:
    """Contract a non-loop edge; surviving half-edges keep their ids.

    The merged vertex takes the smaller of the two vertex ids.  The second
    return value maps surviving half-edges of ``g`` to half-edges of the
    contracted graph (the identity on survivors).
    """
    a, b = edge
    if g.pair(a) != b:
        raise InvalidGraph(f"{edge} is not an edge")
    u, w = g.vertex(a), g.vertex(b)
    if u == w:
        raise LoopContraction(f"edge {edge} is a loop")
    keep = min(u, w)
    vertex = {}
    for h, v in g.vertex_of.items():
        if h in (a, b):
            continue
        vertex[h] = keep if v in (u, w) else v
    pairs = [e for e in g.edges if e != (min(a, b), max(a, b))]
    return HalfEdgeGraph(pairs, vertex), {h: h for h in vertex}


def vertex_splits(flags: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Unordered splits of a flag set into two parts of size >= 2.

    Each split is reported once, by the part containing the smallest flag.
    """
    first, rest = flags[0], flags[1:]
    out = []
    for r in range(1, len(rest)):
        for comb in itertools.combinations(rest, r):
            part = (first,) + comb
            if 2 <= len(part) <= len(flags) - 2:
                out.append(part)
    return out


def expand_vertex(g: HalfEdgeGraph, v: int, part: Iterable[int]) -> HalfEdgeGraph:
    """Split vertex ``v``: flags in ``part`` move to a new vertex joined by a new edge."""
    part = set(part)
    new_h = max(g.half_edges) + 1
    new_v = max(g.vertices) + 1
    vertex = g.vertex_of
    for h in part:
        vertex[h] = new_v
    vertex[new_h] = v
    vertex[new_h + 1] = new_v
    return HalfEdgeGraph(list(g.edges) + [(new_h, new_h + 1)], vertex)


# cycles ------------------------------------------------------------------

@dataclass(frozen=True)
class CycleBasis:
    """Spanning tree plus one fundamental cycle per non-tree edge.

    Each cycle maps edges ``(h, h')`` to +1/-1 according to whether it
    traverses the edge from ``vertex(h)`` to ``vertex(h')`` or backwards.
    """

    tree_edges: tuple[tuple[int, int], ...]
    nontree_edges: tuple[tuple[int, int], ...]
    cycles: tuple[tuple[tuple[tuple[int, int], int], ...], ...]

    def __len__(self):
        return len(self.cycles)

    def cycle(self, i: int) -> dict[tuple[int, int], int]:
        return dict(self.cycles[i])


def cycle_basis(g, policy: str = "bfs") -> CycleBasis:
    """Deterministic fundamental cycle basis.

    ``bfs`` grows the tree breadth-first from the smallest vertex scanning
    half-edges in increasing order; ``dfs`` grows it depth-first from the
    largest vertex scanning half-edges in decreasing order.  The second
    policy exists to check that nothing depends on the choice.
    """
    verts = list(g.vertices)
    if policy == "bfs":
        root = verts[0]
        flag_order = lambda v: g.flags(v)
    elif policy == "dfs":
        root = verts[-1]
        flag_order = lambda v: tuple(sorted(g.flags(v), reverse=True))
    else:
        raise ValueError(f"unknown spanning-tree policy {policy!r}")
    parent: dict[int, tuple[int, int] | None] = {root: None}  # vertex -> (half-edge at parent, half-edge at v)
    tree = set()
    if policy == "bfs":
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for h in flag_order(v):
                w = g.vertex(g.pair(h))
                if w not in parent:
                    parent[w] = (h, g.pair(h))
                    tree.add(g.edge_of(h))
                    queue.append(w)
    else:
        def grow(v):
            for h in flag_order(v):
                w = g.vertex(g.pair(h))
                if w not in parent:
                    parent[w] = (h, g.pair(h))
                    tree.add(g.edge_of(h))
                    grow(w)
        grow(root)

    def path_to_root(v):
        steps = []
        while parent[v] is not None:
            hp, hv = parent[v]
            steps.append((hp, hv))
            v = g.vertex(hp)
        return steps

    def traverse(edge_coef, from_half, to_half, sign):
        # stepping from vertex(from_half) to vertex(to_half) along their edge
        e = g.edge_of(from_half)
        s = 1 if from_half == e[0] else -1
        edge_coef[e] = edge_coef.get(e, 0) + sign * s

    nontree = tuple(e for e in g.edges if e not in tree)
    cycles = []
    for f in nontree:
        coef: dict[tuple[int, int], int] = {f: 1}
        u, w = g.vertex(f[0]), g.vertex(f[1])
        # after f we stand at w; walk w -> root -> u
        for hp, hv in path_to_root(w):
            traverse(coef, hv, hp, 1)
        for hp, hv in path_to_root(u):
            traverse(coef, hp, hv, 1)
        coef = {e: c for e, c in coef.items() if c}
        cycles.append(tuple(sorted(coef.items())))
    if len(cycles) != g.rank:
        raise InvalidGraph("graph is not connected")
    return CycleBasis(tuple(sorted(tree)), nontree, tuple(cycles))


def cycle_coordinates(basis: CycleBasis, z: Mapping[tuple[int, int], int]) -> list[int]:
    """Coordinates of a cycle in a fundamental basis (read off non-tree edges)."""
    return [z.get(f, 0) for f in basis.nontree_edges]


def transport_cycle(z: Mapping[tuple[int, int], int], phi: Mapping[int, int]) -> dict[tuple[int, int], int]:
    out = {}
    for (a, b), c in z.items():
        x, y = phi[a], phi[b]
        if x < y:
            out[(x, y)] = out.get((x, y), 0) + c
        else:
            out[(y, x)] = out.get((y, x), 0) - c
    return out


def h1_matrix(src_basis: CycleBasis, tgt_basis: CycleBasis, phi: Mapping[int, int]) -> list[list[int]]:
    """Matrix of the map on H_1 induced by a half-edge map ``phi``.

    ``phi`` may be partial (e.g. a contraction): edges whose half-edges
    are not in ``phi`` are dropped.  Row ``i`` holds the coordinates of the
    image of source cycle ``i``.
    """
    rows = []
    for i in range(len(src_basis)):
        z = {e: c for e, c in src_basis.cycle(i).items() if e[0] in phi and e[1] in phi}
        rows.append(cycle_coordinates(tgt_basis, transport_cycle(z, phi)))
    return rows


# enumeration -------------------------------------------------------------

def _check_cap(n: int, caps: Mapping | None):
    cap = (caps or DEFAULT_CAPS).get("rank", DEFAULT_CAPS["rank"])
    if n > cap:
        raise OutOfScope(f"rank {n} exceeds cap {cap}")


@lru_cache(maxsize=16)
def _enumerate_cached(n: int) -> tuple:
    start = canonicalize(rose(n))[0]
    seen = {start.key(): start}
    frontier = [start]
    while frontier:
        nxt = []
        for g in frontier:
            for v in g.vertices:
                if g.valence(v) < 4:
                    continue
                for part in vertex_splits(g.flags(v)):
                    c = canonicalize(expand_vertex(g, v, part))[0]
                    if c.key() not in seen:
                        seen[c.key()] = c
                        nxt.append(c)
        frontier = nxt
    return tuple(sorted(seen.values(), key=lambda c: (c.num_edges, c.key())))


def enumerate_graphs(n: int, caps: Mapping | None = None) -> list[HalfEdgeGraph]:
    """All connected graphs of rank ``n`` with every valence >= 3, canonical.

    Generated by repeated single-edge vertex expansion from the rose; every
    such graph contracts onto the rose along a spanning tree, so nothing is
    missed.  Sorted by edge count, then canonical key.
    """
    if n < 2:
        raise InvalidGraph("rank must be at least 2")
    _check_cap(n, caps)
    return list(_enumerate_cached(n))
