"""Ribbon graphs: half-edge graphs with a cyclic order at each vertex.

The cyclic orders are packed into one permutation ``next`` whose cycles
are the vertices.  Boundary components are the orbits of the face
permutation ``h -> next(pair(h))``.  Optionally each boundary component
carries a label; isomorphisms must then respect the labels.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Mapping

from .graphs import LoopContraction, OutOfScope, DEFAULT_CAPS, HalfEdgeGraph

__all__ = [
    "InvalidRibbon",
    "RibbonGraph",
    "boundary_cycles",
    "genus_and_boundary",
    "canonicalize_ribbon",
    "ribbon_automorphisms",
    "contract_ribbon_edge",
    "enumerate_ribbon_graphs",
    "one_vertex_ribbon_graphs",
]


class InvalidRibbon(ValueError):
    pass


class RibbonGraph:
    """Immutable ribbon graph, optionally with labeled boundary components.

    Vertices are identified by the smallest half-edge in their cycle, and
    ``flags(v)`` lists the cycle starting there.
    """

    __slots__ = ("_pair", "_next", "_labels", "_vertex", "_flags", "_key")

    def __init__(self, pairing: Iterable[tuple[int, int]], next_map: Mapping[int, int],
                 face_labels: Mapping[int, int] | None = None):
        pair = {}
        for a, b in pairing:
            if a == b or a in pair or b in pair:
                raise InvalidRibbon("pairing must be a fixed-point-free involution")
            pair[a], pair[b] = b, a
        nxt = {int(a): int(b) for a, b in next_map.items()}
        if set(nxt) != set(pair) or set(nxt.values()) != set(pair):
            raise InvalidRibbon("next must be a permutation of the half-edges")
        vertex, flags = {}, {}
        for h in sorted(nxt):
            if h in vertex:
                continue
            cyc = [h]
            x = nxt[h]
            while x != h:
                cyc.append(x)
                x = nxt[x]
            for x in cyc:
                vertex[x] = h
            flags[h] = tuple(cyc)
        self._pair, self._next, self._vertex, self._flags = pair, nxt, vertex, flags
        self._labels = None
        if face_labels is not None:
            labels = {int(h): int(v) for h, v in face_labels.items()}
            for h in pair:
                if labels.get(h) != labels.get(nxt[pair[h]]):
                    raise InvalidRibbon("face labels are not constant on boundary cycles")
            self._labels = labels
        self._key = (tuple(sorted((a, b) for a, b in pair.items() if a < b)),
                     tuple(sorted(nxt.items())),
                     None if self._labels is None else tuple(sorted(self._labels.items())))

    # shared interface with HalfEdgeGraph
    @property
    def half_edges(self):
        return tuple(sorted(self._pair))

    def pair(self, h):
        return self._pair[h]

    def next(self, h):
        return self._next[h]

    def vertex(self, h):
        return self._vertex[h]

    @property
    def vertex_of(self):
        return dict(self._vertex)

    @property
    def vertices(self):
        return tuple(self._flags)

    def flags(self, v):
        return self._flags[v]

    def valence(self, v):
        return len(self._flags[v])

    @property
    def edges(self):
        return self._key[0]

    def edge_of(self, h):
        o = self._pair[h]
        return (h, o) if h < o else (o, h)

    def is_loop(self, edge):
        return self._vertex[edge[0]] == self._vertex[edge[1]]

    @property
    def num_edges(self):
        return len(self._pair) // 2

    @property
    def num_vertices(self):
        return len(self._flags)

    @property
    def rank(self):
        return self.num_edges - self.num_vertices + 1

    @property
    def labeled(self) -> bool:
        return self._labels is not None

    def face_label(self, h):
        return None if self._labels is None else self._labels[h]

    @property
    def face_labels(self):
        return None if self._labels is None else dict(self._labels)

    def key(self):
        return self._key

    def __eq__(self, other):
        return isinstance(other, RibbonGraph) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        g, b = genus_and_boundary(self)
        return f"RibbonGraph(g={g}, b={b}, vertices={list(self._flags.values())}, edges={list(self.edges)})"

    def underlying(self) -> HalfEdgeGraph:
        return HalfEdgeGraph(self.edges, self._vertex)

    def with_labels(self, labels: Mapping[int, int]) -> "RibbonGraph":
        return RibbonGraph(self.edges, self._next, labels)

    def to_json(self) -> dict:
        out = self.underlying().to_json()
        out["ribbon_next"] = {str(h): n for h, n in sorted(self._next.items())}
        if self._labels is not None:
            out["face_labels"] = {str(h): n for h, n in sorted(self._labels.items())}
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "RibbonGraph":
        try:
            nxt = {int(h): int(n) for h, n in data["ribbon_next"].items()}
            labels = data.get("face_labels")
            rg = cls([tuple(p) for p in data["pairing"]], nxt,
                     None if labels is None else {int(h): int(v) for h, v in labels.items()})
        except (KeyError, TypeError) as exc:
            raise InvalidRibbon(f"malformed ribbon graph JSON: {exc}") from exc
        if "vertex_of" in data:
            # the stated vertex partition must match the cycles of next
            given: dict[int, set] = {}
            for h, v in data["vertex_of"].items():
                given.setdefault(int(v), set()).add(int(h))
            cycles = sorted(sorted(c) for c in rg._flags.values())
            if sorted(sorted(s) for s in given.values()) != cycles:
                raise InvalidRibbon("cycle partition of next differs from vertex_of")
        return rg


def boundary_cycles(rg: RibbonGraph) -> list[tuple[int, ...]]:
    """Orbits of ``h -> next(pair(h))``, each starting at its smallest half-edge."""
    seen, out = set(), []
    for h in rg.half_edges:
        if h in seen:
            continue
        cyc = [h]
        seen.add(h)
        x = rg.next(rg.pair(h))
        while x != h:
            cyc.append(x)
            seen.add(x)
            x = rg.next(rg.pair(x))
        out.append(tuple(cyc))
    return out


def genus_and_boundary(rg: RibbonGraph) -> tuple[int, int]:
    """``(g, b)`` with ``b`` the number of boundary cycles and ``g = (n+1-b)/2``."""
    b = len(boundary_cycles(rg))
    twice = rg.rank + 1 - b
    if twice % 2 or twice < 0:
        raise InvalidRibbon(f"rank {rg.rank} and {b} boundary cycles give non-integral genus")
    return twice // 2, b


def _traverse(rg: RibbonGraph, start: int) -> tuple[tuple, dict[int, int]]:
    order = [start]
    label = {start: 0}
    i = 0
    while i < len(order):
        d = order[i]
        for x in (rg.next(d), rg.pair(d)):
            if x not in label:
                label[x] = len(order)
                order.append(x)
        i += 1
    if len(order) != len(rg.half_edges):
        raise InvalidRibbon("ribbon graph is not connected")
    nxt = tuple(label[rg.next(d)] for d in order)
    pr = tuple(label[rg.pair(d)] for d in order)
    lab = None
    if rg.labeled:
        lab = tuple(rg.face_label(d) for d in order)
    return (nxt, pr, lab), label


@lru_cache(maxsize=200_000)
def _canonical_ribbon_cached(key):
    rg = RibbonGraph(key[0], dict(key[1]), None if key[2] is None else dict(key[2]))
    best, isos = None, []
    for s in rg.half_edges:
        enc, label = _traverse(rg, s)
        if best is None or enc < best:
            best, isos = enc, [label]
        elif enc == best:
            isos.append(label)
    nxt, pr, lab = best
    pairs = tuple(sorted({(min(i, j), max(i, j)) for i, j in enumerate(pr)}))
    ckey = (pairs, tuple(enumerate(nxt)), None if lab is None else tuple(enumerate(lab)))
    return ckey, tuple(tuple(sorted(m.items())) for m in isos)


def canonicalize_ribbon(rg: RibbonGraph) -> tuple[RibbonGraph, dict[int, int]]:
    """Canonical ribbon graph and a witnessing half-edge bijection."""
    ckey, isos = _canonical_ribbon_cached(rg.key())
    c = RibbonGraph(ckey[0], dict(ckey[1]), None if ckey[2] is None else dict(ckey[2]))
    return c, dict(isos[0])


def ribbon_automorphisms(rg: RibbonGraph) -> list[dict[int, int]]:
    """Automorphisms preserving cyclic orders (and face labels, if any)."""
    ckey, isos = _canonical_ribbon_cached(rg.key())
    first = dict(isos[0])
    inv = {b: a for a, b in first.items()}
    out = []
    for m in isos:
        m = dict(m)
        out.append({h: inv[m[h]] for h in rg.half_edges})
    ident = {h: h for h in rg.half_edges}
    out.sort(key=lambda m: (m != ident, sorted(m.items())))
    return out


def contract_ribbon_edge(rg: RibbonGraph, edge: tuple[int, int]) -> RibbonGraph:
    """Contract a non-loop edge, splicing the two cyclic orders."""
    a, b = edge
    if rg.pair(a) != b:
        raise InvalidRibbon(f"{edge} is not an edge")
    if rg.vertex(a) == rg.vertex(b):
        raise LoopContraction(f"edge {edge} is a loop")
    nxt = dict(rg._next)
    pa = next(h for h in rg.half_edges if nxt[h] == a)
    pb = next(h for h in rg.half_edges if nxt[h] == b)
    # cycle (a, a1..ak) and (b, b1..bl) become (a1..ak, b1..bl)
    nxt[pa] = nxt[b]
    nxt[pb] = nxt[a]
    del nxt[a], nxt[b]
    pairs = [e for e in rg.edges if e != (min(a, b), max(a, b))]
    labels = None
    if rg.labeled:
        labels = {h: v for h, v in rg.face_labels.items() if h not in (a, b)}
    return RibbonGraph(pairs, nxt, labels)


def one_vertex_ribbon_graphs(n: int) -> list[RibbonGraph]:
    """All chord diagrams on ``2n`` half-edges around a single vertex."""
    darts = list(range(2 * n))
    nxt = {h: (h + 1) % (2 * n) for h in darts}

    def matchings(rest):
        if not rest:
            yield []
            return
        a = rest[0]
        for i in range(1, len(rest)):
            for m in matchings(rest[1:i] + rest[i + 1:]):
                yield [(a, rest[i])] + m

    return [RibbonGraph(m, nxt) for m in matchings(darts)]


def _interval_splits(cycle: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Splits of a cyclic order into two intervals of length >= 2, each once."""
    m = len(cycle)
    seen, out = set(), []
    for start in range(m):
        for length in range(2, m - 1):
            part = tuple(cycle[(start + i) % m] for i in range(length))
            key = frozenset((frozenset(part), frozenset(cycle) - frozenset(part)))
            if key not in seen:
                seen.add(key)
                out.append(part)
    return out


def expand_ribbon_vertex(rg: RibbonGraph, v: int, part: tuple[int, ...]) -> RibbonGraph:
    """Split a vertex along a cyclic interval ``part`` of its flags (unlabeled graphs)."""
    if rg.labeled:
        raise InvalidRibbon("expand the unlabeled graph, then label it")
    cyc = rg.flags(v)
    rest = [x for x in cyc if x not in part]
    # rotate so the complement reads in cyclic order after the interval
    i = cyc.index(part[-1])
    rest = [cyc[(i + 1 + k) % len(cyc)] for k in range(len(rest))]
    new = max(rg.half_edges) + 1
    a, b = new, new + 1  # a joins the complement, b joins the interval
    nxt = dict(rg._next)
    for seq in (list(part) + [b], rest + [a]):
        for x, y in zip(seq, seq[1:] + seq[:1]):
            nxt[x] = y
    return RibbonGraph(list(rg.edges) + [(a, b)], nxt)


def _check_ribbon_cap(g: int, b: int, caps):
    cap = (caps or DEFAULT_CAPS).get("ribbon_weight", DEFAULT_CAPS["ribbon_weight"])
    if 6 * g + 3 * b > cap:
        raise OutOfScope(f"(g,b)=({g},{b}) exceeds cap 6g+3b <= {cap}")


@lru_cache(maxsize=32)
def _enumerate_unlabeled(g: int, b: int) -> tuple:
    n = 2 * g + b - 1
    seen = {}
    frontier = []
    for rg in one_vertex_ribbon_graphs(n):
        if genus_and_boundary(rg) != (g, b):
            continue
        c = canonicalize_ribbon(rg)[0]
        if c.key() not in seen:
            seen[c.key()] = c
            frontier.append(c)
    while frontier:
        nxt = []
        for rg in frontier:
            for v in rg.vertices:
                if rg.valence(v) < 4:
                    continue
                for part in _interval_splits(rg.flags(v)):
                    c = canonicalize_ribbon(expand_ribbon_vertex(rg, v, part))[0]
                    if c.key() not in seen:
                        seen[c.key()] = c
                        nxt.append(c)
        frontier = nxt
    return tuple(sorted(seen.values(), key=lambda c: (c.num_edges, c.key())))


def _labelings(rg: RibbonGraph) -> list[RibbonGraph]:
    cycles = boundary_cycles(rg)
    out = {}
    for perm in itertools.permutations(range(1, len(cycles) + 1)):
        labels = {h: lab for cyc, lab in zip(cycles, perm) for h in cyc}
        c = canonicalize_ribbon(rg.with_labels(labels))[0]
        out[c.key()] = c
    return list(out.values())


def enumerate_ribbon_graphs(g: int, b: int, labeled: bool = False, caps: Mapping | None = None) -> list[RibbonGraph]:
    """Isomorphism classes of ribbon graphs of genus ``g`` with ``b`` boundary cycles.

    In labeled mode every boundary cycle carries a label ``1..b`` and
    isomorphisms must preserve labels.
    """
    if g < 0 or b < 1 or 2 - 2 * g - b >= 0:
        raise InvalidRibbon(f"(g,b)=({g},{b}) violates 2-2g-b < 0")
    _check_ribbon_cap(g, b, caps)
    base = _enumerate_unlabeled(g, b)
    if not labeled:
        return list(base)
    out = [c for rg in base for c in _labelings(rg)]
    return sorted(out, key=lambda c: (c.num_edges, c.key()))
