"""The dg dual ``DO`` of a cyclic operad, built from trees.

``DO((S))`` is the linear dual of the span of trees with leaves ``S``
whose vertices are decorated by ``O`` and carry the line
``Det^-1(H(w))[-3]``.  A basis key is ``(cyclic, tree)``: ``cyclic`` is the
leaf cyclic order (rotated to its minimum) for planar duals and ``()``
otherwise, and ``tree`` is a sorted tuple of vertices; a vertex is ``(blocks, okey)`` where each block is the set of leaves
seen through one of its flags (a singleton block is the leaf itself)
and ``okey`` is a dual basis key of ``O`` on those blocks.

Degree of a basis element is ``sum(|H(w)| - 3)``: the corolla sits in
degree ``|S| - 3`` and trivalent trees in degree 0.  The differential
is the transpose of edge contraction and lowers the degree by one.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Sequence

from .graphs import DEFAULT_CAPS, OutOfScope, permutation_sign
from .linalg import GradedComplex, SparseMatrix
from .operads import ONE, CyclicOperadModel, _rotate_min, _rotate_to, add_into

__all__ = ["DualOperad", "dual_model", "all_trees", "dg_dual_component", "koszul_sign"]


def koszul_sign(keys: Sequence, parities: Sequence[int]) -> tuple[int, list[int]]:
    """Sign and order for sorting graded items by ``keys``."""
    order = sorted(range(len(keys)), key=lambda i: keys[i])
    sign = 1
    n = len(order)
    for a in range(n):
        for b in range(a + 1, n):
            # items order[a] and order[b] end in this order; count crossings
            if order[a] > order[b] and parities[order[a]] and parities[order[b]]:
                sign = -sign
    return sign, order


def _parity(blocks) -> int:
    return (len(blocks) + 1) % 2


def _normalize_shape(vertices: Sequence[Sequence[tuple]]):
    """Sort the flags inside each vertex, then the vertices.

    Returns ``(sign, order, sorted_vertices)`` where ``order`` lists the
    input positions in their new order.
    """
    sign = 1
    sorted_vs = []
    for blocks in vertices:
        sign *= permutation_sign([sorted(blocks).index(b) for b in blocks])
        sorted_vs.append(tuple(sorted(blocks)))
    s, order = koszul_sign(sorted_vs, [_parity(b) for b in sorted_vs])
    return sign * s, order, [sorted_vs[i] for i in order]


def _assemble(vertices, vectors, cyc=(), scale=ONE) -> dict:
    """Expand a list of vertex shapes with O-vectors into normalized keys."""
    sign, order, shapes = _normalize_shape(vertices)
    out: dict = {}
    vecs = [list(vectors[i].items()) for i in order]
    for combo in itertools.product(*vecs):
        c = scale * sign
        for _, x in combo:
            c *= x
        key = tuple(zip(shapes, (k for k, _ in combo)))
        add_into(out, {(cyc, key): c})
    return out


def _cyclic_blocks(blocks, pos):
    """Blocks of a planar vertex in the cyclic order induced by ``pos``."""
    n = len(pos)
    inv = {i: x for x, i in pos.items()}

    def start(b):
        s = set(b)
        for x in b:
            if inv[(pos[x] - 1) % n] not in s:
                return pos[x]
        raise ValueError("block covers every leaf")

    return sorted(blocks, key=start)


def _splits(blocks, pos):
    """Unordered two-part splits of a vertex with both parts of size >= 2."""
    m = len(blocks)
    if pos is None:
        first, rest = blocks[0], blocks[1:]
        for r in range(1, m - 2):
            for part in itertools.combinations(rest, r):
                p = (first,) + part
                q = tuple(b for b in blocks if b not in p)
                yield p, q
        return
    cyc = _cyclic_blocks(blocks, pos)
    seen = set()
    for s in range(m):
        for length in range(2, m - 1):
            p = tuple(cyc[(s + t) % m] for t in range(length))
            q = tuple(cyc[(s + length + t) % m] for t in range(m - length))
            k = frozenset((frozenset(p), frozenset(q)))
            if k not in seen:
                seen.add(k)
                yield p, q


def _union(blocks) -> tuple:
    return tuple(sorted(x for b in blocks for x in b))


def _expand_vertex(blocks, p, q):
    return tuple(sorted(p + (_union(q),))), tuple(sorted(q + (_union(p),)))


@lru_cache(maxsize=None)
def all_trees(leaves: tuple, planar: bool = False) -> tuple:
    """Every tree shape with the given leaves, as sorted tuples of vertices.

    With ``planar`` the leaves are read in cyclic order and only trees
    compatible with it are produced.
    """
    pos = {x: i for i, x in enumerate(leaves)} if planar else None
    corolla = (tuple(sorted((x,) for x in leaves)),)
    seen = {corolla}
    frontier = [corolla]
    while frontier:
        nxt = []
        for tree in frontier:
            for i, w in enumerate(tree):
                if len(w) < 4:
                    continue
                for p, q in _splits(w, pos):
                    w1, w2 = _expand_vertex(w, p, q)
                    new = tuple(sorted(tree[:i] + tree[i + 1:] + (w1, w2)))
                    if new not in seen:
                        seen.add(new)
                        nxt.append(new)
        frontier = nxt
    return tuple(sorted(seen, key=lambda t: (len(t), t)))


def _leaves_of(key) -> tuple:
    return tuple(sorted(b[0] for blocks, _ in key[1] for b in blocks if len(b) == 1))


def _contract(vertices, i, j, fi, fj):
    """Merge vertex ``j`` into vertex ``i`` along the edge ``fi``--``fj``.

    ``vertices`` is a list of block tuples in line order with ``i < j``.
    Returns ``(sign, new_vertices, merged_index)``; the O-part is handled
    by the caller.
    """
    par = [_parity(b) for b in vertices]
    sign = (-1) ** (par[j] * sum(par[i + 1:j]))
    sign *= (-1) ** sum(par[:i])
    a, b = list(vertices[i]), list(vertices[j])
    ia, ib = a.index(fi), b.index(fj)
    sign *= (-1) ** (len(a) - 1 - ia) * (-1) ** ib * (-1) ** len(a)
    merged = tuple(a[:ia] + a[ia + 1:] + b[:ib] + b[ib + 1:])
    rest = [v for k, v in enumerate(vertices) if k not in (i, j)]
    return sign, rest[:i] + [merged] + rest[i:], i


class DualOperad(CyclicOperadModel):
    """``DO`` for a degree-0 cyclic operad ``O`` with zero differential."""

    has_differential = True

    def __init__(self, base: CyclicOperadModel, caps=None):
        self.base = base
        self.name = "d" + base.name
        self.is_nonsigma = base.is_nonsigma
        self.caps = dict(DEFAULT_CAPS, **(caps or {}))
        self._diff_cache: dict = {}
        self._relabel_cache: dict = {}

    def _check(self, n_flags):
        if n_flags - 1 > self.caps["tree_arity"]:
            raise OutOfScope(f"tree arity {n_flags - 1} exceeds cap {self.caps['tree_arity']}")

    def basis(self, flags):
        self.check_arity(flags)
        self._check(len(flags))
        if len(flags) == 2:
            raise OutOfScope("the dg dual is only modelled on components with at least 3 flags")
        planar = self.is_nonsigma
        leaves = tuple(flags) if planar else tuple(sorted(flags))
        pos = {x: i for i, x in enumerate(leaves)} if planar else None
        out = []
        for tree in all_trees(leaves, planar):
            okeys = []
            for blocks in tree:
                bl = _cyclic_blocks(blocks, pos) if planar else blocks
                okeys.append(self.base.basis(tuple(bl)))
            cyc = _rotate_min(leaves) if planar else ()
            for combo in itertools.product(*okeys):
                out.append((cyc, tuple(zip(tree, combo))))
        return out

    def degree(self, key) -> int:
        return sum(len(blocks) - 3 for blocks, _ in key[1])

    def relabel(self, key, mapping):
        ck = (key, tuple(sorted(mapping.items())))
        hit = self._relabel_cache.get(ck)
        if hit is not None:
            return hit
        shapes, vecs = [], []
        for blocks, okey in key[1]:
            bmap = {b: tuple(sorted(mapping[x] for x in b)) for b in blocks}
            shapes.append([bmap[b] for b in blocks])
            vecs.append(self.base.dual_relabel(okey, bmap))
        cyc = _rotate_min([mapping[x] for x in key[0]]) if key[0] else ()
        out = _assemble(shapes, vecs, cyc)
        self._relabel_cache[ck] = out
        return out

    def dual_relabel(self, key, mapping):
        raise NotImplementedError("dual of a dual is not modelled")

    def compose(self, k1, k2, a0, b0):
        s1, s2 = _leaves_of(k1), _leaves_of(k2)
        if a0 not in s1 or b0 not in s2:
            raise ValueError(f"cannot graft along {a0}-{b0}")
        other1 = set(s2) - {b0}
        other2 = set(s1) - {a0}

        def rename(b, at, other):
            return tuple(sorted((set(b) - {at}) | other)) if at in b else b

        shapes, vecs = [], []
        for key, at, other in ((k1, a0, other1), (k2, b0, other2)):
            for blocks, okey in key[1]:
                bmap = {b: rename(b, at, other) for b in blocks}
                shapes.append([bmap[b] for b in blocks])
                vecs.append(self.base.dual_relabel(okey, bmap))
        cyc = ()
        if self.is_nonsigma:
            cyc = _rotate_min(_rotate_to(k1[0], a0)[1:] + _rotate_to(k2[0], b0)[1:])
        return _assemble(shapes, vecs, cyc)

    def diff(self, key):
        hit = self._diff_cache.get(key)
        if hit is not None:
            return hit
        out: dict = {}
        cyc, tree = key
        pos = {x: i for i, x in enumerate(cyc)} if self.is_nonsigma else None
        shapes = [blocks for blocks, _ in tree]
        for i, (blocks, okey) in enumerate(tree):
            if len(blocks) < 4:
                continue
            for p, q in _splits(blocks, pos):
                w1, w2 = _expand_vertex(blocks, p, q)
                f1, f2 = _union(q), _union(p)
                others = shapes[:i] + shapes[i + 1:]
                _, order, new_shapes = _normalize_shape(others + [w1, w2])
                # positions of w1, w2 in the normalized expanded tree
                i1, i2 = new_shapes.index(w1), new_shapes.index(w2)
                lo, hi = min(i1, i2), max(i1, i2)
                flo, fhi = (f1, f2) if i1 < i2 else (f2, f1)
                s_k, merged_list, _ = _contract(new_shapes, lo, hi, flo, fhi)
                s_n, _, check = _normalize_shape(merged_list)
                assert tuple(check) == tuple(shapes)
                sign = s_k * s_n
                bl1 = _cyclic_blocks(w1, pos) if pos else w1
                bl2 = _cyclic_blocks(w2, pos) if pos else w2
                base_others = [(s, k) for s, k in tree if s != blocks]
                for k1 in self.base.basis(tuple(bl1)):
                    for k2 in self.base.basis(tuple(bl2)):
                        c = self.base.compose(k1, k2, f1, f2).get(okey)
                        if not c:
                            continue
                        new_key = (cyc, tuple(sorted(base_others + [(w1, k1), (w2, k2)])))
                        add_into(out, {new_key: sign * c})
        self._diff_cache[key] = out
        return out

    def __eq__(self, other):
        return isinstance(other, DualOperad) and other.base is self.base

    def __hash__(self):
        return hash(("dual", self.base.name))


_DUALS: dict = {}


def dual_model(base: CyclicOperadModel) -> DualOperad:
    if base.name not in _DUALS:
        _DUALS[base.name] = DualOperad(base)
    return _DUALS[base.name]


def dg_dual_component(model: CyclicOperadModel, n: int):
    """The chain complex ``DO((S))`` for ``S = {0, ..., n}``.

    Returns ``(complex, basis)`` with ``basis[degree]`` the ordered keys.
    """
    dual = model if isinstance(model, DualOperad) else dual_model(model)
    flags = tuple(range(n + 1))
    by_deg: dict[int, list] = {}
    for k in dual.basis(flags):
        by_deg.setdefault(dual.degree(k), []).append(k)
    index = {d: {k: i for i, k in enumerate(ks)} for d, ks in by_deg.items()}
    diffs = {}
    for d, ks in by_deg.items():
        tgt = index.get(d - 1)
        if not tgt:
            continue
        triples = []
        for j, k in enumerate(ks):
            for k2, c in dual.diff(k).items():
                triples.append((tgt[k2], j, c))
        diffs[d] = SparseMatrix.from_triples(len(tgt), len(ks), triples)
    dims = {d: len(ks) for d, ks in by_deg.items()}
    return GradedComplex.chain(dims, diffs), by_deg
