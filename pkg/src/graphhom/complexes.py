"""Feynman-transform graph complexes ``Gamma O`` and their Betti tables.

A generator is a canonical graph ``G``, one basis key of ``O`` per vertex
(listed in vertex order) and an orientation.  The orientation line is
chosen by ``orientation``:

* ``"twisted"``:  ``Det(E)[1]``; an isomorphism acts by the sign of the
  edge permutation.
* ``"standard"``: ``Det(E) (x) Det^-1 H_1`` shifted the same way; the
  action also picks up the determinant on first homology.

``h_twist`` tensors with ``Det^-1 H_1`` placed in degree 0, which
multiplies the action by the ``H_1`` determinant once more.  Degree of a
generator is ``sum |x_v| + |E| - 1``.  The differential contracts
non-loop edges, composing decorations, plus the internal differential
of ``O`` if it has one; it lowers the degree by one.  Only the
``Aut(G)``-coinvariants survive; over Q these are computed as the image
of the averaging projector.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Mapping

from . import graphs as gr
from . import ribbon as rb
from .dgdual import koszul_sign
from .graphs import DEFAULT_CAPS, InvalidGraph, integer_det, permutation_sign
from .linalg import GradedComplex, SparseMatrix, euler_characteristic, homology_dims
from .operads import ONE, add_into, get_model

__all__ = [
    "ComplexSpec",
    "GraphComplexBuilder",
    "build_complex",
    "graph_betti",
    "betti_table_json",
    "rref_basis",
]

SCHEMA = "graphhom/1"


@dataclass(frozen=True)
class ComplexSpec:
    """What to build.

    Set ``rank`` for plain graphs, or ``genus``/``boundary`` for ribbon
    graphs (operads ``t``/``dt``).  ``ribbon_filter=(g, b)`` keeps only
    ``ass``-decorated plain graphs whose induced ribbon surface has that
    type.
    """

    operad: str
    rank: int | None = None
    genus: int | None = None
    boundary: int | None = None
    labeled: bool = False
    orientation: str = "standard"
    h_twist: bool = False
    tree_policy: str = "bfs"
    ribbon_filter: tuple | None = None
    cohomology: bool = False

    @property
    def ribbon(self) -> bool:
        return self.genus is not None

    def validate(self):
        if self.orientation not in ("standard", "twisted"):
            raise InvalidGraph(f"orientation must be standard or twisted, got {self.orientation!r}")
        if self.tree_policy not in ("bfs", "dfs"):
            raise InvalidGraph(f"unknown spanning-tree policy {self.tree_policy!r}")
        model = get_model(self.operad)
        if self.ribbon:
            if self.boundary is None:
                raise InvalidGraph("ribbon mode needs both genus and boundary")
            if not model.is_nonsigma:
                raise InvalidGraph(f"ribbon graphs take the non-symmetric operads t/dt, not {self.operad}")
            g, b = self.genus, self.boundary
            if g < 0 or b < 1 or 2 - 2 * g - b >= 0:
                raise rb.InvalidRibbon(f"(g,b)=({g},{b}) violates 2-2g-b < 0")
        else:
            if self.rank is None:
                raise InvalidGraph("give either rank or genus/boundary")
            if model.is_nonsigma:
                raise InvalidGraph(f"{self.operad} needs ribbon graphs")
            if self.rank < 2:
                raise InvalidGraph("rank must be at least 2")
            if self.ribbon_filter is not None and model.name != "ass":
                raise InvalidGraph("ribbon_filter only applies to ass")
        return model

    def describe(self) -> dict:
        d = asdict(self)
        d["ribbon_filter"] = list(self.ribbon_filter) if self.ribbon_filter else None
        return d


def rref_basis(vectors, order: Mapping) -> list[tuple]:
    """Reduced echelon basis of the span of sparse vectors.

    ``order`` ranks the coordinate keys.  Returns ``(pivot, vector)``
    pairs; each vector has 1 at its pivot and 0 at every other pivot.
    """
    basis: list[list] = []  # [pivot, vec]
    for v in vectors:
        v = dict(v)
        for piv, b in basis:
            c = v.get(piv)
            if c:
                add_into(v, b, -c)
        if not v:
            continue
        piv = min(v, key=order.__getitem__)
        c = v[piv]
        v = {k: x / c for k, x in v.items()}
        for entry in basis:
            c2 = entry[1].get(piv)
            if c2:
                add_into(entry[1], v, -c2)
        basis.append([piv, v])
    basis.sort(key=lambda e: order[e[0]])
    return [(p, v) for p, v in basis]


class GraphComplexBuilder:
    """Builds ``Gamma O`` for one :class:`ComplexSpec`.

    With ``relabel_seed`` every isomorphism class is represented by a
    randomly relabeled copy of its canonical graph instead of the
    canonical graph itself; the homology must not notice.
    """

    def __init__(self, spec: ComplexSpec, caps: Mapping | None = None, relabel_seed: int | None = None):
        self.spec = spec
        self._rng = random.Random(relabel_seed) if relabel_seed is not None else None
        self._reps: dict = {}
        self.caps = dict(DEFAULT_CAPS, **(caps or {}))
        self.model = spec.validate()
        if hasattr(self.model, "caps"):
            self.model.caps = dict(self.model.caps, **self.caps)
        self._bases: dict = {}
        self._diff_cache: dict = {}
        self._canon_cache: dict = {}
        self._aut_cache: dict = {}

    # family ----------------------------------------------------------------
    def graphs(self) -> list:
        s = self.spec
        if s.ribbon:
            base = rb.enumerate_ribbon_graphs(s.genus, s.boundary, s.labeled, self.caps)
        else:
            base = gr.enumerate_graphs(s.rank, self.caps)
        if self._rng is None:
            return base
        return [self._representative(c)[0] for c in base]

    def _representative(self, c):
        hit = self._reps.get(c.key())
        if hit is None:
            hs = list(c.half_edges)
            m = dict(zip(hs, self._rng.sample(range(100, 100 + 4 * len(hs)), len(hs))))
            pairs = [(m[a], m[b]) for a, b in c.edges]
            if self.spec.ribbon:
                labels = {m[h]: v for h, v in c.face_labels.items()} if c.labeled else None
                rep = rb.RibbonGraph(pairs, {m[h]: m[c.next(h)] for h in hs}, labels)
            else:
                vs = list(c.vertices)
                vmap = dict(zip(vs, self._rng.sample(range(50, 50 + 4 * len(vs)), len(vs))))
                rep = gr.HalfEdgeGraph(pairs, {m[h]: vmap[c.vertex(h)] for h in hs})
            hit = (rep, m)
            self._reps[c.key()] = hit
        return hit

    def canonicalize(self, g):
        k = g.key()
        hit = self._canon_cache.get(k)
        if hit is None:
            hit = rb.canonicalize_ribbon(g) if self.spec.ribbon else gr.canonicalize(g)
            if self._rng is not None:
                rep, m = self._representative(hit[0])
                hit = (rep, {h: m[x] for h, x in hit[1].items()})
            self._canon_cache[k] = hit
        return hit

    def automorphisms(self, g) -> list:
        k = g.key()
        hit = self._aut_cache.get(k)
        if hit is None:
            hit = rb.ribbon_automorphisms(g) if self.spec.ribbon else gr.automorphisms(g)
            self._aut_cache[k] = hit
        return hit

    def contract(self, g, edge):
        if self.spec.ribbon:
            return rb.contract_ribbon_edge(g, edge)
        return gr.contract_edge(g, edge)[0]

    def cycle_basis(self, g):
        k = ("cb", g.key())
        hit = self._bases.get(k)
        if hit is None:
            hit = gr.cycle_basis(g, self.spec.tree_policy)
            self._bases[k] = hit
        return hit

    # line ------------------------------------------------------------------
    def h1_det(self, g, h, phi) -> int:
        return integer_det(gr.h1_matrix(self.cycle_basis(g), self.cycle_basis(h), phi))

    def orientation_sign(self, g, h, phi) -> int:
        """Action of a (possibly contracting) map on the orientation lines."""
        pos = {e: i for i, e in enumerate(h.edges)}
        images = []
        for a, b in g.edges:
            if a in phi and b in phi:
                x, y = phi[a], phi[b]
                images.append(pos[(min(x, y), max(x, y))])
        sign = permutation_sign(images)
        twists = (self.spec.orientation == "standard") + self.spec.h_twist
        if twists % 2:
            sign *= self.h1_det(g, h, phi)
        return sign

    # generators ------------------------------------------------------------
    def vertex_flags(self, g, v):
        return g.flags(v)

    def tensor_keys(self, g) -> list[tuple]:
        per_vertex = [self.model.basis(tuple(self.vertex_flags(g, v))) for v in g.vertices]
        keys = list(itertools.product(*per_vertex))
        if self.spec.ribbon_filter is not None:
            keys = [x for x in keys if self._ribbon_type(g, x) == tuple(self.spec.ribbon_filter)]
        return keys

    def _ribbon_type(self, g, x) -> tuple:
        nxt = {}
        for key in x:
            for i, h in enumerate(key):
                nxt[h] = key[(i + 1) % len(key)]
        return rb.genus_and_boundary(rb.RibbonGraph(g.edges, nxt))

    def degree(self, g, x) -> int:
        return sum(self.model.degree(k) for k in x) + g.num_edges - 1

    def transport(self, g, x, phi, h) -> dict:
        """Push the generator ``x`` on ``g`` along the isomorphism ``phi: g -> h``."""
        hpos = {v: i for i, v in enumerate(h.vertices)}
        vecs, targets, pars = [], [], []
        for v, key in zip(g.vertices, x):
            fl = g.flags(v)
            vecs.append(self.model.relabel(key, {f: phi[f] for f in fl}))
            targets.append(hpos[h.vertex(phi[fl[0]])])
            pars.append(self.model.degree(key) % 2)
        sign, order = koszul_sign(targets, pars)
        sign *= self.orientation_sign(g, h, phi)
        return _expand([vecs[i] for i in order], sign)

    def differential(self, g, x) -> dict:
        """``D(x)`` as a dict ``(canonical graph key, tensor key) -> coeff``."""
        ck = (g.key(), x)
        hit = self._diff_cache.get(ck)
        if hit is not None:
            return hit
        out: dict = {}
        degs = [self.model.degree(k) for k in x]
        if self.model.has_differential:
            for i, key in enumerate(x):
                s = (-1) ** (sum(degs[:i]) % 2)
                for k2, c in self.model.diff(key).items():
                    add_into(out, {(g.key(), x[:i] + (k2,) + x[i + 1:]): s * c})
        verts = list(g.vertices)
        vpos = {v: i for i, v in enumerate(verts)}
        base_sign = (-1) ** (sum(degs) % 2)
        for p, (a, b) in enumerate(g.edges):
            va, vb = g.vertex(a), g.vertex(b)
            if va == vb:
                continue
            i, j = vpos[va], vpos[vb]
            if i > j:
                a, b, i, j = b, a, j, i
            sign = base_sign * (-1) ** p
            sign *= (-1) ** ((degs[j] * sum(degs[i + 1:j])) % 2)
            ge = self.contract(g, (a, b))
            merged = self.model.compose(x[i], x[j], a, b)
            rest = [{k: ONE} for k in x]
            rest[i] = merged
            del rest[j]
            rest_v = verts[:j] + verts[j + 1:]
            rest_d = degs[:j] + degs[j + 1:]
            rest_d[i] = degs[i] + degs[j]
            gpos = {v: n for n, v in enumerate(ge.vertices)}
            targets = []
            for n, v in enumerate(rest_v):
                fl = [h for h in g.flags(v) if h not in (a, b)]
                if n == i:
                    fl += [h for h in g.flags(verts[j]) if h not in (a, b)]
                targets.append(gpos[ge.vertex(fl[0])])
            s2, order = koszul_sign(targets, [d % 2 for d in rest_d])
            ident = {h: h for h in ge.half_edges}
            sign *= s2 * self.orientation_sign(g, ge, ident)
            pre = _expand([rest[n] for n in order], sign)
            if not pre:
                continue
            canon, iso = self.canonicalize(ge)
            for y, c in pre.items():
                for z, c2 in self.transport(ge, y, iso, canon).items():
                    add_into(out, {(canon.key(), z): c * c2})
        self._diff_cache[ck] = out
        return out

    # coinvariants ------------------------------------------------------------
    def invariant_basis(self, g) -> dict[int, list]:
        """Per degree, the RREF basis of ``Aut(g)``-invariant vectors."""
        auts = self.automorphisms(g)
        by_deg: dict[int, list] = {}
        for x in self.tensor_keys(g):
            by_deg.setdefault(self.degree(g, x), []).append(x)
        out = {}
        for d, keys in by_deg.items():
            order = {k: i for i, k in enumerate(keys)}
            vecs = []
            for x in keys:
                v: dict = {}
                for phi in auts:
                    add_into(v, self.transport(g, x, phi, g))
                if v:
                    vecs.append(v)
            basis = rref_basis(vecs, order)
            if basis:
                out[d] = basis
        return out

    def _coinvariant_class(self, g, y) -> dict:
        ck = ("proj", g.key(), y)
        hit = self._diff_cache.get(ck)
        if hit is None:
            auts = self.automorphisms(g)
            hit = {}
            for phi in auts:
                for z, c in self.transport(g, y, phi, g).items():
                    add_into(hit, {(g.key(), z): c / len(auts)})
            self._diff_cache[ck] = hit
        return hit

    def build(self) -> tuple[GradedComplex, dict]:
        """The complex plus an index: ``index[degree]`` lists ``(graph, pivot)``."""
        gens: dict[int, list] = {}
        for g in self.graphs():
            for d, basis in self.invariant_basis(g).items():
                for piv, vec in basis:
                    gens.setdefault(d, []).append((g, piv, vec))
        coords = {d: {(g.key(), piv): n for n, (g, piv, _) in enumerate(lst)} for d, lst in gens.items()}
        by_key = {g.key(): g for lst in gens.values() for g, _, _ in lst}
        diffs = {}
        for d, lst in gens.items():
            tgt = coords.get(d - 1)
            if not tgt:
                continue
            triples = []
            for col, (g, _, vec) in enumerate(lst):
                img: dict = {}
                for x, c in vec.items():
                    add_into(img, self.differential(g, x), c)
                # an image is only invariant up to the chosen isomorphisms;
                # project each key before reading pivot coordinates
                out: dict = {}
                for (gk, y), c in img.items():
                    if gk in by_key:
                        add_into(out, self._coinvariant_class(by_key[gk], y), c)
                for k, c in out.items():
                    row = tgt.get(k)
                    if row is not None:
                        triples.append((row, col, c))
            diffs[d] = SparseMatrix.from_triples(len(tgt), len(lst), triples)
        dims = {d: len(lst) for d, lst in gens.items()}
        cx = GradedComplex.chain(dims, diffs)
        index = {d: [(g, piv) for g, piv, _ in lst] for d, lst in gens.items()}
        return cx, index


def _expand(vecs, scale=1) -> dict:
    out: dict = {}
    items = [list(v.items()) for v in vecs]
    for combo in itertools.product(*items):
        c = Fraction(scale)
        for _, x in combo:
            c *= x
        if c:
            add_into(out, {tuple(k for k, _ in combo): c})
    return out


def build_complex(spec: ComplexSpec, caps: Mapping | None = None, relabel_seed: int | None = None) -> GradedComplex:
    cx, _ = GraphComplexBuilder(spec, caps, relabel_seed).build()
    if spec.cohomology:
        from .linalg import dualize_complex
        cx = dualize_complex(cx)
    return cx


def graph_betti(spec: ComplexSpec, caps: Mapping | None = None, relabel_seed: int | None = None) -> dict[int, int]:
    """Nonzero Betti numbers of ``Gamma O`` (homology and cohomology agree in dimension)."""
    return homology_dims(build_complex(spec, caps, relabel_seed))


def betti_table_json(spec: ComplexSpec, betti: Mapping[int, int], shift=None, **extra) -> dict:
    out = {
        "schema": SCHEMA,
        "spec": spec.describe(),
        "betti": {str(k): v for k, v in sorted(betti.items())},
        "euler": euler_characteristic(betti),
        "shift_observed": shift,
    }
    out.update(extra)
    return out
