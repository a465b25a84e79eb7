"""Sheaf-side complex over graph moduli and the duality report.

The forest complex computes compactly supported cohomology of the
Verdier dual of the constructible sheaf ``F^O`` on the moduli of graphs
(rank ``n``) or ribbon graphs (type ``(g, b)``).  Its generators are
iso classes of pairs ``(G, F)`` with ``F`` a forest of ``G``, decorated
by ``x`` in ``(x)_v O(v)`` and the line ``Det^-1(E) (x) Det(E - F)``,
taken in coinvariants of ``Aut(G, F)``.  A generator sits in degree
``-|F|`` and the differential removes one forest edge, either letting
it go (it joins ``E - F``) or contracting it.

Reading the complex with degrees negated gives ``H^i(Y, F^O)``; the
duality report compares that table with the Feynman transform of the
dg dual ``DO`` twisted by ``Det^-1 H_1``.
"""
from __future__ import annotations

import time
from typing import Mapping

from .complexes import ComplexSpec, GraphComplexBuilder, _expand, rref_basis
from .graphs import permutation_sign
from .linalg import GradedComplex, SparseMatrix, homology_dims
from .operads import ONE, add_into

__all__ = ["ShiftMismatch", "ForestComplexBuilder", "sheaf_side_table", "find_shift", "duality_report"]


class ShiftMismatch(RuntimeError):
    """No single shift pairs the two tables of a duality report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


def _forests(g) -> list[tuple]:
    """Every forest of ``g`` as a sorted tuple of edges (loops never qualify)."""
    edges = [e for e in g.edges if not g.is_loop(e)]
    out = []

    def find(parent, v):
        while parent.get(v, v) != v:
            v = parent[v]
        return v

    def grow(i, chosen, parent):
        if i == len(edges):
            out.append(tuple(chosen))
            return
        grow(i + 1, chosen, parent)
        a, b = edges[i]
        ra, rb_ = find(parent, g.vertex(a)), find(parent, g.vertex(b))
        if ra != rb_:
            p2 = dict(parent)
            p2[ra] = rb_
            grow(i + 1, chosen + [edges[i]], p2)

    grow(0, [], {})
    return out


def _image_edges(edges, phi) -> tuple:
    return tuple(sorted((min(phi[a], phi[b]), max(phi[a], phi[b])) for a, b in edges))


class ForestComplexBuilder(GraphComplexBuilder):
    """Cochain complex computing ``H_c(Y, D F^O)`` for a degree-0 operad ``O``."""

    def __init__(self, spec: ComplexSpec, caps: Mapping | None = None):
        super().__init__(spec, caps)
        if self.model.has_differential:
            raise ValueError("the sheaf side is modelled for operads without differential")
        self._rep_cache: dict = {}

    def forest_rep(self, g, forest):
        """Orbit representative of ``forest`` under ``Aut(g)`` and a map onto it."""
        ck = (g.key(), forest)
        hit = self._rep_cache.get(ck)
        if hit is None:
            best = None
            for phi in self.automorphisms(g):
                img = _image_edges(forest, phi)
                if best is None or img < best[0]:
                    best = (img, phi)
            hit = best
            self._rep_cache[ck] = hit
        return hit

    def line_sign(self, g, f_src, h, f_tgt, phi) -> int:
        pos = {e: i for i, e in enumerate(h.edges)}
        imgs = []
        for a, b in g.edges:
            if a in phi and b in phi:
                imgs.append(pos[(min(phi[a], phi[b]), max(phi[a], phi[b]))])
        sign = permutation_sign(imgs)
        sig_src = [e for e in g.edges if e not in f_src and e[0] in phi]
        sig_tgt = {e: i for i, e in enumerate(x for x in h.edges if x not in f_tgt)}
        sign *= permutation_sign([sig_tgt[_image_edges([e], phi)[0]] for e in sig_src])
        if self.spec.h_twist:
            sign *= self.h1_det(g, h, phi)
        return sign

    def transport_forest(self, g, forest, x, phi, h) -> dict:
        img_f = _image_edges(forest, phi)
        vecs, targets = [], []
        hpos = {v: i for i, v in enumerate(h.vertices)}
        for v, key in zip(g.vertices, x):
            fl = g.flags(v)
            vecs.append(self.model.relabel(key, {f: phi[f] for f in fl}))
            targets.append(hpos[h.vertex(phi[fl[0]])])
        order = sorted(range(len(targets)), key=targets.__getitem__)
        sign = self.line_sign(g, forest, h, img_f, phi)

        return {(img_f, y): c for y, c in _expand([vecs[i] for i in order], sign).items()}

    def to_rep(self, g, forest, x) -> dict:
        """Move ``(g, forest, x)`` onto the orbit representative of the forest."""
        rep, phi = self.forest_rep(g, forest)
        return self.transport_forest(g, forest, x, phi, g)

    def stabilizer(self, g, forest):
        return [phi for phi in self.automorphisms(g) if _image_edges(forest, phi) == forest]

    def invariant_basis_forest(self, g, forest) -> list:
        stab = self.stabilizer(g, forest)
        keys = self.tensor_keys(g)
        order = {(forest, x): i for i, x in enumerate(keys)}
        vecs = []
        for x in keys:
            v: dict = {}
            for phi in stab:
                add_into(v, self.transport_forest(g, forest, x, phi, g))
            if v:
                vecs.append(v)
        return rref_basis(vecs, order)

    def coinvariant_class(self, g, forest, x) -> dict:
        ck = ("fproj", g.key(), forest, x)
        hit = self._diff_cache.get(ck)
        if hit is None:
            stab = self.stabilizer(g, forest)
            hit = {}
            for phi in stab:
                for (f2, z), c in self.transport_forest(g, forest, x, phi, g).items():
                    add_into(hit, {(g.key(), f2, z): c / len(stab)})
            self._diff_cache[ck] = hit
        return hit

    def forest_differential(self, g, forest, x) -> dict:
        out: dict = {}
        sigma = [e for e in g.edges if e not in forest]
        n_edges = g.num_edges
        verts = list(g.vertices)
        vpos = {v: i for i, v in enumerate(verts)}
        for e in forest:
            rest = tuple(f for f in forest if f != e)
            # (a) the edge leaves the forest and joins E - F in front
            s = (-1) ** (n_edges - 1) * (-1) ** sum(1 for f in sigma if f < e)
            for (f2, y), c in self.to_rep(g, rest, x).items():
                add_into(out, {(g.key(), f2, y): s * c})
            # (b) contract it
            a, b = e
            i, j = vpos[g.vertex(a)], vpos[g.vertex(b)]
            if i > j:
                a, b, i, j = b, a, j, i
            s = (-1) ** g.edges.index(e)
            ge = self.contract(g, (a, b))
            merged = self.model.compose(x[i], x[j], a, b)
            facs = [{k: ONE} for k in x]
            facs[i] = merged
            del facs[j]
            rest_v = verts[:j] + verts[j + 1:]
            gpos = {v: n for n, v in enumerate(ge.vertices)}
            targets = []
            for n, v in enumerate(rest_v):
                fl = [h for h in g.flags(v) if h not in (a, b)]
                if n == i:
                    fl += [h for h in g.flags(verts[j]) if h not in (a, b)]
                targets.append(gpos[ge.vertex(fl[0])])
            order = sorted(range(len(targets)), key=targets.__getitem__)
            canon, iso = self.canonicalize(ge)
            for y, c in _expand([facs[n] for n in order], s).items():
                for (f2, z), c2 in self.transport_forest(ge, rest, y, iso, canon).items():
                    for (f3, w), c3 in self.to_rep(canon, f2, z).items():
                        add_into(out, {(canon.key(), f3, w): c * c2 * c3})
        return out

    def build(self):
        gens: dict[int, list] = {}
        by_key = {}
        for g in self.graphs():
            by_key[g.key()] = g
            reps = sorted({self.forest_rep(g, f)[0] for f in _forests(g)})
            for f in reps:
                for piv, vec in self.invariant_basis_forest(g, f):
                    gens.setdefault(-len(f), []).append((g, f, piv, vec))
        coords = {d: {(g.key(), piv[0], piv[1]): n for n, (g, f, piv, _) in enumerate(lst)}
                  for d, lst in gens.items()}
        diffs = {}
        for d, lst in gens.items():
            tgt = coords.get(d + 1)
            if not tgt:
                continue
            triples = []
            for col, (g, f, _, vec) in enumerate(lst):
                img: dict = {}
                for (f0, x), c in vec.items():
                    add_into(img, self.forest_differential(g, f0, x), c)
                proj: dict = {}
                for (gk, f2, y), c in img.items():
                    add_into(proj, self.coinvariant_class(by_key[gk], f2, y), c)
                for k, c in proj.items():
                    row = tgt.get(k)
                    if row is not None:
                        triples.append((row, col, c))
            diffs[d] = SparseMatrix.from_triples(len(tgt), len(lst), triples)
        dims = {d: len(lst) for d, lst in gens.items()}
        return GradedComplex.cochain(dims, diffs), None


def sheaf_side_table(spec: ComplexSpec, caps=None) -> dict[int, int]:
    """``H^i(Y, F^O)`` as ``{i: dim}``."""
    cx, _ = ForestComplexBuilder(spec, caps).build()
    return {-k: v for k, v in sorted(homology_dims(cx).items(), reverse=True)}


def find_shift(table_a: Mapping[int, int], table_b: Mapping[int, int]):
    """The constant ``c`` with ``a(k) == b(c - k)`` for all ``k``, if any.

    Returns ``(ok, c)``; ``c`` is ``None`` when both tables are empty.
    """
    a = {k: v for k, v in table_a.items() if v}
    b = {k: v for k, v in table_b.items() if v}
    if not a and not b:
        return True, None
    if not a or not b:
        return False, None
    c = max(a) + min(b)
    ok = all(b.get(c - k, 0) == v for k, v in a.items()) and all(a.get(c - k, 0) == v for k, v in b.items())
    return ok, c if ok else None


def duality_report(operad: str, rank: int | None = None, genus: int | None = None,
                   boundary: int | None = None, labeled: bool = False, caps=None,
                   strict: bool = False) -> dict:
    """Compare ``H(Gamma DO)`` twisted by ``Det^-1 H_1`` with ``H^*(Y, F^O)``.

    Also records the plain tables of ``Gamma O`` in both orientations and
    of ``Gamma DO`` untwisted.  ``passed`` means one shift ``c`` works in
    every degree; ``expected_shift`` is the real dimension of the moduli
    space (``3n-4`` or ``6g+3b-7``).
    """
    from .complexes import graph_betti

    name = operad.lower()
    if name.startswith("d"):
        raise ValueError("give the operad O; its dual is built automatically")
    t0 = time.time()
    kw = dict(rank=rank, genus=genus, boundary=boundary, labeled=labeled)

    def spec(op, orientation="twisted", h=False):
        return ComplexSpec(op, orientation=orientation, h_twist=h, **kw)

    tables = {
        "O_twisted": graph_betti(spec(name), caps),
        "O_standard": graph_betti(spec(name, "standard"), caps),
        "DO_twisted": graph_betti(spec("d" + name), caps),
        "DO_h_twisted": graph_betti(spec("d" + name, h=True), caps),
        "sheaf": sheaf_side_table(spec(name), caps),
    }
    ok, c = find_shift(tables["DO_h_twisted"], tables["sheaf"])
    expected = 3 * rank - 4 if rank is not None else 6 * genus + 3 * boundary - 7
    report = {
        "operad": name,
        "family": {k: v for k, v in kw.items() if v is not None and v is not False},
        "tables": {k: {str(d): v for d, v in t.items()} for k, t in tables.items()},
        "shift_observed": c,
        "expected_shift": expected,
        "passed": ok,
        "seconds": round(time.time() - t0, 2),
    }
    if strict and not ok:
        raise ShiftMismatch(f"no constant shift pairs DO_h_twisted with sheaf for {name}", report)
    return report
