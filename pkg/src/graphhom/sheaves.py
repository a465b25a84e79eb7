"""Constructible complexes on finite simplicial complexes.

A coefficient system assigns a cochain complex ``F_s`` to each face ``s``
and a chain map ``F_s -> F_t`` to each inclusion ``s <= t``.  Its
hypercohomology is the cohomology of the Cech-type total complex
``sum_t F_t (x) Det(t)[1]`` where the ``t`` summand sits in degree
``internal + dim t``.  The Verdier dual is again a coefficient system,
``DF_s = sum_{t >= s} (F_t (x) Det(t)[1])^*`` with projections as maps.

Faces are sorted tuples of vertex labels; ``Det(t)`` is oriented by
that order, so incidence signs are ``(-1)^position``.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Iterable, Mapping

from .linalg import GradedComplex, SparseMatrix, homology_dims

__all__ = [
    "FaceNotFound",
    "NonFunctorialSystem",
    "SimplicialComplex",
    "CoefficientSystem",
    "constant_system",
    "random_complex",
    "random_system",
    "total_complex",
    "hypercohomology",
    "verdier_dual",
    "star_compact_cohomology",
    "stalk_table",
]


class FaceNotFound(KeyError):
    pass


class NonFunctorialSystem(ValueError):
    pass


def face_key(face) -> str:
    return ",".join(str(v) for v in face)


def parse_face(key: str) -> tuple:
    return tuple(int(x) for x in key.split(",")) if key else ()


class SimplicialComplex:
    """Finite simplicial complex, closed under taking nonempty faces."""

    def __init__(self, faces: Iterable[Iterable[int]], vertices: Iterable[int] = ()):
        closed = set()
        for f in faces:
            f = tuple(sorted(set(f)))
            for r in range(1, len(f) + 1):
                closed.update(itertools.combinations(f, r))
        closed.update((v,) for v in vertices)
        self.faces = sorted(closed, key=lambda f: (len(f), f))
        self._set = set(self.faces)
        self.vertices = sorted({v for f in self.faces for v in f})

    def __contains__(self, face) -> bool:
        return tuple(face) in self._set

    def dim(self, face) -> int:
        return len(face) - 1

    def check_face(self, face) -> tuple:
        face = tuple(sorted(face))
        if face not in self._set:
            raise FaceNotFound(face)
        return face

    def cofaces(self, face) -> list[tuple]:
        """Codimension-one cofaces."""
        s = set(face)
        return [t for t in self.faces if len(t) == len(face) + 1 and s <= set(t)]

    def star(self, face) -> list[tuple]:
        s = set(face)
        return [t for t in self.faces if s <= set(t)]

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "faces": [list(f) for f in self.faces]}

    @classmethod
    def from_json(cls, data: Mapping) -> "SimplicialComplex":
        return cls(data.get("faces", []), data.get("vertices", []))

    def __repr__(self):
        return f"SimplicialComplex({len(self.vertices)} vertices, {len(self.faces)} faces)"


def incidence(face, coface) -> int:
    """Sign of ``face`` inside ``coface``: ``(-1)`` to the position of the new vertex."""
    (extra,) = set(coface) - set(face)
    return (-1) ** coface.index(extra)


class CoefficientSystem:
    """Stalk complexes with generization maps on codimension-one pairs.

    ``gens[(s, t)][k]`` is the matrix of ``F_s^k -> F_t^k``.  Maps for
    longer inclusions are composites; :meth:`validate` checks they do not
    depend on the chosen chain and that every map commutes with the
    stalk differentials.
    """

    def __init__(self, X: SimplicialComplex, stalks: Mapping, gens: Mapping, check: bool = True):
        self.X = X
        self.stalks = {tuple(s): c for s, c in stalks.items()}
        for f in X.faces:
            self.stalks.setdefault(f, GradedComplex.cochain({}))
        self.gens = {}
        for (s, t), mats in gens.items():
            self.gens[(tuple(s), tuple(t))] = dict(mats)
        if check:
            self.validate()

    def gen(self, s, t, k) -> SparseMatrix:
        m = self.gens.get((s, t), {}).get(k)
        if m is None:
            return SparseMatrix.zero(self.stalks[t].dim(k), self.stalks[s].dim(k))
        return m

    def degrees(self) -> set[int]:
        return {k for c in self.stalks.values() for k in c.dims}

    def validate(self):
        X = self.X
        for (s, t) in self.gens:
            if s not in X or t not in X or len(t) != len(s) + 1 or not set(s) <= set(t):
                raise NonFunctorialSystem(f"generization {s}->{t} is not a codimension-one inclusion")
        for s in X.faces:
            for t in X.cofaces(s):
                for k in self.degrees():
                    g = self.gen(s, t, k)
                    if g.shape != (self.stalks[t].dim(k), self.stalks[s].dim(k)):
                        raise NonFunctorialSystem(f"map {s}->{t} in degree {k} has shape {g.shape}")
                    lhs = self.stalks[t].differential(k) @ g
                    rhs = self.gen(s, t, k + 1) @ self.stalks[s].differential(k)
                    if lhs != rhs:
                        raise NonFunctorialSystem(f"map {s}->{t} does not commute with d in degree {k}")
        # codim-2 squares: both routes through the two middle faces agree
        for s in X.faces:
            for u in X.faces:
                if len(u) != len(s) + 2 or not set(s) <= set(u):
                    continue
                a, b = sorted(set(u) - set(s))
                t1 = tuple(sorted(s + (a,)))
                t2 = tuple(sorted(s + (b,)))
                for k in self.degrees():
                    if self.gen(t1, u, k) @ self.gen(s, t1, k) != self.gen(t2, u, k) @ self.gen(s, t2, k):
                        raise NonFunctorialSystem(f"maps {s}->{u} depend on the route in degree {k}")

    def to_json(self) -> dict:
        return {
            "complex": self.X.to_json(),
            "stalks": {face_key(s): c.to_json() for s, c in self.stalks.items() if not c.is_zero()},
            "gens": {f"{face_key(s)}→{face_key(t)}": {str(k): m.triples() for k, m in mats.items()
                                                          if not m.is_zero()}
                     for (s, t), mats in self.gens.items()},
        }

    @classmethod
    def from_json(cls, data: Mapping, X: SimplicialComplex | None = None) -> "CoefficientSystem":
        if X is None:
            X = SimplicialComplex.from_json(data["complex"])
        stalks = {parse_face(k): GradedComplex.from_json(v) for k, v in data.get("stalks", {}).items()}
        gens = {}
        for key, mats in data.get("gens", {}).items():
            a, b = key.replace("->", "→").split("→")
            s, t = parse_face(a), parse_face(b)
            zero = GradedComplex.cochain({})
            gens[(s, t)] = {int(k): SparseMatrix.from_triples(stalks.get(t, zero).dim(int(k)),
                                                              stalks.get(s, zero).dim(int(k)), tr)
                            for k, tr in mats.items()}
        return cls(X, stalks, gens)


def constant_system(X: SimplicialComplex, degree: int = 0) -> CoefficientSystem:
    one = GradedComplex.cochain({degree: 1})
    gens = {(s, t): {degree: SparseMatrix.identity(1)} for s in X.faces for t in X.cofaces(s)}
    return CoefficientSystem(X, {f: one for f in X.faces}, gens)


def total_complex(system: CoefficientSystem, faces: Iterable[tuple] | None = None) -> GradedComplex:
    """``sum_t F_t (x) Det(t)[1]`` over ``faces`` (default: all).

    ``faces`` must be closed under passing to cofaces inside the complex
    (an open star, or everything), so the result is a subcomplex.
    """
    X = system.X
    faces = X.faces if faces is None else sorted(faces, key=lambda f: (len(f), f))
    fset = set(faces)
    offsets: dict[int, dict[tuple, int]] = {}
    dims: dict[int, int] = {}
    for t in faces:
        for k, n in system.stalks[t].dims.items():
            d = k + X.dim(t)
            offsets.setdefault(d, {})[t] = dims.get(d, 0)
            dims[d] = dims.get(d, 0) + n
    diffs = {}
    for d in dims:
        if d + 1 not in dims:
            continue
        triples = []
        for t, off in offsets[d].items():
            k = d - X.dim(t)
            # internal differential, Koszul sign from passing Det(t)[1]
            # is absorbed by putting the Cech part on the right
            inner = system.stalks[t].differential(k)
            for (r, c), v in inner.entries.items():
                triples.append((offsets[d + 1][t] + r, off + c, v))
            for u in X.cofaces(t):
                if u not in fset:
                    continue
                g = system.gen(t, u, k)
                sign = incidence(t, u) * (-1) ** (k % 2)
                for (r, c), v in g.entries.items():
                    triples.append((offsets[d + 1][u] + r, off + c, sign * v))
        diffs[d] = SparseMatrix.from_triples(dims[d + 1], dims[d], triples)
    return GradedComplex.cochain(dims, diffs)


def hypercohomology(X: SimplicialComplex, system: CoefficientSystem) -> dict[int, int]:
    return homology_dims(total_complex(system))


def star_compact_cohomology(X: SimplicialComplex, face, system: CoefficientSystem) -> dict[int, int]:
    """``H_c`` of the open star of ``face``: the total complex on its cofaces."""
    face = X.check_face(face)
    return homology_dims(total_complex(system, X.star(face)))


def stalk_table(system: CoefficientSystem, face) -> dict[int, int]:
    return homology_dims(system.stalks[tuple(face)])


def verdier_dual(X: SimplicialComplex, system: CoefficientSystem) -> CoefficientSystem:
    """``DF``: stalks are duals of open-star total complexes; maps project."""
    layouts = {}
    stalks = {}
    for s in X.faces:
        star = X.star(s)
        tc = total_complex(system, star)
        # record where each (t, k) block lives so projections can be built
        layout: dict[int, dict[tuple, tuple[int, int]]] = {}
        for d in tc.dims:
            pos = 0
            for t in sorted(star, key=lambda f: (len(f), f)):
                k = d - X.dim(t)
                n = system.stalks[t].dim(k)
                if n:
                    layout.setdefault(d, {})[t] = (pos, n)
                    pos += n
        layouts[s] = layout
        # dual complex: degree d becomes -d, transpose differentials
        dims = {-d: n for d, n in tc.dims.items()}
        diffs = {-(d + 1): m.transpose() for d, m in tc.diffs.items()}
        stalks[s] = GradedComplex.cochain(dims, diffs, check=False)
    gens = {}
    for s in X.faces:
        for t in X.cofaces(s):
            mats = {}
            for d, blocks in layouts[s].items():
                triples = []
                for u, (pos_t, n) in layouts[t].get(d, {}).items():
                    pos_s = blocks[u][0]
                    triples += [(pos_t + i, pos_s + i, 1) for i in range(n)]
                mats[-d] = SparseMatrix.from_triples(stalks[t].dim(-d), stalks[s].dim(-d), triples)
            gens[(s, t)] = mats
    return CoefficientSystem(X, stalks, gens, check=False)


# random inputs -----------------------------------------------------------

def random_complex(seed: int, max_vertices: int = 8, max_dim: int = 2) -> SimplicialComplex:
    rng = random.Random(seed)
    n = rng.randint(1, max_vertices)
    verts = list(range(n))
    faces = [(v,) for v in verts]
    for _ in range(rng.randint(0, 2 * n)):
        size = rng.randint(2, min(max_dim + 1, n)) if n >= 2 else 1
        faces.append(tuple(rng.sample(verts, size)))
    return SimplicialComplex(faces, verts)


def _unitriangular(rng, n) -> tuple[list, list]:
    """A random integer unitriangular matrix and its inverse."""
    a = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            a[i][j] = Fraction(rng.randint(-2, 2))
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for j in range(n):
        for i in range(j - 1, -1, -1):
            inv[i][j] = -sum(a[i][k] * inv[k][j] for k in range(i + 1, j + 1))
    return a, inv


def random_system(X: SimplicialComplex, seed: int, max_dim: int = 2) -> CoefficientSystem:
    """Deterministic random functorial system.

    A global graded complex is split into blocks (single generators, or
    acyclic pairs ``k -> k+1``).  Each block lives on a random downward
    closed set of faces, so maps are projections; each stalk is then
    re-coordinatized by a random unitriangular change of basis per
    degree, which keeps every square commuting.  ``max_dim`` bounds the
    number of blocks in each degree.
    """
    rng = random.Random(seed)
    blocks = []  # (degree, acyclic?)
    for k in (-1, 0, 1):
        for _ in range(rng.randint(0, max_dim)):
            blocks.append((k, rng.random() < 0.3))
    tops = [f for f in X.faces if not any(set(f) < set(g) for g in X.faces)]
    alive = []
    for _ in blocks:
        chosen = [f for f in tops if rng.random() < 0.6] or [rng.choice(X.faces)]
        alive.append(chosen)

    def lives(i, face):
        return any(set(face) <= set(m) for m in alive[i])

    gens_of = {}  # face -> degree -> list of (block index, slot)
    for f in X.faces:
        per: dict[int, list] = {}
        for i, (k, pair) in enumerate(blocks):
            if lives(i, f):
                per.setdefault(k, []).append((i, 0))
                if pair:
                    per.setdefault(k + 1, []).append((i, 1))
        gens_of[f] = per
    change = {f: {k: _unitriangular(rng, len(lst)) for k, lst in per.items()} for f, per in gens_of.items()}

    def mat(rows, cols):
        return SparseMatrix.from_dense(rows) if rows and cols else SparseMatrix.zero(len(rows), cols)

    def mul(a, b):
        return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]

    stalks = {}
    for f, per in gens_of.items():
        dims = {k: len(lst) for k, lst in per.items()}
        diffs = {}
        for k, lst in per.items():
            tgt = per.get(k + 1, [])
            if not tgt:
                continue
            raw = [[Fraction(int(tb == sb and ts == 1 and ss == 0)) for (sb, ss) in lst] for (tb, ts) in tgt]
            a_t, _ = change[f][k + 1]
            _, inv_s = change[f][k]
            diffs[k] = mat(mul(mul(a_t, raw), inv_s), len(lst))
        stalks[f] = GradedComplex.cochain(dims, diffs)
    gens = {}
    for s in X.faces:
        for t in X.cofaces(s):
            mats = {}
            for k, src in gens_of[s].items():
                tgt = gens_of[t].get(k, [])
                if not tgt:
                    continue
                raw = [[Fraction(int(a == b)) for b in src] for a in tgt]
                a_t, _ = change[t][k]
                _, inv_s = change[s][k]
                mats[k] = mat(mul(mul(a_t, raw), inv_s), len(src))
            gens[(s, t)] = mats
    return CoefficientSystem(X, stalks, gens)


EXAMPLES = {
    "point": [(0,)],
    "interval": [(0, 1)],
    "circle": [(0, 1), (1, 2), (0, 2)],
    "disk": [(0, 1, 2)],
}


def example_system(name: str) -> tuple[SimplicialComplex, CoefficientSystem]:
    """Constant system on one of the bundled complexes."""
    X = SimplicialComplex(EXAMPLES[name])
    return X, constant_system(X)
