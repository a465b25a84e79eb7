"""Concrete cyclic operads: Comm, Ass, Lie, and the non-symmetric T.

A model hands out bases of its components ``O((S))`` for finite flag sets
``S`` and acts on them.  Basis keys are self-describing: they mention the
flag labels they live on, so relabeling is just renaming plus a return
to normal form.  Flag labels only need to be hashable and totally ordered.

All four operads here sit in degree 0 with zero differential.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Hashable, Mapping, Sequence

__all__ = [
    "UnsupportedArity",
    "ArityMismatch",
    "NotMultilinear",
    "CyclicOperadModel",
    "Comm",
    "Ass",
    "Lie",
    "T",
    "COMM",
    "ASS",
    "LIE",
    "TASS",
    "get_model",
    "component_basis",
    "lie_normal_form",
    "compose",
    "add_into",
]

ONE = Fraction(1)


class UnsupportedArity(ValueError):
    pass


class ArityMismatch(ValueError):
    pass


class NotMultilinear(ValueError):
    pass


def add_into(acc: dict, vec: Mapping, scale=ONE) -> dict:
    for k, v in vec.items():
        x = acc.get(k, 0) + scale * v
        if x:
            acc[k] = x
        else:
            acc.pop(k, None)
    return acc


class CyclicOperadModel:
    """Interface shared by the operad models.

    ``relabel`` takes a bijection ``mapping`` from the flags of ``key`` to
    new flags and returns a vector (dict key -> Fraction).  ``compose``
    grafts ``k1`` and ``k2`` along the flags ``a0`` of ``k1`` and ``b0``
    of ``k2``.  For non-symmetric models the flags passed to ``basis``
    are in cyclic order and ``relabel`` is only called with maps that
    respect it.
    """

    name = "abstract"
    is_nonsigma = False
    has_differential = False

    def basis(self, flags: Sequence[Hashable]) -> list:
        raise NotImplementedError

    def degree(self, key) -> int:
        return 0

    def relabel(self, key, mapping: Mapping) -> dict:
        raise NotImplementedError

    def dual_relabel(self, key, mapping: Mapping) -> dict:
        """Action on the dual basis: the inverse transpose of ``relabel``."""
        inverse = {b: a for a, b in mapping.items()}
        out = {}
        for k2 in self.basis(tuple(sorted(mapping.values()))):
            c = self.relabel(k2, inverse).get(key)
            if c:
                out[k2] = c
        return out

    def compose(self, k1, k2, a0, b0) -> dict:
        raise NotImplementedError

    def diff(self, key) -> dict:
        return {}

    def check_arity(self, flags):
        if len(flags) < 2:
            raise UnsupportedArity(f"{self.name}: components need at least 2 flags, got {len(flags)}")

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class Comm(CyclicOperadModel):
    name = "comm"

    def basis(self, flags):
        self.check_arity(flags)
        return [()]

    def relabel(self, key, mapping):
        return {(): ONE}

    dual_relabel = relabel

    def compose(self, k1, k2, a0, b0):
        return {(): ONE}


class T(Comm):
    """The associative non-symmetric operad: one basis element per cyclic order."""

    name = "t"
    is_nonsigma = True


def _rotate_min(seq: Sequence) -> tuple:
    i = min(range(len(seq)), key=seq.__getitem__)
    return tuple(seq[i:]) + tuple(seq[:i])


def _rotate_to(seq: Sequence, x) -> tuple:
    i = list(seq).index(x)
    return tuple(seq[i:]) + tuple(seq[:i])


class Ass(CyclicOperadModel):
    """Cyclic associative operad; a basis key is a cyclic order of the flags.

    Keys are stored rotated to start at the smallest flag.  Composing
    ``(a0 p1 .. pk)`` with ``(b0 q1 .. ql)`` gives ``(p1 .. pk q1 .. ql)``,
    which is the splice rule for contracting an edge of a ribbon graph.
    """

    name = "ass"

    def basis(self, flags):
        self.check_arity(flags)
        flags = sorted(flags)
        return [(flags[0],) + rest for rest in itertools.permutations(flags[1:])]

    def relabel(self, key, mapping):
        return {_rotate_min([mapping[x] for x in key]): ONE}

    dual_relabel = relabel

    def compose(self, k1, k2, a0, b0):
        if a0 not in k1 or b0 not in k2:
            raise ArityMismatch(f"cannot compose along {a0}-{b0}")
        p = _rotate_to(k1, a0)[1:]
        q = _rotate_to(k2, b0)[1:]
        if set(p) & set(q):
            raise ArityMismatch("flag sets overlap")
        return {_rotate_min(p + q): ONE}


# Lie ----------------------------------------------------------------------
# A bracket expression is a flag label or a pair (A, B) meaning [A, B].
# Elements of Lie((S)) are written with the smallest flag as the output;
# the basis is the left-normed brackets [x1, s2, ..., sn] with x1 the
# smallest input, whose coordinates are read off the associative expansion
# as the coefficient of the word x1 s2 ... sn.

class _Br(tuple):
    """A bracket ``[A, B]``; kept distinct from tuple-valued flag labels."""


def _as_bracket(expr):
    if isinstance(expr, tuple):
        if len(expr) != 2:
            raise NotMultilinear(f"a bracket has two arguments, got {expr!r}")
        return _Br((_as_bracket(expr[0]), _as_bracket(expr[1])))
    return expr


def _leaves(expr) -> list:
    if isinstance(expr, _Br):
        return _leaves(expr[0]) + _leaves(expr[1])
    return [expr]


def _expand(expr) -> dict:
    if not isinstance(expr, _Br):
        return {(expr,): 1}
    a, b = _expand(expr[0]), _expand(expr[1])
    out: dict = {}
    for u, x in a.items():
        for w, y in b.items():
            out[u + w] = out.get(u + w, 0) + x * y
            out[w + u] = out.get(w + u, 0) - x * y
    return out


def _left_normed(word: Sequence):
    expr = word[0]
    for x in word[1:]:
        expr = _Br((expr, x))
    return expr


def _coords(expr, root) -> dict:
    labels = _leaves(expr)
    first = min(labels)
    out = {}
    for word, c in _expand(expr).items():
        if c and word[0] == first:
            out[(root, word)] = Fraction(c)
    return out


def _unrooted(expr, root):
    """Trivalent tree of a bracket with output ``root``.

    Nodes carry their neighbours in cyclic order; ``[A, B]`` with output
    ``r`` is the node ``(r, A, B)``.  Neighbours are ``('leaf', x)`` or
    ``('node', i)``.
    """
    nodes: list[list] = []

    def build(e, parent):
        if not isinstance(e, _Br):
            return ("leaf", e)
        i = len(nodes)
        nodes.append([parent, None, None])
        nodes[i][1] = build(e[0], ("node", i))
        nodes[i][2] = build(e[1], ("node", i))
        return ("node", i)

    if not isinstance(expr, _Br):
        raise UnsupportedArity("a Lie element needs at least 3 flags")
    build(expr, ("leaf", root))
    return nodes


def _reroot(nodes, new_root):
    for i, nb in enumerate(nodes):
        if ("leaf", new_root) in nb:
            start = i
            break
    else:
        raise KeyError(new_root)

    def expr_from(i, came_from):
        nb = nodes[i]
        k = nb.index(came_from)
        x, y = nb[(k + 1) % 3], nb[(k + 2) % 3]
        return _Br((sub(x, ("node", i)), sub(y, ("node", i))))

    def sub(ref, came_from):
        if ref[0] == "leaf":
            return ref[1]
        return expr_from(ref[1], came_from)

    return expr_from(start, ("leaf", new_root))


def _tree_to_coords(nodes) -> dict:
    labels = [ref[1] for nb in nodes for ref in nb if ref[0] == "leaf"]
    root = min(labels)
    return _coords(_reroot(nodes, root), root)


@lru_cache(maxsize=200_000)
def _lie_relabel(key, mapping_items):
    root, word = key
    mapping = dict(mapping_items)
    if len(word) == 1:
        # Lie((S)) with |S| = 2 is the line spanned by the identity
        return {(min(mapping[root], mapping[word[0]]), (max(mapping[root], mapping[word[0]]),)): ONE}
    nodes = _unrooted(_left_normed(word), root)
    for nb in nodes:
        for j, ref in enumerate(nb):
            if ref[0] == "leaf":
                nb[j] = ("leaf", mapping[ref[1]])
    return _tree_to_coords(nodes)


@lru_cache(maxsize=200_000)
def _lie_compose(k1, k2, a0, b0):
    n1 = _unrooted(_left_normed(k1[1]), k1[0])
    n2 = _unrooted(_left_normed(k2[1]), k2[0])
    off = len(n1)
    n2 = [[("node", r[1] + off) if r[0] == "node" else r for r in nb] for nb in n2]
    nodes = n1 + n2
    ia = next(i for i, nb in enumerate(n1) if ("leaf", a0) in nb)
    ib = next(i + off for i, nb in enumerate(n2) if ("leaf", b0) in nb)
    nodes[ia][nodes[ia].index(("leaf", a0))] = ("node", ib)
    nodes[ib][nodes[ib].index(("leaf", b0))] = ("node", ia)
    return _tree_to_coords(nodes)


class Lie(CyclicOperadModel):
    """Cyclic Lie operad via trivalent trees with cyclic orders at nodes.

    A key is ``(root, word)``: root is the smallest flag and ``word`` the
    remaining flags, read as the left-normed bracket.  Moving the output
    to another flag re-roots the tree; antisymmetry signs come out of the
    cyclic orders and Jacobi is absorbed by the normal form.
    """

    name = "lie"

    def basis(self, flags):
        self.check_arity(flags)
        flags = sorted(flags)
        root, first, rest = flags[0], flags[1], flags[2:]
        return [(root, (first,) + p) for p in itertools.permutations(rest)]

    def relabel(self, key, mapping):
        return dict(_lie_relabel(key, tuple(sorted((x, mapping[x]) for x in (key[0],) + key[1]))))

    def compose(self, k1, k2, a0, b0):
        if len(k1[1]) == 1 or len(k2[1]) == 1:
            raise UnsupportedArity("composition with the unary component is excluded")
        return dict(_lie_compose(k1, k2, a0, b0))


COMM, ASS, LIE, TASS = Comm(), Ass(), Lie(), T()


def lie_normal_form(expr, flags: Sequence) -> dict:
    """Coordinates of a bracket word in the basis of ``Lie((flags))``.

    ``expr`` must use every flag except the smallest, which is the output,
    exactly once.
    """
    flags = sorted(flags)
    expr = _as_bracket(expr)
    inputs = sorted(_leaves(expr))
    if inputs != flags[1:]:
        raise NotMultilinear(f"expression uses {inputs}, expected {flags[1:]}")
    return _coords(expr, flags[0])


def component_basis(model: CyclicOperadModel, flags: Sequence) -> list[tuple]:
    """``(key, degree)`` pairs spanning ``model((flags))``."""
    if len(flags) < 2:
        raise UnsupportedArity(f"{model.name}: arity {len(flags)} unsupported")
    return [(k, model.degree(k)) for k in model.basis(tuple(flags))]


def compose(model: CyclicOperadModel, x: Mapping, y: Mapping, a0, b0) -> dict:
    """Bilinear extension of ``model.compose`` to vectors."""
    out: dict = {}
    for k1, c1 in x.items():
        for k2, c2 in y.items():
            add_into(out, model.compose(k1, k2, a0, b0), c1 * c2)
    return out


def expected_dimension(name: str, arity: int) -> int:
    """dim O((S)) for |S| = arity, i.e. dim O(arity - 1)."""
    m = arity - 1
    return {"comm": 1, "t": 1, "ass": math.factorial(m), "lie": math.factorial(m - 1)}[name]


def get_model(name: str) -> CyclicOperadModel:
    from .dgdual import dual_model  # local import: dgdual builds on this module

    name = name.lower()
    base = {"comm": COMM, "ass": ASS, "lie": LIE, "t": TASS}
    if name in base:
        return base[name]
    if name.startswith("d") and name[1:] in base:
        return dual_model(base[name[1:]])
    raise KeyError(f"unknown operad {name!r}")
