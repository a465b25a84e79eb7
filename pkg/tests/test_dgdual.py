import math
import random

import pytest

from graphhom.dgdual import all_trees, dg_dual_component, dual_model, koszul_sign
from graphhom.graphs import OutOfScope
from graphhom.linalg import homology_dims
from graphhom.operads import ASS, COMM, LIE, TASS, add_into


@pytest.mark.parametrize("n", range(2, 7))
def test_dcomm_is_koszul(n):
    cx, _ = dg_dual_component(COMM, n)
    h = homology_dims(cx)
    assert len(h) == 1
    assert list(h.values()) == [math.factorial(n - 1)]


@pytest.mark.parametrize("n", range(2, 7))
def test_planar_dt_is_koszul(n):
    cx, _ = dg_dual_component(TASS, n)
    assert sum(homology_dims(cx).values()) == 1


@pytest.mark.parametrize("n", [2, 3, 4])
def test_dlie_and_dass(n):
    assert homology_dims(dg_dual_component(LIE, n)[0]) == {0: 1}
    assert homology_dims(dg_dual_component(ASS, n)[0]) == {0: math.factorial(n)}


# 1, 4, 26, 236, 2752 trees on 3..7 leaves; little Schroeder numbers for planar
@pytest.mark.parametrize("leaves,count", [(3, 1), (4, 4), (5, 26), (6, 236), (7, 2752)])
def test_tree_counts(leaves, count):
    assert len(all_trees(tuple(range(leaves)))) == count


@pytest.mark.parametrize("leaves,count", [(3, 1), (4, 3), (5, 11), (6, 45), (7, 197)])
def test_planar_tree_counts(leaves, count):
    assert len(all_trees(tuple(range(leaves)), True)) == count


def test_degrees_run_from_zero_to_corolla():
    cx, _ = dg_dual_component(COMM, 5)
    assert min(cx.dims) == 0 and max(cx.dims) == 3
    assert cx.dims[3] == 1


def _d(model, vec):
    out = {}
    for k, c in vec.items():
        add_into(out, model.diff(k), c)
    return out


def _c(model, x, y, a, b):
    out = {}
    for k1, c1 in x.items():
        for k2, c2 in y.items():
            add_into(out, model.compose(k1, k2, a, b), c1 * c2)
    return out


@pytest.mark.parametrize("base", [COMM, LIE, ASS, TASS], ids=lambda m: m.name)
def test_differential_is_a_derivation_of_grafting(base):
    m = dual_model(base)
    for x in m.basis((0, 1, 2, 10)):
        for y in m.basis((11, 3, 4, 5)):
            lhs = _d(m, m.compose(x, y, 10, 11))
            rhs = _c(m, m.diff(x), {y: 1}, 10, 11)
            add_into(rhs, _c(m, {x: 1}, m.diff(y), 10, 11), (-1) ** m.degree(x))
            assert lhs == rhs


@pytest.mark.parametrize("base", [COMM, LIE, ASS], ids=lambda m: m.name)
def test_differential_is_equivariant(base):
    m = dual_model(base)
    rng = random.Random(2)
    flags = (0, 1, 2, 3, 4)
    for key in m.basis(flags):
        g = dict(zip(flags, rng.sample(flags, 5)))
        lhs = _d(m, m.relabel(key, g))
        rhs = {}
        for k, c in m.diff(key).items():
            add_into(rhs, m.relabel(k, g), c)
        assert lhs == rhs


def test_koszul_sign():
    assert koszul_sign([2, 1], [1, 1]) == (-1, [1, 0])
    assert koszul_sign([2, 1], [1, 0]) == (1, [1, 0])


def test_arity_cap():
    with pytest.raises(OutOfScope):
        dual_model(COMM).basis(tuple(range(9)))
