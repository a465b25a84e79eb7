import json

import pytest
from hypothesis import given, settings, strategies as st

from oracles import simplicial_betti
from graphhom.linalg import GradedComplex, SparseMatrix
from graphhom.sheaves import (
    CoefficientSystem,
    FaceNotFound,
    NonFunctorialSystem,
    SimplicialComplex,
    constant_system,
    example_system,
    face_key,
    hypercohomology,
    parse_face,
    random_complex,
    random_system,
    stalk_table,
    star_compact_cohomology,
    verdier_dual,
)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_constant_system_gives_simplicial_cohomology(seed):
    X = random_complex(seed)
    assert hypercohomology(X, constant_system(X)) == simplicial_betti(X)


@pytest.mark.parametrize("name,table", [
    ("point", {0: 1}), ("interval", {0: 1}), ("circle", {0: 1, 1: 1}), ("disk", {0: 1}),
])
def test_examples(name, table):
    X, F = example_system(name)
    assert hypercohomology(X, F) == table


def test_degree_shift():
    X, _ = example_system("circle")
    assert hypercohomology(X, constant_system(X, degree=2)) == {2: 1, 3: 1}


def test_star_compact_on_interval():
    X, F = example_system("interval")
    # an end point of a closed interval has no compactly supported cohomology nearby
    assert star_compact_cohomology(X, (0,), F) == {}
    assert star_compact_cohomology(X, (0, 1), F) == {1: 1}


def test_star_compact_on_circle():
    X, F = example_system("circle")
    for f in X.faces:
        assert star_compact_cohomology(X, f, F) == {1: 1}


@pytest.mark.parametrize("seed", range(25))
def test_verdier_duality_on_random_systems(seed):
    X = random_complex(seed)
    F = random_system(X, seed)
    D = verdier_dual(X, F)
    hF = hypercohomology(X, F)
    assert hypercohomology(X, D) == {-k: v for k, v in hF.items()}
    for f in X.faces:
        assert stalk_table(D, f) == {-k: v for k, v in star_compact_cohomology(X, f, F).items()}
    assert hypercohomology(X, verdier_dual(X, D)) == hF


def test_random_systems_are_functorial_and_reproducible():
    X = random_complex(4)
    a = random_system(X, 4)
    b = random_system(X, 4)
    a.validate()
    assert a.to_json() == b.to_json()


def test_json_round_trip():
    X = random_complex(9)
    F = random_system(X, 9)
    data = json.loads(json.dumps(F.to_json()))
    G = CoefficientSystem.from_json(data)
    assert G.to_json() == F.to_json()
    assert hypercohomology(X, G) == hypercohomology(X, F)
    assert SimplicialComplex.from_json(X.to_json()).faces == X.faces


def test_face_keys():
    assert parse_face(face_key((0, 2, 5))) == (0, 2, 5)


def test_missing_face():
    X, F = example_system("interval")
    with pytest.raises(FaceNotFound):
        star_compact_cohomology(X, (0, 2), F)


def test_non_commuting_square_is_rejected():
    X = SimplicialComplex([(0, 1, 2)])
    F = constant_system(X)
    gens = dict(F.gens)
    gens[((0,), (0, 1))] = {0: SparseMatrix.from_dense([[2]])}
    with pytest.raises(NonFunctorialSystem):
        CoefficientSystem(X, F.stalks, gens)


def test_map_must_commute_with_differential():
    X = SimplicialComplex([(0, 1)])
    stalk = GradedComplex.cochain({0: 1, 1: 1}, {0: SparseMatrix.identity(1)})
    flat = GradedComplex.cochain({0: 1, 1: 1})
    with pytest.raises(NonFunctorialSystem):
        CoefficientSystem(X, {(0,): stalk, (1,): flat, (0, 1): flat},
                          {((0,), (0, 1)): {0: SparseMatrix.zero(1, 1), 1: SparseMatrix.identity(1)}})


def test_bad_inclusion():
    X = SimplicialComplex([(0, 1, 2)])
    with pytest.raises(NonFunctorialSystem):
        CoefficientSystem(X, {}, {((0,), (0, 1, 2)): {}})
