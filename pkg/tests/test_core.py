from __future__ import annotations

import numpy as np
import pytest

from setavar.core import (
    AlphaVector,
    EligibleSpace,
    GeneratedCone,
    Payoff,
    RiskSet,
    ScenarioModel,
    ValidationError,
    m_plus_nontrivial,
    validate_instance,
)


def _invariant(fn, *args):
    with pytest.raises(ValidationError) as err:
        fn(*args)
    return err.value.invariant


def test_probabilities_must_form_a_distribution():
    assert _invariant(ScenarioModel, [0.3, 0.6]) == "probabilities not a distribution"
    assert _invariant(ScenarioModel, [1.2, -0.2]) == "probabilities not a distribution"
    assert _invariant(ScenarioModel, []) == "probabilities not a distribution"
    assert ScenarioModel.uniform(4).probabilities.sum() == pytest.approx(1.0)


def test_payoff_shapes_and_helpers():
    X = Payoff([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    assert (X.d, X.n_scenarios) == (3, 2)
    np.testing.assert_array_equal(X.stacked(), [1, 3, 5, 2, 4, 6])
    np.testing.assert_array_equal(X.shifted([1, 0, -1]).values, [[2, 3], [3, 4], [4, 5]])
    np.testing.assert_array_equal((X + X.scaled(-1.0)).values, np.zeros((3, 2)))
    assert _invariant(Payoff, [[np.inf]]) == "finite entries"


def test_alpha_levels():
    assert AlphaVector([0.05, 1.0]).d == 2
    assert _invariant(AlphaVector, [0.0]) == "alpha out of range"
    assert _invariant(AlphaVector, [1.01]) == "alpha out of range"


def test_cone_generators_are_normalized_and_merged():
    C = GeneratedCone(np.array([[2.0, 1.0, 0.0], [0.0, 0.0, 3.0]]))
    assert C.n_generators == 2
    np.testing.assert_allclose(np.linalg.norm(C.generators, axis=0), 1.0)
    assert _invariant(GeneratedCone, np.zeros((2, 1))) == "nonzero generators"


def test_cone_membership_pointedness_and_duality():
    C = GeneratedCone.from_rows([[1.11, -1.0], [-0.75, 1.0]])
    assert C.contains([1.0, 0.0]) and C.contains([0.0, 1.0])
    assert not C.contains([-1.0, 0.0])
    assert C.is_pointed() and C.is_solid()
    D = C.dual()
    for w in D.generators.T:
        assert np.all(C.generators.T @ w >= -1e-12)
    # the dual of the dual is the original cone
    assert D.dual() == C
    assert not GeneratedCone.from_rows([[1, 0], [-1, 0], [0, 1]]).is_pointed()
    assert not GeneratedCone.from_rows([[1, 0]]).is_solid()


def test_cone_inclusion_and_extreme_generators():
    orthant = GeneratedCone(np.eye(2))
    wide = GeneratedCone.from_rows([[1, -1], [-1, 2], [1, 1]])
    assert wide.includes(orthant) and not orthant.includes(wide)
    assert wide.extreme().n_generators == 2


def test_eligible_space_coordinates_and_complement():
    M = EligibleSpace(np.array([[5, 0, 1], [0, 10, 1]], dtype=float).T)
    assert (M.d, M.m) == (3, 2)
    np.testing.assert_allclose(M.basis_M.T @ M.basis_Mperp, 0, atol=1e-12)
    u = M.from_coords([0.5, -1.0])
    np.testing.assert_allclose(M.to_coords(u), [0.5, -1.0])
    assert M.distance(u) < 1e-12
    assert M.distance([0, 0, 1]) > 0.1
    Mplus = M.positive_part()
    assert Mplus.n_generators == 2


def test_eligible_space_invariants():
    assert _invariant(EligibleSpace, np.eye(3)[:, :2], np.array([[1.0], [1.0], [1.0]])) == "orthogonality"
    assert _invariant(EligibleSpace, np.eye(2), np.ones((2, 1))) == "dimension mismatch"
    assert _invariant(EligibleSpace, np.array([[1.0, 2.0], [1.0, 2.0]])) == "basis rank"


def test_trivial_positive_part_is_rejected():
    M = EligibleSpace(np.array([[1.0], [-1.0]]))
    assert not m_plus_nontrivial(M)
    assert M.positive_part() is None
    model = ScenarioModel.uniform(2)
    X = Payoff(np.ones((2, 2)))
    assert _invariant(validate_instance, model, X, AlphaVector([0.5, 0.5]), M) == "M_+ trivial"


def test_instance_dimension_checks():
    model = ScenarioModel.uniform(2)
    X = Payoff(np.ones((2, 2)))
    full = EligibleSpace.full(2)
    assert _invariant(validate_instance, ScenarioModel.uniform(3), X, AlphaVector([0.5, 0.5]), full) \
        == "dimension mismatch"
    assert _invariant(validate_instance, model, X, AlphaVector([0.5]), full) == "dimension mismatch"
    assert _invariant(validate_instance, model, X, AlphaVector([0.5, 0.5]), EligibleSpace.full(3)) \
        == "dimension mismatch"
    assert validate_instance(model, X, AlphaVector([0.5, 0.5]), full).payoff is X


def test_risk_set_geometry_without_a_solver():
    M = EligibleSpace.full(2)
    S = RiskSet(M, np.array([[0.0, 2.0], [1.0, 0.0]]), np.eye(2), GeneratedCone(np.eye(2)))
    assert S.support([1.0, 1.0]) == pytest.approx(1.0)
    assert S.support([1.0, -1.0]) == -np.inf
    assert S.contains([1.0, 1.0]) and S.contains([0.5, 1.0])
    assert not S.contains([0.4, 0.4])
    assert S.margin([3.0, 3.0]) > 0
    N, b = S.facets()
    assert N.shape[0] == 3
    empty = RiskSet(M, np.zeros((0, 2)), np.zeros((0, 2)), GeneratedCone(np.eye(2)), status="empty")
    assert empty.empty_flag and empty.support([1, 1]) == np.inf and not empty.contains([0, 0])
