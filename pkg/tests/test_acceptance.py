"""Acceptance criteria, one marked group per criterion.

Fixed reference values come from the worked examples shipped in
``instances/``; everything else is checked against the independent
computations in ``oracles``.
"""
from __future__ import annotations

import time

import numpy as np
import pytest

from oracles import (brute_force_vertices, match_rows, minimal_extreme_points_2d, coordinate_subspace_vertex,
                     simplex_weights)
from setavar.core import AlphaVector, EligibleSpace, GeneratedCone, Payoff, ScenarioModel
from setavar.market import outperformance_payoff, solvency_cone_cash_numeraire, tree_market
from setavar.riskbuild import (MarketInstance, avar_market, avar_regulator, build_market_vlp,
                               build_regulator_vlp)
from setavar.scalar_risk import BidAskQuote, avar_scalar, liquidate
from setavar.vlp import VectorLp, solve_vlp, upper_image_supports

VTOL = 1e-6

# two assets, two scenarios
P2 = ScenarioModel([0.4, 0.6])
X2 = Payoff([[12, 4], [-20, -6]])
A2 = AlphaVector([0.01, 0.02])

# three assets, three scenarios
P3 = ScenarioModel.uniform(3)
X3 = Payoff(np.array([[4, 3, 1], [6, -5, -3], [-2, 3, -4]], dtype=float).T)
A3 = AlphaVector([0.05, 0.05, 0.05])
M_SPAN = EligibleSpace(np.array([[5, 0, 1], [0, 10, 1]], dtype=float).T)

# five-asset outperformance data
S0 = np.array([1.3, 50, 6, 25])
LAM = np.array([0.07, 0.05, 0.01, 0.01])
COV = np.array([[0.010, 0.004, 0.002, 0.018],
                [0.004, 0.040, 0.012, 0.006],
                [0.002, 0.012, 0.0225, 0.012],
                [0.018, 0.006, 0.012, 0.040]])
MU = np.array([0.03, 0.1, 0.06, 0.12])
A5 = AlphaVector([0.1, 0.08, 0.09, 0.1, 0.05])


def market_d2() -> MarketInstance:
    k0 = solvency_cone_cash_numeraire(BidAskQuote([0.72], [1.0]))
    kT = [solvency_cone_cash_numeraire(BidAskQuote([0.75], [1.11])),
          solvency_cone_cash_numeraire(BidAskQuote([0.7], [0.9]))]
    return MarketInstance(k0, kT)


def d5(numeraire0=1.0, numeraire_spread=0.0):
    model, prices, k0, kT = tree_market(S0, MU, COV, LAM, 1.0, numeraire0, 1.0, numeraire_spread)
    X = outperformance_payoff(S0 * (1 + LAM), prices * (1 + LAM), 1.378)
    return model, X, MarketInstance(k0, kT)


def timed(fn, *args, **kw):
    t = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t


# 1 -------------------------------------------------------------------------
@pytest.mark.acceptance("AC1", "regulator d=2: vertex (-4, 20), recession R^2_+")
def test_ac1_regulator_two_assets():
    rs, secs = timed(avar_regulator, X2, P2, A2, EligibleSpace.full(2))
    assert secs < 5
    assert rs.status == "bounded"
    assert match_rows(rs.vertices, [[-4, 20]], VTOL)
    assert rs.recession_generators == GeneratedCone(np.eye(2))


# 2 -------------------------------------------------------------------------
@pytest.mark.acceptance("AC2", "regulator d=3: (2,5,4) for M=R^3; (17.5,5,4), (2,36,4) for spanned M")
def test_ac2_regulator_three_assets_full_space():
    rs, secs = timed(avar_regulator, X3, P3, A3, EligibleSpace.full(3))
    assert secs < 5
    assert match_rows(rs.vertices, [[2, 5, 4]], VTOL)
    assert rs.recession_generators == GeneratedCone(np.eye(3))


@pytest.mark.acceptance("AC2", "regulator d=3: (2,5,4) for M=R^3; (17.5,5,4), (2,36,4) for spanned M")
def test_ac2_regulator_three_assets_spanned_space():
    rs, secs = timed(avar_regulator, X3, P3, A3, M_SPAN)
    assert secs < 5
    assert match_rows(rs.vertices, [[17.5, 5, 4], [2, 36, 4]], VTOL)
    assert rs.recession_generators == GeneratedCone(np.array([[5, 0, 1], [0, 10, 1]], dtype=float).T)


# 3 -------------------------------------------------------------------------
@pytest.mark.acceptance("AC3", "regulator d=2, N=5: vertex (84.0, 38.4)")
def test_ac3_regulator_five_scenarios():
    X = Payoff(np.array([[6, 3], [-8, -6], [-4, 2], [-90, -6], [-80, -60]], dtype=float).T)
    model = ScenarioModel([0.25, 0.4, 0.3, 0.02, 0.03])
    rs, secs = timed(avar_regulator, X, model, AlphaVector([0.05, 0.05]), EligibleSpace.full(2))
    assert secs < 5
    assert match_rows(rs.vertices, [[84.0, 38.4]], VTOL)


# 4 -------------------------------------------------------------------------
@pytest.fixture(scope="module")
def market_result():
    (rs, report), secs = timed(avar_market, X2, P2, A2, EligibleSpace.full(2), market_d2())
    return rs, report, secs


@pytest.mark.acceptance("AC4", "market d=2: vertices (-12,20), (-39,56), recession K_0, reference strategies")
def test_ac4_market_vertices_and_recession(market_result):
    rs, _, secs = market_result
    assert secs < 5
    assert rs.status == "bounded"
    assert match_rows(rs.vertices, [[-12, 20], [-39, 56]], VTOL)
    assert rs.recession_generators == solvency_cone_cash_numeraire(BidAskQuote([0.72], [1.0]))


@pytest.mark.acceptance("AC4", "market d=2: vertices (-12,20), (-39,56), recession K_0, reference strategies")
def test_ac4_market_strategies(market_result):
    rs, report, _ = market_result
    by_vertex = {tuple(np.round(s.vertex, 6)): s for s in report}
    first = by_vertex[(-12.0, 20.0)]
    np.testing.assert_allclose(first.k0, [0, 0], atol=1e-4)
    np.testing.assert_allclose(first.kT[:, 0], [0, 0], atol=1e-4)
    np.testing.assert_allclose(first.kT[:, 1], [-8, 11.4286], atol=1e-4)
    second = by_vertex[(-39.0, 56.0)]
    np.testing.assert_allclose(second.k0, [0, 0], atol=1e-4)
    np.testing.assert_allclose(second.kT[:, 0], [-27, 36], atol=1e-4)
    np.testing.assert_allclose(second.kT[:, 1], [-35, 50], atol=1e-4)
    # the regulator set of X + Y is the vertex plus R^2_+
    for s in report:
        assert match_rows(s.regulator.vertices, [s.vertex], VTOL)


# 5 -------------------------------------------------------------------------
@pytest.mark.acceptance("AC5", "liquidation: 10.2 and 9.19; both points interior, axes met near 8")
def test_ac5_liquidation_values():
    quotes = BidAskQuote([0.75, 0.7], [1.11, 0.9])
    l1 = liquidate(X2, quotes, 1)
    l2 = liquidate(X2, quotes, 2)
    np.testing.assert_allclose(l1, [-10.2, -1.4], atol=0.01)
    np.testing.assert_allclose(l2, [-9.19, -1.56], atol=0.01)
    assert abs(avar_scalar(l1, P2, 0.01) - 10.2) <= 0.01
    assert abs(avar_scalar(l2, P2, 0.02) - 9.19) <= 0.01


@pytest.mark.acceptance("AC5", "liquidation: 10.2 and 9.19; both points interior, axes met near 8")
def test_ac5_scalar_points_inside_market_set(market_result):
    rs = market_result[0]
    assert rs.margin([10.2, 0]) > 1e-3
    assert rs.margin([0, 9.19]) > 1e-3
    for axis in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
        assert rs.contains(8.001 * axis, tol=0)
        assert not rs.contains(7.999 * axis, tol=0)


# 6 -------------------------------------------------------------------------
@pytest.mark.acceptance("AC6", "problem sizes: 85 / 221 / 425 variables, 2 objectives")
def test_ac6_problem_sizes():
    M = EligibleSpace.coordinate(5, 2)
    model, X, mk = d5()
    reg = build_regulator_vlp(X, model, A5, M).size
    assert (reg.variables, reg.objectives) == (85, 2)
    mar = build_market_vlp(X, model, A5, M, mk).size
    assert (mar.variables, mar.objectives) == (221, 2)
    model, X, mk = d5(1 / 1.05, 0.03)
    assert mk.k0.n_generators == 20
    bond = build_market_vlp(X, model, A5, M, mk).size
    assert (bond.variables, bond.objectives) == (425, 2)
    # aggregate counts under the documented convention
    assert (reg.constraints, mar.constraints, bond.constraints) == (166, 302, 506)


# 7 -------------------------------------------------------------------------
@pytest.mark.acceptance("AC7", "d=5 regulator vertex: (1.391, 0) or the oracle value on our tree")
def test_ac7_regulator_vertex_on_generated_tree():
    model, X, _ = d5()
    rs = avar_regulator(X, model, A5, EligibleSpace.coordinate(5, 2))
    oracle = coordinate_subspace_vertex(X.values, model.probabilities, A5.alpha, 2)
    assert oracle is not None and rs.status == "bounded"
    expected = np.concatenate([oracle, np.zeros(3)])
    if np.max(np.abs(oracle - [1.391, 0.0])) <= 1e-3:
        assert match_rows(rs.vertices, [[1.391, 0, 0, 0, 0]], 1e-3)
    else:
        assert match_rows(rs.vertices, [expected], 1e-6)
    assert rs.recession_generators == GeneratedCone(np.eye(5)[:, :2])


# 8 -------------------------------------------------------------------------
def _random_instance(rng):
    d = int(rng.integers(1, 4))
    N = int(rng.integers(1, 6))
    p = rng.dirichlet(np.ones(N))
    p[-1] = 1.0 - p[:-1].sum()
    X = Payoff(rng.integers(-20, 21, (d, N)) / 2.0)
    alpha = AlphaVector(np.round(rng.uniform(0.05, 1.0, d), 3))
    return ScenarioModel(p), X, alpha


def _random_market(rng, d, N):
    """Terminal mids straddle the initial mid asset by asset, so most draws
    are free of one-period arbitrage (and the market set is bounded)."""
    def cone(mid):
        return solvency_cone_cash_numeraire(BidAskQuote.proportional(mid, rng.uniform(0.01, 0.2, d - 1)))
    mid0 = rng.uniform(0.5, 2.0, d - 1)
    moves = rng.normal(0.0, 0.2, (N, d - 1))
    if N == 1:
        moves[:] = 0.0
    else:
        moves[0] = np.abs(moves[0])
        moves[1] = -np.abs(moves[1])
    return MarketInstance(cone(mid0), [cone(mid0 * np.exp(z)) for z in moves])


def _close(a, b, tol=1e-6):
    if np.isinf(a) or np.isinf(b):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _le(a, b, tol=1e-6):
    if a == -np.inf or b == np.inf:
        return True
    return a <= b + tol * max(1.0, abs(a), abs(b))


def _check_instance(rng, model, X, alpha, W):
    """Returns a list of property violations for one random instance."""
    bad = []
    d, N = X.d, X.n_scenarios
    full = EligibleSpace.full(d)
    sup = lambda rs, w: rs.support(w)
    rs = avar_regulator(X, model, alpha, full)
    base = [sup(rs, w) for w in W]

    # scalarization identity
    from setavar.scalar_risk import phi_w
    for w, s in zip(W, base):
        if not _close(s, phi_w(X, model, alpha, w)):
            bad.append(f"scalarization w={w}")

    # translativity along a deterministic eligible portfolio
    u = rng.integers(-5, 6, d).astype(float)
    shifted = avar_regulator(X.shifted(u), model, alpha, full)
    for w, s in zip(W, base):
        if not _close(sup(shifted, w), s - w @ u):
            bad.append("translativity")
            break

    # positive homogeneity
    s_fac = float(rng.uniform(0.25, 4.0))
    scaled = avar_regulator(X.scaled(s_fac), model, alpha, full)
    if not all(_close(sup(scaled, w), s_fac * s) for w, s in zip(W, base)):
        bad.append("homogeneity")

    # subadditivity as superadditivity of supports
    Y = Payoff(rng.integers(-20, 21, (d, N)) / 2.0)
    rs_y = avar_regulator(Y, model, alpha, full)
    rs_xy = avar_regulator(X + Y, model, alpha, full)
    if not all(_le(sup(rs_xy, w), s + sup(rs_y, w)) for w, s in zip(W, base)):
        bad.append("subadditivity")

    # monotonicity
    bigger = Payoff(X.values + rng.uniform(0, 3, (d, N)))
    rs_big = avar_regulator(bigger, model, alpha, full)
    if not all(_le(sup(rs_big, w), s) for w, s in zip(W, base)):
        bad.append("monotonicity")

    # componentwise structure and cone conditions at zero for M = R^m x {0}
    m = int(rng.integers(1, d + 1))
    Mc = EligibleSpace.coordinate(d, m)
    rs_m = avar_regulator(X, model, alpha, Mc)
    oracle = coordinate_subspace_vertex(X.values, model.probabilities, alpha.alpha, m)
    if oracle is None:
        if rs_m.status != "empty":
            bad.append("coordinate-subspace emptiness")
    else:
        expect = np.concatenate([oracle, np.zeros(d - m)])
        if rs_m.status != "bounded" or not match_rows(rs_m.vertices, [expect], 1e-6):
            bad.append("coordinate-subspace vertex")
    zero = avar_regulator(Payoff(np.zeros((d, N))), model, alpha, Mc)
    for g in np.eye(d)[:m]:
        if not zero.contains(g) or zero.contains(-g):
            bad.append("cone conditions at zero")
            break

    # market extension contains the regulator set; monotone along -C_T
    if d >= 2:
        mk = _random_market(rng, d, N)
        mar, _ = avar_market(X, model, alpha, full, mk, strategies=False)
        if not all(_le(mar.support(w), s) for w, s in zip(W, base)):
            bad.append("market contains regulator")
        k0 = mk.k0.generators @ rng.uniform(0, 1, mk.k0.n_generators)
        kT = np.column_stack([c.generators @ rng.uniform(0, 1, c.n_generators) for c in mk.kT])
        better = Payoff(X.values + k0[:, None] + kT)
        mar2, _ = avar_market(better, model, alpha, full, mk, strategies=False)
        if not all(_le(mar2.support(w), mar.support(w)) for w in W):
            bad.append("market monotonicity")
    return bad


@pytest.mark.acceptance("AC8", "property suite on 200 random instances (d<=3, N<=5) in < 60 s")
def test_ac8_property_suite():
    rng = np.random.default_rng(2024)
    grids = {d: simplex_weights(d, 50) for d in (1, 2, 3)}
    start = time.perf_counter()
    failures = []
    for k in range(200):
        model, X, alpha = _random_instance(rng)
        for f in _check_instance(rng, model, X, alpha, grids[X.d]):
            failures.append((k, f))
    elapsed = time.perf_counter() - start
    assert not failures, failures[:10]
    assert elapsed < 60, f"suite took {elapsed:.1f} s"


# 9 -------------------------------------------------------------------------
def _random_bounded_vlp(rng):
    n = int(rng.integers(2, 9))
    m = int(rng.integers(1, 4))
    A = rng.integers(-4, 5, (m, n)).astype(float)
    x0 = rng.uniform(0, 1, n)
    b = A @ x0 - rng.uniform(0, 1, m)
    U = float(x0.sum() + rng.uniform(0.5, 2))
    # x >= 0, A x >= b, sum x <= U
    A_ge = np.vstack([A, -np.ones((1, n))])
    b_ge = np.concatenate([b, [-U]])
    P = rng.integers(-5, 6, (2, n)).astype(float)
    return P, A_ge, b_ge


@pytest.mark.acceptance("AC9", "Benson vertices equal brute-force Pareto extreme points (50 instances, q=2)")
def test_ac9_benson_against_brute_force():
    rng = np.random.default_rng(77)
    mismatches = []
    for k in range(50):
        P, A_ge, b_ge = _random_bounded_vlp(rng)
        n = P.shape[1]
        sol = solve_vlp(VectorLp(P, GeneratedCone(np.eye(2)), A_ge=A_ge, b_ge=b_ge))
        V = brute_force_vertices(np.vstack([A_ge, np.eye(n)]), np.concatenate([b_ge, np.zeros(n)]))
        expected = minimal_extreme_points_2d(V @ P.T)
        if sol.status != "bounded" or not match_rows(sol.vertices, expected, 1e-6):
            mismatches.append((k, sol.vertices.tolist(), expected.tolist()))
    assert not mismatches, mismatches[:3]
