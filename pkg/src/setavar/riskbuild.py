"""Assembly of the regulator and market-extension risk programs.

Variables are stacked scenario-major.  For a d-asset payoff on N scenarios:

* ``zhat`` (dN, >= 0): the pay-in ``Z``,
* ``shat`` (sum of generator counts of the terminal cones, >= 0): terminal
  exchanges, one block per scenario,
* ``that`` (generator count of the initial cone, >= 0): initial exchanges,
* ``z`` (d, free): the deterministic withdrawal.

The image of a feasible point is ``diag(alpha)^-1 E[Z] - z``; the rows
``B_perp^T (image) = 0`` keep it inside M and the objective returns
coordinates with respect to ``basis_M``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import (DEFAULT_TOL, AlphaVector, EligibleSpace, GeneratedCone, Payoff, RiskSet,
                   ScenarioModel, Tolerances, ValidationError, validate_instance)
from .lp import LinearProgram, solve_lp
from .polyhedra import cone_rays
from .vlp import VectorLp, VlpError, VlpSolution, solve_vlp

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MarketInstance:
    """Solvency cones at time 0 and in each terminal scenario.

    ``k0_in_M`` optionally supplies ambient generators of ``K_0 cap M``; when
    omitted it is computed by vertex enumeration.
    """

    k0: GeneratedCone
    kT: tuple
    k0_in_M: GeneratedCone | None = None

    def __post_init__(self):
        object.__setattr__(self, "kT", tuple(self.kT))
        d = self.k0.dim
        for name, cone in [("K_0", self.k0)] + [(f"K_T[{n}]", c) for n, c in enumerate(self.kT)]:
            if cone.dim != d:
                raise ValidationError("dimension mismatch", f"{name} lives in R^{cone.dim}, expected R^{d}")
            check_solvency_cone(cone, name)
        if self.k0_in_M is not None and self.k0_in_M.dim != d:
            raise ValidationError("dimension mismatch", "K_0 cap M generators have the wrong dimension")

    @property
    def d(self) -> int:
        return self.k0.dim


def check_solvency_cone(cone: GeneratedCone, name: str = "cone") -> None:
    """A solvency cone must contain the positive orthant and differ from R^d."""
    eye = np.eye(cone.dim)
    if not all(cone.contains(e) for e in eye):
        raise ValidationError("solvency cone", f"{name} does not contain the positive orthant")
    if all(cone.contains(-e) for e in eye):
        raise ValidationError("solvency cone", f"{name} is the whole space")


@dataclass(frozen=True)
class ProblemSize:
    variables: int
    objectives: int
    inequality_rows: int
    equality_rows: int
    nonnegativity_bounds: int

    @property
    def constraints(self) -> int:
        """Inequality rows plus both halves of each equality plus sign bounds."""
        return self.inequality_rows + 2 * self.equality_rows + self.nonnegativity_bounds

    def as_dict(self) -> dict:
        return {
            "variables": self.variables,
            "objectives": self.objectives,
            "inequality_rows": self.inequality_rows,
            "equality_rows": self.equality_rows,
            "nonnegativity_bounds": self.nonnegativity_bounds,
            "constraints": self.constraints,
        }


@dataclass(frozen=True, eq=False)
class RiskProgram:
    """A risk-measure VLP together with its variable layout."""

    vlp: VectorLp
    size: ProblemSize
    image: np.ndarray          # ambient image map, d x n
    eligible: EligibleSpace
    blocks: dict = field(default_factory=dict)
    d: int = 0
    n_scenarios: int = 0

    def split(self, x) -> dict:
        """Named blocks of a variable vector; stacked blocks come back as d x N matrices."""
        x = np.asarray(x, dtype=float)
        out = {}
        for name, sl in self.blocks.items():
            part = x[sl]
            if name == "zhat":
                part = part.reshape(self.n_scenarios, self.d).T
            out[name] = part
        return out


def _stack_payoff(payoff: Payoff) -> np.ndarray:
    return payoff.stacked()


def _image_map(model: ScenarioModel, alpha: AlphaVector, d: int, extra: int) -> np.ndarray:
    """``[diag(alpha)^-1 Phat, 0 (extra), -I_d]``."""
    N = model.n_scenarios
    Phat = np.kron(model.probabilities[None, :], np.eye(d))
    return np.hstack([Phat / alpha.alpha[:, None], np.zeros((d, extra)), -np.eye(d)])


def _assemble(payoff: Payoff, model: ScenarioModel, alpha: AlphaVector, eligible: EligibleSpace,
              ordering: GeneratedCone, market: MarketInstance | None) -> RiskProgram:
    d, N = payoff.d, payoff.n_scenarios
    dN = d * N
    if market is None:
        trade_T, trade_0 = np.zeros((dN, 0)), np.zeros((dN, 0))
    else:
        if len(market.kT) != N:
            raise ValidationError("dimension mismatch",
                                  f"{len(market.kT)} terminal cones for {N} scenarios")
        blocks = [c.generators for c in market.kT]
        trade_T = np.zeros((dN, sum(b.shape[1] for b in blocks)))
        col = 0
        for n, b in enumerate(blocks):
            trade_T[n * d:(n + 1) * d, col:col + b.shape[1]] = b
            col += b.shape[1]
        trade_0 = np.tile(market.k0.generators, (N, 1))
    J, I = trade_T.shape[1], trade_0.shape[1]
    n_vars = dN + J + I + d
    Ihat = np.tile(np.eye(d), (N, 1))
    # zhat + x - Ihat z - Ahat shat - Ihat H that >= 0
    A_ge = np.hstack([np.eye(dN), -trade_T, -trade_0, -Ihat])
    b_ge = -_stack_payoff(payoff)
    G = _image_map(model, alpha, d, J + I)
    A_eq = eligible.basis_Mperp.T @ G
    P = eligible.to_coords(G)
    free = np.zeros(n_vars, dtype=bool)
    free[-d:] = True
    vlp = VectorLp(P, ordering, A_eq, np.zeros(A_eq.shape[0]), A_ge, b_ge, free)
    size = ProblemSize(n_vars, eligible.m, dN, A_eq.shape[0], dN + J + I)
    layout = {
        "zhat": slice(0, dN),
        "shat": slice(dN, dN + J),
        "that": slice(dN + J, dN + J + I),
        "z": slice(dN + J + I, n_vars),
    }
    if market is None:
        del layout["shat"], layout["that"]
    return RiskProgram(vlp, size, G, eligible, layout, d, N)


def build_regulator_vlp(payoff: Payoff, model: ScenarioModel, alpha: AlphaVector,
                        eligible: EligibleSpace, tol: Tolerances = DEFAULT_TOL) -> RiskProgram:
    validate_instance(model, payoff, alpha, eligible, tol)
    ordering = eligible.positive_part()
    return _assemble(payoff, model, alpha, eligible, ordering, None)


def k0_in_eligible(market: MarketInstance, eligible: EligibleSpace) -> GeneratedCone:
    """``K_0 cap M`` in basis_M coordinates."""
    if market.k0_in_M is not None:
        coords = eligible.to_coords(market.k0_in_M.generators)
        if any(eligible.distance(g) > DEFAULT_TOL.in_subspace for g in market.k0_in_M.generators.T):
            raise ValidationError("in subspace", "supplied K_0 cap M generators do not lie in M")
        return GeneratedCone(coords)
    F, L = market.k0.halfspaces()
    B = eligible.basis_M
    rows = [F @ B]
    if L.size:
        rows += [L @ B, -(L @ B)]
    rays, lines = cone_rays(np.vstack(rows))
    cols = list(rays) + list(lines) + [-l for l in lines]
    if not cols:
        raise ValidationError("M_+ trivial", "K_0 cap M = {0}")
    return GeneratedCone(np.column_stack(cols))


def build_market_vlp(payoff: Payoff, model: ScenarioModel, alpha: AlphaVector,
                     eligible: EligibleSpace, market: MarketInstance,
                     tol: Tolerances = DEFAULT_TOL) -> RiskProgram:
    validate_instance(model, payoff, alpha, eligible, tol)
    if market.d != payoff.d:
        raise ValidationError("dimension mismatch", f"market has d={market.d}, payoff has d={payoff.d}")
    return _assemble(payoff, model, alpha, eligible, k0_in_eligible(market, eligible), market)


def _to_risk_set(prog: RiskProgram, sol: VlpSolution) -> RiskSet:
    B = prog.eligible.basis_M
    as_rows = lambda M: (np.asarray(M).reshape(-1, prog.eligible.m) @ B.T)
    return RiskSet(
        eligible=prog.eligible,
        vertices=as_rows(sol.vertices),
        recession=as_rows(sol.recession),
        ordering=prog.vlp.ordering,
        status=sol.status,
        preimages=tuple(prog.split(x) for x in sol.preimages),
        lineality=as_rows(sol.lineality),
        size=prog.size.as_dict(),
        solution=sol,
    )


def avar_regulator(payoff: Payoff, model: ScenarioModel, alpha: AlphaVector, eligible: EligibleSpace,
                   tol: Tolerances = DEFAULT_TOL) -> RiskSet:
    """Set-valued AV@R without trading: all eligible deposits that make the
    position acceptable.  Vertices and recession rays are ambient vectors."""
    prog = build_regulator_vlp(payoff, model, alpha, eligible, tol)
    sol = solve_vlp(prog.vlp, tol)
    logger.info("regulator set: %s, %d vertices, %d LPs", sol.status, len(sol.vertices), sol.lp_calls)
    return _to_risk_set(prog, sol)


@dataclass(frozen=True, eq=False)
class VertexStrategy:
    """Trades behind one vertex of the market-extension set."""

    vertex: np.ndarray
    k0: np.ndarray           # initial exchange, an element of K_0
    kT: np.ndarray           # d x N terminal exchanges, column n in K_T(omega_n)
    hedge: Payoff            # Y = -k0 - kT, the attainable terminal payoff
    regulator: RiskSet       # regulator set of X + Y


@dataclass(frozen=True, eq=False)
class StrategyReport:
    strategies: tuple

    def __len__(self) -> int:
        return len(self.strategies)

    def __iter__(self):
        return iter(self.strategies)


def _strategy(prog: RiskProgram, market: MarketInstance, payoff: Payoff, model: ScenarioModel,
              alpha: AlphaVector, vertex: np.ndarray, blocks: dict, tol: Tolerances) -> VertexStrategy:
    d, N = prog.d, prog.n_scenarios
    k0 = market.k0.generators @ blocks["that"]
    kT = np.zeros((d, N))
    col = 0
    for n, cone in enumerate(market.kT):
        k = cone.n_generators
        kT[:, n] = cone.generators @ blocks["shat"][col:col + k]
        col += k
    scale = max(1.0, float(np.abs(k0).max()), float(np.abs(kT).max()))
    if not market.k0.contains(k0 / scale, tol):
        raise VlpError("initial exchange left the solvency cone")
    for n, cone in enumerate(market.kT):
        if not cone.contains(kT[:, n] / scale, tol):
            raise VlpError(f"terminal exchange in scenario {n} left the solvency cone")
    hedge = Payoff(-k0[:, None] - kT)
    reg = avar_regulator(payoff + hedge, model, alpha, prog.eligible, tol)
    return VertexStrategy(vertex, k0, kT, hedge, reg)


def avar_market(payoff: Payoff, model: ScenarioModel, alpha: AlphaVector, eligible: EligibleSpace,
                market: MarketInstance, tol: Tolerances = DEFAULT_TOL,
                strategies: bool = True) -> tuple[RiskSet, StrategyReport]:
    """Market extension: deposits acceptable after trading at time 0 and at
    the horizon.  Each vertex comes with the trades that attain it."""
    prog = build_market_vlp(payoff, model, alpha, eligible, market, tol)
    sol = solve_vlp(prog.vlp, tol)
    logger.info("market set: %s, %d vertices, %d LPs", sol.status, len(sol.vertices), sol.lp_calls)
    rs = _to_risk_set(prog, sol)
    report = []
    if strategies and sol.status == "bounded":
        for v, blocks in zip(rs.vertices, rs.preimages):
            report.append(_strategy(prog, market, payoff, model, alpha, v, blocks, tol))
    return rs, StrategyReport(tuple(report))


def is_acceptable(payoff: Payoff, model: ScenarioModel, alpha: AlphaVector, eligible: EligibleSpace,
                  market: MarketInstance | None = None, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Single LP: is the zero deposit in the (regulator or market) set?"""
    prog = (build_regulator_vlp(payoff, model, alpha, eligible, tol) if market is None
            else build_market_vlp(payoff, model, alpha, eligible, market, tol))
    G = prog.image
    lp = prog.vlp.with_rows(np.zeros(prog.vlp.n), A_eq=G, b_eq=np.zeros(G.shape[0]))
    return solve_lp(lp, tol).status == "optimal"
