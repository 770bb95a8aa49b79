"""Benson-type outer approximation for linear vector optimization.

Computes the vertices and the recession cone of the upper image
``P[S] + C`` of a polyhedron ``S`` under a linear map ``P`` with respect to
a polyhedral, pointed, solid ordering cone ``C``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_TOL, GeneratedCone, Tolerances, ValidationError
from .lp import LinearProgram, LpNumericalError, LpResult, solve_lp
from .polyhedra import DoubleDescription, cone_rays, dedup_rows, split_homogeneous

logger = logging.getLogger(__name__)


class VlpError(RuntimeError):
    """Solver failure (numerical trouble or invalid ordering cone)."""


@dataclass(frozen=True, eq=False)
class VectorLp:
    objective: np.ndarray
    ordering: GeneratedCone
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ge: np.ndarray | None = None
    b_ge: np.ndarray | None = None
    free: np.ndarray | None = None
    preimage_cost: np.ndarray | None = None

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.objective, dtype=float))
        base = LinearProgram(np.zeros(P.shape[1]), self.A_eq, self.b_eq, self.A_ge, self.b_ge, self.free)
        if self.ordering.dim != P.shape[0]:
            raise ValidationError("dimension mismatch",
                                  f"ordering cone lives in R^{self.ordering.dim}, image in R^{P.shape[0]}")
        cost = self.preimage_cost
        if cost is None:
            cost = (~base.free).astype(float)
        cost = np.asarray(cost, dtype=float).ravel()
        if cost.size != P.shape[1]:
            raise ValidationError("dimension mismatch", "preimage_cost length differs from variable count")
        object.__setattr__(self, "objective", P)
        object.__setattr__(self, "preimage_cost", cost)
        object.__setattr__(self, "_base", base)

    @property
    def q(self) -> int:
        return self.objective.shape[0]

    @property
    def n(self) -> int:
        return self.objective.shape[1]

    def scalarized(self, w) -> LinearProgram:
        """``min w.(P x)`` over the feasible set."""
        b = self._base
        return LinearProgram(self.objective.T @ np.asarray(w, dtype=float), b.A_eq, b.b_eq, b.A_ge, b.b_ge, b.free)

    def with_rows(self, c, A_eq=None, b_eq=None, A_ge=None, b_ge=None, extra_free: int = 0) -> LinearProgram:
        """Feasible set lifted by ``extra_free`` free variables plus extra rows."""
        b = self._base
        pad = lambda A: np.hstack([A, np.zeros((A.shape[0], extra_free))])
        Ae, be = pad(b.A_eq), b.b_eq
        Ag, bg = pad(b.A_ge), b.b_ge
        if A_eq is not None:
            Ae, be = np.vstack([Ae, A_eq]), np.concatenate([be, b_eq])
        if A_ge is not None:
            Ag, bg = np.vstack([Ag, A_ge]), np.concatenate([bg, b_ge])
        free = np.concatenate([b.free, np.ones(extra_free, dtype=bool)])
        return LinearProgram(c, Ae, be, Ag, bg, free)

    def homogeneous(self, c, A_ge=None, b_ge=None) -> LinearProgram:
        """Recession cone of the feasible set, with optional extra rows."""
        b = self._base
        Ag, bg = b.A_ge, np.zeros(b.A_ge.shape[0])
        if A_ge is not None:
            Ag, bg = np.vstack([Ag, A_ge]), np.concatenate([bg, b_ge])
        return LinearProgram(c, b.A_eq, np.zeros(b.A_eq.shape[0]), Ag, bg, b.free)


@dataclass(eq=False)
class VlpSolution:
    status: str
    problem: VectorLp
    vertices: np.ndarray
    recession: np.ndarray
    lineality: np.ndarray
    preimages: np.ndarray
    dual_generators: np.ndarray
    cut_normals: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    cut_offsets: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lp_calls: int = 0

    @property
    def ordering(self) -> GeneratedCone:
        return self.problem.ordering


class _Counter:
    def __init__(self, tol):
        self.calls = 0
        self.tol = tol

    def __call__(self, lp: LinearProgram, what: str) -> LpResult:
        self.calls += 1
        try:
            return solve_lp(lp, self.tol)
        except LpNumericalError as exc:
            raise VlpError(f"LP kernel failed while {what}: {exc}") from exc


def _recession_dual(problem: VectorLp, solve: _Counter) -> DoubleDescription:
    """Cutting-plane computation of the dual of the upper image's recession cone."""
    q = problem.q
    P = problem.objective
    dd = DoubleDescription(q)
    for g in problem.ordering.generators.T:
        dd.add(g)
    while True:
        cut = False
        for w in dd.ray_array():
            pw = P.T @ w
            res = solve(problem.homogeneous(pw, A_ge=pw[None, :], b_ge=np.array([-1.0])),
                        "probing recession directions")
            if res.status != "optimal":
                raise VlpError(f"recession probe returned {res.status}")
            # homogeneous optimum is 0 or -1
            if res.value < -0.5:
                dd.add(P @ res.x)
                cut = True
                break
        if not cut:
            return dd


def solve_vlp(problem: VectorLp, tol: Tolerances = DEFAULT_TOL, max_cuts: int = 5000) -> VlpSolution:
    """Vertices, recession cone and vertex preimages of the upper image.

    Status ``"empty"`` for an infeasible constraint set and
    ``"unbounded-below"`` when the recession cone of the upper image contains
    a line (no vertex exists).
    """
    C = problem.ordering
    q, n = problem.q, problem.n
    P = problem.objective
    if not C.is_solid():
        raise VlpError("ordering cone has empty interior")
    if not C.is_pointed(tol):
        raise VlpError("ordering cone is not pointed")
    solve = _Counter(tol)

    def finish(status, V=np.zeros((0, q)), R=np.zeros((0, q)), L=np.zeros((0, q)),
               X=np.zeros((0, n)), W=np.zeros((0, q)), normals=np.zeros((0, q)), offsets=np.zeros(0)):
        return VlpSolution(status, problem, V, R, L, X, W, normals, offsets, solve.calls)

    first = solve(problem.scalarized(np.zeros(q)), "checking feasibility")
    if first.status == "infeasible":
        return finish("empty")

    dual_dd = _recession_dual(problem, solve)
    W = dual_dd.ray_array()
    if W.shape[0] == 0 or np.linalg.matrix_rank(W, tol=1e-10) < q:
        rays, lines = cone_rays(W) if W.shape[0] else (np.zeros((0, q)), np.eye(q))
        logger.info("upper image has lines in its recession cone: unbounded below")
        return finish("unbounded-below", R=rays, L=lines, W=W)
    R, lines = cone_rays(W)

    interior = C.generators.sum(axis=1)
    interior /= np.linalg.norm(interior)
    Wc = W @ interior

    outer = DoubleDescription(q + 1)
    outer.add(np.eye(q + 1)[q])
    normals, offsets = [], []

    def add_cut(u, beta):
        nrm = np.linalg.norm(u)
        u, beta = u / nrm, beta / nrm
        normals.append(u)
        offsets.append(beta)
        outer.add(np.concatenate([u, [-beta]]))

    for w in W:
        res = solve(problem.scalarized(w), "solving a weighted-sum problem")
        if res.status != "optimal":
            raise VlpError(f"weighted-sum problem for a dual generator is {res.status}")
        add_cut(w, res.value)

    verified: list[np.ndarray] = []
    for _ in range(max_cuts):
        V, _, _ = split_homogeneous(outer)
        cut_added = False
        for t in V:
            if any(np.array_equal(t, p) for p in verified):
                continue
            # min s  s.t.  x in S,  W (t + s c - P x) >= 0
            res = solve(problem.with_rows(
                np.concatenate([np.zeros(n), [1.0]]),
                A_ge=np.hstack([-(W @ P), Wc[:, None]]),
                b_ge=-(W @ t),
                extra_free=1,
            ), "locating the boundary")
            if res.status != "optimal":
                raise VlpError(f"boundary problem is {res.status}")
            s = res.x[-1]
            if s <= tol.benson:
                verified.append(t)
                continue
            lam = res.dual_ge[-W.shape[0]:]
            u = np.maximum(lam, 0.0) @ W
            sup = solve(problem.scalarized(u), "computing a supporting hyperplane")
            if sup.status != "optimal":
                raise VlpError(f"support problem is {sup.status}")
            if u @ t >= sup.value - 1e-12 * max(1.0, abs(sup.value)):
                raise VlpError("supporting hyperplane does not separate the outer vertex")
            add_cut(u, sup.value)
            cut_added = True
            break
        if not cut_added:
            break
    else:
        raise VlpError(f"no convergence after {max_cuts} cuts")

    normals_a = np.array(normals)
    offsets_a = np.array(offsets)
    V, _, _ = split_homogeneous(outer)
    V = dedup_rows(V, tol.dedup)
    verts, pre = [], []
    for t in V:
        x = _preimage(problem, t, normals_a, offsets_a, solve, tol)
        verts.append(P @ x)
        pre.append(x)
    verts = np.array(verts).reshape(-1, q)
    pre = np.array(pre).reshape(-1, n)
    order = np.lexsort(np.round(verts, 10).T[::-1]) if len(verts) > 1 else np.arange(len(verts))
    return finish("bounded", verts[order], R, lines, pre[order], W, normals_a, offsets_a)


def _preimage(problem: VectorLp, t, normals, offsets, solve: _Counter, tol: Tolerances) -> np.ndarray:
    """A feasible ``x`` with ``P x = t`` minimizing ``preimage_cost``."""
    P = problem.objective
    scale = max(1.0, float(np.max(np.abs(t))))
    active = np.abs(normals @ t - offsets) <= 1e-7 * scale
    if not active.any():
        raise VlpError("outer vertex lies on no cut")
    u = normals[active].mean(axis=0)
    res = solve(problem.scalarized(u), "certifying a vertex")
    if res.status != "optimal" or abs(u @ t - res.value) > 1e-6 * scale:
        raise VlpError("vertex is not supported by its cuts")
    x = res.x
    target = P @ x
    if np.max(np.abs(target - t)) > 1e-6 * scale:
        raise VlpError("weighted-sum solution does not reach the vertex")
    polish = solve(problem.with_rows(problem.preimage_cost, A_eq=P, b_eq=target), "selecting a preimage")
    if polish.status == "optimal":
        x = polish.x
    # round-off from the tableau is reported as exact zero
    return np.where(np.abs(x) <= 1e-11 * max(1.0, float(np.abs(x).max())), 0.0, x)


def upper_image_supports(solution: VlpSolution, w, check_dual: bool = True) -> float:
    """inf { w.y : y in upper image }.

    Raises
    ------
    ValueError
        If ``w`` lies outside the dual of the ordering cone.
    """
    w = np.asarray(w, dtype=float)
    scale = max(1.0, float(np.max(np.abs(w))))
    if check_dual and np.any(solution.ordering.generators.T @ w < -1e-9 * scale):
        raise ValueError("weight lies outside the dual of the ordering cone")
    if solution.status == "empty":
        return np.inf
    if solution.recession.size and np.any(solution.recession @ w < -1e-9 * scale):
        return -np.inf
    if solution.lineality.size and np.any(np.abs(solution.lineality @ w) > 1e-9 * scale):
        return -np.inf
    if solution.status == "unbounded-below":
        res = solve_lp(solution.problem.scalarized(w))
        return res.value if res.status == "optimal" else -np.inf
    return float(np.min(solution.vertices @ w))
