"""Domain types shared across the package.

All arrays are float64 and copied on construction; instances are treated as
immutable once validated.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class ValidationError(ValueError):
    """An instance violates a named invariant."""

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-9
    dedup: float = 1e-6
    orthogonality: float = 1e-10
    benson: float = 1e-7
    probability_sum: float = 1e-12
    in_subspace: float = 1e-8


DEFAULT_TOL = Tolerances()


def _as_matrix(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValidationError("shape", f"{name} must be a matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("finite entries", f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScenarioModel:
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=float).ravel()
        if p.size == 0:
            raise ValidationError("probabilities not a distribution", "no scenarios")
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise ValidationError("probabilities not a distribution",
                                  "every probability must be strictly positive")
        if abs(p.sum() - 1.0) > DEFAULT_TOL.probability_sum * max(1, p.size):
            raise ValidationError("probabilities not a distribution",
                                  f"probabilities sum to {p.sum():.15g}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)

    @property
    def n_scenarios(self) -> int:
        return self.probabilities.size

    @classmethod
    def uniform(cls, n: int) -> "ScenarioModel":
        return cls(np.full(n, 1.0 / n))


@dataclass(frozen=True)
class Payoff:
    """Multivariate position: ``values[i, n]`` is the number of units of
    asset ``i`` held in scenario ``n``."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_matrix(self.values, "payoff"))

    @property
    def d(self) -> int:
        return self.values.shape[0]

    @property
    def n_scenarios(self) -> int:
        return self.values.shape[1]

    def stacked(self) -> np.ndarray:
        """Scenario-major stacking (x_11..x_d1, x_12, ..., x_dN)."""
        return self.values.T.reshape(-1).copy()

    def __add__(self, other: "Payoff") -> "Payoff":
        return Payoff(self.values + other.values)

    def scaled(self, s: float) -> "Payoff":
        return Payoff(s * self.values)

    def shifted(self, u) -> "Payoff":
        """X + u*1 for a deterministic portfolio u."""
        return Payoff(self.values + np.asarray(u, dtype=float).reshape(-1, 1))


@dataclass(frozen=True)
class AlphaVector:
    alpha: np.ndarray

    def __post_init__(self):
        a = np.array(self.alpha, dtype=float).ravel()
        if a.size == 0 or np.any(~np.isfinite(a)) or np.any(a <= 0) or np.any(a > 1):
            raise ValidationError("alpha out of range", f"every level must lie in (0, 1], got {a.tolist()}")
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @property
    def d(self) -> int:
        return self.alpha.size


def _normalize_columns(gens: np.ndarray, tol: float) -> np.ndarray:
    norms = np.linalg.norm(gens, axis=0)
    if np.any(norms <= tol):
        raise ValidationError("nonzero generators", "a cone generator is the zero vector")
    unit = gens / norms
    kept: list[np.ndarray] = []
    for col in unit.T:
        # collinear (same direction) generators are merged
        if not any(np.max(np.abs(col - k)) <= 1e-12 for k in kept):
            kept.append(col)
    return np.column_stack(kept)


@dataclass(frozen=True, eq=False)
class GeneratedCone:
    """Finitely generated convex cone; generator columns stored at unit length."""

    generators: np.ndarray

    def __post_init__(self):
        g = np.array(self.generators, dtype=float)
        if g.ndim == 1:
            g = g.reshape(-1, 1)
        if g.ndim != 2 or g.shape[1] < 1:
            raise ValidationError("nonzero generators", "a cone needs at least one generator")
        if not np.all(np.isfinite(g)):
            raise ValidationError("finite entries", "cone generators contain non-finite values")
        g = _normalize_columns(g, 1e-14)
        g.setflags(write=False)
        object.__setattr__(self, "generators", g)

    @classmethod
    def from_rows(cls, rows) -> "GeneratedCone":
        return cls(np.array(rows, dtype=float).T)

    @property
    def dim(self) -> int:
        return self.generators.shape[0]

    @property
    def n_generators(self) -> int:
        return self.generators.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, GeneratedCone) or other.dim != self.dim:
            return NotImplemented
        return self.includes(other) and other.includes(self)

    __hash__ = None

    def contains(self, v, tol: Tolerances = DEFAULT_TOL) -> bool:
        """Membership probe: does ``v = G @ lam`` have a solution ``lam >= 0``?"""
        from .lp import LinearProgram, solve_lp

        v = np.asarray(v, dtype=float)
        scale = max(1.0, float(np.max(np.abs(v))))
        k = self.n_generators
        res = solve_lp(LinearProgram(np.zeros(k), A_eq=self.generators, b_eq=v / scale), tol)
        return res.status == "optimal"

    def includes(self, other: "GeneratedCone", tol: Tolerances = DEFAULT_TOL) -> bool:
        return all(self.contains(g, tol) for g in other.generators.T)

    def is_pointed(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        """LP probe: no nonzero ``lam >= 0`` with ``G @ lam = 0``."""
        from .lp import LinearProgram, solve_lp

        k = self.n_generators
        lp = LinearProgram(
            -np.ones(k),
            A_eq=self.generators,
            b_eq=np.zeros(self.dim),
            A_ge=-np.eye(k),
            b_ge=-np.ones(k),
        )
        res = solve_lp(lp, tol)
        return res.status == "optimal" and res.value > -1e-7

    def is_solid(self) -> bool:
        return np.linalg.matrix_rank(self.generators, tol=1e-10) == self.dim

    def halfspaces(self) -> tuple[np.ndarray, np.ndarray]:
        """H-representation ``{y : F y >= 0, L y = 0}`` returned as ``(F, L)``."""
        from .polyhedra import cone_rays

        rays, lines = cone_rays(self.generators.T)
        return rays, lines

    def dual(self) -> "GeneratedCone":
        """Dual cone ``{w : w.g >= 0 for all generators g}``."""
        rays, lines = self.halfspaces()
        cols = [r for r in rays] + [l for l in lines] + [-l for l in lines]
        if not cols:
            raise ValidationError("nonzero generators", "dual cone is {0}")
        return GeneratedCone(np.column_stack(cols))

    def extreme(self) -> "GeneratedCone":
        """Same cone with redundant generators removed (pointed cones)."""
        from .polyhedra import cone_rays

        F, L = self.halfspaces()
        rows = np.vstack([F, L, -L]) if L.size else F
        rays, lines = cone_rays(rows)
        cols = [r for r in rays] + [l for l in lines] + [-l for l in lines]
        return GeneratedCone(np.column_stack(cols))


def _orthonormal_complement(basis: np.ndarray) -> np.ndarray:
    d = basis.shape[0]
    u, s, _ = np.linalg.svd(basis, full_matrices=True)
    rank = int(np.sum(s > 1e-12 * max(1.0, s.max())))
    return u[:, rank:d]


@dataclass(frozen=True, eq=False)
class EligibleSpace:
    """Subspace M of eligible deposits with a basis of M and of its complement."""

    basis_M: np.ndarray
    basis_Mperp: np.ndarray | None = None

    def __post_init__(self):
        bm = _as_matrix(self.basis_M, "basis_M")
        d, m = bm.shape
        if not 1 <= m <= d:
            raise ValidationError("dimension mismatch", f"need 1 <= m <= d, got m={m}, d={d}")
        if np.linalg.matrix_rank(bm, tol=1e-10) != m:
            raise ValidationError("basis rank", "basis_M columns are linearly dependent")
        if self.basis_Mperp is None:
            bp = _orthonormal_complement(bm)
        else:
            bp = np.array(self.basis_Mperp, dtype=float).reshape(d, -1)
        if bp.shape[1] != d - m:
            raise ValidationError("dimension mismatch",
                                  f"complement basis must have {d - m} columns, got {bp.shape[1]}")
        full = np.hstack([bm, bp])
        if np.linalg.matrix_rank(full, tol=1e-10) != d:
            raise ValidationError("basis rank", "[basis_M | basis_Mperp] must have rank d")
        if bp.size and np.max(np.abs(bm.T @ bp)) > DEFAULT_TOL.orthogonality * max(1.0, np.abs(bm).max() * max(1.0, np.abs(bp).max())):
            raise ValidationError("orthogonality", "basis_Mperp is not orthogonal to basis_M")
        bp = np.array(bp)
        bp.setflags(write=False)
        object.__setattr__(self, "basis_M", bm)
        object.__setattr__(self, "basis_Mperp", bp)
        coords = np.linalg.pinv(bm)
        coords.setflags(write=False)
        object.__setattr__(self, "_coords", coords)

    @classmethod
    def full(cls, d: int) -> "EligibleSpace":
        return cls(np.eye(d))

    @classmethod
    def coordinate(cls, d: int, m: int) -> "EligibleSpace":
        """M = R^m x {0}^(d-m)."""
        return cls(np.eye(d)[:, :m], np.eye(d)[:, m:])

    @property
    def d(self) -> int:
        return self.basis_M.shape[0]

    @property
    def m(self) -> int:
        return self.basis_M.shape[1]

    def to_coords(self, u) -> np.ndarray:
        """Coordinates w.r.t. basis_M of (the projection onto M of) ``u``."""
        return self._coords @ np.asarray(u, dtype=float)

    def from_coords(self, theta) -> np.ndarray:
        return self.basis_M @ np.asarray(theta, dtype=float)

    def distance(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return float(np.linalg.norm(u - self.from_coords(self.to_coords(u))))

    def positive_part(self) -> GeneratedCone | None:
        """M_+ = M cap R^d_+ as a cone in basis_M coordinates, ``None`` if trivial."""
        from .polyhedra import cone_rays

        rays, lines = cone_rays(self.basis_M)
        if lines.size:
            raise ValidationError("basis rank", "basis_M columns are dependent")
        if rays.shape[0] == 0:
            return None
        return GeneratedCone(rays.T)

    def positive_part_ambient(self) -> GeneratedCone | None:
        cone = self.positive_part()
        if cone is None:
            return None
        return GeneratedCone(self.basis_M @ cone.generators)


def m_plus_nontrivial(eligible: EligibleSpace, tol: Tolerances = DEFAULT_TOL) -> bool:
    """LP probe: is there ``u in M`` with ``u >= 0`` and ``sum(u) = 1``?"""
    from .lp import LinearProgram, solve_lp

    d, m = eligible.d, eligible.m
    # variables theta (free); B theta >= 0, 1^T B theta = 1
    lp = LinearProgram(
        np.zeros(m),
        A_eq=eligible.basis_M.sum(axis=0, keepdims=True),
        b_eq=np.ones(1),
        A_ge=eligible.basis_M,
        b_ge=np.zeros(d),
        free=np.ones(m, dtype=bool),
    )
    return solve_lp(lp, tol).status == "optimal"


@dataclass(frozen=True)
class Instance:
    model: ScenarioModel
    payoff: Payoff
    alpha: AlphaVector
    eligible: EligibleSpace


def validate_instance(model: ScenarioModel, payoff: Payoff, alpha: AlphaVector,
                      eligible: EligibleSpace, tol: Tolerances = DEFAULT_TOL) -> Instance:
    """Cross-check the dimensions of an instance and the non-triviality of M_+.

    Raises
    ------
    ValidationError
        With ``invariant`` naming the violated condition.
    """
    if payoff.n_scenarios != model.n_scenarios:
        raise ValidationError("dimension mismatch",
                              f"payoff has {payoff.n_scenarios} scenarios, model has {model.n_scenarios}")
    if alpha.d != payoff.d:
        raise ValidationError("dimension mismatch", f"alpha has {alpha.d} levels for d={payoff.d}")
    if eligible.d != payoff.d:
        raise ValidationError("dimension mismatch", f"eligible space lives in R^{eligible.d}, payoff in R^{payoff.d}")
    if not m_plus_nontrivial(eligible, tol):
        raise ValidationError("M_+ trivial", "M cap R^d_+ = {0}")
    return Instance(model, payoff, alpha, eligible)


@dataclass(frozen=True, eq=False)
class RiskSet:
    """Polyhedral upper set in M: ``conv(vertices) + cone(recession)``.

    ``status`` is one of ``"bounded"``, ``"empty"``, ``"unbounded-below"``.
    Vertices and recession generators are ambient d-vectors (rows).
    """

    eligible: EligibleSpace
    vertices: np.ndarray
    recession: np.ndarray
    ordering: GeneratedCone
    status: str = "bounded"
    preimages: tuple = ()
    lineality: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    size: dict = field(default_factory=dict)
    solution: object = None

    @property
    def empty_flag(self) -> bool:
        return self.status == "empty"

    @property
    def recession_generators(self) -> GeneratedCone | None:
        if self.recession.shape[0] == 0:
            return None
        return GeneratedCone(self.recession.T)

    def vertex_coords(self) -> np.ndarray:
        return np.array([self.eligible.to_coords(v) for v in self.vertices]).reshape(-1, self.eligible.m)

    def recession_coords(self) -> np.ndarray:
        return np.array([self.eligible.to_coords(r) for r in self.recession]).reshape(-1, self.eligible.m)

    def support(self, w) -> float:
        """inf { w.u : u in set } for an ambient weight ``w``.

        ``+inf`` for an empty set, ``-inf`` when some recession direction
        decreases ``w``.
        """
        w = np.asarray(w, dtype=float)
        if self.status == "empty":
            return np.inf
        if self.solution is not None:
            from .vlp import upper_image_supports

            return upper_image_supports(self.solution, self.eligible.basis_M.T @ w, check_dual=False)
        scale = max(1.0, np.abs(w).max())
        if self.recession.size and np.any(self.recession @ w < -1e-9 * scale):
            return -np.inf
        return float(np.min(self.vertices @ w))

    def facets(self) -> tuple[np.ndarray, np.ndarray]:
        """H-representation ``{theta : N theta >= b}`` in basis_M coordinates."""
        from .polyhedra import cone_rays

        if self.status != "bounded":
            raise ValueError(f"no facet description for status {self.status!r}")
        m = self.eligible.m
        V = self.vertex_coords()
        R = self.recession_coords()
        gens = np.vstack([np.hstack([V, np.ones((len(V), 1))]),
                          np.hstack([R, np.zeros((len(R), 1))])])
        rays, lines = cone_rays(gens)
        rows = list(rays) + list(lines) + [-l for l in lines]
        normals, offsets = [], []
        for r in rows:
            n, beta = r[:m], -r[m]
            nn = np.linalg.norm(n)
            if nn < 1e-12:
                continue
            normals.append(n / nn)
            offsets.append(beta / nn)
        return np.array(normals).reshape(-1, m), np.array(offsets)

    def margin(self, u) -> float:
        """Signed distance (within M) from ``u`` to the boundary; positive inside."""
        N, b = self.facets()
        theta = self.eligible.to_coords(u)
        if N.shape[0] == 0:
            return np.inf
        return float(np.min(N @ theta - b))

    def contains(self, u, tol: float = 1e-7) -> bool:
        u = np.asarray(u, dtype=float)
        if self.status == "empty":
            return False
        if self.eligible.distance(u) > tol:
            return False
        return self.margin(u) >= -tol
