"""Dense two-phase simplex.

Solves ``min c.x  s.t.  A_eq x = b_eq,  A_ge x >= b_ge,  x_j >= 0`` unless
``free[j]``.  Returns primal and dual solutions on optimality, a Farkas
certificate on infeasibility and an improving ray on unboundedness.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_TOL, Tolerances, ValidationError


class LpNumericalError(RuntimeError):
    """Basis became numerically singular or the iteration budget ran out."""


@dataclass(frozen=True)
class LinearProgram:
    c: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_ge: np.ndarray | None = None
    b_ge: np.ndarray | None = None
    free: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        n = c.size

        def rows(A, b, name):
            if A is None:
                return np.zeros((0, n)), np.zeros(0)
            A = np.asarray(A, dtype=float).reshape(-1, n)
            b = np.asarray(b, dtype=float).ravel()
            if b.size != A.shape[0]:
                raise ValidationError("dimension mismatch", f"{name}: {A.shape[0]} rows but {b.size} right-hand sides")
            return A, b

        A_eq, b_eq = rows(self.A_eq, self.b_eq, "equality rows")
        A_ge, b_ge = rows(self.A_ge, self.b_ge, "inequality rows")
        free = np.zeros(n, dtype=bool) if self.free is None else np.asarray(self.free, dtype=bool).ravel()
        if free.size != n:
            raise ValidationError("dimension mismatch", "free mask length differs from variable count")
        for arr in (c, A_eq, b_eq, A_ge, b_ge):
            if not np.all(np.isfinite(arr)):
                raise ValidationError("finite entries", "linear program contains non-finite data")
        for name, val in (("c", c), ("A_eq", A_eq), ("b_eq", b_eq), ("A_ge", A_ge), ("b_ge", b_ge), ("free", free)):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.c.size


@dataclass
class LpResult:
    status: str
    value: float = np.nan
    x: np.ndarray | None = None
    dual_eq: np.ndarray | None = None
    dual_ge: np.ndarray | None = None
    # infeasible: (y_eq, y_ge) Farkas multipliers; unbounded: primal direction
    farkas: tuple[np.ndarray, np.ndarray] | None = None
    ray: np.ndarray | None = None
    iterations: int = 0


@dataclass
class _Standard:
    A: np.ndarray          # rows x cols, rows sign-normalized so b >= 0
    b: np.ndarray
    c: np.ndarray
    sign: np.ndarray       # row multipliers applied
    n_orig: int
    col_var: np.ndarray    # original variable index per structural column, -1 for surplus
    col_sgn: np.ndarray    # +1 / -1 for split free variables
    n_eq: int
    slack_basis: dict = field(default_factory=dict)  # row -> column usable as initial basic


def _standardize(lp: LinearProgram) -> _Standard:
    n = lp.n
    A = np.vstack([lp.A_eq, lp.A_ge])
    b = np.concatenate([lp.b_eq, lp.b_ge])
    n_eq, n_ge = lp.A_eq.shape[0], lp.A_ge.shape[0]
    m = n_eq + n_ge
    cols = [A]
    col_var = list(range(n))
    col_sgn = [1.0] * n
    free_idx = np.flatnonzero(lp.free)
    if free_idx.size:
        cols.append(-A[:, free_idx])
        col_var += free_idx.tolist()
        col_sgn += [-1.0] * free_idx.size
    surplus = np.zeros((m, n_ge))
    surplus[n_eq + np.arange(n_ge), np.arange(n_ge)] = -1.0
    cols.append(surplus)
    col_var += [-1] * n_ge
    col_sgn += [1.0] * n_ge
    As = np.hstack(cols)
    cs = np.concatenate([lp.c, -lp.c[free_idx], np.zeros(n_ge)])
    sign = np.where(b < 0, -1.0, 1.0)
    As = As * sign[:, None]
    bs = b * sign
    first_surplus = As.shape[1] - n_ge
    slack_basis = {}
    for k in range(n_ge):
        row = n_eq + k
        if sign[row] < 0:  # surplus column became +e_row
            slack_basis[row] = first_surplus + k
    return _Standard(As, bs, cs, sign, n, np.array(col_var), np.array(col_sgn), n_eq, slack_basis)


class _Tableau:
    """Tableau ``[B^-1 A | B^-1 b]`` with objective row held separately."""

    def __init__(self, A, b, basis, tol: Tolerances):
        self.A0 = A
        self.b0 = b
        self.basis = np.array(basis, dtype=int)
        self.tol = tol
        self.refactor()

    def refactor(self):
        B = self.A0[:, self.basis]
        try:
            cond = np.linalg.cond(B)
            if not np.isfinite(cond) or cond > 1e14:
                raise np.linalg.LinAlgError(f"condition number {cond:.3g}")
            body = np.linalg.solve(B, np.hstack([self.A0, self.b0[:, None]]))
        except np.linalg.LinAlgError as exc:
            raise LpNumericalError(f"singular basis during refactorization ({exc})") from exc
        self.T = body
        rhs = self.T[:, -1]
        rhs[(rhs < 0) & (rhs > -1e-9)] = 0.0

    def duals(self, c):
        B = self.A0[:, self.basis]
        try:
            return np.linalg.solve(B.T, c[self.basis])
        except np.linalg.LinAlgError as exc:
            raise LpNumericalError("singular basis while computing duals") from exc

    def pivot(self, r, q):
        T = self.T
        T[r] /= T[r, q]
        col = T[:, q].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = q


def _pricing(tab: _Tableau, c: np.ndarray, opt_tol: float) -> np.ndarray:
    """Reduced costs, with entries inside the round-off band set to zero.

    The band grows with the size of the tableau column, so a badly scaled
    column cannot enter (or prove unboundedness) on noise alone.
    """
    body = tab.T[:, :-1]
    cb = c[tab.basis]
    reduced = c - cb @ body
    band = opt_tol * np.maximum(1.0, np.abs(body).max(axis=0) * max(1.0, float(np.abs(cb).max(initial=0.0))))
    reduced[np.abs(reduced) <= band] = 0.0
    return reduced


def _run_simplex(tab: _Tableau, c: np.ndarray, allowed: np.ndarray, budget: list[int], tol: Tolerances):
    """Primal simplex on ``tab`` for cost ``c``; returns ('optimal', None) or ('unbounded', q)."""
    piv_tol = 1e-9
    harris = 1e-10
    opt_tol = tol.feasibility
    degenerate_run = 0
    bland = False
    since_refactor = 0
    reduced = _pricing(tab, c, opt_tol)
    while True:
        if budget[0] <= 0:
            raise LpNumericalError("iteration limit reached")
        cand = np.flatnonzero(allowed & (reduced < 0))
        if cand.size == 0:
            # confirm on a fresh factorization
            tab.refactor()
            reduced = _pricing(tab, c, opt_tol)
            cand = np.flatnonzero(allowed & (reduced < 0))
            since_refactor = 0
            if cand.size == 0:
                return "optimal", None
        q = int(cand[0]) if bland else int(cand[np.argmin(reduced[cand])])
        col = tab.T[:, q]
        rows = np.flatnonzero(col > piv_tol * max(1.0, float(np.abs(col).max())))
        if rows.size == 0:
            return "unbounded", q
        rhs = np.maximum(tab.T[rows, -1], 0.0)
        ratios = rhs / col[rows]
        if bland:
            # exact minimum-ratio ties, smallest basic index leaves
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
            r = int(ties[np.argmin(tab.basis[ties])])
        else:
            # two-pass (Harris) ratio test: relax the bound slightly, then
            # take the largest pivot among the rows that stay within it
            bound = ((rhs + harris) / col[rows]).min()
            ties = rows[ratios <= bound]
            r = int(ties[np.argmax(col[ties])])
        step = max(tab.T[r, -1], 0.0) / col[r]
        tab.pivot(r, q)
        budget[0] -= 1
        since_refactor += 1
        if step <= 1e-12:
            degenerate_run += 1
            if degenerate_run > 10:
                bland = True
        else:
            degenerate_run = 0
            bland = False
        if since_refactor >= 100:
            tab.refactor()
            since_refactor = 0
        reduced = _pricing(tab, c, opt_tol)


def solve_lp(lp: LinearProgram, tol: Tolerances = DEFAULT_TOL) -> LpResult:
    """Solve ``lp`` with a two-phase simplex (Dantzig pricing, Bland on stalls)."""
    st = _standardize(lp)
    m, ncols = st.A.shape
    budget = [50 * (m + ncols)]
    n = lp.n

    if m == 0:
        # only sign constraints
        free_c = lp.c[lp.free]
        if np.any(np.abs(free_c) > 0) or np.any(lp.c[~lp.free] < 0):
            j = int(np.flatnonzero((lp.free & (lp.c != 0)) | (~lp.free & (lp.c < 0)))[0])
            ray = np.zeros(n)
            ray[j] = -np.sign(lp.c[j]) if lp.free[j] else 1.0
            return LpResult("unbounded", -np.inf, ray=ray)
        return LpResult("optimal", 0.0, np.zeros(n), np.zeros(0), np.zeros(0))

    # phase I: artificials for rows without a usable slack
    art_rows = [i for i in range(m) if i not in st.slack_basis]
    A1 = np.hstack([st.A, np.zeros((m, len(art_rows)))])
    basis = np.empty(m, dtype=int)
    for i, col in st.slack_basis.items():
        basis[i] = col
    for k, i in enumerate(art_rows):
        A1[i, ncols + k] = 1.0
        basis[i] = ncols + k
    c1 = np.concatenate([np.zeros(ncols), np.ones(len(art_rows))])
    tab = _Tableau(A1, st.b, basis, tol)
    allowed = np.ones(A1.shape[1], dtype=bool)
    iters0 = budget[0]
    if art_rows:
        _run_simplex(tab, c1, allowed, budget, tol)
        infeas = float(c1[tab.basis] @ tab.T[:, -1])
        scale = max(1.0, float(np.max(np.abs(st.b))))
        if infeas > tol.feasibility * scale:
            y = tab.duals(c1) * st.sign
            return LpResult("infeasible", np.inf, farkas=(y[: st.n_eq], y[st.n_eq:]),
                            iterations=iters0 - budget[0])
        # drive basic artificials out of the basis or drop redundant rows
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if tab.basis[r] >= ncols:
                row = tab.T[r, :ncols]
                cand = np.flatnonzero(np.abs(row) > 1e-9)
                if cand.size:
                    q = int(cand[np.argmax(np.abs(row[cand]))])
                    tab.pivot(r, q)
                else:
                    keep[r] = False
        if not keep.all():
            A2 = st.A[keep]
            b2 = st.b[keep]
            tab = _Tableau(A2, b2, tab.basis[keep], tol)
        else:
            tab = _Tableau(st.A, st.b, tab.basis, tol)
    else:
        keep = np.ones(m, dtype=bool)
        tab = _Tableau(st.A, st.b, basis, tol)

    allowed = np.ones(ncols, dtype=bool)
    status, q = _run_simplex(tab, st.c, allowed, budget, tol)
    iterations = iters0 - budget[0]

    def to_original(vec_std):
        x = np.zeros(n)
        struct = st.col_var >= 0
        np.add.at(x, st.col_var[struct], vec_std[struct] * st.col_sgn[struct])
        return x

    if status == "unbounded":
        d = np.zeros(ncols)
        d[q] = 1.0
        d[tab.basis] = -tab.T[:, q]
        return LpResult("unbounded", -np.inf, ray=to_original(d), iterations=iterations)

    xs = np.zeros(ncols)
    xs[tab.basis] = tab.T[:, -1]
    xs[xs < 0] = 0.0
    x = to_original(xs)
    y_kept = tab.duals(st.c)
    y = np.zeros(m)
    y[keep] = y_kept
    y *= st.sign
    return LpResult("optimal", float(lp.c @ x), x, y[: st.n_eq], y[st.n_eq:], iterations=iterations)
