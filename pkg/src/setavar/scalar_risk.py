"""Scalar average value at risk, liquidation and weighted scalarizations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AlphaVector, Payoff, ScenarioModel, ValidationError
from .lp import LinearProgram, solve_lp


@dataclass(frozen=True)
class BidAskQuote:
    """Bid and ask prices per asset, in units of the numeraire."""

    bid: np.ndarray
    ask: np.ndarray

    def __post_init__(self):
        bid = np.atleast_1d(np.array(self.bid, dtype=float))
        ask = np.atleast_1d(np.array(self.ask, dtype=float))
        if bid.shape != ask.shape:
            raise ValidationError("dimension mismatch", "bid and ask have different shapes")
        if np.any(~np.isfinite(bid)) or np.any(~np.isfinite(ask)) or np.any(bid <= 0):
            raise ValidationError("positive prices", "prices must be finite and strictly positive")
        if np.any(bid > ask):
            raise ValidationError("bid <= ask", f"bid exceeds ask: {bid.tolist()} > {ask.tolist()}")
        object.__setattr__(self, "bid", bid)
        object.__setattr__(self, "ask", ask)

    @classmethod
    def proportional(cls, mid, spread) -> "BidAskQuote":
        mid = np.asarray(mid, dtype=float)
        spread = np.asarray(spread, dtype=float)
        return cls(mid * (1 - spread), mid * (1 + spread))


def _probabilities(model) -> np.ndarray:
    return model.probabilities if isinstance(model, ScenarioModel) else ScenarioModel(model).probabilities


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0 < alpha <= 1:
        raise ValidationError("alpha out of range", f"level must lie in (0, 1], got {alpha}")
    return alpha


def avar_closed_form(x, model, alpha: float) -> float:
    """Average of the lower ``alpha``-tail of ``x``, sign flipped."""
    p = _probabilities(model)
    x = np.asarray(x, dtype=float).ravel()
    alpha = _check_alpha(alpha)
    order = np.argsort(x, kind="stable")
    xs, ps = x[order], p[order]
    before = np.concatenate([[0.0], np.cumsum(ps)[:-1]])
    weights = np.clip(alpha - before, 0.0, ps)
    return float(-(weights @ xs) / alpha)


def avar_lp(x, model, alpha: float) -> float:
    """``min_z (1/alpha) E[(z - X)^+] - z`` as a linear program."""
    p = _probabilities(model)
    x = np.asarray(x, dtype=float).ravel()
    alpha = _check_alpha(alpha)
    N = x.size
    # variables (t_1..t_N >= 0, z free); t_n - z >= -x_n
    lp = LinearProgram(
        np.concatenate([p / alpha, [-1.0]]),
        A_ge=np.hstack([np.eye(N), -np.ones((N, 1))]),
        b_ge=-x,
        free=np.concatenate([np.zeros(N, dtype=bool), [True]]),
    )
    res = solve_lp(lp)
    if res.status != "optimal":
        raise RuntimeError(f"scalar AV@R program is {res.status}")
    return res.value


def avar_scalar(x, model, alpha: float, verify: bool = True) -> float:
    """Scalar AV@R of the scenario values ``x``.

    With ``verify`` the closed form is cross-checked against the linear program.
    """
    value = avar_closed_form(x, model, alpha)
    if verify:
        other = avar_lp(x, model, alpha)
        if abs(value - other) > 1e-9 * max(1.0, abs(value)):
            raise RuntimeError(f"closed form {value!r} and LP {other!r} disagree")
    return value


def liquidate(payoff: Payoff, quotes: BidAskQuote, target: int) -> np.ndarray:
    """Liquidate a two-asset position into asset ``target`` (1 or 2).

    ``quotes`` holds per-scenario bid/ask of asset 2 in units of asset 1.
    Long positions are sold at the bid, short positions covered at the ask.
    """
    if payoff.d != 2:
        raise ValidationError("dimension mismatch", f"liquidation needs d = 2, got d = {payoff.d}")
    x1, x2 = payoff.values
    bid = np.broadcast_to(quotes.bid, x1.shape)
    ask = np.broadcast_to(quotes.ask, x1.shape)
    if target == 1:
        return x1 + np.where(x2 >= 0, x2 * bid, x2 * ask)
    if target == 2:
        return x2 + np.where(x1 >= 0, x1 / ask, x1 / bid)
    raise ValueError(f"target must be 1 or 2, got {target}")


def phi_w(payoff: Payoff, model, alpha: AlphaVector, w) -> float:
    """Weighted sum of component-wise scalar AV@Rs over the positive weights."""
    w = np.asarray(w, dtype=float).ravel()
    if w.size != payoff.d:
        raise ValidationError("dimension mismatch", "weight length differs from d")
    if np.any(w < 0) or not np.any(w > 0):
        raise ValueError("weight must be nonnegative and nonzero")
    a = alpha.alpha if isinstance(alpha, AlphaVector) else AlphaVector(alpha).alpha
    return float(sum(w[i] * avar_scalar(payoff.values[i], model, a[i], verify=False)
                     for i in np.flatnonzero(w > 0)))


def componentwise_avar(payoff: Payoff, model, alpha: AlphaVector) -> np.ndarray:
    a = alpha.alpha if isinstance(alpha, AlphaVector) else AlphaVector(alpha).alpha
    return np.array([avar_scalar(payoff.values[i], model, a[i]) for i in range(payoff.d)])
