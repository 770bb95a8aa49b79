"""Solvency cones from bid/ask quotes, the outperformance payoff and a
one-period scenario tree."""
from __future__ import annotations

import itertools

import numpy as np

from .core import GeneratedCone, Payoff, ScenarioModel, ValidationError
from .scalar_risk import BidAskQuote


def _with_positive_orthant(cols: list[np.ndarray], d: int) -> GeneratedCone:
    cone = GeneratedCone(np.column_stack(cols))
    missing = [e for e in np.eye(d) if not cone.contains(e)]
    if missing:
        cone = GeneratedCone(np.column_stack(cols + missing))
    return cone


def solvency_cone_cash_numeraire(quotes: BidAskQuote, numeraire=None) -> GeneratedCone:
    """Solvency cone for asset 1 (cash or bond) plus risky assets 2..d.

    ``quotes`` are the bid/ask prices of assets 2..d in cash.  ``numeraire``
    is ``None`` (asset 1 is cash), a float (frictionless asset-1 price, e.g. a
    discounted bond) or a one-asset ``BidAskQuote`` for an asset 1 with its own
    spread.  Exchanges between risky assets go through cash.

    Without an asset-1 spread the cone has the 2(d-1) generators
    ``ask_i e1 - s1 e_i`` and ``-bid_i e1 + s1 e_i``.  With a spread every
    ordered pair (i, j) contributes ``(ask_i / bid_j) e_j - e_i``: d(d-1)
    generators.  Unit vectors are appended only if a zero spread leaves part
    of the positive orthant uncovered.
    """
    bid = quotes.bid
    ask = quotes.ask
    d = bid.size + 1
    if isinstance(numeraire, BidAskQuote) and numeraire.bid[0] == numeraire.ask[0]:
        numeraire = float(numeraire.bid[0])
    if numeraire is None or np.isscalar(numeraire):
        s1 = 1.0 if numeraire is None else float(numeraire)
        if s1 <= 0:
            raise ValidationError("positive prices", f"asset-1 price must be positive, got {s1}")
        cols = []
        for k in range(d - 1):
            buy = np.zeros(d)
            buy[0], buy[k + 1] = ask[k], -s1
            sell = np.zeros(d)
            sell[0], sell[k + 1] = -bid[k], s1
            cols += [buy, sell]
        return _with_positive_orthant(cols, d)

    all_bid = np.concatenate([numeraire.bid[:1], bid])
    all_ask = np.concatenate([numeraire.ask[:1], ask])
    cols = []
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            g = np.zeros(d)
            g[j] = all_ask[i] / all_bid[j]
            g[i] = -1.0
            cols.append(g)
    return _with_positive_orthant(cols, d)


def outperformance_payoff(ask0, askT, strike: float) -> Payoff:
    """Physically settled option on the best performer of assets 2..d.

    ``ask0`` holds the time-0 asks of assets 2..d, ``askT`` the terminal asks
    (one row per scenario).  Asset ``i`` is scaled by ``c_i = ask0[0] / ask0[i]``;
    if the largest scaled terminal ask reaches ``strike``, the holder pays
    ``strike`` in asset 1 and receives ``c_i`` units of the lowest-index
    best performer, otherwise nothing happens.
    """
    ask0 = np.asarray(ask0, dtype=float).ravel()
    askT = np.atleast_2d(np.asarray(askT, dtype=float))
    if ask0.size < 2:
        raise ValidationError("dimension mismatch", "the option needs at least two risky assets (d >= 3)")
    if np.any(ask0 <= 0) or np.any(askT <= 0):
        raise ValidationError("positive prices", "ask prices must be positive")
    if askT.shape[1] != ask0.size:
        raise ValidationError("dimension mismatch", "terminal asks must have one column per risky asset")
    c = ask0[0] / ask0
    d = ask0.size + 1
    N = askT.shape[0]
    values = np.zeros((d, N))
    for n in range(N):
        scaled = c * askT[n]
        best = scaled.max()
        if best >= strike:
            i = int(np.flatnonzero(scaled == best)[0])
            values[0, n] = -strike
            values[i + 1, n] = c[i]
    return Payoff(values)


def generate_one_period_tree(spot, drift, covariance, horizon: float = 1.0):
    """Full-factorial binomial tree with decoupled +/-1 shocks.

    Log-price increments are ``(mu - diag(Sigma)/2) h + sqrt(h) L eps`` with
    ``L`` the lower Cholesky factor of ``Sigma`` and ``eps`` ranging over
    ``{+1, -1}^k``.  Returns the equiprobable ``ScenarioModel`` and the terminal
    prices (one row per scenario).
    """
    spot = np.asarray(spot, dtype=float).ravel()
    mu = np.asarray(drift, dtype=float).ravel()
    cov = np.atleast_2d(np.asarray(covariance, dtype=float))
    k = spot.size
    if mu.size != k or cov.shape != (k, k):
        raise ValidationError("dimension mismatch", "drift and covariance must match the number of assets")
    if not np.allclose(cov, cov.T, atol=1e-14):
        raise ValidationError("non-PD covariance", "covariance is not symmetric")
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ValidationError("non-PD covariance", "covariance is not positive definite") from exc
    shocks = np.array(list(itertools.product((1.0, -1.0), repeat=k)))
    increments = (mu - 0.5 * np.diag(cov)) * horizon + np.sqrt(horizon) * shocks @ L.T
    prices = spot * np.exp(increments)
    return ScenarioModel.uniform(shocks.shape[0]), prices


def log_increments(spot, prices) -> np.ndarray:
    return np.log(np.asarray(prices) / np.asarray(spot))


def tree_market(spot, drift, covariance, spread, horizon: float = 1.0,
                numeraire0: float = 1.0, numeraireT: float = 1.0, numeraire_spread: float = 0.0):
    """Scenario model, terminal mid prices and solvency cones on a generated tree.

    Risky bid/ask prices are ``S (1 -/+ spread)``; the numeraire (asset 1) has
    price ``numeraire0`` at time 0 and ``numeraireT`` at the horizon, with an
    optional proportional spread of its own.
    """
    model, prices = generate_one_period_tree(spot, drift, covariance, horizon)
    spread = np.asarray(spread, dtype=float)

    def numeraire(price):
        if numeraire_spread > 0:
            return BidAskQuote.proportional([price], [numeraire_spread])
        return price

    k0 = solvency_cone_cash_numeraire(BidAskQuote.proportional(spot, spread), numeraire(numeraire0))
    kT = tuple(solvency_cone_cash_numeraire(BidAskQuote.proportional(row, spread), numeraire(numeraireT))
               for row in prices)
    return model, prices, k0, kT
