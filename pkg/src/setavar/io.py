"""JSON instance files and deterministic result files.

An instance file is one JSON object::

    {
      "name": "two assets, two scenarios",
      "probabilities": [0.4, 0.6],            # or "uniform": N, or a "tree"
      "payoff": [[12, 4], [-20, -6]],         # one row per asset
      "alpha": [0.01, 0.02],
      "eligible": {"basis": [[1, 0], [0, 1]]},  # rows are basis vectors of M
      "market": {                              # optional
        "k0": {"bid": [0.72], "ask": [1.0]},
        "kT": [{"bid": [0.75], "ask": [1.11]}, {"generators": [[0.9, -1], [-0.7, 1]]}]
      }
    }

``eligible`` may instead be ``{"coordinate": m}`` (first m assets) and
defaults to all of R^d.  A cone is given either by generator rows or by
``bid``/``ask`` of assets 2..d with an optional ``numeraire`` (a price or a
``{"bid": b, "ask": a}`` pair for asset 1).

Generated instances use a ``tree`` section (``spot``, ``drift``,
``covariance``, ``horizon``) in place of probabilities; the payoff may then
be ``{"outperformance": {"strike": K}}`` and the market
``{"from_tree": {"spread": [...], "numeraire0": ..., "numeraireT": ...,
"numeraire_spread": ..., "scenarios": [...]}}``.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass

import numpy as np

from .core import AlphaVector, EligibleSpace, GeneratedCone, Payoff, ScenarioModel, ValidationError
from .market import generate_one_period_tree, outperformance_payoff, solvency_cone_cash_numeraire
from .riskbuild import MarketInstance
from .scalar_risk import BidAskQuote


class InstanceError(ValueError):
    """Problem in an instance file, with the line it was traced to."""

    def __init__(self, message: str, line: int | None = None, invariant: str | None = None):
        where = f"line {line}: " if line else ""
        super().__init__(f"{where}{message}")
        self.line = line
        self.invariant = invariant


@dataclass(frozen=True, eq=False)
class LoadedInstance:
    name: str
    model: ScenarioModel
    payoff: Payoff
    alpha: AlphaVector
    eligible: EligibleSpace
    market: MarketInstance | None = None
    liquidation_quotes: tuple | None = None   # per-scenario (bid, ask) when d = 2


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _cone(spec, d: int) -> GeneratedCone:
    if "generators" in spec:
        return GeneratedCone.from_rows(spec["generators"])
    quotes = BidAskQuote(spec["bid"], spec["ask"])
    if quotes.bid.size != d - 1:
        raise ValidationError("dimension mismatch", f"quotes cover {quotes.bid.size} assets, expected {d - 1}")
    num = spec.get("numeraire")
    if isinstance(num, dict):
        num = BidAskQuote([num["bid"]], [num["ask"]])
    return solvency_cone_cash_numeraire(quotes, num)


def parse_instance(text: str) -> LoadedInstance:
    """Parse and validate an instance document.

    Raises
    ------
    InstanceError
        On malformed JSON, missing keys or violated invariants; the message
        carries the line of the offending section when it can be located.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc.msg}", exc.lineno) from exc
    if not isinstance(doc, dict):
        raise InstanceError("instance must be a JSON object", 1)

    section = "probabilities"
    try:
        prices = None
        tree = doc.get("tree")
        if tree is not None:
            section = "tree"
            model, prices = generate_one_period_tree(tree["spot"], tree["drift"], tree["covariance"],
                                                     tree.get("horizon", 1.0))
        # explicit probabilities take precedence over the tree's
        if "uniform" in doc:
            section = "uniform"
            model = ScenarioModel.uniform(int(doc["uniform"]))
        elif "probabilities" in doc or tree is None:
            section = "probabilities"
            model = ScenarioModel(doc["probabilities"])

        section = "payoff"
        pay = doc["payoff"]
        if isinstance(pay, dict):
            opt = pay["outperformance"]
            if prices is None:
                raise ValidationError("dimension mismatch", "an outperformance payoff needs a tree section")
            spread = np.asarray(opt.get("spread", doc.get("market", {}).get("from_tree", {}).get("spread", 0.0)))
            spot = np.asarray(tree["spot"], dtype=float)
            payoff = outperformance_payoff(spot * (1 + spread), prices * (1 + spread), opt["strike"])
        else:
            payoff = Payoff(pay)

        section = "alpha"
        alpha = AlphaVector(doc["alpha"])
        d = payoff.d

        section = "eligible"
        el = doc.get("eligible")
        if el is None:
            eligible = EligibleSpace.full(d)
        elif "coordinate" in el:
            eligible = EligibleSpace.coordinate(d, int(el["coordinate"]))
        else:
            comp = el.get("complement")
            eligible = EligibleSpace(np.array(el["basis"], dtype=float).T,
                                     None if comp is None else np.array(comp, dtype=float).T)

        section = "market"
        market = None
        liquidation = None
        mk = doc.get("market")
        if mk is not None:
            if "from_tree" in mk:
                ft = mk["from_tree"]
                if prices is None:
                    raise ValidationError("dimension mismatch", "from_tree needs a tree section")
                spread = np.asarray(ft["spread"], dtype=float)
                ns = float(ft.get("numeraire_spread", 0.0))

                def num(price):
                    return BidAskQuote.proportional([price], [ns]) if ns > 0 else price

                k0 = solvency_cone_cash_numeraire(BidAskQuote.proportional(tree["spot"], spread),
                                                  num(ft.get("numeraire0", 1.0)))
                rows = prices if "scenarios" not in ft else prices[np.asarray(ft["scenarios"], dtype=int)]
                kT = [solvency_cone_cash_numeraire(BidAskQuote.proportional(r, spread),
                                                   num(ft.get("numeraireT", 1.0))) for r in rows]
            else:
                k0 = _cone(mk["k0"], d)
                kT = [_cone(c, d) for c in mk["kT"]]
                if d == 2 and all("bid" in c and "numeraire" not in c for c in mk["kT"]):
                    liquidation = tuple((c["bid"][0], c["ask"][0]) for c in mk["kT"])
            g = mk.get("k0_in_M")
            market = MarketInstance(k0, kT, None if g is None else GeneratedCone.from_rows(g))
            if len(market.kT) != payoff.n_scenarios:
                raise ValidationError("dimension mismatch",
                                      f"{len(market.kT)} terminal cones for {payoff.n_scenarios} scenarios")
            if market.d != d:
                raise ValidationError("dimension mismatch", f"market has d={market.d}, payoff has d={d}")

        if payoff.n_scenarios != model.n_scenarios:
            section = "payoff"
            raise ValidationError("dimension mismatch",
                                  f"payoff has {payoff.n_scenarios} scenarios, model has {model.n_scenarios}")
        if alpha.d != d:
            section = "alpha"
            raise ValidationError("dimension mismatch", f"alpha has {alpha.d} levels for d={d}")
        if eligible.d != d:
            section = "eligible"
            raise ValidationError("dimension mismatch", f"eligible space lives in R^{eligible.d}, payoff in R^{d}")
    except ValidationError as exc:
        raise InstanceError(str(exc), _line_of(text, section), exc.invariant) from exc
    except KeyError as exc:
        raise InstanceError(f"missing key {exc.args[0]!r} in section {section!r}", _line_of(text, section)) from exc
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"bad value in section {section!r}: {exc}", _line_of(text, section)) from exc

    return LoadedInstance(str(doc.get("name", "")), model, payoff, alpha, eligible, market, liquidation)


def load_instance(path) -> LoadedInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def _clean(obj):
    """Round floats to 12 significant digits, recursively."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not np.isfinite(x):
            return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
        return float(f"{x:.12g}") + 0.0
    return obj


_INNER = re.compile(r"\[[^\[\]{}]*\]")


def dumps_result(result: dict) -> str:
    text = json.dumps(_clean(result), indent=2)
    # innermost arrays on one line
    text = _INNER.sub(lambda m: "[" + ", ".join(t.strip() for t in m.group(0)[1:-1].split(",") if t.strip()) + "]",
                      text)
    return text + "\n"


def write_result(path, result: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_result(result))
