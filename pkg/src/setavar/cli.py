"""Command-line interface.

Exit codes: 0 success, 1 unreadable or invalid instance, 2 solver failure.
"""
from __future__ import annotations

import argparse
import itertools
import logging
import sys
from dataclasses import replace

import numpy as np

from .core import DEFAULT_TOL, RiskSet, Tolerances, ValidationError
from .io import InstanceError, LoadedInstance, load_instance, write_result
from .lp import LpNumericalError
from .riskbuild import avar_market, avar_regulator, is_acceptable
from .scalar_risk import BidAskQuote, avar_scalar, componentwise_avar, liquidate, phi_w
from .vlp import VlpError


class _Usage(Exception):
    pass


def _risk_set_dict(rs: RiskSet) -> dict:
    return {
        "status": rs.status,
        "empty": rs.empty_flag,
        "dimension": rs.eligible.d,
        "eligible_basis": rs.eligible.basis_M.T,
        "vertices": rs.vertices,
        "recession": rs.recession,
        "lineality": rs.lineality,
    }


def _preimage_dict(blocks: dict) -> dict:
    return {k: np.asarray(v) for k, v in blocks.items()}


def _write_plot(path: str, rs: RiskSet) -> None:
    """Two-column table of vertices and recession directions (basis_M coordinates)."""
    if rs.eligible.m != 2:
        raise _Usage(f"--plot needs a two-dimensional eligible space, got m={rs.eligible.m}")
    lines = ["# vertices"]
    lines += [f"{a:.12g} {b:.12g}" for a, b in rs.vertex_coords()]
    lines.append("# recession")
    lines += [f"{a:.12g} {b:.12g}" for a, b in rs.recession_coords()]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _summary(rs: RiskSet) -> str:
    head = f"status: {rs.status}; {len(rs.vertices)} vertices, {len(rs.recession)} recession directions"
    rows = [f"  vertex {np.array2string(v, precision=6, suppress_small=True)}" for v in rs.vertices]
    return "\n".join([head] + rows)


def cmd_reg(inst: LoadedInstance, tol: Tolerances, args) -> dict:
    rs = avar_regulator(inst.payoff, inst.model, inst.alpha, inst.eligible, tol)
    print(_summary(rs))
    if args.plot:
        _write_plot(args.plot, rs)
    out = {"command": "reg", "name": inst.name}
    out.update(_risk_set_dict(rs))
    out["problem_size"] = rs.size
    out["preimages"] = [_preimage_dict(b) for b in rs.preimages]
    return out


def cmd_mar(inst: LoadedInstance, tol: Tolerances, args) -> dict:
    if inst.market is None:
        raise _Usage("instance has no market section")
    rs, report = avar_market(inst.payoff, inst.model, inst.alpha, inst.eligible, inst.market, tol)
    print(_summary(rs))
    if args.plot:
        _write_plot(args.plot, rs)
    out = {"command": "mar", "name": inst.name}
    out.update(_risk_set_dict(rs))
    out["problem_size"] = rs.size
    out["strategies"] = [
        {
            "vertex": s.vertex,
            "k0": s.k0,
            "kT": s.kT.T,
            "hedge": s.hedge.values,
            "regulator_vertices": s.regulator.vertices,
            "preimage": _preimage_dict(b),
        }
        for s, b in zip(report, rs.preimages)
    ]
    return out


def cmd_scalar(inst: LoadedInstance, tol: Tolerances, args) -> dict:
    values = componentwise_avar(inst.payoff, inst.model, inst.alpha)
    print("component-wise scalar AV@R:", np.array2string(values, precision=6))
    out = {"command": "scalar", "name": inst.name, "componentwise": values}
    if inst.liquidation_quotes is not None:
        bid, ask = np.array(inst.liquidation_quotes).T
        quotes = BidAskQuote(bid, ask)
        liq = {}
        for target in (1, 2):
            l = liquidate(inst.payoff, quotes, target)
            liq[f"asset{target}"] = {
                "liquidated": l,
                "avar": avar_scalar(l, inst.model, inst.alpha.alpha[target - 1]),
            }
            print(f"liquidated into asset {target}: AV@R = {liq[f'asset{target}']['avar']:.6g}")
        out["liquidation"] = liq
    return out


def _simplex_grid(d: int, g: int) -> np.ndarray:
    pts = [c for c in itertools.product(range(g + 1), repeat=d) if sum(c) == g]
    return np.array(sorted(pts, reverse=True), dtype=float) / g


def cmd_scalarize(inst: LoadedInstance, tol: Tolerances, args) -> str:
    rs = avar_regulator(inst.payoff, inst.model, inst.alpha, inst.eligible, tol)
    d = inst.payoff.d
    header = "\t".join([f"w{i + 1}" for i in range(d)] + ["phi_w", "support"])
    rows = [header]
    worst = 0.0
    for w in _simplex_grid(d, args.grid):
        phi = phi_w(inst.payoff, inst.model, inst.alpha, w)
        sup = rs.support(w)
        if np.isfinite(sup):
            worst = max(worst, abs(phi - sup))
        rows.append("\t".join(f"{v:.12g}" for v in [*w, phi, sup]))
    print(f"{len(rows) - 1} weights; largest |phi_w - support| = {worst:.3g}")
    return "\n".join(rows) + "\n"


def cmd_acceptable(inst: LoadedInstance, tol: Tolerances, args) -> dict:
    ok = is_acceptable(inst.payoff, inst.model, inst.alpha, inst.eligible, inst.market, tol)
    print("acceptable" if ok else "not acceptable")
    return {"command": "acceptable", "name": inst.name, "market": inst.market is not None, "acceptable": ok}


COMMANDS = {
    "reg": (cmd_reg, "regulator risk set"),
    "mar": (cmd_mar, "market-extension risk set with trading strategies"),
    "scalar": (cmd_scalar, "component-wise scalar AV@R and liquidation values"),
    "scalarize": (cmd_scalarize, "weighted scalarization versus support function"),
    "acceptable": (cmd_acceptable, "is the zero deposit sufficient?"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="setavar", description="Set-valued average value at risk")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--instance", required=True, help="instance file (JSON)")
        p.add_argument("--out", help="result file; JSON, or a tab-separated table for scalarize")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL.benson,
                       help="outer approximation tolerance (default %(default)g)")
        if name in ("reg", "mar"):
            p.add_argument("--plot", help="write vertex and ray coordinates (m = 2 only)")
        if name == "scalarize":
            p.add_argument("--grid", type=int, default=10, help="simplex grid resolution")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return 1
    tol = replace(DEFAULT_TOL, benson=args.tol)
    try:
        inst = load_instance(args.instance)
    except OSError as exc:
        print(f"error: cannot read {args.instance}: {exc.strerror}", file=sys.stderr)
        return 1
    except InstanceError as exc:
        print(f"error: {args.instance}: {exc}", file=sys.stderr)
        return 1
    handler = COMMANDS[args.command][0]
    try:
        result = handler(inst, tol, args)
    except (_Usage, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (VlpError, LpNumericalError, RuntimeError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    if args.out:
        if isinstance(result, str):
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(result)
        else:
            write_result(args.out, result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
