"""``crn-certify`` command-line front end.

Exit codes: 0 success or certified, 2 input error, 3 state budget
exceeded, 4 drift violated, 5 inconclusive, 6 simulation hit the event cap.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

import numpy as np

from . import endotactic, export, graph, parser, sim, stability, statespace
from .model import NetworkError, ReactionNetwork, is_first_order

EXIT_OK, EXIT_PARSE, EXIT_BUDGET, EXIT_VIOLATED, EXIT_INCONCLUSIVE, EXIT_EVENT_CAP = 0, 2, 3, 4, 5, 6


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crn-certify", description="Structural and ergodicity analysis of reaction networks.")
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="network in .crn text format")
    common.add_argument("--box", type=int, default=20, help="box size N for {0..N}^d (default 20)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--t-end", type=float, default=1000.0)
    common.add_argument("--replicas", type=int, default=64)
    common.add_argument("--out", help="write output here instead of stdout")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON output")
    fmt.add_argument("--csv", action="store_true", help="CSV output")

    sub.add_parser("analyze", parents=[common], help="structural invariants and endotacticity")
    p = sub.add_parser("certify", parents=[common], help="drift certificate for exponential ergodicity")
    p.add_argument("--v", type=_float_list, help="Lyapunov weights v1,v2,...")
    p.add_argument("--core", type=_int_list, help="reaction indices of a first-order endotactic core")
    p = sub.add_parser("classes", parents=[common], help="communicating classes on the box")
    p.add_argument("--dot", help="also write the class quotient graph as DOT")
    for name in ("simulate", "stationary"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--x0", type=_int_list, help="initial or anchor state (default origin)")
        if name == "simulate":
            p.add_argument("--event-cap", type=int, default=sim.DEFAULT_EVENT_CAP)
    return ap


def _write(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args, net: ReactionNetwork) -> int:
    _write(args, export.emit_certificate("structure", export.structure_payload(net, args.box)))
    return EXIT_OK


def _auto_core(net: ReactionNetwork) -> list[int] | None:
    """Full first-order sub-network if endotactic, else its zero component, else None."""
    fo = [i for i, r in enumerate(net.reactions) if r.molecularity <= 1]
    if not fo:
        return None
    sub = net.subnetwork(fo)
    if endotactic.is_endotactic_first_order(sub):
        return fo
    zi = [fo[i] for i in graph.zero_split(sub).zero_indices]
    if zi and endotactic.is_endotactic_first_order(net.subnetwork(zi)):
        return zi
    return None


def _certify(args, net: ReactionNetwork) -> tuple[stability.DriftVerdict, list[dict[str, str]], str]:
    ladder: list[dict[str, str]] = []
    if not net.reactions:
        return stability.DriftVerdict(stability.INCONCLUSIVE, diagnostics={"reason": "no reactions"}), ladder, "drift"
    if is_first_order(net):
        split = graph.zero_split(net)
        v = args.v
        if v is None:
            flow = stability.net_flow(split.zero_part, split.zero_species)
            v0 = stability.find_lyapunov_vector(flow.A) if split.zero_species else None
            ladder.append({"step": "hurwitz", "status": "yes" if v0 is not None else "no"})
            v = v0 if v0 is not None else [1.0] * net.d
        verdict = stability.verify_drift_linear(net, v)
        ladder.append({"step": "linear", "status": verdict.status})
        return verdict, ladder, "lyapunov"
    core = args.core if args.core is not None else _auto_core(net)
    verdict = None
    if core:
        verdict = stability.verify_drift_sub(net, core, args.v, grid_radius=args.box)
        ladder.append({"step": "sub", "status": verdict.status, "method": verdict.method})
        if verdict.certified:
            return verdict, ladder, "drift"
    else:
        ladder.append({"step": "core", "status": "none found"})
    v = args.v if args.v is not None and len(args.v) == net.d else [1.0] * net.d
    direct = stability.verify_drift_direct(net, v, grid_radius=args.box)
    ladder.append({"step": "direct", "status": direct.status})
    if verdict is None or direct.certified or direct.violated and not verdict.violated:
        return direct, ladder, "drift"
    return verdict, ladder, "drift"


def cmd_certify(args, net: ReactionNetwork) -> int:
    if args.csv:
        if not is_first_order(net):
            raise NetworkError("matrix CSV needs a first-order network")
        split = graph.zero_split(net)
        _write(args, export.matrix_csv(stability.net_flow(split.zero_part, split.zero_species), net.species))
        return EXIT_OK
    verdict, ladder, kind = _certify(args, net)
    _write(args, export.emit_certificate(kind, export.drift_payload(verdict, ladder)))
    return {stability.CERTIFIED: EXIT_OK, stability.VIOLATED: EXIT_VIOLATED}.get(verdict.status, EXIT_INCONCLUSIVE)


def cmd_classes(args, net: ReactionNetwork) -> int:
    box = statespace.Box(args.box, net.d)
    dec = statespace.classes(net, box)
    verdict = statespace.essential_verdict(net, box, dec)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(statespace.quotient_dot(dec))
    _write(args, export.emit_certificate("classes", export.classes_payload(dec, verdict)))
    return EXIT_OK


def _x0(args, net: ReactionNetwork) -> tuple[int, ...]:
    x0 = tuple(args.x0) if args.x0 is not None else (0,) * net.d
    if len(x0) != net.d:
        raise ValueError(f"--x0 needs {net.d} entries")
    return x0


def cmd_simulate(args, net: ReactionNetwork) -> int:
    x0 = _x0(args, net)
    trace = sim.ssa_run(net, x0, args.t_end, args.seed, args.event_cap)
    if args.json:
        finals, terms = [], {}
        for r in range(args.replicas):
            tr = trace if r == 0 else sim.ssa_run(net, x0, args.t_end, args.seed, args.event_cap, replica=r)
            finals.append(tr.final_state)
            terms[tr.termination] = terms.get(tr.termination, 0) + 1
        payload = {
            "seed": args.seed,
            "t_end": args.t_end,
            "x0": list(x0),
            "termination": trace.termination,
            "n_events": trace.n_events,
            "t_final": trace.t_final,
            "final_state": list(trace.final_state),
            "replicas": args.replicas,
            "replica_mean_final_state": np.mean(np.array(finals, dtype=float), axis=0).tolist(),
            "replica_terminations": terms,
        }
        _write(args, export.emit_certificate("sim", payload))
    else:
        _write(args, trace.to_csv())
    return EXIT_EVENT_CAP if trace.termination == sim.EVENT_CAP else EXIT_OK


def _poisson_mean(net: ReactionNetwork) -> np.ndarray | None:
    """Mean c solving A^T c + b = 0 for a first-order weakly reversible network."""
    if not is_first_order(net) or not graph.is_weakly_reversible(net):
        return None
    flow = stability.net_flow(net)
    try:
        c = np.linalg.solve(flow.A.T, -flow.b)
    except np.linalg.LinAlgError:
        return None
    return c if (c > 0).all() else None


def cmd_stationary(args, net: ReactionNetwork) -> int:
    box = statespace.Box(args.box, net.d)
    dist = sim.truncated_stationary(net, box, _x0(args, net))
    if not args.json:
        _write(args, dist.to_csv(net.species))
        return EXIT_OK
    payload = dict(dist.diagnostics)
    payload.update(box=box.cap, mean=dist.mean().tolist())
    c = _poisson_mean(net)
    if c is not None:
        payload["product_poisson_mean"] = c.tolist()
        payload["tv_to_product_poisson"] = sim.tv_distance(dist, sim.poisson_product(c, box))
    _write(args, export.emit_certificate("sim", payload))
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "certify": cmd_certify,
    "classes": cmd_classes,
    "simulate": cmd_simulate,
    "stationary": cmd_stationary,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        net = parser.parse_file(args.file)
    except (OSError, parser.ParseError) as exc:
        print(f"crn-certify: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return COMMANDS[args.command](args, net)
    except statespace.BudgetExceeded as exc:
        print(f"crn-certify: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (NetworkError, ValueError) as exc:
        print(f"crn-certify: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
