"""Command-line front end.

Commands: validate, axioms, algebra, ck, circuit, invariance.  Every command
loads a JSON document, runs the corresponding verification, and emits a report
(human-readable by default, canonical JSON with --json).  Exit codes: 0 all
checks passed, 1 at least one check failed, 2 input or usage error.  Reports
are byte-identical across runs for identical inputs and flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import algebra as alg, channel as ch, circuit as circ, qch
from .errors import QCHLabError
from .report import Report, Tolerances, canonical_json

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


def _default_seed() -> int:
    try:
        return int(os.environ.get("QCHLAB_SEED", "0"))
    except ValueError:
        return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qchlab",
        description="Verify graph-channel frameworks, causal-history axioms, "
        "and generated operator algebras.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, seeded: bool = False) -> None:
        p.add_argument("input", help="input JSON file")
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_true", help="print the report as canonical JSON")
        fmt.add_argument("--text", action="store_true", help="print the report as text (default)")
        p.add_argument("--out", help="also write the report (or generated instance) to this path")
        p.add_argument("--tol-eq", type=float, default=1e-10, help="equality tolerance")
        p.add_argument("--tol-derived", type=float, default=1e-8, help="derived-quantity tolerance")
        p.add_argument("--tol-psd", type=float, default=1e-9, help="PSD slack tolerance")
        if seeded:
            p.add_argument("--seed", type=int, default=None, help="PRNG seed (default: QCHLAB_SEED or 0)")

    p_validate = sub.add_parser("validate", help="framework conditions of a QCH instance")
    common(p_validate)

    p_axioms = sub.add_parser("axioms", help="validate + the three causal-history axioms")
    common(p_axioms)
    p_axioms.add_argument("--exhaustive", action="store_true", help="enumerate all complete futures/pasts (<= 12 vertices)")
    p_axioms.add_argument("--parallel", action="store_true", help="run the axiom checks concurrently")

    p_algebra = sub.add_parser("algebra", help="generate the operator algebra of a graph+channels file")
    common(p_algebra, seeded=True)
    p_algebra.add_argument("--blocks", action="store_true", help="also compute the block decomposition")

    p_ck = sub.add_parser("ck", help="check the graph relations of a projection/isometry family")
    common(p_ck)
    p_ck.add_argument("--orthogonal-ranges", action="store_true", help="also require summed ranges dominated per vertex")

    p_circuit = sub.add_parser("circuit", help="build a QCH from a circuit and run the full suite")
    common(p_circuit)

    p_inv = sub.add_parser("invariance", help="Kraus-choice independence of the generated algebra")
    common(p_inv, seeded=True)
    p_inv.add_argument("--trials", type=int, default=50, help="number of random remixings")

    return parser


def _load_json(path: str) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise QCHLabError(f"cannot read {path!r}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise QCHLabError(
            f"malformed JSON in {path!r}: {exc.msg} at line {exc.lineno} column {exc.colno}"
        ) from exc


def _tolerances(args: argparse.Namespace) -> Tolerances:
    try:
        return Tolerances(eq=args.tol_eq, derived=args.tol_derived, psd=args.tol_psd).validate()
    except ValueError as exc:
        raise QCHLabError(str(exc)) from exc


def _emit(report: Report, args: argparse.Namespace, out_payload: dict | None = None) -> int:
    payload = report.to_json()
    if args.json:
        sys.stdout.write(canonical_json(payload) + "\n")
    else:
        for check in report.checks:
            status = "PASS" if check.passed else "FAIL"
            line = f"{status} {check.name} residual={check.residual:.3e} tol={check.tolerance:.3e}"
            if check.code:
                line += f" [{check.code}]"
            sys.stdout.write(line + "\n")
        for key in sorted(report.data):
            sys.stdout.write(f"data {key} = {report.data[key]}\n")
        verdict = "OK" if report.passed else "FAILED"
        sys.stdout.write(f"{report.title}: {verdict} ({len(report.checks)} checks)\n")
    if args.out:
        Path(args.out).write_text(
            canonical_json(out_payload if out_payload is not None else payload) + "\n",
            encoding="utf-8",
        )
    return EXIT_PASS if report.passed else EXIT_FAIL


def _cmd_validate(args: argparse.Namespace) -> int:
    tols = _tolerances(args)
    instance = qch.instance_from_json(_load_json(args.input))
    report = qch.validate_qch(instance, tols)
    report.title = "validate"
    return _emit(report, args)


def _run_axiom_suite(instance: qch.QCHInstance, tols: Tolerances, exhaustive: bool, parallel: bool) -> Report:
    merged = Report(title="axioms")
    validation = qch.validate_qch(instance, tols)
    merged.extend(validation)
    if not validation.passed:
        return merged
    tasks = (
        lambda: qch.check_extension(instance, tols, exhaustive=exhaustive),
        lambda: qch.check_spacelike_commutativity(instance, tols, exhaustive=exhaustive),
        lambda: qch.check_composition(instance, tols, exhaustive=exhaustive),
    )
    if parallel:
        with ThreadPoolExecutor(max_workers=3) as pool:
            results = list(pool.map(lambda f: f(), tasks))
    else:
        results = [f() for f in tasks]
    for sub in results:
        merged.extend(sub)
    return merged


def _cmd_axioms(args: argparse.Namespace) -> int:
    tols = _tolerances(args)
    instance = qch.instance_from_json(_load_json(args.input))
    report = _run_axiom_suite(instance, tols, args.exhaustive, args.parallel)
    return _emit(report, args)


def _cmd_algebra(args: argparse.Namespace) -> int:
    tols = _tolerances(args)
    graph, channels = alg.algebra_input_from_json(_load_json(args.input))
    generated = alg.generate_algebra(graph, channels)
    report = Report(title="algebra")
    total = graph.total_dim()
    report.add_bool("dim-bound", generated.dim <= total * total)
    prod_res, adj_res = alg.closure_residuals(generated)
    report.add("product-closure", prod_res, tols.derived)
    report.add("adjoint-closure", adj_res, tols.derived)
    report.data["dim"] = generated.dim
    report.data["iterations"] = generated.iterations
    report.data["ambient_dim"] = total
    if args.blocks:
        seed = args.seed if args.seed is not None else _default_seed()
        blocks = alg.block_decomposition(generated, seed=seed, tol=tols.derived)
        report.data["blocks"] = [[n, m] for n, m in blocks]
        report.add_bool(
            "wedderburn-dim",
            sum(n * n for n, _ in blocks) == generated.dim,
        )
    return _emit(report, args)


def _cmd_ck(args: argparse.Namespace) -> int:
    tols = _tolerances(args)
    family = alg.ck_family_from_json(_load_json(args.input))
    report = alg.check_ck_family(family, tols.eq, orthogonal_ranges=args.orthogonal_ranges)
    if report.passed:
        channels = alg.ck_to_channels(family, tols.eq)
        report.data["channels"] = {
            eid: {"tp": ch.is_trace_preserving(phi), "unital": ch.is_unital(phi)}
            for eid, phi in sorted(channels.items())
        }
    return _emit(report, args)


def _cmd_circuit(args: argparse.Namespace) -> int:
    tols = _tolerances(args)
    spec = circ.parse_circuit(_load_json(args.input))
    instance = circ.circuit_to_qch(spec)
    report = _run_axiom_suite(instance, tols, exhaustive=False, parallel=False)
    report.title = "circuit"
    report.data["vertices"] = instance.graph.num_vertices
    report.data["edges"] = len(instance.graph.edges)
    report.data["pairs"] = len(instance.complete_pairs)
    return _emit(report, args, out_payload=qch.instance_to_json(instance))


def _cmd_invariance(args: argparse.Namespace) -> int:
    tols = _tolerances(args)
    graph, channels = alg.algebra_input_from_json(_load_json(args.input))
    seed = args.seed if args.seed is not None else _default_seed()
    report = alg.kraus_choice_invariance(
        graph, channels, trials=args.trials, seed=seed, tol=tols.derived
    )
    return _emit(report, args)


_HANDLERS = {
    "validate": _cmd_validate,
    "axioms": _cmd_axioms,
    "algebra": _cmd_algebra,
    "ck": _cmd_ck,
    "circuit": _cmd_circuit,
    "invariance": _cmd_invariance,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except QCHLabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
