"""Command-line entry point.

Exit status: 0 on success or a passing verdict, 1 on a failing verdict,
2 on usage or input errors. Tables go to stdout as tab-separated lines;
JSON artifacts and reports go to the paths given by ``--out``/``--report``.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as qio
from .erasure import (
    CodeSubspace,
    KLViolated,
    depolarize_channel,
    kl_recovery,
    reset_channel,
    roundtrip_fidelity,
)
from .errors import QmaskError
from .masker import latin_masker, tilde_masker
from .mols import mols_pair, verify_mols
from .nogo import MaskProblem, optimize_defect, probe_open_question
from .verifier import DEFAULT_TOL, kl_check, marginal_report, universal_masking_check

EXIT_OK, EXIT_FALSE, EXIT_ERROR = 0, 1, 2
FIDELITY_TOL = 1e-8


class UsageError(Exception):
    pass


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not dims or min(dims) < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive")
    return dims


def _emit(rows) -> None:
    for row in rows:
        print("\t".join(str(x) for x in row))


def _write_report(args, manifest: qio.RunManifest, payload: dict) -> None:
    if getattr(args, "report", None):
        manifest.outputs.append(str(args.report))
    if getattr(args, "figure", None):
        manifest.outputs.append(str(args.figure))
    doc = {"manifest": manifest.finish(), **payload}
    if getattr(args, "report", None):
        qio.store(args.report, doc)


# mols


def cmd_mols_gen(args, manifest) -> int:
    supplied = None
    if args.pair:
        manifest.add_input(args.pair)
        supplied = qio.load(args.pair, "pair")
    pair = mols_pair(args.order, supplied)
    if args.out:
        qio.store(args.out, pair.to_dict())
        manifest.outputs.append(str(args.out))
    else:
        sys.stdout.write(qio.dumps(pair.to_dict()))
    return EXIT_OK


def cmd_mols_verify(args, manifest) -> int:
    manifest.add_input(args.pair)
    pair = qio.load(args.pair, "pair")
    ok, witness = verify_mols(pair)
    _emit([("order", pair.order), ("verdict", ok), ("witness", witness or "-")])
    _write_report(args, manifest, {"verdict": ok, "order": pair.order, "witness": witness})
    return EXIT_OK if ok else EXIT_FALSE


# mask


def cmd_mask_build(args, manifest) -> int:
    pair = None
    if args.pair:
        manifest.add_input(args.pair)
        pair = qio.load(args.pair, "pair")
    s = tilde_masker(args.d, pair) if args.tilde else latin_masker(args.d, pair)
    payload = qio.masker_to_dict(s)
    if args.out:
        qio.store(args.out, payload)
        manifest.outputs.append(str(args.out))
    else:
        sys.stdout.write(qio.dumps(payload))
    return EXIT_OK


def cmd_mask_verify(args, manifest) -> int:
    manifest.add_input(args.masker)
    s = qio.load(args.masker, "masker")
    if args.set:
        manifest.add_input(args.set)
        rep = marginal_report(s, qio.load(args.set, "states"), args.tol)
    else:
        rep = universal_masking_check(s, args.tol)
    _emit([("j", "deviation", "pass")])
    _emit((j, f"{dev:.3e}", dev <= args.tol) for j, dev in enumerate(rep.deviations))
    _emit([("verdict", rep.verdict)])
    _write_report(args, manifest, {"report": rep.to_dict()})
    return EXIT_OK if rep.verdict else EXIT_FALSE


# qecc


def _load_code(args, manifest) -> CodeSubspace:
    if args.masker:
        manifest.add_input(args.masker)
        return CodeSubspace.from_masker(qio.load(args.masker, "masker"))
    manifest.add_input(args.code)
    return qio.load(args.code, "code")


def cmd_qecc_check(args, manifest) -> int:
    code = _load_code(args, manifest)
    reports = [kl_check(code, j, args.tol) for j in range(len(code.dims))]
    for rep in reports:
        dj = code.dims[rep.j]
        _emit([(f"# j={rep.j}", "i", "k", "deviation")])
        _emit((rep.j, i, k, f"{rep.deviations[i, k]:.3e}") for i in range(dj) for k in range(dj))
        _emit([(f"# j={rep.j}", "worst", f"{rep.worst:.3e}", "pass" if rep.verdict else "FAIL")])
    verdict = all(r.verdict for r in reports)
    _emit([("verdict", verdict)])
    if args.figure:
        from .plotting import plot_kl

        plot_kl(reports, args.figure)
    _write_report(args, manifest, {"verdict": verdict, "kl": [r.to_dict() for r in reports]})
    return EXIT_OK if verdict else EXIT_FALSE


def cmd_qecc_recover(args, manifest) -> int:
    code = _load_code(args, manifest)
    if not 0 <= args.j < len(code.dims):
        raise UsageError(f"--j must be in 0..{len(code.dims) - 1}")
    build = reset_channel if args.channel == "reset" else depolarize_channel
    ch = build(code.dims, args.j)
    manifest.seeds["sampling"] = args.seed
    try:
        rec = kl_recovery(code, ch, args.tol)
    except KLViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        _write_report(args, manifest, {"verdict": False, "error": str(exc)})
        return EXIT_FALSE
    stats = roundtrip_fidelity(code, ch, rec, args.samples, args.seed)
    verdict = stats.worst >= 1 - FIDELITY_TOL
    _emit([("channel", "j", "samples", "worst", "mean", "verdict")])
    _emit([(args.channel, args.j, stats.samples, f"{stats.worst:.15f}", f"{stats.mean:.15f}", verdict)])
    if args.figure:
        from .plotting import plot_fidelity

        plot_fidelity(stats.values, args.figure, f"{args.channel} on subsystem {args.j}")
    _write_report(
        args,
        manifest,
        {
            "verdict": verdict,
            "channel": args.channel,
            "j": args.j,
            "recovery_kraus": len(rec.kraus),
            "corrected_directions": rec.corrected,
            "fidelity": stats.to_dict(),
        },
    )
    return EXIT_OK if verdict else EXIT_FALSE


# nogo


def _search_output(args, manifest, result) -> int:
    _emit([("restart", "initial", "final", "iterations", "termination")])
    _emit(
        (r.index, f"{r.initial_defect:.6e}", f"{r.final_defect:.6e}", r.iterations, r.reason)
        for r in result.restarts
    )
    _emit([("best_defect", f"{result.best_defect:.6e}"), ("kind", "numerical evidence only")])
    if args.figure:
        from .plotting import plot_search

        plot_search(result, args.figure)
    _write_report(args, manifest, {"search": result.to_dict(with_trajectory=args.trajectory)})
    return EXIT_OK


def cmd_nogo_search(args, manifest) -> int:
    manifest.seeds["search"] = args.seed
    problem = MaskProblem(args.k, args.dims)
    return _search_output(args, manifest, optimize_defect(problem, args.restarts, args.iters, args.seed))


def cmd_nogo_probe(args, manifest) -> int:
    manifest.seeds["search"] = args.seed
    return _search_output(args, manifest, probe_open_question(args.restarts, args.iters, args.seed))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmask", description="Latin-square maskers and one-erasure codes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    groups = parser.add_subparsers(dest="group", required=True)

    def common(p, tol=False, report=True, figure=False):
        if tol:
            p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        if report:
            p.add_argument("--report", type=Path, help="write a JSON report here")
        if figure:
            p.add_argument("--figure", type=Path, help="write a PNG figure here")

    mols = groups.add_parser("mols", help="orthogonal Latin squares").add_subparsers(dest="cmd", required=True)
    p = mols.add_parser("gen", help="construct an orthogonal pair")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--pair", type=Path, help="user-supplied pair to verify and pass through")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_mols_gen)
    p = mols.add_parser("verify", help="check a pair file")
    p.add_argument("--pair", type=Path, required=True)
    common(p)
    p.set_defaults(func=cmd_mols_verify)

    mask = groups.add_parser("mask", help="maskers").add_subparsers(dest="cmd", required=True)
    p = mask.add_parser("build", help="build a Latin-square masker")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--pair", type=Path)
    p.add_argument("--tilde", action="store_true", help="embed C^d into (C^{d+1})^3")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_mask_build)
    p = mask.add_parser("verify", help="check the masking property")
    p.add_argument("--masker", type=Path, required=True)
    p.add_argument("--set", type=Path, help="state-set file; default is the exact all-states test")
    common(p, tol=True)
    p.set_defaults(func=cmd_mask_verify)

    qecc = groups.add_parser("qecc", help="one-erasure codes").add_subparsers(dest="cmd", required=True)
    for name, func, help_ in (
        ("check", cmd_qecc_check, "Knill-Laflamme tables per subsystem"),
        ("recover", cmd_qecc_recover, "simulate erasure and recovery"),
    ):
        p = qecc.add_parser(name, help=help_)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--masker", type=Path)
        src.add_argument("--code", type=Path)
        common(p, tol=True, figure=True)
        p.set_defaults(func=func)
        if name == "recover":
            p.add_argument("--channel", choices=("reset", "depolarize"), required=True)
            p.add_argument("--j", type=int, required=True)
            p.add_argument("--samples", type=int, default=100)
            p.add_argument("--seed", type=int, default=0)

    nogo = groups.add_parser("nogo", help="masker search").add_subparsers(dest="cmd", required=True)
    p = nogo.add_parser("search", help="minimize the masking defect")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--dims", type=_dims, required=True)
    p.set_defaults(func=cmd_nogo_search)
    p2 = nogo.add_parser("probe-d6", help="search C^6 -> (C^6)^3")
    p2.set_defaults(func=cmd_nogo_probe)
    for q, restarts in ((p, 20), (p2, 5)):
        q.add_argument("--restarts", type=int, default=restarts)
        q.add_argument("--iters", type=int, default=2000)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--trajectory", action="store_true", help="include per-iteration defects in the report")
        common(q, figure=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    manifest = qio.RunManifest(["qmask", *argv], __version__)
    try:
        return args.func(args, manifest)
    except (QmaskError, ValueError, OSError, UsageError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
