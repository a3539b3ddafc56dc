"""Command-line interface.

Exit codes: 0 success, 1 static error, 2 fuel exhausted, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

from .dynamics import (
    BoxedValue,
    PlusOverflow,
    ProgressViolation,
    Stepped,
    multi_step,
    step_with_rule,
)
from .elaboration import ElabResult, elab_ana, elab_syn
from .fill import FillerIllTyped, UnknownHole, fill, resume
from .statics import diagnose_syn, syn
from .surface import ParseError, parse, print_ctx, print_holes, print_int, print_ty
from .syntax import Cast, HoleContextError, TypingCtx, alpha_equiv

EXIT_OK = 0
EXIT_STATIC = 1
EXIT_FUEL = 2
EXIT_INTERNAL = 3


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _load(path: str, free_vars_as_holes: bool):
    src = _read(path)
    result = parse(src, free_vars_as_holes=free_vars_as_holes)
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return result.expr


def _elaborate(path: str, free_vars_as_holes: bool) -> Optional[ElabResult]:
    expr = _load(path, free_vars_as_holes)
    elab = elab_syn(TypingCtx(), expr)
    if elab is None:
        for diag in diagnose_syn(TypingCtx(), expr):
            print(f"error: {diag.render()}", file=sys.stderr)
    return elab


def cmd_check(args) -> int:
    expr = _load(args.file, args.free_vars_as_holes)
    ty = syn(TypingCtx(), expr)
    if ty is None:
        for diag in diagnose_syn(TypingCtx(), expr):
            print(f"error: {diag.render()}", file=sys.stderr)
        return EXIT_STATIC
    print(print_ty(ty))
    return EXIT_OK


def cmd_elaborate(args) -> int:
    elab = _elaborate(args.file, args.free_vars_as_holes)
    if elab is None:
        return EXIT_STATIC
    print(print_int(elab.expr))
    rendered = print_holes(elab.holes)
    if rendered:
        print(rendered)
    return EXIT_OK


def cmd_eval(args) -> int:
    elab = _elaborate(args.file, args.free_vars_as_holes)
    if elab is None:
        return EXIT_STATIC
    term = elab.expr
    steps = 0
    while True:
        outcome, rule = step_with_rule(term)
        if not isinstance(outcome, Stepped):
            break
        if steps >= args.fuel:
            print(print_int(term))
            print("outcome: fuel-exhausted")
            print(f"fuel exhausted after {steps} steps", file=sys.stderr)
            return EXIT_FUEL
        term = outcome.term
        steps += 1
        if args.trace:
            print(f"[{rule}] {print_int(term)}")
    tag = "boxed" if isinstance(outcome, BoxedValue) else "indet"
    print(print_int(term))
    print(f"outcome: {tag}")
    return EXIT_OK


def cmd_fill(args) -> int:
    elab = _elaborate(args.file, args.free_vars_as_holes)
    if elab is None:
        return EXIT_STATIC
    entry = elab.holes.lookup(args.hole)
    if entry is None:
        print(f"error: unknown hole {args.hole}", file=sys.stderr)
        return EXIT_STATIC
    hole_ctx, hole_ty = entry
    try:
        frag_parsed = parse(args.fragment, reserved_hole_names=frozenset(elab.holes.names()))
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_STATIC
    frag = elab_ana(hole_ctx, frag_parsed.expr, hole_ty)
    if frag is None:
        print(
            f"error: fragment does not check against {print_ty(hole_ty)}"
            f" under {print_ctx(hole_ctx)}",
            file=sys.stderr,
        )
        return EXIT_STATIC
    filler, frag_ty, frag_holes = frag
    if frag_ty != hole_ty:
        filler = Cast(filler, frag_ty, hole_ty)
    try:
        holes_ext = elab.holes.union(frag_holes)
    except HoleContextError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_STATIC

    state, tag, _ = multi_step(elab.expr, args.fuel)
    if tag == "fuel-exhausted":
        print("fuel exhausted before filling", file=sys.stderr)
        return EXIT_FUEL
    try:
        term, tag, steps = resume(state, holes_ext, args.hole, filler, args.fuel)
    except (UnknownHole, FillerIllTyped) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_STATIC
    print(print_int(term))
    print(f"outcome: {tag}")
    print(f"catch-up steps: {steps}")
    if args.verify:
        fresh_expr = fill(filler, args.hole, elab.expr)
        fresh, fresh_tag, _ = multi_step(fresh_expr, args.fuel)
        if tag == "fuel-exhausted" or fresh_tag == "fuel-exhausted":
            print("verify: inconclusive (fuel exhausted)")
        else:
            agreed = alpha_equiv(term, fresh)
            print(f"verify: {'agreed' if agreed else 'DISAGREED'}")
            if not agreed:
                return EXIT_INTERNAL
    return EXIT_FUEL if tag == "fuel-exhausted" else EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    port = args.port
    if port is None:
        port = int(os.environ.get("PORT", "8000"))
    app = create_app(default_fuel=args.fuel)
    uvicorn.run(app, host=args.host, port=port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="holeval",
        description="Typecheck, elaborate and evaluate programs with typed holes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("file", help="path to a source file")
        p.add_argument(
            "--free-vars-as-holes",
            action="store_true",
            help="replace free variables with holes named after them",
        )

    p_check = sub.add_parser("check", help="synthesize the program's type")
    add_common(p_check)
    p_check.set_defaults(func=cmd_check)

    p_elab = sub.add_parser("elaborate", help="print the internal term and hole context")
    add_common(p_elab)
    p_elab.set_defaults(func=cmd_elaborate)

    p_eval = sub.add_parser("eval", help="evaluate to a final form")
    add_common(p_eval)
    p_eval.add_argument("--fuel", type=int, default=10_000)
    p_eval.add_argument("--trace", action="store_true", help="print each step and its rule")
    p_eval.set_defaults(func=cmd_eval)

    p_fill = sub.add_parser("fill", help="fill a hole and resume evaluation")
    add_common(p_fill)
    p_fill.add_argument("--hole", required=True)
    p_fill.add_argument("--with", dest="fragment", required=True, metavar="FRAGMENT")
    p_fill.add_argument("--fuel", type=int, default=10_000)
    p_fill.add_argument(
        "--verify",
        action="store_true",
        help="also run the filled program from scratch and compare results",
    )
    p_fill.set_defaults(func=cmd_fill)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", type=int, default=None, help="default: $PORT or 8000")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--fuel", type=int, default=10_000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_STATIC
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_STATIC
    except PlusOverflow as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_STATIC
    except RecursionError:
        print("error: program is nested too deeply", file=sys.stderr)
        return EXIT_STATIC
    except ProgressViolation as err:
        print(f"internal invariant violation: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
