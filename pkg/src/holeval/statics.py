"""Static semantics for external expressions.

Type consistency, matched arrow/sum types, consistent joins, ground types,
and the bidirectional typing judgments (synthesis and analysis).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .syntax import (
    Ap,
    Arrow,
    Asc,
    BASE,
    Base,
    Case,
    Const,
    EmptyHole,
    ExtExpr,
    HOLE,
    Hole,
    InL,
    InR,
    Lam,
    LamAnn,
    NUM,
    NonEmptyHole,
    Num,
    NumLit,
    Plus,
    Span,
    Sum,
    Ty,
    TypingCtx,
    Var,
)


def consistent(t1: Ty, t2: Ty) -> bool:
    """Types are consistent when they agree up to holes.

    Reflexive and symmetric; not transitive (b ~ ? and ? ~ b->b, but
    b is not consistent with b->b).
    """
    match t1, t2:
        case (Hole(), _) | (_, Hole()):
            return True
        case Arrow(d1, c1), Arrow(d2, c2):
            return consistent(d1, d2) and consistent(c1, c2)
        case Sum(l1, r1), Sum(l2, r2):
            return consistent(l1, l2) and consistent(r1, r2)
        case _:
            return t1 == t2


def matched_arrow(t: Ty) -> Optional[tuple[Ty, Ty]]:
    """The arrow type `t` is treated as, if any; holes match ? -> ?."""
    match t:
        case Arrow(dom, cod):
            return (dom, cod)
        case Hole():
            return (HOLE, HOLE)
        case _:
            return None


def matched_sum(t: Ty) -> Optional[tuple[Ty, Ty]]:
    match t:
        case Sum(left, right):
            return (left, right)
        case Hole():
            return (HOLE, HOLE)
        case _:
            return None


def join(t1: Ty, t2: Ty) -> Optional[Ty]:
    """Least-specific common refinement of two consistent types.

    Defined exactly when `t1` and `t2` are consistent; the hole type is the
    identity, and arrows/sums join component-wise.
    """
    match t1, t2:
        case Hole(), _:
            return t2
        case _, Hole():
            return t1
        case Arrow(d1, c1), Arrow(d2, c2):
            dom = join(d1, d2)
            cod = join(c1, c2)
            if dom is None or cod is None:
                return None
            return Arrow(dom, cod)
        case Sum(l1, r1), Sum(l2, r2):
            left = join(l1, l2)
            right = join(r1, r2)
            if left is None or right is None:
                return None
            return Sum(left, right)
        case _:
            return t1 if t1 == t2 else None


GROUND_ARROW = Arrow(HOLE, HOLE)
GROUND_SUM = Sum(HOLE, HOLE)


def ground(t: Ty) -> bool:
    """Ground types: base types and the least-specific arrow/sum types."""
    return t in (BASE, NUM, GROUND_ARROW, GROUND_SUM)


def ground_match(t: Ty) -> Optional[Ty]:
    """The ground type a non-ground constructor type casts through."""
    match t:
        case Arrow(dom, cod) if not (dom == HOLE and cod == HOLE):
            return GROUND_ARROW
        case Sum(left, right) if not (left == HOLE and right == HOLE):
            return GROUND_SUM
        case _:
            return None


# ---------------------------------------------------------------------------
# Bidirectional typing


def syn(ctx: TypingCtx, e: ExtExpr) -> Optional[Ty]:
    """Synthesize a type for `e` under `ctx`; None when ill-typed."""
    match e:
        case Const():
            return BASE
        case Var(name):
            return ctx.lookup(name)
        case LamAnn(x, ann, body):
            t_body = syn(ctx.extend(x, ann), body)
            if t_body is None:
                return None
            return Arrow(ann, t_body)
        case Lam():
            # unannotated lambdas only analyze
            return None
        case Ap(fun, arg):
            t_fun = syn(ctx, fun)
            if t_fun is None:
                return None
            m = matched_arrow(t_fun)
            if m is None:
                return None
            t_in, t_out = m
            if not ana(ctx, arg, t_in):
                return None
            return t_out
        case EmptyHole():
            return HOLE
        case NonEmptyHole(body, _):
            if syn(ctx, body) is None:
                return None
            return HOLE
        case Asc(body, ann):
            if not ana(ctx, body, ann):
                return None
            return ann
        case NumLit():
            return NUM
        case Plus(left, right):
            if ana(ctx, left, NUM) and ana(ctx, right, NUM):
                return NUM
            return None
        case InL() | InR() | Case():
            # injections and case only analyze
            return None
    raise TypeError(f"not an external expression: {e!r}")


def ana(ctx: TypingCtx, e: ExtExpr, t: Ty) -> bool:
    """Check `e` against `t` under `ctx`."""
    match e:
        case Lam(x, body):
            m = matched_arrow(t)
            if m is None:
                return False
            t_in, t_out = m
            return ana(ctx.extend(x, t_in), body, t_out)
        case InL(body):
            m = matched_sum(t)
            if m is None:
                return False
            return ana(ctx, body, m[0])
        case InR(body):
            m = matched_sum(t)
            if m is None:
                return False
            return ana(ctx, body, m[1])
        case Case(scrut, x, left, y, right):
            t_scrut = syn(ctx, scrut)
            if t_scrut is None:
                return False
            m = matched_sum(t_scrut)
            if m is None:
                return False
            return ana(ctx.extend(x, m[0]), left, t) and ana(ctx.extend(y, m[1]), right, t)
        case _:
            # subsumption
            t_syn = syn(ctx, e)
            return t_syn is not None and consistent(t, t_syn)


# ---------------------------------------------------------------------------
# Diagnostics


@dataclass(frozen=True)
class Diagnostic:
    message: str
    rule: str
    span: Optional[Span] = None

    def render(self) -> str:
        if self.span is not None:
            return f"{self.span[0]}-{self.span[1]}: {self.message} [{self.rule}]"
        return f"{self.message} [{self.rule}]"


def _span(e: ExtExpr) -> Optional[Span]:
    return getattr(e, "span", None)


def diagnose_syn(ctx: TypingCtx, e: ExtExpr) -> list[Diagnostic]:
    """Explain why `e` fails to synthesize; empty when it does."""
    if syn(ctx, e) is not None:
        return []
    match e:
        case Var(name):
            return [Diagnostic(f"unbound variable {name}", "var", _span(e))]
        case Lam():
            return [
                Diagnostic(
                    "unannotated function cannot appear where a type must be synthesized",
                    "lam-syn",
                    _span(e),
                )
            ]
        case InL() | InR():
            return [
                Diagnostic(
                    "injection cannot appear where a type must be synthesized",
                    "inject-syn",
                    _span(e),
                )
            ]
        case Case():
            return [
                Diagnostic(
                    "case cannot appear where a type must be synthesized; add an ascription",
                    "case-syn",
                    _span(e),
                )
            ]
        case LamAnn(x, ann, body):
            return diagnose_syn(ctx.extend(x, ann), body)
        case Ap(fun, arg):
            t_fun = syn(ctx, fun)
            if t_fun is None:
                return diagnose_syn(ctx, fun)
            m = matched_arrow(t_fun)
            if m is None:
                return [
                    Diagnostic(
                        "function position does not have a function type",
                        "ap-matched-arrow",
                        _span(fun),
                    )
                ]
            return diagnose_ana(ctx, arg, m[0])
        case NonEmptyHole(body, _):
            return diagnose_syn(ctx, body)
        case Asc(body, ann):
            return diagnose_ana(ctx, body, ann)
        case Plus(left, right):
            if not ana(ctx, left, NUM):
                return diagnose_ana(ctx, left, NUM)
            return diagnose_ana(ctx, right, NUM)
    return [Diagnostic("expression does not synthesize a type", "syn", _span(e))]


def diagnose_ana(ctx: TypingCtx, e: ExtExpr, t: Ty) -> list[Diagnostic]:
    """Explain why `e` fails to check against `t`; empty when it checks."""
    from .surface import print_ty  # local import: avoids a module cycle

    if ana(ctx, e, t):
        return []
    match e:
        case Lam(x, body):
            m = matched_arrow(t)
            if m is None:
                return [
                    Diagnostic(
                        f"function checked against non-function type {print_ty(t)}",
                        "lam-matched-arrow",
                        _span(e),
                    )
                ]
            return diagnose_ana(ctx.extend(x, m[0]), body, m[1])
        case InL(body) | InR(body):
            m = matched_sum(t)
            if m is None:
                return [
                    Diagnostic(
                        f"injection checked against non-sum type {print_ty(t)}",
                        "inject-matched-sum",
                        _span(e),
                    )
                ]
            side = m[0] if isinstance(e, InL) else m[1]
            return diagnose_ana(ctx, body, side)
        case Case(scrut, x, left, y, right):
            t_scrut = syn(ctx, scrut)
            if t_scrut is None:
                return diagnose_syn(ctx, scrut)
            m = matched_sum(t_scrut)
            if m is None:
                return [
                    Diagnostic(
                        f"case scrutinee has non-sum type {print_ty(t_scrut)}",
                        "case-matched-sum",
                        _span(scrut),
                    )
                ]
            left_diags = diagnose_ana(ctx.extend(x, m[0]), left, t)
            if left_diags:
                return left_diags
            return diagnose_ana(ctx.extend(y, m[1]), right, t)
        case _:
            t_syn = syn(ctx, e)
            if t_syn is None:
                return diagnose_syn(ctx, e)
            return [
                Diagnostic(
                    f"expected a type consistent with {print_ty(t)}, found {print_ty(t_syn)}",
                    "inconsistent",
                    _span(e),
                )
            ]
