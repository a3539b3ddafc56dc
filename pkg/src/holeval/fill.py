"""Hole filling and fill-and-resume.

Filling substitutes an expression for every closure of a hole, applying each
closure's recorded environment to the filler as a simultaneous substitution.
Unlike variable substitution, filling imposes no condition at binders: a
filler may refer to the variables that were in scope at the hole.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .dynamics import (
    ApL,
    ApR,
    CaseCtx,
    CastCtx,
    EvalCtx,
    FailedCastCtx,
    InLCtx,
    InRCtx,
    Mark,
    NonEmptyClosureCtx,
    PlusL,
    PlusR,
    multi_step,
    subst_parallel,
)
from .elaboration import assign_type
from .syntax import (
    Cast,
    EmptyClosure,
    Env,
    FailedCast,
    HoleContext,
    IAp,
    ICase,
    IConst,
    IInL,
    IInR,
    ILam,
    INumLit,
    IPlus,
    IVar,
    IntExpr,
    NonEmptyClosure,
    Ty,
    TypingCtx,
)


def apply_env(env: Env, d: IntExpr) -> IntExpr:
    """Apply an environment to `d` as a simultaneous substitution."""
    return subst_parallel(dict(env.bindings), d)


def fill(filler: IntExpr, u: str, target: IntExpr) -> IntExpr:
    """Fill every closure of hole `u` in `target` with `filler`.

    At a closure for `u`, the recorded environment (itself filled first) is
    applied to the filler; the previous contents of a non-empty closure are
    discarded.
    """
    match target:
        case IConst() | IVar() | INumLit():
            return target
        case ILam(x, ann, body):
            return ILam(x, ann, fill(filler, u, body))
        case IAp(fun, arg):
            return IAp(fill(filler, u, fun), fill(filler, u, arg))
        case EmptyClosure(v, env):
            env2 = fill_env(filler, u, env)
            if v == u:
                return apply_env(env2, filler)
            return EmptyClosure(v, env2)
        case NonEmptyClosure(body, v, env):
            env2 = fill_env(filler, u, env)
            if v == u:
                return apply_env(env2, filler)
            return NonEmptyClosure(fill(filler, u, body), v, env2)
        case Cast(body, src, dst):
            return Cast(fill(filler, u, body), src, dst)
        case FailedCast(body, src, dst):
            return FailedCast(fill(filler, u, body), src, dst)
        case IPlus(left, right):
            return IPlus(fill(filler, u, left), fill(filler, u, right))
        case IInL(other, body):
            return IInL(other, fill(filler, u, body))
        case IInR(other, body):
            return IInR(other, fill(filler, u, body))
        case ICase(scrut, lv, left, rv, right):
            return ICase(
                fill(filler, u, scrut),
                lv,
                fill(filler, u, left),
                rv,
                fill(filler, u, right),
            )
    raise TypeError(f"not an internal expression: {target!r}")


def fill_env(filler: IntExpr, u: str, env: Env) -> Env:
    return env.map_values(lambda d: fill(filler, u, d))


class FillError(Exception):
    pass


@dataclass
class UnknownHole(FillError):
    hole: str

    def __str__(self) -> str:
        return f"unknown hole: {self.hole}"


@dataclass
class FillerIllTyped(FillError):
    hole: str
    expected_ctx: TypingCtx
    expected_ty: Ty
    actual: Optional[Ty]

    def __str__(self) -> str:
        return (
            f"filler for hole {self.hole} must have type {self.expected_ty!r}"
            f" under {self.expected_ctx!r}; got {self.actual!r}"
        )


def fill_typed(
    holes: HoleContext, u: str, filler: IntExpr, target: IntExpr
) -> tuple[IntExpr, HoleContext]:
    """Typechecked filling: the filler must have exactly the contextual type
    recorded for `u`. Returns the filled term and the hole context with `u`
    removed; the filler may mention the remaining holes."""
    entry = holes.lookup(u)
    if entry is None:
        raise UnknownHole(u)
    hole_ctx, hole_ty = entry
    rest = holes.without(u)
    actual = assign_type(rest, hole_ctx, filler)
    if actual != hole_ty:
        raise FillerIllTyped(u, hole_ctx, hole_ty, actual)
    return fill(filler, u, target), rest


def resume(
    state: IntExpr, holes: HoleContext, u: str, filler: IntExpr, fuel: int
) -> tuple[IntExpr, str, int]:
    """Fill hole `u` in an evaluated state and take catch-up steps.

    The recorded closure environments replay the substitutions already
    performed, so the result agrees with re-running the filled program from
    scratch (at observable results)."""
    filled, _ = fill_typed(holes, u, filler, state)
    return multi_step(filled, fuel)


# ---------------------------------------------------------------------------
# Evaluation-context filling


def in_hole(u: str, ctx: EvalCtx) -> bool:
    """Whether the mark in `ctx` sits inside a closure of hole `u`."""
    match ctx:
        case Mark():
            return False
        case NonEmptyClosureCtx(inner, hole, _):
            return hole == u or in_hole(u, inner)
        case ApL(inner, _) | ApR(_, inner):
            return in_hole(u, inner)
        case CastCtx(inner, _, _) | FailedCastCtx(inner, _, _):
            return in_hole(u, inner)
        case PlusL(inner, _) | PlusR(_, inner):
            return in_hole(u, inner)
        case InLCtx(_, inner) | InRCtx(_, inner):
            return in_hole(u, inner)
        case CaseCtx(inner, _, _, _, _):
            return in_hole(u, inner)
    raise TypeError(f"not an evaluation context: {ctx!r}")


def fill_ctx(filler: IntExpr, u: str, ctx: EvalCtx) -> Optional[EvalCtx]:
    """Fill hole `u` throughout an evaluation context.

    Defined exactly when the mark is not inside a closure of `u` (filling
    would discard the marked position otherwise)."""
    match ctx:
        case Mark():
            return Mark()
        case ApL(inner, arg):
            inner2 = fill_ctx(filler, u, inner)
            return None if inner2 is None else ApL(inner2, fill(filler, u, arg))
        case ApR(fun, inner):
            inner2 = fill_ctx(filler, u, inner)
            return None if inner2 is None else ApR(fill(filler, u, fun), inner2)
        case NonEmptyClosureCtx(inner, hole, env):
            if hole == u:
                return None
            inner2 = fill_ctx(filler, u, inner)
            if inner2 is None:
                return None
            return NonEmptyClosureCtx(inner2, hole, fill_env(filler, u, env))
        case CastCtx(inner, src, dst):
            inner2 = fill_ctx(filler, u, inner)
            return None if inner2 is None else CastCtx(inner2, src, dst)
        case FailedCastCtx(inner, src, dst):
            inner2 = fill_ctx(filler, u, inner)
            return None if inner2 is None else FailedCastCtx(inner2, src, dst)
        case PlusL(inner, right):
            inner2 = fill_ctx(filler, u, inner)
            return None if inner2 is None else PlusL(inner2, fill(filler, u, right))
        case PlusR(left, inner):
            inner2 = fill_ctx(filler, u, inner)
            return None if inner2 is None else PlusR(fill(filler, u, left), inner2)
        case InLCtx(other, inner):
            inner2 = fill_ctx(filler, u, inner)
            return None if inner2 is None else InLCtx(other, inner2)
        case InRCtx(other, inner):
            inner2 = fill_ctx(filler, u, inner)
            return None if inner2 is None else InRCtx(other, inner2)
        case CaseCtx(inner, lv, left, rv, right):
            inner2 = fill_ctx(filler, u, inner)
            if inner2 is None:
                return None
            return CaseCtx(
                inner2, lv, fill(filler, u, left), rv, fill(filler, u, right)
            )
    raise TypeError(f"not an evaluation context: {ctx!r}")


def rename_hole(old: str, new: str, target: IntExpr) -> IntExpr:
    """Rename every closure of hole `old` to `new`.

    Hole names are global labels, so this is a plain relabeling (used when a
    re-parsed edit reuses the name of the hole it fills)."""
    match target:
        case IConst() | IVar() | INumLit():
            return target
        case ILam(x, ann, body):
            return ILam(x, ann, rename_hole(old, new, body))
        case IAp(fun, arg):
            return IAp(rename_hole(old, new, fun), rename_hole(old, new, arg))
        case EmptyClosure(v, env):
            return EmptyClosure(
                new if v == old else v, env.map_values(lambda d: rename_hole(old, new, d))
            )
        case NonEmptyClosure(body, v, env):
            return NonEmptyClosure(
                rename_hole(old, new, body),
                new if v == old else v,
                env.map_values(lambda d: rename_hole(old, new, d)),
            )
        case Cast(body, src, dst):
            return Cast(rename_hole(old, new, body), src, dst)
        case FailedCast(body, src, dst):
            return FailedCast(rename_hole(old, new, body), src, dst)
        case IPlus(left, right):
            return IPlus(rename_hole(old, new, left), rename_hole(old, new, right))
        case IInL(other, body):
            return IInL(other, rename_hole(old, new, body))
        case IInR(other, body):
            return IInR(other, rename_hole(old, new, body))
        case ICase(scrut, lv, left, rv, right):
            return ICase(
                rename_hole(old, new, scrut),
                lv,
                rename_hole(old, new, left),
                rv,
                rename_hole(old, new, right),
            )
    raise TypeError(f"not an internal expression: {target!r}")


# ---------------------------------------------------------------------------
# Fill detection between elaborations


def detect_fill(old: IntExpr, new: IntExpr) -> Optional[tuple[str, IntExpr]]:
    """Decide whether `new` is `old` with exactly one hole filled.

    Both arguments are elaborations (closure environments are identity
    substitutions), so a filled hole shows up as a single differing subtree
    rooted at one of `old`'s closures. Returns (hole, filler) on success.
    """
    diffs: list[tuple[str, IntExpr]] = []

    def walk(a: IntExpr, b: IntExpr) -> bool:
        if a == b:
            return True
        match a:
            case EmptyClosure(u, _) | NonEmptyClosure(_, u, _):
                diffs.append((u, b))
                return True
        if type(a) is not type(b):
            return False
        match a, b:
            case ILam(x1, t1, b1), ILam(x2, t2, b2):
                return x1 == x2 and t1 == t2 and walk(b1, b2)
            case IAp(f1, a1), IAp(f2, a2):
                return walk(f1, f2) and walk(a1, a2)
            case Cast(b1, s1, d1), Cast(b2, s2, d2):
                return s1 == s2 and d1 == d2 and walk(b1, b2)
            case FailedCast(b1, s1, d1), FailedCast(b2, s2, d2):
                return s1 == s2 and d1 == d2 and walk(b1, b2)
            case IPlus(l1, r1), IPlus(l2, r2):
                return walk(l1, l2) and walk(r1, r2)
            case IInL(t1, b1), IInL(t2, b2):
                return t1 == t2 and walk(b1, b2)
            case IInR(t1, b1), IInR(t2, b2):
                return t1 == t2 and walk(b1, b2)
            case ICase(s1, x1, l1, y1, r1), ICase(s2, x2, l2, y2, r2):
                return (
                    x1 == x2 and y1 == y2 and walk(s1, s2) and walk(l1, l2) and walk(r1, r2)
                )
        return False

    if not walk(old, new):
        return None
    if len(diffs) != 1:
        return None
    return diffs[0]
