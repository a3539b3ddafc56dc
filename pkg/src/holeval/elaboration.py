"""Elaboration of external expressions into the internal language.

Elaboration inserts casts at applications, ascriptions, additions and case
scrutinees/branches, initializes hole closures with identity environments,
and produces the hole context recording each hole's contextual type.
Identity casts are inserted like any other cast; the dynamics strips them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .statics import consistent, ground, join, matched_arrow, matched_sum, syn
from .syntax import (
    Ap,
    Arrow,
    Asc,
    BASE,
    Case,
    Cast,
    Const,
    EmptyClosure,
    EmptyHole,
    Env,
    ExtExpr,
    FailedCast,
    HOLE,
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
    InL,
    InR,
    IntExpr,
    Lam,
    LamAnn,
    NUM,
    NonEmptyClosure,
    NonEmptyHole,
    NumLit,
    Plus,
    Sum,
    Ty,
    TypingCtx,
    Var,
    identity_env,
)


@dataclass(frozen=True)
class ElabResult:
    expr: IntExpr
    ty: Ty
    holes: HoleContext


def elab_syn(ctx: TypingCtx, e: ExtExpr) -> Optional[ElabResult]:
    """Synthesize a type for `e` and elaborate it; defined iff syn is."""
    match e:
        case Const():
            return ElabResult(IConst(), BASE, HoleContext())
        case Var(name):
            t = ctx.lookup(name)
            if t is None:
                return None
            return ElabResult(IVar(name), t, HoleContext())
        case LamAnn(x, ann, body):
            r = elab_syn(ctx.extend(x, ann), body)
            if r is None:
                return None
            return ElabResult(ILam(x, ann, r.expr), Arrow(ann, r.ty), r.holes)
        case Lam():
            return None
        case Ap(fun, arg):
            t_fun = syn(ctx, fun)
            if t_fun is None:
                return None
            m = matched_arrow(t_fun)
            if m is None:
                return None
            t_in, t_out = m
            rf = elab_ana(ctx, fun, Arrow(t_in, t_out))
            if rf is None:
                return None
            ra = elab_ana(ctx, arg, t_in)
            if ra is None:
                return None
            d_fun, t_fun2, h_fun = rf
            d_arg, t_arg, h_arg = ra
            expr = IAp(Cast(d_fun, t_fun2, Arrow(t_in, t_out)), Cast(d_arg, t_arg, t_in))
            return ElabResult(expr, t_out, h_fun.union(h_arg))
        case EmptyHole(u):
            holes = HoleContext([(u, (ctx, HOLE))])
            return ElabResult(EmptyClosure(u, identity_env(ctx)), HOLE, holes)
        case NonEmptyHole(body, u):
            r = elab_syn(ctx, body)
            if r is None:
                return None
            holes = r.holes.add(u, ctx, HOLE)
            return ElabResult(NonEmptyClosure(r.expr, u, identity_env(ctx)), HOLE, holes)
        case Asc(body, ann):
            r = elab_ana(ctx, body, ann)
            if r is None:
                return None
            d, t, holes = r
            return ElabResult(Cast(d, t, ann), ann, holes)
        case NumLit(n):
            return ElabResult(INumLit(n), NUM, HoleContext())
        case Plus(left, right):
            # casts are inserted on both operands, mirroring applications;
            # without them an operand of hole type would leave the result
            # untypeable in the internal language
            rl = elab_ana(ctx, left, NUM)
            if rl is None:
                return None
            rr = elab_ana(ctx, right, NUM)
            if rr is None:
                return None
            dl, tl, hl = rl
            dr, tr, hr = rr
            expr = IPlus(Cast(dl, tl, NUM), Cast(dr, tr, NUM))
            return ElabResult(expr, NUM, hl.union(hr))
        case InL() | InR() | Case():
            return None
    raise TypeError(f"not an external expression: {e!r}")


def elab_ana(ctx: TypingCtx, e: ExtExpr, t: Ty) -> Optional[tuple[IntExpr, Ty, HoleContext]]:
    """Check `e` against `t` and elaborate; returns the type actually
    assigned to the elaboration, which is consistent with `t`."""
    match e:
        case EmptyHole(u):
            # analyzed holes record the analyzed type, not the hole type
            holes = HoleContext([(u, (ctx, t))])
            return (EmptyClosure(u, identity_env(ctx)), t, holes)
        case NonEmptyHole(body, u):
            r = elab_syn(ctx, body)
            if r is None:
                return None
            holes = r.holes.add(u, ctx, t)
            return (NonEmptyClosure(r.expr, u, identity_env(ctx)), t, holes)
        case Lam(x, body):
            m = matched_arrow(t)
            if m is None:
                return None
            t_in, t_out = m
            r = elab_ana(ctx.extend(x, t_in), body, t_out)
            if r is None:
                return None
            d, t_body, holes = r
            return (ILam(x, t_in, d), Arrow(t_in, t_body), holes)
        case InL(body):
            m = matched_sum(t)
            if m is None:
                return None
            t_left, t_right = m
            r = elab_ana(ctx, body, t_left)
            if r is None:
                return None
            d, t_got, holes = r
            return (IInL(t_right, d), Sum(t_got, t_right), holes)
        case InR(body):
            m = matched_sum(t)
            if m is None:
                return None
            t_left, t_right = m
            r = elab_ana(ctx, body, t_right)
            if r is None:
                return None
            d, t_got, holes = r
            return (IInR(t_left, d), Sum(t_left, t_got), holes)
        case Case(scrut, x, left, y, right):
            rs = elab_syn(ctx, scrut)
            if rs is None:
                return None
            m = matched_sum(rs.ty)
            if m is None:
                return None
            t_left, t_right = m
            rl = elab_ana(ctx.extend(x, t_left), left, t)
            if rl is None:
                return None
            rr = elab_ana(ctx.extend(y, t_right), right, t)
            if rr is None:
                return None
            dl, tl, hl = rl
            dr, tr, hr = rr
            # prefer the join of the branch types; when consistency of the
            # two branches fails (both merely consistent with t), fall back
            # to t itself so every analyzable case elaborates
            t_res = join(tl, tr)
            if t_res is None:
                t_res = t
            expr = ICase(
                Cast(rs.expr, rs.ty, Sum(t_left, t_right)),
                x,
                Cast(dl, tl, t_res),
                y,
                Cast(dr, tr, t_res),
            )
            return (expr, t_res, rs.holes.union(hl).union(hr))
        case _:
            r = elab_syn(ctx, e)
            if r is None:
                return None
            if not consistent(t, r.ty):
                return None
            return (r.expr, r.ty, r.holes)


# ---------------------------------------------------------------------------
# Type assignment for internal expressions


def assign_type(holes: HoleContext, ctx: TypingCtx, d: IntExpr) -> Optional[Ty]:
    """The unique type assigned to `d`, or None if `d` is ill-typed.

    A None result on the output of elaboration or stepping signals an
    engine bug, not a user error.
    """
    match d:
        case IConst():
            return BASE
        case IVar(name):
            return ctx.lookup(name)
        case ILam(x, ann, body):
            t_body = assign_type(holes, ctx.extend(x, ann), body)
            if t_body is None:
                return None
            return Arrow(ann, t_body)
        case IAp(fun, arg):
            t_fun = assign_type(holes, ctx, fun)
            if not isinstance(t_fun, Arrow):
                return None
            t_arg = assign_type(holes, ctx, arg)
            if t_arg != t_fun.dom:
                return None
            return t_fun.cod
        case EmptyClosure(u, env):
            entry = holes.lookup(u)
            if entry is None:
                return None
            hole_ctx, hole_ty = entry
            if not env_typed(holes, ctx, env, hole_ctx):
                return None
            return hole_ty
        case NonEmptyClosure(body, u, env):
            if assign_type(holes, ctx, body) is None:
                return None
            entry = holes.lookup(u)
            if entry is None:
                return None
            hole_ctx, hole_ty = entry
            if not env_typed(holes, ctx, env, hole_ctx):
                return None
            return hole_ty
        case Cast(body, src, dst):
            if assign_type(holes, ctx, body) != src:
                return None
            if not consistent(src, dst):
                return None
            return dst
        case FailedCast(body, src, dst):
            if assign_type(holes, ctx, body) != src:
                return None
            if not (ground(src) and ground(dst) and src != dst):
                return None
            return dst
        case INumLit():
            return NUM
        case IPlus(left, right):
            if assign_type(holes, ctx, left) != NUM:
                return None
            if assign_type(holes, ctx, right) != NUM:
                return None
            return NUM
        case IInL(other, body):
            t_body = assign_type(holes, ctx, body)
            if t_body is None:
                return None
            return Sum(t_body, other)
        case IInR(other, body):
            t_body = assign_type(holes, ctx, body)
            if t_body is None:
                return None
            return Sum(other, t_body)
        case ICase(scrut, x, left, y, right):
            t_scrut = assign_type(holes, ctx, scrut)
            if not isinstance(t_scrut, Sum):
                return None
            t_left = assign_type(holes, ctx.extend(x, t_scrut.left), left)
            if t_left is None:
                return None
            t_right = assign_type(holes, ctx.extend(y, t_scrut.right), right)
            if t_right != t_left:
                return None
            return t_left
    raise TypeError(f"not an internal expression: {d!r}")


def env_typed(holes: HoleContext, ctx: TypingCtx, env: Env, target: TypingCtx) -> bool:
    """Substitution typing: `env` maps exactly the variables of `target`,
    each to a term of the recorded type."""
    if set(env.names()) != set(target.names()):
        return False
    for x, t in target:
        d = env.lookup(x)
        if d is None or assign_type(holes, ctx, d) != t:
            return False
    return True
