"""Dynamic semantics: final-form classification, capture-avoiding
substitution, instruction transitions, evaluation-context decomposition,
stepping, and completeness predicates.

Evaluation is eager and left-to-right. Holes and failed casts are final
(indeterminate) forms: evaluation continues around them and stops only when
the whole term is a boxed value or indeterminate.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .statics import ground, ground_match
from .syntax import (
    Ap,
    Arrow,
    Asc,
    Case,
    Cast,
    Const,
    EmptyClosure,
    EmptyHole,
    Env,
    ExtExpr,
    FailedCast,
    Hole,
    HOLE,
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
    NonEmptyClosure,
    NonEmptyHole,
    NumLit,
    Plus,
    Sum,
    Ty,
    Var,
    free_vars,
    fresh_var,
)

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class PlusOverflow(Exception):
    """Addition left the 64-bit signed range."""


class ProgressViolation(Exception):
    """A well-typed closed term was neither steppable, boxed, nor
    indeterminate; indicates an engine bug."""


# ---------------------------------------------------------------------------
# Final forms


def is_value(d: IntExpr) -> bool:
    match d:
        case IConst() | ILam() | INumLit():
            return True
        case IInL(_, body) | IInR(_, body):
            return is_value(body)
        case _:
            return False


def _is_arrow_cast(d: IntExpr) -> bool:
    return isinstance(d, Cast) and isinstance(d.src, Arrow) and isinstance(d.dst, Arrow)


def _is_sum_cast(d: IntExpr) -> bool:
    return isinstance(d, Cast) and isinstance(d.src, Sum) and isinstance(d.dst, Sum)


def _is_hole_cast(d: IntExpr) -> bool:
    return isinstance(d, Cast) and d.dst == HOLE


def is_boxed_value(d: IntExpr) -> bool:
    if is_value(d):
        return True
    match d:
        case IInL(_, body) | IInR(_, body):
            return is_boxed_value(body)
        case Cast(body, Arrow() as src, Arrow() as dst) if src != dst:
            return is_boxed_value(body)
        case Cast(body, Sum() as src, Sum() as dst) if src != dst:
            return is_boxed_value(body)
        case Cast(body, src, Hole()) if ground(src):
            return is_boxed_value(body)
        case _:
            return False


def is_indet(d: IntExpr) -> bool:
    match d:
        case EmptyClosure():
            return True
        case NonEmptyClosure(body, _, _):
            return is_final(body)
        case IAp(fun, arg):
            # an application whose function could still be unwrapped by the
            # arrow-cast conversion is not yet indeterminate
            return not _is_arrow_cast(fun) and is_indet(fun) and is_final(arg)
        case Cast(body, src, Hole()) if ground(src):
            return is_indet(body)
        case Cast(body, Hole(), dst) if ground(dst):
            return not _is_hole_cast(body) and is_indet(body)
        case Cast(body, Arrow() as src, Arrow() as dst) if src != dst:
            return is_indet(body)
        case Cast(body, Sum() as src, Sum() as dst) if src != dst:
            return is_indet(body)
        case FailedCast(body, src, dst):
            return is_final(body) and ground(src) and ground(dst) and src != dst
        case IPlus(left, right):
            return (is_indet(left) and is_final(right)) or (
                is_final(left) and is_indet(right)
            )
        case IInL(_, body) | IInR(_, body):
            return is_indet(body)
        case ICase(scrut, _, _, _, _):
            if isinstance(scrut, (IInL, IInR)) or _is_sum_cast(scrut):
                return False
            return is_indet(scrut)
        case _:
            return False


def is_final(d: IntExpr) -> bool:
    return is_boxed_value(d) or is_indet(d)


# ---------------------------------------------------------------------------
# Substitution


def subst(value: IntExpr, x: str, target: IntExpr) -> IntExpr:
    """Capture-avoiding substitution of `value` for `x` in `target`.

    Hole closures record the substitution in their environments.
    """
    match target:
        case IConst() | INumLit():
            return target
        case IVar(y):
            return value if y == x else target
        case ILam(y, ann, body):
            if y == x:
                return target
            if y in free_vars(value):
                y2 = fresh_var(free_vars(value) | free_vars(body) | {x, y}, base=y)
                body = subst(IVar(y2), y, body)
                return ILam(y2, ann, subst(value, x, body))
            return ILam(y, ann, subst(value, x, body))
        case IAp(fun, arg):
            return IAp(subst(value, x, fun), subst(value, x, arg))
        case EmptyClosure(u, env):
            return EmptyClosure(u, env.map_values(lambda d: subst(value, x, d)))
        case NonEmptyClosure(body, u, env):
            return NonEmptyClosure(
                subst(value, x, body), u, env.map_values(lambda d: subst(value, x, d))
            )
        case Cast(body, src, dst):
            return Cast(subst(value, x, body), src, dst)
        case FailedCast(body, src, dst):
            return FailedCast(subst(value, x, body), src, dst)
        case IPlus(left, right):
            return IPlus(subst(value, x, left), subst(value, x, right))
        case IInL(other, body):
            return IInL(other, subst(value, x, body))
        case IInR(other, body):
            return IInR(other, subst(value, x, body))
        case ICase(scrut, lv, left, rv, right):
            scrut2 = subst(value, x, scrut)
            lv2, left2 = _subst_branch(value, x, lv, left)
            rv2, right2 = _subst_branch(value, x, rv, right)
            return ICase(scrut2, lv2, left2, rv2, right2)
    raise TypeError(f"not an internal expression: {target!r}")


def _subst_branch(value: IntExpr, x: str, binder: str, body: IntExpr) -> tuple[str, IntExpr]:
    if binder == x:
        return binder, body
    if binder in free_vars(value):
        b2 = fresh_var(free_vars(value) | free_vars(body) | {x, binder}, base=binder)
        body = subst(IVar(b2), binder, body)
        return b2, subst(value, x, body)
    return binder, subst(value, x, body)


def subst_parallel(mapping: dict[str, IntExpr], target: IntExpr) -> IntExpr:
    """Simultaneous capture-avoiding substitution."""
    if not mapping:
        return target
    match target:
        case IConst() | INumLit():
            return target
        case IVar(y):
            return mapping.get(y, target)
        case ILam(y, ann, body):
            inner = {k: v for k, v in mapping.items() if k != y}
            if not inner:
                return target
            used = frozenset().union(*(free_vars(v) for v in inner.values()))
            if y in used:
                y2 = fresh_var(used | free_vars(body) | set(inner), base=y)
                body = subst(IVar(y2), y, body)
                y = y2
            return ILam(y, ann, subst_parallel(inner, body))
        case IAp(fun, arg):
            return IAp(subst_parallel(mapping, fun), subst_parallel(mapping, arg))
        case EmptyClosure(u, env):
            return EmptyClosure(u, env.map_values(lambda d: subst_parallel(mapping, d)))
        case NonEmptyClosure(body, u, env):
            return NonEmptyClosure(
                subst_parallel(mapping, body),
                u,
                env.map_values(lambda d: subst_parallel(mapping, d)),
            )
        case Cast(body, src, dst):
            return Cast(subst_parallel(mapping, body), src, dst)
        case FailedCast(body, src, dst):
            return FailedCast(subst_parallel(mapping, body), src, dst)
        case IPlus(left, right):
            return IPlus(subst_parallel(mapping, left), subst_parallel(mapping, right))
        case IInL(other, body):
            return IInL(other, subst_parallel(mapping, body))
        case IInR(other, body):
            return IInR(other, subst_parallel(mapping, body))
        case ICase(scrut, lv, left, rv, right):
            scrut2 = subst_parallel(mapping, scrut)
            lv2, left2 = _subst_parallel_branch(mapping, lv, left)
            rv2, right2 = _subst_parallel_branch(mapping, rv, right)
            return ICase(scrut2, lv2, left2, rv2, right2)
    raise TypeError(f"not an internal expression: {target!r}")


def _subst_parallel_branch(
    mapping: dict[str, IntExpr], binder: str, body: IntExpr
) -> tuple[str, IntExpr]:
    inner = {k: v for k, v in mapping.items() if k != binder}
    if not inner:
        return binder, body
    used = frozenset().union(*(free_vars(v) for v in inner.values()))
    if binder in used:
        b2 = fresh_var(used | free_vars(body) | set(inner), base=binder)
        body = subst(IVar(b2), binder, body)
        binder = b2
    return binder, subst_parallel(inner, body)


# ---------------------------------------------------------------------------
# Instruction transitions


def instr_with_rule(d: IntExpr) -> Optional[tuple[IntExpr, str]]:
    """The instruction transition applying to `d` at the root, with the name
    of the rule that fired; None when `d` is not a redex."""
    match d:
        case IAp(ILam(x, _, body), arg) if is_final(arg):
            return subst(arg, x, body), "beta"
        case IAp(Cast(fun, Arrow(s1, s2) as src, Arrow(t1, t2) as dst), arg) if (
            src != dst and is_final(fun) and is_final(arg)
        ):
            return Cast(IAp(fun, Cast(arg, t1, s1)), s2, t2), "apply-cast"
        case Cast(body, src, dst) if src == dst and is_final(body):
            return body, "identity-cast"
        case Cast(Cast(body, src, Hole()), Hole(), dst) if (
            ground(src) and ground(dst) and is_final(body)
        ):
            if src == dst:
                return body, "cast-succeed"
            return FailedCast(body, src, dst), "cast-fail"
        case Cast(body, src, Hole()) if is_final(body) and (
            g := ground_match(src)
        ) is not None:
            return Cast(Cast(body, src, g), g, HOLE), "ground-source"
        case Cast(body, Hole(), dst) if is_final(body) and (
            g := ground_match(dst)
        ) is not None:
            return Cast(Cast(body, HOLE, g), g, dst), "ground-target"
        case IPlus(INumLit(a), INumLit(b)):
            total = a + b
            if not (INT64_MIN <= total <= INT64_MAX):
                raise PlusOverflow(f"{a} + {b} is outside the 64-bit signed range")
            return INumLit(total), "add"
        case ICase(IInL(_, payload), x, left, _, _) if is_final(payload):
            return subst(payload, x, left), "case-left"
        case ICase(IInR(_, payload), _, _, y, right) if is_final(payload):
            return subst(payload, y, right), "case-right"
        case ICase(
            Cast(scrut, Sum(s1, s2) as src, Sum(t1, t2) as dst), x, left, y, right
        ) if src != dst and is_final(scrut):
            left2 = subst(Cast(IVar(x), s1, t1), x, left)
            right2 = subst(Cast(IVar(y), s2, t2), y, right)
            return ICase(scrut, x, left2, y, right2), "case-cast"
        case _:
            return None


def instr(d: IntExpr) -> Optional[IntExpr]:
    r = instr_with_rule(d)
    return None if r is None else r[0]


# ---------------------------------------------------------------------------
# Evaluation contexts


class EvalCtx:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Mark(EvalCtx):
    pass


@dataclass(frozen=True, slots=True)
class ApL(EvalCtx):
    ctx: EvalCtx
    arg: IntExpr


@dataclass(frozen=True, slots=True)
class ApR(EvalCtx):
    fun: IntExpr
    ctx: EvalCtx


@dataclass(frozen=True, slots=True)
class NonEmptyClosureCtx(EvalCtx):
    ctx: EvalCtx
    hole: str
    env: Env


@dataclass(frozen=True, slots=True)
class CastCtx(EvalCtx):
    ctx: EvalCtx
    src: Ty
    dst: Ty


@dataclass(frozen=True, slots=True)
class FailedCastCtx(EvalCtx):
    ctx: EvalCtx
    src: Ty
    dst: Ty


@dataclass(frozen=True, slots=True)
class PlusL(EvalCtx):
    ctx: EvalCtx
    right: IntExpr


@dataclass(frozen=True, slots=True)
class PlusR(EvalCtx):
    left: IntExpr
    ctx: EvalCtx


@dataclass(frozen=True, slots=True)
class InLCtx(EvalCtx):
    other: Ty
    ctx: EvalCtx


@dataclass(frozen=True, slots=True)
class InRCtx(EvalCtx):
    other: Ty
    ctx: EvalCtx


@dataclass(frozen=True, slots=True)
class CaseCtx(EvalCtx):
    ctx: EvalCtx
    left_var: str
    left: IntExpr
    right_var: str
    right: IntExpr


def plug(ctx: EvalCtx, d: IntExpr) -> IntExpr:
    """Place `d` at the mark in `ctx`."""
    match ctx:
        case Mark():
            return d
        case ApL(inner, arg):
            return IAp(plug(inner, d), arg)
        case ApR(fun, inner):
            return IAp(fun, plug(inner, d))
        case NonEmptyClosureCtx(inner, hole, env):
            return NonEmptyClosure(plug(inner, d), hole, env)
        case CastCtx(inner, src, dst):
            return Cast(plug(inner, d), src, dst)
        case FailedCastCtx(inner, src, dst):
            return FailedCast(plug(inner, d), src, dst)
        case PlusL(inner, right):
            return IPlus(plug(inner, d), right)
        case PlusR(left, inner):
            return IPlus(left, plug(inner, d))
        case InLCtx(other, inner):
            return IInL(other, plug(inner, d))
        case InRCtx(other, inner):
            return IInR(other, plug(inner, d))
        case CaseCtx(inner, lv, left, rv, right):
            return ICase(plug(inner, d), lv, left, rv, right)
    raise TypeError(f"not an evaluation context: {ctx!r}")


def decompose(d: IntExpr) -> Optional[tuple[EvalCtx, IntExpr]]:
    """Split `d` into an evaluation context and the redex at its mark,
    following the eager left-to-right strategy; None when no redex exists
    (in particular whenever `d` is final)."""

    def wrap(build, sub: IntExpr):
        r = decompose(sub)
        if r is None:
            return None
        ctx, redex = r
        return build(ctx), redex

    match d:
        case IConst() | IVar() | ILam() | INumLit() | EmptyClosure():
            return None
        case IAp(fun, arg):
            if not is_final(fun):
                return wrap(lambda c: ApL(c, arg), fun)
            if not is_final(arg):
                return wrap(lambda c: ApR(fun, c), arg)
        case NonEmptyClosure(body, hole, env):
            if not is_final(body):
                return wrap(lambda c: NonEmptyClosureCtx(c, hole, env), body)
            return None
        case Cast(body, src, dst):
            if not is_final(body):
                return wrap(lambda c: CastCtx(c, src, dst), body)
        case FailedCast(body, src, dst):
            if not is_final(body):
                return wrap(lambda c: FailedCastCtx(c, src, dst), body)
            return None
        case IPlus(left, right):
            if not is_final(left):
                return wrap(lambda c: PlusL(c, right), left)
            if not is_final(right):
                return wrap(lambda c: PlusR(left, c), right)
        case IInL(other, body):
            if not is_final(body):
                return wrap(lambda c: InLCtx(other, c), body)
            return None
        case IInR(other, body):
            if not is_final(body):
                return wrap(lambda c: InRCtx(other, c), body)
            return None
        case ICase(scrut, lv, left, rv, right):
            if not is_final(scrut):
                return wrap(lambda c: CaseCtx(c, lv, left, rv, right), scrut)
    if instr(d) is not None:
        return (Mark(), d)
    return None


# ---------------------------------------------------------------------------
# Stepping


@dataclass(frozen=True)
class Stepped:
    term: IntExpr


@dataclass(frozen=True)
class BoxedValue:
    pass


@dataclass(frozen=True)
class Indeterminate:
    pass


StepOutcome = Stepped | BoxedValue | Indeterminate


def step_with_rule(d: IntExpr) -> tuple[StepOutcome, Optional[str]]:
    r = decompose(d)
    if r is not None:
        ctx, redex = r
        stepped = instr_with_rule(redex)
        if stepped is None:  # decompose only selects accepted redexes
            raise ProgressViolation(f"decomposition selected a non-redex: {redex!r}")
        term, rule = stepped
        return Stepped(plug(ctx, term)), rule
    if is_boxed_value(d):
        return BoxedValue(), None
    if is_indet(d):
        return Indeterminate(), None
    raise ProgressViolation(f"term is neither steppable nor final: {d!r}")


def step(d: IntExpr) -> StepOutcome:
    return step_with_rule(d)[0]


def multi_step(d: IntExpr, fuel: int) -> tuple[IntExpr, str, int]:
    """Step `d` until it is final or `fuel` steps have been taken.

    Returns the last term, an outcome tag ("boxed", "indet" or
    "fuel-exhausted"), and the number of steps taken.
    """
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    steps = 0
    while True:
        outcome = step(d)
        match outcome:
            case BoxedValue():
                return d, "boxed", steps
            case Indeterminate():
                return d, "indet", steps
            case Stepped(term):
                if steps >= fuel:
                    return d, "fuel-exhausted", steps
                d = term
                steps += 1


# ---------------------------------------------------------------------------
# Complete programs


def is_complete_type(t: Ty) -> bool:
    match t:
        case Hole():
            return False
        case Arrow(dom, cod):
            return is_complete_type(dom) and is_complete_type(cod)
        case Sum(left, right):
            return is_complete_type(left) and is_complete_type(right)
        case _:
            return True


def is_complete_ext(e: ExtExpr) -> bool:
    match e:
        case EmptyHole() | NonEmptyHole():
            return False
        case Const() | Var() | NumLit():
            return True
        case LamAnn(_, ann, body):
            return is_complete_type(ann) and is_complete_ext(body)
        case Lam(_, body) | InL(body) | InR(body):
            return is_complete_ext(body)
        case Ap(fun, arg):
            return is_complete_ext(fun) and is_complete_ext(arg)
        case Plus(left, right):
            return is_complete_ext(left) and is_complete_ext(right)
        case Asc(body, ann):
            return is_complete_ext(body) and is_complete_type(ann)
        case Case(scrut, _, left, _, right):
            return is_complete_ext(scrut) and is_complete_ext(left) and is_complete_ext(right)
    raise TypeError(f"not an external expression: {e!r}")


def is_complete_int(d: IntExpr) -> bool:
    match d:
        case EmptyClosure() | NonEmptyClosure() | FailedCast():
            return False
        case IConst() | IVar() | INumLit():
            return True
        case ILam(_, ann, body):
            return is_complete_type(ann) and is_complete_int(body)
        case IAp(fun, arg):
            return is_complete_int(fun) and is_complete_int(arg)
        case Cast(body, src, dst):
            return is_complete_int(body) and is_complete_type(src) and is_complete_type(dst)
        case IPlus(left, right):
            return is_complete_int(left) and is_complete_int(right)
        case IInL(other, body) | IInR(other, body):
            return is_complete_type(other) and is_complete_int(body)
        case ICase(scrut, _, left, _, right):
            return is_complete_int(scrut) and is_complete_int(left) and is_complete_int(right)
    raise TypeError(f"not an internal expression: {d!r}")
