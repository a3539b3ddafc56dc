"""Shared test machinery: term enumeration, independent oracles, and
type-directed random generators.

The oracles here are deliberately independent of the engine's evaluation
path: a de Bruijn conversion for checking capture-avoiding substitution, an
exhaustive decomposition search for checking the eager evaluator's choice,
and a nondeterministic stepper (finality premises dropped) for
confluence-style checks.
"""

from __future__ import annotations

import random
from typing import Iterator, Optional

from holeval.dynamics import (
    INT64_MAX,
    INT64_MIN,
    is_final,
)
from holeval.statics import ground, ground_match
from holeval.syntax import (
    Ap,
    Arrow,
    Asc,
    BASE,
    Base,
    Case,
    Cast,
    Const,
    EmptyClosure,
    EmptyHole,
    Env,
    ExtExpr,
    FailedCast,
    HOLE,
    Hole,
    Num,
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
)

# ---------------------------------------------------------------------------
# Exhaustive enumeration of external terms by AST size (expression and type
# nodes both count). Structures are shared across roots; hole names are
# assigned per root afterwards.


def enumerate_types(max_size: int) -> dict[int, list[Ty]]:
    by_size: dict[int, list[Ty]] = {s: [] for s in range(1, max_size + 1)}
    if max_size >= 1:
        by_size[1] = [BASE, NUM, HOLE]
    for s in range(2, max_size + 1):
        out = by_size[s]
        for ls in range(1, s - 1):
            rs = s - 1 - ls
            if rs < 1:
                continue
            for left in by_size[ls]:
                for right in by_size[rs]:
                    out.append(Arrow(left, right))
                    out.append(Sum(left, right))
    return by_size


def enumerate_terms(max_size: int) -> dict[int, list[ExtExpr]]:
    """All external terms up to `max_size` over the alphabet
    {c, x, lam, lam-ann, ap, ?, {.}, :, 0, 1, +, inl, inr, case}.

    Hole names are left blank; use `number_holes` before elaborating."""
    types = enumerate_types(max_size - 1) if max_size >= 2 else {}
    by_size: dict[int, list[ExtExpr]] = {s: [] for s in range(1, max_size + 1)}
    if max_size >= 1:
        by_size[1] = [Const(), Var("x"), EmptyHole(""), NumLit(0), NumLit(1)]
    for s in range(2, max_size + 1):
        out = by_size[s]
        for e in by_size[s - 1]:
            out.append(Lam("x", e))
            out.append(NonEmptyHole(e, ""))
            out.append(InL(e))
            out.append(InR(e))
        for ts in range(1, s - 1):
            es = s - 1 - ts
            if es < 1:
                continue
            for t in types.get(ts, []):
                for e in by_size[es]:
                    out.append(LamAnn("x", t, e))
                    out.append(Asc(e, t))
        for ls in range(1, s - 1):
            rs = s - 1 - ls
            if rs < 1:
                continue
            for left in by_size[ls]:
                for right in by_size[rs]:
                    out.append(Ap(left, right))
                    out.append(Plus(left, right))
        for s1 in range(1, s - 2):
            for s2 in range(1, s - 1 - s1):
                s3 = s - 1 - s1 - s2
                if s3 < 1:
                    continue
                for scrut in by_size[s1]:
                    for left in by_size[s2]:
                        for right in by_size[s3]:
                            out.append(Case(scrut, "x", left, "x", right))
    return by_size


def number_holes(e: ExtExpr) -> ExtExpr:
    """Rebuild `e` with holes named 1, 2, ... left to right."""
    counter = [0]

    def walk(e: ExtExpr) -> ExtExpr:
        match e:
            case EmptyHole(_):
                counter[0] += 1
                return EmptyHole(str(counter[0]))
            case NonEmptyHole(body, _):
                body2 = walk(body)
                counter[0] += 1
                return NonEmptyHole(body2, str(counter[0]))
            case Const() | Var() | NumLit():
                return e
            case Lam(x, body):
                return Lam(x, walk(body))
            case LamAnn(x, ann, body):
                return LamAnn(x, ann, walk(body))
            case Ap(f, a):
                return Ap(walk(f), walk(a))
            case Plus(l, r):
                return Plus(walk(l), walk(r))
            case Asc(body, ann):
                return Asc(walk(body), ann)
            case InL(body):
                return InL(walk(body))
            case InR(body):
                return InR(walk(body))
            case Case(scrut, x, left, y, right):
                return Case(walk(scrut), x, walk(left), y, walk(right))
        raise TypeError(f"unexpected node: {e!r}")

    return walk(e)


def iter_numbered_terms(max_size: int) -> Iterator[ExtExpr]:
    by_size = enumerate_terms(max_size)
    for s in range(1, max_size + 1):
        for e in by_size[s]:
            yield number_holes(e)


# ---------------------------------------------------------------------------
# de Bruijn oracle for capture-avoiding substitution


def to_db(d: IntExpr, scope: tuple[str, ...] = ()) -> object:
    """Nameless form: bound variables become indices, free ones keep their
    names. Closure environment domains are labels, not binders."""
    match d:
        case IConst():
            return ("const",)
        case INumLit(n):
            return ("numlit", n)
        case IVar(name):
            for i, x in enumerate(reversed(scope)):
                if x == name:
                    return ("bvar", i)
            return ("fvar", name)
        case ILam(x, ann, body):
            return ("lam", ann, to_db(body, scope + (x,)))
        case IAp(f, a):
            return ("ap", to_db(f, scope), to_db(a, scope))
        case EmptyClosure(u, env):
            return (
                "ehole",
                u,
                frozenset((x, to_db(v, scope)) for x, v in env),
            )
        case NonEmptyClosure(body, u, env):
            return (
                "nehole",
                u,
                to_db(body, scope),
                frozenset((x, to_db(v, scope)) for x, v in env),
            )
        case Cast(body, src, dst):
            return ("cast", to_db(body, scope), src, dst)
        case FailedCast(body, src, dst):
            return ("failedcast", to_db(body, scope), src, dst)
        case IPlus(l, r):
            return ("plus", to_db(l, scope), to_db(r, scope))
        case IInL(other, body):
            return ("inl", other, to_db(body, scope))
        case IInR(other, body):
            return ("inr", other, to_db(body, scope))
        case ICase(scrut, x, left, y, right):
            return (
                "case",
                to_db(scrut, scope),
                to_db(left, scope + (x,)),
                to_db(right, scope + (y,)),
            )
    raise TypeError(f"unexpected node: {d!r}")


def db_replace_fvar(tree: object, name: str, value: object) -> object:
    """Substitute a free variable in a nameless tree (no capture possible)."""
    match tree:
        case ("fvar", x):
            return value if x == name else tree
        case ("const",) | ("numlit", _) | ("bvar", _):
            return tree
        case ("lam", ann, body):
            return ("lam", ann, db_replace_fvar(body, name, value))
        case ("ap", f, a):
            return ("ap", db_replace_fvar(f, name, value), db_replace_fvar(a, name, value))
        case ("ehole", u, env):
            return ("ehole", u, frozenset((x, db_replace_fvar(v, name, value)) for x, v in env))
        case ("nehole", u, body, env):
            return (
                "nehole",
                u,
                db_replace_fvar(body, name, value),
                frozenset((x, db_replace_fvar(v, name, value)) for x, v in env),
            )
        case ("cast", body, src, dst):
            return ("cast", db_replace_fvar(body, name, value), src, dst)
        case ("failedcast", body, src, dst):
            return ("failedcast", db_replace_fvar(body, name, value), src, dst)
        case ("plus", l, r):
            return ("plus", db_replace_fvar(l, name, value), db_replace_fvar(r, name, value))
        case ("inl", other, body):
            return ("inl", other, db_replace_fvar(body, name, value))
        case ("inr", other, body):
            return ("inr", other, db_replace_fvar(body, name, value))
        case ("case", scrut, left, right):
            return (
                "case",
                db_replace_fvar(scrut, name, value),
                db_replace_fvar(left, name, value),
                db_replace_fvar(right, name, value),
            )
    raise TypeError(f"unexpected nameless node: {tree!r}")


# ---------------------------------------------------------------------------
# Nondeterministic stepping (finality premises dropped), test-only


def instr_unbracketed(d: IntExpr) -> list[IntExpr]:
    """All instruction transitions at the root with the bracketed finality
    premises excluded."""
    from holeval.dynamics import subst

    out: list[IntExpr] = []
    match d:
        case IAp(ILam(x, _, body), arg):
            out.append(subst(arg, x, body))
        case IAp(Cast(fun, Arrow(s1, s2) as src, Arrow(t1, t2) as dst), arg) if src != dst:
            out.append(Cast(IAp(fun, Cast(arg, t1, s1)), s2, t2))
    match d:
        case Cast(body, src, dst) if src == dst:
            out.append(body)
        case Cast(Cast(body, src, Hole()), Hole(), dst) if ground(src) and ground(dst):
            if src == dst:
                out.append(body)
            else:
                out.append(FailedCast(body, src, dst))
        case Cast(body, src, Hole()) if (g := ground_match(src)) is not None:
            out.append(Cast(Cast(body, src, g), g, HOLE))
        case Cast(body, Hole(), dst) if (g := ground_match(dst)) is not None:
            out.append(Cast(Cast(body, HOLE, g), g, dst))
        case IPlus(INumLit(a), INumLit(b)):
            total = a + b
            if INT64_MIN <= total <= INT64_MAX:
                out.append(INumLit(total))
        case ICase(IInL(_, payload), x, left, _, _):
            out.append(subst(payload, x, left))
        case ICase(IInR(_, payload), _, _, y, right):
            out.append(subst(payload, y, right))
        case ICase(Cast(scrut, Sum(s1, s2) as src, Sum(t1, t2) as dst), x, left, y, right) if (
            src != dst
        ):
            out.append(
                ICase(
                    scrut,
                    x,
                    subst(Cast(IVar(x), s1, t1), x, left),
                    y,
                    subst(Cast(IVar(y), s2, t2), y, right),
                )
            )
    return out


def nondet_steps(d: IntExpr) -> list[IntExpr]:
    """All successors of `d` under any evaluation-context split, with the
    eager finality premises dropped."""
    out = list(instr_unbracketed(d))
    match d:
        case IAp(f, a):
            out.extend(IAp(f2, a) for f2 in nondet_steps(f))
            out.extend(IAp(f, a2) for a2 in nondet_steps(a))
        case NonEmptyClosure(body, u, env):
            out.extend(NonEmptyClosure(b2, u, env) for b2 in nondet_steps(body))
        case Cast(body, src, dst):
            out.extend(Cast(b2, src, dst) for b2 in nondet_steps(body))
        case FailedCast(body, src, dst):
            out.extend(FailedCast(b2, src, dst) for b2 in nondet_steps(body))
        case IPlus(l, r):
            out.extend(IPlus(l2, r) for l2 in nondet_steps(l))
            out.extend(IPlus(l, r2) for r2 in nondet_steps(r))
        case IInL(other, body):
            out.extend(IInL(other, b2) for b2 in nondet_steps(body))
        case IInR(other, body):
            out.extend(IInR(other, b2) for b2 in nondet_steps(body))
        case ICase(scrut, x, left, y, right):
            out.extend(ICase(s2, x, left, y, right) for s2 in nondet_steps(scrut))
    return out


def reachable_normal_forms(d: IntExpr, limit: int = 10_000) -> set[IntExpr]:
    """Breadth-first exploration of the nondeterministic transition system.

    Raises if the reachable set exceeds `limit` states."""
    seen: set[IntExpr] = set()
    frontier = [d]
    normal: set[IntExpr] = set()
    while frontier:
        term = frontier.pop()
        if term in seen:
            continue
        seen.add(term)
        if len(seen) > limit:
            raise RuntimeError("state space too large")
        succs = nondet_steps(term)
        if not succs:
            normal.add(term)
        else:
            frontier.extend(succs)
    return normal


def exhaustive_decompositions(d: IntExpr) -> list[IntExpr]:
    """Every redex selectable under the eager evaluation-context rules
    (finality premises included); used to check decompose() uniqueness."""
    from holeval.dynamics import instr

    redexes: list[IntExpr] = []
    if instr(d) is not None:
        redexes.append(d)
    match d:
        case IAp(f, a):
            redexes.extend(exhaustive_decompositions(f))
            if is_final(f):
                redexes.extend(exhaustive_decompositions(a))
        case NonEmptyClosure(body, _, _):
            redexes.extend(exhaustive_decompositions(body))
        case Cast(body, _, _) | FailedCast(body, _, _):
            redexes.extend(exhaustive_decompositions(body))
        case IPlus(l, r):
            redexes.extend(exhaustive_decompositions(l))
            if is_final(l):
                redexes.extend(exhaustive_decompositions(r))
        case IInL(_, body) | IInR(_, body):
            redexes.extend(exhaustive_decompositions(body))
        case ICase(scrut, _, _, _, _):
            redexes.extend(exhaustive_decompositions(scrut))
    return redexes


# ---------------------------------------------------------------------------
# Type-directed random generation


COMPLETE_BASE_TYPES = [BASE, NUM]


def random_complete_type(rng: random.Random, depth: int) -> Ty:
    if depth <= 0 or rng.random() < 0.55:
        return rng.choice(COMPLETE_BASE_TYPES)
    if rng.random() < 0.5:
        return Arrow(random_complete_type(rng, depth - 1), random_complete_type(rng, depth - 1))
    return Sum(random_complete_type(rng, depth - 1), random_complete_type(rng, depth - 1))


class _GenState:
    def __init__(self, rng: random.Random, hole_budget: int = 0):
        self.rng = rng
        self.hole_budget = hole_budget
        self.holes_made = 0
        self.fresh = 0

    def fresh_var(self) -> str:
        self.fresh += 1
        return f"v{self.fresh}"


def gen_checked(state: _GenState, ctx: TypingCtx, target: Ty, depth: int) -> ExtExpr:
    """A random external expression that checks against `target`.

    With a hole budget, num-typed positions may become empty holes."""
    rng = state.rng
    if (
        state.hole_budget > state.holes_made
        and target == NUM
        and rng.random() < 0.35
    ):
        state.holes_made += 1
        return EmptyHole(f"h{state.holes_made}")

    candidates = [x for x, t in ctx if t == target]
    if depth <= 0:
        match target:
            case Base():
                return Const()
            case Num():
                if candidates and rng.random() < 0.4:
                    return Var(rng.choice(candidates))
                return NumLit(rng.randrange(0, 10))
            case Arrow(dom, cod):
                x = state.fresh_var()
                return Lam(x, gen_checked(state, ctx.extend(x, dom), cod, 0))
            case Sum(left, right):
                if rng.random() < 0.5:
                    return InL(gen_checked(state, ctx, left, 0))
                return InR(gen_checked(state, ctx, right, 0))
            case _:
                return Const()

    roll = rng.random()
    if candidates and roll < 0.2:
        return Var(rng.choice(candidates))
    if roll < 0.45:
        # application: pick an argument type, synthesize the function
        arg_ty = random_complete_type(rng, 1)
        fun = gen_checked(state, ctx, Arrow(arg_ty, target), depth - 1)
        arg = gen_checked(state, ctx, arg_ty, depth - 1)
        return Ap(Asc(fun, Arrow(arg_ty, target)), arg)
    if roll < 0.6:
        # case analysis on a random sum
        left_ty = random_complete_type(rng, 1)
        right_ty = random_complete_type(rng, 1)
        scrut = gen_checked(state, ctx, Sum(left_ty, right_ty), depth - 1)
        x = state.fresh_var()
        y = state.fresh_var()
        left = gen_checked(state, ctx.extend(x, left_ty), target, depth - 1)
        right = gen_checked(state, ctx.extend(y, right_ty), target, depth - 1)
        return Case(Asc(scrut, Sum(left_ty, right_ty)), x, left, y, right)
    match target:
        case Num():
            if rng.random() < 0.6:
                return Plus(
                    gen_checked(state, ctx, NUM, depth - 1),
                    gen_checked(state, ctx, NUM, depth - 1),
                )
            return NumLit(rng.randrange(0, 10))
        case Base():
            return Const()
        case Arrow(dom, cod):
            x = state.fresh_var()
            body = gen_checked(state, ctx.extend(x, dom), cod, depth - 1)
            return Lam(x, body)
        case Sum(left, right):
            if rng.random() < 0.5:
                return InL(gen_checked(state, ctx, left, depth - 1))
            return InR(gen_checked(state, ctx, right, depth - 1))
    return Const()


def random_complete_program(rng: random.Random, depth: int = 4) -> ExtExpr:
    """A random hole-free program that synthesizes its type."""
    target = random_complete_type(rng, 2)
    state = _GenState(rng)
    body = gen_checked(state, TypingCtx(), target, depth)
    return Asc(body, target)


def random_holey_program(rng: random.Random, depth: int = 3) -> Optional[ExtExpr]:
    """A random num-typed program containing exactly one (num-typed) hole."""
    state = _GenState(rng, hole_budget=1)
    body = gen_checked(state, TypingCtx(), NUM, depth)
    if state.holes_made != 1:
        return None
    return Asc(body, NUM)
