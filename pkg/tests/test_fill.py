import random

import pytest

from holeval.dynamics import (
    ApL,
    CastCtx,
    Mark,
    NonEmptyClosureCtx,
    decompose,
    multi_step,
    plug,
    subst,
)
from holeval.elaboration import assign_type, elab_syn
from holeval.fill import (
    FillerIllTyped,
    UnknownHole,
    detect_fill,
    fill,
    fill_ctx,
    fill_env,
    fill_typed,
    in_hole,
    resume,
)
from holeval.statics import syn
from holeval.surface import parse
from holeval.syntax import (
    Ap,
    Arrow,
    BASE,
    Cast,
    Const,
    EmptyClosure,
    EmptyHole,
    Env,
    HOLE,
    HoleContext,
    IAp,
    IConst,
    ILam,
    INumLit,
    IPlus,
    IVar,
    LamAnn,
    NUM,
    NonEmptyClosure,
    NumLit,
    Plus,
    TypingCtx,
    Var,
    alpha_equiv,
)
from helpers import iter_numbered_terms, random_holey_program, random_complete_program

EMPTY = TypingCtx()


def test_fill_applies_recorded_environment():
    target = EmptyClosure("u", Env([("x", IConst())]))
    assert fill(IVar("x"), "u", target) == IConst()


def test_fill_identity_on_unrelated_terms():
    d = IAp(ILam("x", BASE, IVar("x")), IConst())
    assert fill(IConst(), "u", d) == d
    other_hole = EmptyClosure("v", Env())
    assert fill(IConst(), "u", other_hole) == other_hole


def test_fill_discards_nonempty_contents():
    target = NonEmptyClosure(INumLit(5), "u", Env())
    assert fill(IConst(), "u", target) == IConst()


def test_fill_no_binder_condition():
    # the filler's free x refers to the hole's scope: filling under \x does
    # not rename
    target = ILam("x", BASE, EmptyClosure("u", Env([("x", IVar("x"))])))
    got = fill(IVar("x"), "u", target)
    assert got == ILam("x", BASE, IVar("x"))


def test_fill_nested_closure_in_env():
    # filling u inside the environment of another closure
    target = EmptyClosure("v", Env([("x", EmptyClosure("u", Env()))]))
    assert fill(IConst(), "u", target) == EmptyClosure("v", Env([("x", IConst())]))


def test_fill_env_examples():
    assert fill_env(IConst(), "u", Env()) == Env()
    env = Env([("x", EmptyClosure("u", Env()))])
    assert fill_env(IConst(), "u", env) == Env([("x", IConst())])
    unchanged = Env([("x", IConst())])
    assert fill_env(INumLit(1), "u", unchanged) == unchanged


def test_fill_typed_success():
    holes = HoleContext([("u", (EMPTY, BASE))])
    target = EmptyClosure("u", Env())
    filled, rest = fill_typed(holes, "u", IConst(), target)
    assert filled == IConst()
    assert "u" not in rest


def test_fill_typed_wrong_type():
    holes = HoleContext([("u", (EMPTY, BASE))])
    with pytest.raises(FillerIllTyped) as exc:
        fill_typed(holes, "u", INumLit(1), EmptyClosure("u", Env()))
    assert exc.value.expected_ty == BASE


def test_fill_typed_uses_hole_scope():
    ctx = TypingCtx([("x", BASE)])
    holes = HoleContext([("u", (ctx, BASE))])
    target = ILam("x", BASE, EmptyClosure("u", Env([("x", IVar("x"))])))
    filled, _ = fill_typed(holes, "u", IVar("x"), target)
    assert filled == ILam("x", BASE, IVar("x"))


def test_fill_typed_unknown_hole():
    with pytest.raises(UnknownHole):
        fill_typed(HoleContext(), "u", IConst(), IConst())


def test_fill_typed_filler_may_use_remaining_holes():
    holes = HoleContext([("u", (EMPTY, NUM)), ("v", (EMPTY, NUM))])
    filler = IPlus(INumLit(1), EmptyClosure("v", Env()))
    filled, rest = fill_typed(holes, "u", filler, EmptyClosure("u", Env()))
    assert filled == filler
    assert "v" in rest and "u" not in rest


def test_fill_typed_preserves_type():
    # whenever fill_typed succeeds the filled term keeps the original type
    rng = random.Random(3)
    checked = 0
    for _ in range(300):
        prog = random_holey_program(rng)
        if prog is None:
            continue
        r = elab_syn(EMPTY, prog)
        assert r is not None
        (u, (hole_ctx, hole_ty)), = [(u, entry) for u, entry in r.holes.items()]
        filler_src = random_complete_program(rng, depth=2)
        # adapt: generate num fillers directly instead
        filler = INumLit(rng.randrange(100))
        before = assign_type(r.holes, EMPTY, r.expr)
        filled, rest = fill_typed(r.holes, u, filler, r.expr)
        after = assign_type(rest, EMPTY, filled)
        assert before == after == r.ty
        checked += 1
    assert checked > 100


def test_in_hole_examples():
    assert in_hole("u", NonEmptyClosureCtx(Mark(), "u", Env()))
    assert not in_hole("u", Mark())
    assert in_hole("u", ApL(NonEmptyClosureCtx(Mark(), "u", Env()), IConst()))
    assert not in_hole("u", NonEmptyClosureCtx(Mark(), "v", Env()))
    # nested: the mark sits inside u through another hole's closure
    nested = NonEmptyClosureCtx(NonEmptyClosureCtx(Mark(), "u", Env()), "v", Env())
    assert in_hole("u", nested)


def test_fill_ctx_examples():
    assert fill_ctx(IConst(), "u", Mark()) == Mark()
    ctx = ApL(Mark(), EmptyClosure("u", Env()))
    assert fill_ctx(IConst(), "u", ctx) == ApL(Mark(), IConst())
    assert fill_ctx(IConst(), "u", NonEmptyClosureCtx(Mark(), "u", Env())) is None


def test_fill_ctx_totality_dichotomy():
    # fill_ctx is defined exactly when the mark is not inside the hole
    env_u = Env([("x", IVar("x"))])
    contexts = [
        Mark(),
        ApL(Mark(), IConst()),
        NonEmptyClosureCtx(Mark(), "u", env_u),
        NonEmptyClosureCtx(Mark(), "v", env_u),
        CastCtx(NonEmptyClosureCtx(Mark(), "u", env_u), BASE, HOLE),
        NonEmptyClosureCtx(NonEmptyClosureCtx(Mark(), "u", env_u), "v", env_u),
        NonEmptyClosureCtx(NonEmptyClosureCtx(Mark(), "v", env_u), "u", env_u),
    ]
    for ctx in contexts:
        inside = in_hole("u", ctx)
        filled = fill_ctx(IConst(), "u", ctx)
        assert (filled is None) == inside


def test_substitution_commutativity():
    # fill(subst(d2, x, d1)) == subst(fill(d2), x, fill(d1)) for fillers
    # whose free variables are covered by every closure of u
    rng = random.Random(5)
    checked = 0
    for _ in range(300):
        d1 = _closed_term_with_hole(rng)
        d2 = rng.choice([IConst(), INumLit(7), ILam("z", BASE, IVar("z"))])
        filler = rng.choice([IConst(), INumLit(1), IVar("x")])
        lhs = fill(filler, "u", subst(d2, "x", d1))
        rhs = subst(fill(filler, "u", d2), "x", fill(filler, "u", d1))
        assert alpha_equiv(lhs, rhs), (d1, d2, filler)
        checked += 1
    assert checked == 300


def _closed_term_with_hole(rng: random.Random):
    # terms over free variable x with closures of u recording x
    env = Env([("x", IVar("x"))])
    choices = [
        EmptyClosure("u", env),
        IPlus(EmptyClosure("u", env), INumLit(2)),
        IAp(ILam("y", BASE, EmptyClosure("u", Env([("x", IVar("x")), ("y", IVar("y"))]))), IVar("x")),
        NonEmptyClosure(IVar("x"), "u", env),
        ILam("w", BASE, EmptyClosure("u", Env([("x", IVar("x")), ("w", IVar("w"))]))),
    ]
    return rng.choice(choices)


def test_resume_examples():
    holes = HoleContext([("u", (EMPTY, NUM))])
    state = EmptyClosure("u", Env())
    term, tag, steps = resume(state, holes, "u", INumLit(3), 100)
    assert (term, tag) == (INumLit(3), "boxed")

    state2 = IPlus(INumLit(1), Cast(EmptyClosure("u", Env()), NUM, NUM))
    # one cast strip plus one addition after filling
    term2, tag2, steps2 = resume(state2, holes, "u", INumLit(2), 100)
    assert (term2, tag2) == (INumLit(3), "boxed")


def test_resume_agrees_with_fresh_run_small():
    # property at small scale; the full randomized run is acceptance C6
    rng = random.Random(17)
    agreed = 0
    for _ in range(60):
        prog = random_holey_program(rng)
        if prog is None:
            continue
        r = elab_syn(EMPTY, prog)
        (u, _), = list(r.holes.items())
        filler = INumLit(rng.randrange(50))
        state, tag, _ = multi_step(r.expr, 500)
        if tag == "fuel-exhausted":
            continue
        resumed, rtag, _ = resume(state, r.holes, u, filler, 500)
        fresh, ftag, _ = multi_step(fill(filler, u, r.expr), 500)
        if rtag == "fuel-exhausted" or ftag == "fuel-exhausted":
            continue
        assert alpha_equiv(resumed, fresh)
        agreed += 1
    assert agreed > 20


def _reaches(start, goal, cap=8000) -> bool:
    # nondeterministic multi-step reachability (finality premises dropped)
    from helpers import nondet_steps

    if start == goal:
        return True
    seen = {start}
    frontier = [start]
    while frontier:
        t = frontier.pop()
        for succ in nondet_steps(t):
            if succ == goal:
                return True
            if succ not in seen and len(seen) < cap:
                seen.add(succ)
                frontier.append(succ)
    return False


def test_commutativity_filled_trace_reaches_filled_result():
    # if d1 ->* d2 then fill(d1) ->* fill(d2): checked along eager traces of
    # generated programs, at several intermediate states
    from holeval.dynamics import Stepped, step

    rng = random.Random(29)
    checked = 0
    while checked < 25:
        prog = random_holey_program(rng, depth=2)
        if prog is None:
            continue
        r = elab_syn(EMPTY, prog)
        (u, _), = list(r.holes.items())
        filler = INumLit(rng.randrange(20))
        trace = [r.expr]
        term = r.expr
        for _ in range(30):
            out = step(term)
            if not isinstance(out, Stepped):
                break
            term = out.term
            trace.append(term)
        # every prefix of the trace commutes with filling
        for point in {0, len(trace) // 2, len(trace) - 1}:
            assert _reaches(fill(filler, u, trace[0]), fill(filler, u, trace[point])), (
                prog,
                point,
            )
        checked += 1


def test_detect_fill():
    old = parse("1 + ?").expr
    new = parse("1 + 2").expr
    r_old = elab_syn(EMPTY, old)
    r_new = elab_syn(EMPTY, new)
    det = detect_fill(r_old.expr, r_new.expr)
    assert det is not None
    hole, filler = det
    assert hole == "1"
    assert filler == INumLit(2)


def test_detect_fill_rejects_unrelated_edit():
    r_old = elab_syn(EMPTY, parse("1 + ?").expr)
    r_new = elab_syn(EMPTY, parse("2 + ?").expr)
    # the changed subtree is not a hole of the old elaboration
    assert detect_fill(r_old.expr, r_new.expr) is None


def test_detect_fill_requires_single_hole_diff():
    r_old = elab_syn(EMPTY, parse("? + ?").expr)
    r_new = elab_syn(EMPTY, parse("1 + 2").expr)
    assert detect_fill(r_old.expr, r_new.expr) is None
