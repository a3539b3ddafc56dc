"""Term languages: types, external (source) expressions, internal (runtime)
expressions, typing contexts, hole contexts, and environments.

All values here are immutable; structural equality is the notion of equality
used throughout the engine, except where alpha equivalence is explicitly
requested via :func:`alpha_equiv`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union


# ---------------------------------------------------------------------------
# Types


class Ty:
    """Base class for the type language."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Base(Ty):
    pass


@dataclass(frozen=True, slots=True)
class Num(Ty):
    pass


@dataclass(frozen=True, slots=True)
class Hole(Ty):
    """The unknown type; consistent with every type."""


@dataclass(frozen=True, slots=True)
class Arrow(Ty):
    dom: Ty
    cod: Ty


@dataclass(frozen=True, slots=True)
class Sum(Ty):
    left: Ty
    right: Ty


BASE = Base()
NUM = Num()
HOLE = Hole()


# ---------------------------------------------------------------------------
# External expressions (what the programmer writes)

# Source spans are attached for diagnostics but never participate in
# structural equality.
Span = tuple[int, int]


class ExtExpr:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Const(ExtExpr):
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Var(ExtExpr):
    name: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Lam(ExtExpr):
    """Unannotated lambda; only checks against arrow-like types."""

    var: str
    body: ExtExpr
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class LamAnn(ExtExpr):
    var: str
    ann: Ty
    body: ExtExpr
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Ap(ExtExpr):
    fun: ExtExpr
    arg: ExtExpr
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class EmptyHole(ExtExpr):
    name: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class NonEmptyHole(ExtExpr):
    """A membrane around an expression that did not check where it appears."""

    body: ExtExpr
    name: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Asc(ExtExpr):
    body: ExtExpr
    ann: Ty
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class NumLit(ExtExpr):
    value: int
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Plus(ExtExpr):
    left: ExtExpr
    right: ExtExpr
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class InL(ExtExpr):
    body: ExtExpr
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class InR(ExtExpr):
    body: ExtExpr
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Case(ExtExpr):
    scrut: ExtExpr
    left_var: str
    left: ExtExpr
    right_var: str
    right: ExtExpr
    span: Optional[Span] = field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------------------
# Internal expressions (the runtime language: closures and casts)


class IntExpr:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class IConst(IntExpr):
    pass


@dataclass(frozen=True, slots=True)
class IVar(IntExpr):
    name: str


@dataclass(frozen=True, slots=True)
class ILam(IntExpr):
    """Internal lambdas are always annotated."""

    var: str
    ann: Ty
    body: IntExpr


@dataclass(frozen=True, slots=True)
class IAp(IntExpr):
    fun: IntExpr
    arg: IntExpr


@dataclass(frozen=True, slots=True)
class EmptyClosure(IntExpr):
    """An empty hole paired with the substitutions recorded around it."""

    hole: str
    env: "Env"


@dataclass(frozen=True, slots=True)
class NonEmptyClosure(IntExpr):
    body: IntExpr
    hole: str
    env: "Env"


@dataclass(frozen=True, slots=True)
class Cast(IntExpr):
    body: IntExpr
    src: Ty
    dst: Ty


@dataclass(frozen=True, slots=True)
class FailedCast(IntExpr):
    """A cast between unequal ground types that did not succeed.

    Behaves as an indeterminate form; evaluation continues around it.
    """

    body: IntExpr
    src: Ty
    dst: Ty


@dataclass(frozen=True, slots=True)
class INumLit(IntExpr):
    value: int


@dataclass(frozen=True, slots=True)
class IPlus(IntExpr):
    left: IntExpr
    right: IntExpr


@dataclass(frozen=True, slots=True)
class IInL(IntExpr):
    # `other` is the right component of the sum this injection inhabits
    other: Ty
    body: IntExpr


@dataclass(frozen=True, slots=True)
class IInR(IntExpr):
    # `other` is the left component of the sum this injection inhabits
    other: Ty
    body: IntExpr


@dataclass(frozen=True, slots=True)
class ICase(IntExpr):
    scrut: IntExpr
    left_var: str
    left: IntExpr
    right_var: str
    right: IntExpr


# ---------------------------------------------------------------------------
# Environments (finite substitutions recorded on hole closures)


class Env:
    """A finite map from variables to internal expressions.

    Insertion order is preserved for display purposes; equality and hashing
    treat the environment as an unordered map.
    """

    __slots__ = ("_bindings", "_hash")

    def __init__(self, bindings: Iterable[tuple[str, IntExpr]] = ()):
        pairs = tuple(bindings)
        names = [x for x, _ in pairs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variables in environment: {names}")
        object.__setattr__(self, "_bindings", pairs)
        object.__setattr__(self, "_hash", None)

    @property
    def bindings(self) -> tuple[tuple[str, IntExpr], ...]:
        return self._bindings

    def names(self) -> tuple[str, ...]:
        return tuple(x for x, _ in self._bindings)

    def lookup(self, name: str) -> Optional[IntExpr]:
        for x, d in self._bindings:
            if x == name:
                return d
        return None

    def map_values(self, f) -> "Env":
        return Env((x, f(d)) for x, d in self._bindings)

    def __iter__(self) -> Iterator[tuple[str, IntExpr]]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Env):
            return NotImplemented
        return dict(self._bindings) == dict(other._bindings)

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash(frozenset(self._bindings))
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self) -> str:
        inner = ", ".join(f"{d!r}/{x}" for x, d in self._bindings)
        return f"Env([{inner}])"


# ---------------------------------------------------------------------------
# Typing contexts and hole contexts


class TypingCtx:
    """An ordered map from variables to types.

    Extension shadows: rebinding a variable drops its old entry and appends
    the new one, so the domain stays distinct and display order tracks the
    most recent binding site.
    """

    __slots__ = ("_bindings",)

    def __init__(self, bindings: Iterable[tuple[str, Ty]] = ()):
        pairs = tuple(bindings)
        names = [x for x, _ in pairs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variables in context: {names}")
        self._bindings = pairs

    @property
    def bindings(self) -> tuple[tuple[str, Ty], ...]:
        return self._bindings

    def extend(self, name: str, ty: Ty) -> "TypingCtx":
        kept = tuple((x, t) for x, t in self._bindings if x != name)
        return TypingCtx(kept + ((name, ty),))

    def lookup(self, name: str) -> Optional[Ty]:
        for x, t in self._bindings:
            if x == name:
                return t
        return None

    def names(self) -> tuple[str, ...]:
        return tuple(x for x, _ in self._bindings)

    def __iter__(self) -> Iterator[tuple[str, Ty]]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TypingCtx):
            return NotImplemented
        return dict(self._bindings) == dict(other._bindings)

    def __hash__(self) -> int:
        return hash(frozenset(self._bindings))

    def __repr__(self) -> str:
        inner = ", ".join(f"{x}: {t!r}" for x, t in self._bindings)
        return f"TypingCtx({{{inner}}})"


EMPTY_CTX = TypingCtx()


class HoleContextError(Exception):
    """Raised when two hole contexts disagree about the same hole name."""


class HoleContext:
    """Maps hole names to the contextual type (typing context, type) recorded
    at the hole's original site."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Iterable[tuple[str, tuple[TypingCtx, Ty]]] = ()):
        self._entries: dict[str, tuple[TypingCtx, Ty]] = {}
        for name, binding in entries:
            if name in self._entries and self._entries[name] != binding:
                raise HoleContextError(f"conflicting bindings for hole {name}")
            self._entries[name] = binding

    def lookup(self, name: str) -> Optional[tuple[TypingCtx, Ty]]:
        return self._entries.get(name)

    def names(self) -> tuple[str, ...]:
        return tuple(self._entries)

    def union(self, other: "HoleContext") -> "HoleContext":
        merged = HoleContext()
        merged._entries.update(self._entries)
        for name, binding in other._entries.items():
            if name in merged._entries and merged._entries[name] != binding:
                raise HoleContextError(f"conflicting bindings for hole {name}")
            merged._entries[name] = binding
        return merged

    def add(self, name: str, ctx: TypingCtx, ty: Ty) -> "HoleContext":
        return self.union(HoleContext([(name, (ctx, ty))]))

    def without(self, name: str) -> "HoleContext":
        out = HoleContext()
        out._entries = {k: v for k, v in self._entries.items() if k != name}
        return out

    def items(self) -> Iterator[tuple[str, tuple[TypingCtx, Ty]]]:
        return iter(self._entries.items())

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HoleContext):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        return hash(frozenset(self._entries.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{u} :: {t!r}{g!r}" for u, (g, t) in self._entries.items())
        return f"HoleContext({{{inner}}})"


EMPTY_HOLES = HoleContext()


# ---------------------------------------------------------------------------
# Identity substitution


def identity_env(ctx: TypingCtx) -> Env:
    """The environment mapping each variable of `ctx` to itself."""
    return Env((x, IVar(x)) for x, _ in ctx)


# ---------------------------------------------------------------------------
# Free variables and fresh names

PRIME = "′"


def free_vars(d: IntExpr) -> frozenset[str]:
    match d:
        case IConst() | INumLit():
            return frozenset()
        case IVar(name):
            return frozenset((name,))
        case ILam(var, _, body):
            return free_vars(body) - {var}
        case IAp(fun, arg):
            return free_vars(fun) | free_vars(arg)
        case EmptyClosure(_, env):
            return frozenset().union(*(free_vars(v) for _, v in env)) if len(env) else frozenset()
        case NonEmptyClosure(body, _, env):
            out = free_vars(body)
            for _, v in env:
                out |= free_vars(v)
            return out
        case Cast(body, _, _) | FailedCast(body, _, _):
            return free_vars(body)
        case IPlus(left, right):
            return free_vars(left) | free_vars(right)
        case IInL(_, body) | IInR(_, body):
            return free_vars(body)
        case ICase(scrut, lv, left, rv, right):
            return free_vars(scrut) | (free_vars(left) - {lv}) | (free_vars(right) - {rv})
    raise TypeError(f"not an internal expression: {d!r}")


def fresh_var(avoid: Iterable[str], base: str = "x") -> str:
    """Smallest primed variant of `base` not in `avoid`."""
    avoid = set(avoid)
    candidate = base
    while candidate in avoid:
        candidate += PRIME
    return candidate


# ---------------------------------------------------------------------------
# Alpha equivalence

Term = Union[ExtExpr, IntExpr]


def alpha_equiv(a: Term, b: Term) -> bool:
    """Equality up to consistent renaming of bound variables.

    Hole names compare literally; closure environments compare as unordered
    maps whose values are compared recursively under the current scopes.
    """
    return _alpha(a, b, {}, {}, 0)


def _alpha(a: Term, b: Term, s1: dict[str, int], s2: dict[str, int], depth: int) -> bool:
    if type(a) is not type(b):
        return False

    def var_eq(x: str, y: str) -> bool:
        d1, d2 = s1.get(x), s2.get(y)
        if d1 is None and d2 is None:
            return x == y
        return d1 == d2

    def under(x: str, y: str) -> tuple[dict[str, int], dict[str, int]]:
        n1, n2 = dict(s1), dict(s2)
        n1[x] = depth
        n2[y] = depth
        return n1, n2

    def env_eq(e1: Env, e2: Env) -> bool:
        m1, m2 = dict(e1.bindings), dict(e2.bindings)
        if set(m1) != set(m2):
            return False
        return all(_alpha(m1[x], m2[x], s1, s2, depth) for x in m1)

    match a, b:
        case (IConst(), IConst()) | (Const(), Const()):
            return True
        case (IVar(x), IVar(y)) | (Var(x), Var(y)):
            return var_eq(x, y)
        case (INumLit(m), INumLit(n)) | (NumLit(m), NumLit(n)):
            return m == n
        case ILam(x, t1, b1), ILam(y, t2, b2):
            if t1 != t2:
                return False
            n1, n2 = under(x, y)
            return _alpha(b1, b2, n1, n2, depth + 1)
        case LamAnn(x, t1, b1), LamAnn(y, t2, b2):
            if t1 != t2:
                return False
            n1, n2 = under(x, y)
            return _alpha(b1, b2, n1, n2, depth + 1)
        case Lam(x, b1), Lam(y, b2):
            n1, n2 = under(x, y)
            return _alpha(b1, b2, n1, n2, depth + 1)
        case (IAp(f1, a1), IAp(f2, a2)) | (Ap(f1, a1), Ap(f2, a2)):
            return _alpha(f1, f2, s1, s2, depth) and _alpha(a1, a2, s1, s2, depth)
        case EmptyClosure(u, e1), EmptyClosure(v, e2):
            return u == v and env_eq(e1, e2)
        case NonEmptyClosure(b1, u, e1), NonEmptyClosure(b2, v, e2):
            return u == v and _alpha(b1, b2, s1, s2, depth) and env_eq(e1, e2)
        case EmptyHole(u), EmptyHole(v):
            return u == v
        case NonEmptyHole(b1, u), NonEmptyHole(b2, v):
            return u == v and _alpha(b1, b2, s1, s2, depth)
        case (Cast(b1, s1t, d1t), Cast(b2, s2t, d2t)) | (
            FailedCast(b1, s1t, d1t),
            FailedCast(b2, s2t, d2t),
        ):
            return s1t == s2t and d1t == d2t and _alpha(b1, b2, s1, s2, depth)
        case Asc(b1, t1), Asc(b2, t2):
            return t1 == t2 and _alpha(b1, b2, s1, s2, depth)
        case (IPlus(l1, r1), IPlus(l2, r2)) | (Plus(l1, r1), Plus(l2, r2)):
            return _alpha(l1, l2, s1, s2, depth) and _alpha(r1, r2, s1, s2, depth)
        case (IInL(t1, b1), IInL(t2, b2)) | (IInR(t1, b1), IInR(t2, b2)):
            return t1 == t2 and _alpha(b1, b2, s1, s2, depth)
        case (InL(b1), InL(b2)) | (InR(b1), InR(b2)):
            return _alpha(b1, b2, s1, s2, depth)
        case ICase(sc1, x1, l1, y1, r1), ICase(sc2, x2, l2, y2, r2):
            if not _alpha(sc1, sc2, s1, s2, depth):
                return False
            m1, m2 = under(x1, x2)
            if not _alpha(l1, l2, m1, m2, depth + 1):
                return False
            m1, m2 = under(y1, y2)
            return _alpha(r1, r2, m1, m2, depth + 1)
        case Case(sc1, x1, l1, y1, r1), Case(sc2, x2, l2, y2, r2):
            if not _alpha(sc1, sc2, s1, s2, depth):
                return False
            m1, m2 = under(x1, x2)
            if not _alpha(l1, l2, m1, m2, depth + 1):
                return False
            m1, m2 = under(y1, y2)
            return _alpha(r1, r2, m1, m2, depth + 1)
    return False


def hole_names_ext(e: ExtExpr) -> list[str]:
    """All hole names in `e`, in left-to-right order (duplicates included)."""
    out: list[str] = []

    def walk(e: ExtExpr) -> None:
        match e:
            case EmptyHole(u):
                out.append(u)
            case NonEmptyHole(body, u):
                out.append(u)
                walk(body)
            case Lam(_, body) | LamAnn(_, _, body) | Asc(body, _) | InL(body) | InR(body):
                walk(body)
            case Ap(f, a) | Plus(f, a):
                walk(f)
                walk(a)
            case Case(scrut, _, left, _, right):
                walk(scrut)
                walk(left)
                walk(right)
            case _:
                pass

    walk(e)
    return out


def check_distinct_holes(e: ExtExpr) -> None:
    names = hole_names_ext(e)
    seen: set[str] = set()
    for u in names:
        if u in seen:
            raise ValueError(f"duplicate hole name: {u}")
        seen.add(u)
