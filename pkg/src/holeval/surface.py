"""Concrete syntax: parser and pretty-printers.

Grammar (loosest to tightest):

    e    ::= e ':' ty | lam | plus
    lam  ::= '\\' ident (':' ty)? '.' e
    plus ::= app ('+' app)*
    app  ::= atom+
    atom ::= 'c' | number | ident | '?' | '?name' | '{' e '}' name?
           | 'inl' atom | 'inr' atom
           | 'case' e 'of' 'inl' ident '->' e '|' 'inr' ident '->' e 'end'
           | 'let' ident (':' ty)? '=' e 'in' e | '(' e ')'
    ty   ::= sumty ('->' ty)?        (arrows associate right)
    sumty::= tyatom ('+' tyatom)*
    tyatom ::= 'b' | 'num' | '?' | '(' ty ')'

Empty holes are named by writing the name directly after '?' (no space);
a numeral or identifier after '}' names a non-empty hole. Unnamed holes are
auto-named with decimal numerals assigned left-to-right, skipping names
already used explicitly. `let x = e1 in e2` desugars to an application of
an annotated lambda; without an annotation the bound expression must
synthesize its type.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .statics import matched_sum, syn
from .syntax import (
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
    Num,
    NumLit,
    Plus,
    Span,
    Sum,
    Ty,
    TypingCtx,
    Var,
)

KEYWORDS = {"c", "b", "num", "inl", "inr", "case", "of", "end", "let", "in"}


class ParseError(Exception):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at offset {pos})")
        self.message = message
        self.pos = pos


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int


def _lex(src: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        start = i
        if ch == "#":  # line comment
            while i < n and src[i] != "\n":
                i += 1
            continue
        if ch == "?":
            i += 1
            name = ""
            while i < n and (src[i].isalnum() or src[i] == "_"):
                name += src[i]
                i += 1
            tokens.append(Token("hole", name, start, i))
            continue
        if ch.isdigit():
            while i < n and src[i].isdigit():
                i += 1
            tokens.append(Token("number", src[start:i], start, i))
            continue
        if ch.isalpha() or ch == "_":
            while i < n and (src[i].isalnum() or src[i] == "_"):
                i += 1
            text = src[start:i]
            tokens.append(Token(text if text in KEYWORDS else "ident", text, start, i))
            continue
        if src.startswith("->", i):
            tokens.append(Token("->", "->", start, i + 2))
            i += 2
            continue
        if ch in "\\.:+(){}|=":
            tokens.append(Token(ch, ch, start, i + 1))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(Token("eof", "", n, n))
    return tokens


# The parser produces plain external expressions except for let, which is
# held in this private node until the desugaring pass can compute the
# synthesized type of the bound expression.
@dataclass(frozen=True, slots=True)
class _Let(ExtExpr):
    var: str
    ann: Optional[Ty]
    bound: ExtExpr
    body: ExtExpr
    span: Optional[Span] = field(default=None, compare=False, repr=False)


_AUTO = object()  # placeholder marker for not-yet-named holes


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.pending_auto: list[ExtExpr] = []
        self.explicit_names: dict[str, int] = {}

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, found {tok.text or tok.kind!r}", tok.start)
        return self.next()

    def ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            raise ParseError(f"expected an identifier, found {tok.text or tok.kind!r}", tok.start)
        return self.next()

    # -- expressions

    def parse_expr(self) -> ExtExpr:
        e = self.parse_lam_level()
        while self.peek().kind == ":":
            self.next()
            ty = self.parse_ty()
            e = Asc(e, ty, span=(_start(e), self.tokens[self.pos - 1].end))
        return e

    def parse_lam_level(self) -> ExtExpr:
        tok = self.peek()
        if tok.kind == "\\":
            self.next()
            var = self.ident()
            ann = None
            if self.peek().kind == ":":
                self.next()
                ann = self.parse_ty()
            self.expect(".")
            body = self.parse_expr()
            span = (tok.start, _end(body))
            if ann is None:
                return Lam(var.text, body, span=span)
            return LamAnn(var.text, ann, body, span=span)
        return self.parse_plus()

    def parse_plus(self) -> ExtExpr:
        e = self.parse_app()
        while self.peek().kind == "+":
            self.next()
            right = self.parse_app()
            e = Plus(e, right, span=(_start(e), _end(right)))
        return e

    ATOM_START = {"c", "number", "ident", "hole", "{", "inl", "inr", "case", "let", "("}

    def parse_app(self) -> ExtExpr:
        e = self.parse_atom()
        while self.peek().kind in self.ATOM_START:
            arg = self.parse_atom()
            e = Ap(e, arg, span=(_start(e), _end(arg)))
        return e

    def register_hole(self, name: str, pos: int) -> str:
        if name in self.explicit_names:
            raise ParseError(f"duplicate hole name {name}", pos)
        self.explicit_names[name] = pos
        return name

    def parse_atom(self) -> ExtExpr:
        tok = self.peek()
        match tok.kind:
            case "c":
                self.next()
                return Const(span=(tok.start, tok.end))
            case "number":
                self.next()
                return NumLit(int(tok.text), span=(tok.start, tok.end))
            case "ident":
                self.next()
                return Var(tok.text, span=(tok.start, tok.end))
            case "hole":
                self.next()
                if tok.text:
                    name = self.register_hole(tok.text, tok.start)
                    return EmptyHole(name, span=(tok.start, tok.end))
                hole = EmptyHole("", span=(tok.start, tok.end))
                self.pending_auto.append(hole)
                return hole
            case "{":
                self.next()
                body = self.parse_expr()
                close = self.expect("}")
                nxt = self.peek()
                if nxt.kind in ("number", "ident"):
                    self.next()
                    name = self.register_hole(nxt.text, nxt.start)
                    return NonEmptyHole(body, name, span=(tok.start, nxt.end))
                hole = NonEmptyHole(body, "", span=(tok.start, close.end))
                self.pending_auto.append(hole)
                return hole
            case "inl" | "inr":
                self.next()
                body = self.parse_atom()
                cls = InL if tok.kind == "inl" else InR
                return cls(body, span=(tok.start, _end(body)))
            case "case":
                self.next()
                scrut = self.parse_expr()
                self.expect("of")
                self.expect("inl")
                lv = self.ident()
                self.expect("->")
                left = self.parse_expr()
                self.expect("|")
                self.expect("inr")
                rv = self.ident()
                self.expect("->")
                right = self.parse_expr()
                end = self.expect("end")
                return Case(
                    scrut, lv.text, left, rv.text, right, span=(tok.start, end.end)
                )
            case "let":
                self.next()
                var = self.ident()
                ann = None
                if self.peek().kind == ":":
                    self.next()
                    ann = self.parse_ty()
                self.expect("=")
                bound = self.parse_expr()
                self.expect("in")
                body = self.parse_expr()
                return _Let(var.text, ann, bound, body, span=(tok.start, _end(body)))
            case "(":
                self.next()
                e = self.parse_expr()
                self.expect(")")
                return e
        raise ParseError(f"expected an expression, found {tok.text or tok.kind!r}", tok.start)

    # -- types

    def parse_ty(self) -> Ty:
        t = self.parse_sum_ty()
        if self.peek().kind == "->":
            self.next()
            return Arrow(t, self.parse_ty())
        return t

    def parse_sum_ty(self) -> Ty:
        t = self.parse_ty_atom()
        while self.peek().kind == "+":
            self.next()
            t = Sum(t, self.parse_ty_atom())
        return t

    def parse_ty_atom(self) -> Ty:
        tok = self.peek()
        match tok.kind:
            case "b":
                self.next()
                return BASE
            case "num":
                self.next()
                return NUM
            case "hole":
                if tok.text:
                    raise ParseError("hole types are unnamed", tok.start)
                self.next()
                return HOLE
            case "(":
                self.next()
                t = self.parse_ty()
                self.expect(")")
                return t
        raise ParseError(f"expected a type, found {tok.text or tok.kind!r}", tok.start)


def _start(e: ExtExpr) -> int:
    span = getattr(e, "span", None)
    return span[0] if span else 0


def _end(e: ExtExpr) -> int:
    span = getattr(e, "span", None)
    return span[1] if span else 0


def _replace(e: ExtExpr, table: dict[int, ExtExpr]) -> ExtExpr:
    """Rebuild `e`, swapping nodes listed (by identity) in `table`."""
    if id(e) in table:
        return table[id(e)]
    match e:
        case Const() | Var() | NumLit() | EmptyHole():
            return e
        case Lam(x, body):
            return Lam(x, _replace(body, table), span=e.span)
        case LamAnn(x, ann, body):
            return LamAnn(x, ann, _replace(body, table), span=e.span)
        case Ap(fun, arg):
            return Ap(_replace(fun, table), _replace(arg, table), span=e.span)
        case NonEmptyHole(body, name):
            return NonEmptyHole(_replace(body, table), name, span=e.span)
        case Asc(body, ann):
            return Asc(_replace(body, table), ann, span=e.span)
        case Plus(left, right):
            return Plus(_replace(left, table), _replace(right, table), span=e.span)
        case InL(body):
            return InL(_replace(body, table), span=e.span)
        case InR(body):
            return InR(_replace(body, table), span=e.span)
        case Case(scrut, x, left, y, right):
            return Case(
                _replace(scrut, table),
                x,
                _replace(left, table),
                y,
                _replace(right, table),
                span=e.span,
            )
        case _Let(x, ann, bound, body):
            return _Let(x, ann, _replace(bound, table), _replace(body, table), span=e.span)
    raise TypeError(f"not an external expression: {e!r}")


def _assign_auto_names(
    root: ExtExpr, pending: list[ExtExpr], reserved: set[str]
) -> ExtExpr:
    if not pending:
        return root
    pending = sorted(pending, key=_start)
    table: dict[int, ExtExpr] = {}
    counter = 1
    for hole in pending:
        while str(counter) in reserved:
            counter += 1
        name = str(counter)
        reserved.add(name)
        match hole:
            case EmptyHole(_):
                table[id(hole)] = EmptyHole(name, span=hole.span)
            case NonEmptyHole(body, _):
                table[id(hole)] = NonEmptyHole(body, name, span=hole.span)
    return _replace_preserving_bodies(root, table)


def _replace_preserving_bodies(e: ExtExpr, table: dict[int, ExtExpr]) -> ExtExpr:
    # bodies of renamed non-empty holes may themselves contain renamed holes,
    # so rebuild the replacement's body too
    if id(e) in table:
        new = table[id(e)]
        if isinstance(new, NonEmptyHole):
            return NonEmptyHole(
                _replace_preserving_bodies(new.body, table), new.name, span=new.span
            )
        return new
    match e:
        case Const() | Var() | NumLit() | EmptyHole():
            return e
        case Lam(x, body):
            return Lam(x, _replace_preserving_bodies(body, table), span=e.span)
        case LamAnn(x, ann, body):
            return LamAnn(x, ann, _replace_preserving_bodies(body, table), span=e.span)
        case Ap(fun, arg):
            return Ap(
                _replace_preserving_bodies(fun, table),
                _replace_preserving_bodies(arg, table),
                span=e.span,
            )
        case NonEmptyHole(body, name):
            return NonEmptyHole(_replace_preserving_bodies(body, table), name, span=e.span)
        case Asc(body, ann):
            return Asc(_replace_preserving_bodies(body, table), ann, span=e.span)
        case Plus(left, right):
            return Plus(
                _replace_preserving_bodies(left, table),
                _replace_preserving_bodies(right, table),
                span=e.span,
            )
        case InL(body):
            return InL(_replace_preserving_bodies(body, table), span=e.span)
        case InR(body):
            return InR(_replace_preserving_bodies(body, table), span=e.span)
        case Case(scrut, x, left, y, right):
            return Case(
                _replace_preserving_bodies(scrut, table),
                x,
                _replace_preserving_bodies(left, table),
                y,
                _replace_preserving_bodies(right, table),
                span=e.span,
            )
        case _Let(x, ann, bound, body):
            return _Let(
                x,
                ann,
                _replace_preserving_bodies(bound, table),
                _replace_preserving_bodies(body, table),
                span=e.span,
            )
    raise TypeError(f"not an external expression: {e!r}")


def _desugar(e: ExtExpr, ctx: TypingCtx) -> ExtExpr:
    """Eliminate let nodes. Unannotated lets take the synthesized type of
    the bound expression; binders of unknown type are approximated by the
    hole type while resolving nested lets."""
    match e:
        case Const() | Var() | NumLit() | EmptyHole():
            return e
        case Lam(x, body):
            return Lam(x, _desugar(body, ctx.extend(x, HOLE)), span=e.span)
        case LamAnn(x, ann, body):
            return LamAnn(x, ann, _desugar(body, ctx.extend(x, ann)), span=e.span)
        case Ap(fun, arg):
            return Ap(_desugar(fun, ctx), _desugar(arg, ctx), span=e.span)
        case NonEmptyHole(body, name):
            return NonEmptyHole(_desugar(body, ctx), name, span=e.span)
        case Asc(body, ann):
            return Asc(_desugar(body, ctx), ann, span=e.span)
        case Plus(left, right):
            return Plus(_desugar(left, ctx), _desugar(right, ctx), span=e.span)
        case InL(body):
            return InL(_desugar(body, ctx), span=e.span)
        case InR(body):
            return InR(_desugar(body, ctx), span=e.span)
        case Case(scrut, x, left, y, right):
            scrut2 = _desugar(scrut, ctx)
            t_scrut = syn(ctx, scrut2)
            m = matched_sum(t_scrut) if t_scrut is not None else None
            t_left, t_right = m if m is not None else (HOLE, HOLE)
            return Case(
                scrut2,
                x,
                _desugar(left, ctx.extend(x, t_left)),
                y,
                _desugar(right, ctx.extend(y, t_right)),
                span=e.span,
            )
        case _Let(x, ann, bound, body):
            bound2 = _desugar(bound, ctx)
            if ann is not None:
                body2 = _desugar(body, ctx.extend(x, ann))
                return Ap(LamAnn(x, ann, body2, span=e.span), Asc(bound2, ann, span=bound2.span), span=e.span)
            t_bound = syn(ctx, bound2)
            if t_bound is None:
                raise ParseError(
                    f"let-bound expression for {x} does not synthesize a type; annotate it",
                    _start(bound),
                )
            body2 = _desugar(body, ctx.extend(x, t_bound))
            return Ap(LamAnn(x, t_bound, body2, span=e.span), bound2, span=e.span)
    raise TypeError(f"not an external expression: {e!r}")


def _free_var_occurrences(e: ExtExpr, bound: frozenset[str]) -> list[Var]:
    out: list[Var] = []

    def walk(e: ExtExpr, bound: frozenset[str]) -> None:
        match e:
            case Var(name):
                if name not in bound:
                    out.append(e)
            case Lam(x, body):
                walk(body, bound | {x})
            case LamAnn(x, _, body):
                walk(body, bound | {x})
            case Ap(f, a) | Plus(f, a):
                walk(f, bound)
                walk(a, bound)
            case NonEmptyHole(body, _) | Asc(body, _) | InL(body) | InR(body):
                walk(body, bound)
            case Case(scrut, x, left, y, right):
                walk(scrut, bound)
                walk(left, bound | {x})
                walk(right, bound | {y})
            case _:
                pass

    walk(e, bound)
    return out


@dataclass(frozen=True)
class ParseResult:
    expr: ExtExpr
    warnings: tuple[str, ...] = ()


def parse(
    src: str,
    free_vars_as_holes: bool = False,
    reserved_hole_names: frozenset[str] = frozenset(),
) -> ParseResult:
    """Parse source text into an external expression.

    `reserved_hole_names` excludes names from auto-naming (and rejects
    explicit uses), so fragments can be parsed against an existing program.
    """
    parser = _Parser(_lex(src))
    cst = parser.parse_expr()
    tok = parser.peek()
    if tok.kind != "eof":
        raise ParseError(f"unexpected trailing input {tok.text!r}", tok.start)
    for name, pos in parser.explicit_names.items():
        if name in reserved_hole_names:
            raise ParseError(f"hole name {name} is already in use", pos)
    reserved = set(parser.explicit_names) | set(reserved_hole_names)
    cst = _assign_auto_names(cst, parser.pending_auto, reserved)
    expr = _desugar(cst, TypingCtx())

    warnings: list[str] = []
    free = _free_var_occurrences(expr, frozenset())
    if free:
        names = ", ".join(sorted({v.name for v in free}))
        warnings.append(f"free variables: {names}")
    if free_vars_as_holes and free:
        table: dict[int, ExtExpr] = {}
        used = set(reserved)
        for occ in free:
            name = occ.name
            while name in used:
                name += "′"
            used.add(name)
            table[id(occ)] = EmptyHole(name, span=occ.span)
        expr = _replace(expr, table)
    return ParseResult(expr, tuple(warnings))


# ---------------------------------------------------------------------------
# Pretty-printing


def print_ty(t: Ty, prec: int = 0) -> str:
    match t:
        case Base():
            s, p = "b", 2
        case Num():
            s, p = "num", 2
        case Hole():
            s, p = "?", 2
        case Arrow(dom, cod):
            s, p = f"{print_ty(dom, 1)} -> {print_ty(cod, 0)}", 0
        case Sum(left, right):
            s, p = f"{print_ty(left, 1)} + {print_ty(right, 2)}", 1
        case _:
            raise TypeError(f"not a type: {t!r}")
    return f"({s})" if p < prec else s


_ASC, _LAM, _PLUS, _AP, _ATOM = 0, 1, 2, 3, 4


def print_ext(e: ExtExpr, prec: int = 0) -> str:
    match e:
        case Const():
            s, p = "c", _ATOM
        case Var(name):
            s, p = name, _ATOM
        case NumLit(n):
            s, p = str(n), _ATOM
        case EmptyHole(name):
            s, p = f"?{name}", _ATOM
        case NonEmptyHole(body, name):
            s, p = f"{{{print_ext(body)}}} {name}", _ATOM
        case Lam(x, body):
            s, p = f"\\{x}. {print_ext(body, _LAM)}", _LAM
        case LamAnn(x, ann, body):
            s, p = f"\\{x}:{print_ty(ann)}. {print_ext(body, _LAM)}", _LAM
        case Ap(fun, arg):
            s, p = f"{print_ext(fun, _AP)} {print_ext(arg, _ATOM)}", _AP
        case Plus(left, right):
            s, p = f"{print_ext(left, _PLUS)} + {print_ext(right, _AP)}", _PLUS
        case Asc(body, ann):
            s, p = f"{print_ext(body, _PLUS)} : {print_ty(ann)}", _ASC
        case InL(body):
            s, p = f"inl {print_ext(body, _ATOM)}", _ATOM
        case InR(body):
            s, p = f"inr {print_ext(body, _ATOM)}", _ATOM
        case Case(scrut, x, left, y, right):
            s = (
                f"case {print_ext(scrut)} of inl {x} -> {print_ext(left)}"
                f" | inr {y} -> {print_ext(right)} end"
            )
            p = _ATOM
        case _:
            raise TypeError(f"not an external expression: {e!r}")
    return f"({s})" if p < prec else s


_ILAM, _IPLUS, _IAP, _ICAST, _IATOM = 1, 2, 3, 4, 5


def print_env(env: Env) -> str:
    return ", ".join(f"{print_int(v)}/{x}" for x, v in env)


def print_int(d: IntExpr, prec: int = 0) -> str:
    match d:
        case IConst():
            s, p = "c", _IATOM
        case IVar(name):
            s, p = name, _IATOM
        case INumLit(n):
            s, p = str(n), _IATOM
        case ILam(x, ann, body):
            s, p = f"\\{x}:{print_ty(ann)}. {print_int(body, _ILAM)}", _ILAM
        case IAp(fun, arg):
            s, p = f"{print_int(fun, _IAP)} {print_int(arg, _IATOM)}", _IAP
        case EmptyClosure(hole, env):
            s, p = f"?{hole}[{print_env(env)}]", _IATOM
        case NonEmptyClosure(body, hole, env):
            s, p = f"{{{print_int(body)}}}{hole}[{print_env(env)}]", _IATOM
        case Cast(body, src, dst):
            s, p = f"{print_int(body, _ICAST)}<{print_ty(src)} => {print_ty(dst)}>", _ICAST
        case FailedCast(body, src, dst):
            s, p = f"{print_int(body, _ICAST)}<{print_ty(src)} =/=> {print_ty(dst)}>", _ICAST
        case IPlus(left, right):
            s, p = f"{print_int(left, _IPLUS)} + {print_int(right, _IAP)}", _IPLUS
        case IInL(other, body):
            s, p = f"inl[{print_ty(other)}] {print_int(body, _IATOM)}", _IATOM
        case IInR(other, body):
            s, p = f"inr[{print_ty(other)}] {print_int(body, _IATOM)}", _IATOM
        case ICase(scrut, x, left, y, right):
            s = (
                f"case {print_int(scrut)} of inl {x} -> {print_int(left)}"
                f" | inr {y} -> {print_int(right)} end"
            )
            p = _IATOM
        case _:
            raise TypeError(f"not an internal expression: {d!r}")
    return f"({s})" if p < prec else s


def print_ctx(ctx: TypingCtx) -> str:
    if len(ctx) == 0:
        return "·"
    return ", ".join(f"{x} : {print_ty(t)}" for x, t in ctx)


def print_holes(holes: HoleContext) -> str:
    lines = [f"{u} :: {print_ty(t)}[{print_ctx(g)}]" for u, (g, t) in holes.items()]
    return "\n".join(lines)
