"""Abstract syntax, parser, and printer for the linear calculus.

Surface grammar (ASCII, one-token lookahead)::

    term    := '\\' IDENT ':' type '.' term
             | 'pm' tensor 'to' IDENT '*' IDENT '.' term
             | tensor ('to' ('*' | '_') '.' term)?
    tensor  := app ('*' app)*                 -- left-assoc pair intro
    app     := atom atom*                     -- left-assoc application
    atom    := '*'                            -- the unit value (first position only)
             | IDENT '(' term (',' term)* ')' -- operation application
             | IDENT                          -- variable
             | '(' term ')'

    type    := prod ('-o' type)?              -- right-assoc function space
    prod    := tatom ('*' tatom)*             -- left-assoc product
    tatom   := 'I' | IDENT | '(' type ')'

A ``*`` in argument position of an application must be parenthesized
(``f (*)``), so the infix pair intro stays unambiguous.  Scrutinees of
``pm``/``to`` parse at tensor level; parenthesize eliminators there.
An operation's parenthesis must be glued to its symbol (``wait_1(x)``);
a detached parenthesis groups an application argument (``f (a b)``).

Binders are renamed after parsing only when they clash with a variable that
is free in the whole input, so printing parses back to the same term and
non-shadowing input round-trips verbatim up to whitespace.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple


class SyntaxErrorV(Exception):
    """Parse error with line/column information."""

    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        super().__init__(f"{msg} (line {line}, column {col})" if line else msg)


class LinearityWarning(UserWarning):
    """Substitution target did not occur in the term."""


# ---------------------------------------------------------------------------
# types


class LinType:
    __slots__ = ()


@dataclass(frozen=True)
class Ground(LinType):
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class Unit(LinType):
    def __repr__(self):
        return "I"


@dataclass(frozen=True)
class TensorT(LinType):
    left: LinType
    right: LinType

    def __repr__(self):
        return print_type(self)


@dataclass(frozen=True)
class Lolli(LinType):
    left: LinType
    right: LinType

    def __repr__(self):
        return print_type(self)


UNIT = Unit()


# ---------------------------------------------------------------------------
# terms


class Term:
    __slots__ = ()

    def __repr__(self):
        return print_term(self)


@dataclass(frozen=True, repr=False)
class Var(Term):
    name: str


@dataclass(frozen=True, repr=False)
class Op(Term):
    symbol: str
    args: Tuple[Term, ...]


@dataclass(frozen=True, repr=False)
class Star(Term):
    pass


@dataclass(frozen=True, repr=False)
class UnitLet(Term):
    scrutinee: Term
    body: Term


@dataclass(frozen=True, repr=False)
class TensorIntro(Term):
    left: Term
    right: Term


@dataclass(frozen=True, repr=False)
class TensorLet(Term):
    scrutinee: Term
    x: str
    y: str
    body: Term


@dataclass(frozen=True, repr=False)
class Lam(Term):
    var: str
    ty: LinType
    body: Term


@dataclass(frozen=True, repr=False)
class App(Term):
    fn: Term
    arg: Term


STAR = Star()

# A typing context is an ordered tuple of (name, type) pairs.
TypingContext = Tuple[Tuple[str, LinType], ...]


# ---------------------------------------------------------------------------
# free variables, fresh names, substitution


def free_vars(t: Term) -> Set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Op):
        out: Set[str] = set()
        for a in t.args:
            out |= free_vars(a)
        return out
    if isinstance(t, Star):
        return set()
    if isinstance(t, UnitLet):
        return free_vars(t.scrutinee) | free_vars(t.body)
    if isinstance(t, TensorIntro):
        return free_vars(t.left) | free_vars(t.right)
    if isinstance(t, TensorLet):
        return free_vars(t.scrutinee) | (free_vars(t.body) - {t.x, t.y})
    if isinstance(t, Lam):
        return free_vars(t.body) - {t.var}
    if isinstance(t, App):
        return free_vars(t.fn) | free_vars(t.arg)
    raise TypeError(f"not a term: {t!r}")


def count_occurrences(t: Term, name: str) -> int:
    """Free occurrences of ``name`` in ``t``."""
    if isinstance(t, Var):
        return 1 if t.name == name else 0
    if isinstance(t, Op):
        return sum(count_occurrences(a, name) for a in t.args)
    if isinstance(t, Star):
        return 0
    if isinstance(t, UnitLet):
        return count_occurrences(t.scrutinee, name) + count_occurrences(t.body, name)
    if isinstance(t, TensorIntro):
        return count_occurrences(t.left, name) + count_occurrences(t.right, name)
    if isinstance(t, TensorLet):
        n = count_occurrences(t.scrutinee, name)
        if name not in (t.x, t.y):
            n += count_occurrences(t.body, name)
        return n
    if isinstance(t, Lam):
        return 0 if t.var == name else count_occurrences(t.body, name)
    if isinstance(t, App):
        return count_occurrences(t.fn, name) + count_occurrences(t.arg, name)
    raise TypeError(f"not a term: {t!r}")


def fresh_name(base: str, avoid: Set[str]) -> str:
    if base not in avoid:
        return base
    i = 1
    while f"{base}_{i}" in avoid:
        i += 1
    return f"{base}_{i}"


def rename_bound(t: Term, old: str, new: str) -> Term:
    """Rename one binder's occurrences; caller guarantees ``new`` is fresh."""
    return substitute(t, old, Var(new), _warn=False)


def substitute(v: Term, x: str, w: Term, _warn: bool = True) -> Term:
    """Capture-avoiding replacement of the free variable ``x`` by ``w``."""
    if _warn and count_occurrences(v, x) == 0:
        warnings.warn(
            f"substitution target {x!r} does not occur in the term",
            LinearityWarning,
            stacklevel=2,
        )
    fw = free_vars(w)

    def go(t: Term, bound: Set[str]) -> Term:
        if isinstance(t, Var):
            return w if t.name == x and t.name not in bound else t
        if isinstance(t, Op):
            return Op(t.symbol, tuple(go(a, bound) for a in t.args))
        if isinstance(t, Star):
            return t
        if isinstance(t, UnitLet):
            return UnitLet(go(t.scrutinee, bound), go(t.body, bound))
        if isinstance(t, TensorIntro):
            return TensorIntro(go(t.left, bound), go(t.right, bound))
        if isinstance(t, TensorLet):
            scr = go(t.scrutinee, bound)
            bx, by, body = t.x, t.y, t.body
            if x in (bx, by) or x not in free_vars(body):
                # x is shadowed or absent below this binder
                return TensorLet(scr, bx, by, go(body, bound | {bx, by}))
            if bx in fw:
                nx = fresh_name(bx, fw | free_vars(body) | bound | {by})
                body = rename_bound(body, bx, nx)
                bx = nx
            if by in fw:
                ny = fresh_name(by, fw | free_vars(body) | bound | {bx})
                body = rename_bound(body, by, ny)
                by = ny
            return TensorLet(scr, bx, by, go(body, bound | {bx, by}))
        if isinstance(t, Lam):
            bx, body = t.var, t.body
            if x == bx or x not in free_vars(body):
                return Lam(bx, t.ty, go(body, bound | {bx}))
            if bx in fw:
                nx = fresh_name(bx, fw | free_vars(body) | bound)
                body = rename_bound(body, bx, nx)
                bx = nx
            return Lam(bx, t.ty, go(body, bound | {bx}))
        if isinstance(t, App):
            return App(go(t.fn, bound), go(t.arg, bound))
        raise TypeError(f"not a term: {t!r}")

    return go(v, set())


def alpha_eq(a: Term, b: Term) -> bool:
    """Structural equality modulo bound-variable renaming."""

    def go(a: Term, b: Term, env: Tuple[Tuple[str, str], ...]) -> bool:
        if isinstance(a, Var) and isinstance(b, Var):
            for (na, nb) in reversed(env):
                if a.name == na or b.name == nb:
                    return a.name == na and b.name == nb
            return a.name == b.name
        if isinstance(a, Op) and isinstance(b, Op):
            return (
                a.symbol == b.symbol
                and len(a.args) == len(b.args)
                and all(go(x, y, env) for x, y in zip(a.args, b.args))
            )
        if isinstance(a, Star) and isinstance(b, Star):
            return True
        if isinstance(a, UnitLet) and isinstance(b, UnitLet):
            return go(a.scrutinee, b.scrutinee, env) and go(a.body, b.body, env)
        if isinstance(a, TensorIntro) and isinstance(b, TensorIntro):
            return go(a.left, b.left, env) and go(a.right, b.right, env)
        if isinstance(a, TensorLet) and isinstance(b, TensorLet):
            return go(a.scrutinee, b.scrutinee, env) and go(
                a.body, b.body, env + ((a.x, b.x), (a.y, b.y))
            )
        if isinstance(a, Lam) and isinstance(b, Lam):
            return a.ty == b.ty and go(a.body, b.body, env + ((a.var, b.var),))
        if isinstance(a, App) and isinstance(b, App):
            return go(a.fn, b.fn, env) and go(a.arg, b.arg, env)
        return False

    return go(a, b, ())


def term_size(t: Term) -> int:
    if isinstance(t, (Var, Star)):
        return 1
    if isinstance(t, Op):
        return 1 + sum(term_size(a) for a in t.args)
    if isinstance(t, UnitLet):
        return 1 + term_size(t.scrutinee) + term_size(t.body)
    if isinstance(t, TensorIntro):
        return 1 + term_size(t.left) + term_size(t.right)
    if isinstance(t, TensorLet):
        return 1 + term_size(t.scrutinee) + term_size(t.body)
    if isinstance(t, Lam):
        return 1 + term_size(t.body)
    if isinstance(t, App):
        return 1 + term_size(t.fn) + term_size(t.arg)
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# shuffles


def is_shuffle(candidate: TypingContext, parts: Sequence[TypingContext]) -> bool:
    """True iff candidate interleaves the parts preserving each part's order."""
    n = len(candidate)
    if sum(len(p) for p in parts) != n:
        return False

    def search(pos: int, cursors: Tuple[int, ...]) -> bool:
        if pos == n:
            return True
        entry = candidate[pos]
        for i, p in enumerate(parts):
            c = cursors[i]
            if c < len(p) and p[c] == entry:
                nxt = cursors[:i] + (c + 1,) + cursors[i + 1 :]
                if search(pos + 1, nxt):
                    return True
        return False

    return search(0, tuple(0 for _ in parts))


def enumerate_shuffles(
    parts: Sequence[TypingContext], limit: int = 10
) -> List[TypingContext]:
    """All interleavings of the parts, each preserving its internal order."""
    total = sum(len(p) for p in parts)
    if total > limit:
        raise SyntaxErrorV(f"shuffle enumeration over {total} variables exceeds limit {limit}")
    out: List[TypingContext] = []
    acc: List = []

    def go(cursors: List[int]) -> None:
        if len(acc) == total:
            out.append(tuple(acc))
            return
        for i, p in enumerate(parts):
            if cursors[i] < len(p):
                acc.append(p[cursors[i]])
                cursors[i] += 1
                go(cursors)
                cursors[i] -= 1
                acc.pop()

    go([0 for _ in parts])
    # parts with equal entries could duplicate; contexts are duplicate-free so dedup is cheap
    seen = set()
    uniq = []
    for s in out:
        if s not in seen:
            seen.add(s)
            uniq.append(s)
    return uniq


# ---------------------------------------------------------------------------
# lexer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lolli>-o)
  | (?P<arrow>->)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[\\.:,()*|{}=~]|\[|\])
""",
    re.VERBOSE,
)

KEYWORDS = {"pm", "to", "I"}


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident', 'num', 'lolli', 'arrow', punct literal, or 'eof'
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    toks: List[Token] = []
    line, col = 1, 1
    pos = 0
    prev_end = -1  # text offset just past the previous token
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SyntaxErrorV(f"unexpected character {text[pos]!r}", line, col)
        frag = m.group(0)
        if m.lastgroup == "ws":
            for ch in frag:
                if ch == "\n":
                    line, col = line + 1, 1
                else:
                    col += 1
        else:
            kind = m.lastgroup
            if kind == "punct":
                kind = frag
            elif kind == "ident" and frag in KEYWORDS:
                kind = frag
            # a '(' glued to an identifier opens an operation's argument list;
            # a detached '(' groups a subterm
            if (
                kind == "("
                and toks
                and prev_end == pos
                and toks[-1].kind in ("ident", "num")
            ):
                kind = "callpar"
            toks.append(Token(kind, frag, line, col))
            col += len(frag)
            prev_end = m.end()
        pos = m.end()
    toks.append(Token("eof", "", line, col))
    return toks


class _Parser:
    """Recursive-descent parser over the token list."""

    def __init__(self, tokens: List[Token], signature=None):
        self.toks = tokens
        self.i = 0
        self.signature = signature

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise SyntaxErrorV(f"expected {kind!r}, found {t.text!r}", t.line, t.col)
        return self.next()

    def error(self, msg: str):
        t = self.peek()
        raise SyntaxErrorV(msg, t.line, t.col)

    # -- types ---------------------------------------------------------

    def parse_type(self) -> LinType:
        left = self.parse_prod()
        if self.peek().kind == "lolli":
            self.next()
            return Lolli(left, self.parse_type())
        return left

    def parse_prod(self) -> LinType:
        left = self.parse_tatom()
        while self.peek().kind == "*":
            self.next()
            left = TensorT(left, self.parse_tatom())
        return left

    def parse_tatom(self) -> LinType:
        t = self.peek()
        if t.kind == "I":
            self.next()
            return UNIT
        if t.kind == "ident":
            self.next()
            return Ground(t.text)
        if t.kind == "(":
            self.next()
            ty = self.parse_type()
            self.expect(")")
            return ty
        self.error(f"expected a type, found {t.text!r}")

    # -- terms ----------------------------------------------------------

    def parse_term(self) -> Term:
        t = self.peek()
        if t.kind == "\\":
            self.next()
            var = self.expect("ident").text
            self.expect(":")
            ty = self.parse_type()
            self.expect(".")
            return Lam(var, ty, self.parse_term())
        if t.kind == "pm":
            self.next()
            scr = self.parse_tensor()
            self.expect("to")
            x = self.expect("ident").text
            self.expect("*")
            y = self.expect("ident").text
            self.expect(".")
            return TensorLet(scr, x, y, self.parse_term())
        left = self.parse_tensor()
        if self.peek().kind == "to":
            self.next()
            pat = self.peek()
            if pat.kind == "*" or (pat.kind == "ident" and pat.text == "_"):
                self.next()
            else:
                self.error("expected '*' or '_' after 'to'")
            self.expect(".")
            return UnitLet(left, self.parse_term())
        return left

    def parse_tensor(self) -> Term:
        left = self.parse_app()
        while self.peek().kind == "*":
            self.next()
            left = TensorIntro(left, self.parse_app())
        return left

    def parse_app(self) -> Term:
        head = self.parse_atom(first=True)
        while self.peek().kind in ("ident", "num", "("):
            head = App(head, self.parse_atom(first=False))
        return head

    def parse_atom(self, first: bool) -> Term:
        t = self.peek()
        if t.kind == "*" and first:
            self.next()
            return STAR
        if t.kind in ("ident", "num"):
            self.next()
            if self.peek().kind == "callpar":
                return self.parse_op_args(t)
            if t.kind == "num":
                raise SyntaxErrorV(
                    f"number {t.text!r} must be applied as an operation, e.g. {t.text}(*)",
                    t.line,
                    t.col,
                )
            if t.text == "_":
                raise SyntaxErrorV("'_' is not a variable name", t.line, t.col)
            return Var(t.text)
        if t.kind == "(":
            self.next()
            inner = self.parse_term()
            self.expect(")")
            return inner
        self.error(f"expected a term, found {t.text!r}")

    def parse_op_args(self, head: Token) -> Term:
        self.expect("callpar")
        args = [self.parse_term()]
        while self.peek().kind == ",":
            self.next()
            args.append(self.parse_term())
        self.expect(")")
        if self.signature is not None:
            sig = self.signature
            if not sig.has_op(head.text):
                raise SyntaxErrorV(f"unknown operation symbol {head.text!r}", head.line, head.col)
            arity = len(sig.op_type(head.text)[0])
            if arity != len(args):
                raise SyntaxErrorV(
                    f"operation {head.text!r} expects {arity} argument(s), got {len(args)}",
                    head.line,
                    head.col,
                )
        return Op(head.text, tuple(args))


def freshen_bound(t: Term) -> Term:
    """Rename binders that clash with variables free in their scope."""

    def go(t: Term, avoid: Set[str]) -> Term:
        if isinstance(t, (Var, Star)):
            return t
        if isinstance(t, Op):
            return Op(t.symbol, tuple(go(a, avoid) for a in t.args))
        if isinstance(t, UnitLet):
            return UnitLet(go(t.scrutinee, avoid), go(t.body, avoid))
        if isinstance(t, TensorIntro):
            return TensorIntro(go(t.left, avoid), go(t.right, avoid))
        if isinstance(t, App):
            return App(go(t.fn, avoid), go(t.arg, avoid))
        if isinstance(t, Lam):
            var, body = t.var, t.body
            if var in avoid:
                nv = fresh_name(var, avoid | free_vars(body))
                body = rename_bound(body, var, nv)
                var = nv
            return Lam(var, t.ty, go(body, avoid | {var}))
        if isinstance(t, TensorLet):
            scr = go(t.scrutinee, avoid)
            x, y, body = t.x, t.y, t.body
            if x in avoid:
                nx = fresh_name(x, avoid | free_vars(body) | {y})
                body = rename_bound(body, x, nx)
                x = nx
            if y in avoid or y == x:
                ny = fresh_name(y, avoid | free_vars(body) | {x})
                body = rename_bound(body, y, ny)
                y = ny
            return TensorLet(scr, x, y, go(body, avoid | {x, y}))
        raise TypeError(f"not a term: {t!r}")

    return go(t, free_vars(t))


def parse_term(text: str, signature=None) -> Term:
    toks = tokenize(text)
    p = _Parser(toks, signature)
    t = p.parse_term()
    tok = p.peek()
    if tok.kind != "eof":
        raise SyntaxErrorV(f"trailing input {tok.text!r}", tok.line, tok.col)
    return freshen_bound(t)


def parse_type(text: str) -> LinType:
    toks = tokenize(text)
    p = _Parser(toks)
    ty = p.parse_type()
    tok = p.peek()
    if tok.kind != "eof":
        raise SyntaxErrorV(f"trailing input {tok.text!r}", tok.line, tok.col)
    return ty


# ---------------------------------------------------------------------------
# printer


def print_type(ty: LinType) -> str:
    def go(ty: LinType, level: int) -> str:
        # level 0: anything; 1: product operand; 2: atom
        if isinstance(ty, Ground):
            return ty.name
        if isinstance(ty, Unit):
            return "I"
        if isinstance(ty, TensorT):
            s = f"{go(ty.left, 1)} * {go(ty.right, 2)}"
            return f"({s})" if level >= 2 else s
        if isinstance(ty, Lolli):
            s = f"{go(ty.left, 1)} -o {go(ty.right, 0)}"
            return f"({s})" if level >= 1 else s
        raise TypeError(f"not a type: {ty!r}")

    return go(ty, 0)


def print_term(t: Term) -> str:
    def go(t: Term, level: int) -> str:
        # level 0: term; 1: tensor operand; 2: app head; 3: app argument
        if isinstance(t, Var):
            return t.name
        if isinstance(t, Star):
            return "(*)" if level >= 3 else "*"
        if isinstance(t, Op):
            inner = ", ".join(go(a, 0) for a in t.args)
            return f"{t.symbol}({inner})"
        if isinstance(t, App):
            s = f"{go(t.fn, 2)} {go(t.arg, 3)}"
            return f"({s})" if level >= 3 else s
        if isinstance(t, TensorIntro):
            s = f"{go(t.left, 1)} * {go(t.right, 2)}"
            return f"({s})" if level >= 2 else s
        if isinstance(t, Lam):
            s = f"\\{t.var}:{print_type(t.ty)}. {go(t.body, 0)}"
            return f"({s})" if level >= 1 else s
        if isinstance(t, UnitLet):
            s = f"{go(t.scrutinee, 1)} to *. {go(t.body, 0)}"
            return f"({s})" if level >= 1 else s
        if isinstance(t, TensorLet):
            s = f"pm {go(t.scrutinee, 1)} to {t.x} * {t.y}. {go(t.body, 0)}"
            return f"({s})" if level >= 1 else s
        raise TypeError(f"not a term: {t!r}")

    return go(t, 0)


# ---------------------------------------------------------------------------
# contexts


def parse_context(text: str) -> TypingContext:
    """Parse ``x:X, y:Y`` or ``-`` for the empty context."""
    text = text.strip()
    if text in ("-", ""):
        return ()
    entries: List[Tuple[str, LinType]] = []
    for chunk in _split_top_commas(text):
        if ":" not in chunk:
            raise SyntaxErrorV(f"context entry {chunk.strip()!r} needs 'name : type'")
        name, _, tytext = chunk.partition(":")
        name = name.strip()
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name):
            raise SyntaxErrorV(f"bad variable name {name!r}")
        entries.append((name, parse_type(tytext)))
    names = [n for n, _ in entries]
    if len(set(names)) != len(names):
        raise SyntaxErrorV("duplicate variable in context")
    return tuple(entries)


def _split_top_commas(text: str) -> List[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return parts


def print_context(ctx: TypingContext) -> str:
    if not ctx:
        return "-"
    return ", ".join(f"{n}:{print_type(ty)}" for n, ty in ctx)
