"""Signatures, labelled axioms, and the theory-file format.

A theory file is line-oriented ASCII.  ``#`` starts a comment.  Directives::

    quantale metric                    # bool | godel | metric | ultrametric
    symmetric true                     # close theorems under symmetry
    ground X                           # declare a ground type
    op wait_n : X -> X for n in 0..32  # operation (family) declaration
    op plus : Real, Real -> Real
    axiom [x:X] wait_0(x) ={0} x
    axiom [x:X] wait_n(x) ={|n-m|} wait_m(x) for n,m in 0..32
    axiom [x:X] wait_n(wait_m(x)) ={0} wait_{n+m}(x) for n,m in 0..32 if n+m <= 32
    axiom [x:X] v = w                  # classical: both directions at top
    axiom [x:X] v <= w                 # directed, labelled top

Schema parameters range over the inclusive integer interval of the ``for``
clause, filtered by the optional ``if`` conjunction of comparisons.  Inside
names, a ``_``-separated segment equal to a parameter is replaced by its
value, and ``{expr}`` segments are evaluated (so ``wait_{n+m}`` works); the
same ``{expr}`` form gives computed labels such as ``{|n-m|}``.  Instances
that mention an undeclared operation (e.g. past the family bound) are
skipped.  Axiom labels must be basis elements, which for the shipped
quantales means exact rationals (or ``inf``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import quantale as qt
from .quantale import INF, QuantaleSpec, QuantaleValue
from .syntax import (
    LinType,
    SyntaxErrorV,
    Term,
    TypingContext,
    Ground,
    TensorT,
    Lolli,
    Unit,
    parse_context,
    parse_term,
    parse_type,
    print_context,
    print_term,
    print_type,
)
from .typecheck import TypeCheckError, infer


class TheoryError(Exception):
    pass


class SortError(TheoryError):
    pass


class LabelError(TheoryError):
    """Axiom label is not a basis element of the theory's quantale."""


class DuplicateSymbolError(TheoryError):
    pass


@dataclass(frozen=True)
class Signature:
    """Ground types plus sorted operation symbols (arity >= 1)."""

    ground_types: frozenset
    operations: Dict[str, Tuple[Tuple[LinType, ...], LinType]] = field(
        default_factory=dict
    )

    def has_op(self, symbol: str) -> bool:
        return symbol in self.operations

    def op_type(self, symbol: str) -> Tuple[Tuple[LinType, ...], LinType]:
        return self.operations[symbol]

    def check_sort(self, ty: LinType) -> None:
        if isinstance(ty, Ground):
            if ty.name not in self.ground_types:
                raise SortError(f"undeclared ground type {ty.name!r}")
        elif isinstance(ty, (TensorT, Lolli)):
            self.check_sort(ty.left)
            self.check_sort(ty.right)
        elif isinstance(ty, Unit):
            pass
        else:
            raise SortError(f"not a type: {ty!r}")


def make_signature(
    ground: Sequence[str],
    operations: Dict[str, Tuple[Sequence[LinType], LinType]],
) -> Signature:
    sig = Signature(frozenset(ground), {})
    for sym, (args, res) in operations.items():
        if len(args) < 1:
            raise SortError(f"operation {sym!r} needs at least one argument sort")
        entry = (tuple(args), res)
        for ty in entry[0] + (entry[1],):
            sig.check_sort(ty)
        if sym in sig.operations:
            raise DuplicateSymbolError(f"operation {sym!r} declared twice")
        sig.operations[sym] = entry
    return sig


@dataclass(frozen=True)
class Equation:
    """A directed labelled equation-in-context."""

    context: TypingContext
    lhs: Term
    rhs: Term
    label: QuantaleValue

    def __repr__(self):
        return (
            f"{print_context(self.context)} |- {print_term(self.lhs)} "
            f"={{{self.label}}} {print_term(self.rhs)}"
        )


@dataclass(frozen=True)
class Theory:
    signature: Signature
    quantale: QuantaleSpec
    axioms: Tuple[Equation, ...]
    symmetric: bool = False

    def __repr__(self):
        return (
            f"<Theory {self.quantale.name}, {len(self.signature.operations)} ops, "
            f"{len(self.axioms)} axioms{', symmetric' if self.symmetric else ''}>"
        )


def validate_equation(
    sig: Signature, spec: QuantaleSpec, eq: Equation
) -> LinType:
    """Both sides must typecheck at a common type; label must be a basis element."""
    for _, ty in eq.context:
        sig.check_sort(ty)
    d1 = infer(eq.context, eq.lhs, sig)
    d2 = infer(eq.context, eq.rhs, sig)
    if d1.ty != d2.ty:
        raise SortError(
            f"equation sides have different types: {print_type(d1.ty)} vs {print_type(d2.ty)}"
        )
    if eq.label.spec is not spec:
        raise LabelError("axiom label belongs to a different quantale")
    if not spec.is_basis(eq.label):
        raise LabelError(f"label {eq.label} is not a basis element")
    return d1.ty


def make_theory(
    signature: Signature,
    spec: QuantaleSpec,
    axioms: Sequence[Equation],
    symmetric: bool = False,
) -> Theory:
    for eq in axioms:
        validate_equation(signature, spec, eq)
    return Theory(signature, spec, tuple(axioms), symmetric)


def classical_equation(
    ctx: TypingContext, v: Term, w: Term, spec: QuantaleSpec
) -> Tuple[Equation, Equation]:
    """The two top-labelled directed equations denoted by a plain equation."""
    top = spec.top
    return (Equation(ctx, v, w, top), Equation(ctx, w, v, top))


# ---------------------------------------------------------------------------
# schema parameter arithmetic


class _ExprParser:
    """Arithmetic over Fractions: + - * / |..| parentheses, params, inf."""

    def __init__(self, text: str, env: Dict[str, Fraction]):
        self.toks = re.findall(r"\d+|[A-Za-z_][A-Za-z0-9_]*|[-+*/()|]", text)
        if "".join(self.toks).replace(" ", "") != text.replace(" ", ""):
            raise TheoryError(f"bad arithmetic expression {text!r}")
        self.i = 0
        self.env = env

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def parse(self):
        v = self.expr()
        if self.peek() is not None:
            raise TheoryError(f"trailing tokens in expression: {self.peek()!r}")
        return v

    def expr(self):
        v = self.term()
        while self.peek() in ("+", "-"):
            op = self.next()
            r = self.term()
            if v is INF or r is INF:
                v = INF
            else:
                v = v + r if op == "+" else v - r
        return v

    def term(self):
        v = self.factor()
        while self.peek() in ("*", "/"):
            op = self.next()
            r = self.factor()
            if v is INF or r is INF:
                raise TheoryError("cannot multiply or divide by inf in a label")
            v = v * r if op == "*" else v / r
        return v

    def factor(self):
        t = self.next()
        if t is None:
            raise TheoryError("unexpected end of expression")
        if t == "-":
            v = self.factor()
            return v if v is INF else -v
        if t == "(":
            v = self.expr()
            if self.next() != ")":
                raise TheoryError("missing ')' in expression")
            return v
        if t == "|":
            v = self.expr()
            if self.next() != "|":
                raise TheoryError("missing closing '|' in expression")
            return v if v is INF else abs(v)
        if t == "inf":
            return INF
        if re.fullmatch(r"\d+", t):
            return Fraction(t)
        if t in self.env:
            return self.env[t]
        raise TheoryError(f"unknown name {t!r} in expression")


def eval_index_expr(text: str, env: Dict[str, Fraction]):
    return _ExprParser(text, env).parse()


def _instantiate_text(template: str, env: Dict[str, Fraction]) -> str:
    """Substitute {expr} blocks and parameter name segments in a schema line."""

    def brace(m: re.Match) -> str:
        val = eval_index_expr(m.group(1), env)
        if val is INF:
            return "inf"
        return str(val)

    out = re.sub(r"\{([^{}]*)\}", brace, template)

    def ident(m: re.Match) -> str:
        word = m.group(0)
        segs = word.split("_")
        segs = [
            str(env[s]) if s in env and env[s].denominator == 1 else s for s in segs
        ]
        return "_".join(segs)

    return re.sub(r"[A-Za-z_][A-Za-z0-9_]*", ident, out)


_CMP = {
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
}


def _eval_condition(cond: str, env: Dict[str, Fraction]) -> bool:
    for clause in cond.split(","):
        m = re.match(r"^(.*?)(<=|>=|==|!=|<|>)(.*)$", clause.strip())
        if not m:
            raise TheoryError(f"bad condition {clause.strip()!r}")
        a = eval_index_expr(m.group(1), env)
        b = eval_index_expr(m.group(3), env)
        if a is INF or b is INF:
            raise TheoryError("inf is not allowed in schema conditions")
        if not _CMP[m.group(2)](a, b):
            return False
    return True


def _param_environments(
    params: List[str], lo: int, hi: int, cond: Optional[str]
) -> List[Dict[str, Fraction]]:
    envs: List[Dict[str, Fraction]] = [{}]
    for p in params:
        envs = [dict(e, **{p: Fraction(v)}) for e in envs for v in range(lo, hi + 1)]
    if cond:
        envs = [e for e in envs if _eval_condition(cond, e)]
    return envs


_FOR_RE = re.compile(
    r"^(?P<body>.*?)\s+for\s+(?P<params>[A-Za-z_][A-Za-z0-9_]*(?:\s*,\s*[A-Za-z_][A-Za-z0-9_]*)*)"
    r"\s+in\s+(?P<lo>-?\d+)\s*\.\.\s*(?P<hi>-?\d+)\s*(?:if\s+(?P<cond>.*))?$"
)


def _split_schema(line: str):
    m = _FOR_RE.match(line)
    if not m:
        return line, None
    params = [p.strip() for p in m.group("params").split(",")]
    return m.group("body"), (params, int(m.group("lo")), int(m.group("hi")), m.group("cond"))


# ---------------------------------------------------------------------------
# loading and saving


_AXIOM_RE = re.compile(r"^\[(?P<ctx>[^\]]*)\]\s*(?P<rest>.*)$")


def _split_axiom_body(body: str):
    """Split into (lhs, kind, label_text, rhs); kind in {label, classical, leq}."""
    depth = 0
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0:
            if body.startswith("={", i):
                j = body.index("}", i)
                return body[:i], "label", body[i + 2 : j], body[j + 1 :]
            if body.startswith("<=", i):
                return body[:i], "leq", None, body[i + 2 :]
            if ch == "=" and not body.startswith("=_", i):
                return body[:i], "classical", None, body[i + 1 :]
        i += 1
    raise TheoryError(f"no relation symbol found in axiom {body!r}")


def load_theory(text: str) -> Theory:
    spec: Optional[QuantaleSpec] = None
    symmetric = False
    ground: List[str] = []
    op_decls: List[Tuple[str, str]] = []  # (name, ': sorts -> sort' text)
    axiom_lines: List[str] = []

    # first pass: classify lines and expand op families
    pending_ops: List[str] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("quantale"):
            spec = qt.by_name(line.split(None, 1)[1].strip())
        elif line.startswith("symmetric"):
            flag = line.split(None, 1)[1].strip().lower()
            if flag not in ("true", "false"):
                raise TheoryError(f"symmetric expects true or false, got {flag!r}")
            symmetric = flag == "true"
        elif line.startswith("ground"):
            name = line.split(None, 1)[1].strip()
            if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name) or name == "I":
                raise TheoryError(f"bad ground type name {name!r}")
            ground.append(name)
        elif line.startswith("op "):
            pending_ops.append(line[3:].strip())
        elif line.startswith("axiom "):
            axiom_lines.append(line[6:].strip())
        else:
            raise TheoryError(f"unrecognized directive: {line!r}")

    if spec is None:
        raise TheoryError("theory file does not declare a quantale")

    operations: Dict[str, Tuple[Tuple[LinType, ...], LinType]] = {}
    for decl in pending_ops:
        body, schema = _split_schema(decl)
        envs = [{}] if schema is None else _param_environments(*schema)
        for env in envs:
            inst = _instantiate_text(body, env)
            m = re.match(r"^([A-Za-z_0-9]+)\s*:\s*(.*?)\s*->\s*(.*)$", inst)
            if not m:
                raise TheoryError(f"bad operation declaration {inst!r}")
            name = m.group(1)
            args = tuple(parse_type(s) for s in m.group(2).split(","))
            res = parse_type(m.group(3))
            if name in operations:
                raise DuplicateSymbolError(f"operation {name!r} declared twice")
            operations[name] = (args, res)

    sig = Signature(frozenset(ground), {})
    for name, entry in operations.items():
        for ty in entry[0] + (entry[1],):
            sig.check_sort(ty)
        if len(entry[0]) < 1:
            raise SortError(f"operation {name!r} needs at least one argument sort")
        sig.operations[name] = entry

    axioms: List[Equation] = []
    for decl in axiom_lines:
        body, schema = _split_schema(decl)
        envs = [{}] if schema is None else _param_environments(*schema)
        for env in envs:
            inst = _instantiate_text(body, env)
            m = _AXIOM_RE.match(inst)
            if not m:
                raise TheoryError(f"axiom needs a [context]: {inst!r}")
            ctx = parse_context(m.group("ctx"))
            lhs_t, kind, label_t, rhs_t = _split_axiom_body(m.group("rest"))
            try:
                lhs = parse_term(lhs_t.strip(), sig)
                rhs = parse_term(rhs_t.strip(), sig)
            except SyntaxErrorV as exc:
                if schema is not None and "unknown operation symbol" in str(exc):
                    continue  # instance fell outside the declared family
                raise
            if kind == "label":
                label_val = eval_index_expr(label_t.strip(), {})
                label = spec.value(label_val)
                axioms.append(Equation(ctx, lhs, rhs, label))
            elif kind == "classical":
                axioms.extend(classical_equation(ctx, lhs, rhs, spec))
            else:  # directed inequation sugar
                axioms.append(Equation(ctx, lhs, rhs, spec.top))

    try:
        return make_theory(sig, spec, axioms, symmetric)
    except TypeCheckError as exc:
        raise SortError(str(exc)) from exc


def save_theory(t: Theory) -> str:
    """Serialize at the instance level; load(save(t)) reproduces t."""
    lines = [f"quantale {t.quantale.name}", f"symmetric {str(t.symmetric).lower()}"]
    for g in sorted(t.signature.ground_types):
        lines.append(f"ground {g}")
    for name, (args, res) in t.signature.operations.items():
        arg_s = ", ".join(print_type(a) for a in args)
        lines.append(f"op {name} : {arg_s} -> {print_type(res)}")
    for ax in t.axioms:
        lines.append(
            f"axiom [{print_context(ax.context)}] "
            f"{print_term(ax.lhs)} ={{{ax.label}}} {print_term(ax.rhs)}"
        )
    return "\n".join(lines) + "\n"
