"""Linear typing with deterministic derivation reconstruction.

Judgements have unique derivations because context splits are forced: each
premise of a multi-premise rule receives exactly the conclusion-context
variables that occur free in its subterm, in conclusion order, and the
shuffle witness is the conclusion context itself.  ``exchange`` and
``subst_derivation`` are the admissible transformations, implemented
structurally rather than by re-inference.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .syntax import (
    App,
    Ground,
    Lam,
    LinType,
    Lolli,
    Op,
    Star,
    TensorIntro,
    TensorLet,
    TensorT,
    Term,
    TypingContext,
    Unit,
    UnitLet,
    UNIT,
    Var,
    free_vars,
    is_shuffle,
    print_context,
    print_term,
    print_type,
    substitute,
)


class TypeCheckError(Exception):
    pass


class UnboundVariableError(TypeCheckError):
    pass


class DuplicateVariableError(TypeCheckError):
    """A linear variable is used more than once."""


class UnusedVariableError(TypeCheckError):
    """A linear variable is never used."""


class TypeMismatchError(TypeCheckError):
    pass


class SignatureError(TypeCheckError):
    """Unknown operation symbol or arity/sort mismatch."""


class VariableClashError(TypeCheckError):
    pass


@dataclass(frozen=True)
class TypingDerivation:
    """One node of the unique proof tree for ctx |> term : ty.

    ``parts`` is the context-split witness for multi-premise rules; the
    shuffle used is always the conclusion context itself.
    """

    ctx: TypingContext
    term: Term
    ty: LinType
    rule: str  # ax | hyp | I_i | I_e | tensor_i | tensor_e | lolli_i | lolli_e
    premises: Tuple["TypingDerivation", ...] = ()
    parts: Optional[Tuple[TypingContext, ...]] = None

    def __repr__(self):
        return (
            f"<{self.rule}: {print_context(self.ctx)} |> "
            f"{print_term(self.term)} : {print_type(self.ty)}>"
        )


def format_derivation(d: TypingDerivation, indent: int = 0) -> str:
    pad = "  " * indent
    line = (
        f"{pad}[{self_rule(d)}] {print_context(d.ctx)} |- "
        f"{print_term(d.term)} : {print_type(d.ty)}"
    )
    lines = [line]
    for p in d.premises:
        lines.append(format_derivation(p, indent + 1))
    return "\n".join(lines)


def self_rule(d: TypingDerivation) -> str:
    return d.rule


def _project(ctx: TypingContext, term: Term) -> TypingContext:
    fv = free_vars(term)
    return tuple(entry for entry in ctx if entry[0] in fv)


def _check_linear_use(ctx: TypingContext, term: Term) -> None:
    from .syntax import count_occurrences

    for name, _ in ctx:
        n = count_occurrences(term, name)
        if n == 0:
            raise UnusedVariableError(
                f"linear variable {name!r} is unused in {print_term(term)}"
            )
        if n > 1:
            raise DuplicateVariableError(
                f"linear variable {name!r} is used {n} times in {print_term(term)}"
            )


def infer(ctx: TypingContext, term: Term, signature=None) -> TypingDerivation:
    """Reconstruct the unique derivation of ctx |> term, or raise."""
    names = [n for n, _ in ctx]
    if len(set(names)) != len(names):
        raise DuplicateVariableError("typing context contains a duplicate variable")
    fv = free_vars(term)
    for v in fv:
        if v not in names:
            raise UnboundVariableError(f"unbound variable {v!r}")
    _check_linear_use(ctx, term)
    return _infer(ctx, term, signature)


def _infer(ctx: TypingContext, term: Term, sig) -> TypingDerivation:
    if isinstance(term, Var):
        if len(ctx) != 1 or ctx[0][0] != term.name:
            raise UnboundVariableError(
                f"variable {term.name!r} does not match context {print_context(ctx)}"
            )
        return TypingDerivation(ctx, term, ctx[0][1], "hyp")

    if isinstance(term, Star):
        if ctx:
            raise UnusedVariableError("the unit value takes an empty context")
        return TypingDerivation(ctx, term, UNIT, "I_i")

    if isinstance(term, Op):
        if sig is None:
            raise SignatureError(
                f"operation {term.symbol!r} used without a signature"
            )
        if not sig.has_op(term.symbol):
            raise SignatureError(f"unknown operation symbol {term.symbol!r}")
        arg_tys, res_ty = sig.op_type(term.symbol)
        if len(arg_tys) != len(term.args):
            raise SignatureError(
                f"operation {term.symbol!r} expects {len(arg_tys)} argument(s), "
                f"got {len(term.args)}"
            )
        parts = tuple(_project(ctx, a) for a in term.args)
        _check_split(ctx, parts)
        prems = []
        for a, part, want in zip(term.args, parts, arg_tys):
            d = _infer(part, a, sig)
            if d.ty != want:
                raise TypeMismatchError(
                    f"argument {print_term(a)} of {term.symbol!r} has type "
                    f"{print_type(d.ty)}, expected {print_type(want)}"
                )
            prems.append(d)
        return TypingDerivation(ctx, term, res_ty, "ax", tuple(prems), parts)

    if isinstance(term, UnitLet):
        parts = (_project(ctx, term.scrutinee), _project(ctx, term.body))
        _check_split(ctx, parts)
        d1 = _infer(parts[0], term.scrutinee, sig)
        if d1.ty != UNIT:
            raise TypeMismatchError(
                f"unit elimination scrutinee has type {print_type(d1.ty)}, expected I"
            )
        d2 = _infer(parts[1], term.body, sig)
        return TypingDerivation(ctx, term, d2.ty, "I_e", (d1, d2), parts)

    if isinstance(term, TensorIntro):
        parts = (_project(ctx, term.left), _project(ctx, term.right))
        _check_split(ctx, parts)
        d1 = _infer(parts[0], term.left, sig)
        d2 = _infer(parts[1], term.right, sig)
        return TypingDerivation(
            ctx, term, TensorT(d1.ty, d2.ty), "tensor_i", (d1, d2), parts
        )

    if isinstance(term, TensorLet):
        if term.x == term.y:
            raise DuplicateVariableError(
                f"pattern variables must be distinct, got {term.x!r} twice"
            )
        for b in (term.x, term.y):
            if any(n == b for n, _ in ctx):
                raise DuplicateVariableError(
                    f"binder {b!r} shadows a context variable"
                )
        body_wo = _project(ctx, term.body)
        parts = (_project(ctx, term.scrutinee), body_wo)
        _check_split(ctx, parts)
        d1 = _infer(parts[0], term.scrutinee, sig)
        if not isinstance(d1.ty, TensorT):
            raise TypeMismatchError(
                f"pattern-match scrutinee has type {print_type(d1.ty)}, expected a product"
            )
        inner_ctx = body_wo + ((term.x, d1.ty.left), (term.y, d1.ty.right))
        _check_linear_use(
            ((term.x, d1.ty.left), (term.y, d1.ty.right)), term.body
        )
        d2 = _infer(inner_ctx, term.body, sig)
        return TypingDerivation(ctx, term, d2.ty, "tensor_e", (d1, d2), parts)

    if isinstance(term, Lam):
        if any(n == term.var for n, _ in ctx):
            raise DuplicateVariableError(
                f"binder {term.var!r} shadows a context variable"
            )
        _check_linear_use(((term.var, term.ty),), term.body)
        d = _infer(ctx + ((term.var, term.ty),), term.body, sig)
        return TypingDerivation(ctx, term, Lolli(term.ty, d.ty), "lolli_i", (d,))

    if isinstance(term, App):
        parts = (_project(ctx, term.fn), _project(ctx, term.arg))
        _check_split(ctx, parts)
        d1 = _infer(parts[0], term.fn, sig)
        if not isinstance(d1.ty, Lolli):
            raise TypeMismatchError(
                f"applied term has type {print_type(d1.ty)}, expected a function"
            )
        d2 = _infer(parts[1], term.arg, sig)
        if d2.ty != d1.ty.left:
            raise TypeMismatchError(
                f"argument has type {print_type(d2.ty)}, expected {print_type(d1.ty.left)}"
            )
        return TypingDerivation(ctx, term, d1.ty.right, "lolli_e", (d1, d2), parts)

    raise TypeCheckError(f"not a term: {term!r}")


def _check_split(ctx: TypingContext, parts: Tuple[TypingContext, ...]) -> None:
    # free-variable projection always yields order-preserving subsequences;
    # what can fail is coverage, which linear-use checking reports upstream.
    seen = set()
    for p in parts:
        for n, _ in p:
            if n in seen:
                raise DuplicateVariableError(f"variable {n!r} used in two premises")
            seen.add(n)
    assert is_shuffle(ctx, parts)


# ---------------------------------------------------------------------------
# validation (independent of infer; used by tests and transformations)


def validate_derivation(d: TypingDerivation, signature=None) -> None:
    """Check every node instantiates its formation rule exactly."""
    names = [n for n, _ in d.ctx]
    if len(set(names)) != len(names):
        raise TypeCheckError("duplicate variable in conclusion context")

    if d.rule == "hyp":
        ok = (
            isinstance(d.term, Var)
            and len(d.ctx) == 1
            and d.ctx[0] == (d.term.name, d.ty)
            and not d.premises
        )
        if not ok:
            raise TypeCheckError("malformed hyp node")
        return

    if d.rule == "I_i":
        if not (isinstance(d.term, Star) and d.ctx == () and d.ty == UNIT):
            raise TypeCheckError("malformed I_i node")
        return

    if d.rule == "lolli_i":
        if not (isinstance(d.term, Lam) and len(d.premises) == 1):
            raise TypeCheckError("malformed lolli_i node")
        (p,) = d.premises
        want_ctx = d.ctx + ((d.term.var, d.term.ty),)
        if p.ctx != want_ctx or p.term != d.term.body:
            raise TypeCheckError("lolli_i premise context/term mismatch")
        if d.ty != Lolli(d.term.ty, p.ty):
            raise TypeCheckError("lolli_i type mismatch")
        validate_derivation(p, signature)
        return

    if d.parts is None or not is_shuffle(d.ctx, d.parts):
        raise TypeCheckError(f"{d.rule} node lacks a valid split witness")
    seen = set()
    for part in d.parts:
        for n, _ in part:
            if n in seen:
                raise TypeCheckError("split witness repeats a variable")
            seen.add(n)
    if seen != set(names):
        raise TypeCheckError("split witness does not cover the context")

    if d.rule == "ax":
        if not isinstance(d.term, Op) or signature is None:
            if signature is None:
                raise SignatureError("validating an ax node needs a signature")
            raise TypeCheckError("malformed ax node")
        arg_tys, res_ty = signature.op_type(d.term.symbol)
        if len(d.premises) != len(d.term.args) or len(d.parts) != len(d.term.args):
            raise TypeCheckError("ax arity mismatch")
        if d.ty != res_ty:
            raise TypeCheckError("ax result type mismatch")
        for p, part, arg, want in zip(d.premises, d.parts, d.term.args, arg_tys):
            if p.ctx != part or p.term != arg or p.ty != want:
                raise TypeCheckError("ax premise mismatch")
            validate_derivation(p, signature)
        return

    if d.rule == "I_e":
        if not isinstance(d.term, UnitLet) or len(d.premises) != 2:
            raise TypeCheckError("malformed I_e node")
        p1, p2 = d.premises
        if p1.ctx != d.parts[0] or p1.term != d.term.scrutinee or p1.ty != UNIT:
            raise TypeCheckError("I_e scrutinee premise mismatch")
        if p2.ctx != d.parts[1] or p2.term != d.term.body or p2.ty != d.ty:
            raise TypeCheckError("I_e body premise mismatch")
        validate_derivation(p1, signature)
        validate_derivation(p2, signature)
        return

    if d.rule == "tensor_i":
        if not isinstance(d.term, TensorIntro) or len(d.premises) != 2:
            raise TypeCheckError("malformed tensor_i node")
        p1, p2 = d.premises
        if p1.ctx != d.parts[0] or p1.term != d.term.left:
            raise TypeCheckError("tensor_i left premise mismatch")
        if p2.ctx != d.parts[1] or p2.term != d.term.right:
            raise TypeCheckError("tensor_i right premise mismatch")
        if d.ty != TensorT(p1.ty, p2.ty):
            raise TypeCheckError("tensor_i type mismatch")
        validate_derivation(p1, signature)
        validate_derivation(p2, signature)
        return

    if d.rule == "tensor_e":
        if not isinstance(d.term, TensorLet) or len(d.premises) != 2:
            raise TypeCheckError("malformed tensor_e node")
        p1, p2 = d.premises
        if p1.ctx != d.parts[0] or p1.term != d.term.scrutinee:
            raise TypeCheckError("tensor_e scrutinee premise mismatch")
        if not isinstance(p1.ty, TensorT):
            raise TypeCheckError("tensor_e scrutinee is not a product")
        want_ctx = d.parts[1] + ((d.term.x, p1.ty.left), (d.term.y, p1.ty.right))
        if p2.ctx != want_ctx or p2.term != d.term.body or p2.ty != d.ty:
            raise TypeCheckError("tensor_e body premise mismatch")
        validate_derivation(p1, signature)
        validate_derivation(p2, signature)
        return

    if d.rule == "lolli_e":
        if not isinstance(d.term, App) or len(d.premises) != 2:
            raise TypeCheckError("malformed lolli_e node")
        p1, p2 = d.premises
        if p1.ctx != d.parts[0] or p1.term != d.term.fn:
            raise TypeCheckError("lolli_e function premise mismatch")
        if not isinstance(p1.ty, Lolli):
            raise TypeCheckError("lolli_e head is not a function")
        if p2.ctx != d.parts[1] or p2.term != d.term.arg or p2.ty != p1.ty.left:
            raise TypeCheckError("lolli_e argument premise mismatch")
        if d.ty != p1.ty.right:
            raise TypeCheckError("lolli_e result type mismatch")
        validate_derivation(p1, signature)
        validate_derivation(p2, signature)
        return

    raise TypeCheckError(f"unknown rule {d.rule!r}")


# ---------------------------------------------------------------------------
# exchange


def _swap(ctx: TypingContext, i: int) -> TypingContext:
    return ctx[:i] + (ctx[i + 1], ctx[i]) + ctx[i + 2 :]


def exchange(d: TypingDerivation, i: int) -> TypingDerivation:
    """Derive the same judgement with context positions i and i+1 swapped."""
    if not (0 <= i < len(d.ctx) - 1):
        raise TypeCheckError(
            f"exchange position {i} out of range for context of size {len(d.ctx)}"
        )
    a, b = d.ctx[i], d.ctx[i + 1]
    new_ctx = _swap(d.ctx, i)

    if d.rule == "lolli_i":
        (p,) = d.premises
        return TypingDerivation(
            new_ctx, d.term, d.ty, "lolli_i", (exchange(p, i),), None
        )

    assert d.parts is not None, f"rule {d.rule} cannot own a 2-variable context"
    pa = _part_of(d.parts, a[0])
    pb = _part_of(d.parts, b[0])
    if pa != pb:
        # the same premises witness the swapped conclusion
        return TypingDerivation(new_ctx, d.term, d.ty, d.rule, d.premises, d.parts)

    j = pa
    pos = [n for n, _ in d.parts[j]].index(a[0])
    new_parts = d.parts[:j] + (_swap(d.parts[j], pos),) + d.parts[j + 1 :]
    prem = d.premises[j]
    new_prem = exchange(prem, pos)
    new_premises = d.premises[:j] + (new_prem,) + d.premises[j + 1 :]
    return TypingDerivation(new_ctx, d.term, d.ty, d.rule, new_premises, new_parts)


def _part_of(parts: Tuple[TypingContext, ...], name: str) -> int:
    for j, p in enumerate(parts):
        if any(n == name for n, _ in p):
            return j
    raise TypeCheckError(f"variable {name!r} not found in split witness")


def _move_right(d: TypingDerivation, pos: int, steps: int) -> TypingDerivation:
    for _ in range(steps):
        d = exchange(d, pos)
        pos += 1
    return d


# ---------------------------------------------------------------------------
# context-variable renaming (admissible; used to avoid clashes in subst)


def rename_ctx_var(d: TypingDerivation, old: str, new: str) -> TypingDerivation:
    if old == new:
        return d
    if any(n == new for n, _ in d.ctx):
        raise VariableClashError(f"cannot rename {old!r}: {new!r} already in context")

    def ren(ctx: TypingContext) -> TypingContext:
        return tuple((new if n == old else n, ty) for n, ty in ctx)

    term = substitute(d.term, old, Var(new), _warn=False)
    if d.rule in ("hyp",):
        return TypingDerivation(ren(d.ctx), term, d.ty, d.rule)
    if d.rule == "I_i":
        return d
    if d.rule == "lolli_i":
        (p,) = d.premises
        return TypingDerivation(
            ren(d.ctx), term, d.ty, "lolli_i", (rename_ctx_var(p, old, new),)
        )
    new_parts = tuple(ren(p) for p in d.parts)
    new_premises = tuple(
        rename_ctx_var(p, old, new)
        if any(n == old for n, _ in p.ctx)
        else p
        for p in d.premises
    )
    return TypingDerivation(ren(d.ctx), term, d.ty, d.rule, new_premises, new_parts)


# ---------------------------------------------------------------------------
# substitution on derivations


def subst_derivation(
    d1: TypingDerivation, d2: TypingDerivation
) -> TypingDerivation:
    """From Gamma, x:A |> v : B and Delta |> w : A derive Gamma,Delta |> v[w/x] : B.

    ``x`` is the last variable of d1's context.  Contexts must be disjoint.
    """
    if not d1.ctx:
        raise TypeCheckError("substitution needs a non-empty context on the left")
    x, xty = d1.ctx[-1]
    if xty != d2.ty:
        raise TypeMismatchError(
            f"substituting a term of type {print_type(d2.ty)} for {x!r} : {print_type(xty)}"
        )
    gamma_names = {n for n, _ in d1.ctx[:-1]}
    delta_names = {n for n, _ in d2.ctx}
    clash = gamma_names & delta_names
    if clash:
        raise VariableClashError(f"contexts share variables {sorted(clash)!r}")
    return _subst(d1, d2)


def _subst(d1: TypingDerivation, d2: TypingDerivation) -> TypingDerivation:
    x, _ = d1.ctx[-1]
    delta_names = {n for n, _ in d2.ctx}

    if d1.rule == "hyp":
        return d2

    if d1.rule == "lolli_i":
        term = d1.term
        (p,) = d1.premises
        var = term.var
        if var in delta_names:
            fresh = _fresh_against(var, delta_names | {n for n, _ in p.ctx})
            p = rename_ctx_var(p, var, fresh)
            var = fresh
        # premise context is Gamma, x, var; move x to the end, substitute,
        # then float var back past Delta
        p = exchange(p, len(p.ctx) - 2)
        p = _subst(p, d2)
        pos = len(d1.ctx) - 1  # var's index after substitution
        p = _move_right(p, pos, len(d2.ctx))
        new_ctx = d1.ctx[:-1] + d2.ctx
        return TypingDerivation(
            new_ctx,
            Lam(var, term.ty, p.term),
            d1.ty,
            "lolli_i",
            (p,),
        )

    assert d1.parts is not None
    j = _part_of(d1.parts, x)
    part = d1.parts[j]
    assert part[-1][0] == x, "substituted variable must be last in its part"

    if d1.rule == "tensor_e" and j == 1:
        p2 = d1.premises[1]
        bx, by = d1.term.x, d1.term.y
        if bx in delta_names:
            nb = _fresh_against(bx, delta_names | {n for n, _ in p2.ctx} | {by})
            p2 = rename_ctx_var(p2, bx, nb)
            bx = nb
        if by in delta_names:
            nb = _fresh_against(by, delta_names | {n for n, _ in p2.ctx} | {bx})
            p2 = rename_ctx_var(p2, by, nb)
            by = nb
        # p2 context is part1, bx, by with x last inside part1
        k = len(part) - 1  # x's index within p2.ctx
        p2 = _move_right(p2, k, 2)  # bring x to the end past bx, by
        p2 = _subst(p2, d2)
        # now: part1[:-1], bx, by, Delta; float bx and by to the end
        base = len(part) - 1
        p2 = _move_right(p2, base, len(d2.ctx))
        p2 = _move_right(p2, base, len(d2.ctx))
        new_part = part[:-1] + d2.ctx
        new_parts = (d1.parts[0], new_part)
        new_ctx = d1.ctx[:-1] + d2.ctx
        term = TensorLet(d1.term.scrutinee, bx, by, p2.term)
        return TypingDerivation(
            new_ctx, term, d1.ty, "tensor_e", (d1.premises[0], p2), new_parts
        )

    # premise j's context is exactly the part; recurse with x last there
    prem = d1.premises[j]
    new_prem = _subst(prem, d2)
    new_part = part[:-1] + d2.ctx
    new_parts = d1.parts[:j] + (new_part,) + d1.parts[j + 1 :]
    new_premises = d1.premises[:j] + (new_prem,) + d1.premises[j + 1 :]
    new_ctx = d1.ctx[:-1] + d2.ctx
    term = _rebuild(d1.term, d1.rule, new_premises, j)
    return TypingDerivation(new_ctx, term, d1.ty, d1.rule, new_premises, new_parts)


def _rebuild(term: Term, rule: str, premises, j: int) -> Term:
    if rule == "ax":
        args = tuple(p.term for p in premises)
        return Op(term.symbol, args)
    if rule == "I_e":
        return UnitLet(premises[0].term, premises[1].term)
    if rule == "tensor_i":
        return TensorIntro(premises[0].term, premises[1].term)
    if rule == "tensor_e":
        return TensorLet(premises[0].term, term.x, term.y, premises[1].term)
    if rule == "lolli_e":
        return App(premises[0].term, premises[1].term)
    raise TypeCheckError(f"cannot rebuild under rule {rule!r}")


def _fresh_against(base: str, avoid) -> str:
    from .syntax import fresh_name

    return fresh_name(base, set(avoid))
