import random

import pytest

from vlam.syntax import (
    Ground,
    Lolli,
    TensorT,
    UNIT,
    Var,
    alpha_eq,
    parse_context,
    parse_term,
    substitute,
)
from vlam.theory import make_signature
from vlam.typecheck import (
    DuplicateVariableError,
    SignatureError,
    TypeMismatchError,
    TypingDerivation,
    UnboundVariableError,
    UnusedVariableError,
    exchange,
    infer,
    subst_derivation,
    validate_derivation,
)

X = Ground("X")

SIG = make_signature(
    ["X"],
    {
        f"wait_{n}": ((X,), X) for n in range(0, 9)
    },
)


def inf(ctx_text, term_text, sig=SIG):
    return infer(parse_context(ctx_text), parse_term(term_text, sig), sig)


def test_hyp():
    d = inf("x:X", "x")
    assert d.rule == "hyp" and d.ty == X
    validate_derivation(d, SIG)


def test_unit_intro():
    d = inf("-", "*")
    assert d.rule == "I_i" and d.ty == UNIT
    validate_derivation(d, SIG)


def test_nested_ops_singleton_splits():
    d = inf("x:X", "wait_1(wait_1(x))")
    assert d.rule == "ax"
    assert d.parts == ((("x", X),),)
    assert d.premises[0].rule == "ax"
    assert d.premises[0].premises[0].rule == "hyp"
    validate_derivation(d, SIG)


def test_lambda_and_app():
    d = inf("y:X", "(\\x:X. wait_2(x)) y")
    assert d.ty == X
    validate_derivation(d, SIG)


def test_tensor_rules():
    d = inf("x:X, y:X", "x * y")
    assert d.ty == TensorT(X, X)
    d2 = inf("p:X * X", "pm p to a * b. b * a")
    assert d2.ty == TensorT(X, X)
    validate_derivation(d2, SIG)


def test_unit_elims():
    d = inf("u:I, x:X", "u to *. x")
    assert d.ty == X
    validate_derivation(d, SIG)


def test_errors():
    with pytest.raises(UnboundVariableError):
        inf("-", "x")
    with pytest.raises(DuplicateVariableError):
        inf("x:X", "x * x")
    with pytest.raises(UnusedVariableError):
        inf("x:X, y:X", "x")
    with pytest.raises(UnusedVariableError):
        inf("x:X", "\\y:X. x")  # y unused under the binder
    with pytest.raises(TypeMismatchError):
        inf("x:X, y:X", "x to *. y")
    with pytest.raises(TypeMismatchError):
        inf("x:X, y:X", "x y")
    with pytest.raises(SignatureError):
        inf("x:X", "mystery(x)")
    with pytest.raises(SignatureError):
        infer(parse_context("x:X"), parse_term("wait_1(x)"), None)


def test_determinism():
    a = inf("x:X, y:X", "wait_1(x) * wait_2(y)")
    b = inf("x:X, y:X", "wait_1(x) * wait_2(y)")
    assert a == b


def test_exchange_tensor():
    d = inf("x:X, y:X", "x * y")
    e = exchange(d, 0)
    assert e.ctx == parse_context("y:X, x:X")
    assert e.term == d.term and e.ty == d.ty
    validate_derivation(e, SIG)
    # same premises, updated shuffle witness only
    assert e.premises == d.premises


def test_exchange_involution():
    d = inf("x:X, y:X, z:X", "wait_1(y) * (x * z)")
    e = exchange(exchange(d, 1), 1)
    assert e == d


def test_exchange_under_lambda():
    d = inf("x:X, y:X", "\\z:X. wait_1(x) * (y * z)")
    e = exchange(d, 0)
    validate_derivation(e, SIG)
    assert e.term == d.term


def test_exchange_within_one_part():
    # both swapped variables feed the same premise
    d = inf("x:X, y:X", "wait_0(x * y)" if False else "wait_0(x) * wait_0(y)")
    d = inf("x:X, y:X, z:X", "(x * y) * wait_0(z)")
    e = exchange(d, 0)
    validate_derivation(e, SIG)


def test_exchange_out_of_range():
    d = inf("x:X", "x")
    with pytest.raises(Exception):
        exchange(d, 0)


def test_subst_into_hyp_gives_argument():
    d1 = inf("x:X", "x")
    d2 = inf("y:X", "wait_1(y)")
    out = subst_derivation(d1, d2)
    assert out == d2


def test_subst_matches_infer():
    d1 = inf("a:X, x:X", "a * wait_1(x)")
    d2 = inf("b:X", "wait_2(b)")
    out = subst_derivation(d1, d2)
    validate_derivation(out, SIG)
    want = inf("a:X, b:X", "a * wait_1(wait_2(b))")
    assert out == want


def test_subst_under_lambda():
    d1 = inf("x:X", "\\y:X. x * y")
    d2 = inf("z:X", "wait_1(z)")
    out = subst_derivation(d1, d2)
    validate_derivation(out, SIG)
    assert out == inf("z:X", "\\y:X. wait_1(z) * y")


def test_subst_binder_clash_renames():
    d1 = inf("x:X", "\\y:X. x * y")
    d2 = inf("y:X", "wait_1(y)")
    out = subst_derivation(d1, d2)
    validate_derivation(out, SIG)
    assert out.ctx == parse_context("y:X")
    assert alpha_eq(out.term, parse_term("\\w:X. wait_1(y) * w"))


def test_subst_into_unitlet_body():
    d1 = inf("u:I, x:X", "u to *. wait_1(x)")
    d2 = inf("z:X", "wait_2(z)")
    out = subst_derivation(d1, d2)
    validate_derivation(out, SIG)
    assert out == inf("u:I, z:X", "u to *. wait_1(wait_2(z))")


def test_subst_into_tensorlet():
    d1 = inf("p:X * X, x:X", "pm p to a * b. (a * b) * wait_1(x)")
    d2 = inf("c:X", "wait_2(c)")
    out = subst_derivation(d1, d2)
    validate_derivation(out, SIG)
    assert out == inf("p:X * X, c:X", "pm p to a * b. (a * b) * wait_1(wait_2(c))")


def test_subst_result_equals_infer_on_substituted_term():
    rng = random.Random(21)
    terms_with_x = [
        ("a:X, x:X", "wait_3(x) * a"),
        ("x:X", "\\y:X. y * wait_1(x)"),
        ("u:I, x:X", "u to *. wait_1(x)"),
        ("x:X", "wait_1(wait_2(x))"),
        ("p:X * X, x:X", "pm p to s * t. (s * wait_1(t)) * x"),
    ]
    args = [("b:X", "wait_2(b)"), ("q:X", "q"), ("m:X, n:X", "m * n")]
    for ctx1, t1 in terms_with_x:
        for ctx2, t2 in args:
            if "m * n" in t2 and "*" not in t1:
                pass
            d1 = inf(ctx1, t1)
            # only X-typed substitutions apply here
            d2 = infer(parse_context(ctx2), parse_term(t2, SIG), SIG)
            if d2.ty != X:
                continue
            out = subst_derivation(d1, d2)
            validate_derivation(out, SIG)
            expected_term = substitute(
                parse_term(t1, SIG), "x", parse_term(t2, SIG)
            )
            merged = parse_context(ctx1)[:-1] + parse_context(ctx2)
            want = infer(merged, expected_term, SIG)
            assert out == want
