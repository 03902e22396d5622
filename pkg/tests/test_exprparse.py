import numpy as np
import pytest

from sdreflect.exprparse import (
    EvalOverflowError,
    EvalPoleError,
    ParseError,
    collect_u_indices,
    eval_ast,
    parse_expr,
    random_expression,
    reference_eval,
    to_source,
)


def test_linear_example():
    ast = parse_expr("lambda1 + 2*gamma")
    assert np.isclose(eval_ast(ast, [3, 1], gamma=1.0), 5.0)


def test_division_and_pole():
    ast = parse_expr("1/(u1-u2)")
    assert np.isclose(eval_ast(ast, [0, 0], {1: 2.0, 2: 0.0}), 0.5)
    with pytest.raises(EvalPoleError):
        eval_ast(ast, [0, 0], {1: 1.0, 2: 1.0})


def test_exp_power_against_closed_form():
    ast = parse_expr("exp(sigma)^2")
    v = eval_ast(ast, [1, 1])
    assert abs(v - np.exp(4.0)) < 1e-13 * abs(v)


def test_imaginary_unit_and_gamma():
    ast = parse_expr("i*gamma + sigma")
    assert np.isclose(eval_ast(ast, [0.5, 0.5], gamma=2.0), 1.0 + 2.0j)


def test_negative_exponent():
    ast = parse_expr("u1^-2")
    assert np.isclose(eval_ast(ast, [0, 0], {1: 2.0}), 0.25)


def test_precedence_and_parens():
    ast = parse_expr("2+3*4^2")
    assert np.isclose(eval_ast(ast, [0, 0]), 50.0)
    ast = parse_expr("(2+3)*4")
    assert np.isclose(eval_ast(ast, [0, 0]), 20.0)


@pytest.mark.parametrize("src,fragment", [
    ("foo*2", "unknown identifier"),
    ("1++2", "expected a value"),
    ("u1^x", "integer exponent"),
    ("2*(u1", "expected ')'"),
    ("lambda0", "1-based"),
    ("2 @ 3", "unexpected character"),
    ("", "expected a value"),
    ("1 2", "trailing input"),
])
def test_parse_errors_carry_position_info(src, fragment):
    with pytest.raises(ParseError) as err:
        parse_expr(src)
    assert fragment in str(err.value)
    assert "position" in str(err.value)


def test_collect_u_indices():
    ast = parse_expr("u1*lambda2 + exp(u3)")
    assert collect_u_indices(ast) == {1, 3}


def test_roundtrip_and_reference_agreement():
    rng = np.random.default_rng(42)
    lam = np.array([0.3 + 0.2j, -0.7 + 0.1j])
    u = {1: 1.4 - 0.3j, 2: -0.8 + 0.9j}
    for _ in range(1000):
        src = random_expression(rng)
        ast = parse_expr(src)
        assert parse_expr(to_source(ast)) == ast

        def run(f, *a):
            try:
                return ("ok", f(*a))
            except EvalPoleError:
                return ("pole", None)
            except EvalOverflowError:
                return ("overflow", None)

        s1 = run(eval_ast, ast, lam, u, 1.0)
        s2 = run(reference_eval, src, lam, u, 1.0)
        assert s1[0] == s2[0]
        if s1[0] == "ok":
            denom = max(abs(s1[1]), abs(s2[1]), 1.0)
            assert abs(s1[1] - s2[1]) / denom < 1e-14


def test_unbound_spectral_variable():
    ast = parse_expr("u2+1")
    with pytest.raises(ValueError):
        eval_ast(ast, [0, 0], {1: 1.0})
