import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rdlab import dsl
from rdlab.diagnostics import check_positivity_condition
from rdlab.dsl import FAMILIES, Binary, Const, Unary, Var, builtin, evaluate, parse, to_text, variables
from rdlab.errors import (
    ExpressionSyntaxError,
    MissingParameterError,
    NonFiniteResultError,
    UnboundVariableError,
    UnknownFamilyError,
    UnknownIdentifierError,
)


def test_grammar_examples():
    assert parse("u^2") == Binary("pow", Var("u"), Const(2.0))
    assert parse("-u*exp(v)") == Binary("mul", Unary("neg", Var("u")), Unary("exp", Var("v")))


@pytest.mark.parametrize("text, tree", [
    ("-u^2", Unary("neg", Binary("pow", Var("u"), Const(2.0)))),
    ("2^3^2", Binary("pow", Const(2.0), Binary("pow", Const(3.0), Const(2.0)))),
    ("u-v-1", Binary("sub", Binary("sub", Var("u"), Var("v")), Const(1.0))),
    ("u/v/2", Binary("div", Binary("div", Var("u"), Var("v")), Const(2.0))),
    ("u^-1", Binary("pow", Var("u"), Unary("neg", Const(1.0)))),
    ("1.5e-3*t", Binary("mul", Const(1.5e-3), Var("t"))),
    ("pi", Const(math.pi)),
])
def test_precedence_and_associativity(text, tree):
    assert parse(text) == tree


@pytest.mark.parametrize("text, offset", [
    ("u*(1+v", 6),
    ("u*(1+", 5),
    ("u +* v", 3),
    ("exp u", 4),
    ("u $ v", 2),
    ("", 0),
    ("(u))", 3),
])
def test_syntax_errors_carry_offsets(text, offset):
    with pytest.raises(ExpressionSyntaxError) as exc:
        parse(text)
    assert exc.value.offset == offset
    assert f"offset {offset}" in str(exc.value)


def test_missing_paren_message_names_expected_token():
    with pytest.raises(ExpressionSyntaxError, match='expected "\\)"'):
        parse("u*(1+v")


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as exc:
        parse("u*w")
    assert exc.value.offset == 2
    assert parse("k*u", {"k": 3.0}) == Binary("mul", Const(3.0), Var("u"))
    assert parse("s^2", aliases={"s": "u"}) == parse("u^2")


def test_evaluation_examples():
    assert evaluate(parse("u^2"), u=3.0) == 9.0
    assert evaluate(parse("exp(v)"), v=0.0) == 1.0
    with pytest.raises(NonFiniteResultError):
        evaluate(parse("u/(v-1)"), u=1.0, v=1.0)


@pytest.mark.parametrize("text, env", [
    ("ln(u)", {"u": 0.0}),
    ("ln(u)", {"u": -1.0}),
    ("sqrt(u)", {"u": -1.0}),
    ("u^0.5", {"u": -2.0}),
    ("exp(u)", {"u": 1000.0}),
    ("u^u", {"u": 1e10}),
])
def test_domain_errors_raise(text, env):
    with pytest.raises(NonFiniteResultError):
        evaluate(parse(text), env)


def test_non_strict_returns_ieee_values():
    assert math.isinf(evaluate(parse("exp(u)"), {"u": 1000.0}, strict=False))
    assert math.isnan(evaluate(parse("sqrt(u)"), {"u": -1.0}, strict=False))


def test_negative_base_integer_power_is_fine():
    assert evaluate(parse("u^3"), u=-2.0) == -8.0
    assert evaluate(parse("u^2"), u=-2.0) == 4.0


def test_unbound_variable():
    with pytest.raises(UnboundVariableError):
        evaluate(parse("u+v"), u=1.0)


def test_array_bindings_broadcast():
    x = np.linspace(0, 1, 5)
    out = evaluate(parse("u*x + t"), {"u": 2.0, "x": x, "t": 1.0})
    assert np.allclose(out, 2 * x + 1)


def test_variables():
    assert variables(parse("u*exp(v) + sin(t*x)")) == {"u", "v", "t", "x"}


# ------------------------------------------------------------ printer


names = st.sampled_from(dsl.VARIABLES)
consts = st.floats(0.0, 1e6, allow_nan=False) | st.integers(0, 20).map(float)


def _trees():
    leaves = consts.map(Const) | names.map(Var)

    def extend(children):
        un = st.tuples(st.sampled_from(("neg",) + dsl.FUNCTIONS), children).map(lambda a: Unary(*a))
        bi = st.tuples(st.sampled_from(tuple(dsl.BINARY_OPS.values())), children, children).map(
            lambda a: Binary(*a))
        return un | bi

    return st.recursive(leaves, extend, max_leaves=12)


@given(_trees())
def test_print_parse_round_trip(tree):
    text = to_text(tree)
    assert parse(text) == tree
    assert to_text(parse(text)) == text


@given(_trees(), st.floats(0.1, 3.0), st.floats(0.1, 3.0))
def test_printed_text_evaluates_identically(tree, u, v):
    env = {"t": 0.5, "x": 0.25, "y": 0.75, "u": u, "v": v}
    a = evaluate(tree, env, strict=False)
    b = evaluate(parse(to_text(tree)), env, strict=False)
    assert (a == b) or (math.isnan(a) and math.isnan(b))


def test_negative_constants_print_safely():
    tree = Binary("mul", Var("u"), Const(-2.0))
    assert evaluate(parse(to_text(tree)), u=3.0) == -6.0


# ------------------------------------------------------------ builtins


def test_builtin_examples():
    assert builtin("power", p=2).texts == ("u^2",)
    fk = builtin("frank_kamenetskii")
    assert fk.texts == ("-u*exp(v)", "u*exp(v)") and fk.is_system
    hy = builtin("haraux_youkana", gamma=0.5)
    assert hy.texts == ("-u*exp(v^0.5)", "u*exp(v^0.5)")
    assert builtin("robin_lambda", **{"lambda": 0.5}).texts == ("0.5*exp(u)",)


def test_builtin_errors():
    with pytest.raises(UnknownFamilyError):
        builtin("nope")
    with pytest.raises(MissingParameterError):
        builtin("power")


@pytest.mark.parametrize("name", [n for n, f in FAMILIES.items() if f.kind == "system"])
def test_system_families_keep_positivity(name):
    params = {p: 0.5 for p in FAMILIES[name].required}
    spec = builtin(name, **params)
    verdict = check_positivity_condition(spec).verdict
    assert (verdict == "holds") == spec.positivity


def test_scalar_reaction_rejects_v():
    with pytest.raises(ValueError):
        dsl.ReactionSpec.scalar("u*v")
