import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadprop.errors import NonFiniteError, ParseError, UnknownIdentifierError
from quadprop.timefn import FUNCTIONS, eval_timefn, parse_timefn


@pytest.mark.parametrize(
    "src, t, expected",
    [
        ("0.5*t^2", 2.0, 2.0),
        ("sin(3*t)", 0.0, 0.0),
        ("pi", 17.0, math.pi),
        ("exp(0*t)", 5.0, 1.0),
        ("2^3^2", 0.0, 512.0),
        ("-2^2", 0.0, -4.0),
        ("2^-1", 0.0, 0.5),
        ("1 - 2 - 3", 0.0, -4.0),
        ("8 / 4 / 2", 0.0, 1.0),
        ("abs(-t) + sqrt(4)", 3.0, 5.0),
        (".5e1 + 1E-1", 0.0, 5.1),
        ("cos(pi*t)", 1.0, -1.0),
        ("tan(t)", 0.25, math.tan(0.25)),
        ("--t", 2.0, 2.0),
    ],
)
def test_eval_examples(src, t, expected):
    assert eval_timefn(parse_timefn(src), t) == pytest.approx(expected, rel=1e-15, abs=1e-15)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError) as err:
        parse_timefn("w*t")
    assert err.value.name == "w"
    assert err.value.offset == 0
    assert 'unknown identifier "w"' in str(err.value)


@pytest.mark.parametrize(
    "src, offset",
    [("1 +", 3), ("(t", 2), ("t)", 1), ("sin t", 4), ("2 $ 3", 2), ("", 0), ("t t", 2), ("t+é", 2), ("1 + é", 4)],
)
def test_syntax_error_offsets(src, offset):
    with pytest.raises(ParseError) as err:
        parse_timefn(src)
    assert err.value.offset == offset


@pytest.mark.parametrize("src, t", [("1/t", 0.0), ("sqrt(t)", -1.0), ("exp(t)", 1000.0), ("(-8)^(1/3)", 0.0)])
def test_non_finite(src, t):
    with pytest.raises(NonFiniteError):
        eval_timefn(parse_timefn(src), t)


def test_callable_and_flags():
    f = parse_timefn("0")
    assert f.is_zero and f.is_constant
    g = parse_timefn("2*pi")
    assert g.is_constant and not g.is_zero
    assert not parse_timefn("t").is_constant
    assert parse_timefn("t+1")(2) == 3.0


# property tests -------------------------------------------------------------

_leaf = st.one_of(
    st.just("t"),
    st.just("pi"),
    st.floats(min_value=0, max_value=10, allow_nan=False).map(repr),
)


def _combine(children):
    return st.one_of(
        st.tuples(st.sampled_from(["+", "-", "*", "/", "^"]), children, children).map(
            lambda p: f"({p[1]}){p[0]}({p[2]})"),
        st.tuples(st.sampled_from(sorted(FUNCTIONS)), children).map(lambda p: f"{p[0]}({p[1]})"),
        children.map(lambda c: f"-({c})"),
    )


expressions = st.recursive(_leaf, _combine, max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(expressions, st.floats(min_value=-5, max_value=5, allow_nan=False))
def test_roundtrip_and_determinism(src, t):
    f = parse_timefn(src)
    g = parse_timefn(f.unparse())
    try:
        a = eval_timefn(f, t)
    except NonFiniteError:
        with pytest.raises(NonFiniteError):
            eval_timefn(g, t)
        return
    assert math.isfinite(a)
    assert eval_timefn(g, t) == a
    assert eval_timefn(f, t) == a


_reserved = {"t", "pi", *FUNCTIONS}


@settings(max_examples=300, deadline=None)
@given(st.from_regex(r"[A-Za-z_][A-Za-z_0-9]{0,6}", fullmatch=True).filter(lambda s: s not in _reserved))
def test_whitelist(name):
    with pytest.raises(UnknownIdentifierError):
        parse_timefn(f"1 + {name}*t")
