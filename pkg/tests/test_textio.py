"""Expression text syntax and JSON serialization."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resolvent_workbench import algebra as alg
from resolvent_workbench.space_model import build_lightray_hermite, flow, prime
from resolvent_workbench.textio import ParseError, expression_from_dict, expression_to_dict, parse_expression, to_text

MODEL = build_lightray_hermite(4)
NAMES = {"f1": MODEL.vector([1, 0, 0, 0]), "f2": MODEL.vector([0, 0.5, 0, 0.25])}


def parse(text):
    return parse_expression(text, MODEL, NAMES)


def test_parse_atoms():
    f1, f2 = NAMES["f1"], NAMES["f2"]
    assert parse("cliff(f1)").same_structure(alg.cliff(f1))
    assert parse("field(f2)").same_structure(alg.field(f2))
    assert parse("res(2, f1)").same_structure(alg.res(2.0, f1))
    assert parse("zeta(f1)").same_structure(alg.zeta(f1))


def test_parse_products_sums_and_scalars():
    f1, f2 = NAMES["f1"], NAMES["f2"]
    got = parse("2*cliff(f1)*res(1, f2) - 1j*zeta(f2) + 3")
    want = (alg.cliff(f1) * alg.res(1.0, f2)).scale(2) - alg.zeta(f2).scale(1j) + 3
    assert got.same_structure(want)


def test_parse_test_function_forms():
    f1, f2 = NAMES["f1"], NAMES["f2"]
    assert parse("cliff([1, 0, 0, 0])").same_structure(alg.cliff(f1))
    assert parse("cliff(f1 + 2*f2)").same_structure(alg.cliff(f1 + f2 * 2))
    assert parse("res(1, prime(f1))").same_structure(alg.res(1.0, prime(MODEL, f1)))
    assert parse("cliff(flow(0.5, f2))").same_structure(alg.cliff(flow(MODEL, 0.5, f2)))


def test_parse_power():
    assert parse("zeta(f1)**2").same_structure(alg.zeta(NAMES["f1"]) * alg.zeta(NAMES["f1"]))


@pytest.mark.parametrize(
    "text,pos",
    [
        ("cliff(f1) +* 2", 11),
        ("cliff(h)", 6),
        ("res(0, f1)", None),
        ("cliff([1, 0])", None),
        ("spin(f1)", 0),
    ],
)
def test_parse_errors_carry_position(text, pos):
    with pytest.raises((ParseError, alg.DomainError)) as info:
        parse(text)
    if pos is not None:
        assert info.value.position == pos
        assert f"column {pos}" in str(info.value)


def test_text_round_trip_uses_names():
    for text in ["cliff(f1)", "zeta(f1)*res(2, f2)", "2*cliff(f1) - 1j*field(f2)"]:
        e = parse(text)
        assert parse(to_text(e, NAMES)).same_structure(e)


coeff = st.floats(-2, 2, allow_nan=False).map(lambda x: round(x, 6))


@st.composite
def exprs(draw):
    total = None
    for _ in range(draw(st.integers(1, 3))):
        e = None
        for _ in range(draw(st.integers(1, 3))):
            f = MODEL.vector([draw(coeff) for _ in range(4)])
            kind = draw(st.sampled_from(["cliff", "field", "res", "zeta"]))
            if kind == "res":
                a = alg.res(draw(st.sampled_from([-1.5, 1.0, 4.0])), f)
            else:
                a = getattr(alg, kind)(f)
            e = a if e is None else e * a
        e = e.scale(complex(draw(coeff), draw(coeff)) or 1.0)
        total = e if total is None else total + e
    return total


@settings(max_examples=60, deadline=None)
@given(exprs())
def test_json_round_trip(e):
    data = json.loads(json.dumps(expression_to_dict(e)))
    back = expression_from_dict(MODEL, data)
    assert back.same_structure(e)
    assert data["class"] == alg.classify(e).value


@settings(max_examples=60, deadline=None)
@given(exprs())
def test_text_round_trip(e):
    back = parse_expression(to_text(e), MODEL, {})
    assert back.same_structure(e)
