from fractions import Fraction

import pytest
from hypothesis import given

from asyncstab.errors import ParseError
from asyncstab.signal import BoolFn
from asyncstab.textio import (
    format_kv,
    parse_boolfn_text,
    parse_generator_text,
    parse_system_file,
    parse_system_text,
    serialize_system,
    write_vcd,
)

from conftest import sig
from test_system import systems


def test_minimal_two_line_file():
    f = parse_system_text("input: sig 1 init=0\nstate: sig 1 init=1\n")
    assert len(f) == 1 and len(f[f.inputs[0]]) == 1


def test_header_and_comments():
    text = "# a latch fragment\nsystem m=1 n=1\ninput: sig 1 init=0 @3/2=1  # rises\n  state: sig 1 init=0\n"
    f = parse_system_text(text)
    assert f.inputs[0].events[0][0] == Fraction(3, 2)


def test_duplicate_input_names_both_lines():
    text = "system m=1 n=1\ninput: sig 1 init=0\nstate: sig 1 init=0\ninput: sig 1 init=0\nstate: sig 1 init=1\n"
    with pytest.raises(ParseError) as exc:
        parse_system_text(text)
    assert exc.value.line == 4 and "line 2" in str(exc.value)


@pytest.mark.parametrize("text, line", [
    ("system m=1 n=1\ninput: sig 1 init=0\n", 2),
    ("system m=1 n=1\ninput: sig 1 init=0\ninput: sig 1 init=1\nstate: sig 1 init=0\n", 2),
    ("system m=1 n=1\ninput: sig 2 init=00\nstate: sig 1 init=0\n", 2),
    ("system m=1 n=1\ninput: sig 1 init=0 @x=1\nstate: sig 1 init=0\n", 2),
    ("system m=1 n=1\nstate: sig 1 init=0\n", 2),
    ("system m=1\n", 1),
    ("system m=1 n=1\noutput: sig 1 init=0\n", 2),
])
def test_errors_carry_location(text, line):
    with pytest.raises(ParseError) as exc:
        parse_system_text(text)
    assert exc.value.line == line and exc.value.col is not None


def test_column_points_at_token():
    with pytest.raises(ParseError) as exc:
        parse_system_text("system m=1 n=1\ninput: sig 1 init=0 @x=1\nstate: sig 1 init=0\n")
    assert exc.value.col == 21


@given(systems(n=2))
def test_roundtrip(f):
    assert parse_system_text(serialize_system(f)) == f


def test_file(tmp_path):
    p = tmp_path / "f.sys"
    p.write_text("system m=1 n=1\ninput: sig 1 init=0\nstate: sig 1 init=0\n")
    assert len(parse_system_file(p)) == 1


def test_generator_file():
    g = parse_generator_text(
        "gen n=1 m=2 phi=0,0,1,1,1,0,1,1 init=0 grid=1,2,3,4,5 steps=3 rule=single\n"
        "input: sig 2 init=00 @1=10 @3=00\n"
    )
    assert g.phi((1, 0, 1)) == (0,) and g.policy.max_steps == 3
    f = g.table()
    assert {x.final_value for x in f[f.inputs[0]]} == {(1,)}


def test_generator_errors():
    with pytest.raises(ParseError, match="phi needs 8 rows"):
        parse_generator_text("gen n=1 m=2 phi=0,1 init=0 grid=1 steps=1 rule=any\ninput: sig 2 init=00\n")
    with pytest.raises(ParseError, match="missing"):
        parse_generator_text("gen n=1 m=2\n")


def test_truth_table():
    F = parse_boolfn_text("# xor\n0\n1\n1\n0\n")
    assert F == BoolFn.from_function(2, 1, lambda b: (b[0] ^ b[1],))
    with pytest.raises(ParseError):
        parse_boolfn_text("0\n1\n1\n")


def test_kv_sorted():
    assert format_kv({"verdict": "true", "flavor": "abs:stable"}) == "flavor=abs:stable\nverdict=true\n"


class TestVcd:
    def test_two_bit_signal_two_wires(self):
        out = write_vcd([("u", sig("sig 2 init=00 @1/2=10 @3/4=11"))])
        assert out.count("$var wire 1 ") == 2
        assert "rational time * 4" in out
        assert "#2\n" in out and "#3\n" in out

    def test_vector_mode(self):
        out = write_vcd([("u", sig("sig 2 init=00 @1=10"))], split=False)
        assert "$var wire 2 ! u $end" in out and "b10 !" in out

    def test_reproducible(self):
        x = sig("sig 1 init=0 period=1 {@0=0 @1/3=1}")
        assert write_vcd([("x", x)]) == write_vcd([("x", x)])
        assert "rational time * 3" in write_vcd([("x", x)])
