from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from asyncstab.errors import MalformedSignal, ParseError, WidthMismatch
from asyncstab.signal import (
    BoolFn,
    Signal,
    apply_fn,
    canonicalize,
    chain,
    complement,
    coord_concat,
    coord_select,
    eval_at,
    final_time,
    final_value,
    left_limit,
    monotonous_on,
    parse_signal,
    restrict_eq,
    splice,
)

from conftest import const, sig, signals, times

OSC = Signal((0,), (), (2, ((0, (1,)), (1, (0,)))))


class TestCanonicalize:
    def test_duplicate_value_merged(self):
        x = canonicalize(1, (0,), [(1, (0,)), (2, (1,))])
        assert x.initial == (0,) and x.events == ((Fraction(2), (1,)),)

    def test_constant_tail_normalized_away(self):
        x = canonicalize(1, (0,), [], (1, ((0, (0,)),)))
        assert x.tail is None and x.is_constant and x == const("0")

    def test_already_canonical(self):
        x = canonicalize(2, (0, 0), [(1, (0, 1)), (Fraction(3, 2), (1, 1))])
        assert x.events == ((Fraction(1), (0, 1)), (Fraction(3, 2), (1, 1)))

    def test_width_mismatch(self):
        with pytest.raises(WidthMismatch):
            canonicalize(2, (0,))

    def test_events_must_increase(self):
        with pytest.raises(MalformedSignal):
            Signal((0,), ((2, (1,)), (1, (0,))))


class TestEvaluation:
    def test_before_first_event(self):
        assert eval_at(sig("sig 1 init=0 @1=1"), Fraction(1, 2)) == (0,)

    def test_right_continuous(self):
        assert eval_at(sig("sig 1 init=0 @1=1"), 1) == (1,)

    def test_constant_everywhere(self):
        for t in (-100, 0, Fraction(7, 3), 10 ** 6):
            assert eval_at(const("10"), t) == (1, 0)

    def test_left_limit(self):
        x = sig("sig 1 init=0 @1=1")
        assert left_limit(x, 1) == (0,)
        assert left_limit(x, 2) == (1,)

    @given(signals(), times)
    def test_left_limit_is_initial_before_first_event(self, x, t):
        first = x.first_event_time
        if first is not None and t <= first:
            assert left_limit(x, t) == x.initial

    def test_tail_evaluation(self):
        assert [OSC(t)[0] for t in (0, Fraction(1, 2), 1, 3, Fraction(7, 2))] == [1, 1, 0, 0, 0]
        assert OSC(4) == (1,) and OSC(-1) == (0,)


class TestFinal:
    def test_final_value(self):
        assert final_value(sig("sig 1 init=0 @1=1 @2=0")) == (0,)
        assert final_value(OSC) is None
        assert final_value(const("1")) == (1,)

    def test_final_time(self):
        assert final_time(sig("sig 1 init=0 @1=1 @2=0")) == 2
        assert final_time(OSC) is None
        assert final_time(const("1")) == 0


class TestComplement:
    def test_constant(self):
        assert complement(const("01")) == const("10")

    def test_events(self):
        assert complement(sig("sig 1 init=0 @1=1")) == sig("sig 1 init=1 @1=0")

    @given(signals(width=2))
    def test_involution(self, x):
        assert complement(complement(x)) == x


class TestSplice:
    @given(signals(), times)
    def test_identity(self, x, t):
        assert splice(x, t, x) == x

    def test_constants(self):
        assert splice(const("0"), 1, const("1")) == sig("sig 1 init=0 @1=1")

    def test_tail_replaced(self):
        assert final_value(splice(OSC, 5, const("1"))) == (1,)

    @given(signals(), signals(), times, times)
    def test_pointwise(self, u, v, t0, t):
        s = splice(u, t0, v)
        assert s(t) == (u(t) if t < t0 else v(t))


class TestChain:
    def test_empty(self):
        assert chain(OSC, [], []) == OSC

    def test_single_cut(self):
        u, v = sig("sig 1 init=1 @2=0"), OSC
        assert chain(u, [1], [v]) == splice(u, 1, v)

    def test_three_constants(self):
        # pieces 1 then 0 after the prefix 0; value read off each segment
        got = chain(const("0"), [1, 2], [const("1"), const("0")])
        assert got == sig("sig 1 init=0 @1=1 @2=0")

    def test_cuts_must_increase(self):
        with pytest.raises(MalformedSignal):
            chain(const("0"), [2, 1], [const("1"), const("0")])


class TestRestrictEq:
    def test_self(self):
        assert restrict_eq(OSC, OSC, 17)

    def test_boundary(self):
        a, b = const("0"), sig("sig 1 init=0 @2=1")
        assert restrict_eq(a, b, 2)
        assert not restrict_eq(a, b, 3)

    def test_initial_differs(self):
        assert not restrict_eq(const("0"), const("1"), -50)

    @given(signals(), signals(), times)
    def test_matches_sampling(self, u, v, t1):
        # sample every event time and midpoint below t1
        pts = sorted({t for s in (u, v) for t, _ in s.events_upto(t1 + 4)} | {t1 - 10})
        pts = [p for p in pts if p < t1] + [(a + b) / 2 for a, b in zip(pts, pts[1:]) if b <= t1]
        if restrict_eq(u, v, t1):
            assert all(u(p) == v(p) for p in pts)


class TestApplyFn:
    def test_identity(self):
        assert apply_fn(BoolFn.identity(1), OSC) == OSC

    def test_constant(self):
        assert apply_fn(BoolFn.constant(1, (1, 0)), OSC) == const("10")

    def test_xor_of_equal_oscillating_coordinates(self):
        u = coord_concat(OSC, OSC)
        xor = BoolFn.from_function(2, 1, lambda b: (b[0] ^ b[1],))
        out = apply_fn(xor, u)
        assert out == const("0") and final_value(out) == (0,)
        assert final_value(u) is None

    def test_width_check(self):
        with pytest.raises(WidthMismatch):
            apply_fn(BoolFn.identity(2), OSC)


class TestMonotonous:
    def test_constant(self):
        assert monotonous_on(const("1"), 0, 5)

    def test_double_flip(self):
        assert not monotonous_on(sig("sig 1 init=0 @1=1 @2=0"), 0, 3)

    def test_each_coordinate_once(self):
        assert monotonous_on(sig("sig 2 init=00 @1=01 @2=11"), 0, 3)

    def test_window_ends(self):
        x = sig("sig 1 init=0 @1=1 @2=0")
        assert monotonous_on(x, 1, 3)
        assert not monotonous_on(x, 1, 3, left_limits=True)
        assert monotonous_on(x, 0, 2, left_limits=True)


class TestCoordinates:
    @given(signals(), signals(width=2))
    def test_concat_then_select(self, x, y):
        z = coord_concat(x, y)
        assert coord_select(z, [0]) == x
        assert coord_select(z, [1, 2]) == y

    def test_select_constant(self):
        assert coord_select(const("01"), [1]) == const("1")

    def test_concat_periods(self):
        a = Signal((0,), (), (2, ((0, (1,)), (1, (0,)))))
        b = Signal((0,), (), (3, ((0, (1,)), (1, (0,)))))
        c = coord_concat(a, b)
        assert c.tail.period == 6
        for k in range(0, 48):
            t = Fraction(k, 4)
            assert c(t) == a(t) + b(t)


class TestParse:
    def test_roundtrip(self):
        for text in ("sig 1 init=0", "sig 2 init=01 @3/2=11", "sig 1 init=0 @1=1 period=2 {@0=0 @1=1}"):
            x = parse_signal(text)
            assert parse_signal(str(x)) == x

    def test_rational(self):
        assert parse_signal("sig 1 init=0 @3/2=1").events[0][0] == Fraction(3, 2)

    def test_errors(self):
        for bad in ("sig 1 init=2", "sig x init=0", "sig 1 init=0 @1=11", "sig 1 init=0 period=1 {@0=1"):
            with pytest.raises(ParseError):
                parse_signal(bad)

    @given(signals(width=2))
    def test_str_roundtrip(self, x):
        assert parse_signal(str(x)) == x


@given(signals(), signals(), st.lists(times, min_size=1, max_size=8))
def test_pointwise_matches_sampling(x, y, ts):
    z = coord_concat(x, y)
    for t in ts + [t + 7 for t in ts]:
        assert z(t) == x(t) + y(t)
        assert z.left_limit(t) == x.left_limit(t) + y.left_limit(t)
