from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from asyncstab.signal import Signal, parse_signal

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def sig(text: str) -> Signal:
    return parse_signal(text)


def const(bits: str) -> Signal:
    return Signal(tuple(int(c) for c in bits))


times = st.fractions(min_value=-4, max_value=6, max_denominator=4)


@st.composite
def signals(draw, width=1, tails=True):
    bits = st.tuples(*[st.integers(0, 1)] * width)
    init = draw(bits)
    ts = sorted(set(draw(st.lists(times, max_size=4))))
    events = tuple((t, draw(bits)) for t in ts)
    tail = None
    if tails and draw(st.booleans()):
        period = draw(st.sampled_from([Fraction(1), Fraction(2), Fraction(1, 2)]))
        tail = (period, ((Fraction(0), draw(bits)), (period / 2, draw(bits))))
    return Signal(init, events, tail)


@pytest.fixture
def sr_latch():
    from asyncstab.generator import library_examples

    return library_examples()["sr_latch"]


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[1])):
        terminalreporter.write_line(line)
