"""Piecewise-constant Boolean signals over exact rational time.

A signal of width ``k`` is a right-continuous function ``R -> B^k`` that
holds an initial value up to its first switching instant and then changes
value only at the instants of an unbounded, strictly increasing sequence.
We represent the decidable subclass of signals whose switching sequence is
finite, or finite followed by a periodic tail.

Tail convention: a tail ``(period, pattern)`` switches at every instant
``k * period + offset`` with ``k >= 0`` that lies strictly after the last
finite event (or at every such instant when there are no finite events).

Every ``Signal`` is canonicalized on construction, so two signals are
pointwise equal exactly when they compare equal with ``==``.
"""
from __future__ import annotations

import bisect
import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache, reduce
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .errors import MalformedSignal, ParseError, WidthMismatch

Time = Fraction
Bits = tuple
NEG_INF = float("-inf")


def as_time(t) -> Fraction:
    if isinstance(t, Fraction):
        return t
    if isinstance(t, (bool, float)):
        raise TypeError(f"time instants must be exact (int, str or Fraction), got {t!r}")
    return Fraction(t)


def as_bits(v, width: Optional[int] = None) -> Bits:
    """Coerce ``"01"``, ``[0, 1]`` or ``(False, True)`` to a tuple of 0/1 ints."""
    if isinstance(v, str):
        if not v or any(c not in "01" for c in v):
            raise MalformedSignal(f"not a bit string: {v!r}")
        out = tuple(int(c) for c in v)
    elif isinstance(v, int) and not isinstance(v, bool):
        if width is None:
            raise TypeError("integer bit vectors need an explicit width")
        out = tuple((v >> (width - 1 - i)) & 1 for i in range(width))
    else:
        out = tuple(int(bool(b)) for b in v)
        if not out:
            raise MalformedSignal("empty bit vector")
    if width is not None and len(out) != width:
        raise WidthMismatch(f"expected {width} bits, got {len(out)}")
    return out


def fmt_bits(b: Bits) -> str:
    return "".join(str(v) for v in b)


@lru_cache(maxsize=None)
def all_bits(width: int) -> tuple:
    """All vectors of B^width in lexicographic order."""
    return tuple(tuple(p) for p in itertools.product((0, 1), repeat=width))


def frac_lcm(a: Fraction, b: Fraction) -> Fraction:
    num = math.lcm(a.numerator * b.denominator, b.numerator * a.denominator)
    return Fraction(num, a.denominator * b.denominator)


@dataclass(frozen=True)
class Tail:
    period: Fraction
    pattern: tuple  # ((offset, bits), ...) with 0 <= offset < period


def _tail_stream(period, pattern, after) -> Iterator:
    k = 0 if after is None else max(0, math.floor(after / period))
    while True:
        base = k * period
        for off, val in pattern:
            t = base + off
            if after is None or t > after:
                yield t, val
        k += 1


def _merge(initial, events) -> list:
    out = []
    cur = initial
    for t, v in events:
        if v != cur:
            out.append((t, v))
            cur = v
    return out


def _reduce_cyclic(pattern) -> list:
    n = len(pattern)
    return [pattern[i] for i in range(n) if pattern[i][1] != pattern[i - 1][1]]


def _minimal_period(period, pattern):
    k = len(pattern)
    as_set = set(pattern)
    for d in range(k, 0, -1):
        if k % d:
            continue
        p0 = period / d
        shifted = {((o + p0) % period, v) for o, v in pattern}
        if shifted == as_set:
            return p0, tuple((o, v) for o, v in pattern if o < p0)
    raise AssertionError("unreachable: d = 1 always matches")


def _validate(initial, events, tail):
    width = len(initial)
    evs = []
    prev = None
    for i, ev in enumerate(events):
        try:
            t, v = ev
        except (TypeError, ValueError):
            raise MalformedSignal(f"event {i}: expected (time, bits)") from None
        t = as_time(t)
        v = as_bits(v)
        if len(v) != width:
            raise WidthMismatch(f"event {i}: width {len(v)} != signal width {width}")
        if prev is not None and t <= prev:
            raise MalformedSignal(f"event {i}: time {t} not after previous event time {prev}")
        prev = t
        evs.append((t, v))
    if tail is None:
        return evs, None
    if isinstance(tail, Tail):
        period, pattern = tail.period, tail.pattern
    else:
        period, pattern = tail
    period = as_time(period)
    if period <= 0:
        raise MalformedSignal(f"tail period must be positive, got {period}")
    pat = []
    prev = None
    for i, ev in enumerate(pattern):
        o, v = ev
        o = as_time(o)
        v = as_bits(v)
        if len(v) != width:
            raise WidthMismatch(f"tail event {i}: width {len(v)} != signal width {width}")
        if not 0 <= o < period:
            raise MalformedSignal(f"tail event {i}: offset {o} outside [0, {period})")
        if prev is not None and o <= prev:
            raise MalformedSignal(f"tail event {i}: offset {o} not after previous offset {prev}")
        prev = o
        pat.append((o, v))
    if not pat:
        return evs, None
    return evs, (period, tuple(pat))


def _canonical(initial, events, tail):
    if tail is None:
        return tuple(_merge(initial, events)), None
    period, pattern = tail
    last = events[-1][0] if events else None
    base = max(last, Fraction(0)) if last is not None else Fraction(0)
    horizon = base + 2 * period
    unrolled = list(events)
    for t, v in _tail_stream(period, pattern, last):
        if t > horizon:
            break
        unrolled.append((t, v))
    stream = _merge(initial, unrolled)
    steady = _reduce_cyclic(pattern)
    if not steady:
        return tuple(stream), None
    p0, pat0 = _minimal_period(period, steady)
    for i in range(len(stream) + 1):
        after = stream[i - 1][0] if i else None
        expected = list(itertools.takewhile(lambda ev: ev[0] <= horizon, _tail_stream(p0, pat0, after)))
        if stream[i:] == expected:
            return tuple(stream[:i]), Tail(p0, pat0)
    raise AssertionError("no tail split found")


@dataclass(frozen=True)
class Signal:
    """A canonical eventually-periodic signal; see the module docstring."""

    initial: Bits
    events: tuple = ()
    tail: Optional[Tail] = None

    def __post_init__(self):
        initial = as_bits(self.initial)
        events, tail = _validate(initial, self.events, self.tail)
        events, tail = _canonical(initial, events, tail)
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "events", events)
        object.__setattr__(self, "tail", tail)

    @classmethod
    def constant(cls, w) -> "Signal":
        return cls(as_bits(w))

    @property
    def width(self) -> int:
        return len(self.initial)

    @cached_property
    def _times(self) -> list:
        return [t for t, _ in self.events]

    @cached_property
    def _offsets(self) -> list:
        return [o for o, _ in self.tail.pattern] if self.tail else []

    @cached_property
    def _hash(self) -> int:
        return hash((self.initial, self.events, self.tail))

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def sort_key(self):
        tail = None if self.tail is None else (self.tail.period, self.tail.pattern)
        return (self.width, self.initial, self.events, tail is not None, tail or ())

    def _lookup(self, t, strict: bool) -> Bits:
        t = as_time(t)
        if self.tail is not None:
            p = self.tail.period
            offs = self._offsets
            k = math.floor(t / p)
            r = t - k * p
            j = bisect.bisect_left(offs, r) if strict else bisect.bisect_right(offs, r)
            if j == 0:
                k -= 1
                j = len(offs)
            tau = k * p + offs[j - 1]
            if k >= 0 and (not self.events or tau > self._times[-1]):
                return self.tail.pattern[j - 1][1]
        times = self._times
        i = bisect.bisect_left(times, t) if strict else bisect.bisect_right(times, t)
        return self.events[i - 1][1] if i else self.initial

    def __call__(self, t) -> Bits:
        """Value at ``t`` (right-continuous)."""
        return self._lookup(t, strict=False)

    def left_limit(self, t) -> Bits:
        """Value on the piece immediately to the left of ``t``."""
        return self._lookup(t, strict=True)

    def iter_events(self, after=None) -> Iterator:
        """Unrolled switching events strictly after ``after``; infinite for tails."""
        for t, v in self.events:
            if after is None or t > after:
                yield t, v
        if self.tail is not None:
            last = self._times[-1] if self.events else None
            start = last if after is None or (last is not None and last > after) else after
            yield from _tail_stream(self.tail.period, self.tail.pattern, start)

    def events_upto(self, hi, strict: bool = False) -> list:
        hi = as_time(hi)
        if strict:
            return list(itertools.takewhile(lambda ev: ev[0] < hi, self.iter_events()))
        return list(itertools.takewhile(lambda ev: ev[0] <= hi, self.iter_events()))

    @property
    def is_constant(self) -> bool:
        return not self.events and self.tail is None

    @cached_property
    def first_event_time(self) -> Optional[Fraction]:
        return next(self.iter_events(), (None,))[0]

    @property
    def final_value(self) -> Optional[Bits]:
        """The limit at infinity, or None when the signal keeps switching."""
        if self.tail is not None:
            return None
        return self.events[-1][1] if self.events else self.initial

    @property
    def final_time(self) -> Optional[Fraction]:
        """Least final time instant; 0 stands in for "any instant" on constants."""
        if self.tail is not None:
            return None
        return self.events[-1][0] if self.events else Fraction(0)

    @property
    def initial_time(self) -> Fraction:
        """Greatest initial time instant; 0 stands in for "any instant" on constants."""
        t = self.first_event_time
        return Fraction(0) if t is None else t

    @cached_property
    def periodic_from(self) -> Optional[Fraction]:
        """Instant from which the signal repeats with its tail period (or stays constant)."""
        if self.tail is not None:
            last = self._times[-1] if self.events else None
            return next(_tail_stream(self.tail.period, self.tail.pattern, last))[0]
        return self._times[-1] if self.events else None

    def __str__(self) -> str:
        parts = [f"sig {self.width} init={fmt_bits(self.initial)}"]
        parts += [f"@{t}={fmt_bits(v)}" for t, v in self.events]
        if self.tail is not None:
            body = " ".join(f"@{o}={fmt_bits(v)}" for o, v in self.tail.pattern)
            parts.append(f"period={self.tail.period} {{{body}}}")
        return " ".join(parts)

    def __repr__(self) -> str:
        return f"Signal<{self}>"


def canonicalize(width: int, initial, raw_events=(), raw_tail=None) -> Signal:
    initial = as_bits(initial)
    if len(initial) != width:
        raise WidthMismatch(f"initial value has width {len(initial)}, expected {width}")
    return Signal(initial, tuple(raw_events), raw_tail)


def eval_at(x: Signal, t) -> Bits:
    return x(t)


def left_limit(x: Signal, t) -> Bits:
    return x.left_limit(t)


def final_value(x: Signal) -> Optional[Bits]:
    return x.final_value


def final_time(x: Signal) -> Optional[Fraction]:
    return x.final_time


def _same_width(*signals):
    w = {s.width for s in signals}
    if len(w) > 1:
        raise WidthMismatch(f"signal widths differ: {sorted(w)}")


def periodic_horizon(signals: Iterable[Signal]):
    """``(T, P)`` such that every signal is P-periodic on ``[T, inf)``."""
    signals = list(signals)
    starts = [s.periodic_from for s in signals if s.periodic_from is not None]
    T = max(starts, default=Fraction(0))
    periods = [s.tail.period for s in signals if s.tail is not None]
    P = reduce(frac_lcm, periods) if periods else Fraction(1)
    return T, P


def pointwise(signals: Sequence[Signal], fn: Callable) -> Signal:
    """The signal ``t -> fn(s1(t), s2(t), ...)``."""
    signals = list(signals)
    T, P = periodic_horizon(signals)
    has_tail = any(s.tail is not None for s in signals)
    H = T + P if has_tail else T
    reach = H + P if has_tail else H
    times = sorted({t for s in signals for t, _ in s.events_upto(reach)})
    initial = fn(*[s.initial for s in signals])
    raw = [(t, fn(*[s(t) for s in signals])) for t in times if t <= H]
    tail = None
    if has_tail:
        # the tail is anchored at absolute time 0
        pattern = sorted((t % P, fn(*[s(t) for s in signals])) for t in times if t > H)
        tail = (P, tuple(pattern))
    return Signal(as_bits(initial), tuple(raw), tail)


def complement(x: Signal) -> Signal:
    return pointwise([x], lambda b: tuple(1 - v for v in b))


def coord_select(x: Signal, indices: Sequence[int]) -> Signal:
    """Project onto the given 0-based coordinates."""
    indices = list(indices)
    if not indices:
        raise IndexError("empty coordinate selection")
    for i in indices:
        if not 0 <= i < x.width:
            raise IndexError(f"coordinate {i} out of range for width {x.width}")
    return pointwise([x], lambda b: tuple(b[i] for i in indices))


def coord_concat(x: Signal, y: Signal) -> Signal:
    return pointwise([x, y], lambda a, b: a + b)


def splice(u: Signal, t0, v: Signal) -> Signal:
    """``u`` on ``(-inf, t0)`` followed by ``v`` on ``[t0, inf)``."""
    _same_width(u, v)
    t0 = as_time(t0)
    raw = u.events_upto(t0, strict=True)
    raw.append((t0, v(t0)))
    raw += [(t, b) for t, b in v.events if t > t0]
    return Signal(u.initial, tuple(raw), v.tail)


def chain(prefix: Signal, cuts: Sequence, pieces: Sequence[Signal]) -> Signal:
    if len(cuts) != len(pieces):
        raise ValueError(f"{len(cuts)} cuts but {len(pieces)} pieces")
    cuts = [as_time(c) for c in cuts]
    for i in range(1, len(cuts)):
        if cuts[i] <= cuts[i - 1]:
            raise MalformedSignal(f"cut {i}: {cuts[i]} not after {cuts[i - 1]}")
    out = prefix
    for c, piece in zip(cuts, pieces):
        out = splice(out, c, piece)
    return out


def divergence(u: Signal, v: Signal):
    """First instant where ``u`` and ``v`` differ: None if equal, -inf if their
    initial values differ. ``u`` and ``v`` agree on ``(-inf, t1)`` iff ``t1 <= divergence``."""
    _same_width(u, v)
    if u == v:
        return None
    if u.initial != v.initial:
        return NEG_INF
    T, P = periodic_horizon([u, v])
    H = T + P
    times = sorted({t for s in (u, v) for t, _ in s.events_upto(H)})
    for t in times:
        if u(t) != v(t):
            return t
    raise AssertionError("canonically distinct signals agree up to the periodic horizon")


def restrict_eq(u: Signal, v: Signal, t1) -> bool:
    """Whether ``u`` and ``v`` coincide on ``(-inf, t1)``."""
    d = divergence(u, v)
    return d is None or as_time(t1) <= d


def prefix_key(x: Signal, t1) -> tuple:
    """Hashable form of ``x`` restricted to ``(-inf, t1)``; equal keys iff ``restrict_eq``."""
    return x.initial, tuple(x.events_upto(t1, strict=True))


def restricted_set(xs, t1) -> frozenset:
    return frozenset(prefix_key(x, t1) for x in xs)


def monotonous_on(x: Signal, t_lo, t_hi, left_limits: bool = False) -> bool:
    """Each coordinate has at most one discontinuity on the window.

    The window is ``(t_lo, t_hi]`` for plain transitions and ``[t_lo, t_hi)``
    for left-limit transitions, i.e. the switching points seen by the restriction
    of ``x`` to ``[t_lo - eps, t_hi - eps]`` for small ``eps``.
    """
    t_lo, t_hi = as_time(t_lo), as_time(t_hi)
    if not t_lo < t_hi:
        raise ValueError(f"empty interval [{t_lo}, {t_hi}]")
    counts = [0] * x.width
    for t, b in x.iter_events(after=t_lo - 1):
        if t > t_hi or (left_limits and t == t_hi):
            break
        if t < t_lo or (not left_limits and t == t_lo):
            continue
        before = x.left_limit(t)
        for i in range(x.width):
            if before[i] != b[i]:
                counts[i] += 1
    return all(c <= 1 for c in counts)


@dataclass(frozen=True)
class BoolFn:
    """A Boolean function ``B^in_width -> B^out_width`` given by its truth table.

    Row ``i`` holds the image of the input whose MSB-first binary code is ``i``.
    """

    in_width: int
    out_width: int
    table: tuple

    def __post_init__(self):
        rows = tuple(as_bits(r, self.out_width) for r in self.table)
        if len(rows) != 2 ** self.in_width:
            raise WidthMismatch(f"truth table needs {2 ** self.in_width} rows, got {len(rows)}")
        object.__setattr__(self, "table", rows)

    def __call__(self, b: Bits) -> Bits:
        if len(b) != self.in_width:
            raise WidthMismatch(f"BoolFn expects {self.in_width} bits, got {len(b)}")
        idx = 0
        for v in b:
            idx = (idx << 1) | v
        return self.table[idx]

    @classmethod
    def from_function(cls, in_width: int, out_width: int, fn: Callable) -> "BoolFn":
        return cls(in_width, out_width, tuple(as_bits(fn(b), out_width) for b in all_bits(in_width)))

    @classmethod
    def identity(cls, width: int) -> "BoolFn":
        return cls.from_function(width, width, lambda b: b)

    @classmethod
    def constant(cls, in_width: int, w) -> "BoolFn":
        w = as_bits(w)
        return cls.from_function(in_width, len(w), lambda b: w)

    @property
    def is_constant(self) -> bool:
        return len(set(self.table)) == 1

    def __str__(self) -> str:
        return " ".join(fmt_bits(r) for r in self.table)


@lru_cache(maxsize=65536)
def apply_fn(F: BoolFn, u: Signal) -> Signal:
    if F.in_width != u.width:
        raise WidthMismatch(f"F takes {F.in_width} bits but the signal has width {u.width}")
    return pointwise([u], F)


_TOKEN = re.compile(r"[{}]|[^\s{}]+")
_EVENT = re.compile(r"@([+-]?\d+(?:/\d+)?)=([01]+)$")


def parse_signal(text: str, line: Optional[int] = None) -> Signal:
    """Parse ``sig <w> init=<bits> [@t=<bits> ...] [period=<p> {@off=<bits> ...}]``."""
    toks = [(m.group(0), m.start() + 1) for m in _TOKEN.finditer(text)]

    def fail(msg, col=None):
        raise ParseError(msg, line, col)

    if len(toks) < 3 or toks[0][0] != "sig":
        fail("signal literal must start with 'sig <width> init=<bits>'", toks[0][1] if toks else 1)
    try:
        width = int(toks[1][0])
    except ValueError:
        fail(f"bad width {toks[1][0]!r}", toks[1][1])
    if width < 1:
        fail("width must be positive", toks[1][1])
    tok, col = toks[2]
    if not tok.startswith("init="):
        fail("expected init=<bits>", col)

    def bits_at(s, col):
        if not s or any(c not in "01" for c in s):
            fail(f"bad bit string {s!r}", col)
        if len(s) != width:
            fail(f"bit string {s!r} has length {len(s)}, expected {width}", col)
        return as_bits(s)

    initial = bits_at(tok[5:], col)
    events, pattern, period = [], [], None
    i = 3
    target = events
    while i < len(toks):
        tok, col = toks[i]
        if tok.startswith("period="):
            if period is not None:
                fail("duplicate period", col)
            try:
                period = Fraction(tok[7:])
            except (ValueError, ZeroDivisionError):
                fail(f"bad period {tok[7:]!r}", col)
            if i + 1 >= len(toks) or toks[i + 1][0] != "{":
                fail("expected '{' after period", col)
            target = pattern
            i += 2
            continue
        if tok == "}":
            if target is not pattern or i != len(toks) - 1:
                fail("unexpected '}'", col)
            target = None
            i += 1
            continue
        m = _EVENT.match(tok)
        if not m or target is None:
            fail(f"unexpected token {tok!r}", col)
        try:
            t = Fraction(m.group(1))
        except ZeroDivisionError:
            fail(f"bad time {m.group(1)!r}", col)
        target.append((t, bits_at(m.group(2), col)))
        i += 1
    if period is not None and target is not None:
        fail("unterminated tail pattern", len(text))
    try:
        return Signal(initial, tuple(events), None if period is None else (period, tuple(pattern)))
    except (MalformedSignal, WidthMismatch) as exc:
        fail(str(exc))
