"""Build system tables from a generator function under nondeterministic delays.

A generator function ``phi: B^n x B^m -> B^n`` is read as an asynchronous
automaton. Coordinate ``i`` is excited at a grid instant ``g`` when
``x_i(g-0) != phi_i(x(g-0), u(g-0))``. At each grid instant a run updates some
excited coordinates or waits; the state signal switches at ``g``.

A run may wait at an excited instant, but not at two excited instants in a
row, unless its update budget is spent. Without that rule the run that never
moves would make every latch look racy.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

from .errors import SigmaClosureViolation, WidthMismatch
from .signal import BoolFn, Signal, as_bits, as_time
from .system import SystemTable


class UpdateRule(str, enum.Enum):
    ANY_SUBSET = "any"
    SINGLE_COORDINATE = "single"


@dataclass(frozen=True)
class DelayPolicy:
    grid: tuple
    max_steps: int
    update_rule: UpdateRule = UpdateRule.ANY_SUBSET
    budget: str = "run"  # "run", or "segment" to refill the budget whenever the input changes

    def __post_init__(self):
        if self.budget not in ("run", "segment"):
            raise ValueError(f"unknown budget mode {self.budget!r}")
        grid = tuple(sorted({as_time(t) for t in self.grid}))
        if not grid:
            raise ValueError("the update grid must not be empty")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "update_rule", UpdateRule(self.update_rule))


def _excited(phi: BoolFn, x: tuple, uval: tuple) -> tuple:
    target = phi(x + uval)
    return tuple(i for i in range(len(x)) if x[i] != target[i]), target


def _choices(exc: tuple, rule: UpdateRule):
    if rule is UpdateRule.SINGLE_COORDINATE:
        return [(i,) for i in exc]
    return [c for k in range(1, len(exc) + 1) for c in combinations(exc, k)]


def runs(phi: BoolFn, init, u: Signal, policy: DelayPolicy) -> set:
    """Every state signal the automaton can produce under ``u``."""
    init = as_bits(init)
    grid = policy.grid
    uvals = [u.left_limit(g) for g in grid]
    refill = policy.budget == "segment"
    memo = {}

    def suffixes(k, x, steps, waited) -> frozenset:
        # event tuples a run can still produce from grid index k on
        key = (k, x, steps, waited)
        r = memo.get(key)
        if r is not None:
            return r
        if k == len(grid):
            r = frozenset([()])
        else:
            if refill and k and uvals[k] != uvals[k - 1]:
                steps = 0
            exc, target = _excited(phi, x, uvals[k])
            if not exc:
                r = suffixes(k + 1, x, steps, False)
            else:
                out = set()
                can_move = steps < policy.max_steps
                if not waited or not can_move:
                    out |= suffixes(k + 1, x, steps, True)
                if can_move:
                    for sub in _choices(exc, policy.update_rule):
                        y = list(x)
                        for i in sub:
                            y[i] = target[i]
                        y = tuple(y)
                        ev = (grid[k], y)
                        out.update((ev,) + rest for rest in suffixes(k + 1, y, steps + 1, False))
                r = frozenset(out)
        memo[key] = r
        return r

    return {Signal(init, evs) for evs in suffixes(0, init, 0, False)}


def _check_inputs(phi: BoolFn, n: int, inputs, grid):
    on_grid = set(grid)
    for u in inputs:
        if phi.in_width != n + u.width or phi.out_width != n:
            raise WidthMismatch(f"phi maps {phi.in_width} to {phi.out_width} bits; needs {n}+{u.width} to {n}")
        if u.tail is not None:
            raise ValueError(f"input {u} switches forever; the grid cannot cover it")
        for t, _ in u.events:
            if t not in on_grid:
                raise ValueError(f"grid is missing the input event time {t} of {u}")


def generate(phi: BoolFn, init, inputs, policy: DelayPolicy) -> SystemTable:
    init = as_bits(init)
    inputs = list(inputs)
    if not inputs:
        raise ValueError("at least one input is needed")
    _check_inputs(phi, len(init), inputs, policy.grid)
    m = inputs[0].width
    return SystemTable(m, len(init), {u: runs(phi, init, u, policy) for u in inputs})


class GeneratorSystem:
    """A generated system over an input set given by a declared closure.

    States are generated on demand on the lattice ``step, 2*step, ...``
    running ``pad`` points past the last input event. The update budget is
    refilled at every input change, otherwise a long enough input would
    exhaust it and no system could stay race-free over a spliced input set.
    With ``pad >= 2*max_steps + 2`` every run is frozen before the lattice
    ends, so the finite lattice behaves like an unbounded one.
    """

    def __init__(self, phi: BoolFn, init, closure, step=1, max_steps: int = 4,
                 update_rule=UpdateRule.ANY_SUBSET, pad: Optional[int] = None):
        self.phi = phi
        self.init = as_bits(init)
        self.n = len(self.init)
        self.m = phi.in_width - self.n
        self.closure = closure
        self.step = as_time(step)
        self.max_steps = max_steps
        self.update_rule = UpdateRule(update_rule)
        self.pad = 2 * max_steps + 2 if pad is None else pad
        self._cache = {}

    def policy_for(self, u: Signal) -> DelayPolicy:
        last = max((t for t, _ in u.events), default=Fraction(0))
        top = int(max(last, 0) / self.step) + self.pad
        return DelayPolicy(tuple(self.step * k for k in range(1, top + 1)), self.max_steps, self.update_rule, "segment")

    def __contains__(self, u) -> bool:
        return u in self.closure and all((t / self.step).denominator == 1 and t > 0 for t, _ in u.events)

    def states(self, u: Signal) -> tuple:
        xs = self._cache.get(u)
        if xs is None:
            if u not in self:
                raise SigmaClosureViolation(f"{u} is outside the declared input set", u)
            pol = self.policy_for(u)
            _check_inputs(self.phi, self.n, [u], pol.grid)
            xs = self._cache[u] = tuple(sorted(runs(self.phi, self.init, u, pol), key=lambda s: s.sort_key))
        return xs

    def __getitem__(self, u) -> frozenset:
        return frozenset(self.states(u))

    @property
    def inputs(self) -> tuple:
        return tuple(self.closure.basis)

    def table(self, extra=()) -> SystemTable:
        """The finite table over the basis inputs (plus ``extra`` members)."""
        us = list(self.closure.basis) + [u for u in extra if u not in self.closure.basis]
        return SystemTable(self.m, self.n, {u: self.states(u) for u in us}, closure=self.closure)


@dataclass
class LibraryExample:
    """A curated system with the verdicts the acceptance tests expect of it."""

    name: str
    description: str
    phi: Optional[BoolFn]
    init: tuple
    inputs: tuple
    policy: Optional[DelayPolicy]
    expected: dict = field(default_factory=dict)
    explicit: Optional[dict] = None

    def table(self) -> SystemTable:
        if self.explicit is not None:
            return SystemTable(self.inputs[0].width, len(self.init), self.explicit)
        return generate(self.phi, self.init, self.inputs, self.policy)


def _sig(init, *events) -> Signal:
    return Signal(as_bits(init), tuple((as_time(t), as_bits(v)) for t, v in events))


def sr_latch_phi() -> BoolFn:
    # x' = s or (x and not r); inputs read (x, s, r)
    return BoolFn.from_function(3, 1, lambda b: (b[1] | (b[0] & (1 - b[2])),))


def c_element_phi() -> BoolFn:
    return BoolFn.from_function(3, 1, lambda b: (int(b[0] + b[1] + b[2] >= 2),))


def glitch_phi() -> BoolFn:
    # x1' = u, x2' = not x1 and u; inputs read (x1, x2, u)
    return BoolFn.from_function(3, 2, lambda b: (b[2], (1 - b[0]) & b[2]))


def race_phi() -> BoolFn:
    # x1' = u and not x2, x2' = u and not x1
    return BoolFn.from_function(3, 2, lambda b: (b[2] & (1 - b[1]), b[2] & (1 - b[0])))


def library_examples() -> dict:
    grid6 = DelayPolicy(tuple(range(1, 9)), 4)
    sr_inputs = (
        _sig("00"),
        _sig("00", (1, "10"), (3, "00")),
        _sig("00", (1, "10"), (3, "00"), (5, "01"), (7, "00")),
    )
    c_inputs = (
        _sig("00"),
        _sig("00", (1, "11")),
        _sig("00", (1, "10"), (3, "11")),
        _sig("00", (1, "11"), (4, "00")),
    )
    rise = (_sig("0"), _sig("0", (1, "1")))
    osc = Signal((0,), (), (1, ((0, (0,)), (Fraction(1, 2), (1,)))))
    return {
        "sr_latch": LibraryExample(
            "sr_latch",
            "set/reset latch; inputs hold, set pulse, set then reset pulses",
            sr_latch_phi(), (0,), sr_inputs, DelayPolicy(tuple(range(1, 11)), 4),
            {"abs:stable": True, "abs:racefree": True, "abs:constant": False, "non_anticipatory": True},
        ),
        "c_element": LibraryExample(
            "c_element",
            "Muller C-element; output follows the inputs when they agree",
            c_element_phi(), (0,), c_inputs, grid6,
            {"abs:stable": True, "abs:racefree": True, "abs:constant": False, "non_anticipatory": True},
        ),
        "glitch_net": LibraryExample(
            "glitch_net",
            "x2 = not x1 and u sees a pulse while x1 lags behind a rising u",
            glitch_phi(), (0, 0), rise, grid6,
            {"abs:stable": True, "abs:racefree": True, "abs:constant": False, "non_anticipatory": True},
        ),
        "two_limit_race": LibraryExample(
            "two_limit_race",
            "cross-coupled pair; the first coordinate to switch wins",
            race_phi(), (0, 0), rise, grid6,
            {"abs:stable": True, "abs:racefree": False, "abs:constant": False, "non_anticipatory": True},
        ),
        "oscillator": LibraryExample(
            "oscillator",
            "x = not x with a half-unit delay, given directly as oscillating states",
            None, (0,), (_sig("0"),), None,
            {"abs:stable": False, "abs:racefree": False, "abs:constant": False, "non_anticipatory": True},
            explicit={_sig("0"): {osc, _sig("0")}},
        ),
    }
