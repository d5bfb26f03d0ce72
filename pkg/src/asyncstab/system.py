"""Finite multi-valued asynchronous systems and their operation algebra.

A system maps each admissible input signal ``u`` to a non-empty finite set of
possible state signals ``f(u)``. Tables are immutable; every operation builds
a new table.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from .errors import EmptyDomain, EmptyValueSet, NotAnInput, SideConditionError, WidthMismatch
from .signal import NEG_INF, Bits, Signal, coord_concat, complement, divergence, restricted_set


class SystemTable:
    """``f: U -> P*(S^(n))`` with ``U`` a finite set of width-``m`` signals."""

    __slots__ = ("m", "n", "_entries", "_sorted", "closure", "_hash")

    def __init__(self, m: int, n: int, entries: Mapping, closure=None):
        self.m = m
        self.n = n
        self.closure = closure
        tmp = {}
        for u, states in dict(entries).items():
            if u.width != m:
                raise WidthMismatch(f"input {u} has width {u.width}, expected {m}")
            states = frozenset(states)
            if not states:
                raise EmptyValueSet(f"empty value set at {u}", u)
            for x in states:
                if x.width != n:
                    raise WidthMismatch(f"state {x} has width {x.width}, expected {n}")
            tmp[u] = states
        if not tmp:
            raise EmptyDomain("a system needs at least one input")
        self._entries = {u: tmp[u] for u in sorted(tmp, key=lambda s: s.sort_key)}
        self._sorted = {}
        self._hash = None

    @property
    def inputs(self) -> tuple:
        return tuple(self._entries)

    def __getitem__(self, u) -> frozenset:
        try:
            return self._entries[u]
        except KeyError:
            raise NotAnInput(f"{u} is not an admissible input") from None

    def states(self, u) -> tuple:
        """``f(u)`` in canonical order."""
        xs = self._sorted.get(u)
        if xs is None:
            xs = self._sorted[u] = tuple(sorted(self[u], key=lambda s: s.sort_key))
        return xs

    def items(self):
        for u in self._entries:
            yield u, self.states(u)

    def __contains__(self, u) -> bool:
        return u in self._entries

    def __iter__(self):
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def all_states(self) -> set:
        return {x for xs in self._entries.values() for x in xs}

    def signals(self) -> list:
        return list(self._entries) + sorted(self.all_states(), key=lambda s: s.sort_key)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SystemTable):
            return NotImplemented
        return (self.m, self.n, self._entries) == (other.m, other.n, other._entries)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.m, self.n, frozenset(self._entries.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"SystemTable(m={self.m}, n={self.n}, inputs={len(self)}, states={sum(len(v) for v in self._entries.values())})"


def _check_widths(f: SystemTable, g: SystemTable, out: bool = True):
    if f.m != g.m or (out and f.n != g.n):
        raise WidthMismatch(f"systems have widths (m={f.m}, n={f.n}) and (m={g.m}, n={g.n})")


def is_subsystem(g: SystemTable, f: SystemTable) -> bool:
    """``V`` included in ``U`` and ``g(u)`` included in ``f(u)``; inclusion is non-strict."""
    _check_widths(f, g)
    return all(u in f and g[u] <= f[u] for u in g)


def dual(f: SystemTable) -> SystemTable:
    return SystemTable(f.m, f.n, {complement(u): {complement(x) for x in xs} for u, xs in f.items()})


def intersect(f: SystemTable, g: SystemTable) -> SystemTable:
    _check_widths(f, g)
    common = [u for u in f if u in g]
    if not common:
        raise EmptyDomain("empty domain: the input sets are disjoint")
    out = {}
    for u in common:
        xs = f[u] & g[u]
        if not xs:
            raise EmptyValueSet(f"empty value set at {u}", u)
        out[u] = xs
    return SystemTable(f.m, f.n, out)


def union(f: SystemTable, g: SystemTable) -> SystemTable:
    _check_widths(f, g)
    out = {u: set(xs) for u, xs in f.items()}
    for u, ys in g.items():
        out.setdefault(u, set()).update(ys)
    return SystemTable(f.m, f.n, out)


def parallel(f: SystemTable, f2: SystemTable) -> SystemTable:
    """``(f, f')``: concatenations of every ``x`` in ``f(u)`` with every ``y`` in ``f'(u)``."""
    _check_widths(f, f2, out=False)
    common = [u for u in f if u in f2]
    if not common:
        raise EmptyDomain("empty domain: the input sets are disjoint")
    out = {u: {coord_concat(x, y) for x in f[u] for y in f2[u]} for u in common}
    return SystemTable(f.m, f.n + f2.n, out)


def serial(h: SystemTable, f: SystemTable) -> SystemTable:
    """``h o f``; requires every ``f(u)`` to meet the input set of ``h``."""
    if h.m != f.n:
        raise WidthMismatch(f"h takes width {h.m} but f produces width {f.n}")
    out = {}
    for u, xs in f.items():
        through = [x for x in xs if x in h]
        if not through:
            raise SideConditionError(f"f(u) does not meet the inputs of h at u = {u}", u)
        out[u] = {y for x in through for y in h[x]}
    return SystemTable(f.m, h.n, out)


def _restricted_sets_equal(xs, ys, t1) -> bool:
    return restricted_set(xs, t1) == restricted_set(ys, t1)


def check_non_anticipatory(f: SystemTable):
    """Return ``(ok, counterexample)`` with counterexample ``(u, v, t1)``.

    Agreement of ``u`` and ``v`` on ``(-inf, t1)`` holds exactly for
    ``t1 <= divergence(u, v)``, and equality of the restricted state sets is
    monotone in ``t1``, so the single instant ``t1 = divergence(u, v)`` decides
    each pair.
    """
    inputs = f.inputs
    for i, u in enumerate(inputs):
        for v in inputs[i + 1:]:
            d = divergence(u, v)
            if d == NEG_INF:
                continue
            if not _restricted_sets_equal(f[u], f[v], d):
                return False, (u, v, d)
    return True, None


def is_non_anticipatory(f: SystemTable) -> bool:
    return check_non_anticipatory(f)[0]


def is_initialized(f: SystemTable) -> Optional[Bits]:
    """The initial state ``w0`` shared by every state, or None."""
    inits = {x.initial for xs in f._entries.values() for x in xs}
    return next(iter(inits)) if len(inits) == 1 else None


@dataclass
class TimeFlavor:
    """Witnesses for the initial- or final-time quantifier shapes.

    ``per_state`` maps ``(u, x)`` to a witness, ``per_input`` maps ``u`` to a
    witness valid for all of ``f(u)``, ``fixed`` is valid for the whole
    system. ``any_witness`` flags that every instant would do.
    """

    which: str  # "initial" or "final"
    kind: str  # "fix", "bounded" or "unbounded"
    per_state: dict = field(default_factory=dict)
    per_input: dict = field(default_factory=dict)
    fixed: Optional[Fraction] = None
    any_witness: bool = False


def classify_initial_time(f: SystemTable) -> TimeFlavor:
    # For each state the admissible t0 form (-inf, first event]; mins exist on finite tables.
    per_state, per_input = {}, {}
    for u, xs in f.items():
        for x in xs:
            per_state[(u, x)] = x.initial_time
        moving = [x.first_event_time for x in xs if x.first_event_time is not None]
        per_input[u] = min(moving) if moving else Fraction(0)
    moving = [x.first_event_time for x in f.all_states() if x.first_event_time is not None]
    fixed = min(moving) if moving else Fraction(0)
    return TimeFlavor("initial", "fix", per_state, per_input, fixed, any_witness=not moving)


def classify_final_time(f: SystemTable) -> TimeFlavor:
    # Quantification ranges over the convergent states only.
    per_state, per_input = {}, {}
    for u, xs in f.items():
        conv = [x for x in xs if x.final_value is not None]
        for x in conv:
            per_state[(u, x)] = x.final_time
        moving = [x.final_time for x in conv if not x.is_constant]
        per_input[u] = max(moving) if moving else Fraction(0)
    moving = [x.final_time for x in f.all_states() if x.final_value is not None and not x.is_constant]
    fixed = max(moving) if moving else Fraction(0)
    return TimeFlavor("final", "fix", per_state, per_input, fixed, any_witness=not moving)


def sigma(f: SystemTable, u: Signal) -> frozenset:
    """Final values reached by the states of ``f(u)``."""
    return frozenset(x.final_value for x in f[u] if x.final_value is not None)


def equilibrium_points(f: SystemTable) -> frozenset:
    return frozenset(x.initial for x in f.all_states() if x.is_constant)
