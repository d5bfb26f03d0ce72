"""Transfers between steady values: synchronous-like steps, fundamental mode,
sigma-closed input sets, controllability and hazard-freedom.

Functions here accept any *system-like* object: a :class:`SystemTable` or a
:class:`asyncstab.generator.GeneratorSystem`. Both provide ``states(u)``,
``u in f``, ``m`` and ``n``; a generator system also carries the lattice
``step`` on which cut times are placed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import NotAnInput, PreconditionError, SigmaClosureViolation, WidthMismatch
from .signal import (
    Bits,
    Signal,
    all_bits,
    as_bits,
    as_time,
    chain,
    fmt_bits,
    monotonous_on,
    periodic_horizon,
    restrict_eq,
    restricted_set,
    splice,
)
from .system import SystemTable, check_non_anticipatory, classify_initial_time, is_initialized


@dataclass(frozen=True)
class Transition:
    frm: Bits
    to: Bits
    lo: Fraction
    hi: Fraction
    left_limits: bool = False

    @property
    def trivial(self) -> bool:
        return self.frm == self.to


def transition_of(x: Signal, lo, hi, left_limits: bool = False) -> Transition:
    lo, hi = as_time(lo), as_time(hi)
    if not lo < hi:
        raise ValueError(f"a transition needs lo < hi, got [{lo}, {hi}]")
    if left_limits:
        return Transition(x.left_limit(lo), x.left_limit(hi), lo, hi, True)
    return Transition(x(lo), x(hi), lo, hi, False)


class SigmaClosure:
    """The closure of a finite basis under splicing along unbounded cut sequences.

    With ``declared`` False the input set is the basis itself.
    """

    def __init__(self, basis, declared: bool = True):
        basis = sorted(set(basis), key=lambda s: s.sort_key)
        if not basis:
            raise ValueError("a closure needs a non-empty basis")
        widths = {b.width for b in basis}
        if len(widths) != 1:
            raise WidthMismatch(f"basis mixes widths {sorted(widths)}")
        self.basis = tuple(basis)
        self.width = widths.pop()
        self.declared = declared

    def __contains__(self, s) -> bool:
        if not isinstance(s, Signal) or s.width != self.width:
            return False
        if not self.declared:
            return s in self.basis
        # Cuts may sit at any instant, so s is a member iff every elementary
        # interval of the joint event set is matched by some basis element.
        sigs = list(self.basis) + [s]
        T, P = periodic_horizon(sigs)
        periodic = any(x.tail is not None for x in sigs)
        H = T + P if periodic else T
        times = sorted({t for x in sigs for t, _ in x.events_upto(H)} | ({H} if periodic else set()))
        starts = [times[0] - 1 if times else Fraction(0)] + times
        for t in starts:
            v = s(t)
            if not any(b(t) == v for b in self.basis):
                return False
        return True

    def __repr__(self) -> str:
        return f"SigmaClosure(basis={len(self.basis)}, declared={self.declared})"


def is_sigma_closed_declared(U: SigmaClosure, probe) -> bool:
    """Membership of ``chain(pieces[0], cuts, pieces[1:])`` in the declared closure."""
    pieces, cuts = probe
    pieces = list(pieces)
    for p in pieces:
        if p.width != U.width:
            raise WidthMismatch(f"probe signal has width {p.width}, closure has width {U.width}")
    return chain(pieces[0], list(cuts), pieces[1:]) in U


def _states(f, u) -> tuple:
    if u not in f:
        raise NotAnInput(f"{u} is not an admissible input")
    return f.states(u)


def _settle(xs):
    """Common final value of ``xs`` and the last switching instant, or None."""
    ws = {x.final_value for x in xs}
    if len(ws) != 1 or None in ws:
        return None
    last = [x.final_time for x in xs if not x.is_constant]
    return ws.pop(), (max(last) if last else None)


def _steady_from(xs, t) -> Optional[Bits]:
    # forall x forall t' >= t: x(t' - 0) = w, i.e. every switch happens strictly before t
    s = _settle(xs)
    if s is None:
        return None
    w, last = s
    return w if last is None or last < t else None


def sync_like_a(f, u, t0, tf):
    """``(w, w')`` when every state of ``f(u)`` holds ``w`` before ``t0`` and ``w'`` from ``tf - 0``."""
    t0, tf = as_time(t0), as_time(tf)
    xs = _states(f, u)
    if not t0 < tf:
        return None
    inits = {x.initial for x in xs}
    if len(inits) != 1:
        return None
    if any(x.first_event_time is not None and x.first_event_time < t0 for x in xs):
        return None
    w2 = _steady_from(xs, tf)
    if w2 is None:
        return None
    return inits.pop(), w2


def _restricted_sets_equal(xs, ys, t) -> bool:
    return restricted_set(xs, t) == restricted_set(ys, t)


def sync_like_b(f, u, v, tf, tf2):
    """``(w, w', spliced)`` when the transfer from ``f(u)`` to ``f(v)`` at ``[tf - 0, tf2 - 0]`` qualifies."""
    tf, tf2 = as_time(tf), as_time(tf2)
    xs, ys = _states(f, u), _states(f, v)
    if not tf < tf2:
        return None
    w = _steady_from(xs, tf)
    if w is None:
        return None
    w2 = _steady_from(ys, tf2)
    if w2 is None:
        return None
    if not restrict_eq(u, v, tf):
        return None
    if not _restricted_sets_equal(xs, ys, tf):
        return None
    return w, w2, splice(u, tf, v)


@dataclass(frozen=True)
class Step:
    """One certified transfer over ``[lo - 0, hi - 0]``.

    Kind ``a`` runs under ``u`` alone; kind ``b`` hands over from ``u`` to ``v``.
    """

    kind: str
    u: Signal
    v: Optional[Signal]
    lo: Fraction
    hi: Fraction
    w: Bits
    w2: Bits

    def replay(self, f) -> bool:
        if self.kind == "a":
            return sync_like_a(f, self.u, self.lo, self.hi) == (self.w, self.w2)
        r = sync_like_b(f, self.u, self.v, self.lo, self.hi)
        return r is not None and r[:2] == (self.w, self.w2)

    @property
    def target(self) -> Signal:
        return self.u if self.kind == "a" else self.v


def certify_a(f, u, t0, tf) -> Optional[Step]:
    r = sync_like_a(f, u, t0, tf)
    return None if r is None else Step("a", u, None, as_time(t0), as_time(tf), r[0], r[1])


def certify_b(f, u, v, tf, tf2) -> Optional[Step]:
    r = sync_like_b(f, u, v, tf, tf2)
    return None if r is None else Step("b", u, v, as_time(tf), as_time(tf2), r[0], r[1])


def sync_like_compose(f, first: Step, second: Step) -> bool:
    """Certify the composite of two consecutive certified steps.

    An ``a`` step followed by a ``b`` step composes to an ``a`` step under the
    second input; two ``b`` steps compose to a ``b`` step from the first
    input to the last.
    """
    if first.hi != second.lo or second.kind != "b" or first.target != second.u:
        raise PreconditionError("steps are not consecutive", (first, second))
    if not (first.replay(f) and second.replay(f)):
        raise PreconditionError("a constituent step does not certify", (first, second))
    if first.kind == "a":
        r = sync_like_a(f, second.v, first.lo, second.hi)
        return r == (first.w, second.w2)
    r = sync_like_b(f, first.u, second.v, first.lo, second.hi)
    return r is not None and r[:2] == (first.w, second.w2)


@dataclass
class FundamentalModeCert:
    """Cut times ``t_0 < t_1 < ... < t_K`` then ``t_K + j * period``.

    ``steps[k]`` certifies ``[t_k - 0, t_(k+1) - 0]``; steps past the prefix
    run under ``final_input`` alone and are trivial.
    """

    cuts: list
    steps: list
    period: Fraction
    final_input: Signal
    values: list = field(default_factory=list)

    def cut(self, k: int) -> Fraction:
        if k < len(self.cuts):
            return self.cuts[k]
        return self.cuts[-1] + (k - len(self.cuts) + 1) * self.period

    def value(self, k: int) -> Bits:
        return self.values[min(k, len(self.values) - 1)]

    def tail_step(self, f, k: int) -> Optional[Step]:
        return certify_b(f, self.final_input, self.final_input, self.cut(k), self.cut(k + 1))

    def replay(self, f, tail: int = 2) -> bool:
        if not all(s.replay(f) for s in self.steps):
            return False
        start = len(self.cuts) - 1
        return all(self.tail_step(f, start + j) is not None for j in range(tail))

    def to_kv(self) -> dict:
        kv = {"cert.steps": str(len(self.steps)), "cert.tail.period": str(self.period), "cert.input": str(self.final_input)}
        for k, t in enumerate(self.cuts):
            kv[f"cert.step.{k}.t"] = str(t)
            kv[f"cert.step.{k}.w"] = fmt_bits(self.values[k])
        for k, s in enumerate(self.steps):
            kv[f"cert.step.{k}.kind"] = s.kind
        return kv


def _next_cut(f, t) -> Fraction:
    """Least admissible cut strictly after ``t``: the next lattice point, or the next integer."""
    step = getattr(f, "step", None) or Fraction(1)
    return step * (math.floor(as_time(t) / step) + 1)


def _critical(f, signals) -> list:
    T, P = periodic_horizon(signals)
    H = T + P
    times = sorted({t for s in signals for t, _ in s.events_upto(H)} | {H})
    pts = set(times)
    pts.update((a + b) / 2 for a, b in zip(times, times[1:]))
    pts.add(times[0] - 1)
    pts.add(times[-1] + 1)
    return sorted(pts)


def _inputs(f) -> list:
    return list(f.inputs)


def fundamental_mode(f, u) -> Optional[FundamentalModeCert]:
    """Search for a cut sequence putting ``f`` in the fundamental mode under ``u``.

    Intermediate steps may hand over from other admissible inputs that agree
    with ``u`` on a prefix, as the definition allows. Cut times come from the
    critical instants of all signals involved; each input is reached at the
    earliest feasible cut.
    """
    _states(f, u)
    U = _inputs(f)
    if u not in U:
        U.append(u)
    sigs = list(U) + [x for v in U for x in f.states(v)]
    crit = _critical(f, sigs)

    # entry[v] = (cut at which v takes over, steps so far)
    entry = {}
    for v in U:
        xs = f.states(v)
        s = _settle(xs)
        if s is None or len({x.initial for x in xs}) != 1:
            continue
        firsts = [x.first_event_time for x in xs if x.first_event_time is not None]
        t0 = min(firsts) if firsts else None
        lo = max(x for x in (s[1], t0) if x is not None) if (s[1] is not None or t0 is not None) else None
        t1 = next((c for c in crit if lo is None or c > lo), None)
        if t1 is None:
            continue
        t0 = t0 if t0 is not None else t1 - 1
        step = certify_a(f, v, t0, t1)
        if step is not None:
            entry[v] = (t1, [step])
    # relax handovers v -> v2 at the least feasible cut, earliest arrival first
    changed = True
    while changed:
        changed = False
        for v in sorted(entry, key=lambda s: (entry[s][0], s.sort_key)):
            tv, steps = entry[v]
            c = next((d for d in crit if d >= tv), None)
            if c is None:
                continue
            for v2 in U:
                if v2 == v:
                    continue
                st = _first_b(f, v, v2, c, crit)
                if st is not None and (v2 not in entry or st.hi < entry[v2][0]):
                    entry[v2] = (st.hi, steps + [st])
                    changed = True
    if u not in entry:
        return None
    _, steps = entry[u]
    period = getattr(f, "step", None) or Fraction(1)
    cuts = [steps[0].lo] + [st.hi for st in steps]
    values = [steps[0].w] + [st.w2 for st in steps]
    cert = FundamentalModeCert(cuts, steps, period, u, values)
    return cert if cert.replay(f) else None


def _first_b(f, v, v2, c, crit) -> Optional[Step]:
    # the earliest settle cut for v2 after handing over at c
    s2 = _settle(f.states(v2))
    if s2 is None:
        return None
    lo = max(c, s2[1]) if s2[1] is not None else c
    t2 = next((d for d in crit if d > lo), None)
    if t2 is None:
        return None
    return certify_b(f, v, v2, c, t2)


def _materialized(f) -> SystemTable:
    if isinstance(f, SystemTable):
        return f
    return f.table()


def _require_race_free_bounded(f, u):
    xs = _states(f, u)
    if _settle(xs) is None:
        ws = sorted({fmt_bits(x.final_value) if x.final_value is not None else "none" for x in xs})
        raise PreconditionError(f"input {u} races: final values {', '.join(ws)}", (u, xs))


def _check_hypotheses(f):
    table = _materialized(f)
    ok, cex = check_non_anticipatory(table)
    if not ok:
        raise PreconditionError("the system is anticipatory", cex)
    for u in table:
        if len({x.initial for x in table[u]}) != 1:
            raise PreconditionError(f"states under {u} start from different values", u)
        _require_race_free_bounded(table, u)
    return table


def _closure_of(f):
    return getattr(f, "closure", None)


def _admit(f, s):
    cl = _closure_of(f)
    if cl is not None and s not in cl:
        raise SigmaClosureViolation(f"spliced input {s} is outside the declared input set", s)
    if s not in f:
        raise SigmaClosureViolation(f"spliced input {s} is not admissible", s)


def build_fundamental_input(f, inputs: Sequence[Signal]):
    """Splice ``inputs`` at cut times that put ``f`` in the fundamental mode.

    Returns ``(u, cuts, cert)`` where ``cuts`` are the splice instants and
    ``cert`` certifies every step under the spliced input ``u``.
    """
    inputs = list(inputs)
    if not inputs:
        raise ValueError("at least one input is needed")
    _check_hypotheses(f)
    s = inputs[0]
    _admit(f, s)
    _require_race_free_bounded(f, s)
    xs = f.states(s)
    w0, last = _settle(xs)
    firsts = [x.first_event_time for x in xs if x.first_event_time is not None]
    t1 = _next_cut(f, last if last is not None else (min(firsts) if firsts else 0))
    t0 = min(firsts) if firsts else t1 - 1
    t0 = min(t0, t1 - 1) if t0 >= t1 else t0
    step = certify_a(f, s, t0, t1)
    if step is None:
        raise PreconditionError("the first input does not transfer synchronous-likely", s)
    steps, cuts, splices = [step], [t1], [s]
    t = t1
    for nxt in inputs[1:]:
        s2 = splice(s, t, nxt)
        _admit(f, s2)
        _require_race_free_bounded(f, s2)
        _, last2 = _settle(f.states(s2))
        t2 = _next_cut(f, max(t, last2) if last2 is not None else t)
        st = certify_b(f, s, s2, t, t2)
        if st is None:
            raise PreconditionError(f"step {len(steps)} does not certify", (s, s2, t, t2))
        steps.append(st)
        s, t = s2, t2
        cuts.append(t2)
        splices.append(s2)
    values = [steps[0].w] + [st.w2 for st in steps]
    cert = FundamentalModeCert([t0] + cuts, steps, getattr(f, "step", None) or Fraction(1), s, values)
    return s, cuts[:-1], cert


@dataclass
class Controllability:
    c1: bool
    c2: bool
    reach: dict  # w -> (u, tf)
    retarget: dict  # (u, w, w') -> (v, tf, tf')
    blocked: list  # missing targets for c1, then (u, w, w') pairs for c2

    def to_kv(self) -> dict:
        kv = {"c1": str(self.c1).lower(), "c2": str(self.c2).lower()}
        for w, (u, tf) in sorted(self.reach.items()):
            kv[f"reach.{fmt_bits(w)}.u"] = str(u)
            kv[f"reach.{fmt_bits(w)}.tf"] = str(tf)
        for i, b in enumerate(self.blocked):
            kv[f"blocked.{i:03d}"] = fmt_bits(b) if isinstance(b[0], int) else " ".join(
                str(p) if isinstance(p, Signal) else fmt_bits(p) for p in b
            )
        return kv


def _basis(f) -> list:
    cl = _closure_of(f)
    return list(cl.basis) if cl is not None and not isinstance(f, SystemTable) else list(f.inputs)


def _steers(f, u):
    """``(w, tf)`` with every state under ``u`` steady at ``w`` from ``tf - 0``, or None."""
    xs = f.states(u)
    s = _settle(xs)
    if s is None:
        return None
    w, last = s
    return w, _next_cut(f, last) if last is not None else _next_cut(f, 0)


def check_controllability(f) -> Controllability:
    """Decide both controllability properties over the admissible inputs.

    The retargeting property is checked at the least settle cut of every
    premise ``(u, w)``; later cuts only delay the splice.
    """
    basis = _basis(f)
    reach, blocked = {}, []
    premises = []
    for u in basis:
        r = _steers(f, u)
        if r is None:
            continue
        premises.append((u, r[0], r[1]))
        if r[0] not in reach:
            reach[r[0]] = (u, r[1])
    for w in all_bits(f.n):
        if w not in reach:
            blocked.append(w)
    c1 = not blocked
    retarget = {}
    c2 = True
    for u, w, tf in premises:
        for w2 in all_bits(f.n):
            hit = None
            for v in basis:
                s = splice(u, tf, v)
                if s not in f:
                    if _closure_of(f) is not None and s not in _closure_of(f):
                        raise SigmaClosureViolation(f"spliced input {s} is outside the declared input set", s)
                    continue
                r = _steers(f, s)
                if r is not None and r[0] == w2:
                    hit = (v, tf, max(r[1], _next_cut(f, tf)))
                    break
            if hit is None:
                c2 = False
                blocked.append((u, w, w2))
            else:
                retarget[(u, w, w2)] = hit
    return Controllability(c1, c2, reach, retarget, blocked)


def plan_trajectory(f, targets: Sequence):
    """Build an input driving every state through ``targets`` at cut times.

    ``targets[0]`` must be the initial state. Returns ``(u, cuts, cert)`` with
    ``x(t_k - 0) = targets[k]`` for every state ``x`` of ``f(u)``.
    """
    targets = [as_bits(w) for w in targets]
    if not targets:
        raise ValueError("at least the initial target is needed")
    table = _check_hypotheses(f)
    w0 = is_initialized(table)
    if w0 is None:
        raise PreconditionError("the system is not initialized", None)
    if targets[0] != w0:
        raise PreconditionError(f"first target {fmt_bits(targets[0])} is not the initial state {fmt_bits(w0)}", None)
    ctl = check_controllability(f)
    if not (ctl.c1 and ctl.c2):
        raise PreconditionError("controllability fails", ctl.blocked)
    it = classify_initial_time(table)
    t0 = it.fixed if not it.any_witness else Fraction(0)
    basis = _basis(f)
    if len(targets) == 1:
        u = basis[0]
        return u, [t0], FundamentalModeCert([t0], [], Fraction(1), u, [w0])
    log = []
    # first segment: an input reaching targets[1] from the initial state
    s = None
    for u in basis:
        r = _steers(f, u)
        log.append(f"k=1 try {u}: {'none' if r is None else fmt_bits(r[0])}")
        if r is not None and r[0] == targets[1]:
            s, t = u, max(r[1], _next_cut(f, t0))
            break
    if s is None:
        raise PreconditionError(f"target 1 ({fmt_bits(targets[1])}) is unreachable", log)
    first = certify_a(f, s, t0, t)
    if first is None:
        raise PreconditionError("the first transfer does not certify", (s, t0, t))
    steps, cuts = [first], [t0, t]
    for k in range(2, len(targets)):
        found = None
        for v in basis:
            s2 = splice(s, t, v)
            if s2 not in f:
                continue
            r = _steers(f, s2)
            log.append(f"k={k} try {v}: {'none' if r is None else fmt_bits(r[0])}")
            if r is not None and r[0] == targets[k]:
                found = (s2, max(r[1], _next_cut(f, t)))
                break
        if found is None:
            raise PreconditionError(f"target {k} ({fmt_bits(targets[k])}) is unreachable", log)
        s2, t2 = found
        st = certify_b(f, s, s2, t, t2)
        if st is None:
            raise PreconditionError(f"step {k - 1} does not certify", (s, s2, t, t2))
        steps.append(st)
        s, t = s2, t2
        cuts.append(t2)
    cert = FundamentalModeCert(cuts, steps, getattr(f, "step", None) or Fraction(1), s, list(targets))
    return s, cuts, cert


def settle_window(f, u):
    """``(t0, tf)``: last instant before any state moves and the least integer after all settle."""
    xs = f.states(u)
    firsts = [x.first_event_time for x in xs if x.first_event_time is not None]
    lasts = [x.final_time for x in xs if not x.is_constant and x.final_value is not None]
    t0 = min(firsts) if firsts else 0
    tf = int(max(lasts)) + 1 if lasts else t0 + 1
    return t0, tf


def is_hazard_free(f, u, tf, tf2, prev: Optional[Signal] = None) -> bool:
    """Synchronous-like and monotonous on ``[tf - 0, tf2 - 0]``.

    Without ``prev`` the transfer runs under ``u`` alone; with ``prev`` it is
    the handover from ``prev`` to ``u`` at ``tf``.
    """
    tf, tf2 = as_time(tf), as_time(tf2)
    if not tf < tf2:
        raise ValueError(f"a transfer needs tf < tf2, got [{tf}, {tf2}]")
    ok = sync_like_a(f, u, tf, tf2) if prev is None else sync_like_b(f, prev, u, tf, tf2)
    if ok is None:
        return False
    return all(monotonous_on(x, tf, tf2, left_limits=True) for x in _states(f, u))
