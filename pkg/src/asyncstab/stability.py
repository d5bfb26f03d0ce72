"""Stability checkers for asynchronous systems.

Three scopes (absolute, relative to convergent inputs, relative to a Boolean
function ``F``) times three strengths (stable, race-free, constantly stable)
give nine flavors. Every checker returns a :class:`StabilityReport` whose
witnesses can be replayed against the raw formula by
:func:`asyncstab.oracle.formulas.replay`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import EmptyDomain, EmptyValueSet, PreconditionError, SideConditionError, TheoremFalsified, WidthMismatch
from .oracle import formulas
from .signal import BoolFn, Signal, apply_fn, fmt_bits, restrict_eq
from .system import (
    SystemTable,
    check_non_anticipatory,
    classify_final_time,
    dual,
    intersect,
    is_subsystem,
    parallel,
    serial,
    sigma,
    union,
)


class Scope(str, enum.Enum):
    ABSOLUTE = "abs"
    RELATIVE = "rel"
    F_RELATIVE = "frel"


class Strength(str, enum.Enum):
    STABLE = "stable"
    RACE_FREE = "racefree"
    CONSTANT = "constant"


@dataclass(frozen=True)
class StabilityFlavor:
    scope: Scope
    strength: Strength
    F: Optional[BoolFn] = None

    def __post_init__(self):
        object.__setattr__(self, "scope", Scope(self.scope))
        object.__setattr__(self, "strength", Strength(self.strength))
        if self.scope is Scope.F_RELATIVE and self.F is None:
            raise ValueError("F-relative flavors need a Boolean function F")

    @classmethod
    def parse(cls, text: str, F: Optional[BoolFn] = None) -> "StabilityFlavor":
        """``"abs:racefree"``, ``"rel:stable"``, ``"frel:constant"`` ..."""
        scope, _, strength = text.partition(":")
        return cls(Scope(scope), Strength(strength), F if scope == "frel" else None)

    @property
    def formula_id(self) -> str:
        return f"{self.scope.value}-{self.strength.value}"

    def __str__(self) -> str:
        return f"{self.scope.value}:{self.strength.value}"


ALL_STRENGTHS = tuple(Strength)


def all_flavors(F: Optional[BoolFn] = None) -> list:
    scopes = [Scope.ABSOLUTE, Scope.RELATIVE] + ([Scope.F_RELATIVE] if F is not None else [])
    return [StabilityFlavor(s, k, F if s is Scope.F_RELATIVE else None) for s in scopes for k in Strength]


@dataclass
class StabilityReport:
    """Verdict plus witnesses for one flavor.

    Witness shapes by strength: stable ``{(u, x): (w, tf)}``; race-free
    ``{u: (w, {x: tf})}`` (F-relative: ``{(u, x): tf}``); constant
    ``(w, {(u, x): tf})``. ``counterexample`` is ``(u, x, reason)``.
    """

    flavor: StabilityFlavor
    verdict: bool
    trivial: bool
    witnesses: object = None
    counterexample: Optional[tuple] = None
    left: bool = False

    def __bool__(self) -> bool:
        return self.verdict

    def to_kv(self) -> dict:
        kv = {
            "flavor": str(self.flavor),
            "verdict": str(self.verdict).lower(),
            "trivial": str(self.trivial).lower(),
        }
        if self.flavor.F is not None:
            kv["F"] = str(self.flavor.F)
        if self.verdict:
            for i, (u, x, w, tf) in enumerate(_flat_witnesses(self)):
                kv[f"witness.{i:03d}.u"] = str(u)
                if x is not None:
                    kv[f"witness.{i:03d}.x"] = str(x)
                kv[f"witness.{i:03d}.w"] = fmt_bits(w)
                kv[f"witness.{i:03d}.tf"] = str(tf)
        if self.counterexample is not None:
            u, x, reason = self.counterexample
            kv["counterexample"] = reason
            if u is not None:
                kv["counterexample.u"] = str(u)
            if x is not None:
                kv["counterexample.x"] = str(x)
        return kv


def _flat_witnesses(r: StabilityReport):
    strength, w = r.flavor.strength, r.witnesses
    if strength is Strength.STABLE:
        return [(u, x, wt[0], wt[1]) for (u, x), wt in w.items()]
    if strength is Strength.RACE_FREE and r.flavor.scope is Scope.F_RELATIVE:
        return [(u, x, x.final_value, tf) for (u, x), tf in w.items()]
    if strength is Strength.RACE_FREE:
        return [(u, x, wu, tf) for u, (wu, tfs) in w.items() for x, tf in tfs.items()]
    wc, tfs = w
    return [(u, x, wc, tf) for (u, x), tf in tfs.items()]


def scoped_inputs(f: SystemTable, scope: Scope, F: Optional[BoolFn] = None) -> list:
    """``U``, ``U`` meet the convergent inputs, or ``U`` meet the inputs with ``F o u`` convergent."""
    if scope is Scope.ABSOLUTE:
        return list(f.inputs)
    if scope is Scope.RELATIVE:
        return [u for u in f.inputs if u.final_value is not None]
    return [u for u in f.inputs if apply_fn(F, u).final_value is not None]


def _tf(x: Signal, left: bool) -> Fraction:
    # the x(t - 0) form needs an instant strictly after the last switch
    return x.final_time + 1 if left else x.final_time


def check(f: SystemTable, flavor: StabilityFlavor, left: bool = False) -> StabilityReport:
    """Decide ``flavor`` for ``f`` and extract witnesses or a counterexample.

    ``left`` produces witnesses for the ``x(t - 0) = w`` form of the conditions.
    """
    F = flavor.F
    if flavor.scope is Scope.F_RELATIVE:
        if F.in_width != f.m:
            raise WidthMismatch(f"F takes {F.in_width} bits but inputs have width {f.m}")
        if flavor.strength is Strength.RACE_FREE and F.out_width != f.n:
            raise WidthMismatch(f"F produces {F.out_width} bits but states have width {f.n}")
    us = scoped_inputs(f, flavor.scope, F)
    trivial = flavor.scope is not Scope.ABSOLUTE and not us
    report = StabilityReport(flavor, True, trivial, left=left)
    strength = flavor.strength

    if strength is Strength.STABLE:
        wit = {}
        for u in us:
            for x in f.states(u):
                if x.final_value is None:
                    report.verdict, report.counterexample = False, (u, x, "no final value")
                    return report
                wit[(u, x)] = (x.final_value, _tf(x, left))
        report.witnesses = wit
        return report

    if strength is Strength.RACE_FREE and flavor.scope is Scope.F_RELATIVE:
        wit = {}
        for u in us:
            Fu = apply_fn(F, u)
            target = Fu.final_value
            for x in f.states(u):
                if x.final_value is None:
                    report.verdict, report.counterexample = False, (u, x, "no final value")
                    return report
                if x.final_value != target:
                    reason = f"final value {fmt_bits(x.final_value)} differs from F limit {fmt_bits(target)}"
                    report.verdict, report.counterexample = False, (u, x, reason)
                    return report
                wit[(u, x)] = max(_tf(x, left), Fu.final_time)
        report.witnesses = wit
        return report

    if strength is Strength.RACE_FREE:
        wit = {}
        for u in us:
            w, tfs = None, {}
            for x in f.states(u):
                if x.final_value is None:
                    report.verdict, report.counterexample = False, (u, x, "no final value")
                    return report
                if w is not None and x.final_value != w:
                    reason = f"distinct final values {fmt_bits(w)} and {fmt_bits(x.final_value)}"
                    report.verdict, report.counterexample = False, (u, x, reason)
                    return report
                w = x.final_value
                tfs[x] = _tf(x, left)
            wit[u] = (w, tfs)
        report.witnesses = wit
        return report

    # constant: the F-relative form quantifies over the whole of U
    domain = list(f.inputs) if flavor.scope is Scope.F_RELATIVE else us
    w, tfs = None, {}
    for u in domain:
        for x in f.states(u):
            if x.final_value is None:
                report.verdict, report.counterexample = False, (u, x, "no final value")
                return report
            if w is not None and x.final_value != w:
                reason = f"distinct final values {fmt_bits(w)} and {fmt_bits(x.final_value)}"
                report.verdict, report.counterexample = False, (u, x, reason)
                return report
            w = x.final_value
            tfs[(u, x)] = _tf(x, left)
    report.witnesses = ((0,) * f.n if w is None else w, tfs)
    return report


def is_stable(f: SystemTable, scope="abs", strength="stable", F: Optional[BoolFn] = None) -> bool:
    return check(f, StabilityFlavor(Scope(scope), Strength(strength), F)).verdict


def lim_system(f: SystemTable) -> SystemTable:
    """``lim f(u)``: the final values of ``f(u)`` as constant signals."""
    report = check(f, StabilityFlavor(Scope.ABSOLUTE, Strength.STABLE))
    if not report.verdict:
        raise PreconditionError("lim f needs an absolutely stable system", report.counterexample)
    return SystemTable(f.m, f.n, {u: {Signal.constant(w) for w in sigma(f, u)} for u in f.inputs})


def check_combined(f: SystemTable, strength, ft_kind: str, grid=None) -> tuple:
    """Literal ``(lhs, rhs)`` of one stability/final-time equivalence.

    ``lhs`` is the conjunction of the absolute stability condition and the
    final-time condition of kind ``ft_kind``; ``rhs`` is the merged formula.
    """
    strength = Strength(strength).value
    grid = grid or formulas.Grid(f.signals())
    lhs = formulas.stability_formula(f, "abs", strength, grid=grid) and formulas.final_time_formula(f, ft_kind, grid)
    rhs = formulas.merged_formula(f, strength, ft_kind, grid)
    return lhs, rhs


@dataclass
class ClosureCase:
    construction: str
    strength: str
    hypothesis: bool
    conclusion: Optional[bool]
    status: str  # holds | vacuous | skipped | violation | counterexample | no-counterexample
    note: str = ""


@dataclass
class ClosureReport:
    scope: str
    cases: list = field(default_factory=list)

    @property
    def violations(self) -> list:
        return [c for c in self.cases if c.status == "violation"]

    @property
    def counterexamples(self) -> list:
        return [c for c in self.cases if c.status == "counterexample"]


def closure_suite(f: SystemTable, g: Optional[SystemTable] = None, f2: Optional[SystemTable] = None,
                  h: Optional[SystemTable] = None, scope: str = "abs", strict: bool = True) -> ClosureReport:
    """Check every applicable closure implication on the given operands.

    ``g`` feeds the subsystem, intersection and union cases, ``f2`` the parallel
    connection and ``h`` the serial connection ``h o f``. For race-free
    strength no serial implication is asserted: the case only records whether
    ``(h, f)`` is a counterexample. Relative scope cases are derived by
    analogy with the absolute ones, and the relative serial case is recorded
    without being asserted.
    """
    sc = Scope(scope)
    report = ClosureReport(sc.value)

    def holds(sys, k):
        return check(sys, StabilityFlavor(sc, k)).verdict

    def record(name, k, hyp, build, assert_it=True):
        if not hyp:
            report.cases.append(ClosureCase(name, k.value, False, None, "vacuous"))
            return
        try:
            built = build()
        except (EmptyDomain, EmptyValueSet, SideConditionError, WidthMismatch) as exc:
            report.cases.append(ClosureCase(name, k.value, True, None, "skipped", str(exc)))
            return
        concl = holds(built, k)
        if not assert_it:
            status = "no-counterexample" if concl else "counterexample"
        else:
            status = "holds" if concl else "violation"
        report.cases.append(ClosureCase(name, k.value, True, concl, status))
        if status == "violation" and strict:
            raise TheoremFalsified(f"{name} closure fails for {sc.value}:{k.value}", (f, g, f2, h))

    for k in Strength:
        fk = holds(f, k)
        if g is not None:
            sub_ok = g.m == f.m and g.n == f.n and is_subsystem(g, f)
            if sub_ok:
                record("subsystem", k, fk, lambda: g)
            else:
                report.cases.append(ClosureCase("subsystem", k.value, fk, None, "skipped", "g is not a subsystem of f"))
        record("dual", k, fk, lambda: dual(f))
        if g is not None:
            record("intersection", k, fk, lambda: intersect(f, g))
            record("union", k, fk and holds(g, k), lambda: union(f, g))
        if f2 is not None:
            record("parallel", k, fk and holds(f2, k), lambda: parallel(f, f2))
        if h is not None:
            if k is Strength.RACE_FREE:
                record("serial", k, holds(h, k) and fk, lambda: serial(h, f), assert_it=False)
            else:
                record("serial", k, holds(h, k), lambda: serial(h, f), assert_it=sc is Scope.ABSOLUTE)
    return report


@dataclass
class DependenceReport:
    t_f: Fraction
    pairs_checked: int
    stable: bool
    race_free: bool
    constant: bool
    violations: list = field(default_factory=list)  # (part, u, v)


def final_value_dependence(f: SystemTable) -> DependenceReport:
    """Check that final values only depend on the input up to the fixed final time.

    Requires a non-anticipatory system; the fixed final time is the least one.
    """
    ok, cex = check_non_anticipatory(f)
    if not ok:
        raise PreconditionError("final-value dependence needs a non-anticipatory system", cex)
    tf = classify_final_time(f).fixed
    stable = check(f, StabilityFlavor(Scope.ABSOLUTE, Strength.STABLE)).verdict
    race_free = check(f, StabilityFlavor(Scope.ABSOLUTE, Strength.RACE_FREE)).verdict
    constant = check(f, StabilityFlavor(Scope.ABSOLUTE, Strength.CONSTANT)).verdict
    rep = DependenceReport(tf, 0, stable, race_free, constant)
    inputs = f.inputs
    for i, u in enumerate(inputs):
        for v in inputs[i + 1:]:
            if not (restrict_eq(u, v, tf) and u(tf) == v(tf)):
                continue
            rep.pairs_checked += 1
            if stable and sigma(f, u) != sigma(f, v):
                rep.violations.append(("stable", u, v))
            if race_free and sigma(f, u) != sigma(f, v):
                rep.violations.append(("racefree", u, v))
    if constant:
        limits = {w for u in inputs for w in sigma(f, u)}
        if len(limits) > 1:
            rep.violations.append(("constant", None, None))
    return rep
