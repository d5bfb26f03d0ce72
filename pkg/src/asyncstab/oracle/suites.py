"""Named theorem suites run over enumerated and sampled corpora.

Each suite returns a flat report dict whose values are strings, so two runs
with the same corpus and seed print byte-identical blocks. Verdicts that are
compared against each other always come from two routes: the checkers in
:mod:`asyncstab.stability` and the literal formulas in
:mod:`asyncstab.oracle.formulas`.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import replace
from typing import Optional

from ..signal import BoolFn
from ..stability import (
    Scope,
    StabilityFlavor,
    Strength,
    all_flavors,
    check,
    check_combined,
    closure_suite,
    final_value_dependence,
    lim_system,
)
from ..system import SystemTable, serial
from . import formulas
from .corpus import CORPORA, CorpusSpec, enumerate_systems, random_signal, random_system, signal_alphabet

TIME_KINDS = formulas.TIME_KINDS
STRENGTH_ORDER = ("constant", "racefree", "stable")


def function_pool(m: int, n: int, seed: int = 0) -> list:
    """Boolean functions ``B^m -> B^n`` cycled through by the F-relative checks."""
    rows = 2 ** m
    if 2 ** (n * rows) <= 16:
        out = []
        for bits in itertools.product((0, 1), repeat=n * rows):
            table = tuple(tuple(bits[r * n:(r + 1) * n]) for r in range(rows))
            out.append(BoolFn(m, n, table))
        return out
    rng = random.Random(seed)
    out = [BoolFn.constant(m, (0,) * n)]
    if m == n:
        out.append(BoolFn.identity(m))
    while len(out) < 8:
        out.append(BoolFn(m, n, tuple(tuple(rng.randint(0, 1) for _ in range(n)) for _ in range(rows))))
    return out


def _spec(corpus) -> CorpusSpec:
    return CORPORA[corpus] if isinstance(corpus, str) else corpus


def _shared_grid(spec: CorpusSpec) -> formulas.Grid:
    sigs = signal_alphabet(spec.m, spec.time_grid, spec.allow_tails)
    if spec.n != spec.m:
        sigs += signal_alphabet(spec.n, spec.time_grid, spec.allow_tails)
    return formulas.Grid(sigs)


def _header(name: str, spec: CorpusSpec, seed: int) -> dict:
    return {
        "suite": name,
        "corpus.m": str(spec.m),
        "corpus.n": str(spec.n),
        "corpus.max_inputs": str(spec.max_inputs),
        "corpus.max_states": str(spec.max_states),
        "corpus.grid": ",".join(str(t) for t in spec.time_grid),
        "corpus.tails": str(spec.allow_tails).lower(),
        "seed": str(seed),
    }


def _describe(f: SystemTable) -> str:
    parts = []
    for u, xs in f.items():
        parts.append(f"{u} -> [" + "; ".join(str(x) for x in xs) + "]")
    return " | ".join(parts)


class _Tally:
    """Counts plus the first failing table in enumeration order."""

    def __init__(self, prefix: str):
        self.prefix = prefix
        self.checked = 0
        self.failed = 0
        self.first = None

    def add(self, ok: bool, f: SystemTable, what: str = ""):
        self.checked += 1
        if not ok:
            self.failed += 1
            if self.first is None:
                self.first = (what + ": " if what else "") + _describe(f)

    def kv(self) -> dict:
        out = {f"{self.prefix}.checked": str(self.checked), f"{self.prefix}.failed": str(self.failed)}
        if self.first is not None:
            out[f"{self.prefix}.first"] = self.first
        return out


# Per-table probes. Each takes (f, F, grid, tallies).

def _probe_agreement(f, F, grid, t):
    for fl in all_flavors(F):
        r = check(f, fl)
        lit = formulas.stability_formula(f, fl.scope.value, fl.strength.value, F, grid)
        t["verdict"].add(r.verdict == lit, f, str(fl))
        if r.verdict:
            t["replay"].add(formulas.replay(fl.formula_id, f, r.witnesses, F, grid), f, str(fl))


def _probe_chains(f, F, grid, t):
    v = {(s, k): formulas.stability_formula(f, s, k, F, grid) for s in ("abs", "rel", "frel") for k in STRENGTH_ORDER}
    for s in ("abs", "rel"):
        t["strength"].add(
            (not v[(s, "constant")] or v[(s, "racefree")]) and (not v[(s, "racefree")] or v[(s, "stable")]), f, s
        )
    t["scope"].add((not v[("abs", "stable")] or v[("frel", "stable")]) and (not v[("frel", "stable")] or v[("rel", "stable")]), f)
    for which, fn in (("final", formulas.final_time_formula), ("initial", formulas.initial_time_formula)):
        fix, bnd, unb = (fn(f, k, grid) for k in ("fix", "bounded", "unbounded"))
        t[which].add((not fix or bnd) and (not bnd or unb), f)


def _probe_nine(f, F, grid, t):
    for k in STRENGTH_ORDER:
        for kind in TIME_KINDS:
            lhs, rhs = check_combined(f, k, kind, grid)
            t["nine"].add(lhs == rhs, f, f"{k}/{kind}")


def _probe_coincidence(f, F, grid, t):
    frel = check(f, StabilityFlavor(Scope.F_RELATIVE, Strength.CONSTANT, F)).verdict
    t["coincidence"].add(frel == formulas.stability_formula(f, "abs", "constant", None, grid), f)


def _probe_lim(f, F, grid, t):
    if not check(f, StabilityFlavor(Scope.ABSOLUTE, Strength.RACE_FREE)).verdict:
        return
    lim = lim_system(f)
    t["lim"].add(all(len(lim[u]) == 1 for u in lim), f)


def _probe_dependence(f, F, grid, t):
    if not (formulas.non_anticipatory_formula(f, grid) and formulas.final_time_formula(f, "fix", grid)):
        return
    rep = final_value_dependence(f)
    t["dependence"].add(not rep.violations, f, ",".join(p for p, _, _ in rep.violations))


SWEEP_PROBES = {
    "definition-agreement": (_probe_agreement, ("verdict", "replay")),
    "implication-chains": (_probe_chains, ("strength", "scope", "final", "initial")),
    "nine-equivalences": (_probe_nine, ("nine",)),
    "coincidence": (_probe_coincidence, ("coincidence",)),
    "lim-determinism": (_probe_lim, ("lim",)),
    "final-value-dependence": (_probe_dependence, ("dependence",)),
}


def corpus_sweep(corpus="small", suites=tuple(SWEEP_PROBES), seed: int = 0) -> dict:
    """Run several per-table suites in one pass over the exhaustive corpus.

    Returns ``{suite: report}``. F-relative checks cycle through
    :func:`function_pool` by table index.
    """
    spec = _spec(corpus)
    grid = _shared_grid(spec)
    pool = function_pool(spec.m, spec.n, seed)
    tallies = {name: {k: _Tally(k) for k in SWEEP_PROBES[name][1]} for name in suites}
    probes = [(SWEEP_PROBES[name][0], tallies[name]) for name in suites]
    count = 0
    for i, f in enumerate(enumerate_systems(spec)):
        F = pool[i % len(pool)]
        for probe, t in probes:
            probe(f, F, grid, t)
        count += 1
    out = {}
    for name in suites:
        rep = _header(name, spec, seed)
        rep["tables"] = str(count)
        failed = 0
        for tally in tallies[name].values():
            rep.update(tally.kv())
            failed += tally.failed
        rep["violations"] = str(failed)
        rep["status"] = "clean" if failed == 0 else "violated"
        out[name] = rep
    return out


def random_nine_equivalences(count: int = 10_000, seed: int = 0, corpus="wide") -> dict:
    """The nine equivalences on seeded random tables, one grid per table."""
    spec = replace(_spec(corpus), seed=seed)
    rng = random.Random(seed)
    t = {"nine": _Tally("nine")}
    for _ in range(count):
        f = random_system(spec, rng)
        _probe_nine(f, None, formulas.Grid(f.signals()), t)
    rep = _header("nine-equivalences-random", spec, seed)
    rep["tables"] = str(count)
    rep.update(t["nine"].kv())
    rep["violations"] = str(t["nine"].failed)
    rep["status"] = "clean" if t["nine"].failed == 0 else "violated"
    return rep


def _random_subsystem(f: SystemTable, rng: random.Random) -> SystemTable:
    inputs = [u for u in f.inputs if rng.random() < 0.7] or [f.inputs[0]]
    entries = {}
    for u in inputs:
        xs = f.states(u)
        entries[u] = [x for x in xs if rng.random() < 0.7] or [xs[0]]
    return SystemTable(f.m, f.n, entries)


def _perturbed(f: SystemTable, spec: CorpusSpec, rng: random.Random) -> SystemTable:
    # shares part of f and adds fresh material, so intersections and unions are not trivial
    other = random_system(spec, rng)
    entries = {u: set(xs) for u, xs in other.items()}
    for u, xs in f.items():
        if rng.random() < 0.6:
            entries.setdefault(u, set()).update(x for x in xs if rng.random() < 0.8)
    return SystemTable(f.m, f.n, {u: xs for u, xs in entries.items() if xs})


def _serial_partner(f: SystemTable, spec: CorpusSpec, rng: random.Random) -> SystemTable:
    # inputs of h are drawn from the states of f so the side condition holds
    entries = {}
    for u, xs in f.items():
        x = rng.choice(xs)
        entries[x] = {random_signal(rng, spec.n, spec.time_grid, spec.allow_tails) for _ in range(rng.randint(1, spec.max_states))}
    return SystemTable(f.n, spec.n, entries)


def random_closure(count: int = 10_000, seed: int = 0, corpus="small") -> dict:
    """Closure implications on seeded random operand tuples, both scopes."""
    spec = replace(_spec(corpus), seed=seed)
    rng = random.Random(seed)
    stats = {}
    first = None
    for i in range(count):
        f = random_system(spec, rng)
        g = _random_subsystem(f, rng) if i % 2 == 0 else _perturbed(f, spec, rng)
        f2 = random_system(spec, rng)
        h = _serial_partner(f, spec, rng)
        for scope in ("abs", "rel"):
            rep = closure_suite(f, g, f2, h, scope=scope, strict=False)
            for c in rep.cases:
                key = f"{scope}.{c.construction}.{c.strength}.{c.status}"
                stats[key] = stats.get(key, 0) + 1
                if c.status == "violation" and first is None:
                    first = f"{scope}.{c.construction}.{c.strength}: f = {_describe(f)}"
    out = _header("closure", spec, seed)
    out["pairs"] = str(count)
    for k in sorted(stats):
        out[f"case.{k}"] = str(stats[k])
    nviol = sum(v for k, v in stats.items() if k.endswith(".violation"))
    out["violations"] = str(nviol)
    if first is not None:
        out["first_violation"] = first
    out["status"] = "clean" if nviol == 0 else "violated"
    return out


SERIAL_SEARCH = CorpusSpec(1, 1, 2, 2, (1, 2, 3), False, budget=10 ** 7)


def serial_racefree_search(spec: CorpusSpec = SERIAL_SEARCH, limit: Optional[int] = None):
    """Find ``(h, f)``, both absolutely race-free, with ``h o f`` not race-free.

    Runs over every ``f`` of the corpus in canonical order. ``h o f (u)`` is
    the union of ``h(x)`` over ``x`` in ``f(u)``, so a single reachable ``x``
    per input cannot break race-freedom; the search therefore only pairs ``f``
    with tables ``h`` whose inputs are two states of one ``f(u)``, and tries
    every value-set assignment for them. Returns ``(h, f, pairs_visited)`` or
    None.
    """
    rf = StabilityFlavor(Scope.ABSOLUTE, Strength.RACE_FREE)
    alphabet = signal_alphabet(spec.n, spec.time_grid, spec.allow_tails)
    value_sets = [c for k in range(1, spec.max_states + 1) for c in itertools.combinations(alphabet, k)]
    visited = 0
    for f in enumerate_systems(spec):
        if spec.max_inputs < 2 or not check(f, rf).verdict:
            continue
        for u in f.inputs:
            for pair in itertools.combinations(f.states(u), 2):
                if any(not (f[v] & set(pair)) for v in f.inputs):
                    continue
                for sa, sb in itertools.product(value_sets, repeat=2):
                    if limit is not None and visited >= limit:
                        return None
                    visited += 1
                    h = SystemTable(spec.n, spec.n, {pair[0]: sa, pair[1]: sb})
                    if check(h, rf).verdict and not check(serial(h, f), rf).verdict:
                        return h, f, visited
    return None


def serial_racefree_report(seed: int = 0) -> dict:
    out = _header("serial-racefree-search", SERIAL_SEARCH, seed)
    hit = serial_racefree_search()
    if hit is None:
        out["found"] = "false"
        out["status"] = "no-counterexample"
        return out
    h, f, visited = hit
    out["found"] = "true"
    out["pairs_visited"] = str(visited)
    out["f"] = _describe(f)
    out["h"] = _describe(h)
    out["h_of_f"] = _describe(serial(h, f))
    out["status"] = "counterexample"
    return out


def run_suite(name: str, corpus="small", seed: int = 0, count: Optional[int] = None) -> dict:
    """Run one named suite and return its report.

    ``count`` overrides the number of random samples for the sampled suites.
    """
    if name in SWEEP_PROBES:
        rep = corpus_sweep(corpus, (name,), seed)[name]
        if name == "nine-equivalences":
            rnd = random_nine_equivalences(count if count is not None else 10_000, seed)
            for k, v in rnd.items():
                if not k.startswith(("suite", "corpus", "seed")):
                    rep[f"random.{k}"] = v
            rep["random.corpus"] = "wide"
            total = int(rep["violations"]) + int(rnd["violations"])
            rep["violations"] = str(total)
            rep["status"] = "clean" if total == 0 else "violated"
        return rep
    if name == "closure":
        return random_closure(count if count is not None else 10_000, seed, corpus)
    if name == "serial-racefree-search":
        return serial_racefree_report(seed)
    if name in TRANSITION_SUITES:
        return TRANSITION_SUITES[name](seed)
    raise KeyError(f"unknown suite {name!r}; known: {', '.join(suite_names())}")


def _constructive(name):
    def run(seed):
        from . import constructive

        return getattr(constructive, name)(seed)

    return run


TRANSITION_SUITES = {
    "fundamental-mode": _constructive("fundamental_mode_report"),
    "composition": _constructive("composition_report"),
    "hazards": _constructive("hazards_report"),
}


def suite_names() -> list:
    return list(SWEEP_PROBES) + ["closure", "serial-racefree-search"] + list(TRANSITION_SUITES)


def suite_failed(report: dict) -> bool:
    """Exit-status view of a report: True when something must be flagged."""
    return report.get("status") in ("violated", "counterexample")
