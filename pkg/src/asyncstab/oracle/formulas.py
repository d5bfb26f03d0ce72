"""Literal evaluation of the quantified formulas over a finite sample grid.

Every quantifier over real time is eliminated the same way: all signals in
play are constant between consecutive event instants, so a grid holding every
event instant up to the joint periodic horizon, the midpoints between them and
one point beyond each end decides every ``forall t`` and ``exists t``. Past the
horizon the signals repeat with the joint period, which is folded back onto
one period of the grid.

This module only ever *evaluates* signals pointwise. It never consults the
canonical tail, ``final_value`` or any checker, so it is an independent route
against which the checkers in :mod:`asyncstab.stability` are compared.
"""
from __future__ import annotations

import bisect
from fractions import Fraction
from typing import Iterable, Optional

from ..errors import AsyncSysError
from ..signal import BoolFn, Signal, all_bits, as_time, periodic_horizon

SCOPES = ("abs", "rel", "frel")
STRENGTHS = ("stable", "racefree", "constant")
TIME_KINDS = ("unbounded", "bounded", "fix")


class UnknownFormula(AsyncSysError, KeyError):
    pass


class Grid:
    """Sample instants deciding every pointwise quantifier over ``signals``.

    Bitmasks are indexed by position in ``points``: bit ``i`` answers the
    question for the candidate instant ``points[i]``.
    """

    def __init__(self, signals: Iterable[Signal]):
        signals = list(signals)
        T, P = periodic_horizon(signals)
        self.periodic = any(s.tail is not None for s in signals)
        self.T, self.P = T, P
        H = T + P if self.periodic else T
        times = sorted({t for s in signals for t, _ in s.events_upto(H)} | ({T, H} if self.periodic else set()))
        if not times:
            times = [Fraction(0)]
        pts = set(times)
        pts.update((a + b) / 2 for a, b in zip(times, times[1:]))
        pts.add(times[0] - 1)
        pts.add(times[-1] + 1)
        self.points = sorted(pts)
        self.window = [p for p in self.points if T <= p <= H] if self.periodic else []
        self._vals = {}
        self._cache = {}

    def values(self, x: Signal) -> list:
        v = self._vals.get(x)
        if v is None:
            v = self._vals[x] = [x(p) for p in self.points]
        return v

    def _suffix_mask(self, vals, pred_point) -> int:
        # Bit i set iff pred holds on every sample at or after points[i].
        n = len(self.points)
        mask, ok = 0, True
        for i in range(n - 1, -1, -1):
            ok = ok and pred_point(i)
            if ok:
                mask |= 1 << i
        return mask

    def _window_ok(self, pred_t) -> bool:
        return all(pred_t(p) for p in self.window)

    def _fold(self, mask: int, pred_t) -> int:
        # Candidates at or past T also see the whole periodic window beyond the grid.
        if not self.periodic or self._window_ok(pred_t):
            return mask
        for i, p in enumerate(self.points):
            if p >= self.T:
                mask &= ~(1 << i)
        return mask

    def settle_mask(self, x: Signal, w) -> int:
        """Candidates ``tf`` with ``x(t) = w`` for all ``t >= tf``."""
        key = ("settle", x, w)
        m = self._cache.get(key)
        if m is None:
            vals = self.values(x)
            m = self._suffix_mask(vals, lambda i: vals[i] == w)
            m = self._cache[key] = self._fold(m, lambda t: x(t) == w)
        return m

    def settle_left_mask(self, x: Signal, w) -> int:
        """Candidates ``tf`` with ``x(t - 0) = w`` for all ``t >= tf``."""
        key = ("settle-left", x, w)
        m = self._cache.get(key)
        if m is None:
            m = self.settle_mask(x, w)
            # x(t-0) for t >= points[i] also samples the piece just left of points[i],
            # whose value is the sample at points[i-1].
            m = self._cache[key] = m & ((m << 1) | 1)
        return m

    def converge_mask(self, x: Signal) -> int:
        """Candidates ``tf`` with ``x(t) = x(tf)`` for all ``t >= tf``."""
        key = ("conv", x)
        m = self._cache.get(key)
        if m is None:
            m = 0
            for w in set(self.values(x)):
                m |= self.settle_mask(x, w)
            self._cache[key] = m
        return m

    def fn_converge_mask(self, F: BoolFn, u: Signal) -> int:
        """Candidates ``tf`` with ``F(u(t)) = F(u(tf))`` for all ``t >= tf``."""
        key = ("fconv", F, u)
        m = self._cache.get(key)
        if m is None:
            vals = [F(v) for v in self.values(u)]
            m = 0
            for i in range(len(vals)):
                target = vals[i]
                if all(v == target for v in vals[i:]) and (
                    not self.periodic or self.points[i] < self.T or self._window_ok(lambda t: F(u(t)) == target)
                ):
                    m |= 1 << i
            self._cache[key] = m
        return m

    def f_target_mask(self, F: BoolFn, u: Signal, x: Signal) -> int:
        """Candidates ``tf`` with ``x(t) = F(u(tf))`` and ``F(u(t)) = F(u(tf))`` for all ``t >= tf``."""
        key = ("ftarget", F, u, x)
        m = self._cache.get(key)
        if m is None:
            fu = [F(v) for v in self.values(u)]
            m = 0
            for i in range(len(fu)):
                if (self.fn_converge_mask(F, u) >> i) & 1 and (self.settle_mask(x, fu[i]) >> i) & 1:
                    m |= 1 << i
            self._cache[key] = m
        return m

    def initial_mask(self, x: Signal) -> int:
        """Candidates ``t0`` with ``x(t) = x(t0 - 0)`` for all ``t < t0``."""
        key = ("init", x)
        m = self._cache.get(key)
        if m is None:
            vals = self.values(x)
            m = 0
            for i in range(len(vals)):
                # the sample just left of points[i] is points[i-1] or the piece below the grid
                left = vals[i - 1] if i else vals[0]
                if all(v == left for v in vals[:i]):
                    m |= 1 << i
            self._cache[key] = m
        return m

    def held_before_mask(self, x: Signal, w) -> int:
        """Candidates ``t0`` with ``x(t) = w`` for all ``t < t0``."""
        vals = self.values(x)
        if vals[0] != w:
            return 0
        return self.initial_mask(x)

    def all_mask(self) -> int:
        return (1 << len(self.points)) - 1

    # Direct (non-grid) checks for replaying witnesses at arbitrary instants.

    def samples_from(self, tf) -> list:
        tf = as_time(tf)
        pts = [tf] + self.points[bisect.bisect_right(self.points, tf):]
        if self.periodic and tf >= self.T:
            pts += self.window
        return pts

    def samples_before(self, t0) -> list:
        t0 = as_time(t0)
        pts = self.points[: bisect.bisect_left(self.points, t0)]
        return pts + [t0 - 1 if not pts else (pts[-1] + t0) / 2]

    def settles(self, x: Signal, w, tf) -> bool:
        key = ("settles", x, w, tf)
        r = self._cache.get(key)
        if r is None:
            r = self._cache[key] = all(x(t) == w for t in self.samples_from(tf))
        return r

    def settles_left(self, x: Signal, w, tf) -> bool:
        return self.settles(x, w, tf) and x(self.samples_before(tf)[-1]) == w


def _scoped(f, scope: str, grid: Grid, F: Optional[BoolFn]) -> list:
    if scope == "abs":
        return list(f.inputs)
    if scope == "rel":
        return [u for u in f.inputs if grid.converge_mask(u)]
    if scope == "frel":
        return [u for u in f.inputs if grid.fn_converge_mask(F, u)]
    raise UnknownFormula(scope)


def _stable(f, us, grid, n) -> bool:
    # forall u forall x exists w exists tf
    return all(any(grid.settle_mask(x, w) for w in all_bits(n)) for u in us for x in f[u])


def _racefree(f, us, grid, n) -> bool:
    # forall u exists w forall x exists tf
    return all(any(all(grid.settle_mask(x, w) for x in f[u]) for w in all_bits(n)) for u in us)


def _constant(f, us, grid, n) -> bool:
    # exists w forall u forall x exists tf
    return any(all(grid.settle_mask(x, w) for u in us for x in f[u]) for w in all_bits(n))


def _frel_racefree(f, us, grid, F) -> bool:
    # forall u forall x exists tf forall t >= tf: x(t) = F(u(tf))
    return all(grid.f_target_mask(F, u, x) for u in us for x in f[u])


def stability_formula(f, scope: str, strength: str, F: Optional[BoolFn] = None, grid: Optional[Grid] = None) -> bool:
    grid = grid or Grid(f.signals())
    if scope == "frel" and F is None:
        raise ValueError("F-relative formulas need F")
    if scope == "frel" and strength == "constant":
        # the constant F-relative form quantifies over all of U
        return _constant(f, list(f.inputs), grid, f.n)
    us = _scoped(f, scope, grid, F)
    if strength == "stable":
        return _stable(f, us, grid, f.n)
    if strength == "racefree":
        return _frel_racefree(f, us, grid, F) if scope == "frel" else _racefree(f, us, grid, f.n)
    if strength == "constant":
        return _constant(f, us, grid, f.n)
    raise UnknownFormula(strength)


def _and_all(masks, full) -> int:
    m = full
    for x in masks:
        m &= x
    return m


def final_time_formula(f, kind: str, grid: Optional[Grid] = None) -> bool:
    grid = grid or Grid(f.signals())
    full = grid.all_mask()
    conv = {u: [x for x in f[u] if grid.converge_mask(x)] for u in f.inputs}
    if kind == "unbounded":
        return all(grid.converge_mask(x) for u in f.inputs for x in conv[u])
    if kind == "bounded":
        return all(_and_all((grid.converge_mask(x) for x in conv[u]), full) for u in f.inputs)
    if kind == "fix":
        return bool(_and_all((grid.converge_mask(x) for u in f.inputs for x in conv[u]), full))
    raise UnknownFormula(kind)


def initial_time_formula(f, kind: str, grid: Optional[Grid] = None) -> bool:
    grid = grid or Grid(f.signals())
    full = grid.all_mask()
    if kind == "unbounded":
        return all(grid.initial_mask(x) for u in f.inputs for x in f[u])
    if kind == "bounded":
        return all(_and_all((grid.initial_mask(x) for x in f[u]), full) for u in f.inputs)
    if kind == "fix":
        return bool(_and_all((grid.initial_mask(x) for u in f.inputs for x in f[u]), full))
    raise UnknownFormula(kind)


def merged_formula(f, strength: str, kind: str, grid: Optional[Grid] = None) -> bool:
    """Right-hand sides of the nine stability/final-time equivalences."""
    grid = grid or Grid(f.signals())
    full = grid.all_mask()
    W = all_bits(f.n)
    us = list(f.inputs)

    def any_w(x):
        m = 0
        for w in W:
            m |= grid.settle_mask(x, w)
        return m

    if strength == "stable":
        if kind == "unbounded":  # forall u forall x exists w exists tf
            return all(any_w(x) for u in us for x in f[u])
        if kind == "bounded":  # forall u exists tf forall x exists w
            return all(_and_all((any_w(x) for x in f[u]), full) for u in us)
        if kind == "fix":  # exists tf forall u forall x exists w
            return bool(_and_all((any_w(x) for u in us for x in f[u]), full))
    if strength == "racefree":
        if kind == "unbounded":  # forall u exists w forall x exists tf
            return all(any(all(grid.settle_mask(x, w) for x in f[u]) for w in W) for u in us)
        if kind == "bounded":  # forall u exists w exists tf forall x
            return all(any(_and_all((grid.settle_mask(x, w) for x in f[u]), full) for w in W) for u in us)
        if kind == "fix":  # exists tf forall u exists w forall x
            m = full
            for u in us:
                mu = 0
                for w in W:
                    mu |= _and_all((grid.settle_mask(x, w) for x in f[u]), full)
                m &= mu
            return bool(m)
    if strength == "constant":
        if kind == "unbounded":  # exists w forall u forall x exists tf
            return any(all(grid.settle_mask(x, w) for u in us for x in f[u]) for w in W)
        if kind == "bounded":  # exists w forall u exists tf forall x
            return any(all(_and_all((grid.settle_mask(x, w) for x in f[u]), full) for u in us) for w in W)
        if kind == "fix":  # exists w exists tf forall u forall x
            return any(_and_all((grid.settle_mask(x, w) for u in us for x in f[u]), full) for w in W)
    raise UnknownFormula(f"{strength}/{kind}")


def non_anticipatory_formula(f, grid: Optional[Grid] = None) -> bool:
    """forall t1 forall u, v: equal inputs on (-inf, t1) force equal restricted state sets."""
    grid = grid or Grid(f.signals())
    pts = grid.points
    cands = pts + [pts[-1] + 1]

    def agree(a, b, k):
        va, vb = grid.values(a), grid.values(b)
        return va[:k] == vb[:k]

    inputs = list(f.inputs)
    for t1 in cands:
        k = bisect.bisect_left(pts, t1)
        for u in inputs:
            for v in inputs:
                if u == v or not agree(u, v, k):
                    continue
                xs, ys = f[u], f[v]
                if not all(any(agree(x, y, k) for y in ys) for x in xs):
                    return False
                if not all(any(agree(x, y, k) for x in xs) for y in ys):
                    return False
    return True


def initialized_formula(f, grid: Optional[Grid] = None) -> bool:
    """exists w0 forall u forall x exists t0 forall t < t0: x(t) = w0."""
    grid = grid or Grid(f.signals())
    return any(all(grid.held_before_mask(x, w) for u in f.inputs for x in f[u]) for w in all_bits(f.n))


def evaluate(formula_id: str, f, F: Optional[BoolFn] = None, grid: Optional[Grid] = None) -> bool:
    """Evaluate a named formula literally.

    Ids: ``<abs|rel|frel>-<stable|racefree|constant>``,
    ``<initial|final>-<unbounded|bounded|fix>``,
    ``merged-<strength>-<kind>``, ``non-anticipatory``, ``initialized``.
    """
    parts = formula_id.split("-")
    if len(parts) == 2 and parts[0] in SCOPES and parts[1] in STRENGTHS:
        return stability_formula(f, parts[0], parts[1], F, grid)
    if len(parts) == 2 and parts[0] == "final" and parts[1] in TIME_KINDS:
        return final_time_formula(f, parts[1], grid)
    if len(parts) == 2 and parts[0] == "initial" and parts[1] in TIME_KINDS:
        return initial_time_formula(f, parts[1], grid)
    if len(parts) == 3 and parts[0] == "merged" and parts[1] in STRENGTHS and parts[2] in TIME_KINDS:
        return merged_formula(f, parts[1], parts[2], grid)
    if formula_id == "non-anticipatory":
        return non_anticipatory_formula(f, grid)
    if formula_id == "initialized":
        return initialized_formula(f, grid)
    raise UnknownFormula(formula_id)


def replay(formula_id: str, f, witnesses, F: Optional[BoolFn] = None, grid: Optional[Grid] = None,
           left: bool = False) -> bool:
    """Re-evaluate a formula with its existential witnesses plugged in.

    Witness shapes follow :class:`asyncstab.stability.StabilityReport` and
    :class:`asyncstab.system.TimeFlavor`. ``left`` replays the ``x(t - 0) = w``
    form of the stability conditions.
    """
    grid = grid or Grid(f.signals())
    settle = grid.settles_left if left else grid.settles
    parts = formula_id.split("-")
    if len(parts) == 2 and parts[0] in SCOPES and parts[1] in STRENGTHS:
        scope, strength = parts
        if scope == "frel" and strength == "constant":
            scope = "abs"
        us = _scoped(f, scope, grid, F)
        try:
            if strength == "stable":
                return all(settle(x, *witnesses[(u, x)]) for u in us for x in f[u])
            if strength == "racefree" and scope == "frel":
                return all(
                    grid.settles(x, F(u(witnesses[(u, x)])), witnesses[(u, x)])
                    and all(F(u(t)) == F(u(witnesses[(u, x)])) for t in grid.samples_from(witnesses[(u, x)]))
                    for u in us
                    for x in f[u]
                )
            if strength == "racefree":
                return all(settle(x, witnesses[u][0], witnesses[u][1][x]) for u in us for x in f[u])
            if strength == "constant":
                w, tfs = witnesses
                return all(settle(x, w, tfs[(u, x)]) for u in us for x in f[u])
        except (KeyError, TypeError):
            return False
    if len(parts) == 2 and parts[0] in ("initial", "final") and parts[1] in TIME_KINDS:
        which, kind = parts
        tf = witnesses

        def pick(u, x):
            if kind == "fix":
                return tf.fixed
            if kind == "bounded":
                return tf.per_input[u]
            return tf.per_state[(u, x)]

        try:
            if which == "final":
                return all(
                    grid.settles(x, x(pick(u, x)), pick(u, x))
                    for u in f.inputs
                    for x in f[u]
                    if grid.converge_mask(x)
                )
            return all(
                all(x(t) == x.left_limit(pick(u, x)) for t in grid.samples_before(pick(u, x)))
                for u in f.inputs
                for x in f[u]
            )
        except (KeyError, TypeError):
            return False
    raise UnknownFormula(formula_id)
