"""Suites for the constructive transfer results, run on generator-built systems."""
from __future__ import annotations

import itertools
import random

from ..errors import AsyncSysError
from ..generator import GeneratorSystem, c_element_phi, glitch_phi, library_examples, sr_latch_phi
from ..signal import BoolFn, Signal, all_bits, fmt_bits
from ..stability import StabilityFlavor, check
from ..transitions import (
    SigmaClosure,
    build_fundamental_input,
    check_controllability,
    is_hazard_free,
    plan_trajectory,
    settle_window,
    sync_like_a,
    sync_like_compose,
)


def buffer_pair_phi() -> BoolFn:
    # two independent buffers x_i' = u_i; inputs read (x1, x2, u1, u2)
    return BoolFn.from_function(4, 2, lambda b: (b[2], b[3]))


FAMILY_PHIS = (
    ("sr_latch", sr_latch_phi, (0,)),
    ("c_element", c_element_phi, (0,)),
    ("glitch_net", glitch_phi, (0, 0)),
    ("buffer_pair", buffer_pair_phi, (0, 0)),
)


def family() -> list:
    """Generator systems over the closure of the constant inputs."""
    out = []
    for name, phi_fn, init in FAMILY_PHIS:
        phi = phi_fn()
        m = phi.in_width - len(init)
        basis = SigmaClosure([Signal(w) for w in all_bits(m)])
        for rule in ("any", "single"):
            for steps in (3, 4):
                g = GeneratorSystem(phi, init, basis, step=1, max_steps=steps, update_rule=rule)
                out.append((f"{name}.{rule}.{steps}", g))
    return out


def _sample(items, k, rng):
    items = list(items)
    return items if len(items) <= k else rng.sample(items, k)


def constructive_runs(seed: int = 0, per_system: int = 16) -> dict:
    """Run both constructions on every family member and collect certificates.

    At most ``per_system`` input and target sequences are tried per system,
    drawn with ``seed`` when there are more.
    """
    rng = random.Random(seed)
    res = {"systems": [], "certs": [], "build_fail": 0, "replay_fail": 0, "member_fail": 0,
           "plans": 0, "plan_fail": 0, "value_fail": 0, "skipped": [], "first": None}
    for name, g in family():
        try:
            build_fundamental_input(g, [g.closure.basis[0]])
        except AsyncSysError as exc:
            res["skipped"].append(f"{name}: {exc}")
            continue
        res["systems"].append(name)
        for seq in _sample(itertools.product(g.closure.basis, repeat=3), per_system, rng):
            try:
                u, cuts, cert = build_fundamental_input(g, seq)
            except AsyncSysError as exc:
                res["build_fail"] += 1
                res["first"] = res["first"] or f"{name} build: {exc}"
                continue
            res["certs"].append((name, g, cert))
            if not all(st.replay(g) for st in cert.steps) or not cert.replay(g):
                res["replay_fail"] += 1
                res["first"] = res["first"] or f"{name} replay: {u}"
            if u not in g.closure:
                res["member_fail"] += 1
        ctl = check_controllability(g)
        if not (ctl.c1 and ctl.c2):
            continue
        for tail in _sample(itertools.product(all_bits(g.n), repeat=3), per_system, rng):
            targets = [g.init] + list(tail)
            res["plans"] += 1
            try:
                u, cuts, cert = plan_trajectory(g, targets)
            except AsyncSysError as exc:
                res["plan_fail"] += 1
                res["first"] = res["first"] or f"{name} plan {[fmt_bits(w) for w in targets]}: {exc}"
                continue
            res["certs"].append((name, g, cert))
            # pointwise check of x(t_k - 0) = w^k
            if not all(x.left_limit(t) == w for x in g.states(u) for t, w in zip(cuts, targets)):
                res["value_fail"] += 1
                res["first"] = res["first"] or f"{name} plan values: {u}"
            if not cert.replay(g):
                res["replay_fail"] += 1
    return res


def fundamental_mode_report(seed: int = 0) -> dict:
    r = constructive_runs(seed)
    fails = r["build_fail"] + r["replay_fail"] + r["member_fail"] + r["plan_fail"] + r["value_fail"]
    out = {
        "suite": "fundamental-mode",
        "seed": str(seed),
        "systems": str(len(r["systems"])),
        "systems.names": ",".join(r["systems"]),
        "certificates": str(len(r["certs"])),
        "build.failed": str(r["build_fail"]),
        "replay.failed": str(r["replay_fail"]),
        "membership.failed": str(r["member_fail"]),
        "plans": str(r["plans"]),
        "plans.failed": str(r["plan_fail"]),
        "plans.value_failed": str(r["value_fail"]),
        "skipped": str(len(r["skipped"])),
    }
    for i, s in enumerate(r["skipped"]):
        out[f"skipped.{i:03d}"] = s
    if r["first"]:
        out["first_failure"] = r["first"]
    out["violations"] = str(fails)
    out["status"] = "clean" if fails == 0 else "violated"
    return out


def composition_report(seed: int = 0) -> dict:
    r = constructive_runs(seed)
    chains = fails = 0
    first = None
    for name, g, cert in r["certs"]:
        for a, b in zip(cert.steps, cert.steps[1:]):
            chains += 1
            try:
                ok = sync_like_compose(g, a, b)
            except AsyncSysError as exc:
                ok = False
                first = first or f"{name}: {exc}"
            if not ok:
                fails += 1
                first = first or f"{name}: steps at {a.lo}, {b.lo}, {b.hi}"
    out = {"suite": "composition", "seed": str(seed), "chains": str(chains), "failed": str(fails)}
    if first:
        out["first_failure"] = first
    out["violations"] = str(fails)
    out["status"] = "clean" if fails == 0 else "violated"
    return out


def _jumps(x: Signal, lo, hi) -> int:
    # most discontinuities of one coordinate in [lo, hi), counted from the event list
    evs = [(t, v) for t, v in x.events_upto(hi) if lo <= t < hi]
    prev = x.left_limit(lo)
    counts = [0] * x.width
    for _, v in evs:
        for i in range(x.width):
            if v[i] != prev[i]:
                counts[i] += 1
        prev = v
    return max(counts, default=0)


HAZARD_CASES = (("glitch_net", 1), ("sr_latch", 0), ("sr_latch", 1))


def hazards_report(seed: int = 0) -> dict:
    lib = library_examples()
    out = {"suite": "hazards", "seed": str(seed)}
    for name, idx in HAZARD_CASES:
        ex = lib[name]
        f = ex.table()
        u = f.inputs[idx]
        t0, tf = settle_window(f, u)
        xs = f.states(u)
        key = f"case.{name}.{idx}"
        out[f"{key}.input"] = str(u)
        out[f"{key}.window"] = f"{t0},{tf}"
        out[f"{key}.runs"] = str(len(xs))
        out[f"{key}.glitching_runs"] = str(sum(1 for x in xs if _jumps(x, t0, tf) > 1))
        out[f"{key}.stable"] = str(check(f, StabilityFlavor.parse("abs:stable")).verdict).lower()
        out[f"{key}.sync_like"] = str(sync_like_a(f, u, t0, tf) is not None).lower()
        out[f"{key}.hazard_free"] = str(is_hazard_free(f, u, t0, tf)).lower()
    out["status"] = "clean"
    return out
