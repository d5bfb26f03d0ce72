"""Acceptance criteria, one test per criterion.

Each test records a one-line pass/fail summary that is printed at the end of
the run (see ``pytest_terminal_summary`` in conftest.py).
"""
import time
from pathlib import Path

import pytest

from asyncstab.cli import main
from asyncstab.generator import library_examples, runs
from asyncstab.oracle.constructive import composition_report, constructive_runs, hazards_report
from asyncstab.oracle.suites import corpus_sweep, run_suite, serial_racefree_search, suite_names
from asyncstab.stability import StabilityFlavor, check
from asyncstab.system import serial
from asyncstab.textio import format_kv, parse_system_file
from asyncstab.transitions import is_hazard_free, settle_window, sync_like_a

FIX = Path(__file__).resolve().parent / "fixtures"
RESULTS = []


def record(num, title, ok, detail=""):
    RESULTS.append(f"criterion {num:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else ""))


@pytest.fixture(scope="module")
def sweep():
    return corpus_sweep("small", ("implication-chains", "coincidence", "lim-determinism", "final-value-dependence"))


@pytest.fixture(scope="module")
def constructive():
    return constructive_runs(seed=0)


def test_c01_definition_agreement():
    t0 = time.perf_counter()
    rep = corpus_sweep("small", ("definition-agreement",))["definition-agreement"]
    elapsed = time.perf_counter() - t0
    ok = rep["verdict.failed"] == "0" and rep["replay.failed"] == "0" and elapsed <= 60
    record(1, "check() equals literal formula replay, 9 flavors, small corpus", ok,
           f"{rep['tables']} tables, {rep['verdict.checked']} verdicts, {rep['verdict.failed']} mismatches, {elapsed:.1f}s")
    assert int(rep["tables"]) <= 150_000
    assert rep["verdict.failed"] == "0", rep.get("verdict.first")
    assert rep["replay.failed"] == "0", rep.get("replay.first")
    assert elapsed <= 60


def test_c02_implication_chains(sweep):
    rep = sweep["implication-chains"]
    ok = rep["status"] == "clean"
    record(2, "constant => race-free => stable and fix => bounded => unbounded", ok,
           f"{rep['strength.checked']} strength, {rep['final.checked']} final-time checks")
    assert ok, rep


def test_c03_nine_equivalences(capsys):
    code = main(["oracle", "--suite", "sec5-nine-equivalences", "--corpus", "small", "--format", "kv"])
    out = capsys.readouterr().out
    d = dict(line.split("=", 1) for line in out.splitlines())
    ok = code == 0 and d["nine.failed"] == "0" and d["random.nine.failed"] == "0" and d["random.tables"] == "10000"
    record(3, "nine stability/final-time equivalences, corpus plus 10000 random tables", ok,
           f"{d['nine.checked']} + {d['random.nine.checked']} checks")
    assert ok, d


@pytest.fixture(scope="module")
def closure():
    return run_suite("closure", "small", seed=0, count=10_000)


@pytest.mark.xfail(strict=True, reason=(
    "the union case fails for race-free and constant stability: f = {u: {const 0}} and "
    "g = {u: {const 1}} are both constantly stable but f union g is not even race-free"
))
def test_c04_closure_zero_violations(closure):
    v = int(closure["violations"])
    record(4, "closure cases and serial theorem, 10000 random pairs", v == 0,
           f"{v} violations, all in the union case" if v else "")
    assert v == 0, closure.get("first_violation")


def test_c04_closure_except_union(closure):
    bad = {k: v for k, v in closure.items() if k.endswith(".violation") and ".union." not in k}
    union = {k: v for k, v in closure.items() if k.endswith(".violation") and ".union." in k}
    assert int(closure["pairs"]) == 10_000
    assert not bad, bad
    # union stays sound for plain stability
    assert not any(".union.stable." in k for k in union)
    # the serial theorem was exercised for both asserted strengths
    assert int(closure.get("case.abs.serial.stable.holds", 0)) > 0
    assert int(closure.get("case.abs.serial.constant.holds", 0)) > 0


def test_c05_serial_racefree_counterexample():
    hit = serial_racefree_search()
    assert hit is not None
    h, f, _ = hit
    rf = StabilityFlavor.parse("abs:racefree")
    ok = check(h, rf).verdict and check(f, rf).verdict and not check(serial(h, f), rf).verdict
    fixed = (parse_system_file(FIX / "serial_racefree_h.sys"), parse_system_file(FIX / "serial_racefree_f.sys"))
    record(5, "exhaustive search finds race-free h, f with h o f not race-free", ok and fixed == (h, f))
    assert ok
    assert fixed == (h, f)


def test_c06_coincidence(sweep):
    rep = sweep["coincidence"]
    record(6, "F-relative constant equals absolute constant", rep["status"] == "clean",
           f"{rep['coincidence.checked']} tables")
    assert rep["status"] == "clean", rep


def test_c07_lim_determinism(sweep):
    rep = sweep["lim-determinism"]
    record(7, "race-free tables have singleton lim sets", rep["status"] == "clean", f"{rep['lim.checked']} race-free tables")
    assert rep["status"] == "clean", rep
    assert int(rep["lim.checked"]) > 0


def test_c08_final_value_dependence(sweep):
    rep = sweep["final-value-dependence"]
    record(8, "final values depend on the input up to the final time only", rep["status"] == "clean",
           f"{rep['dependence.checked']} tables meet the preconditions")
    assert rep["status"] == "clean", rep
    assert int(rep["dependence.checked"]) > 0


def test_c09_fundamental_mode(constructive):
    r = constructive
    fails = r["build_fail"] + r["replay_fail"] + r["member_fail"] + r["plan_fail"] + r["value_fail"]
    ok = len(r["systems"]) >= 10 and fails == 0 and r["plans"] > 0
    record(9, "fundamental-mode inputs and trajectory plans replay", ok,
           f"{len(r['systems'])} systems, {len(r['certs'])} certificates, {r['plans']} plans, {fails} failures")
    assert len(r["systems"]) >= 10
    assert fails == 0, r["first"]
    assert all(st.kind == "b" for _, _, cert in r["certs"] for st in cert.steps[1:])


def test_c10_composition(constructive):
    rep = composition_report(seed=0)
    ok = rep["status"] == "clean" and int(rep["chains"]) > 0
    record(10, "every certified 2-step chain composes", ok, f"{rep['chains']} chains")
    assert ok, rep


def _glitching(xs, lo, hi):
    # any coordinate switching twice on [lo, hi), straight from the event lists
    for x in xs:
        for i in range(x.width):
            prev, flips = x.left_limit(lo)[i], 0
            for t, v in x.events:
                if lo <= t < hi and v[i] != prev:
                    flips += 1
                if t < hi:
                    prev = v[i] if t >= lo else prev
            if flips > 1:
                return True
    return False


def test_c11_hazards():
    lib = library_examples()
    golden = (FIX / "hazards_golden.kv").read_text()
    assert format_kv(hazards_report(0)) == golden
    # re-derive both expectations from raw run enumeration
    glitch = lib["glitch_net"]
    f = glitch.table()
    u = f.inputs[1]
    lo, hi = settle_window(f, u)
    xs = runs(glitch.phi, glitch.init, u, glitch.policy)
    assert check(f, StabilityFlavor.parse("abs:stable")).verdict
    assert sync_like_a(f, u, lo, hi) is not None and _glitching(xs, lo, hi)
    g_ok = not is_hazard_free(f, u, lo, hi)
    latch = lib["sr_latch"]
    fl = latch.table()
    s_ok = True
    for v in fl.inputs[:2]:
        a, b = settle_window(fl, v)
        ys = runs(latch.phi, latch.init, v, latch.policy)
        assert not _glitching(ys, a, b)
        s_ok &= is_hazard_free(fl, v, a, b)
    record(11, "glitch_net stable but hazardous, sr_latch hold and set transfers hazard-free", g_ok and s_ok)
    assert g_ok and s_ok


def test_c12_determinism():
    reports = []
    for name in suite_names():
        kwargs = {"corpus": "tiny", "seed": 7}
        if name in ("closure", "nine-equivalences"):
            kwargs["count"] = 300
        a = format_kv(run_suite(name, **kwargs))
        b = format_kv(run_suite(name, **kwargs))
        reports.append((name, a == b))
    # the full-size closure run as well
    full = [format_kv(run_suite("closure", "small", seed=11, count=2000)) for _ in range(2)]
    ok = all(same for _, same in reports) and full[0] == full[1]
    record(12, "two runs of every suite with one seed are byte-identical", ok, f"{len(reports)} suites")
    assert ok, [n for n, same in reports if not same]
