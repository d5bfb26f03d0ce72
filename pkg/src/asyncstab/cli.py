"""Command-line front end.

Exit status: 0 when every verdict is true or the suite is clean, 1 when a
verdict is false or a counterexample was found, 2 on usage or input errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import system as sysops
from .errors import AsyncSysError, PreconditionError
from .generator import GeneratorSystem, library_examples
from .signal import Signal, as_bits, fmt_bits, parse_signal
from .stability import StabilityFlavor, all_flavors, check, lim_system
from .system import SystemTable
from .textio import (
    GeneratorSpec,
    format_kv,
    format_text,
    parse_boolfn_file,
    parse_generator_text,
    parse_system_text,
    serialize_system,
    write_vcd,
)
from .transitions import (
    SigmaClosure,
    build_fundamental_input,
    certify_a,
    certify_b,
    check_controllability,
    fundamental_mode,
    is_hazard_free,
    plan_trajectory,
    settle_window,
)

OK, FLAGGED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load(path: str):
    """A SystemTable, or a GeneratorSpec for files with a ``gen`` header."""
    if path.startswith("example:"):
        lib = library_examples()
        name = path[len("example:"):]
        if name not in lib:
            raise UsageError(f"unknown example {name!r}; known: {', '.join(sorted(lib))}")
        return lib[name].table()
    text = Path(path).read_text()
    first = next((ln.split("#", 1)[0].strip() for ln in text.splitlines() if ln.split("#", 1)[0].strip()), "")
    if first.startswith("gen"):
        return parse_generator_text(text)
    return parse_system_text(text)


def _table(path: str) -> SystemTable:
    f = _load(path)
    return f.table() if isinstance(f, GeneratorSpec) else f


def _dynamic(path: str):
    """Generator files become lazily generated systems over the closure of their inputs."""
    f = _load(path)
    if isinstance(f, GeneratorSpec):
        step = f.policy.grid[0]
        return GeneratorSystem(f.phi, f.init, SigmaClosure(f.inputs), step=step,
                               max_steps=f.policy.max_steps, update_rule=f.policy.update_rule)
    return f


def _pick_input(f, ref: str) -> Signal:
    if ref.startswith("sig"):
        return parse_signal(ref)
    try:
        return f.inputs[int(ref)]
    except (ValueError, IndexError):
        raise UsageError(f"--input takes an index below {len(f.inputs)} or a signal literal, got {ref!r}") from None


def _emit(args, blocks) -> None:
    """Write ``[(title, kv), ...]`` in the chosen format."""
    if args.format == "vcd":
        raise UsageError("--format vcd only applies to the waves command")
    fmt = format_kv if args.format == "kv" else None
    parts = [fmt(kv) if fmt else format_text(kv, title) for title, kv in blocks]
    _write(args, "\n".join(parts))


def _write(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    f = _table(args.system)
    F = parse_boolfn_file(args.F) if args.F else None
    if args.flavor:
        flavors = [StabilityFlavor.parse(s, F) for s in args.flavor]
    else:
        flavors = all_flavors(F)
    blocks, ok = [], True
    for fl in flavors:
        r = check(f, fl, left=args.left)
        ok &= r.verdict
        blocks.append((f"check {fl}", r.to_kv()))
    lim = {}
    try:
        for i, (u, xs) in enumerate(lim_system(f).items()):
            lim[f"lim.{i:03d}.u"] = str(u)
            lim[f"lim.{i:03d}.values"] = ",".join(fmt_bits(x.initial) for x in xs)
            lim[f"lim.{i:03d}.size"] = str(len(xs))
    except AsyncSysError as exc:
        lim["lim"] = f"undefined: {exc}"
    blocks.append(("lim f", lim))
    _emit(args, blocks)
    return OK if ok else FLAGGED


OPS = {
    "dual": (1, sysops.dual),
    "intersect": (2, sysops.intersect),
    "union": (2, sysops.union),
    "parallel": (2, sysops.parallel),
    "serial": (2, sysops.serial),
    "lim": (1, lim_system),
}
PREDICATES = {
    "subsystem": (2, sysops.is_subsystem),
    "non-anticipatory": (1, sysops.is_non_anticipatory),
    "initialized": (1, lambda f: sysops.is_initialized(f) is not None),
}


def cmd_ops(args) -> int:
    arity, fn = OPS.get(args.op) or PREDICATES[args.op]
    if len(args.systems) != arity:
        raise UsageError(f"{args.op} takes {arity} system file(s), got {len(args.systems)}")
    tables = [_table(p) for p in args.systems]
    if args.op in PREDICATES:
        verdict = bool(fn(*tables))
        _emit(args, [(args.op, {"op": args.op, "verdict": str(verdict).lower()})])
        return OK if verdict else FLAGGED
    _write(args, serialize_system(fn(*tables)))
    return OK


def cmd_generate(args) -> int:
    g = _load(args.generator)
    if not isinstance(g, GeneratorSpec):
        raise UsageError(f"{args.generator} is not a generator file")
    _write(args, serialize_system(g.table()))
    return OK


def _step_kv(step, prefix="step") -> dict:
    kv = {f"{prefix}.kind": step.kind, f"{prefix}.t": str(step.lo), f"{prefix}.t2": str(step.hi),
          f"{prefix}.w": fmt_bits(step.w), f"{prefix}.w2": fmt_bits(step.w2), f"{prefix}.u": str(step.u)}
    if step.v is not None:
        kv[f"{prefix}.v"] = str(step.v)
    return kv


def cmd_transitions(args) -> int:
    try:
        return _transitions(args)
    except PreconditionError as exc:
        _emit(args, [(args.kind, {"transition": args.kind, "verdict": "false", "precondition": str(exc)})])
        return FLAGGED


def _transitions(args) -> int:
    f = _dynamic(args.system)
    kind = args.kind
    kv = {"transition": kind}
    if kind == "sync-like":
        if args.t0 is None or args.tf is None:
            raise UsageError("sync-like needs --t0 and --tf")
        u = _pick_input(f, args.input)
        if args.to is None:
            st = certify_a(f, u, args.t0, args.tf)
        else:
            st = certify_b(f, u, _pick_input(f, args.to), args.t0, args.tf)
        kv["verdict"] = str(st is not None).lower()
        if st is not None:
            kv.update(_step_kv(st))
        _emit(args, [(kind, kv)])
        return OK if st is not None else FLAGGED
    if kind == "fundamental":
        if args.sequence:
            seq = [_pick_input(f, r) for r in args.sequence.split(",")]
            u, cuts, cert = build_fundamental_input(f, seq)
            kv["splice.cuts"] = ",".join(str(t) for t in cuts)
        else:
            u = _pick_input(f, args.input)
            cert = fundamental_mode(f, u)
        kv["input"] = str(u)
        kv["verdict"] = str(cert is not None).lower()
        if cert is not None:
            kv.update(cert.to_kv())
            kv["cert.replay"] = str(cert.replay(f)).lower()
        _emit(args, [(kind, kv)])
        return OK if cert is not None else FLAGGED
    if kind == "hazard":
        u = _pick_input(f, args.input)
        t0, tf = settle_window(f, u)
        t0 = t0 if args.t0 is None else args.t0
        tf = tf if args.tf is None else args.tf
        prev = None if args.to is None else _pick_input(f, args.to)
        ok = is_hazard_free(f, u, t0, tf, prev)
        kv.update({"input": str(u), "window": f"{t0},{tf}", "hazard_free": str(ok).lower()})
        _emit(args, [(kind, kv)])
        return OK if ok else FLAGGED
    if kind == "controllability":
        ctl = check_controllability(f)
        kv.update(ctl.to_kv())
        _emit(args, [(kind, kv)])
        return OK if ctl.c1 and ctl.c2 else FLAGGED
    if kind == "plan":
        if not args.targets:
            raise UsageError("plan needs --targets w0,w1,...")
        targets = [as_bits(w) for w in args.targets.split(",")]
        u, cuts, cert = plan_trajectory(f, targets)
        kv.update({"input": str(u), "cuts": ",".join(str(t) for t in cuts)})
        kv.update(cert.to_kv())
        _emit(args, [(kind, kv)])
        return OK
    raise UsageError(f"unknown transition command {kind!r}")


def cmd_oracle(args) -> int:
    from .oracle.suites import run_suite, suite_failed, suite_names

    name = args.suite
    if name.startswith("sec5-"):
        name = name[len("sec5-"):]
    if name not in suite_names():
        raise UsageError(f"unknown suite {args.suite!r}; known: {', '.join(suite_names())}")
    rep = run_suite(name, args.corpus, args.seed, args.count)
    _emit(args, [(f"oracle {name}", rep)])
    return FLAGGED if suite_failed(rep) else OK


def cmd_waves(args) -> int:
    named = []
    if args.system:
        f = _table(args.system)
        picks = [_pick_input(f, r) for r in args.input] if args.input else list(f.inputs)
        for i, u in enumerate(picks):
            tag = "" if len(picks) == 1 else str(i)
            named.append((f"u{tag}", u))
            named += [(f"x{tag}_{j}", x) for j, x in enumerate(f.states(u))]
    named += [(f"s{i}", parse_signal(lit)) for i, lit in enumerate(args.signal or ())]
    if not named:
        raise UsageError("waves needs a system file or --signal")
    if args.format not in ("vcd", None):
        raise UsageError("waves only writes --format vcd")
    _write(args, write_vcd(named, args.horizon, split=not args.vector))
    return OK


def _common(p, formats=("text", "kv"), default="text"):
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("--out", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="asyncstab", description="Stability and transition checks for asynchronous systems.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run stability checks on a system")
    p.add_argument("system", help="system or generator file, or example:<name>")
    p.add_argument("--flavor", action="append", help="<abs|rel|frel>:<stable|racefree|constant>; repeatable")
    p.add_argument("--F", help="truth-table file for F-relative flavors")
    p.add_argument("--left", action="store_true", help="report x(t-0)=w witnesses")
    _common(p)
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("ops", help="apply a system operation")
    p.add_argument("op", choices=sorted(OPS) + sorted(PREDICATES))
    p.add_argument("systems", nargs="+")
    _common(p)
    p.set_defaults(run=cmd_ops)

    p = sub.add_parser("generate", help="expand a generator file to a system file")
    p.add_argument("generator")
    p.add_argument("--out")
    p.set_defaults(run=cmd_generate)

    p = sub.add_parser("transitions", help="transition constructions")
    p.add_argument("kind", choices=["sync-like", "fundamental", "hazard", "controllability", "plan"])
    p.add_argument("system")
    p.add_argument("--input", default="0", help="input index or signal literal")
    p.add_argument("--to", help="second input for a handover")
    p.add_argument("--t0", type=_time)
    p.add_argument("--tf", type=_time)
    p.add_argument("--sequence", help="comma-separated input indices to splice")
    p.add_argument("--targets", help="comma-separated target values, starting at the initial state")
    _common(p)
    p.set_defaults(run=cmd_transitions)

    p = sub.add_parser("oracle", help="run a theorem suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--corpus", default="small")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, help="sample count for sampled suites")
    _common(p)
    p.set_defaults(run=cmd_oracle)

    p = sub.add_parser("waves", help="dump signals as VCD")
    p.add_argument("system", nargs="?")
    p.add_argument("--input", action="append", help="input index or literal; repeatable")
    p.add_argument("--signal", action="append", help="extra signal literal; repeatable")
    p.add_argument("--horizon", type=_time)
    p.add_argument("--vector", action="store_true", help="one vector wire per signal")
    _common(p, formats=("vcd",), default="vcd")
    p.set_defaults(run=cmd_waves)
    return ap


def _time(text: str):
    from fractions import Fraction

    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad time {text!r}") from None


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.run(args)
    except (UsageError, AsyncSysError, OSError, ValueError, KeyError) as exc:
        print(f"asyncstab: error: {exc}", file=sys.stderr)
        return USAGE


run = main


if __name__ == "__main__":
    sys.exit(main())
