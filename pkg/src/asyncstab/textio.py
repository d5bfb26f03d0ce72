"""Text formats: system files, generator files, truth tables, kv reports, VCD."""
from __future__ import annotations

import math
import re
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .errors import AsyncSysError, ParseError
from .generator import DelayPolicy, UpdateRule, generate
from .signal import BoolFn, Signal, coord_select, fmt_bits, parse_signal
from .system import SystemTable

_HEADER = re.compile(r"system\s+m=(\d+)\s+n=(\d+)\s*$")


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if line:
            yield no, line, raw.index(line[0]) + 1


def _keyword(line: str, no: int, col: int):
    kw, sep, rest = line.partition(":")
    if not sep:
        raise ParseError(f"expected 'input:' or 'state:', got {line!r}", no, col)
    kw = kw.strip()
    if kw not in ("input", "state"):
        raise ParseError(f"unknown keyword {kw!r}", no, col)
    return kw, rest.strip(), col + len(line) - len(line[len(kw) + 1:].lstrip())


def _sig(text: str, no: int, col: int, width: int, what: str) -> Signal:
    try:
        s = parse_signal(text, no)
    except ParseError as exc:
        c = None if exc.col is None else exc.col + col - 1
        raise ParseError(str(exc).split(": ", 1)[-1], no, c) from None
    if width is not None and s.width != width:
        raise ParseError(f"{what} has width {s.width}, expected {width}", no, col)
    return s


def parse_system_text(text: str) -> SystemTable:
    lines = list(_lines(text))
    if not lines:
        raise ParseError("empty system file", 1, 1)
    no, line, col = lines[0]
    if line.startswith("system"):
        m = _HEADER.match(line)
        if not m:
            raise ParseError("expected header 'system m=<int> n=<int>'", no, col)
        width_in, width_st = int(m.group(1)), int(m.group(2))
        if width_in < 1 or width_st < 1:
            raise ParseError("widths must be positive", no, col)
        body = lines[1:]
    else:
        # headerless file: widths come from the first input and state lines
        width_in = width_st = None
        body = lines
    entries, where = {}, {}
    cur, cur_line = None, None
    for no, line, col in body:
        if width_in is None or width_st is None:
            kw, rest, rcol = _keyword(line, no, col)
            w = _sig(rest, no, rcol, None, kw).width
            if kw == "input" and width_in is None:
                width_in = w
            elif kw == "state" and width_st is None:
                width_st = w
        kw, rest, rcol = _keyword(line, no, col)
        if kw == "input":
            if cur is not None and not entries[cur]:
                raise ParseError("input block has no state: lines", cur_line, 1)
            u = _sig(rest, no, rcol, width_in, "input")
            if u in entries:
                raise ParseError(f"duplicate input {u} (first given on line {where[u]})", no, rcol)
            entries[u], where[u] = set(), no
            cur, cur_line = u, no
        else:
            if cur is None:
                raise ParseError("state: line before any input:", no, col)
            entries[cur].add(_sig(rest, no, rcol, width_st, "state"))
    if cur is None:
        raise ParseError("system has no inputs", lines[0][0], 1)
    if width_st is None:
        raise ParseError("input block has no state: lines", cur_line, 1)
    if not entries[cur]:
        raise ParseError("input block has no state: lines", cur_line, 1)
    return SystemTable(width_in, width_st, entries)


def parse_system_file(path) -> SystemTable:
    return parse_system_text(Path(path).read_text())


def serialize_system(f: SystemTable) -> str:
    out = [f"system m={f.m} n={f.n}"]
    for u, xs in f.items():
        out.append(f"input: {u}")
        out += [f"  state: {x}" for x in xs]
    return "\n".join(out) + "\n"


def parse_boolfn_text(text: str) -> BoolFn:
    """Truth table: ``2^k`` rows of output bits in MSB-first input order."""
    rows = []
    for no, line, col in _lines(text):
        for tok in line.split():
            if tok.startswith("fn"):
                continue
            if any(c not in "01" for c in tok):
                raise ParseError(f"bad truth-table row {tok!r}", no, col)
            rows.append(tok)
    k = int(math.log2(len(rows))) if rows else -1
    if not rows or 2 ** k != len(rows):
        raise ParseError(f"truth table needs a power-of-two row count, got {len(rows)}", None)
    if len({len(r) for r in rows}) != 1:
        raise ParseError("truth-table rows differ in width", None)
    return BoolFn(k, len(rows[0]), tuple(rows))


def parse_boolfn_file(path) -> BoolFn:
    return parse_boolfn_text(Path(path).read_text())


class GeneratorSpec:
    """A parsed generator file: ``phi``, ``init``, policy and the listed inputs."""

    def __init__(self, phi: BoolFn, init, policy: DelayPolicy, inputs):
        self.phi = phi
        self.init = init
        self.policy = policy
        self.inputs = tuple(inputs)

    def table(self) -> SystemTable:
        return generate(self.phi, self.init, self.inputs, self.policy)


_GEN_KEYS = ("n", "m", "phi", "init", "grid", "steps", "rule")


def parse_generator_text(text: str) -> GeneratorSpec:
    """``gen n= m= phi= init= grid= steps= rule=`` then ``input:`` lines.

    ``phi`` lists ``2^(n+m)`` rows of ``n`` bits, comma separated or run
    together.
    """
    lines = list(_lines(text))
    if not lines or not lines[0][1].startswith("gen"):
        raise ParseError("expected header 'gen n=... m=... phi=...'", lines[0][0] if lines else 1, 1)
    no, line, col = lines[0]
    kv = {}
    for tok in line.split()[1:]:
        k, sep, v = tok.partition("=")
        if not sep or k not in _GEN_KEYS:
            raise ParseError(f"unexpected token {tok!r}", no, col + line.index(tok))
        kv[k] = v
    missing = [k for k in _GEN_KEYS if k not in kv]
    if missing:
        raise ParseError(f"missing {', '.join(missing)}", no, col)
    try:
        n, m, steps = int(kv["n"]), int(kv["m"]), int(kv["steps"])
        flat = kv["phi"].replace(",", "")
        if len(flat) != n * 2 ** (n + m):
            raise ValueError(f"phi needs {2 ** (n + m)} rows of {n} bits")
        phi = BoolFn(n + m, n, tuple(flat[i:i + n] for i in range(0, len(flat), n)))
        init = tuple(int(c) for c in kv["init"])
        if len(init) != n or any(c not in (0, 1) for c in init):
            raise ValueError(f"init must be {n} bits")
        grid = tuple(Fraction(t) for t in kv["grid"].split(","))
        policy = DelayPolicy(grid, steps, UpdateRule(kv["rule"]))
    except (ValueError, AsyncSysError) as exc:
        raise ParseError(str(exc), no, col) from None
    inputs = []
    for no, line, col in lines[1:]:
        kw, rest, rcol = _keyword(line, no, col)
        if kw != "input":
            raise ParseError("generator files list inputs only", no, col)
        inputs.append(_sig(rest, no, rcol, m, "input"))
    if not inputs:
        raise ParseError("generator file lists no inputs", no, 1)
    return GeneratorSpec(phi, init, policy, inputs)


def parse_generator_file(path) -> GeneratorSpec:
    return parse_generator_text(Path(path).read_text())


def format_kv(kv: dict) -> str:
    return "".join(f"{k}={kv[k]}\n" for k in sorted(kv))


def format_text(kv: dict, title: Optional[str] = None) -> str:
    keys = sorted(kv)
    pad = max((len(k) for k in keys), default=0)
    head = [title, "-" * len(title)] if title else []
    return "\n".join(head + [f"{k.ljust(pad)}  {kv[k]}" for k in keys]) + "\n"


def _vcd_id(i: int) -> str:
    chars = [chr(c) for c in range(33, 127)]
    out = ""
    while True:
        out = chars[i % len(chars)] + out
        i = i // len(chars) - 1
        if i < 0:
            return out


def write_vcd(named: list, horizon=None, split: bool = True) -> str:
    """VCD text for ``[(name, signal), ...]``.

    With ``split`` every coordinate gets its own scalar wire ``name[i]``,
    otherwise each signal is one vector wire. Times are scaled to integer
    ticks by the lcm of every denominator in the dump. Tails are unrolled up
    to ``horizon`` (default: two periods past the last listed event).
    """
    if split:
        named = [(f"{name}[{i}]" if s.width > 1 else name, coord_select(s, [i]) if s.width > 1 else s)
                 for name, s in named for i in range(s.width)]
    if horizon is None:
        ends = [s.periodic_from or Fraction(0) for _, s in named]
        spans = [2 * s.tail.period for _, s in named if s.tail is not None]
        horizon = max(ends, default=Fraction(0)) + max(spans, default=Fraction(1))
    horizon = Fraction(horizon)
    changes = []
    for idx, (_, s) in enumerate(named):
        changes += [(t, idx, v) for t, v in s.events_upto(horizon) if t >= 0]
    dens = [t.denominator for t, _, _ in changes] + [horizon.denominator]
    scale = math.lcm(*dens)
    out = [
        "$date reproducible $end",
        "$version asyncstab $end",
        f"$comment tick = 1/{scale} time unit; integer tick = rational time * {scale} $end",
        "$timescale 1 s $end",
        "$scope module top $end",
    ]
    ids = []
    for i, (name, s) in enumerate(named):
        ids.append(_vcd_id(i))
        out.append(f"$var wire {s.width} {ids[i]} {name} $end")
    out += ["$upscope $end", "$enddefinitions $end"]

    def val(idx, bits):
        if len(bits) == 1:
            return f"{bits[0]}{ids[idx]}"
        return f"b{fmt_bits(bits)} {ids[idx]}"

    out.append("#0")
    out.append("$dumpvars")
    out += [val(i, s(0)) for i, (_, s) in enumerate(named)]
    out.append("$end")
    last = Fraction(0)
    for t in sorted({t for t, _, _ in changes if t > 0}):
        out.append(f"#{int(t * scale)}")
        out += [val(i, v) for tt, i, v in changes if tt == t]
        last = t
    if horizon > last:
        out.append(f"#{int(horizon * scale)}")
    return "\n".join(out) + "\n"
