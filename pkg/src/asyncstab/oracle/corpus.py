"""Small-instance system generators: exhaustive enumeration and seeded sampling."""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from ..errors import BudgetExceeded
from ..signal import Signal, all_bits, as_time
from ..system import SystemTable

DEFAULT_BUDGET = 10 ** 6


@dataclass(frozen=True)
class CorpusSpec:
    m: int = 1
    n: int = 1
    max_inputs: int = 2
    max_states: int = 2
    time_grid: tuple = (1, 2)
    allow_tails: bool = True
    seed: int = 0
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "time_grid", tuple(sorted(as_time(t) for t in self.time_grid)))


# Named corpora used by the CLI and the acceptance suite.
CORPORA = {
    "tiny": CorpusSpec(1, 1, 1, 1, (1,), False),
    "small": CorpusSpec(1, 1, 2, 2, (1, 2), True),
    "wide": CorpusSpec(2, 2, 3, 3, (1, 2, 3), True),
}


def signal_alphabet(width: int, grid, allow_tails: bool) -> list:
    """All signals switching only on ``grid``, plus one 2-phase oscillator per initial value.

    The oscillator with initial value ``a`` holds ``a`` until 1/2 and then
    alternates between the complement of ``a`` and ``a`` every half unit.
    """
    grid = sorted(as_time(t) for t in grid)
    out = set()
    for init in all_bits(width):
        for vals in itertools.product(all_bits(width), repeat=len(grid)):
            out.add(Signal(init, tuple(zip(grid, vals))))
        if allow_tails:
            flip = tuple(1 - b for b in init)
            out.add(Signal(init, (), (1, ((Fraction(0), init), (Fraction(1, 2), flip)))))
    return sorted(out, key=lambda s: s.sort_key)


def _subsets(items, max_size):
    for k in range(1, max_size + 1):
        yield from itertools.combinations(items, k)


def corpus_size(spec: CorpusSpec) -> int:
    a_in = len(signal_alphabet(spec.m, spec.time_grid, spec.allow_tails))
    a_st = len(signal_alphabet(spec.n, spec.time_grid, spec.allow_tails))
    state_sets = sum(math.comb(a_st, k) for k in range(1, spec.max_states + 1))
    return sum(math.comb(a_in, k) * state_sets ** k for k in range(1, spec.max_inputs + 1))


def enumerate_systems(spec: CorpusSpec) -> Iterator[SystemTable]:
    """Every table within the bounds, in a fixed order; the seed is ignored."""
    size = corpus_size(spec)
    if size > spec.budget:
        raise BudgetExceeded(f"corpus has {size} tables, budget is {spec.budget}")
    ins = signal_alphabet(spec.m, spec.time_grid, spec.allow_tails)
    sts = signal_alphabet(spec.n, spec.time_grid, spec.allow_tails)
    state_sets = list(_subsets(sts, spec.max_states))
    for inputs in _subsets(ins, spec.max_inputs):
        for choice in itertools.product(state_sets, repeat=len(inputs)):
            yield SystemTable(spec.m, spec.n, dict(zip(inputs, choice)))


def random_signal(rng: random.Random, width: int, grid, allow_tails: bool = True) -> Signal:
    grid = sorted(as_time(t) for t in grid)
    init = tuple(rng.randint(0, 1) for _ in range(width))
    events = tuple((t, tuple(rng.randint(0, 1) for _ in range(width))) for t in grid if rng.random() < 0.5)
    tail = None
    if allow_tails and rng.random() < 0.2:
        period = rng.choice((Fraction(1), Fraction(2), Fraction(1, 2)))
        a = tuple(rng.randint(0, 1) for _ in range(width))
        b = tuple(rng.randint(0, 1) for _ in range(width))
        tail = (period, ((Fraction(0), a), (period / 2, b)))
    return Signal(init, events, tail)


def random_system(spec: CorpusSpec, rng: Optional[random.Random] = None) -> SystemTable:
    """A random table within the bounds; reproducible from ``spec.seed`` when no rng is given."""
    rng = rng or random.Random(spec.seed)
    k = rng.randint(1, spec.max_inputs)
    inputs = set()
    while len(inputs) < k:
        inputs.add(random_signal(rng, spec.m, spec.time_grid, spec.allow_tails))
    entries = {}
    for u in sorted(inputs, key=lambda s: s.sort_key):
        j = rng.randint(1, spec.max_states)
        entries[u] = {random_signal(rng, spec.n, spec.time_grid, spec.allow_tails) for _ in range(j)}
    return SystemTable(spec.m, spec.n, entries)


def random_systems(spec: CorpusSpec, count: int) -> Iterator[SystemTable]:
    rng = random.Random(spec.seed)
    for _ in range(count):
        yield random_system(spec, rng)
