import random

import pytest

from asyncstab.errors import BudgetExceeded
from asyncstab.oracle import formulas
from asyncstab.oracle.corpus import CORPORA, CorpusSpec, corpus_size, enumerate_systems, random_system, signal_alphabet
from asyncstab.oracle.suites import corpus_sweep, run_suite, suite_failed, suite_names
from asyncstab.stability import StabilityFlavor, check


class TestCorpus:
    def test_single_point_grid_count(self):
        # 4 distinct canonical signals (two constants, two single switches), one input and one state each
        spec = CorpusSpec(1, 1, 1, 1, (1,), False)
        tables = list(enumerate_systems(spec))
        assert len(tables) == corpus_size(spec) == 16
        assert len(set(tables)) == 16

    def test_empty_grid(self):
        spec = CorpusSpec(1, 1, 1, 1, (), False)
        assert all(x.is_constant for f in enumerate_systems(spec) for x in f.signals())

    def test_seed_ignored(self):
        a = CorpusSpec(1, 1, 2, 1, (1,), False, seed=1)
        b = CorpusSpec(1, 1, 2, 1, (1,), False, seed=99)
        assert list(enumerate_systems(a)) == list(enumerate_systems(b))

    def test_small_corpus_size(self):
        assert corpus_size(CORPORA["small"]) == 136_675

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            next(enumerate_systems(CorpusSpec(2, 2, 3, 3, (1, 2, 3), True, budget=1000)))

    def test_random_reproducible(self):
        spec = CORPORA["wide"]
        assert random_system(spec) == random_system(spec)
        assert random_system(spec, random.Random(5)) == random_system(spec, random.Random(5))

    def test_alphabet_oscillators(self):
        assert sum(1 for s in signal_alphabet(1, (1,), True) if s.tail is not None) == 2


class TestReplay:
    def test_accepted_replays(self):
        for f in list(enumerate_systems(CORPORA["tiny"])):
            for fl in ("abs:stable", "abs:racefree", "abs:constant"):
                r = check(f, StabilityFlavor.parse(fl))
                if r.verdict:
                    assert formulas.replay(r.flavor.formula_id, f, r.witnesses)

    def test_unknown_formula(self):
        f = next(enumerate_systems(CORPORA["tiny"]))
        with pytest.raises(formulas.UnknownFormula):
            formulas.evaluate("abs-wobbly", f)


class TestSuites:
    def test_names(self):
        assert {"nine-equivalences", "closure", "hazards", "fundamental-mode"} <= set(suite_names())

    def test_sweep_tiny(self):
        rep = corpus_sweep("tiny")
        assert all(r["status"] == "clean" for r in rep.values())

    def test_closure_small_sample(self):
        rep = run_suite("closure", "small", seed=3, count=50)
        # only the union cases may be violated
        bad = [k for k, v in rep.items() if k.endswith(".violation") and v != "0" and ".union." not in k]
        assert not bad

    def test_failed_flag(self):
        assert suite_failed({"status": "violated"}) and suite_failed({"status": "counterexample"})
        assert not suite_failed({"status": "clean"})
