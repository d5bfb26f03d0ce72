import pytest
from hypothesis import given, strategies as st

from asyncstab.generator import (
    DelayPolicy,
    GeneratorSystem,
    UpdateRule,
    c_element_phi,
    generate,
    glitch_phi,
    library_examples,
    race_phi,
    runs,
    sr_latch_phi,
)
from asyncstab.oracle import formulas
from asyncstab.signal import BoolFn, Signal
from asyncstab.stability import StabilityFlavor, check
from asyncstab.system import is_initialized, is_non_anticipatory, sigma
from asyncstab.transitions import SigmaClosure, is_hazard_free, settle_window

from conftest import const, sig

GRID = DelayPolicy(range(1, 9), 4)


def test_identity_dynamics():
    phi = BoolFn.from_function(2, 1, lambda b: (b[0],))
    for u in (sig("sig 1 init=0"), sig("sig 1 init=0 @1=1 @3=0")):
        assert runs(phi, (1,), u, GRID) == {const("1")}


def test_latch_set_hold():
    u = sig("sig 2 init=00 @1=10")
    xs = runs(sr_latch_phi(), (0,), u, GRID)
    assert xs and all(x.final_value == (1,) for x in xs)
    f = generate(sr_latch_phi(), (0,), [u], GRID)
    assert check(f, StabilityFlavor.parse("abs:racefree")).verdict


def test_two_excited_coordinates():
    u = sig("sig 1 init=0 @1=1")
    xs = runs(race_phi(), (0, 0), u, DelayPolicy(range(1, 9), 1))
    firsts = {x.events[0][1] for x in xs if x.events}
    assert firsts == {(1, 0), (0, 1), (1, 1)}
    finals = {x.final_value for x in xs}
    assert {(1, 0), (0, 1)} <= finals


@given(st.sampled_from([sr_latch_phi, c_element_phi, glitch_phi, race_phi]),
       st.lists(st.tuples(st.integers(1, 6), st.integers(0, 1)), max_size=3),
       st.integers(1, 4))
def test_generated_invariants(phi_fn, evs, steps):
    phi = phi_fn()
    n = phi.out_width
    m = phi.in_width - n
    evs = sorted(dict(evs).items())
    u = Signal((0,) * m, tuple((t, (v,) * m) for t, v in evs))
    init = (0,) * n
    tables = {}
    for rule in UpdateRule:
        tables[rule] = generate(phi, init, [u, Signal((0,) * m)], DelayPolicy(range(1, 12), steps, rule))
    for f in tables.values():
        assert is_non_anticipatory(f)
        assert formulas.non_anticipatory_formula(f)
        assert is_initialized(f) == init
        assert all(len(f[v]) >= 1 for v in f)
    single, anyset = tables[UpdateRule.SINGLE_COORDINATE], tables[UpdateRule.ANY_SUBSET]
    assert all(single[v] <= anyset[v] for v in single)


def test_grid_must_cover_input_events():
    with pytest.raises(ValueError):
        generate(sr_latch_phi(), (0,), [sig("sig 2 init=00 @3/2=10")], GRID)


class TestLibrary:
    @pytest.mark.parametrize("name", sorted(library_examples()))
    def test_expected_verdicts(self, name):
        ex = library_examples()[name]
        f = ex.table()
        for key, want in ex.expected.items():
            if key == "non_anticipatory":
                assert is_non_anticipatory(f) == want
            else:
                assert check(f, StabilityFlavor.parse(key)).verdict == want, key

    def test_sr_latch_hold_inputs_race_free(self):
        f = library_examples()["sr_latch"].table()
        assert all(len(sigma(f, u)) == 1 for u in f)

    def test_glitch_net_hazard(self):
        f = library_examples()["glitch_net"].table()
        u = f.inputs[1]
        assert check(f, StabilityFlavor.parse("abs:stable")).verdict
        assert not is_hazard_free(f, u, *settle_window(f, u))

    def test_two_limit_race(self):
        f = library_examples()["two_limit_race"].table()
        assert len(sigma(f, f.inputs[1])) >= 2


class TestGeneratorSystem:
    def test_lazy_states_match_generate(self):
        basis = SigmaClosure([const("00"), const("10"), const("01")])
        g = GeneratorSystem(sr_latch_phi(), (0,), basis, max_steps=3)
        u = sig("sig 2 init=00 @2=10 @4=01")
        assert u in g
        pol = g.policy_for(u)
        assert g[u] == runs(sr_latch_phi(), (0,), u, pol)

    def test_membership(self):
        g = GeneratorSystem(sr_latch_phi(), (0,), SigmaClosure([const("00"), const("10")]))
        assert sig("sig 2 init=00 @1=10 @2=00") in g
        assert sig("sig 2 init=00 @1=01") not in g
        assert sig("sig 2 init=00 @3/2=10") not in g
