import pytest
from hypothesis import given, strategies as st

from asyncstab.errors import EmptyDomain, EmptyValueSet, SideConditionError
from asyncstab.generator import DelayPolicy, generate, sr_latch_phi
from asyncstab.oracle import formulas
from asyncstab.signal import coord_select
from asyncstab.system import (
    SystemTable,
    check_non_anticipatory,
    classify_final_time,
    classify_initial_time,
    dual,
    equilibrium_points,
    intersect,
    is_initialized,
    is_non_anticipatory,
    is_subsystem,
    parallel,
    serial,
    sigma,
    union,
)

from conftest import const, sig, signals

OSC = sig("sig 1 init=0 period=1 {@0=0 @1/2=1}")


def table(entries, m=1, n=1):
    return SystemTable(m, n, {sig(u) if isinstance(u, str) else u: {sig(x) if isinstance(x, str) else x for x in xs}
                              for u, xs in entries.items()})


@st.composite
def systems(draw, m=1, n=1):
    us = draw(st.lists(signals(m), min_size=1, max_size=3, unique=True))
    return SystemTable(m, n, {u: set(draw(st.lists(signals(n), min_size=1, max_size=3))) for u in us})


F = table({"sig 1 init=0": ["sig 1 init=0", "sig 1 init=0 @1=1"], "sig 1 init=0 @2=1": ["sig 1 init=1"]})


class TestSubsystem:
    def test_reflexive(self):
        assert is_subsystem(F, F)

    def test_state_removed(self):
        g = table({"sig 1 init=0": ["sig 1 init=0"]})
        assert is_subsystem(g, F)

    def test_foreign_input(self):
        g = table({"sig 1 init=1": ["sig 1 init=0"]})
        assert not is_subsystem(g, F)


class TestDual:
    @given(systems(n=2))
    def test_involution(self, f):
        assert dual(dual(f)) == f

    def test_single_entry(self):
        assert dual(table({"sig 1 init=0": ["sig 1 init=1"]})) == table({"sig 1 init=1": ["sig 1 init=0"]})

    @given(systems())
    def test_bijection(self, f):
        d = dual(f)
        assert len(d) == len(f)
        assert sorted(len(xs) for _, xs in d.items()) == sorted(len(xs) for _, xs in f.items())


class TestIntersectUnion:
    @given(systems())
    def test_idempotent(self, f):
        assert intersect(f, f) == f
        assert union(f, f) == f

    def test_disjoint_domains(self):
        g = table({"sig 1 init=1": ["sig 1 init=0"]})
        with pytest.raises(EmptyDomain, match="empty domain"):
            intersect(F, g)
        u = union(F, g)
        assert set(u.inputs) == set(F.inputs) | set(g.inputs)

    def test_empty_value_set(self):
        g = table({"sig 1 init=0": ["sig 1 init=1"]})
        with pytest.raises(EmptyValueSet, match="empty value set at"):
            intersect(F, g)

    def test_union_overlap(self):
        g = table({"sig 1 init=0": ["sig 1 init=1"]})
        u0 = sig("sig 1 init=0")
        assert union(F, g)[u0] == F[u0] | g[u0]


class TestParallel:
    @given(systems(), systems())
    def test_product_size(self, f, g):
        common = [u for u in f if u in g]
        if not common:
            return
        p = parallel(f, g)
        for u in common:
            assert len(p[u]) == len(f[u]) * len(g[u])

    def test_projection(self):
        g = table({u: ["sig 1 init=1"] for u in ("sig 1 init=0", "sig 1 init=0 @2=1")})
        p = parallel(F, g)
        for u in F:
            assert {coord_select(z, [0]) for z in p[u]} == F[u]

    def test_pairs(self):
        a, b, c = sig("sig 1 init=0"), sig("sig 1 init=0 @1=1"), sig("sig 1 init=1 @3=0")
        u = sig("sig 1 init=0")
        p = parallel(SystemTable(1, 1, {u: {a, b}}), SystemTable(1, 1, {u: {c}}))
        assert p[u] == {sig("sig 2 init=01 @3=00"), sig("sig 2 init=01 @1=11 @3=10")}


class TestSerial:
    def test_identity(self):
        xs = F.all_states()
        h = SystemTable(1, 1, {x: {x} for x in xs})
        assert serial(h, F) == F

    def test_side_condition(self):
        h = SystemTable(1, 1, {sig("sig 1 init=0"): {sig("sig 1 init=0")}})
        with pytest.raises(SideConditionError):
            serial(h, F)

    def test_chained(self):
        x1, x2, y = sig("sig 1 init=0"), sig("sig 1 init=1"), sig("sig 1 init=0 @4=1")
        u = sig("sig 1 init=0")
        f = SystemTable(1, 1, {u: {x1, x2}})
        h = SystemTable(1, 1, {x1: {y}})
        assert serial(h, f)[u] == {y}


class TestNonAnticipation:
    def test_single_input(self):
        assert is_non_anticipatory(table({"sig 1 init=0 @1=1": ["sig 1 init=1", "sig 1 init=0"]}))

    def test_witness(self):
        # inputs agree on (-inf, 5); states differ at 2 < 5
        f = table({"sig 1 init=0": ["sig 1 init=0"], "sig 1 init=0 @5=1": ["sig 1 init=0 @2=1"]})
        ok, cex = check_non_anticipatory(f)
        assert not ok and cex[2] == 5
        assert not formulas.non_anticipatory_formula(f)

    def test_generated(self):
        inputs = [sig("sig 2 init=00"), sig("sig 2 init=00 @1=10"), sig("sig 2 init=00 @1=10 @2=00 @3=01")]
        f = generate(sr_latch_phi(), (0,), inputs, DelayPolicy(range(1, 8), 3))
        assert is_non_anticipatory(f)
        assert formulas.non_anticipatory_formula(f)

    @given(systems())
    def test_agrees_with_formula(self, f):
        assert is_non_anticipatory(f) == formulas.non_anticipatory_formula(f)


class TestInitialized:
    def test_common_initial(self):
        f = table({"sig 1 init=0": ["sig 2 init=00", "sig 2 init=00 @1=11"]}, n=2)
        assert is_initialized(f) == (0, 0)

    def test_different(self):
        assert is_initialized(F) is None

    @given(systems())
    def test_agrees_with_formula(self, f):
        assert (is_initialized(f) is not None) == formulas.initialized_formula(f)


class TestTimeFlavors:
    @given(systems())
    def test_finite_tables_have_fix_final_time(self, f):
        ft = classify_final_time(f)
        assert ft.kind == "fix"
        for kind in ("fix", "bounded", "unbounded"):
            assert formulas.final_time_formula(f, kind)
            assert formulas.replay(f"final-{kind}", f, ft)

    @given(systems())
    def test_initial_time_replays(self, f):
        it = classify_initial_time(f)
        for kind in ("fix", "bounded", "unbounded"):
            assert formulas.replay(f"initial-{kind}", f, it)

    def test_all_constant(self):
        f = table({"sig 1 init=0": ["sig 1 init=1"]})
        assert classify_final_time(f).any_witness
        assert classify_initial_time(f).any_witness


class TestSigma:
    def test_values(self):
        u = sig("sig 1 init=0")
        assert sigma(SystemTable(1, 1, {u: {const("1")}}), u) == {(1,)}
        assert sigma(SystemTable(1, 1, {u: {OSC}}), u) == frozenset()
        mixed = SystemTable(1, 1, {u: {const("0"), sig("sig 1 init=0 @2=1"), OSC}})
        assert sigma(mixed, u) == {(0,), (1,)}

    def test_equilibria(self):
        assert equilibrium_points(table({"sig 1 init=0": ["sig 1 init=1"]})) == {(1,)}
        assert equilibrium_points(table({"sig 1 init=0": ["sig 1 init=0 @1=1"]})) == frozenset()
        f = table({"sig 1 init=0": ["sig 2 init=01"], "sig 1 init=1": ["sig 2 init=10"]}, n=2)
        assert equilibrium_points(f) == {(0, 1), (1, 0)}
