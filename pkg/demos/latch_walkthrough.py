"""A set/reset latch from generator function to trajectory plan.

Run with ``python demos/latch_walkthrough.py``.
"""
from asyncstab.generator import GeneratorSystem, library_examples, sr_latch_phi
from asyncstab.signal import Signal
from asyncstab.stability import all_flavors, check
from asyncstab.textio import serialize_system, write_vcd
from asyncstab.transitions import SigmaClosure, check_controllability, plan_trajectory

ex = library_examples()["sr_latch"]
f = ex.table()
print("generated table:")
print(serialize_system(f))

for fl in all_flavors():
    r = check(f, fl)
    print(f"{str(fl):14s} verdict={r.verdict}")

# the latch over held input levels; splices of levels are admissible inputs
levels = SigmaClosure([Signal((0, 0)), Signal((1, 0)), Signal((0, 1))])
g = GeneratorSystem(sr_latch_phi(), (0,), levels, max_steps=3)
ctl = check_controllability(g)
print(f"\ncontrollable: reach every value={ctl.c1}, retarget from every settled state={ctl.c2}")

u, cuts, cert = plan_trajectory(g, [(0,), (1,), (0,), (1,)])
print(f"plan input: {u}")
print(f"cut times:  {[str(t) for t in cuts]}")
for x in g.states(u):
    print(f"  run {x}: values at cuts {[x.left_limit(t)[0] for t in cuts]}")
print(f"certificate replays: {cert.replay(g)}")

print("\nVCD of the plan input and its first run:")
print(write_vcd([("u", u), ("x", g.states(u)[0])]))
