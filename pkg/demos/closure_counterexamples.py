"""Two closure properties that fail, shown on concrete tables.

1. Union: two constantly stable systems with different constants.
2. Serial connection of race-free systems, found by exhaustive search.
"""
from asyncstab.oracle.suites import serial_racefree_search
from asyncstab.signal import Signal
from asyncstab.stability import StabilityFlavor, check, closure_suite
from asyncstab.system import SystemTable, serial, union
from asyncstab.textio import serialize_system

u = Signal((0,))
f = SystemTable(1, 1, {u: {Signal((0,))}})
g = SystemTable(1, 1, {u: {Signal((1,))}})
const = StabilityFlavor.parse("abs:constant")
rf = StabilityFlavor.parse("abs:racefree")
print("f constantly stable:", check(f, const).verdict)
print("g constantly stable:", check(g, const).verdict)
print("f union g race-free:", check(union(f, g), rf).verdict)
for case in closure_suite(f, g=g, strict=False).violations:
    print(f"  violated: {case.construction} / {case.strength}")

h, f, visited = serial_racefree_search()
print(f"\nserial search hit after {visited} candidate pairs")
print("f:\n" + serialize_system(f))
print("h:\n" + serialize_system(h))
print("h o f:\n" + serialize_system(serial(h, f)))
print("h race-free:", check(h, rf).verdict, " f race-free:", check(f, rf).verdict,
      " h o f race-free:", check(serial(h, f), rf).verdict)
