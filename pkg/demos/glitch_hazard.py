"""A net that settles but may glitch on the way.

``x2 = not x1 and u``: when ``u`` rises, ``x2`` may rise before ``x1`` catches
up and then fall again. Every run settles, so the system is stable, yet the
transfer is not hazard-free.
"""
from asyncstab.generator import library_examples
from asyncstab.stability import StabilityFlavor, check
from asyncstab.transitions import is_hazard_free, settle_window, sync_like_a

ex = library_examples()["glitch_net"]
f = ex.table()
u = f.inputs[1]
lo, hi = settle_window(f, u)
print(f"input {u}, settle window [{lo}, {hi}]")
print("stable:", check(f, StabilityFlavor.parse("abs:stable")).verdict)
print("synchronous-like:", sync_like_a(f, u, lo, hi) is not None)
print("hazard-free:", is_hazard_free(f, u, lo, hi))
for x in f.states(u):
    print("  ", x)
