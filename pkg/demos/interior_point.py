"""Private interior point on a large discrete domain.

Finds a value between the min and max of a dataset under differential
privacy.  The required sample size grows with the iterated logarithm of the
domain size, so even 64-bit domains stay within reach.
"""

import numpy as np

from slicedp import (
    RegimeError,
    Universe,
    ipp,
    log_star,
    regime_threshold,
    trim_parameter,
)

rng = np.random.default_rng(11)

print("== sample-size regime ==")
print("  bits  log*|X|  trim t   required n   (eps=1, delta=1e-3)")
for bits in (8, 16, 32, 64):
    u = Universe(bits)
    t = trim_parameter(1.0, 1e-3)
    print(f"  {bits:4d}  {log_star(u.size):7d}  {t:6d}   {regime_threshold(u, 1.0, 1e-3):10d}")

print()
print("== solving at regime scale (L=16, eps=1, delta=0.5) ==")
u = Universe(16)
eps, delta = 1.0, 0.5
n = regime_threshold(u, eps, delta)
print(f"  n = {n}")

# cluster with geometric spread plus a handful of far outliers
center = 41813
spread = rng.geometric(0.01, size=n - 8)
signs = rng.choice([-1, 1], size=n - 8)
body = np.clip(center + signs * spread, 0, u.size - 1)
data = np.concatenate([body, [3, 60000, 12, 59999, 7, 58000, 9, 61000]]).astype(np.uint64)

hits = 0
for trial in range(20):
    z = ipp(u, data, eps, delta, rng)
    ok = int(data.min()) <= z <= int(data.max())
    hits += ok
    if trial < 5:
        print(f"  trial {trial}: z={z} interior={bool(ok)}")
print(f"  interior in {hits}/20 runs; data range [{int(data.min())}, {int(data.max())}]")

print()
print("== the regime gate refuses underpowered inputs ==")
try:
    ipp(u, data[:100], eps, delta, rng)
except RegimeError as exc:
    print(f"  RegimeError: {exc}")
    print(f"  required={exc.required} provided={exc.provided}")

# opting out of the gate trades away the success guarantee
z = ipp(u, data[:100], eps, delta, rng, enforce_regime=False)
print(f"  with enforcement off: z={z} "
      f"(interior={int(data[:100].min()) <= z <= int(data[:100].max())})")
