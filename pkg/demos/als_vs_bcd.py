"""
ALS and block coordinate descent, with and without compression
==============================================================

Both solvers fit the same rank-10 tensor. The randomized runs solve on a
compressed tensor and lift the factors back at the end; the reported error
is always measured on the full tensor.
"""

import time

from randcp import DecomposeConfig, decompose
from randcp.synthetic import NoiseSpec, add_noise, random_lowrank

x, truth = random_lowrank((150, 150, 150), 10, seed=3)
x = add_noise(x, NoiseSpec(snr=10.0, seed=4))

print("method  randomized  iterations  seconds  rel. error")
for method in ("als", "bcd"):
    for randomized in (False, True):
        cfg = DecomposeConfig(rank=10, method=method, randomized=randomized, seed=0)
        t0 = time.perf_counter()
        model, trace = decompose(x, cfg)
        dt = time.perf_counter() - t0
        print(f"{method:6s}  {randomized!s:10s}  {trace.iterations:10d}  {dt:7.2f}  {trace.relative_error:.5f}")

#############################################################################
# ALS can crawl along a plateau ("swamp") where the fit changes by less than
# the default tolerance per sweep, so it stops early. A tighter tolerance
# lets it out; on the compressed tensor the extra sweeps are cheap.

model, trace = decompose(x, DecomposeConfig(10, "als", randomized=True, tol=1e-9, max_iter=2000))
print(f"\nrandomized ALS, tol=1e-9: {trace.iterations} iterations, error {trace.relative_error:.5f}")

#############################################################################
# The fitted weights come out sorted; compare them with the ground truth.

print("\ntrue weights  ", truth.weights.round(2))
print("fitted weights", model.weights.round(2))
