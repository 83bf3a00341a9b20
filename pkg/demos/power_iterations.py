"""
Randomized compression and power iterations
===========================================

A noisy low-rank tensor is squeezed onto small orthonormal bases, one mode
at a time. We look at how much of it survives as the number of power
iterations grows, and at what happens without oversampling.
"""

import numpy as np

from randcp import CompressConfig, compress, projection_residual
from randcp.synthetic import NoiseSpec, add_noise, random_lowrank

# A 120 x 120 x 120 tensor of rank 8, buried in noise of half its size.
clean, _ = random_lowrank((120, 120, 120), 8, seed=1)
x = add_noise(clean, NoiseSpec(snr=2.0, seed=2))
norm = np.linalg.norm(x)

#############################################################################
# Sketch width is target rank plus oversampling; each power iteration costs
# two extra passes over the unfolding.

print(" p  q   compressed shape     residual / ||X||")
for p in (0, 10):
    for q in (0, 1, 2, 3):
        res = compress(x, CompressConfig(target_rank=8, oversampling=p, power_iterations=q, seed=0))
        rel = projection_residual(x, res) / norm
        print(f"{p:2d}  {q}   {str(res.compressed.shape):18s}   {rel:.4f}")

#############################################################################
# The noise cannot be represented in a rank-18 basis, so the residual
# bottoms out near the noise level. The useful question is how close to the
# *clean* signal the projection gets.

res = compress(x, CompressConfig(8, 10, 2, seed=0))
print("\nclean-signal error after projection:",
      f"{np.linalg.norm(res.project_back() - clean) / np.linalg.norm(clean):.4f}")
print("numerical rank of each sketch:", res.sketch_ranks)
