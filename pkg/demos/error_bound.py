"""
Checking the expected-error bound
=================================

For Gaussian sketches without power iterations, the mean projection
residual is bounded by sqrt(1 + k/(p-1)) times the root of the summed
singular-value tails of every unfolding. Here we average 50 sketches of a
rank-25 tensor per target rank and compare.
"""

from randcp import validate_bound_sweep

reports = validate_bound_sweep((50, 50, 50), 25, range(5, 50, 5), p=2, trials=50, seed=0)
print(" k   mean residual        bound   holds")
for r in reports:
    print(f"{r.k:2d}   {r.mean_residual:13.6g}  {r.bound:11.6g}   {r.holds}")

#############################################################################
# Past k = 25 the tensor is captured exactly and both columns are roundoff.
