"""
Timing randomized against deterministic solvers
===============================================

Each configuration runs as a matched pair on the same data. The CSV has
the same columns as ``randcp bench``.
"""

import sys

from randcp.diagnostics import BenchSpec, bench_sweep, write_bench_csv

specs = [BenchSpec((n, n, n), rank, "als") for n in (100, 200) for rank in (10, 20)]
records = bench_sweep(specs)
write_bench_csv(records, sys.stdout)

#############################################################################
# ``speedup`` is the deterministic time over the randomized time of the pair.

for rec in records:
    if rec.randomized:
        print(f"{'x'.join(map(str, rec.shape))} R={rec.rank}: speedup {rec.speedup:.1f}")
