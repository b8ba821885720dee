"""Monte Carlo check that the block each message lands in reveals nothing about W.

The maximum deviation is taken over every (observable class, index) cell, so
with many classes a fixed threshold needs more trials.  Dividing by the
binomial standard error of the worst cell shows whether a gap is noise.
"""

import math

import numpy as np

from iplt.audit import monte_carlo_audit

for shape in [(5, 2, 1), (7, 3, 2), (8, 3, 1)]:
    report = monte_carlo_audit(*shape, 200_000, np.random.default_rng(1))
    print(report.to_text())
    cell = report.worst_cell
    se = math.sqrt(report.prior * (1 - report.prior) / cell["samples"])
    print(f"worst cell: {report.max_deviation / se:.1f} standard errors over "
          f"{report.observed_classes * report.K} cells")
    print("passes 0.02 threshold:", report.passes(0.02))
    print()
