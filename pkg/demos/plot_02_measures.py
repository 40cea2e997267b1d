"""
Outcome tables, distances and the induced topology
==================================================

A parametrized probability measure assigns an outcome distribution to every
setting.  Distances between settings come from the largest gap in event
probability, which is half the L1 distance between rows.
"""

import numpy as np

from ambiguity.domains import Detector, DetectorDomain, Knob, KnobDomain
from ambiguity.measures import (
    ParamProbMeasure,
    distance_matrix,
    induced_partition,
    marginalize,
    metdev_ppm,
)

kd = KnobDomain([Knob("source", ["s0", "s1", "s2", "s3"])])
dd = DetectorDomain([Detector("left", ["off", "on"]), Detector("right", ["off", "on"])])
mu = ParamProbMeasure(
    kd,
    dd,
    [
        [0.4, 0.1, 0.1, 0.4],
        [0.25, 0.25, 0.25, 0.25],
        [0.4, 0.1, 0.1, 0.4],
        [0.0, 0.5, 0.5, 0.0],
    ],
)
print(np.round(distance_matrix(mu), 3))

# %%
# Settings with equal rows cannot be told apart by any event.  They merge into
# one class, and the classes carry the quotient metric.

part = induced_partition(mu)
for c in part.classes:
    print([dict(k) for k in c])
print(part.distances)

# %%
# Throwing away a detector coarsens what can be seen.  Here each detector
# alone fires with probability 1/2 at every setting, so all settings merge.

left = marginalize(mu, ["right"])
print(left.table)
print("classes after marginalizing:", len(induced_partition(left)))
print("metric deviation from the full measure:", metdev_ppm(mu, left))
