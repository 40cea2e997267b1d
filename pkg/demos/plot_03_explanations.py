"""
Many quantum explanations of one table
======================================

A table of outcome probabilities fixes the trace rule output, not the states.
Three explanations reproduce the same table while disagreeing completely on
how distinguishable the prepared states are.
"""

import numpy as np

from ambiguity.domains import Detector, DetectorDomain, Knob, KnobDomain
from ambiguity.explanations import canonical_explanations, verify_explains
from ambiguity.quantum import metdev_density, pairwise_trace_distances
from ambiguity.sampling import random_measure

rng = np.random.default_rng(1)
kd = KnobDomain([Knob("k", ["k0", "k1", "k2", "k3"])])
dd = DetectorDomain([Detector("d", ["0", "1", "2"])])
mu = random_measure(kd, dd, rng)

expl = canonical_explanations(mu)
for name, e in expl.items():
    rep = verify_explains(e, mu)
    print(f"{name:12s} dim={e.dim} explains={rep.ok} deviation={rep.deviation:.1e}")

# %%
# State trace distances under each explanation.

for name, e in expl.items():
    print(name)
    print(np.round(pairwise_trace_distances(e.rho), 3))

# %%
# The metric deviation between state assignments measures how far apart two
# explanations are on distinguishability.  Between the two extremes it is 1.

print(metdev_density(expl["measurement"], expl["state"]))
print(metdev_density(expl["sqrt"], expl["state"]))
