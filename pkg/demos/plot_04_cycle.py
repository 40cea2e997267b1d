"""
Extending explanations until they conflict
==========================================

Two explanations agree on the given table.  Adding a copy of every knob and a
switch ``B`` lets a new setting prepare the state of one setting and then
apply the Helstrom measurement for a chosen pair.  The extended tables now
differ by exactly the gap in trace distance.
"""

import numpy as np

from ambiguity.cycle import envelope_slice, iterate_cycle, run_cycle
from ambiguity.domains import Detector, DetectorDomain, Knob, KnobDomain
from ambiguity.explanations import explain_all_in_measurement, explain_all_in_state
from ambiguity.measures import metdev_ppm
from ambiguity.sampling import random_measure

rng = np.random.default_rng(2)
kd = KnobDomain([Knob("k", ["k0", "k1"])])
dd = DetectorDomain([Detector("d", ["0", "1"])])
mu = random_measure(kd, dd, rng)

rep = run_cycle(mu, explain_all_in_measurement(mu), explain_all_in_state(mu))
print("pair", rep.pair)
print("D =", rep.D, " D' =", rep.D_prime, " metdev =", rep.metdev, " conflict =", rep.conflict)
print("extended domain:", rep.extended.full)

# %%
# On the ``b0`` diagonal the extension reproduces the original table.

print(metdev_ppm(envelope_slice(rep), mu), rep.first.envelope_exact)

# %%
# Keeping one extension and repeating grows the knob domain quickly.

for r in iterate_cycle(mu, "keep-first", rounds=3):
    print(r.extended.base.size, "->", r.extended.full.size, "settings, gap", r.gap)
