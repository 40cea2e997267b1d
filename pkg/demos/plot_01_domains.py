"""
Knob and detector domains as a lattice
======================================

A domain is a product of named factors.  Joining two domains takes the union
of their factors, meeting takes the shared ones, and ``-`` drops factors.
"""

from ambiguity.domains import Knob, KnobDomain, combine_settings

alice = Knob("alice", ["0Z", "1Z", "0X", "1X"])
bob = Knob("bob", ["Z", "X"])
eve = Knob("eve", ["idle", "tap"])

ab = KnobDomain([alice, bob])
be = KnobDomain([bob, eve])

print("join:", ab | be, "size", (ab | be).size)
print("meet:", ab & be)
print("diff:", ab - be)
print("ab <= join:", ab <= (ab | be))

# %%
# Meeting domains with no common knob gives the empty domain.  It still has
# one setting, the empty assignment.

empty = KnobDomain([alice]) & KnobDomain([eve])
print(empty, empty.size, empty.elements())

# %%
# Settings of disjoint domains glue together into a setting of their join.

k = combine_settings({"alice": "0X"}, {"bob": "Z"}, {"eve": "tap"})
print(k, "index", (ab | be).index(k))
