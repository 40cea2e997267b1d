"""
BB84 under two explanations
===========================

The standard BB84 explanation uses non-orthogonal states, so an eavesdropper
confusing ``0Z`` with ``0X`` errs with probability about 0.146.  An
all-in-state explanation of the very same outcome table uses orthogonal
states, and then nothing stops perfect discrimination.
"""

from ambiguity.qkd import bb84_build, bb84_insecure_alternative, bb84_security_floor

s = bb84_build()
print(s.mu.table)

print("standard explanation")
for p in bb84_security_floor(s):
    print(f"  {p.first}-{p.second}: trace distance {p.trace_distance:.6f}, error {p.helstrom_error:.6f}")

# %%
alt = bb84_insecure_alternative(s)
print("alternative explains the table:", alt.verification.ok, "dim", alt.explanation.dim)
for p in alt.errors:
    print(f"  {p.first}-{p.second}: error {p.helstrom_error}")
print("inequivalent explanations possible:", alt.verdict.possible, "witness", alt.verdict.witness)
print("metric deviation of the state assignments:", alt.metdev_density)
