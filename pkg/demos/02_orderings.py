"""Orderings of maximal cones and the faces that index a Chow basis."""

from itertools import product

from toricchow.fan import Cone, projective_line_power, unit
from toricchow.ordering import OrderedFan, build_admissible_ordering, p1n_order, verify_ordering
from toricchow.subdivide import build_theta

# On (P^1)^2 the orthants are ordered so that flipping a sign to negative
# moves later. ess(sigma) collects the walls towards later cones.
P = projective_line_power(2)
ordered = OrderedFan(P, p1n_order(2, P))
for sigma in ordered.order:
    print(sigma, "-> ess", ordered.ess(sigma))

# Every neighbour across a wall through e_i is later when e_i is in the cone.
rep = verify_ordering(ordered, r=2)
print({k: v for k, v in rep.conditions.items()})

# Reversing the order breaks the least-element condition, and the report
# names the cone at fault.
rev = OrderedFan(P, list(reversed(ordered.order)))
rep = verify_ordering(rev, r=2)
print("reversed ii:", rep.conditions["ii"], "witness", rep.witnesses["ii"])

# The ordering of Theta(3,1,(1)) is replayed from its construction and is
# checked against all six conditions.
theta = build_theta(3, 1, (1,))
ordered = build_admissible_ordering(theta, 1)
rep = verify_ordering(ordered)
print(len(ordered.order), "cones, admissible:", rep.admissible)

# Cones without e2 or e3 carry the flat part of the Chow groups.
flat = [s for s in ordered.order if not s.rayset & {unit(3, 2), unit(3, 3)}]
print(len(flat), "maximal cones avoid e2 and e3")

# ess on an orthant of (P^1)^3 is spanned by its negative axis rays.
P3 = projective_line_power(3)
o3 = OrderedFan(P3, p1n_order(3, P3))
for signs in product((1, -1), repeat=3):
    sigma = Cone([unit(3, i + 1, s) for i, s in enumerate(signs)])
    print(signs, o3.ess(sigma))
