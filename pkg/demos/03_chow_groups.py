"""Chow groups of complete smooth fans, computed three independent ways."""

from math import comb

from toricchow.chow import (
    blowup_rank_check,
    chow_flat,
    chow_presentation,
    fulton_basis,
    sample_two_cones,
    sr_graded_piece,
)
from toricchow.fan import projective_line_power
from toricchow.ordering import OrderedFan, build_admissible_ordering, p1n_order
from toricchow.subdivide import build_theta

# CH_k of (P^1)^n: orbit closures modulo divisors of characters, the
# Fulton census of ess faces, and the Stanley-Reisner ring in degree n - k.
n = 3
P = projective_line_power(n)
sizes = fulton_basis(OrderedFan(P, p1n_order(n, P))).sizes
for k in range(n + 1):
    pres = chow_presentation(P, k)
    print(f"CH_{k}: presentation {pres.rank}, Fulton {sizes[k]}, SR {sr_graded_piece(P, n - k).rank}, C(n,k) {comb(n, k)}")

# The same agreement on Theta(3,1,(1)), a fan with 150 maximal cones.
theta = build_theta(3, 1, (1,))
ordered = build_admissible_ordering(theta, 1)
sizes = fulton_basis(ordered).sizes
print("Theta ranks:", [chow_presentation(theta.fan, k).rank for k in range(4)], "Fulton:", list(sizes))

# The flat part: classes killed by restriction to x_i = 0 for i > 1. Kernel,
# ess cones avoiding e2, e3, and H_0 of the flat complex all give the same
# sublattice (chow_flat raises if they do not).
print("flat ranks:", [chow_flat(ordered, 1, p).rank for p in range(4)])

# Blowing up a 2-cone adds the Chow groups of the exceptional divisor.
for sigma in sample_two_cones(theta.fan, 3, seed=0):
    rep = blowup_rank_check(theta.fan, sigma)
    print(sigma, [(row["blown_up"], row["base"], row["center"]) for row in rep.rows], rep.ok)
