"""Building fans by star subdivision, up to the Gamma and Theta fans."""

from fractions import Fraction

from toricchow.fan import Cone, affine_space, projective_line_power, standardness_report, unit
from toricchow.subdivide import (
    build_gamma,
    build_theta,
    demo_dist14,
    excluded_barycentric,
    star_subdivision,
    t_admissible_permutations,
)

# A star subdivision inserts the ray through the sum of a cone's generators.
# Blowing up the positive quadrant of the plane splits it in two.
A2 = affine_space(2)
fine, replaced = star_subdivision(A2, Cone([(1, 0), (0, 1)]))
print("replaced:", replaced)
for c in fine.maximal_cones:
    print("  ", c)

# Subdividing every face of the cube corner not lying in Cone(e1, e2), largest
# faces first, leaves five cones. Each is labelled by a permutation that
# keeps 1 before 2.
A3 = affine_space(3)
eta = Cone([unit(3, 1), unit(3, 2)])
res = excluded_barycentric(A3, eta)
for piece in sorted(res.pieces, key=lambda p: p.alpha):
    print(piece.alpha, piece.cone)
print(t_admissible_permutations(2, 3))

# (P^1)^n is the fan of coordinate orthants; Gamma and Theta refine it.
for n in (1, 2, 3):
    print(f"n={n}: P1^n {len(projective_line_power(n).maximal_cones):4d}"
          f"  Gamma(n,1) {len(build_gamma(n, 1).fan.maximal_cones):4d}"
          f"  Theta(n,1,(1)) {len(build_theta(n, 1, (1,)).fan.maximal_cones):4d}")

# Theta is very 1-standard: e1 is the only positive ray on its axis and
# cones containing the other axis rays extend by them.
rep = standardness_report(build_theta(3, 1, (1,)).fan, 1)
print("smooth:", rep.smooth, "r-standard:", rep.r_standard, "very r-standard:", rep.very_r_standard)

# A single star subdivision of (P^1)^3 can break the extension property.
p13, _ = star_subdivision(projective_line_power(3), Cone([(1, 0, 0), (0, 1, 0), (0, 0, -1)]))
rep = standardness_report(p13, 0)
print("very 0-standard:", rep.very_r_standard)
print("first failure:", rep.failures[0])

# Repeated subdivision with a fixed weight does not drift towards a corner:
# the iterates grow along the eigenvector of [[1, 1], [2, 1]].
for m, ((x, y, z), _) in enumerate(demo_dist14(8), start=1):
    print(f"m={m}: ({x}, {y}, {z})  y/x = {float(Fraction(y, x)):.4f}")
