"""Complexes resolving Chow groups, and the Theta tower.

The last section shows where the cycle-level and Chow-level checks of the
tower part ways.
"""

from toricchow.chow import chow_presentation
from toricchow.complexes import (
    ThetaTower,
    build_z_slice,
    homology,
    verify_acyclicity,
    verify_simplicial_identities,
)
from toricchow.subdivide import build_theta

# Z_{p,*}(fan): cones of dimension n - p - q with q-forms on their lattice.
# Its homology is CH_p in degree 0 and vanishes above.
fan = build_theta(2, 1, (1,)).fan
for p in range(3):
    z = build_z_slice(fan, p)
    print(f"p={p}: ranks {[z.rank(q) for q in range(z.top + 1)]}, homology {homology(z)},"
          f" CH_p rank {chow_presentation(fan, p).rank}")

# The flat slice keeps cones that never extend by e2.
for p in range(3):
    z = build_z_slice(fan, p, flat=True, r=1)
    print(f"flat p={p}: homology {homology(z)}")

# Face and degeneracy maps between Theta(n,1,(1)) for consecutive n satisfy
# the simplicial identities as exact matrix equalities.
tower = ThetaTower(1, (1,))
rep = verify_simplicial_identities(1, (1,), 3, tower)
print(len(rep.instances), "identities checked, all hold:", rep.identities_hold)

# The alternating sum of face maps on flat Chow groups is exact in the
# inner degrees. On flat cycles the bottom term keeps a class that nothing
# hits, so the cycle-level complex is not exact there.
rep = verify_acyclicity(1, (1,), 0, 2, tower)
print("Chow ranks:", [g[0] for g in rep.ch_groups])
print("exact on Chow groups:", rep.ch_exact)
print("exact on flat cycles:", rep.z_exact)
print("bottom cycle homology:", rep.z_level[0][0])
