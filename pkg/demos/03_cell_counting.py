# coding: utf-8

# # Counting return cells on an unstable leaf
#
# The leaf through the origin meets the slab K(r) in a lattice of cells.  The
# closed-form bounds g-, g+ sandwich the exact number of cells covered by or
# meeting a disk of radius R; the oracle counts them by enumeration.

# In[1]:

import numpy as np

from toral_entropy import IntegerMatrix, eps_jordan, spectral_data, unstable_chart, verify_cellcover

cat = IntegerMatrix([[2, 1], [1, 1]])
sd = spectral_data(cat)
chart = unstable_chart(eps_jordan(cat, sd, 0.01), sd)
print("alpha =", chart.alpha, "C0 =", chart.C0, "lattice basis", chart.lattice_basis.tolist())


# In[2]:

for R in (3.0, 10.0, 100.0, 1000.0):
    v = verify_cellcover(chart, [R], [0.1])
    print(f"R = {R:7.1f}  g- = {v['g_minus']:9.2f} <= {v['covered']:5d} covered,"
          f"  {v['intersecting']:5d} meeting <= g+ = {v['g_plus']:9.2f}")


# Both bounds grow like C0 R: the per-cell density of the lattice.

# In[3]:

R = np.geomspace(5, 5000, 6)
print([(round(r), verify_cellcover(chart, [r], [0.1])["covered"]) for r in R])
