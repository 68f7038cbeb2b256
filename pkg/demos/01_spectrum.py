# coding: utf-8

# # Spectral classification of toral automorphisms
#
# Everything that decides the combinatorics is computed exactly over the
# integers: determinant, characteristic polynomial, irreducibility and the
# cyclotomic factors.  Only the root moduli are floating point.

# In[1]:

from toral_entropy import IntegerMatrix, spectral_data

cat = IntegerMatrix([[2, 1], [1, 1]])
sd = spectral_data(cat)
print(sd.poly, sd.flags)
print("h_top =", sd.h_top)


# A degree-4 Salem companion matrix: two roots sit on the unit circle, so the
# map is not hyperbolic, yet no cyclotomic factor divides the polynomial and
# the map stays ergodic.

# In[2]:

salem = IntegerMatrix([[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [-1, 1, 1, 1]])
sd = spectral_data(salem)
for z, res in sd.roots:
    print(f"{z:.12f}  |z| = {abs(z):.12f}  residual {res:.1e}")
print(sd.flags, "chi =", sd.chi, "zeta =", sd.zeta)


# Finite-order maps have zero entropy and a cyclotomic factor.

# In[3]:

rot = spectral_data(IntegerMatrix([[0, 1], [-1, 0]]))
print(rot.h_top, rot.cyclotomic, rot.flags)
