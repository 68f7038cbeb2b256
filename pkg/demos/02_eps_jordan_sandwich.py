# coding: utf-8

# # Pinching expansion rates with an epsilon-Jordan basis
#
# A Jordan chain with coupling 1 expands some vectors faster than the
# eigenvalue modulus.  Rescaling the chain by powers of eps brings the coupling
# down to eps, and the block then stretches every sphere into the annulus
# between (chi - eps)^k and (chi + eps)^k.

# In[1]:

import numpy as np

from toral_entropy import eps_jordan, sandwich_check

A = np.array([[2.0, 1.0], [0.0, 2.0]])
for eps in (0.5, 0.1, 0.01):
    ejf = eps_jordan(A, epsilon=eps)
    print(eps, ejf.A_eps.tolist(), "cond(Q) =", round(ejf.condition, 1))


# The sampled sandwich check for k = 1..10: the worst margins stay
# non-negative.

# In[2]:

ejf = eps_jordan(A, epsilon=0.05)
for k in (1, 5, 10):
    rep = sandwich_check(ejf, [0.2], samples=10_000, k=k)
    print(k, rep["pass"], f"{rep['worst_lower_margin']:.3e}", f"{rep['worst_upper_margin']:.3e}")


# The cost of a small eps is conditioning: cond(Q) grows like eps^-(s-1).

# In[3]:

print([round(eps_jordan(A, epsilon=e).condition) for e in (1e-1, 1e-3, 1e-5)])
