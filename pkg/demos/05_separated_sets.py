# coding: utf-8

# # An independent look at entropy: separated sets
#
# The growth rate of maximal (n, delta)-separated sets estimates topological
# entropy without any spectral input.  For the cat map it lands near
# log((3 + sqrt 5) / 2); for finite-order maps the counts stop growing.

# In[1]:

import math

import numpy as np

from toral_entropy import separated_set_entropy

cat = np.array([[2, 1], [1, 1]])
slope, counts = separated_set_entropy(cat, n_max=10, return_counts=True)
print(counts)
print("estimate", slope, "exact", math.log((3 + math.sqrt(5)) / 2))


# In[2]:

print(separated_set_entropy(np.array([[0, -1], [1, -1]]), n_max=10))
