# coding: utf-8

# # Certifying an invariant set with entropy in a window
#
# solve_params searches (eps, k, r) so that log g- and log g+ after k steps sit
# inside [k beta1, k beta2].  The certificate is plain JSON and can be replayed
# and checked against brute-force counts.

# In[1]:

import json

from toral_entropy import IntegerMatrix, component_bounds, solve_params, spectral_data

salem = IntegerMatrix([[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [-1, 1, 1, 1]])
sd = spectral_data(salem)
h = sd.h_top
cert = solve_params(salem, 0.3 * h, 0.4 * h)
print("eps =", cert.epsilon, "k =", cert.k, "r =", cert.r, "path:", cert.path)
print("per-step window", cert.per_k_entropy_window, "inside", (0.3 * h, 0.4 * h))


# In[2]:

print(cert.set_description.forward)
print(cert.set_description.union)


# Exact counts per generation against the closed-form bounds.

# In[3]:

cb = component_bounds(cert.chart, sd.chi, cert.epsilon, cert.k, cert.r, m=5)
for row in cb.generations():
    print(row)


# In[4]:

print(json.dumps(cert.to_json(), indent=1, sort_keys=True)[:400], "...")
