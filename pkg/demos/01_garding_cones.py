# Elementary symmetric functions and the cones they cut out.
import numpy as np

from garding.oracles import subset_esp
from garding.sym_poly import esp_all, gamma_k_membership, rho_k

lam = np.array([3.0, -0.5, 1.0, 2.0])

# S_0..S_n in one pass; the recurrence multiplies out prod(1 + lam_i t)
e = esp_all(lam)
print("S_k:", e)
print("by subsets:", [subset_esp(lam, k) for k in range(5)])

# one negative entry: inside the first cones, outside the last ones
for k in range(1, 5):
    print(k, gamma_k_membership(lam, k).membership.value)

# normalised roots decrease along k (Maclaurin)
mu = np.array([0.5, 1.0, 2.0, 4.0])
print("rho_k:", [round(rho_k(mu, k), 6) for k in range(1, 5)])

# batched evaluation: last axis is the vector
rng = np.random.default_rng(0)
batch = rng.normal(size=(100_000, 5)) + 0.4
s = esp_all(batch, 3)
inside = np.all(s[:, 1:] > 0, axis=1)
print("fraction of shifted Gaussians in Gamma_3:", inside.mean())
