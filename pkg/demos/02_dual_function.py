# The dual function rho*_k: value, closed forms, the comparison bound.
import numpy as np

from garding.dual_cone import dual_membership, rho_star, upper_bound_1_7

lam = np.array([1.0, 2.0, 3.0])

for k in (1, 2, 3):
    r = rho_star(lam, k)
    print(k, r.status.value, r.as_float())

# k = n is the geometric mean of the eigenvalues
print("det^(1/3):", 6 ** (1 / 3))

# off the diagonal ray rho*_1 is -inf, with a direction that proves it
r = rho_star(lam, 1)
print("certificate:", r.certificate, "pairing:", lam @ r.certificate)

# optimal mu comes back in the caller's order
r = rho_star([3.0, 1.0, 2.0], 2)
print("mu:", r.optimal_mu.round(4) + 0.0, "kkt:", r.kkt_residual)

# the bound from the k smallest eigenvalues is attained on (1,..,1,k,..,k)
n, k = 5, 3
for s in (1.0, 2.0, 3.0, 4.5):
    lam = np.array([1.0] * k + [s] * (n - k))
    print(f"s={s}: rho*={rho_star(lam, k).as_float():.6f}  bound={upper_bound_1_7(lam, k):.6f}")

# the dual cones grow with k
lam = np.array([0.2, 1.0, 2.5, 3.0])
print([dual_membership(lam, k).membership.value for k in range(1, 5)])
