# A cheap sufficient condition for dual ellipticity from trace / lambda_min.
import numpy as np

from garding.abp import sample_operator_field
from garding.dual_cone import rho_star
from garding.ellipticity import chi, chi_threshold, ellipticity_profile, rho_star_lower_bound
from garding.grid import ball_domain

n, k = 3, 2
print("chi > 0 while trace/lambda_min <", chi_threshold(n, k))
for a0 in np.linspace(3.0, 6.0, 7):
    print(f"a0={a0:.2f} chi={chi(n, k, a0):+.3f}")

# the lower bound only applies in a thin window near the threshold
lam = np.array([1.0, 1.2, 3.4])
bound, valid = rho_star_lower_bound(lam, k)
print("a0:", lam.sum() / lam[0], "bound:", bound, "valid:", valid, "rho*:", rho_star(lam, k).value)

# nodewise profile of a smooth random field on the unit disk
fld = sample_operator_field(4, 3, 2, "chi_positive", domain=ball_domain(1.0, 0.25))
prof = ellipticity_profile(fld, 2)
print("a0 =", round(prof.a0, 4), " a_k =", round(prof.a_k, 4), " chi =", round(prof.chi, 4))
print("condition number:", round(prof.max_condition, 4))
print("(k/n)^k C(n,k) a_k^k =", round(prof.ratio_bound_corrected, 4), prof.corrected_holds)
print("(n/k)^k a_k^k / C(n,k) =", round(prof.ratio_bound, 4), prof.printed_holds)
