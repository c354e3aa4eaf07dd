# Manufactured solutions: the constant each maximum-principle estimate needs.
import math

import numpy as np

from garding.abp import (
    ManufacturedProblem,
    estimate_report,
    gronwall_factor,
    sample_operator_field,
    sample_solution,
)
from garding.grid import GridFunction, ball_domain

# paraboloid on the unit disk: Lu = -4, rho*_2 = 1
for h in (1 / 16, 1 / 32, 1 / 64):
    d = ball_domain(1.0, h)
    fld = sample_operator_field(0, 2, 2, "identity", domain=d)
    u = GridFunction.from_callable(d, lambda x, y: 1 - x * x - y * y)
    r = estimate_report(ManufacturedProblem.from_solution(fld, u), "T1.1/Eq1.8", 2, q=2)
    print(f"h=1/{round(1 / h)}  lhs={r.lhs:.4f}  source={r.source_norm:.4f}  C={r.required_C:.5f}")
print("limit 1/(8 sqrt(pi)) =", 1 / (8 * math.sqrt(math.pi)))

# random smooth fields and solutions, contact-set norm
d = ball_domain(1.0, 1 / 16)
cs = []
for seed in range(10):
    fld = sample_operator_field(seed, 2, 2, "dual_interior", domain=d)
    u = sample_solution(seed + 500, d)
    r = estimate_report(ManufacturedProblem.from_solution(fld, u), "Eq2.10", 2, q=2)
    cs.append(r.required_C)
print("required C over seeds:", np.round(cs, 4))
print("classical ABP constant with doubled ball:", 3 / (4 * math.sqrt(math.pi)))

# hypotheses are flagged, never enforced
r = estimate_report(ManufacturedProblem.from_solution(fld, u), "T1.1/Eq1.8", 2, q=1.5)
print(r.hypothesis_flags)

# the Gronwall factor and its limit
for N in (10, 100, 10_000, math.inf):
    print(N, gronwall_factor(1.0, 1.0, N))
