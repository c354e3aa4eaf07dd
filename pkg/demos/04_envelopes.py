# Upper k-envelopes on grids and how they compare with convex hulls.
import time

import numpy as np

from garding.envelope import k_convexity_test, upper_k_envelope
from garding.grid import GridFunction, box_domain, unit_square
from garding.oracles import hull_concave_envelope

# 1-D: a single spike becomes a tent
d = box_domain(0.0, 1.0, 1 / 8)
u = np.zeros(9)
u[3] = 1.0
res = upper_k_envelope(GridFunction(d, u), 1)
print("tent:", res.envelope.values.round(4))

# 2-D: bumps times a bubble, so the data vanish on the edges
def bumps(d, seed=1):
    rng = np.random.default_rng(seed)
    x, y = d.coords()
    v = sum(rng.normal() * np.exp(-((x - rng.uniform(.2, .8)) ** 2 + (y - rng.uniform(.2, .8)) ** 2) / 0.02)
            for _ in range(4))
    return GridFunction(d, v * 16 * x * (1 - x) * y * (1 - y))

for h in (1 / 16, 1 / 32, 1 / 64):
    d = unit_square(h)
    u = bumps(d)
    t = time.perf_counter()
    res = upper_k_envelope(u, 2)
    hull = hull_concave_envelope(d.coords(), u.values)
    err = np.abs(res.envelope.values - hull).max() / u.osc()
    print(f"h=1/{round(1 / h)}  iterations={res.iterations}  error/osc={err:.4f}  {time.perf_counter() - t:.2f}s")

# the error shrinks slowly: the 9-point Hessian only sees the four grid
# directions, and the discrete concavity constraint is looser than true
# concavity along all other directions

# k = 1 asks only for superharmonicity, so the envelope is lower
w1 = upper_k_envelope(u, 1).envelope.values
w2 = res.envelope.values
print("max(w1 - w2):", (w1 - w2).max())
print("contact nodes k=1:", upper_k_envelope(u, 1).contact_mask.sum(), " k=2:", res.contact_mask.sum())
print("-w2 is discretely concave:", k_convexity_test(GridFunction(d, -w2), 2, tol=1e-6)[d.interior_mask].all())
