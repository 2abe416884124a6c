"""The random exchange chain behind the alpha scans.

M_i = max(M_{i-1} - 1, X_i) decreases by one each step unless the update
pushes it up.  Its return time to zero realizes the scan for admissible
restart offsets, and its invariant law is an explicit infinite product of
the update CDF.
"""

import numpy as np
import scipy.stats

from hawkes_renewal import REChain, invariant_cdf, return_time
from hawkes_renewal.prm import spawn_rng

lam = 0.7
chain = REChain(cdf=lambda k: float(scipy.stats.poisson.cdf(k, lam)),
                sampler=lambda rng, size=None: rng.poisson(lam, size=size))
rng = spawn_rng(7)

traj = chain.run(0, 30, rng)
print("a short trajectory:", traj.tolist())

print("\ninvariant law mu[0, n] = prod_{k>=n} F(k):")
for n in range(5):
    print(f"  mu[0,{n}] = {invariant_cdf(chain, n):.5f}")

mu0 = invariant_cdf(chain, 0)
sig = np.array([return_time(chain, 0, rng) for _ in range(20000)])
print(f"\nKac identity: E_0[sigma] * mu(0) = {sig.mean() * mu0:.4f} (theory 1)")

occ = chain.run(0, 10**6, rng)[1:][::25]  # thin past the mixing time
print("occupation vs invariant pmf:")
for k in range(4):
    emp = np.mean(occ == k)
    th = invariant_cdf(chain, k) - (invariant_cdf(chain, k - 1) if k else 0.0)
    print(f"  state {k}: {emp:.4f} vs {th:.4f}")
