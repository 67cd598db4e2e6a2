"""
Detected covariance and the quantum enhancement
===============================================

Both sources are run through the same amplifier chain at matched power
P_d. The classical source can correlate at most 2n, the squeezed source
reaches 2 sqrt(n (n + 1)), so the ratio of detected covariances grows as
the power drops. The gain of the chain is then recovered from that ratio
alone.
"""

import numpy as np

from qenr import ChainParams, enhancement_model, enhancement_points, fit_gain, power_sweep

chain = ChainParams()
grid = np.geomspace(0.01, 1, 7)

# Exact covariances: no sampling noise at all.
exact = power_sweep(grid, chain, rho=0.99)
print(f"chain gain {chain.G_dB:.1f} dB, system noise {chain.n_sys.round(2)} photons")
print("   n        P_d/G     c_q/G     c_c/G     E_Q     model")
for row in exact.rows:
    print(f"{row.n:6.3f}  {row.P_d / chain.G:8.4f}  {row.c_q / chain.G:8.4f}  {row.c_c / chain.G:8.4f}"
          f"  {row.E_Q:6.3f}  {float(enhancement_model(row.P_d, chain.G)):6.3f}")

# A record length that resolves every point. The Wishart estimator draws the
# sample covariance directly, so 1e14 samples cost nothing.
long = power_sweep(grid, chain, rho=0.99, N=10**14, seed=7, estimator="wishart")
fit = fit_gain(enhancement_points(long))
print(f"\nfit on N = 1e14 records: G = {fit}")

# At 1e6 samples the lowest-power classical correlation is buried in noise.
short = power_sweep(grid, chain, rho=0.99, N=10**6, seed=7)
print("\nN = 1e6: c_c / err per point:",
      " ".join(f"{r.c_c / r.c_c_err:5.1f}" for r in short.rows))
