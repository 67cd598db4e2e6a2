"""
Detection performance
=====================

Monte Carlo receiver operating curves for the correlation detector. Under
H0 the signal return is vacuum and the idler is kept, under H1 the source
state arrives through the chain.
"""

from qenr import ChainParams, SourceSpec, derive_seed, pd_at_pfa, roc_curve

chain = ChainParams()
n, N, trials = 0.05, 10**4, 500

curves = {kind: roc_curve(SourceSpec(kind, n), chain, N, trials, derive_seed(3, j))
          for j, kind in enumerate(("quantum", "classical"))}

print(f"n = {n}, N = {N}, {trials} trials per hypothesis")
print("  pfa    pd_quantum   pd_classical")
for pfa in (0.01, 0.05, 0.1, 0.2, 0.5):
    print(f"{pfa:5.2f}   {pd_at_pfa(curves['quantum'], pfa):9.3f}   {pd_at_pfa(curves['classical'], pfa):11.3f}")
