"""
Link success probabilities
==========================

How likely is a transmission to clear the SINR threshold on each link type?
The closed forms are cheap to evaluate, so we sweep the threshold and then
spot-check a few points against the Monte Carlo oracle, which draws every
tier as a Poisson process around a receiver at the origin.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from edgecache import NetworkParams, PhyParams, closed_form_success, mc_success_oracle
from edgecache.phy import LINKS

net = NetworkParams()
thresholds_db = np.linspace(-10, 10, 41)
curves = np.array([closed_form_success(PhyParams(phi_db=t), net).as_array() for t in thresholds_db])

###############################################################################
# The D2D link is short (15 m) and faces few active interferers, so it stays
# close to 1. Two-hop links carry the relay's self-interference and collapse.

fig, ax = plt.subplots(figsize=(6, 4))
for i, link in enumerate(LINKS):
    ax.semilogy(thresholds_db, np.maximum(curves[:, i], 1e-12), label=link)
ax.set_xlabel("threshold (dB)")
ax.set_ylabel("success probability")
ax.legend(fontsize=8)

###############################################################################
# Oracle spot checks at three thresholds. Exponential fading on every link,
# 20k trials each. The tagged-sBS closed form sits 10-20% below the oracle:
# its exclusion term for the other sBSs counts that interference twice.

rng = np.random.default_rng(0)
for t in (-5.0, 0.0, 5.0):
    params = PhyParams(phi_db=t)
    closed = closed_form_success(params, net)
    for link in ("d2d", "tagged_sbs", "mbs_direct"):
        est = mc_success_oracle(link, params, net, 20_000, rng)
        ax.plot(t, max(est, 1e-12), "kx")
        print(f"{t:+5.1f} dB {link:11s} closed={getattr(closed, 'p_s_' + link):.4f} oracle={est:.4f}")

fig.tight_layout()
fig.savefig("success_probabilities.svg")
