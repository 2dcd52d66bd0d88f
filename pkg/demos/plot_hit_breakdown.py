"""
Where does a request get served?
================================

A request is tried at the requester's own cache, then at D2D neighbours,
then at the base stations. With independent caching every outcome
probability is a product of placement probabilities. Here we take one
scene, one placement, and compare that product form with brute-force
sampling of cache contents.
"""

import numpy as np

from edgecache import CatalogParams, NetworkParams, generate_preferences
from edgecache import hit_breakdown, mc_hit_oracle
from edgecache.optimizer import baseline_random
from edgecache.topology import build_topology_with_mbs

rng = np.random.default_rng(3)
net = NetworkParams(lambda_u=1e-3, lambda_b=1e-4, lambda_m=2e-5, R_u=30, R_b=80, R_m=300,
                    alpha=0.3, region_side=300)
# redraw until the window holds at least one MBS
topo = build_topology_with_mbs(net, rng)
print(f"{topo.n_users} users ({len(topo.requesters)} requesting), {topo.n_sbs} sBSs, {topo.n_mbs} MBSs")

caps = topo.capacities(1, 2, 4)
placement = baseline_random(caps, 5, rng)

###############################################################################
# Pick the requester with the most D2D neighbours. Branches with no path
# (here possibly the neighbouring sBSs) come out as exact zeros either way.

r = max(range(len(topo.requesters)), key=lambda i: len(topo.d2d_neighbors[i]))
user = topo.requesters[r]
exact = hit_breakdown(placement, topo, user, 0)
sampled = mc_hit_oracle(placement, topo, user, 0, 500_000, rng)
for name, p in exact.as_dict().items():
    print(f"{name:16s} {p:.5f}  sampled {getattr(sampled, name):.5f}")
print("local hit probability", round(exact.local_hit(), 5))

###############################################################################
# Preferences are per user: a random ranking and a Zipf skew drawn in
# [0.1, 2.5]. The requester's favourite content is not necessarily content 0.

prefs = generate_preferences(topo.n_users, CatalogParams(F=5), rng)
print("requester's request probabilities", np.round(prefs.request_prob[user], 3))
