"""Robust waterfilling under a total power budget, and overlap shrinkage.

With a sum-power limit the best response fills power above per-channel
inverse qualities.  A robust follower inflates its believed interference
toward the channels that hurt most and retreats from them; across a small
ensemble the number of channels both players use tends to shrink.
"""

import numpy as np

import rsgame as rs
from rsgame.harness import ExperimentConfig, batch_from_config
from rsgame.harness.montecarlo import follower_response_batch, leader_ascent_batch

spec = rs.make_spec(direct=np.ones((2, 6)), cross=np.zeros((2, 2, 6)),
                    noise=0.1, leaders=(0,), action_max=10.0,
                    budget=[4.0, 4.0])
rng = np.random.default_rng(3)
impact = rng.uniform(0.2, 2.0, size=6)

nominal = rs.waterfill(spec, 1, impact, 4.0)
robust = rs.robust_waterfill(spec, 1, impact, 0.5, 4.0)
print("channel   impact   nominal   robust(eps=0.5)")
for k in range(6):
    print(f"{k:6d}   {impact[k]:6.3f}   {nominal[k]:7.4f}   {robust[k]:7.4f}")
print(f"totals            {nominal.sum():7.4f}   {robust.sum():7.4f}"
      "   (the budget always binds)")

# ensemble view: how often does the common-channel count shrink?
config = ExperimentConfig(
    n_players=2, n_dims=6, leaders=(0,),
    utility={"kind": "budgeted", "budget": [10.0, 10.0]},
    action_max=10.0, noise=0.01, channel_model="four_ray",
    rng_seed=11, ensemble_size=24, eps_grid=(0.0, 1.0), restarts=2,
)
batch, _ = batch_from_config(config, config.ensemble_size)
a0n = leader_ascent_batch(batch, 0.0, seed=1, restarts=2)
a1n = follower_response_batch(batch, a0n, 0.0)
a0r = leader_ascent_batch(batch, 1.0, seed=1, restarts=2,
                          extra_starts=(a0n,))
a1r = follower_response_batch(batch, a0r, 1.0)
thr = rs.activity_threshold(10.0, 6)
shrank = grew = same = 0
for i in range(config.ensemble_size):
    before = rs.overlap_stats(np.vstack([a0n[i], a1n[i]]), thr).common_sizes[(0, 1)]
    after = rs.overlap_stats(np.vstack([a0r[i], a1r[i]]), thr).common_sizes[(0, 1)]
    shrank += after < before
    grew += after > before
    same += after == before
print(f"\ncommon-channel count over {config.ensemble_size} drawn instances: "
      f"shrank {shrank}, unchanged {same}, grew {grew}")
print("(a statistical tendency, not a per-instance law)")
