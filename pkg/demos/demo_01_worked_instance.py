"""The fully worked two-player instance, end to end.

One leader (player 0) and one follower share a single channel.  The follower
reacts to the interference it observes; the leader commits first, knowing
that reaction.  We solve the nominal game, then both robust variants, and
show how the uncertainty radii move actions and utilities in opposite
directions for the two players.
"""

import numpy as np

import rsgame as rs

spec = rs.make_spec(
    direct=[[1.0], [1.0]],            # channel gains to own receivers
    cross=[[0.0, 0.5], [0.5, 0.0]],   # symmetric interference gains
    noise=0.1,
    leaders=(0,),
    action_max=[[1.0], [2.0]],
    price=[0.8, 0.5],                 # linear transmit costs
)

nse = rs.solve_nse(spec)
print("nominal equilibrium")
print(f"  leader   a0 = {nse.profile.actions[0, 0]:.4f}   "
      f"utility = {nse.utilities[0]:.4f}")
print(f"  follower a1 = {nse.profile.actions[1, 0]:.4f}   "
      f"utility = {nse.utilities[1]:.4f}")

# case 1: the follower only trusts its interference reading up to radius eps,
# so it plays against the worst observation in that ball
eps = 0.1
rse1 = rs.solve_rse1(spec, eps)
print(f"\ncase 1 (eps = {eps}): follower hedges, leader exploits it")
print(f"  leader   a0 = {rse1.profile.actions[0, 0]:.4f}   "
      f"utility = {rse1.utilities[0]:.4f}  (up from {nse.utilities[0]:.4f})")
print(f"  follower a1 = {rse1.profile.actions[1, 0]:.4f}   "
      f"utility = {rse1.utilities[1]:.4f}  (down from {nse.utilities[1]:.4f})")

# the first-order closed form reproduces the numeric solution to O(eps^2)
closed = rs.rse1_closed_form(spec, nse, eps)
gap = np.max(np.abs(closed.actions - rse1.profile.actions))
print(f"  closed-form actions within {gap:.2e} of the numeric solver")

# case 2: the leader only knows its gain toward the follower up to delta,
# plans against the worst realization, and commits
delta = 0.1
rse2 = rs.solve_rse2(spec, 0.0, delta)
print(f"\ncase 2 (delta = {delta}): leader hedges, follower collects")
print(f"  leader   a0 = {rse2.profile.actions[0, 0]:.4f}   "
      f"utility = {rse2.utilities[0]:.4f}  (down from {nse.utilities[0]:.4f})")
print(f"  follower a1 = {rse2.profile.actions[1, 0]:.4f}   "
      f"utility = {rse2.utilities[1]:.4f}  (up from {nse.utilities[1]:.4f})")

# the leader never does better under case 2 than under case 1
rse2_matched = rs.solve_rse2(spec, eps, delta)
print(f"\nleader utility, matched radii: case 2 {rse2_matched.utilities[0]:.4f}"
      f" <= case 1 {rse1.utilities[0]:.4f}")
