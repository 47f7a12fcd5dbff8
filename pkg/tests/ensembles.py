"""Random-instance builders shared by module and acceptance tests."""

import numpy as np

import rsgame as rs


def heuristic_protocol_spec(strong_leader=0, k=2, seed=0, n=3):
    """Two leaders, one follower; the eligible candidate interferes heavily.

    The eligible leader has strong outgoing gains, weak incoming gains and a
    price solving its bi-level first-order condition at an interior target;
    everyone else keeps interior optima with headroom, so the protocol's
    conditions hold at the full-power profile and the case-2 game moves
    smoothly with the information radius.
    """
    rng = np.random.default_rng(seed)
    sigma = 1.5
    cross = rng.uniform(0.003, 0.012, size=(n, n, k))
    others = [p for p in range(n) if p != strong_leader]
    for p in others:
        cross[p, strong_leader] = rng.uniform(1.5, 2.5, size=k)
        cross[strong_leader, p] = rng.uniform(0.02, 0.06, size=k)
    direct = rng.uniform(1.0, 1.6, size=(n, k))
    a0_max = 1.2
    a0_t = float(rng.uniform(0.5, 0.8)) * a0_max
    a_max = np.zeros((n, k))
    a_max[strong_leader] = a0_max
    price = np.empty(n)
    # followers: interior at the leader's target power, with enough headroom
    # that the reaction stays unclamped even if the leader retreats to zero
    for p in others:
        a_t = float(rng.uniform(0.4, 0.7))
        f_anchor = sigma + cross[p, strong_leader] * a0_t
        price[p] = float(np.mean(direct[p] / (f_anchor + direct[p] * a_t)))
        headroom = float(np.max(cross[p, strong_leader] * a0_t / direct[p]))
        a_max[p] = a_t + headroom + 0.4
    # leader: bi-level first-order condition at the target, using the affine
    # reaction slope of each follower
    f0 = sigma
    for p in others:
        f_p = sigma + np.mean(cross[p, strong_leader]) * a0_t
        a_p = np.mean(1.0 / price[p] - f_p / direct[p])
        f0 = f0 + np.mean(cross[strong_leader, p]) * a_p
    h0 = float(np.mean(direct[strong_leader]))
    j0f = -h0 * a0_t / (f0 * (f0 + h0 * a0_t))
    strat = sum(np.mean(cross[strong_leader, p])
                * (-np.mean(cross[p, strong_leader]) / np.mean(direct[p])) * j0f
                for p in others)
    price[strong_leader] = h0 / (f0 + h0 * a0_t) + strat
    leaders = (0, 1)
    return rs.make_spec(direct=direct, cross=cross, noise=sigma,
                        leaders=leaders, action_min=0.0, action_max=a_max,
                        price=price)


def certified_multi_follower_spec(rng, n_followers=2, k=1):
    """One leader, weakly coupled followers: certifiably unique equilibrium.

    High noise floor and tight boxes keep the box-wide curvature bounds from
    being vacuous; prices put every player's optimum inside the box.
    """
    n = n_followers + 1
    sigma = rng.uniform(1.0, 1.6)
    cross = rng.uniform(0.004, 0.02, size=(n, n, k))
    for p in range(1, n):
        cross[p, 0] = rng.uniform(0.3, 0.7, size=k)   # leader felt clearly
        cross[0, p] = rng.uniform(0.05, 0.2, size=k)
    direct = rng.uniform(0.9, 1.5, size=(n, k))
    a_max = np.full((n, k), 2.0)
    price = np.empty(n)
    for p in range(n):
        f_typ = sigma + (0.5 if p else 0.1)
        a_t = float(rng.uniform(0.5, 0.9))
        price[p] = float(np.mean(direct[p] / (f_typ + direct[p] * a_t)))
    return rs.make_spec(direct=direct, cross=cross, noise=sigma, leaders=(0,),
                        action_min=0.0, action_max=a_max, price=price)
