"""Shared fixtures: the worked two-player instance and random-game builders."""

import numpy as np
import pytest

import rsgame as rs


def build_e1_spec():
    """K=1 priced game with known closed-chain algebra (used throughout)."""
    return rs.make_spec(
        direct=[[1.0], [1.0]],
        cross=[[0.0, 0.5], [0.5, 0.0]],
        noise=0.1,
        leaders=(0,),
        action_min=0.0,
        action_max=[[1.0], [2.0]],
        price=[0.8, 0.5],
    )


@pytest.fixture
def e1_spec():
    return build_e1_spec()


def random_priced_two_player(rng, k=1, coupling=(0.1, 0.6), box=8.0,
                             coupling01=None, coupling10=None):
    """Random one-leader one-follower priced game with moderate coupling."""
    h = rng.uniform(0.5, 2.0, size=(2, k))
    x01 = rng.uniform(*(coupling01 or coupling), size=k) * np.sqrt(h[0] * h[1])
    x10 = rng.uniform(*(coupling10 or coupling), size=k) * np.sqrt(h[0] * h[1])
    cross = np.zeros((2, 2, k))
    cross[0, 1] = x01
    cross[1, 0] = x10
    sigma = rng.uniform(0.05, 0.3, size=(2, k))
    price = rng.uniform(0.4, 1.2, size=2)
    return rs.make_spec(direct=h, cross=cross, noise=sigma, leaders=(0,),
                        action_min=0.0, action_max=box, price=price)


def random_priced_multi_follower(rng, n_followers=2, k=1, leader_coupling=(0.1, 0.5),
                                 follower_coupling=(0.02, 0.2), box=8.0):
    """One leader, several followers, weak follower-follower coupling."""
    n = n_followers + 1
    h = rng.uniform(0.5, 2.0, size=(n, k))
    cross = np.zeros((n, n, k))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            band = leader_coupling if (i == 0 or j == 0) else follower_coupling
            cross[i, j] = rng.uniform(*band, size=k)
    sigma = rng.uniform(0.05, 0.3, size=(n, k))
    price = rng.uniform(0.4, 1.2, size=n)
    return rs.make_spec(direct=h, cross=cross, noise=sigma, leaders=(0,),
                        action_min=0.0, action_max=box, price=price)


def interior_instance(rng, max_radius, kind="rse1", k=1, tries=50):
    """Random instance whose nominal and robust equilibria stay interior."""
    for _ in range(tries):
        spec = random_priced_two_player(rng, k=k)
        try:
            nse = rs.solve_nse(spec)
            if not nse.interior:
                continue
            if kind in ("rse1", "both"):
                if not rs.solve_rse1(spec, max_radius).interior:
                    continue
            if kind in ("rse2", "both"):
                if not rs.solve_rse2(spec, 0.0, max_radius).interior:
                    continue
            if float(np.min(np.abs(nse.utilities))) < 5e-3:
                continue
        except Exception:
            continue
        return spec, nse
    raise RuntimeError("could not draw an interior instance")


def random_state(rng, k):
    """A single-player differential state: gains, price, action, impact."""
    h = rng.uniform(0.2, 3.0, size=k)
    c = rng.uniform(0.0, 1.0)
    a = rng.uniform(0.0, 3.0, size=k)
    f = rng.uniform(0.1, 3.0, size=k)
    spec = rs.make_spec(direct=h[None, :], cross=np.zeros((1, 1, k)),
                        noise=0.05, leaders=(), action_min=0.0,
                        action_max=10.0, price=[c])
    return spec, a, f
