"""Acceptance suite: one test per criterion, each printing a PASS line.

Every [DERIVED] target is recomputed here by an independent oracle (dense
grids, ball sampling, hand algebra) before being compared to the solvers.
Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines and timings.
"""

import time

import numpy as np
import pytest

import rsgame as rs
from rsgame import analysis
from rsgame.harness import (ExperimentConfig, ScenarioSpec,
                            heuristic_leader_selection, monte_carlo_cdf,
                            run_experiment)

from conftest import build_e1_spec, random_priced_multi_follower, random_priced_two_player
from ensembles import certified_multi_follower_spec, heuristic_protocol_spec
from oracles import e1_oracle, waterfill_grid_oracle


def _report(name, detail):
    print(f"\nPASS {name}: {detail}")


def _interior_two_player(rng, radius, k=1, need_rse2=True, coupling=(0.1, 0.6)):
    while True:
        spec = random_priced_two_player(rng, k=k, coupling=coupling)
        try:
            nse = rs.solve_nse(spec)
            if not nse.interior:
                continue
            if float(np.min(np.abs(nse.utilities))) < 5e-3:
                continue
            if not rs.solve_rse1(spec, radius).interior:
                continue
            if need_rse2:
                if float(np.min(spec.cross_gain[1, 0])) < radius * 1.2:
                    continue
                if not rs.solve_rse2(spec, 0.0, radius).interior:
                    continue
        except Exception:
            continue
        return spec, nse


@pytest.fixture(scope="module")
def two_player_pool():
    """200 interior one-leader one-follower instances shared by criteria 3, 4."""
    rng = np.random.default_rng(1003)
    return [_interior_two_player(rng, 0.05) for _ in range(200)]


class TestCriterion1WorstCaseOracle:
    def test_lemma_fixed_point_matches_ball_sampling(self):
        t0 = time.time()
        rng = np.random.default_rng(1001)
        n_states = 500
        worst_gap = 0.0
        for i in range(n_states):
            k = int(rng.integers(1, 5))
            h = rng.uniform(0.2, 3.0, size=k)
            c = rng.uniform(0.0, 1.0)
            a = rng.uniform(0.05, 3.0, size=k)
            f = rng.uniform(0.1, 3.0, size=k)
            spec = rs.make_spec(direct=h[None, :], cross=np.zeros((1, 1, k)),
                                noise=0.05, leaders=(), action_max=10.0,
                                price=[c])
            g = rs.derivatives(spec, 0, a, f).grad_f
            # radius scaled so 1000 surface samples resolve the curvature
            eps = {1: 0.05, 2: 0.02, 3: 0.004, 4: 0.002}[k] \
                / max(1.0, float(np.linalg.norm(g)))
            wco = rs.worst_case_observation(spec, 0, a, f, eps, tol=1e-12)
            u_star = rs.utility(spec, 0, a, wco.values)
            dirs = rng.standard_normal((1000, k))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            pts = np.maximum(f[None, :] + eps * dirs, 1e-9)
            hh = h[None, :]
            vals = (np.log1p(hh * a[None, :] / pts)
                    - c * a[None, :]).sum(axis=1)
            sampled_min = float(vals.min())
            assert u_star <= sampled_min + 1e-9  # optimality direction
            worst_gap = max(worst_gap, abs(u_star - sampled_min))
        elapsed = time.time() - t0
        assert worst_gap < 1e-4
        assert elapsed < 60.0
        _report("criterion 1",
                f"{n_states} states, worst oracle gap {worst_gap:.2e}, "
                f"{elapsed:.1f}s")


class TestCriterion2WorkedInstance:
    def test_worked_instance_recomputed_then_reproduced(self):
        spec = build_e1_spec()
        oracle = e1_oracle()
        targets = {
            "NSE": oracle.grid_nse(),
            "RSE1": oracle.grid_nse(eps=0.1),
            "RSE2": oracle.grid_nse(believed_gain=0.4,
                                    realize_with_true_gain=True),
        }
        # the frozen three-digit expectations double-check the oracle itself
        frozen = {
            "NSE": {"a0": 0.483, "w0": 0.032, "w1": 0.938},
            "RSE1": {"a0": 0.665, "w0": 0.055, "w1": 0.746},
            "RSE2": {"a0": 0.365, "w0": 0.031, "w1": 1.099},
        }
        for kind, vals in frozen.items():
            for key, v in vals.items():
                assert targets[kind][key] == pytest.approx(v, abs=3e-3), \
                    (kind, key)
        results = {
            "NSE": rs.solve_nse(spec),
            "RSE1": rs.solve_rse1(spec, 0.1),
            "RSE2": rs.solve_rse2(spec, 0.0, 0.1),
        }
        for kind, res in results.items():
            t = targets[kind]
            assert res.profile.actions[0, 0] == pytest.approx(t["a0"], abs=1e-3)
            assert res.profile.actions[1, 0] == pytest.approx(t["a1"], abs=1e-3)
            assert res.utilities[0] == pytest.approx(t["w0"], abs=1e-3)
            assert res.utilities[1] == pytest.approx(t["w1"], abs=1e-3)
        _report("criterion 2",
                "nominal and both robust equilibria match the grid oracle "
                "within 1e-3")


class TestCriterion3Case1Orderings:
    def test_leader_up_follower_down_everywhere(self, two_player_pool):
        t0 = time.time()
        checked = 0
        for spec, nse in two_player_pool:
            for eps in (0.01, 0.05):
                rse1 = rs.solve_rse1(spec, eps)
                assert rse1.utilities[0] >= nse.utilities[0] - 1e-9
                assert rse1.utilities[1] <= nse.utilities[1] + 1e-9
                checked += 1
        elapsed = time.time() - t0
        assert elapsed < 120.0
        _report("criterion 3",
                f"{checked} orderings on {len(two_player_pool)} interior "
                f"instances, {elapsed:.1f}s")


class TestCriterion4Case2Orderings:
    def test_case2_and_cross_case_orderings(self, two_player_pool):
        for spec, nse in two_player_pool:
            for radius in (0.01, 0.05):
                rse2 = rs.solve_rse2(spec, 0.0, radius)
                assert rse2.utilities[0] <= nse.utilities[0] + 1e-9
                assert rse2.utilities[1] >= nse.utilities[1] - 1e-9
                # matched-radius comparison against case 1
                rse1 = rs.solve_rse1(spec, radius)
                matched = rs.solve_rse2(spec, radius, radius)
                assert matched.utilities[0] <= rse1.utilities[0] + 1e-9
        _report("criterion 4",
                f"case-2 and matched-radius orderings hold on "
                f"{len(two_player_pool)} instances at radii (0.01, 0.05)")


class TestCriterion5ClosedFormOrder:
    def test_gap_shrinks_quadratically(self):
        rng = np.random.default_rng(1005)
        n_instances = 50
        ratios = []
        done = 0
        while done < n_instances:
            k = 1 if done % 2 == 0 else 2
            spec, nse = _interior_two_player(rng, 0.04, k=k, need_rse2=False)
            gaps = []
            try:
                for eps in (0.04, 0.02):
                    numeric = rs.solve_rse1(spec, eps)
                    closed = rs.rse1_closed_form(spec, nse, eps)
                    gaps.append(float(np.max(np.abs(
                        closed.actions - numeric.profile.actions))))
            except rs.errors.InapplicableFormulaError:
                # coupling strong enough to break the leader's second-order
                # condition: the closed form declares itself out of scope
                continue
            done += 1
            if gaps[0] <= 1e-8:
                continue  # already at solver resolution: nothing to shrink
            ratios.append(gaps[0] / max(gaps[1], 1e-15))
            assert ratios[-1] >= 3.5, (done, gaps)
        _report("criterion 5",
                f"{len(ratios)} instances, min shrink factor "
                f"{min(ratios):.2f} (quadratic contract is 4)")


class TestCriterion6ConditionAgreement:
    def test_first_order_predictions(self):
        # moderate coupling keeps the instances inside the first-order regime
        # the conditions describe; stronger coupling raises the higher-order
        # exceptions the contract allows to be logged
        rng = np.random.default_rng(1006)
        n_instances = 200
        agree1 = total1 = agree2 = total2 = 0
        exceptions = []
        for _ in range(n_instances):
            spec, nse = _interior_two_player(rng, 0.01,
                                             coupling=(0.05, 0.35))
            conds = analysis.check_conditions(spec, nse)
            if conds.all_k["c1"] and conds.all_k["c2"]:
                total1 += 1
                d = analysis.delta_metrics(nse, rs.solve_rse1(spec, 0.01))
                agree1 += d.social >= -1e-6
                if d.social < -1e-6:
                    exceptions.append(("case1", d.social))
            if conds.all_k["c3"] and conds.all_k["c4"]:
                total2 += 1
                d = analysis.delta_metrics(nse, rs.solve_rse2(spec, 0.0, 0.01))
                agree2 += d.social >= -1e-6
                if d.social < -1e-6:
                    exceptions.append(("case2", d.social))
        if exceptions:
            print(f"\nhigher-order exceptions: {exceptions}")
        rate1 = agree1 / total1 if total1 else 1.0
        rate2 = agree2 / total2 if total2 else 1.0
        assert rate1 >= 0.98
        assert rate2 >= 0.98
        _report("criterion 6",
                f"case-1 agreement {agree1}/{total1}, case-2 agreement "
                f"{agree2}/{total2} (an untriggered prediction agrees "
                "vacuously)")


class TestCriterion7MultiFollowerDirections:
    def test_directions_on_certified_instances(self):
        rng = np.random.default_rng(1007)
        n_instances = 100
        done = 0
        while done < n_instances:
            n_f = 2 + (done % 2)
            spec = certified_multi_follower_spec(rng, n_followers=n_f)
            cert = rs.uniqueness_certificate(spec, samples=64,
                                             rng_seed=int(rng.integers(2**31)))
            if not cert.is_p_matrix:
                continue
            try:
                nse = rs.solve_nse(spec)
                if not nse.interior:
                    continue
            except Exception:
                continue
            followers = list(spec.followers)
            min_gain = min(float(np.min(spec.cross_gain[n, 0]))
                           for n in followers)
            prev_actions = nse.profile.actions
            prev_leader = nse.utilities[0]
            for eps in (0.02, 0.05):
                res = rs.solve_rse1(spec, eps)
                for n in followers:
                    assert np.all(res.profile.actions[n]
                                  <= prev_actions[n] + 1e-8)
                assert res.utilities[0] >= prev_leader - 1e-9
                prev_actions = res.profile.actions
                prev_leader = res.utilities[0]
            prev_actions = nse.profile.actions
            prev_leader = nse.utilities[0]
            for delta in (0.5 * min_gain, 0.9 * min_gain):
                res = rs.solve_rse2(spec, 0.0, delta)
                for n in followers:
                    assert np.all(res.profile.actions[n]
                                  >= prev_actions[n] - 1e-8)
                assert res.utilities[0] <= prev_leader + 1e-9
                prev_actions = res.profile.actions
                prev_leader = res.utilities[0]
            done += 1
        _report("criterion 7",
                f"{n_instances} certified instances with 2-3 followers: "
                "actions and leader utility move monotonically")


class TestCriterion8WaterfillingOptimality:
    def test_grid_oracle_never_beats_waterfill(self):
        rng = np.random.default_rng(1008)
        n_instances = 200
        worst = -np.inf
        for _ in range(n_instances):
            k = int(rng.integers(1, 4))
            budget = float(rng.uniform(0.5, 4.0))
            spec = rs.make_spec(direct=np.ones((1, k)),
                                cross=np.zeros((1, 1, k)),
                                noise=0.05, leaders=(), action_max=100.0,
                                budget=[budget])
            f = rng.uniform(0.1, 2.0, size=k)
            alloc = rs.waterfill(spec, 0, f, budget)
            mine = float(np.log1p(alloc / f).sum())
            step = 1e-3 * budget if k > 1 else budget
            _, best = waterfill_grid_oracle(np.ones(k), f, budget, step)
            worst = max(worst, best - mine)
            assert best - mine <= 1e-6
        _report("criterion 8",
                f"{n_instances} instances, max oracle advantage {worst:.2e}")


class TestCriterion11SweepDeterminism:
    def test_sweep_bodies_byte_identical(self, tmp_path):
        gains = [[[1.0], [0.5]], [[0.5], [1.0]]]
        base = dict(
            n_players=2, n_dims=1, leaders=(0,),
            utility={"kind": "priced", "price": [0.8, 0.5]},
            action_min=0.0, action_max=[[1.0], [2.0]], noise=0.1,
            fixed_gains=gains, rng_seed=7, ensemble_size=3,
            eps_grid=(0.0, 0.02, 0.05), delta_grid=(0.0, 0.02),
        )
        s1 = run_experiment(ExperimentConfig(out_dir=str(tmp_path / "a"),
                                             **base), quiet=True)
        s2 = run_experiment(ExperimentConfig(out_dir=str(tmp_path / "b"),
                                             **base), quiet=True)
        body1 = open(s1.csv_path, "rb").read().split(b"\n", 1)[1]
        body2 = open(s2.csv_path, "rb").read().split(b"\n", 1)[1]
        assert body1 == body2
        _report("criterion 11", f"{len(body1)} CSV body bytes identical "
                                "across reruns")
