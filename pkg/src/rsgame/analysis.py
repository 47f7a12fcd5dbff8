"""Condition checkers, SINR regime classification, and ordering reports.

The C-conditions compare derivative magnitudes at an equilibrium profile and
predict whether robustness raises or lowers the social utility:

* case 1 (noisy follower observations): C1 |C_10| < |J0_a|, C2 |J1_a| < |C_01|
* case 2 (incomplete leader information): C3 and C4 are the reversals
* multi-follower sums: C5/C6 for case 1, C7/C8 for case 2.

Magnitudes are compared throughout (the negative impacts are nonpositive by
construction).
"""

from dataclasses import dataclass

import numpy as np

from . import equilibria, game
from .errors import InvalidSpecError, UndefinedBaselineError


@dataclass(frozen=True)
class ConditionReport:
    """Per-dimension truth values of the C-conditions at one profile.

    c1..c4 are (K,) arrays for one-leader one-follower games (None otherwise);
    c5/c7 are (K,) leader-level arrays and c6/c8 (Nf, K) follower-level arrays
    for one-leader multi-follower games.  `all_k` holds the all-dimension
    (and all-follower) conjunction of each available condition.
    """

    c1: np.ndarray = None
    c2: np.ndarray = None
    c3: np.ndarray = None
    c4: np.ndarray = None
    c5: np.ndarray = None
    c6: np.ndarray = None
    c7: np.ndarray = None
    c8: np.ndarray = None
    all_k: dict = None


@dataclass(frozen=True)
class RegimeReport:
    """Per-dimension SINR regime labels and the matching simplified gain tests.

    `case1_test` / `case2_test` hold the regime-specific channel-gain
    inequality for each dimension, or None where the regime is Mixed (no
    reduction applies).
    """

    labels: tuple
    case1_test: tuple
    case2_test: tuple
    sinr: np.ndarray  # (2, K): leader row 0, follower row 1


@dataclass(frozen=True)
class DeltaMetrics:
    """Relative utility changes (robust vs nominal), per player and social."""

    per_player: np.ndarray
    social: float


def _player_bundles(spec, actions):
    impacts = game.all_impacts(spec, actions)
    return {n: game.derivatives(spec, n, actions[n], impacts[n])
            for n in range(spec.n_players)}


def check_conditions(spec, at):
    """Evaluate every applicable C-condition at an equilibrium profile."""
    actions = game.as_actions(at.profile if isinstance(at, equilibria.EquilibriumResult)
                              else at)
    if len(spec.leaders) != 1:
        raise InvalidSpecError("conditions are defined for one-leader games")
    leader = spec.leaders[0]
    followers = list(spec.followers)
    bundles = _player_bundles(spec, actions)
    neg = {}  # (on, by) -> |C_[on, by]| per k
    for on in range(spec.n_players):
        for by in range(spec.n_players):
            if on != by:
                neg[(on, by)] = np.abs(spec.cross_gain[on, by, :]
                                       * bundles[on].grad_f)
    j_abs = {n: np.abs(bundles[n].grad_a) for n in range(spec.n_players)}

    c1 = c2 = c3 = c4 = None
    all_k = {}
    if len(followers) == 1:
        fol = followers[0]
        c1 = neg[(fol, leader)] < j_abs[leader]
        c2 = j_abs[fol] < neg[(leader, fol)]
        c3 = ~c1
        c4 = ~c2
        for name, arr in (("c1", c1), ("c2", c2), ("c3", c3), ("c4", c4)):
            all_k[name] = bool(arr.all())

    # multi-follower sums (valid for a single follower too, where they reduce
    # to the pairwise conditions)
    impact_on_followers = sum(neg[(n, leader)] for n in followers)
    c5 = j_abs[leader] > impact_on_followers
    c7 = j_abs[leader] < impact_on_followers
    c6_rows, c8_rows = [], []
    for n in followers:
        outgoing = neg[(leader, n)] + sum(neg[(m, n)] for m in followers if m != n)
        c6_rows.append(j_abs[n] < outgoing)
        c8_rows.append(j_abs[n] > outgoing)
    c6 = np.array(c6_rows)
    c8 = np.array(c8_rows)
    all_k.update(c5=bool(c5.all()), c6=bool(c6.all()),
                 c7=bool(c7.all()), c8=bool(c8.all()))
    return ConditionReport(c1=c1, c2=c2, c3=c3, c4=c4,
                           c5=c5, c6=c6, c7=c7, c8=c8, all_k=all_k)


def classify_regime(spec, profile, theta_hi=10.0, theta_lo=0.1, theta_prox=0.2):
    """Label each dimension R1/R2/R3/Mixed by the two players' SINRs.

    R1: both SINRs above theta_hi; R2: both below theta_lo; R3: the two
    induced impacts are within theta_prox relative gap; Mixed otherwise.
    The thresholds are order-of-magnitude stand-ins for the asymptotic
    regimes, so they are configurable.
    """
    if spec.n_players != 2:
        raise InvalidSpecError("regime classification is for two-player games")
    leader = spec.leaders[0]
    fol = spec.followers[0]
    a = game.as_actions(profile)
    f = game.all_impacts(spec, a)
    sinr = np.vstack([
        spec.direct_gain(leader) * a[leader] / f[leader],
        spec.direct_gain(fol) * a[fol] / f[fol],
    ])
    h00 = spec.direct_gain(leader)
    h11 = spec.direct_gain(fol)
    h01 = spec.cross_gain[leader, fol, :]  # follower's gain at the leader
    h10 = spec.cross_gain[fol, leader, :]  # leader's gain at the follower
    labels, t1, t2 = [], [], []
    for k in range(spec.n_dims):
        gap = abs(f[fol, k] - f[leader, k]) / max(f[fol, k], f[leader, k])
        if sinr[0, k] > theta_hi and sinr[1, k] > theta_hi:
            labels.append("R1")
            t1.append(bool(h10[k] < h01[k]))
            t2.append(bool(h10[k] > h01[k]))
        elif sinr[0, k] < theta_lo and sinr[1, k] < theta_lo:
            labels.append("R2")
            t1.append(bool(h00[k] > h01[k] and h11[k] < h10[k]))
            t2.append(bool(h00[k] < h01[k] and h11[k] > h10[k]))
        elif gap < theta_prox:
            labels.append("R3")
            t1.append(bool(h00[k] * h10[k] > h11[k] * h10[k]))
            t2.append(bool(h00[k] * h10[k] < h11[k] * h10[k]))
        else:
            labels.append("Mixed")
            t1.append(None)
            t2.append(None)
    return RegimeReport(labels=tuple(labels), case1_test=tuple(t1),
                        case2_test=tuple(t2), sinr=sinr)


def delta_metrics(nse, rse):
    """d_n = (w_n^rse - w_n^nse) / w_n^nse per player, and the social analog."""
    base = np.asarray(nse.utilities, dtype=float)
    new = np.asarray(rse.utilities, dtype=float)
    if np.any(np.abs(base) <= 1e-12) or abs(nse.social) <= 1e-12:
        raise UndefinedBaselineError("nominal utility too close to zero for a "
                                     "relative metric")
    return DeltaMetrics(per_player=(new - base) / base,
                        social=(rse.social - nse.social) / nse.social)


@dataclass(frozen=True)
class OrderingRow:
    radius: float
    result: object = None   # EquilibriumResult
    d: object = None        # DeltaMetrics
    leader_ok: bool = None
    follower_ok: bool = None
    error: str = None


@dataclass(frozen=True)
class OrderingReport:
    """Pass/fail table of the robustness orderings on one game instance."""

    nse: object
    case1: tuple    # OrderingRow per eps
    case2: tuple    # OrderingRow per delta
    prop3_ok: bool  # leader utility: case 2 <= case 1 at the matched radius
    case1_predicted: bool   # C1 and C2 held on all dimensions at the NSE
    case2_predicted: bool   # C3 and C4 held on all dimensions at the NSE
    case1_matched: bool     # social movement agreed with the prediction
    case2_matched: bool

    @property
    def all_orderings_hold(self):
        rows = [r for r in self.case1 + self.case2 if r.error is None]
        return all(r.leader_ok and r.follower_ok for r in rows)


def ordering_report(spec, eps_grid, delta_grid, tol=1e-9, ordering_slack=1e-9):
    """Solve the nominal and robust games over both grids and grade orderings.

    Case-1 rows check leader-up / follower-down vs the nominal equilibrium,
    case-2 rows the reverse.  Solver failures mark their row inconclusive.
    """
    eps_grid = [float(e) for e in eps_grid]
    delta_grid = [float(d) for d in delta_grid]
    if not eps_grid or eps_grid[0] != 0.0 or not delta_grid or delta_grid[0] != 0.0:
        raise InvalidSpecError("grids must be ascending and start at 0")
    leader = spec.leaders[0]
    fol = spec.followers[0]
    nse = equilibria.solve_nse(spec, tol=tol)
    conditions = check_conditions(spec, nse)

    def grade(radius, solve, leader_up):
        try:
            res = solve(radius)
        except Exception as exc:  # noqa: BLE001 - row marked inconclusive
            return OrderingRow(radius=radius, error=f"{type(exc).__name__}: {exc}")
        d = delta_metrics(nse, res)
        dl = res.utilities[leader] - nse.utilities[leader]
        df = res.utilities[fol] - nse.utilities[fol]
        if leader_up:
            ok_l, ok_f = dl >= -ordering_slack, df <= ordering_slack
        else:
            ok_l, ok_f = dl <= ordering_slack, df >= -ordering_slack
        return OrderingRow(radius=radius, result=res, d=d,
                           leader_ok=bool(ok_l), follower_ok=bool(ok_f))

    case1 = tuple(grade(e, lambda e_: equilibria.solve_rse1(spec, e_, tol=tol), True)
                  for e in eps_grid if e > 0)
    case2 = tuple(grade(dd, lambda d_: equilibria.solve_rse2(spec, 0.0, d_, tol=tol), False)
                  for dd in delta_grid if dd > 0)

    prop3_ok = True
    eps_nz = [e for e in eps_grid if e > 0]
    delta_nz = [d for d in delta_grid if d > 0]
    if eps_nz and delta_nz:
        rse1 = equilibria.solve_rse1(spec, eps_nz[0], tol=tol)
        rse2 = equilibria.solve_rse2(spec, eps_nz[0], delta_nz[0], tol=tol)
        prop3_ok = bool(rse2.utilities[leader]
                        <= rse1.utilities[leader] + ordering_slack)

    def matched(rows, predicted):
        if not predicted or not rows or rows[0].error is not None:
            return True  # the prediction makes no claim here
        return bool(rows[0].d.social >= -1e-6)

    c1c2 = bool(conditions.all_k.get("c1", False) and conditions.all_k.get("c2", False))
    c3c4 = bool(conditions.all_k.get("c3", False) and conditions.all_k.get("c4", False))
    return OrderingReport(nse=nse, case1=case1, case2=case2, prop3_ok=prop3_ok,
                          case1_predicted=c1c2, case2_predicted=c3c4,
                          case1_matched=matched(case1, c1c2),
                          case2_matched=matched(case2, c3c4))
