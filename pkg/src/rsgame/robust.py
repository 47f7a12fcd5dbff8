"""Uncertainty sets and their worst-case closed forms.

Two kinds of uncertainty are modelled, both as l2 balls around nominal values:

* a follower observes its aggregate impact only up to an error of norm
  eps (obs_radius), and plays against the worst observation in that ball;
* a leader knows the gain from itself to a follower only up to an error of
  norm delta (info_radius), and plans against the ball realization that
  minimizes its view of that follower's impact.
"""

from dataclasses import dataclass

import numpy as np

from . import game
from .errors import InvalidSpecError, IterationLimitError

# Gradient norms below this are treated as degenerate (zero direction).
_DEGENERATE_GRAD = 1e-14


@dataclass(frozen=True)
class UncertaintySpec:
    """Per-follower observation radii and per-(follower, leader) info radii."""

    obs_radius: np.ndarray   # (N,) eps_n; zero for leaders
    info_radius: np.ndarray  # (N, N) delta[follower, leader]; zero elsewhere

    def __post_init__(self):
        object.__setattr__(self, "obs_radius", game._freeze(self.obs_radius))
        object.__setattr__(self, "info_radius", game._freeze(self.info_radius))
        if np.any(self.obs_radius < 0) or np.any(self.info_radius < 0):
            raise InvalidSpecError("uncertainty radii must be nonnegative")


def coerce_uncertainty(spec, eps=0.0, delta=0.0):
    """Build an UncertaintySpec from scalars, per-follower arrays, or pass through.

    Scalar eps applies to every follower; scalar delta applies to every
    (follower, leader) pair.  Leaders always observe exactly (radius zero).
    A delta too large for the nominal gains is allowed (worst-case gains are
    clamped at zero) but flagged via `oversized_info_radius`.
    """
    if isinstance(eps, UncertaintySpec):
        return eps
    n = spec.n_players
    eps_arr = np.broadcast_to(np.asarray(eps, dtype=float), (n,))
    obs = np.zeros(n)
    followers = list(spec.followers)
    obs[followers] = eps_arr[followers]
    d = np.asarray(delta, dtype=float)
    if d.ndim == 1:  # per-follower radius toward every leader
        d = np.broadcast_to(d[:, None], (n, n))
    d = np.broadcast_to(d, (n, n))
    info = np.zeros((n, n))
    for nf in followers:
        for nl in spec.leaders:
            info[nf, nl] = d[nf, nl]
    return UncertaintySpec(obs_radius=obs, info_radius=info)


def oversized_info_radius(spec, unc):
    """Pairs (follower, leader) whose radius exceeds the smallest nominal gain.

    Those worst-case gains get clamped at zero; flagged, not rejected.
    """
    flagged = []
    for nf in spec.followers:
        for nl in spec.leaders:
            delta = unc.info_radius[nf, nl]
            if delta > 0 and delta / np.sqrt(spec.n_dims) > np.min(spec.cross_gain[nf, nl]):
                flagged.append((nf, nl))
    return flagged


@dataclass(frozen=True)
class WorstCaseObservation:
    """Fixed point of the worst-case observation relation.

    `values` is the utility-minimizing observation on the eps-ball around the
    nominal impact; `direction` is the unit gradient direction it realizes
    (zero when the gradient is degenerate).
    """

    values: np.ndarray
    direction: np.ndarray
    iterations: int = 0
    residual: float = 0.0


def direction_vector(bundle):
    """Unit vector along the utility gradient in the observation.

    Returns the zero vector when the gradient norm is below 1e-14, so a player
    with nothing at stake sees no worst case.
    """
    g = np.asarray(bundle.grad_f if isinstance(bundle, game.DerivativeBundle) else bundle,
                   dtype=float)
    norm = float(np.linalg.norm(g))
    if norm < _DEGENERATE_GRAD:
        return np.zeros_like(g)
    return g / norm


def worst_case_observation(spec, player, own_action, nominal_impact, eps, *,
                           one_step=False, tol=1e-10, max_iter=200):
    """Worst observation in the eps-ball around the nominal impact.

    Solves the fixed point f* = f - eps * theta(f*) where theta is the unit
    gradient direction evaluated at the uncertain point, by damped fixed-point
    iteration started at the nominal impact.  `one_step=True` instead
    evaluates theta at the nominal point only (the two differ by O(eps^2)).

    Because the utility decreases in the impact, the worst case inflates it:
    values >= nominal elementwise, and the ball constraint is active whenever
    the gradient is nonzero.
    """
    if eps < 0:
        raise InvalidSpecError("eps must be nonnegative")
    a = np.asarray(own_action, dtype=float)
    f = game.as_impact(nominal_impact)
    game._check_impact(f)
    if eps == 0.0:
        theta = direction_vector(game.derivatives(spec, player, a, f))
        return WorstCaseObservation(values=f.copy(), direction=theta)

    def residual_of(f_t):
        theta = direction_vector(game.derivatives(spec, player, a, f_t))
        target = f - eps * theta
        return theta, target, float(np.max(np.abs(target - f_t)))

    # phase 1: plain iteration (fast when it contracts); phase 2: averaged
    # updates, which damp the two-cycle the direction map can develop when
    # several dimensions compete for the worst case
    f_t = f.copy()
    it = 0
    for phase_iters, damping in ((min(12, max_iter), 1.0), (max_iter, 0.5)):
        while it < phase_iters:
            it += 1
            theta, target, res = residual_of(f_t)
            if one_step:
                return WorstCaseObservation(values=target, direction=theta,
                                            iterations=1, residual=res)
            if res < tol:
                return WorstCaseObservation(values=target, direction=theta,
                                            iterations=it, residual=res)
            f_t = (1.0 - damping) * f_t + damping * target

    # fallback: the inner problem is convex on the ball, so projected
    # gradient descent with backtracking always makes progress
    value = game.utility(spec, player, a, f_t)
    for _ in range(max_iter):
        it += 1
        bundle = game.derivatives(spec, player, a, f_t)
        grad = bundle.grad_f
        norm = float(np.linalg.norm(grad))
        if norm < _DEGENERATE_GRAD:
            break
        step = eps / norm
        while step > 1e-16 * eps / norm:
            cand = f_t - step * grad
            shift = cand - f
            dist = float(np.linalg.norm(shift))
            if dist > eps:
                cand = f + shift * (eps / dist)
            cand = np.maximum(cand, game.IMPACT_FLOOR * 10.0)
            cand_value = game.utility(spec, player, a, cand)
            if cand_value < value - 1e-18:
                f_t, value = cand, cand_value
                break
            step *= 0.5
        theta, target, res = residual_of(f_t)
        if res < tol:
            return WorstCaseObservation(values=target, direction=theta,
                                        iterations=it, residual=res)
    theta, target, res = residual_of(f_t)
    if res < max(tol, 1e-9):
        return WorstCaseObservation(values=target, direction=theta,
                                    iterations=it, residual=res)
    raise IterationLimitError(
        f"worst-case observation did not converge in {it} iterations",
        last_iterate=f_t, residual=res,
    )


def complementary_slackness_residual(spec, player, own_action, nominal_impact,
                                     eps, wco):
    """Residual of the ball-constraint optimality conditions at a solution.

    The stationarity relation ties the gradient at the worst case to the
    multiplier lam = |grad| / (2 eps); returns the larger of the slackness
    term lam * (eps^2 - |f* - f|^2) and the stationarity defect.
    """
    f = game.as_impact(nominal_impact)
    g = game.derivatives(spec, player, np.asarray(own_action, dtype=float),
                         wco.values).grad_f
    shift = wco.values - f
    norm_g = float(np.linalg.norm(g))
    if eps == 0.0 or norm_g < _DEGENERATE_GRAD:
        # inactive constraint: multiplier zero, shift must vanish
        return float(np.max(np.abs(shift), initial=0.0))
    lam = norm_g / (2.0 * eps)
    slack = abs(lam * (eps**2 - float(shift @ shift)))
    stationarity = float(np.max(np.abs(g + 2.0 * lam * shift)))
    return max(slack, stationarity)


def worst_case_cross_gain(spec, follower, leader, delta):
    """Ball realization of the follower-observes-leader gain used by the leader.

    The leader's view of the follower's impact decreases uniformly in the
    radius: every dimension is shrunk by delta/sqrt(K) and clamped at zero,
    which minimizes the impact the leader believes it has on the follower.
    """
    if delta < 0:
        raise InvalidSpecError("delta must be nonnegative")
    x = spec.cross_gain[follower, leader, :]
    return np.maximum(x - delta / np.sqrt(spec.n_dims), 0.0)
