"""Scalar search, projection and sampling helpers used by the solvers."""

import numpy as np

_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(fn, lo, hi, tol=1e-9):
    """Argmax of a unimodal scalar function on [lo, hi] by golden section."""
    a, b = float(lo), float(hi)
    if b - a <= tol:
        return 0.5 * (a + b)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def maximize_scalar(fn, lo, hi, coarse_tol=1e-7, foc_tol=1e-12, deriv_step=1e-5,
                    flat_tol=1e-12, scan=0):
    """High-accuracy scalar maximization: golden section + bisection on the FOC.

    Golden section localizes the maximum; a sign bisection on the central
    finite-difference derivative then refines interior optima well past the
    sqrt(machine-eps) limit of value-only comparisons.  Optima at the box
    edges are snapped onto them (the derivative keeps pointing outward there).
    When the objective is flat (within flat_tol) between the optimum and the
    lower bound, the smaller action wins the tie.

    `scan` > 0 first evaluates that many uniform points and restricts the
    golden bracket to the best one's neighborhood: insurance against
    multimodal objectives (a leader that can either coexist with or crush a
    follower has two local maxima).
    """
    lo, hi = float(lo), float(hi)
    if hi - lo <= foc_tol:
        return lo
    g_lo, g_hi = lo, hi
    if scan > 2:
        xs = np.linspace(lo, hi, int(scan))
        vals = [fn(x) for x in xs]
        best = int(np.argmax(vals))
        g_lo = xs[max(best - 1, 0)]
        g_hi = xs[min(best + 1, len(xs) - 1)]
    x = golden_section_max(fn, g_lo, g_hi, tol=coarse_tol)
    h = min(deriv_step * max(1.0, abs(x)), 0.25 * (hi - lo))

    def deriv(t):
        return fn(t + h) - fn(t - h)

    near = max(20.0 * coarse_tol, 2.0 * h)
    if x - lo <= near and deriv(lo + h) <= 0.0:
        return lo
    if hi - x <= near and deriv(hi - h) >= 0.0:
        x = hi
    else:
        # bracket the FOC root around the golden-section estimate
        left = max(lo + h, x - 10.0 * coarse_tol)
        right = min(hi - h, x + 10.0 * coarse_tol)
        if left < right:
            dl, dr = deriv(left), deriv(right)
            if dl > 0.0 > dr:
                while right - left > foc_tol:
                    mid = 0.5 * (left + right)
                    if deriv(mid) > 0.0:
                        left = mid
                    else:
                        right = mid
                x = 0.5 * (left + right)
    x = min(max(x, lo), hi)
    if x > lo and fn(lo) >= fn(x) - flat_tol:
        return lo
    return x


def bisect_increasing(fn, lo, hi, target, tol=1e-13, max_iter=200):
    """Root of the nondecreasing function fn(x) = target on [lo, hi]."""
    a, b = float(lo), float(hi)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        mid = 0.5 * (a + b)
        if fn(mid) < target:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def project_box_budget(z, lo, hi, budget):
    """Euclidean projection onto {lo <= a <= hi, sum(a) <= budget}.

    Standard dual bisection on the uniform shift: if the box-clipped point
    already satisfies the budget it is returned, otherwise the shift mu with
    sum(clip(z - mu)) = budget is found (the sum is continuous and
    nonincreasing in mu).
    """
    z = np.asarray(z, dtype=float)
    clipped = np.clip(z, lo, hi)
    total = clipped.sum()
    if total <= budget or np.isinf(budget):
        return clipped
    lo_sum = np.clip(z - (np.max(z - lo) + 1.0), lo, hi).sum()
    if lo_sum >= budget:  # budget below the box floor: floor is the closest point
        return np.broadcast_to(lo, z.shape).copy() if np.ndim(lo) else np.full_like(z, lo)
    mu_lo, mu_hi = 0.0, float(np.max(z - lo) + 1.0)
    for _ in range(100):
        mu = 0.5 * (mu_lo + mu_hi)
        if np.clip(z - mu, lo, hi).sum() > budget:
            mu_lo = mu
        else:
            mu_hi = mu
    return np.clip(z - 0.5 * (mu_lo + mu_hi), lo, hi)


def latin_hypercube(rng, n_samples, n_dims):
    """Latin-hypercube sample in [0, 1]^d: one stratum per sample per dim."""
    cells = np.empty((n_samples, n_dims))
    for d in range(n_dims):
        cells[:, d] = rng.permutation(n_samples)
    return (cells + rng.uniform(size=(n_samples, n_dims))) / n_samples


def box_corners(lo, hi, cap=4096):
    """All corners of the box [lo, hi] (flattened dims), or None past `cap`."""
    lo = np.asarray(lo, dtype=float).ravel()
    hi = np.asarray(hi, dtype=float).ravel()
    d = lo.size
    if 2**d > cap:
        return None
    grid = np.array(np.meshgrid(*[[l, h] for l, h in zip(lo, hi)], indexing="ij"))
    return grid.reshape(d, -1).T
