"""Hierarchy of quantum non-Gaussianity criteria for click counting.

An order-n criterion compares the measured success/error click pair
(R_n, R_{n+1}) of an (n+1)-channel detector against the largest value of
the linear form R_n + a * R_{n+1} attainable by pure squeezed coherent
states.  Finding one penalty weight a < 0 for which the measured form
exceeds the Gaussian-attainable maximum certifies quantum non-Gaussianity.

The Gaussian maximum is computed by a deterministic dense scan over
(amplitude^2, angle, log variance) followed by simplex polish of the best
basins; sweeping a traces the boundary of the Gaussian-attainable region
in the (error, success) plane.  In the weak-signal limit that boundary
follows a closed form built from Hermite-polynomial roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.optimize import minimize

from .detector import (
    ClickProbabilities,
    DetectorConfig,
    click_stats,
    effective_attenuation,
    gaussian_no_click_profile,
)
from .gaussian import SqueezedCoherentParams, no_click_grid

#: Margin above which a witness decision counts as a violation; separates
#: true violations from optimizer noise.
DECISION_TOL = 1e-9

#: Penalty-weight search window (log-spaced); a >= 0 gives a useless bound.
A_MIN = -1e7
A_MAX = -1e-3
A_POINTS = 200

#: Initial optimization box and its expansion policy.
AMP_MAX_START = 10.0
V_MIN_START = 1e-3
_MAX_EXPANSIONS = 4
_POLISH_SEEDS = 6


# ---------------------------------------------------------------------------
# Hermite polynomials and the small-error asymptote
# ---------------------------------------------------------------------------

def hermite(n: int, x: float) -> float:
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    if n < 0:
        raise ValueError(f"order must be >= 0, got {n}")
    if n == 0:
        return 1.0
    h_prev, h = 1.0, 2.0 * x
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h


def hermite_roots(n: int) -> np.ndarray:
    """All real roots of H_n, ascending.

    Eigenvalues of the Gauss-Hermite companion matrix, sharpened by one
    Newton step through the recurrence (H_n' = 2 n H_{n-1}).
    """
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    nodes = hermgauss(n)[0]
    polished = []
    for x in nodes:
        deriv = 2.0 * n * hermite(n - 1, x)
        if deriv != 0.0:
            x = x - hermite(n, x) / deriv
        polished.append(x)
    return np.array(polished)


def selected_hermite_root(order: int) -> float:
    """The root x of H_{order+1} entering the asymptotic threshold.

    Among the order+1 candidate roots the one maximizing H_order(x)^4 is
    selected (ties between mirror roots broken toward the positive one);
    the choice is validated against the numerically computed threshold
    curve in the test suite.
    """
    roots = hermite_roots(order + 1)
    best = None
    for x in roots:
        h4 = hermite(order, x) ** 4
        if best is None or h4 > best[0] or (h4 == best[0] and x > best[1]):
            best = (h4, x)
    return best[1]


def approx_threshold_coefficient(order: int) -> float:
    """Coefficient C_n of the small-error bound R_n^{n+2} > C_n R_{n+1}^n."""
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    x = selected_hermite_root(order)
    return hermite(order, x) ** 4 / (2.0 * (order + 1) ** 3) ** order


def asymptotic_success_bound(order: int, error: float) -> float:
    """Success bound (C_n * error^n)^(1/(n+2)) of the weak-signal asymptote."""
    if error < 0:
        raise ValueError(f"error probability must be >= 0, got {error}")
    c = approx_threshold_coefficient(order)
    return (c * error**order) ** (1.0 / (order + 2))


# ---------------------------------------------------------------------------
# The linear form and its Gaussian maximum
# ---------------------------------------------------------------------------

def _check_order(order: int) -> int:
    if order < 1:
        raise ValueError(f"criterion order must be >= 1, got {order}")
    return int(order)


def _resolve_config(order: int, config: Optional[DetectorConfig]) -> DetectorConfig:
    if config is None:
        return DetectorConfig.symmetric(order + 1)
    if config.channels != order + 1:
        raise ValueError(
            f"order {order} requires {order + 1} detector channels, got {config.channels}"
        )
    return config


def functional_value(
    a: float,
    order: int,
    state: SqueezedCoherentParams,
    config: Optional[DetectorConfig] = None,
) -> float:
    """R_n(state) + a * R_{n+1}(state) for the given detector."""
    order = _check_order(order)
    config = _resolve_config(order, config)
    stats = click_stats(gaussian_no_click_profile(state, config), order)
    return stats.success + a * stats.error


def _functional_terms(a: float, order: int, config: DetectorConfig):
    """Express R_n + a R_{n+1} as sum_i c_i * Q(t_i) over attenuations t_i.

    Symmetric detectors collapse to one term per group size; otherwise the
    inclusion-exclusion subsets of the designated success group (channels
    0..n-1) and of the full channel set are enumerated.
    """
    n = order
    if config.is_symmetric:
        per = config.splitting[0] * config.efficiencies[0]
        ts = np.arange(n + 2) * per
        coefs = np.array(
            [(-1.0) ** k * (comb(n, k) + a * comb(n + 1, k)) for k in range(n + 2)]
        )
        return coefs, ts
    acc: dict = {}
    for size, weight in ((n, 1.0), (n + 1, a)):
        members = tuple(range(size))
        for mask in range(1 << size):
            chosen = tuple(members[i] for i in range(size) if mask >> i & 1)
            t = effective_attenuation(config, chosen)
            acc[t] = acc.get(t, 0.0) + weight * (-1.0) ** len(chosen)
    ts = np.array(sorted(acc))
    coefs = np.array([acc[t] for t in ts])
    return coefs, ts


def _form_on_grid(coefs, ts, amp, angle, min_var):
    """Vectorized linear-form value at broadcastable state coordinates."""
    q = no_click_grid(
        np.asarray(amp)[..., None],
        np.asarray(angle)[..., None],
        np.asarray(min_var)[..., None],
        ts,
    )
    return q @ coefs


@dataclass(frozen=True)
class GaussianMax:
    """Maximum of the linear form over pure Gaussian states."""

    value: float
    state: SqueezedCoherentParams


def _seed_mesh(amp_max: float, v_min: float, refine: int):
    """Deterministic scan mesh over (amp^2, angle, min_var)."""
    amp2 = np.concatenate([[0.0], np.geomspace(1e-6, amp_max**2, 44 * refine)])
    angle = np.linspace(0.0, math.pi / 2, 9 * refine)
    s_max = -0.5 * math.log(v_min)
    squeeze = np.concatenate([[0.0], np.geomspace(1e-6, s_max, 24 * refine)])
    min_var = np.exp(-2.0 * squeeze)
    return amp2, angle, min_var


def _weak_manifold(amp_max: float, v_min: float, refine: int):
    """Seed points along the weak-signal ridge.

    At strongly negative penalty weights the maximizer is a faint state
    whose squeezing nearly cancels the multiphoton content of the
    displacement: amp^2 and the squeeze parameter are locked to a ratio of
    order one.  A rectangular mesh cannot resolve that cancellation, so
    the (amp^2, squeeze/amp^2) plane is seeded explicitly, with the
    displacement on either quadrature axis.
    """
    eps = np.geomspace(1e-9, min(1.0, amp_max**2), 36 * refine)
    ratios = np.array(
        [0.02, 0.05, 0.1, 0.2, 1.0 / 3.0, 0.5, 0.75, 1.0, 1.3, 1.8, 2.5, 4.0]
    )
    e_grid, r_grid = np.meshgrid(eps, ratios, indexing="ij")
    s_max = -0.5 * math.log(v_min)
    squeeze = np.minimum(e_grid * r_grid, s_max).ravel()
    amp2 = np.tile(e_grid.ravel(), 2)
    min_var = np.tile(np.exp(-2.0 * squeeze), 2)
    half = e_grid.size
    angle = np.concatenate([np.zeros(half), np.full(half, math.pi / 2)])
    return amp2, angle, min_var


def _search_box(coefs, ts, amp_max: float, v_min: float, refine: int):
    """Best (value, amp, angle, min_var) over the box, scan + simplex polish."""
    amp2, angle, min_var = _seed_mesh(amp_max, v_min, refine)
    g_amp2, g_angle, g_v = np.meshgrid(amp2, angle, min_var, indexing="ij")
    w_amp2, w_angle, w_v = _weak_manifold(amp_max, v_min, refine)
    flat_amp2 = np.concatenate([g_amp2.ravel(), w_amp2])
    flat_angle = np.concatenate([g_angle.ravel(), w_angle])
    flat_v = np.concatenate([g_v.ravel(), w_v])
    values = _form_on_grid(coefs, ts, np.sqrt(flat_amp2), flat_angle, flat_v)

    # Top seeds, greedily separated in normalized coordinates, plus the two
    # best ridge points (the ridge collapses to one cell in that metric).
    order_desc = np.argsort(values)[::-1]
    ln_vmin = math.log(v_min)
    seed_idx = []
    seed_pos = []
    for idx in order_desc[: 60 * refine]:
        u = np.array(
            [
                flat_amp2[idx] / amp_max**2,
                flat_angle[idx] / (math.pi / 2),
                math.log(flat_v[idx]) / ln_vmin,
            ]
        )
        if all(np.linalg.norm(u - s) > 0.12 for s in seed_pos):
            seed_idx.append(idx)
            seed_pos.append(u)
        if len(seed_idx) >= _POLISH_SEEDS:
            break
    ridge_start = g_amp2.size
    ridge_order = ridge_start + np.argsort(values[ridge_start:])[::-1]
    seed_idx.extend(ridge_order[:2])

    def objective(u):
        return -float(
            _form_on_grid(coefs, ts, math.sqrt(max(u[0], 0.0)), u[1], math.exp(u[2]))
        )

    bounds = [(0.0, amp_max**2), (0.0, math.pi / 2), (ln_vmin, 0.0)]
    options = {"xatol": 1e-10, "fatol": 1e-15, "maxiter": 800, "maxfev": 1200}
    best_u = None
    best_val = -math.inf
    starts = [
        np.array([flat_amp2[idx], flat_angle[idx], math.log(flat_v[idx])])
        for idx in seed_idx
    ]
    starts.append(np.zeros(3))  # vacuum corner
    for x0 in starts:
        res = minimize(objective, x0, method="Nelder-Mead", bounds=bounds, options=options)
        if -res.fun > best_val:
            best_val = -res.fun
            best_u = res.x
    # One restart from the incumbent guards against a degenerate simplex.
    res = minimize(objective, best_u, method="Nelder-Mead", bounds=bounds, options=options)
    if -res.fun > best_val:
        best_val = -res.fun
        best_u = res.x
    return best_val, math.sqrt(max(best_u[0], 0.0)), best_u[1], math.exp(best_u[2])


def maximize_functional(
    a: float,
    order: int,
    config: Optional[DetectorConfig] = None,
    grid_refinement: int = 1,
) -> GaussianMax:
    """Global maximum of R_n + a R_{n+1} over pure squeezed coherent states.

    Only penalizing weights a < 0 are meaningful: for a >= 0 the supremum
    is 1, approached by bright states, and the call is rejected.  The box
    amp <= amp_max, min_var >= v_min is expanded (doubled) whenever the
    maximizer lands within one percent of those limits, a few times over.

    The result is deterministic for fixed inputs and ``grid_refinement``
    (which scales the scan mesh density; used for self-consistency checks).
    """
    a = float(a)
    if not a < 0:
        raise ValueError(f"penalty weight a must be negative, got {a}")
    order = _check_order(order)
    config = _resolve_config(order, config)
    coefs, ts = _functional_terms(a, order, config)

    amp_max, v_min = AMP_MAX_START, V_MIN_START
    for _ in range(_MAX_EXPANSIONS + 1):
        value, amp, angle, min_var = _search_box(coefs, ts, amp_max, v_min, grid_refinement)
        hit_amp = amp >= 0.99 * amp_max
        hit_v = min_var <= 1.01 * v_min
        if not (hit_amp or hit_v):
            break
        if hit_amp:
            amp_max *= 2.0
        if hit_v:
            v_min /= 2.0
    state = SqueezedCoherentParams(amp, angle, min_var)
    # Report the exact compensated-summation value of the returned state.
    return GaussianMax(value=functional_value(a, order, state, config), state=state)


_BOUND_CACHE: dict = {}


def gaussian_bound(
    a: float, order: int, config: Optional[DetectorConfig] = None
) -> GaussianMax:
    """Memoized :func:`maximize_functional` (the bound is state-independent)."""
    order = _check_order(order)
    config = _resolve_config(order, config)
    key = (order, config.splitting, config.efficiencies, float(a))
    hit = _BOUND_CACHE.get(key)
    if hit is None:
        hit = maximize_functional(a, order, config)
        _BOUND_CACHE[key] = hit
    return hit


# ---------------------------------------------------------------------------
# Threshold curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvePoint:
    """One boundary point of the Gaussian-attainable (error, success) region."""

    error: float
    success: float
    a: float
    state: SqueezedCoherentParams


@dataclass(frozen=True)
class ThresholdCurve:
    """Sampled boundary of the Gaussian-attainable click region."""

    order: int
    points: Tuple[CurvePoint, ...]

    def errors(self) -> np.ndarray:
        return np.array([p.error for p in self.points])

    def successes(self) -> np.ndarray:
        return np.array([p.success for p in self.points])

    def bound_at(self, error: float) -> float:
        """Success bound at the given error, by monotone interpolation."""
        return float(np.interp(error, self.errors(), self.successes()))


def default_a_grid(points: int = A_POINTS) -> np.ndarray:
    """Log-spaced penalty weights from A_MIN to A_MAX, ascending."""
    return -np.geomspace(-A_MIN, -A_MAX, points)


def threshold_curve(
    order: int,
    a_grid: Optional[Sequence[float]] = None,
    config: Optional[DetectorConfig] = None,
) -> ThresholdCurve:
    """Boundary of the Gaussian-attainable region for an order-n criterion.

    Each penalty weight contributes the click pair of its maximizer state;
    the resulting parametric points are deduplicated and sorted by error.
    """
    order = _check_order(order)
    config = _resolve_config(order, config)
    grid = default_a_grid() if a_grid is None else np.asarray(a_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("a_grid must be nonempty")
    if np.any(grid >= 0):
        raise ValueError("a_grid entries must all be negative")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("a_grid must be sorted ascending")
    points = []
    for a in grid:
        best = gaussian_bound(a, order, config)
        stats = click_stats(gaussian_no_click_profile(best.state, config), order)
        points.append(CurvePoint(stats.error, stats.success, float(a), best.state))
    points.sort(key=lambda p: (p.error, p.success))
    unique = [points[0]]
    for p in points[1:]:
        last = unique[-1]
        if abs(p.error - last.error) > 1e-15 or abs(p.success - last.success) > 1e-15:
            unique.append(p)
    return ThresholdCurve(order=order, points=tuple(unique))


# ---------------------------------------------------------------------------
# The witness decision
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessResult:
    """Outcome of a quantum non-Gaussianity test on one click pair."""

    witnessed: bool
    best_a: float
    margin: float
    threshold_success: float


def _concave_upper_bound(a_vals: np.ndarray, margins: np.ndarray, i: int) -> float:
    """Upper bound on a concave margin near grid index i via extended secants."""
    m = margins
    if 0 < i < len(m) - 1:
        s_left = (m[i] - m[i - 1]) / (a_vals[i] - a_vals[i - 1])
        s_right = (m[i + 1] - m[i]) / (a_vals[i + 1] - a_vals[i])
        return m[i] + max(
            s_left * (a_vals[i + 1] - a_vals[i]),
            -s_right * (a_vals[i] - a_vals[i - 1]),
            0.0,
        )
    if i == 0 and len(m) > 2:
        s = (m[2] - m[1]) / (a_vals[2] - a_vals[1])
        return max(m[0], m[1] + s * (a_vals[0] - a_vals[1]))
    if i == len(m) - 1 and len(m) > 2:
        s = (m[-2] - m[-3]) / (a_vals[-2] - a_vals[-3])
        return max(m[-1], m[-2] + s * (a_vals[-1] - a_vals[-2]))
    return math.inf


def witness(
    stats,
    order: int,
    config: Optional[DetectorConfig] = None,
) -> WitnessResult:
    """Decide quantum non-Gaussianity of a measured click pair.

    Scans the penalty weight over a fixed log grid, exploits concavity of
    the margin in a (the Gaussian bound is a pointwise maximum of linear
    functions, hence convex) to either settle early or refine the best
    bracket by golden-section search.  The margin must exceed
    ``DECISION_TOL`` for a positive verdict.
    """
    order = _check_order(order)
    config = _resolve_config(order, config)
    if isinstance(stats, ClickProbabilities):
        success, error = stats.success, stats.error
    else:
        success, error = stats
    if not -1e-9 <= success <= 1 + 1e-9 or not -1e-9 <= error <= 1 + 1e-9:
        raise ValueError(f"click probabilities outside [0, 1]: {success!r}, {error!r}")
    success = min(max(success, 0.0), 1.0)
    error = min(max(error, 0.0), 1.0)

    a_vals = default_a_grid()
    evaluated = {}

    def margin_at(a: float) -> float:
        if a not in evaluated:
            evaluated[a] = gaussian_bound(a, order, config).value
        return success + a * error - evaluated[a]

    margins = np.array([margin_at(a) for a in a_vals])
    i_best = int(np.argmax(margins))
    grid_max = margins[i_best]

    refine = True
    if grid_max <= DECISION_TOL:
        upper = _concave_upper_bound(a_vals, margins, i_best)
        if upper <= 0.0:
            refine = False

    if refine:
        lo = a_vals[max(i_best - 1, 0)]
        hi = a_vals[min(i_best + 1, len(a_vals) - 1)]
        if lo < hi:
            # Golden-section in u = ln(-a); unimodality survives the
            # monotone reparametrization.
            u_lo, u_hi = math.log(-hi), math.log(-lo)
            inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
            u1 = u_hi - inv_phi * (u_hi - u_lo)
            u2 = u_lo + inv_phi * (u_hi - u_lo)
            f1, f2 = margin_at(-math.exp(u1)), margin_at(-math.exp(u2))
            for _ in range(20):
                if u_hi - u_lo < 1e-3:
                    break
                if f1 < f2:
                    u_lo, u1, f1 = u1, u2, f2
                    u2 = u_lo + inv_phi * (u_hi - u_lo)
                    f2 = margin_at(-math.exp(u2))
                else:
                    u_hi, u2, f2 = u2, u1, f1
                    u1 = u_hi - inv_phi * (u_hi - u_lo)
                    f1 = margin_at(-math.exp(u1))

    best_a, best_margin = None, -math.inf
    threshold = math.inf
    for a, bound in evaluated.items():
        m = success + a * error - bound
        if m > best_margin:
            best_a, best_margin = a, m
        threshold = min(threshold, bound - a * error)
    threshold = min(max(threshold, 0.0), 1.0)
    return WitnessResult(
        witnessed=bool(best_margin > DECISION_TOL),
        best_a=float(best_a),
        margin=float(best_margin),
        threshold_success=float(threshold),
    )
