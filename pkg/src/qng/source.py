"""Click statistics of an ensemble of single-photon emitters.

Models light from m independent two-level emitters, each radiating at most
one photon with overall efficiency eta, contaminated by Poissonian
background noise of mean nbar per emitter, attenuated by a channel of
transmission T, and subject to exponential escape from the trap with
storage time tau_s.  Provides exact click statistics on a balanced
multi-channel detector, the weak-signal closed forms, and bisection
searches for the detectability thresholds in efficiency, loss, and
measurement duration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional

from scipy.integrate import quad

from .criteria import hermite, selected_hermite_root, witness
from .detector import ClickProbabilities, NoClickProfile, click_stats

#: Absolute accuracy of the escape-averaged no-click probabilities.
QUAD_TOL = 1e-12

_MODES = ("ideal", "noisy", "escape")

#: Bisection brackets and resolutions for the threshold searches.
ETA_BRACKET = (1e-4, 1.0)
LOSS_BRACKET = (1e-4, 1.0)
DURATION_SPAN = 10.0  # in units of the storage time
SEARCH_TOL = 1e-4


@dataclass(frozen=True)
class EnsembleParams:
    """Source of m independent single-photon emitters.

    Args:
        emitters: number of emitters m.
        efficiency: overall emission-plus-detection efficiency eta per
            emitter, in [0, 1].
        noise_mean: mean photon number nbar of the Poissonian background
            per emitter (total noise mean is m * nbar).
        loss: channel transmission T in [0, 1]; attenuates both the
            signal (eta -> T eta) and the noise (nbar -> T nbar).
        storage_time: emitter escape constant tau_s (may be inf).
        window_start: measurement window start t_0.
        window_length: measurement window duration t_M.
    """

    emitters: int
    efficiency: float
    noise_mean: float = 0.0
    loss: float = 1.0
    storage_time: float = math.inf
    window_start: float = 0.0
    window_length: float = 0.0

    def __post_init__(self):
        if self.emitters < 1:
            raise ValueError(f"emitters must be >= 1, got {self.emitters}")
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError(f"efficiency must lie in [0, 1], got {self.efficiency}")
        if self.noise_mean < 0.0:
            raise ValueError(f"noise_mean must be >= 0, got {self.noise_mean}")
        if not 0.0 <= self.loss <= 1.0:
            raise ValueError(f"loss transmission must lie in [0, 1], got {self.loss}")
        if not self.storage_time > 0.0:
            raise ValueError(f"storage_time must be positive, got {self.storage_time}")
        if self.window_start < 0.0 or self.window_length < 0.0:
            raise ValueError("measurement window must be nonnegative")

    @property
    def total_noise_mean(self) -> float:
        return self.emitters * self.noise_mean


def load_ensemble_params(source) -> EnsembleParams:
    """Read ensemble parameters from a JSON file, path, or dict.

    Keys: m, eta, nbar, T, tau_s (number or "inf"), t0, tM; all but m and
    eta are optional.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = source
    if not isinstance(data, dict):
        raise ValueError("ensemble parameters must be a JSON object")
    try:
        m = int(data["m"])
        eta = float(data["eta"])
    except KeyError as exc:
        raise ValueError(f"ensemble parameters missing key {exc}") from exc
    tau = data.get("tau_s", math.inf)
    if isinstance(tau, str):
        if tau.lower() != "inf":
            raise ValueError(f'tau_s must be a number or "inf", got {tau!r}')
        tau = math.inf
    return EnsembleParams(
        emitters=m,
        efficiency=eta,
        noise_mean=float(data.get("nbar", 0.0)),
        loss=float(data.get("T", 1.0)),
        storage_time=float(tau),
        window_start=float(data.get("t0", 0.0)),
        window_length=float(data.get("tM", 0.0)),
    )


def _check_group(k: int, channels: int) -> None:
    if not 0 <= k <= channels:
        raise ValueError(f"group size {k} out of range 0..{channels}")


def ideal_no_click(params: EnsembleParams, k: int, channels: int) -> float:
    """No-click probability of k out of N balanced channels, ideal source.

    (1 - eta k / N)^m with the channel loss folded into the efficiency.
    """
    _check_group(k, channels)
    eta = params.loss * params.efficiency
    return (1.0 - eta * k / channels) ** params.emitters


def noisy_no_click(params: EnsembleParams, k: int, channels: int) -> float:
    """Ideal no-click probability times the Poissonian background factor."""
    _check_group(k, channels)
    nbar = params.loss * params.noise_mean
    return ideal_no_click(params, k, channels) * math.exp(
        -params.emitters * nbar * k / channels
    )


def escape_averaged_no_click(params: EnsembleParams, k: int, channels: int) -> float:
    """No-click probability averaged over a window of emitter escape.

    Each emitter survives in the trap with probability exp(-t / tau_s);
    the instantaneous no-click probability is averaged uniformly over the
    measurement window [t_0, t_0 + t_M] (adaptive quadrature, absolute
    accuracy ``QUAD_TOL``).  Degenerate windows return the instantaneous
    value at t_0; an infinite storage time reduces to the noisy model.
    """
    _check_group(k, channels)
    if math.isinf(params.storage_time):
        return noisy_no_click(params, k, channels)
    eta = params.loss * params.efficiency
    nbar = params.loss * params.noise_mean
    m = params.emitters
    tau = params.storage_time
    frac = k / channels

    def integrand(t: float) -> float:
        survive = math.exp(-t / tau)
        return (1.0 - eta * frac * survive) ** m * math.exp(-m * frac * nbar * survive)

    if params.window_length == 0.0:
        return integrand(params.window_start)
    t0 = params.window_start
    t1 = t0 + params.window_length
    value, _ = quad(
        integrand, t0, t1, epsabs=QUAD_TOL * params.window_length, epsrel=1e-13, limit=200
    )
    return value / params.window_length


def source_no_click_profile(
    params: EnsembleParams, channels: int, mode: str = "ideal"
) -> NoClickProfile:
    """Size-indexed no-click profile of the source on a balanced detector."""
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")
    fn = {
        "ideal": ideal_no_click,
        "noisy": noisy_no_click,
        "escape": escape_averaged_no_click,
    }[mode]
    return NoClickProfile(channels, size_fn=lambda k: fn(params, k, channels))


def source_click_stats(
    params: EnsembleParams, order: int, mode: str = "ideal"
) -> ClickProbabilities:
    """Success/error probabilities of the source under an order-n criterion."""
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    profile = source_no_click_profile(params, order + 1, mode)
    return click_stats(profile, order)


# ---------------------------------------------------------------------------
# Weak-signal closed forms
# ---------------------------------------------------------------------------

class ApproxClickRates(NamedTuple):
    """Leading-order success/error rates and the validity ratio m*nbar/eta."""

    success: float
    error: float
    validity_ratio: float


def approx_success_error(m: int, eta: float, nbar: float) -> ApproxClickRates:
    """Weak-signal approximation of (R_m, R_{m+1}) on an (m+1)-channel detector.

    R_m ~ m!/(m+1)^m eta^m, R_{m+1} ~ R_m * m * nbar; valid for
    m * nbar << eta (the ratio is reported, not enforced).
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    base = math.factorial(m) / (m + 1) ** m * eta**m
    ratio = m * nbar / eta if eta > 0 else math.inf
    return ApproxClickRates(base, base * m * nbar, ratio)


def _hermite_factor(m: int, power: float) -> float:
    """|H_m(x)|^power at the selected root x of H_{m+1} (power is even/m)."""
    x = selected_hermite_root(m)
    return (hermite(m, x) ** 2) ** (power / 2.0)


def min_efficiency_analytic(m: int, nbar: float) -> float:
    """Closed-form lower bound on eta for detectability under noise nbar.

    eta > |H_m(x)|^{2/m} / (m!)^{1/m} * sqrt(m nbar / (2 (m + 1))) with x
    the selected root of H_{m+1}; asymptotic, valid for m * nbar << eta.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    coeff = _hermite_factor(m, 2.0 / m) / math.factorial(m) ** (1.0 / m)
    return coeff * math.sqrt(m * nbar / (2.0 * (m + 1)))


def loss_tolerance_analytic(m: int, eta: float, nbar: float) -> float:
    """Closed-form lower bound on the channel transmission T.

    T > m nbar |H_m(x)|^{4/m} / (2 eta^2 (m+1) (m!)^{2/m}); asymptotic,
    valid for nbar * T << 1.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return (
        m
        * nbar
        * _hermite_factor(m, 4.0 / m)
        / (2.0 * eta**2 * (m + 1) * math.factorial(m) ** (2.0 / m))
    )


class DurationBound(NamedTuple):
    """Analytic window-length bound and its expansion-validity ratios."""

    t_max: float
    quadratic_ratio: float
    quartic_ratio: float


def max_duration_analytic(m: int, eta: float, nbar: float, tau_s: float) -> DurationBound:
    """Closed-form upper bound on the measurement duration under escape.

    t_M < (tau_s / 2) [1 - m nbar |H_m(x)|^{4/m} / (4 (m+1) (m!)^{2/m} eta^2)].
    The small-time expansion ratios (t/tau)^2/12 and m^3 (t/tau)^4/1440,
    evaluated at the bound, are reported alongside.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if not tau_s > 0:
        raise ValueError(f"tau_s must be positive, got {tau_s}")
    noise_term = (
        m
        * nbar
        * _hermite_factor(m, 4.0 / m)
        / (4.0 * (m + 1) * math.factorial(m) ** (2.0 / m) * eta**2)
    )
    bracket = 1.0 - noise_term
    if bracket <= 0.0:
        raise ValueError(
            f"noise term {noise_term:.4g} >= 1: not detectable for any duration"
        )
    t_max = 0.5 * tau_s * bracket
    x = t_max / tau_s
    return DurationBound(t_max, x**2 / 12.0, m**3 * x**4 / 1440.0)


# ---------------------------------------------------------------------------
# Bisected detectability thresholds
# ---------------------------------------------------------------------------

def _bisect_flip(predicate, lo: float, hi: float, tol: float, rising: bool):
    """Smallest (rising) or largest (falling) argument where predicate holds.

    Assumes a single flip inside [lo, hi].  Returns None when the
    predicate fails on the whole bracket and the sentinel edge when it
    holds everywhere.
    """
    hold_lo = predicate(lo)
    hold_hi = predicate(hi)
    good_edge, bad_edge = (hi, lo) if rising else (lo, hi)
    if rising and hold_lo:
        return lo
    if not rising and hold_hi:
        return hi
    if rising and not hold_hi:
        return None
    if not rising and not hold_lo:
        return None
    good, bad = good_edge, bad_edge
    while abs(good - bad) > tol:
        mid = 0.5 * (good + bad)
        if predicate(mid):
            good = mid
        else:
            bad = mid
    return good


def min_detectable_efficiency(
    m: int, order: int, nbar: float, tol: float = SEARCH_TOL
) -> Optional[float]:
    """Smallest efficiency at which the order-n witness fires, or None.

    Bisection over eta in [1e-4, 1]; returns the bracket floor when the
    source is witnessed everywhere and None when it never is.
    """
    def witnessed(eta: float) -> bool:
        params = EnsembleParams(emitters=m, efficiency=eta, noise_mean=nbar)
        return witness(source_click_stats(params, order, "noisy"), order).witnessed

    return _bisect_flip(witnessed, *ETA_BRACKET, tol=tol, rising=True)


def max_tolerated_loss(
    m: int, eta: float, nbar: float, order: int, tol: float = SEARCH_TOL
) -> Optional[float]:
    """Smallest channel transmission keeping the witness positive, or None."""

    def witnessed(transmission: float) -> bool:
        params = EnsembleParams(
            emitters=m, efficiency=eta, noise_mean=nbar, loss=transmission
        )
        return witness(source_click_stats(params, order, "noisy"), order).witnessed

    return _bisect_flip(witnessed, *LOSS_BRACKET, tol=tol, rising=True)


def max_measurement_duration(
    m: int,
    eta: float,
    nbar: float,
    tau_s: float,
    order: int,
    tol: Optional[float] = None,
) -> Optional[float]:
    """Longest window over which escape still permits the witness.

    Bisection over t_M in [0, 10 tau_s] to 1e-4 tau_s.  Returns inf when
    the witness holds at the top of the bracket (unbounded within the
    probed range) and None when it fails already for an instantaneous
    window.
    """
    if not tau_s > 0 or math.isinf(tau_s):
        raise ValueError(f"tau_s must be positive and finite, got {tau_s}")
    tol = 1e-4 * tau_s if tol is None else tol

    def witnessed(window: float) -> bool:
        params = EnsembleParams(
            emitters=m,
            efficiency=eta,
            noise_mean=nbar,
            storage_time=tau_s,
            window_length=window,
        )
        return witness(source_click_stats(params, order, "escape"), order).witnessed

    top = DURATION_SPAN * tau_s
    result = _bisect_flip(witnessed, 0.0, top, tol=tol, rising=False)
    # The bracket-top sentinel means witnessed everywhere probed.
    return math.inf if result == top else result
