"""Pure squeezed coherent states and their no-click statistics.

A single-mode pure Gaussian state is parametrized by the magnitude of its
coherent amplitude, the angle the amplitude holds with the minimal-variance
axis, and the minimal quadrature variance ``V`` in shot-noise units
(``V = 1`` for vacuum and coherent states, anti-squeezed variance ``1/V``).

Two independent routes to the no-click probability of a lossy on/off
detector are provided:

* :func:`no_click_expectation` evaluates a closed form obtained from
  Gaussian phase-space calculus (overlap with a thermal-like operator),
* :func:`no_click_oracle` sums the truncated photon-number distribution.

The second route exists purely as a cross-check of the first and is used
in the test suite; production code paths use the closed form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

#: Allowed norm deficit of a truncated Fock expansion.
TAIL_TOL = 1e-12

_ADAPTIVE_START = 32
_CUTOFF_LIMIT = 1 << 20


class TruncationError(RuntimeError):
    """A truncated Fock expansion could not reach the required norm."""


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class SqueezedCoherentParams:
    """A pure squeezed coherent state.

    Args:
        amp: coherent amplitude magnitude, >= 0.
        angle: angle (radians) between the amplitude and the
            minimal-variance axis.  Any real value is accepted and is
            canonicalized into [0, pi/2]; click statistics are invariant
            under the folding.
        min_var: minimal quadrature variance V > 0 in shot-noise units.
    """

    amp: float
    angle: float
    min_var: float

    def __post_init__(self):
        amp = _require_finite("amp", self.amp)
        angle = _require_finite("angle", self.angle)
        min_var = _require_finite("min_var", self.min_var)
        if amp < 0:
            raise ValueError(f"amp must be nonnegative, got {amp}")
        if min_var <= 0:
            raise ValueError(f"min_var must be positive, got {min_var}")
        # Fold the angle into [0, pi/2]: phi and -phi are mirror images,
        # phi and pi - phi differ by a parity flip of the amplitude; both
        # leave every photon-number and click observable unchanged.
        angle = math.fmod(angle, math.pi)
        if angle < 0:
            angle += math.pi
        if angle > math.pi / 2:
            angle = math.pi - angle
        object.__setattr__(self, "amp", amp)
        object.__setattr__(self, "angle", angle)
        object.__setattr__(self, "min_var", min_var)

    @classmethod
    def vacuum(cls) -> "SqueezedCoherentParams":
        return cls(0.0, 0.0, 1.0)

    @classmethod
    def coherent(cls, amp: float) -> "SqueezedCoherentParams":
        return cls(amp, 0.0, 1.0)

    @classmethod
    def squeezed_vacuum(cls, min_var: float) -> "SqueezedCoherentParams":
        return cls(0.0, 0.0, min_var)

    @property
    def squeeze_param(self) -> float:
        """Squeezing parameter r with min_var = exp(-2 r)."""
        return -0.5 * math.log(self.min_var)

    @property
    def is_vacuum(self) -> bool:
        return self.amp == 0.0 and self.min_var == 1.0


@dataclass(frozen=True, eq=False)
class FockVector:
    """Photon-number amplitudes c_0 .. c_K of a truncated pure state."""

    coefficients: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=complex)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def cutoff(self) -> int:
        return self.coefficients.size - 1

    def probabilities(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))


def _fock_amplitudes(state: SqueezedCoherentParams, size: int) -> np.ndarray:
    """Amplitudes of the displaced squeezed vacuum up to index size - 1.

    Uses the two-term recurrence obtained from annihilating the state with
    the transformed lowering operator; the recurrence is forward-stable
    because both fundamental solutions decay at the same asymptotic rate.
    """
    r = state.squeeze_param
    alpha = state.amp * cmath.exp(1j * state.angle)
    ch = math.cosh(r)
    sh = math.sinh(r)
    th = math.tanh(r)
    gamma = alpha * ch + alpha.conjugate() * sh
    c = np.zeros(size, dtype=complex)
    c[0] = cmath.exp(-0.5 * abs(alpha) ** 2 - 0.5 * alpha.conjugate() ** 2 * th) / math.sqrt(ch)
    if size > 1:
        c[1] = gamma * c[0] / ch
    for n in range(1, size - 1):
        c[n + 1] = (gamma * c[n] - sh * math.sqrt(n) * c[n - 1]) / (ch * math.sqrt(n + 1))
    return c


def fock_coefficients(
    state: SqueezedCoherentParams,
    cutoff: int = 0,
    tail_tol: float = TAIL_TOL,
) -> FockVector:
    """Expand a squeezed coherent state in the photon-number basis.

    Args:
        state: state parameters.
        cutoff: highest photon number kept.  The sentinel 0 requests an
            adaptive cutoff, doubled until the truncated norm is within
            ``tail_tol`` of one.
        tail_tol: allowed norm deficit of the truncation.

    Raises:
        TruncationError: an explicit cutoff leaves more than ``tail_tol``
            of probability in the tail, or the adaptive search exceeds its
            size limit.
    """
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")
    if cutoff:
        coeffs = _fock_amplitudes(state, cutoff + 1)
        deficit = 1.0 - float(np.sum(np.abs(coeffs) ** 2))
        if deficit > tail_tol:
            raise TruncationError(
                f"cutoff {cutoff} leaves tail mass {deficit:.3e} > {tail_tol:.1e}"
            )
        return FockVector(coeffs)
    size = _ADAPTIVE_START
    while size <= _CUTOFF_LIMIT:
        coeffs = _fock_amplitudes(state, size + 1)
        deficit = 1.0 - float(np.sum(np.abs(coeffs) ** 2))
        if deficit <= tail_tol:
            return FockVector(coeffs)
        size *= 2
    raise TruncationError(
        f"no cutoff below {_CUTOFF_LIMIT} reaches tail tolerance {tail_tol:.1e}"
    )


def photon_number_distribution(
    state: SqueezedCoherentParams,
    cutoff: int = 0,
    tail_tol: float = TAIL_TOL,
) -> np.ndarray:
    """Photon-number probabilities p_n = |c_n|^2 of the truncated state."""
    return fock_coefficients(state, cutoff, tail_tol).probabilities()


def _check_attenuation(attenuation: float) -> float:
    t = float(attenuation)
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"attenuation must lie in [0, 1], got {attenuation!r}")
    return t


def no_click_expectation(state: SqueezedCoherentParams, attenuation: float) -> float:
    """No-click probability of an on/off detector seeing fraction t of the state.

    Closed form for the expectation of (1 - t)^n over the photon-number
    distribution, evaluated through the Gaussian covariance formalism:
    the expectation equals the overlap with a thermal-shaped operator of
    mean (1 - t)/t, which reduces to a two-by-two determinant and a
    displacement-dependent exponent.
    """
    t = _check_attenuation(attenuation)
    v = state.min_var
    # Variance sums along and across the squeezing axis, scaled by t;
    # grouped so that v = 1 stays exact.
    d_min = 2.0 + t * (v - 1.0)
    d_max = 2.0 * v + t * (1.0 - v)
    pref = 2.0 * math.sqrt(v) / math.sqrt(d_min * d_max)
    cos_phi = math.cos(state.angle)
    sin_phi = math.sin(state.angle)
    expo = -2.0 * state.amp**2 * t * (cos_phi**2 / d_min + v * sin_phi**2 / d_max)
    return pref * math.exp(expo)


def no_click_grid(
    amp: np.ndarray,
    angle: np.ndarray,
    min_var: np.ndarray,
    attenuation: np.ndarray,
) -> np.ndarray:
    """Vectorized form of :func:`no_click_expectation` (broadcasting inputs).

    Identical formula to the scalar version; used by grid scans and
    optimizers where per-call overhead matters.
    """
    amp = np.asarray(amp, dtype=float)
    v = np.asarray(min_var, dtype=float)
    phi = np.asarray(angle, dtype=float)
    t = np.asarray(attenuation, dtype=float)
    d_min = 2.0 + t * (v - 1.0)
    d_max = 2.0 * v + t * (1.0 - v)
    pref = 2.0 * np.sqrt(v) / np.sqrt(d_min * d_max)
    expo = -2.0 * amp**2 * t * (np.cos(phi) ** 2 / d_min + v * np.sin(phi) ** 2 / d_max)
    return pref * np.exp(expo)


def no_click_oracle(
    state: SqueezedCoherentParams,
    attenuation: float,
    cutoff: int = 0,
    tail_tol: float = TAIL_TOL,
) -> float:
    """Truncated-Fock evaluation of the no-click probability.

    Sums p_n (1 - t)^n over the truncated photon-number distribution.
    Exists as an independent verification path for
    :func:`no_click_expectation`; not meant for hot loops.
    """
    t = _check_attenuation(attenuation)
    probs = photon_number_distribution(state, cutoff, tail_tol)
    weights = (1.0 - t) ** np.arange(probs.size)
    return float(np.dot(probs, weights))
