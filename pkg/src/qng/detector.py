"""Multi-channel on/off detector model and click-probability algebra.

A beam-splitter network routes one optical mode onto N binary detectors.
For a single-mode input, the joint no-click event of a channel group is
equivalent to one on/off detection at an effective attenuation equal to
the summed splitting-times-efficiency of the group; success and error
click probabilities then follow from inclusion-exclusion over the no-click
profile.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb, fsum
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .gaussian import SqueezedCoherentParams, no_click_expectation

#: Allowed numerical overshoot of probabilities outside [0, 1].
BOUNDS_TOL = 1e-9

_SPLITTING_TOL = 1e-12


@dataclass(frozen=True)
class DetectorConfig:
    """Geometry of an N-channel on/off detector.

    splitting[i] is the fraction of the input routed to channel i (sums
    to one); efficiencies[i] is that channel's quantum efficiency.
    """

    splitting: tuple
    efficiencies: tuple

    def __post_init__(self):
        splitting = tuple(float(s) for s in self.splitting)
        efficiencies = tuple(float(e) for e in self.efficiencies)
        if not splitting:
            raise ValueError("detector needs at least one channel")
        if len(splitting) != len(efficiencies):
            raise ValueError(
                f"{len(splitting)} splitting ratios but {len(efficiencies)} efficiencies"
            )
        if any(s < 0 for s in splitting):
            raise ValueError("splitting ratios must be nonnegative")
        total = fsum(splitting)
        if abs(total - 1.0) > _SPLITTING_TOL:
            raise ValueError(f"splitting ratios sum to {total!r}, expected 1")
        if any(not 0.0 <= e <= 1.0 for e in efficiencies):
            raise ValueError("efficiencies must lie in [0, 1]")
        object.__setattr__(self, "splitting", splitting)
        object.__setattr__(self, "efficiencies", efficiencies)

    @classmethod
    def symmetric(cls, channels: int) -> "DetectorConfig":
        """Ideal balanced detector: equal splitting, unit efficiencies."""
        if channels < 1:
            raise ValueError(f"channels must be >= 1, got {channels}")
        return cls((1.0 / channels,) * channels, (1.0,) * channels)

    @property
    def channels(self) -> int:
        return len(self.splitting)

    @property
    def is_symmetric(self) -> bool:
        return (
            len(set(self.splitting)) == 1
            and len(set(self.efficiencies)) == 1
        )


def load_detector_config(source) -> DetectorConfig:
    """Read a detector configuration from a JSON file, path, or dict.

    Accepted shapes: ``{"symmetric": N}`` or
    ``{"channels": N, "splitting": [...], "efficiencies": [...]}``.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    else:
        data = source
    if not isinstance(data, dict):
        raise ValueError("detector configuration must be a JSON object")
    if "symmetric" in data:
        return DetectorConfig.symmetric(int(data["symmetric"]))
    try:
        channels = int(data["channels"])
        splitting = data["splitting"]
        efficiencies = data["efficiencies"]
    except KeyError as exc:
        raise ValueError(f"detector configuration missing key {exc}") from exc
    config = DetectorConfig(tuple(splitting), tuple(efficiencies))
    if config.channels != channels:
        raise ValueError(
            f"declared {channels} channels but got {config.channels} ratios"
        )
    return config


def effective_attenuation(config: DetectorConfig, subset: Iterable[int]) -> float:
    """Transmitted fraction seen jointly by a group of channels.

    For a single-mode input, "no click anywhere in the group" equals a
    single on/off detection at t = sum over the group of
    splitting * efficiency.
    """
    indices = tuple(subset)
    if len(set(indices)) != len(indices):
        raise ValueError(f"subset indices must be distinct, got {indices}")
    for i in indices:
        if not 0 <= i < config.channels:
            raise ValueError(f"channel index {i} out of range 0..{config.channels - 1}")
    return fsum(config.splitting[i] * config.efficiencies[i] for i in indices)


class NoClickProfile:
    """Joint no-click probabilities of channel groups.

    A profile answers "with what probability do all detectors of this
    group stay silent".  It is backed by a subset-indexed callable, a
    size-indexed callable (valid when all channels are interchangeable),
    or both.
    """

    def __init__(
        self,
        channels: int,
        subset_fn: Optional[Callable[[tuple], float]] = None,
        size_fn: Optional[Callable[[int], float]] = None,
    ):
        if channels < 1:
            raise ValueError(f"channels must be >= 1, got {channels}")
        if subset_fn is None and size_fn is None:
            raise ValueError("profile needs a subset or a size callable")
        self.channels = channels
        self._subset_fn = subset_fn
        self._size_fn = size_fn

    @property
    def has_size_index(self) -> bool:
        return self._size_fn is not None

    def subset(self, indices: Iterable[int]) -> float:
        """Probability that no channel in ``indices`` clicks."""
        idx = tuple(sorted(indices))
        if len(set(idx)) != len(idx):
            raise ValueError(f"subset indices must be distinct, got {idx}")
        if idx and not 0 <= idx[-1] < self.channels:
            raise ValueError(f"channel index {idx[-1]} out of range")
        if not idx:
            return 1.0
        if self._subset_fn is not None:
            return self._subset_fn(idx)
        return self._size_fn(len(idx))

    def size(self, k: int) -> float:
        """Probability that k designated channels all stay silent.

        Uses the size-indexed shortcut when available (symmetric
        detectors); otherwise falls back to the first k channels.
        """
        if not 0 <= k <= self.channels:
            raise ValueError(f"group size {k} out of range 0..{self.channels}")
        if k == 0:
            return 1.0
        if self._size_fn is not None:
            return self._size_fn(k)
        return self._subset_fn(tuple(range(k)))


def gaussian_no_click_profile(
    state: SqueezedCoherentParams, config: DetectorConfig
) -> NoClickProfile:
    """No-click profile of a squeezed coherent state on a detector."""

    def subset_fn(indices: tuple) -> float:
        return no_click_expectation(state, effective_attenuation(config, indices))

    size_fn = None
    if config.is_symmetric:
        per_channel = config.splitting[0] * config.efficiencies[0]

        def size_fn(k: int) -> float:
            return no_click_expectation(state, k * per_channel)

    return NoClickProfile(config.channels, subset_fn=subset_fn, size_fn=size_fn)


@dataclass(frozen=True)
class ClickProbabilities:
    """Success (n chosen channels click) and error (n+1 click) rates.

    Values are stored as computed, without clamping, so that cancellation
    tests can see the raw inclusion-exclusion output; they must lie in
    [0, 1] up to ``BOUNDS_TOL``.
    """

    order: int
    success: float
    error: float

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"order must be >= 0, got {self.order}")
        for name, value in (("success", self.success), ("error", self.error)):
            if not -BOUNDS_TOL <= value <= 1.0 + BOUNDS_TOL:
                raise ValueError(f"{name} probability {value!r} outside [0, 1]")


def click_success(
    profile: NoClickProfile,
    order: int,
    group: Optional[Sequence[int]] = None,
) -> float:
    """Probability that a designated group of ``order`` channels all click.

    Inclusion-exclusion over the no-click profile.  The alternating terms
    cancel down to the scale of the multi-photon content, so the sum is
    compensated (``math.fsum``).  With ``group`` unset, the size-indexed
    path is used when the profile supports it, else channels 0..order-1.
    """
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    if order == 0:
        return 1.0
    if group is None and profile.has_size_index:
        # Summing each size-k value comb(order, k) times keeps the addend
        # multiset identical to the subset path, so both agree exactly.
        terms = []
        for k in range(order + 1):
            terms.extend([(-1.0) ** k * profile.size(k)] * comb(order, k))
        return fsum(terms)
    indices = tuple(range(order)) if group is None else tuple(group)
    if len(indices) != order or len(set(indices)) != order:
        raise ValueError(f"group must contain {order} distinct channels, got {indices}")
    terms = []
    for mask in range(1 << order):
        chosen = tuple(indices[i] for i in range(order) if mask >> i & 1)
        terms.append((-1.0) ** len(chosen) * profile.subset(chosen))
    return fsum(terms)


def click_stats(profile: NoClickProfile, order: int) -> ClickProbabilities:
    """Success/error probabilities of an order-n criterion measurement.

    The bound detector has n+1 channels: success is "the n designated
    channels click", the error event is "all n+1 channels click".
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if profile.channels != order + 1:
        raise ValueError(
            f"order {order} requires {order + 1} channels, profile has {profile.channels}"
        )
    success = click_success(profile, order)
    error = click_success(profile, order + 1)
    return ClickProbabilities(order=order, success=success, error=error)
