"""Tests for the multi-channel detector model and click algebra."""

import itertools
import json
import math

import numpy as np
import pytest

from qng.detector import (
    ClickProbabilities,
    DetectorConfig,
    NoClickProfile,
    click_stats,
    click_success,
    effective_attenuation,
    gaussian_no_click_profile,
    load_detector_config,
)
from qng.gaussian import SqueezedCoherentParams


class TestDetectorConfig:
    def test_symmetric_constructor(self):
        cfg = DetectorConfig.symmetric(4)
        assert cfg.channels == 4
        assert cfg.splitting == (0.25,) * 4
        assert cfg.efficiencies == (1.0,) * 4
        assert cfg.is_symmetric

    def test_splitting_must_sum_to_one(self):
        with pytest.raises(ValueError):
            DetectorConfig((0.5, 0.4), (1.0, 1.0))

    def test_efficiency_range_checked(self):
        with pytest.raises(ValueError):
            DetectorConfig((0.5, 0.5), (1.0, 1.2))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            DetectorConfig((0.5, 0.5), (1.0,))

    def test_load_symmetric_shorthand(self, tmp_path):
        path = tmp_path / "det.json"
        path.write_text(json.dumps({"symmetric": 3}))
        assert load_detector_config(path) == DetectorConfig.symmetric(3)

    def test_load_full_spec(self, tmp_path):
        path = tmp_path / "det.json"
        path.write_text(
            json.dumps(
                {
                    "channels": 2,
                    "splitting": [0.6, 0.4],
                    "efficiencies": [0.9, 1.0],
                }
            )
        )
        cfg = load_detector_config(path)
        assert cfg.splitting == (0.6, 0.4)
        assert cfg.efficiencies == (0.9, 1.0)

    def test_load_channel_count_mismatch(self):
        with pytest.raises(ValueError):
            load_detector_config(
                {"channels": 3, "splitting": [0.5, 0.5], "efficiencies": [1, 1]}
            )


class TestEffectiveAttenuation:
    def test_symmetric_pairs(self):
        assert effective_attenuation(DetectorConfig.symmetric(4), {0, 1}) == 0.5
        assert effective_attenuation(DetectorConfig.symmetric(3), {0}) == pytest.approx(
            1.0 / 3.0
        )

    def test_weighted_channels(self):
        cfg = DetectorConfig((0.5, 0.3, 0.2), (1.0, 0.5, 1.0))
        assert effective_attenuation(cfg, {1, 2}) == pytest.approx(0.35)

    def test_empty_subset_transmits_nothing(self):
        assert effective_attenuation(DetectorConfig.symmetric(2), ()) == 0.0

    def test_duplicate_and_invalid_indices_rejected(self):
        cfg = DetectorConfig.symmetric(3)
        with pytest.raises(ValueError):
            effective_attenuation(cfg, (0, 0))
        with pytest.raises(ValueError):
            effective_attenuation(cfg, (3,))


class TestGaussianProfile:
    def test_vacuum_never_clicks(self):
        profile = gaussian_no_click_profile(
            SqueezedCoherentParams.vacuum(), DetectorConfig.symmetric(5)
        )
        assert all(profile.size(k) == 1.0 for k in range(6))

    def test_coherent_profile_values(self):
        profile = gaussian_no_click_profile(
            SqueezedCoherentParams.coherent(1.0), DetectorConfig.symmetric(2)
        )
        assert profile.size(1) == pytest.approx(math.exp(-0.5), abs=1e-14)
        assert profile.size(2) == pytest.approx(math.exp(-1.0), abs=1e-14)

    def test_squeezed_vacuum_all_channels(self):
        state = SqueezedCoherentParams.squeezed_vacuum(0.5)
        profile = gaussian_no_click_profile(state, DetectorConfig.symmetric(2))
        assert profile.size(2) == pytest.approx(2.0 * math.sqrt(0.5) / 1.5, abs=1e-12)

    def test_subset_monotone_under_growth(self):
        state = SqueezedCoherentParams(1.2, 0.5, 0.4)
        for channels in range(2, 7):
            cfg = DetectorConfig.symmetric(channels)
            profile = gaussian_no_click_profile(state, cfg)
            indices = list(range(channels))
            for size in range(channels):
                for subset in itertools.combinations(indices, size):
                    for extra in indices:
                        if extra in subset:
                            continue
                        grown = subset + (extra,)
                        assert profile.subset(subset) >= profile.subset(grown) - 1e-15

    def test_profile_requires_a_callable(self):
        with pytest.raises(ValueError):
            NoClickProfile(2)


class TestClickSuccess:
    def test_order_one_is_complement(self):
        profile = NoClickProfile(2, size_fn=lambda k: 0.8**k)
        assert click_success(profile, 1) == pytest.approx(0.2, abs=1e-15)

    def test_order_zero_convention(self):
        profile = NoClickProfile(2, size_fn=lambda k: 0.8**k)
        assert click_success(profile, 0) == 1.0

    def test_coherent_two_channel_value(self):
        profile = gaussian_no_click_profile(
            SqueezedCoherentParams.coherent(1.0), DetectorConfig.symmetric(2)
        )
        expected = 1.0 - 2.0 * math.exp(-0.5) + math.exp(-1.0)
        assert click_success(profile, 2) == pytest.approx(expected, abs=1e-15)

    def test_size_and_subset_paths_agree_exactly(self):
        state = SqueezedCoherentParams(0.9, 0.3, 0.6)
        for channels in range(2, 7):
            profile = gaussian_no_click_profile(state, DetectorConfig.symmetric(channels))
            for order in range(1, channels + 1):
                assert click_success(profile, order) == click_success(
                    profile, order, group=tuple(range(order))
                )

    def test_inclusion_exclusion_equals_channel_product(self):
        # A coherent state splits into independent coherent beams, so the
        # group click probability factorizes channel by channel.
        amp2 = 1.7
        state = SqueezedCoherentParams.coherent(math.sqrt(amp2))
        configs = [
            DetectorConfig.symmetric(4),
            DetectorConfig((0.3, 0.25, 0.2, 0.1, 0.1, 0.05), (1.0, 0.9, 0.8, 1.0, 0.7, 0.95)),
        ]
        for cfg in configs:
            profile = gaussian_no_click_profile(state, cfg)
            for order in range(1, cfg.channels + 1):
                group = tuple(range(order))
                direct = math.prod(
                    1.0 - math.exp(-cfg.splitting[i] * cfg.efficiencies[i] * amp2)
                    for i in group
                )
                assert abs(click_success(profile, order, group=group) - direct) <= 1e-12

    def test_group_must_match_order(self):
        profile = NoClickProfile(3, size_fn=lambda k: 0.9**k)
        with pytest.raises(ValueError):
            click_success(profile, 2, group=(0,))


class TestClickStats:
    def test_vacuum_stats_are_zero(self):
        for order in (1, 2, 3):
            profile = gaussian_no_click_profile(
                SqueezedCoherentParams.vacuum(), DetectorConfig.symmetric(order + 1)
            )
            stats = click_stats(profile, order)
            assert stats.success == 0.0
            assert stats.error == 0.0

    def test_two_ideal_emitters_exact_cancellation(self):
        profile = NoClickProfile(3, size_fn=lambda k: (1.0 - 0.1 * k) ** 2)
        stats = click_stats(profile, 2)
        assert stats.success == pytest.approx(0.02, abs=1e-15)
        assert abs(stats.error) <= 1e-12

    def test_coherent_order_one_pair(self):
        profile = gaussian_no_click_profile(
            SqueezedCoherentParams.coherent(1.0), DetectorConfig.symmetric(2)
        )
        stats = click_stats(profile, 1)
        assert stats.success == pytest.approx(1.0 - math.exp(-0.5), abs=1e-15)
        assert stats.error == pytest.approx(
            1.0 - 2.0 * math.exp(-0.5) + math.exp(-1.0), abs=1e-15
        )

    def test_channel_count_must_be_order_plus_one(self):
        profile = NoClickProfile(3, size_fn=lambda k: 0.9**k)
        with pytest.raises(ValueError):
            click_stats(profile, 3)

    def test_probabilities_validated(self):
        with pytest.raises(ValueError):
            ClickProbabilities(order=1, success=1.5, error=0.0)

    def test_gaussian_outputs_within_unit_interval(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            state = SqueezedCoherentParams(
                rng.uniform(0, 3), rng.uniform(0, math.pi / 2), rng.uniform(0.05, 1.0)
            )
            for order in (1, 2, 3):
                profile = gaussian_no_click_profile(
                    state, DetectorConfig.symmetric(order + 1)
                )
                stats = click_stats(profile, order)
                assert -1e-12 <= stats.success <= 1.0 + 1e-12
                assert -1e-12 <= stats.error <= 1.0 + 1e-12
