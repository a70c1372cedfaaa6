from __future__ import annotations

import random

import pytest
from helpers import HOUR, LONDON, MONDAY, NEW_YORK, ev, login

from ztseg.context_risk import (
    ContextConfig,
    GeoBox,
    PrefixSet,
    Thresholds,
    Tier,
    aggregate_risk,
    assess_context,
    contextual_score,
    decide,
    risk_score,
)
from ztseg.errors import ConfigError
from ztseg.events import IdentityState


def _familiar_state():
    st = IdentityState("u1")
    st.observe(login(ts=MONDAY + 9 * HOUR, geo=(51.5, -0.12)))
    return st


class TestContext:
    def test_all_clear(self):
        e = ev(ts=MONDAY + 10 * HOUR, geo=LONDON)  # ~1 km from prior login
        assert contextual_score(e, _familiar_state(), ContextConfig()) == 0.0

    def test_blocklist_saturates(self):
        cfg = ContextConfig(blocklist=("192.0.2.0/24",))
        r = assess_context(ev(ip="192.0.2.7", ts=MONDAY), IdentityState("u1"), cfg)
        assert r.score == 1.0 and r.reasons() == ["blocklisted_ip"]

    def test_unknown_device_off_hours(self):
        e = ev(ts=MONDAY + 3 * HOUR, device="new")
        assert contextual_score(e, _familiar_state(), ContextConfig()) == pytest.approx(0.40)

    def test_unfamiliar_location(self):
        r = assess_context(ev(geo=NEW_YORK), _familiar_state(), ContextConfig())
        assert r.reasons() == ["unfamiliar_location"]
        assert r.score == pytest.approx(0.25)

    def test_watchlist_is_soft(self):
        cfg = ContextConfig(watchlist=("198.51.100.0/24",))
        r = assess_context(ev(ip="198.51.100.9"), _familiar_state(), cfg)
        assert r.score == pytest.approx(0.35) and r.saturated_by is None

    def test_everything_caps_at_one(self):
        cfg = ContextConfig(watchlist=("198.51.100.0/24",))
        e = ev(ip="198.51.100.9", geo=NEW_YORK, device="x", ts=MONDAY + 2 * HOUR)
        assert contextual_score(e, _familiar_state(), cfg) == 1.0

    def test_blocked_region(self):
        cfg = ContextConfig(blocked_regions=(GeoBox(40, 41, -75, -73),))
        r = assess_context(ev(geo=NEW_YORK), IdentityState("u1"), cfg)
        assert r.score == 1.0 and r.saturated_by == "blocked_region"

    def test_business_hours_edges(self):
        cfg = ContextConfig()
        assert cfg.within_business_hours(MONDAY + 8 * HOUR)
        assert not cfg.within_business_hours(MONDAY + 18 * HOUR)
        assert cfg.within_business_hours(MONDAY + 18 * HOUR - 1)

    def test_config_roundtrip(self):
        cfg = ContextConfig(blocklist=("1.2.3.0/24",), blocked_regions=(GeoBox(0, 1, 0, 1),))
        assert ContextConfig.from_dict(cfg.to_dict()) == cfg

    @pytest.mark.parametrize(
        "kw",
        [
            {"business_hours": (18, 8)},
            {"blocklist": ("not-an-ip",)},
            {"familiar_radius_km": -1.0},
            {"factor_weights": {"unknown_device": 1.0}},
            {"factor_weights": {"unknown_device": 0.5, "unfamiliar_location": 0.5, "off_hours": 0.5, "untrusted_ip": 0.0}},
            {"factor_weights": {"unknown_device": 0.25, "unfamiliar_location": 0.25, "off_hours": 0.15, "untrusted_ip": 0.35, "x": 0}},
        ],
    )
    def test_bad_config(self, kw):
        with pytest.raises(ConfigError):
            ContextConfig(**kw)

    def test_prefix_set(self):
        s = PrefixSet(["10.0.0.0/8", "192.168.1.5"])
        assert "10.200.1.1" in s and "192.168.1.5" in s
        assert "192.168.1.6" not in s and "11.0.0.1" not in s
        assert not PrefixSet()


class TestRisk:
    def test_examples(self):
        assert risk_score(0, 0, 0.5, 0.5) == 0
        assert risk_score(1, 1, 0.3, 0.7) == 1
        assert risk_score(0.8, 0.4, 0.6, 0.4) == pytest.approx(0.64, abs=1e-12)

    def test_aggregate(self):
        third = 1 / 3
        assert aggregate_risk([(0.2, third), (0.5, third), (0.9, third)]) == pytest.approx(1.6 / 3, abs=1e-12)
        assert aggregate_risk([(0.37, 1.0)]) == 0.37

    def test_aggregate_matches_two_factor(self):
        rng = random.Random(5)
        for _ in range(1000):
            A, C, w1 = rng.random(), rng.random(), rng.random()
            assert aggregate_risk([(A, w1), (C, 1 - w1)]) == risk_score(A, C, w1, 1 - w1)

    @pytest.mark.parametrize("w", [(0.5, 0.6), (-0.1, 1.1)])
    def test_bad_weights(self, w):
        with pytest.raises(ConfigError):
            risk_score(0.5, 0.5, *w)

    def test_factor_out_of_range(self):
        with pytest.raises(ValueError):
            aggregate_risk([(1.5, 1.0)])


class TestDecide:
    @pytest.mark.parametrize(
        "R, tier",
        [(0.3, Tier.ALLOW), (0.5, Tier.ALLOW), (0.51, Tier.STEP_UP), (0.7, Tier.STEP_UP),
         (0.75, Tier.RESTRICT), (0.85, Tier.RESTRICT), (0.9, Tier.QUARANTINE)],
    )
    def test_tiers(self, R, tier):
        assert decide(R, Thresholds()).tier is tier

    def test_quarantined_sticks(self):
        d = decide(0.0, Thresholds(), quarantined=True)
        assert d.tier is Tier.QUARANTINE and d.reasons == ["quarantined"]

    @pytest.mark.parametrize("t", [(0.7, 0.5, 0.85), (0.5, 0.5, 0.9), (0.0, 0.5, 0.9), (0.5, 0.7, 1.0)])
    def test_threshold_ordering(self, t):
        with pytest.raises(ConfigError):
            Thresholds(*t)

    def test_labels(self):
        assert [t.label for t in Tier] == ["Allow", "StepUp", "Restrict", "Quarantine"]
        assert Tier.from_label("StepUp") is Tier.STEP_UP
