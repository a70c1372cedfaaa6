from __future__ import annotations

import copy
import json
import random

import pytest
from helpers import HOUR, LONDON, MONDAY, NEW_YORK, ev, login

from ztseg.config import EngineConfig
from ztseg.context_risk import ContextConfig, Thresholds, Tier
from ztseg.engine import (
    AuditRecord,
    DynamicEngine,
    Judgment,
    StaticEngine,
    Verdict,
    adjust_thresholds,
    read_audit,
    replay,
    static_decide,
)
from ztseg.errors import ConfigError, OrderingError, UnknownEventError
from ztseg.events import IdentityState, serialize_events

BLOCK = ContextConfig(blocklist=("192.0.2.0/24",))
DAY = 86400


def _routine(identity="u1", days=25):
    """One login and one read per weekday-ish day, same place and device."""
    out = []
    for d in range(days):
        t = MONDAY + d * DAY + 9 * HOUR
        out.append(login(identity=identity, ts=t))
        out.append(ev(identity=identity, ts=t + 600))
    return out


def _attack(identity="u1", ts=MONDAY + 30 * DAY + 3 * HOUR):
    return ev(identity=identity, ts=ts, resource="vault", device="evil", ip="192.0.2.66", geo=(-33.9, 151.2))


class TestProcessEvent:
    def test_first_event(self):
        d, rec = DynamicEngine().process_event(ev())
        assert (rec.A, rec.C, rec.R) == (0.5, 0.0, 0.25)
        assert d.tier is Tier.ALLOW

    def test_blocklisted_during_warmup(self):
        d, rec = DynamicEngine(EngineConfig(context=BLOCK)).process_event(ev(ip="192.0.2.1"))
        assert (rec.C, rec.R) == (1.0, 0.75)
        assert d.tier is Tier.RESTRICT
        assert "blocklisted_ip" in rec.reasons

    def test_impossible_travel_forces_restrict(self):
        eng = DynamicEngine()
        eng.process_event(login(ts=MONDAY + 10 * HOUR, geo=LONDON))
        d, rec = eng.process_event(login(ts=MONDAY + 11 * HOUR, geo=NEW_YORK))
        assert rec.R <= 0.7  # the flag alone carries the decision
        assert d.tier >= Tier.RESTRICT
        assert "impossible_travel" in rec.reasons

    def test_audit_soundness(self):
        eng = DynamicEngine(EngineConfig(context=BLOCK))
        for e in _routine() + [_attack()]:
            _, rec = eng.process_event(e)
            assert abs(rec.R - (rec.w1 * rec.A + rec.w2 * rec.C)) < 1e-12

    def test_quarantine_trace(self):
        # hand trace: 50 routine events warm the baseline (A settles low, C = 0);
        # the attack is off-hours, new device, blocklisted IP (C = 1) and far from
        # every feature mean (A ~ 1), so R > 0.85 and the identity is quarantined once.
        eng = DynamicEngine(EngineConfig(context=BLOCK))
        events = _routine() + [_attack(), ev(ts=MONDAY + 31 * DAY + 9 * HOUR)]
        result = replay(eng, events)
        tiers = [r.tier for r in result.audit]
        assert set(tiers[:-2]) == {"Allow"}
        assert tiers[-2:] == ["Quarantine", "Quarantine"]
        assert result.audit[-1].reasons[0] == "quarantined"
        assert len(eng.containments) == 1
        assert eng.containments[0].deactivated == ("r1", "sso")
        assert eng.graph.blast_radius("u1") == set()
        eng.release("u1")
        assert eng.graph.blast_radius("u1") == {"r1", "sso"}

    def test_out_of_order(self):
        eng = DynamicEngine()
        eng.process_event(ev(ts=MONDAY + 10))
        with pytest.raises(OrderingError):
            eng.process_event(ev(ts=MONDAY))

    def test_identity_pseudonymized(self):
        _, rec = DynamicEngine(EngineConfig(salt="s1")).process_event(ev(identity="alice"))
        assert rec.identity == "84087d4ff1b420780f1e4f4ae9bc7248"

    def test_failed_login_does_not_train(self):
        eng = DynamicEngine()
        eng.process_event(login(success=False))
        assert eng.baselines["u1"].n == 0

    def test_peer_factor(self):
        cfg = EngineConfig(w1=0.4, w2=0.4, peer_weight=0.2, peer_k=1)
        eng = DynamicEngine(cfg)
        for e in _routine("u1") + _routine("u2"):
            eng.process_event(e)
        assert eng.refresh_peer_model() is not None
        _, rec = eng.process_event(ev(identity="u1", ts=MONDAY + 40 * DAY + 9 * HOUR))
        assert rec.P is not None and 0.0 <= rec.P <= 1.0
        assert rec.R == pytest.approx(0.4 * rec.A + 0.4 * rec.C + 0.2 * rec.P, abs=1e-12)
        assert json.loads(rec.to_json())["w3"] == 0.2


class TestStatic:
    def _state(self):
        st = IdentityState("u1")
        st.register_device("d1", MONDAY)
        return st

    def test_allow(self):
        assert static_decide(ev(ts=MONDAY + 10 * HOUR), self._state(), BLOCK).tier is Tier.ALLOW

    def test_off_hours(self):
        d = static_decide(ev(ts=MONDAY + 3 * HOUR), self._state(), BLOCK)
        assert d.tier is Tier.RESTRICT and d.reasons == ["off_hours"]

    def test_blind_spot(self):
        # known device, business hours, clean IP, wildly unusual resource and geo
        e = ev(ts=MONDAY + 11 * HOUR, resource="payroll", geo=(-33.9, 151.2))
        assert static_decide(e, self._state(), BLOCK).tier is Tier.ALLOW

    def test_engine_enrolls_first_device(self):
        eng = StaticEngine()
        assert eng.process_event(ev(device="a"))[0].tier.label == "Allow"
        assert eng.process_event(ev(device="b"))[0].tier.label == "Restrict"
        assert eng.process_event(ev(device="b"))[0].tier.label == "Allow"

    def test_isolation(self):
        dyn, stat = DynamicEngine(), StaticEngine()
        events = _routine(days=5)
        for e in events:
            dyn.process_event(e)
        snapshot = copy.deepcopy((dyn.identities, dyn.baselines))
        for e in events:
            stat.process_event(e)
            static_decide(e, dyn.identities["u1"], dyn.config.context)
        assert (dyn.identities, dyn.baselines) == snapshot


class TestFeedback:
    def test_fp_stepup(self):
        t = adjust_thresholds(Thresholds(), Judgment.FALSE_POSITIVE, Tier.STEP_UP, 0.05)
        assert t.stepup == 0.525
        assert (t.restrict, t.quarantine) == (0.7, 0.85)

    def test_tp_unchanged(self):
        assert adjust_thresholds(Thresholds(), Judgment.TRUE_POSITIVE, Tier.RESTRICT, 0.05) == Thresholds()

    def test_missed_threat(self):
        t = adjust_thresholds(Thresholds(), Judgment.MISSED_THREAT, Tier.ALLOW, 0.1)
        assert t.as_tuple() == pytest.approx((0.45, 0.63, 0.765))

    def test_collision_scales_block(self):
        t = adjust_thresholds(Thresholds(0.5, 0.52, 0.9), Judgment.FALSE_POSITIVE, Tier.STEP_UP, 0.05)
        assert t.as_tuple() == pytest.approx((0.525, 0.546, 0.945))

    def test_cap(self):
        t = Thresholds()
        for _ in range(100):
            t = adjust_thresholds(t, Judgment.FALSE_POSITIVE, Tier.QUARANTINE, 0.05)
            assert 0 < t.stepup < t.restrict < t.quarantine < 0.99
        assert t.quarantine == pytest.approx(0.99, abs=1e-5)

    def test_floor(self):
        t = Thresholds()
        for _ in range(500):
            t = adjust_thresholds(t, Judgment.MISSED_THREAT, Tier.ALLOW, 0.05)
        assert t.stepup == pytest.approx(0.05)
        assert t.stepup < t.restrict < t.quarantine

    def test_hundred_false_positives(self):
        rng = random.Random(0)
        t = Thresholds()
        for _ in range(100):
            tier = rng.choice([Tier.STEP_UP, Tier.RESTRICT, Tier.QUARANTINE])
            t = adjust_thresholds(t, Judgment.FALSE_POSITIVE, tier, 0.05)
            assert 0 < t.stepup < t.restrict < t.quarantine < 0.99

    def test_apply_feedback_unknown_event(self):
        eng = DynamicEngine()
        with pytest.raises(UnknownEventError):
            eng.apply_feedback(Verdict("nope", Judgment.FALSE_POSITIVE))
        eng.apply_feedback(Verdict("nope", Judgment.MISSED_THREAT))
        assert eng.thresholds.stepup < 0.5

    def test_apply_feedback_uses_recorded_tier(self):
        eng = DynamicEngine(EngineConfig(context=BLOCK))
        e = ev(ip="192.0.2.1")
        eng.process_event(e)  # Restrict
        t = eng.apply_feedback(Verdict(e.event_id, Judgment.FALSE_POSITIVE))
        assert t.restrict == pytest.approx(0.735) and t.stepup == 0.5


class TestReplay:
    def test_empty(self):
        assert replay(DynamicEngine(), []).audit == []

    def test_byte_identical(self):
        raw = serialize_events(_routine(days=10) + [_attack(ts=MONDAY + 12 * DAY)])
        a = replay(DynamicEngine(EngineConfig(context=BLOCK)), raw).audit_bytes()
        b = replay(DynamicEngine(EngineConfig(context=BLOCK)), raw).audit_bytes()
        assert a == b and a

    def test_audit_roundtrip(self):
        res = replay(DynamicEngine(), _routine(days=3))
        back = read_audit(res.audit_bytes().splitlines())
        assert back == res.audit
        assert isinstance(back[0], AuditRecord)


class TestConfig:
    def test_roundtrip(self, tmp_path):
        cfg = EngineConfig(w1=0.3, w2=0.7, thresholds=Thresholds(0.4, 0.6, 0.8), context=BLOCK)
        path = tmp_path / "c.json"
        cfg.dump(path)
        assert EngineConfig.load(path) == cfg

    @pytest.mark.parametrize("obj", [{"w1": 0.9}, {"bogus": 1}, {"thresholds": {"stepup": 0.9}}, {"salt": ""}])
    def test_rejects(self, obj):
        with pytest.raises(ConfigError):
            EngineConfig.from_dict(obj)
