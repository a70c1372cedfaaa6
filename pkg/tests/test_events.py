from __future__ import annotations

import json

import pytest
from helpers import MONDAY, ev, login

from ztseg.errors import ConfigError, OrderingError, ParseError
from ztseg.events import (
    AccessEvent,
    Action,
    IdentityState,
    Pseudonymizer,
    parse_event_log,
    pseudonymize,
    serialize_events,
    validate_event,
)

# independent FIPS 180-4 SHA-256 over b"s1:alice", first 32 hex chars
ALICE_S1 = "84087d4ff1b420780f1e4f4ae9bc7248"


def _line(**over):
    obj = ev().to_dict()
    obj.update(over)
    return json.dumps(obj)


class TestValidate:
    def test_well_formed(self):
        assert validate_event(ev()) == []

    def test_latitude(self):
        assert "latitude out of range" in validate_event(ev(geo=(91.0, 0.0)))

    def test_two_violations(self):
        bad = ev(identity="", geo=(0.0, 200.0))
        problems = validate_event(bad)
        assert len(problems) == 2
        assert "identity_id is empty" in problems
        assert "longitude out of range" in problems

    def test_never_raises_on_garbage(self):
        junk = AccessEvent(None, 3, "x", None, "Fly", "a", None, "", "999.1.1.1", "yes")
        assert len(validate_event(junk)) >= 8


class TestParse:
    def test_empty(self):
        assert parse_event_log(b"") == []

    def test_three_in_order(self):
        lines = [_line(event_id=f"e{i}", timestamp=MONDAY + i) for i in range(3)]
        events = parse_event_log("\n".join(lines).encode())
        assert [e.event_id for e in events] == ["e0", "e1", "e2"]

    def test_ordering_error_names_second_event(self):
        raw = "\n".join([_line(event_id="a", timestamp=100), _line(event_id="b", timestamp=50)])
        with pytest.raises(OrderingError) as info:
            parse_event_log(raw)
        assert info.value.event_id == "b"
        assert info.value.line == 2

    def test_other_identity_may_go_back(self):
        raw = "\n".join([_line(event_id="a", timestamp=100), _line(event_id="b", identity_id="u2", timestamp=50)])
        assert len(parse_event_log(raw)) == 2

    @pytest.mark.parametrize(
        "line",
        [
            "{not json",
            "[1, 2]",
            json.dumps({"event_id": "x"}),
            _line(action="Fly"),
            _line(lat=95.0),
            _line(source_ip="300.1.1.1"),
        ],
    )
    def test_parse_errors(self, line):
        with pytest.raises(ParseError):
            parse_event_log(line)

    def test_duplicate_id(self):
        with pytest.raises(ParseError, match="duplicate"):
            parse_event_log("\n".join([_line(event_id="a"), _line(event_id="a")]))

    def test_roundtrip(self):
        events = [ev(ts=MONDAY + i) for i in range(5)]
        assert parse_event_log(serialize_events(events)) == events


class TestPseudonymize:
    def test_oracle(self):
        assert pseudonymize("alice", "s1") == ALICE_S1

    def test_deterministic_and_salted(self):
        assert pseudonymize("bob", "x") == pseudonymize("bob", "x")
        assert pseudonymize("bob", "x") != pseudonymize("bob", "y")

    def test_empty_salt(self):
        with pytest.raises(ConfigError):
            pseudonymize("bob", "")

    def test_cache_matches(self):
        p = Pseudonymizer("s1")
        assert p("alice") == ALICE_S1 == p("alice")


class TestIdentityState:
    def test_observe(self):
        st = IdentityState("u1")
        st.observe(login(ts=MONDAY, geo=(10.0, 20.0)))
        st.observe(login(ts=MONDAY + 5, geo=(30.0, 40.0), success=False))
        st.observe(ev(ts=MONDAY + 9, device="d2"))
        assert st.event_count == 3
        assert st.last_timestamp == MONDAY + 9
        assert st.device_count("d1") == 2 and st.device_count("d2") == 1
        # failed login contributes no location
        assert st.login_centroid() == (10.0, 20.0)
        assert st.last_login() == (MONDAY, 10.0, 20.0)
        assert st.resource_counts == {"sso": 2, "r1": 1}

    def test_login_history_capped(self):
        st = IdentityState("u1")
        for i in range(150):
            st.observe(login(ts=MONDAY + i, geo=(float(i % 2), 0.0)))
        assert len(st.login_locations) == 100
        lat, _ = st.login_centroid()
        assert lat == pytest.approx(0.5)

    def test_action_values(self):
        assert [a.value for a in Action] == ["Login", "Read", "Write", "Admin"]
