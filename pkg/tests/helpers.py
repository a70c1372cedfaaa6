from __future__ import annotations

import itertools

from ztseg.events import AccessEvent, Action

LONDON = (51.5074, -0.1278)
NEW_YORK = (40.7128, -74.0060)
# 2024-01-01 (Monday) 00:00 UTC
MONDAY = 1704067200
HOUR = 3600

_ids = itertools.count()


def ev(
    identity="u1",
    ts=MONDAY + 10 * HOUR,
    resource="r1",
    action=Action.READ,
    geo=LONDON,
    device="d1",
    ip="10.0.0.1",
    success=True,
    event_id=None,
) -> AccessEvent:
    if event_id is None:
        event_id = f"t{next(_ids):06d}"
    return AccessEvent(event_id, identity, ts, resource, action, geo[0], geo[1], device, ip, success)


def login(**kw) -> AccessEvent:
    kw.setdefault("resource", "sso")
    return ev(action=Action.LOGIN, **kw)
