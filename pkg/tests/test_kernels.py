from __future__ import annotations

import os
import subprocess
import sys
from array import array

import numpy as np
import pytest

from ztseg import _kernels_py, kernels

BACKENDS = kernels.backends()
compiled = pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")


def test_selected_backend():
    assert kernels.BACKEND in BACKENDS


def test_env_forces_python():
    out = subprocess.run(
        [sys.executable, "-c", "import ztseg.kernels as k; print(k.BACKEND)"],
        env={**os.environ, "ZTSEG_PURE_PYTHON": "1"},
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"


@compiled
class TestParity:
    fast = BACKENDS.get("compiled")
    slow = _kernels_py

    def test_haversine(self):
        rng = np.random.default_rng(0)
        for lat1, lon1, lat2, lon2 in zip(*(rng.uniform(-90, 90, 200) for _ in range(2)),
                                           *(rng.uniform(-180, 180, 200) for _ in range(2))):
            a = self.fast.haversine_km(lat1, lon1, lat2, lon2)
            b = self.slow.haversine_km(lat1, lon1, lat2, lon2)
            assert a == pytest.approx(b, rel=1e-12, abs=1e-9)

    def test_welford(self):
        rng = np.random.default_rng(1)
        states = [(array("d", [0.0] * 6), array("d", [0.0] * 36)) for _ in range(2)]
        for n, x in enumerate(rng.normal(size=(100, 6))):
            xa = array("d", x)
            self.fast.welford_update(*states[0], n, xa)
            self.slow.welford_update(*states[1], n, xa)
        np.testing.assert_allclose(states[0][0], states[1][0], rtol=1e-12)
        np.testing.assert_allclose(states[0][1], states[1][1], rtol=1e-12)

    def test_mahalanobis(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            a = rng.normal(size=(6, 6))
            cov = array("d", (a @ a.T).ravel())
            x, mu = array("d", rng.normal(size=6)), array("d", rng.normal(size=6))
            f = self.fast.mahalanobis_sq(x, mu, cov, 0.5, 1e-6)
            s = self.slow.mahalanobis_sq(x, mu, cov, 0.5, 1e-6)
            assert f == pytest.approx(s, rel=1e-10)

    def test_not_positive_definite(self):
        cov = array("d", [-1.0] + [0.0] * 35)
        x = array("d", [1.0] * 6)
        assert self.fast.mahalanobis_sq(x, x, cov, 1.0, 1e-6) == -1.0
        assert self.slow.mahalanobis_sq(x, x, cov, 1.0, 1e-6) == -1.0

    def test_assign(self):
        rng = np.random.default_rng(3)
        pts = array("d", rng.normal(size=300))
        cen = array("d", rng.normal(size=30))
        la, lb = array("l", [0] * 50), array("l", [0] * 50)
        ia = self.fast.assign_nearest(pts, cen, 6, la)
        ib = self.slow.assign_nearest(pts, cen, 6, lb)
        assert la == lb
        assert ia == pytest.approx(ib, rel=1e-12)

    def test_engine_audits_agree(self):
        from ztseg.engine import DynamicEngine
        from ztseg.simharness import ScenarioSpec, generate_scenario

        code = (
            "import sys\n"
            "from ztseg.engine import DynamicEngine, replay\n"
            "from ztseg.simharness import ScenarioSpec, generate_scenario\n"
            "sc = generate_scenario(ScenarioSpec(n_benign=15, n_compromised=2, days=9, seed=8))\n"
            "sys.stdout.buffer.write(replay(DynamicEngine(), sc.events).audit_bytes())\n"
        )
        outs = []
        for flag in ("0", "1"):
            proc = subprocess.run([sys.executable, "-c", code], env={**os.environ, "ZTSEG_PURE_PYTHON": flag},
                                  capture_output=True, check=True)
            outs.append(proc.stdout.splitlines())
        import json

        assert len(outs[0]) == len(outs[1])
        for a, b in zip(*outs):
            ra, rb = json.loads(a), json.loads(b)
            assert ra["tier"] == rb["tier"]
            assert ra["R"] == pytest.approx(rb["R"], abs=1e-9)
