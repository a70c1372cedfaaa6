"""Compare the compiled kernels with the pure-Python fallback.

Kernel timings run in-process against both modules. Replay throughput runs
in a subprocess per backend, since the backend is fixed at import time.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--benign 200]
"""

from __future__ import annotations

import argparse
import json
import os
import random
import subprocess
import sys
import timeit
from array import array

from ztseg import _kernels_py, kernels

REPLAY_SNIPPET = """
import json, sys
from ztseg import kernels
from ztseg.engine import DynamicEngine
from ztseg.simharness import ScenarioSpec, generate_scenario, timed_replay
sc = generate_scenario(ScenarioSpec(n_benign={benign}, n_compromised={compromised}))
best = max(timed_replay(DynamicEngine(), sc.events)[1] for _ in range({repeat}))
print(json.dumps({{"backend": kernels.BACKEND, "events": len(sc.events), "events_per_s": best}}))
"""


def kernel_cases(mod, rng: random.Random):
    x = array("d", [rng.gauss(0, 1) for _ in range(6)])
    mu = array("d", [rng.gauss(0, 1) for _ in range(6)])
    a = [[rng.gauss(0, 1) for _ in range(6)] for _ in range(6)]
    cov = array("d", [sum(a[i][k] * a[j][k] for k in range(6)) + (i == j) for i in range(6) for j in range(6)])
    m2 = array("d", cov)
    mean = array("d", mu)
    pts = array("d", [rng.gauss(0, 1) for _ in range(6 * 200)])
    cen = array("d", [rng.gauss(0, 1) for _ in range(6 * 4)])
    labels = array("l", [0] * 200)
    return {
        "haversine_km": lambda: mod.haversine_km(51.5, -0.12, 40.7, -74.0),
        "welford_update": lambda: mod.welford_update(mean, m2, 50, x),
        "mahalanobis_sq": lambda: mod.mahalanobis_sq(x, mu, cov, 1.0, 1e-6),
        "assign_nearest(200x4)": lambda: mod.assign_nearest(pts, cen, 6, labels),
    }


def bench_kernels(repeat: int) -> list[tuple[str, dict[str, float]]]:
    mods = kernels.backends()
    mods.setdefault("python", _kernels_py)
    rows: dict[str, dict[str, float]] = {}
    for name, mod in mods.items():
        for case, fn in kernel_cases(mod, random.Random(0)).items():
            n = 2000 if "assign" not in case else 200
            best = min(timeit.repeat(fn, number=n, repeat=repeat)) / n
            rows.setdefault(case, {})[name] = best * 1e6
    return list(rows.items())


def bench_replay(benign: int, compromised: int, repeat: int) -> list[dict]:
    out = []
    for flag in ("0", "1"):
        env = {**os.environ, "ZTSEG_PURE_PYTHON": flag}
        code = REPLAY_SNIPPET.format(benign=benign, compromised=compromised, repeat=repeat)
        proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        out.append(json.loads(proc.stdout))
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--benign", type=int, default=200)
    ap.add_argument("--compromised", type=int, default=10)
    args = ap.parse_args(argv)

    print(f"selected backend: {kernels.BACKEND}")
    print(f"{'kernel':<24}{'compiled us':>14}{'python us':>14}{'speedup':>10}")
    for case, t in bench_kernels(args.repeat):
        c, p = t.get("compiled"), t["python"]
        speed = f"{p / c:9.1f}x" if c else "      n/a"
        print(f"{case:<24}{(f'{c:.3f}' if c else 'n/a'):>14}{p:>14.3f}{speed:>10}")
    print()
    for r in bench_replay(args.benign, args.compromised, max(1, args.repeat // 2)):
        print(f"replay [{r['backend']:<8}] {r['events']} events: {r['events_per_s']:,.0f} events/s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
