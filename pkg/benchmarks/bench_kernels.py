"""Compare the compiled physics kernel against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--frames N] [--repeats K]

Runs identical rollouts through both backends, reports wall time per rollout
and verifies the outputs are bit-identical.
"""

from __future__ import annotations

import argparse
import time

from tracepatterns.sim import SceneTemplate, SimConfig, build_scene
from tracepatterns.sim._kernel import reference
from tracepatterns.sim.world import simulate
from tracepatterns.trace import serialize_trace
from tracepatterns.trace.model import Action, Vec2

try:
    from tracepatterns.sim._kernel import _native
except ImportError:
    _native = None

SCENARIOS = [
    ("ball_on_bar", Action(Vec2(120.0, 230.0), 12.0)),
    ("buckets3", Action(Vec2(56.0, 230.0), 12.0)),
    ("lever", Action(Vec2(170.0, 210.0), 20.0)),
    ("stack", Action(Vec2(126.0, 160.0), 16.0)),
]


def bench(kernel, config: SimConfig, repeats: int) -> tuple[float, list[str]]:
    total = 0.0
    outputs = []
    for template_id, action in SCENARIOS:
        scene = build_scene(SceneTemplate(template_id, seed=0))
        start = time.perf_counter()
        for _ in range(repeats):
            trace = simulate(scene, action, config, kernel=kernel)
        total += (time.perf_counter() - start) / repeats
        outputs.append(serialize_trace(trace))
    return total / len(SCENARIOS), outputs


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--frames", type=int, default=300)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    config = SimConfig(timestep_count=args.frames)
    py_time, py_out = bench(reference, config, 1)
    print(f"pure python : {py_time * 1000:8.1f} ms per {args.frames}-frame rollout")
    if _native is None:
        print("compiled    : not built (pip install -e . to compile)")
        return
    nat_time, nat_out = bench(_native, config, args.repeats)
    print(f"compiled    : {nat_time * 1000:8.1f} ms per {args.frames}-frame rollout")
    print(f"speedup     : {py_time / nat_time:8.1f}x")
    identical = py_out == nat_out
    print(f"bit-identical traces across backends: {identical}")
    if not identical:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
