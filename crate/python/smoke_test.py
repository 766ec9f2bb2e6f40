#!/usr/bin/env python3
"""Smoke test for the aoisim_py extension module.

Builds the cdylib if needed, stages it under an importable name, then drives
the environment, a short agent training run, the oracle and the gradient
checker through the Python surface.

Usage: python3 python/smoke_test.py [--release]
"""

import argparse
import json
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_and_stage(release: bool) -> Path:
    profile = "release" if release else "debug"
    cmd = ["cargo", "build", "-p", "aoisim-py"]
    if release:
        cmd.append("--release")
    subprocess.run(cmd, cwd=ROOT, check=True)
    built = ROOT / "target" / profile / "libaoisim_py.so"
    if not built.exists():  # macOS fallback
        built = ROOT / "target" / profile / "libaoisim_py.dylib"
    stage = Path(tempfile.mkdtemp(prefix="aoisim_py_"))
    shutil.copy2(built, stage / "aoisim_py.so")
    return stage


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--release", action="store_true", help="build with --release")
    args = ap.parse_args()

    sys.path.insert(0, str(build_and_stage(args.release)))
    import aoisim_py as sim

    print(f"aoisim_py {sim.__version__}")

    # Config round-trips through JSON.
    cfg = json.loads(sim.default_config())
    assert cfg["agent"]["batch"] == 32
    assert cfg["agent"]["memory"] == 2000

    # Seeded environments are deterministic and respect the action mask.
    env_a = sim.Environment(seed=7)
    env_b = sim.Environment(seed=7)
    trace_a, trace_b = [], []
    for env, trace in ((env_a, trace_a), (env_b, trace_b)):
        env.reset()
        for _ in range(200):
            actions = env.valid_actions()
            assert "no_sense" in actions
            out = env.step(actions[-1])
            trace.append((out["case"], out["reward"], out["aoi"], out["battery"]))
    assert trace_a == trace_b, "same seed must give identical trajectories"
    cases = {c for c, *_ in trace_a}
    assert cases <= set(range(1, 9))
    print(f"environment: deterministic over 200 slots, cases seen: {sorted(cases)}")

    # Battery stays in bounds under random play.
    env = sim.Environment(seed=3)
    b_max = cfg["env"]["energy"]["b_max"]
    env.reset()
    for i in range(500):
        out = env.step(env.valid_actions()[i % 3 % len(env.valid_actions())])
        assert -1e-9 <= out["battery"] <= b_max + 1e-9
    print("environment: battery bounds hold over 500 random slots")

    # A short training run learns something and evaluates deterministically.
    fast = json.loads(sim.default_config())
    fast["agent"]["episodes"] = 8
    fast["agent"]["warmup"] = 64
    agent = sim.Agent("d3qn", json.dumps(fast), seed=1)
    curve = agent.train()
    assert len(curve) == 8
    metrics = agent.evaluate(episodes=5)
    assert 0.0 <= metrics["access_fraction"] <= 1.0
    assert metrics["avg_aoi"] >= 1.0
    print(f"agent: trained 8 episodes, eval avg_aoi={metrics['avg_aoi']:.2f} "
          f"access={metrics['access_fraction']:.2f}")

    # Greedy action query with a mask.
    a = agent.act(env.normalized_state(), ["no_sense", "silent"])
    assert a in ("no_sense", "silent")

    # Checkpoint round-trip.
    with tempfile.TemporaryDirectory() as td:
        path = str(Path(td) / "agent.qnet")
        agent.save(path)
        agent2 = sim.Agent("d3qn", json.dumps(fast), seed=99)
        agent2.load(path)
        s = [0.2, 0.5, 0.3, 0.0]
        assert agent.act(s) == agent2.act(s)
    print("agent: checkpoint save/load round-trips")

    # Oracle: value iteration on the fully observed toy.
    oracle = sim.solve_oracle(n_aoi=4, n_battery=3, n_harvest=6, n_channel=4, gamma=0.9)
    assert len(oracle["v"]) == 4 * 3 * 2
    assert all(p in ("no_sense", "silent", "overlay", "underlay", "underlay_denied")
               for p in oracle["policy"])
    # With energy at hand, some state must prefer transmitting.
    assert any(p in ("overlay", "underlay") for p in oracle["policy"])
    print(f"oracle: solved {len(oracle['v'])} states")

    # Backprop agrees with finite differences.
    worst = sim.gradient_check_worst(nets=3, seed=0)
    assert worst < 1e-6, f"gradient check failed: {worst}"
    print(f"gradcheck: worst rel err {worst:.2e}")

    print("smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
