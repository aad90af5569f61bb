#!/usr/bin/env python3
"""Benchmark the stepping kernel: numba JIT path vs pure-Python fallback.

Runs the same scenario in two subprocesses (the path is chosen at import time
via FLAGELLASIM_NO_NUMBA) and reports steps/second for each.
"""

import argparse
import os
import subprocess
import sys

WORKER = """
import sys, time
from flagellasim.config import config_from_dict
from flagellasim.kernels import USING_NUMBA
from flagellasim.runtime import run_scenario

duration = float(sys.argv[1])
cfg = config_from_dict({
    "duration_s": duration,
    "command_script": [{"t_start_s": 0.0, "surge": 0.8, "yaw": 0.2}],
})
run_scenario(config_from_dict({"duration_s": 0.05}))  # warm the JIT
t0 = time.perf_counter()
run_scenario(cfg)
elapsed = time.perf_counter() - t0
steps = cfg.n_steps
label = "numba" if USING_NUMBA else "numpy-fallback"
print(f"{label}: {steps} steps in {elapsed:.3f} s -> {steps/elapsed:,.0f} steps/s")
"""


def run(env_flag: str | None, duration: float) -> None:
    env = dict(os.environ)
    env.pop("FLAGELLASIM_NO_NUMBA", None)
    if env_flag:
        env["FLAGELLASIM_NO_NUMBA"] = env_flag
    subprocess.run([sys.executable, "-c", WORKER, str(duration)], env=env, check=True)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--duration", type=float, default=30.0, help="simulated seconds")
    args = parser.parse_args()
    print(f"scenario: {args.duration:.0f} simulated seconds at 1 kHz physics", flush=True)
    run(None, args.duration)
    run("1", args.duration)


if __name__ == "__main__":
    main()
