"""Time the numba kernels against their numpy counterparts.

    python benchmarks/bench_kernels.py [--repeat N]

Both paths are called directly through ``kernels.NUMBA_IMPL`` and
``kernels.NUMPY_IMPL``, so one process measures both.  Full forest training
is timed in subprocesses with ``FALLGUARD_DISABLE_NUMBA`` set and unset.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from fallguard import kernels
from fallguard._accel import HAVE_NUMBA
from fallguard.features import to_matrix
from fallguard.simgen import generate_dataset


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


_TRAIN = """
import time
from fallguard.classify import train_random_forest
from fallguard.features import to_matrix
from fallguard.simgen import generate_dataset
X, y = to_matrix(generate_dataset(600, seed=42))
train_random_forest(X[:50], y[:50], seed=0)  # compile outside the timing
t0 = time.perf_counter()
train_random_forest(X, y, seed=42)
print(time.perf_counter() - t0)
"""


def train_time(disable_numba: bool) -> float:
    env = dict(os.environ)
    env.pop("FALLGUARD_DISABLE_NUMBA", None)
    if disable_numba:
        env["FALLGUARD_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", _TRAIN], env=env, check=True, capture_output=True, text=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-train", action="store_true")
    args = ap.parse_args()
    if not HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")

    X, y = to_matrix(generate_dataset(600, seed=42))
    X = np.ascontiguousarray(X)
    idx = np.arange(X.shape[0], dtype=np.int64)
    feats = np.random.default_rng(0).permutation(66).astype(np.int64)
    Q = np.ascontiguousarray(X[:500])
    times = np.arange(11, dtype=np.float64) / 10
    vecs = np.ascontiguousarray(X[:11])

    cases = {
        "best_split (7200 x 9 features)": lambda impl: impl["best_split"](X, y, idx, feats, 9, 12),
        "knn_vote (500 queries vs 7200)": lambda impl: impl["knn_vote"](Q, X, y, 5, 12),
        "motion_rate (11-frame window)": lambda impl: impl["motion_rate"](times, vecs),
    }
    print(f"{'kernel':<34}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for name, call in cases.items():
        a = best_of(lambda: call(kernels.NUMBA_IMPL), args.repeat)
        b = best_of(lambda: call(kernels.NUMPY_IMPL), args.repeat)
        print(f"{name:<34}{a * 1e3:>10.3f}ms{b * 1e3:>10.3f}ms{b / a:>9.1f}x")
    if not args.skip_train:
        a, b = train_time(False), train_time(True)
        print(f"{'train_random_forest (100 trees)':<34}{a:>11.2f}s{b:>11.2f}s{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
