"""Timing comparison of the compiled and interpreted kernel paths.

The backend is fixed at import time by WH_KERNELS, so this script re-invokes
itself in a subprocess per backend and prints one table at the end.  Run it
from the repository root:

    python benchmarks/bench_kernels.py

Pass --payload to run the measurement in-process under whatever backend the
current environment selects (that is what the subprocesses do).
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def _random_codes(rng, rank, length):
    mags = rng.integers(1, rank + 1, size=length)
    signs = rng.choice(np.array([-1, 1], dtype=np.int64), size=length)
    return (mags * signs).astype(np.int64)


def _time(fn, reps=3):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _bench():
    from whitehead import _kernels as K
    from whitehead.bases import Automorphism, relabel_tables
    from whitehead.words import Word

    rng = np.random.default_rng(7)
    rank = 3
    raw = [_random_codes(rng, rank, 400) for _ in range(2000)]
    reduced = [K.free_reduce(a) for a in raw]

    basis = Automorphism.from_images(
        rank, [Word.parse(rank, t) for t in ("abc", "bc", "c")]
    )
    flat, off = K.build_subst_table(
        [np.asarray(w.codes, dtype=np.int64) for w in basis.forward], rank
    )

    perms = relabel_tables(rank)
    tuples = []
    for _ in range(300):
        arrs = [K.free_reduce(_random_codes(rng, rank, 60)) for _ in range(3)]
        arrs = [a[slice(*K.cyclic_bounds(a))] for a in arrs]
        offsets = [0]
        for a in arrs:
            offsets.append(offsets[-1] + len(a))
        tuples.append(
            (
                np.concatenate(arrs),
                np.asarray(offsets, dtype=np.int64),
                np.ones(len(arrs), dtype=np.int64),
            )
        )

    # first calls pay any compilation cost; keep that out of the numbers
    K.free_reduce(raw[0])
    K.substitute(reduced[0], flat, off, rank)
    K.least_rotation(K.key_codes(reduced[0], rank))
    K.canonical_tuple(*tuples[0], perms, rank)

    times = {}
    times["free_reduce"] = _time(lambda: [K.free_reduce(a) for a in raw])
    times["substitute"] = _time(
        lambda: [K.substitute(a, flat, off, rank) for a in reduced]
    )
    keys = [K.key_codes(a, rank) for a in reduced if len(a)]
    times["least_rotation"] = _time(lambda: [K.least_rotation(k) for k in keys])
    times["canonical_tuple"] = _time(
        lambda: [K.canonical_tuple(f, o, k, perms, rank) for f, o, k in tuples]
    )
    return {"jit": K.JIT_ENABLED, "times": times}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if "--payload" in argv:
        print(json.dumps(_bench()))
        return 0

    rows = {}
    for backend in ("numba", "python"):
        env = dict(os.environ, WH_KERNELS=backend)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--payload"],
            env=env,
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            return proc.returncode
        rows[backend] = json.loads(proc.stdout.strip().splitlines()[-1])

    jit_note = "compiled" if rows["numba"]["jit"] else "numba unavailable, interpreted"
    print(f"backends: numba ({jit_note}) vs python (interpreted)")
    print(f"{'kernel':<18} {'numba':>10} {'python':>10} {'speedup':>9}")
    for name, t_numba in rows["numba"]["times"].items():
        t_py = rows["python"]["times"][name]
        ratio = t_py / t_numba if t_numba > 0 else float("inf")
        print(f"{name:<18} {t_numba:>9.4f}s {t_py:>9.4f}s {ratio:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
