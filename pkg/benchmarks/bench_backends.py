#!/usr/bin/env python3
"""Benchmark the compiled trajectory kernels against the numpy fallback.

Times the two hot kernels directly (map accumulation and Trotter stepping)
and a full ensemble average end-to-end under each backend, checking that
both produce the same numbers.

Usage: python benchmarks/bench_backends.py
"""

import os
import subprocess
import sys
import time

import numpy as np

from qmskit import _kernels_py

try:
    from qmskit import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _random_unitaries(rng, shape):
    *lead, n, _ = shape
    out = np.empty(shape, dtype=complex)
    flat = out.reshape(-1, n, n)
    for i in range(flat.shape[0]):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        q, r = np.linalg.qr(a)
        flat[i] = q * (np.diag(r) / np.abs(np.diag(r)))
    return np.ascontiguousarray(out)


def _time(fn, reps=5):
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_accumulate(rng, n, batch=4096, times=4):
    v = _random_unitaries(rng, (batch, times, n, n))
    results = {}
    for label, mod in (("python", _kernels_py), ("compiled", _kernels_c)):
        if mod is None:
            continue
        s1 = np.zeros((times, n * n, n * n), dtype=complex)
        s2 = np.zeros((times, n * n, n * n), dtype=float)
        results[label] = (
            _time(lambda m=mod, a=s1, b=s2: m.accumulate_conjugation_maps(v, a, b)),
            s1.copy(),
        )
    return results


def bench_trotter(rng, n, batch=512, steps=400, n_jumps=1, n_diffs=2):
    ham = _random_unitaries(rng, (1, n, n))[0]
    jump_ops = _random_unitaries(rng, (n_jumps, n, n))
    diff_vecs = _random_unitaries(rng, (n_diffs, n, n))
    diff_vals = np.ascontiguousarray(rng.normal(size=(n_diffs, n)))
    dws = np.ascontiguousarray(0.05 * rng.normal(size=(batch, steps, n_diffs)))
    kicks = np.ascontiguousarray(
        (rng.random(size=(batch, steps, n_jumps)) < 0.05).astype(np.uint8)
    )
    v0 = _random_unitaries(rng, (batch, n, n))
    results = {}
    for label, mod in (("python", _kernels_py), ("compiled", _kernels_c)):
        if mod is None:
            continue
        def run(m=mod):
            v = v0.copy()
            m.trotter_advance(v, ham, jump_ops, kicks, diff_vecs, diff_vals, dws)
            return v
        results[label] = (_time(run, reps=3), run())
    return results


def bench_end_to_end(n_traj=40000):
    code = (
        "import time, numpy as np\n"
        "from qmskit import SimulationConfig, ensemble_average, ClassicalModel, "
        "JumpChannel, DiffusionChannel, TROTTERIZED\n"
        "from qmskit._backend import backend_name\n"
        "sz = np.diag([1.0, -1.0]).astype(complex)\n"
        "sx = np.array([[0, 1], [1, 0]], dtype=complex)\n"
        "model = ClassicalModel((JumpChannel(np.diag([1.0, np.exp(0.9j)]), 1.0),),\n"
        "                       (DiffusionChannel(0.7 * sz), DiffusionChannel(0.4 * sx)),\n"
        "                       np.zeros((2, 2)))\n"
        f"config = SimulationConfig(times=(0.5, 1.0), n_traj={n_traj}, "
        "master_seed=9, dt=0.02, mode=TROTTERIZED)\n"
        "t0 = time.perf_counter()\n"
        "emp = ensemble_average(model, config)\n"
        "dt = time.perf_counter() - t0\n"
        "print(f'{backend_name()}: {dt:.2f}s')\n"
        "np.save(f'/tmp/bench_{backend_name()}.npy', np.array(emp.mean_maps))\n"
    )
    for backend in ("python", "compiled"):
        if backend == "compiled" and _kernels_c is None:
            continue
        env = dict(os.environ, QMSKIT_BACKEND=backend)
        subprocess.run([sys.executable, "-c", code], env=env, check=True)
    if _kernels_c is not None:
        a = np.load("/tmp/bench_python.npy")
        b = np.load("/tmp/bench_compiled.npy")
        print(f"  end-to-end agreement: max|diff| = {np.abs(a - b).max():.2e}")


def main():
    rng = np.random.default_rng(0)
    if _kernels_c is None:
        print("compiled extension unavailable; timing the fallback only")

    print("== accumulate_conjugation_maps (4096 trajectories x 4 times) ==")
    for n in (2, 4):
        res = bench_accumulate(rng, n)
        line = f"N={n}:"
        for label, (t, _) in res.items():
            line += f"  {label} {t * 1e3:8.2f} ms"
        if len(res) == 2:
            line += f"  speedup x{res['python'][0] / res['compiled'][0]:.1f}"
            assert np.allclose(res["python"][1], res["compiled"][1], atol=1e-12)
        print(line)

    print("== trotter_advance (512 trajectories x 400 steps) ==")
    for n in (2, 4):
        res = bench_trotter(rng, n)
        line = f"N={n}:"
        for label, (t, _) in res.items():
            line += f"  {label} {t * 1e3:8.2f} ms"
        if len(res) == 2:
            line += f"  speedup x{res['python'][0] / res['compiled'][0]:.1f}"
            assert np.allclose(res["python"][1], res["compiled"][1], atol=1e-10)
        print(line)

    print("== ensemble_average end-to-end (Trotterized, 40k trajectories) ==", flush=True)
    bench_end_to_end()


if __name__ == "__main__":
    main()
