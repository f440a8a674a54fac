"""Time the numba kernels against their numpy twins and check they agree.

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call per kernel is a warm-up (compile or cache load) and is
not timed.
"""
import argparse
import time

import numpy as np

from reachscale import _kernels
from reachscale.config import RunConfig
from reachscale.pipeline import make_world, prepare_reference, scale_reference
from reachscale.planner import draw_samples
from reachscale.simulator import run_trial


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def kernel_cases(cfg):
    w = make_world(cfg, 3)
    cx, cy, r = w.circles(0.01)
    rng = np.random.default_rng(0)
    pts = rng.random((200_000, 2)) * 0.5
    segs = rng.random((20_000, 4)) * 0.5
    M = cfg.M
    alpha = np.ones(M)
    lo = rng.integers(0, M - 2000, 500)
    hi = lo + rng.integers(1, 2000, 500)
    vals = rng.uniform(0.1, 1.0, 500)
    samples = draw_samples(w, cfg.rrt(0.01), 3)
    theta = np.linspace(0.0, np.pi / 2, M)
    gx, gy = 0.25 + 0.1 * np.cos(theta), 0.25 + 0.1 * np.sin(theta)
    return {
        "points_free (2e5 pts)": lambda k: k.points_free(
            pts[:, 0].copy(), pts[:, 1].copy(), cx, cy, r, w.width, w.height),
        "segments_free (2e4 segs)": lambda k: k.segments_free(
            segs[:, 0].copy(), segs[:, 1].copy(), segs[:, 2].copy(), segs[:, 3].copy(),
            cx, cy, r, w.width, w.height),
        "windowed_argmin (full grid)": lambda k: k.windowed_argmin(gx, gy, 0, M, 0.3, 0.3),
        "moving_average (n=201)": lambda k: k.moving_average(gx, 201),
        "min_assign (500 windows)": lambda k: k.min_assign(alpha, lo, hi, vals),
        "rrt_star (5000 samples)": lambda k: k.rrt_star(
            samples, w.start[0], w.start[1], cx, cy, r, w.width, w.height,
            cfg.step, cfg.rewire_radius),
    }


def trial_case(cfg):
    """One full offline + online trial, timed with each backend active."""
    w = make_world(cfg, 3)
    _, _, grid, _, _ = prepare_reference(w, cfg, 3)

    def go():
        profile, _ = scale_reference(grid, cfg, 3, w)
        return run_trial(w, grid, profile, cfg.tracker(), cfg.sim(3)).p

    return go


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels.numba_impl is None:
        raise SystemExit("numba is not installed; nothing to compare")
    cfg = RunConfig()
    impls = (_kernels.numpy_impl, _kernels.numba_impl)

    print(f"{'kernel':32s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}  agree")
    for name, fn in kernel_cases(cfg).items():
        fn(_kernels.numba_impl)   # warm-up
        t_np, out_np = best_of(lambda: fn(_kernels.numpy_impl), args.repeat)
        t_nb, out_nb = best_of(lambda: fn(_kernels.numba_impl), args.repeat)
        print(f"{name:32s} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:8.1f}  "
              f"{same(out_np, out_nb)}")

    go = trial_case(cfg)
    saved = _kernels.backend
    times, outs = [], []
    try:
        for impl in impls:
            _kernels.backend = impl
            go()
            t, out = best_of(go, max(1, args.repeat // 2))
            times.append(t)
            outs.append(out)
    finally:
        _kernels.backend = saved
    print(f"{'scale + scaled trial':32s} {1e3 * times[0]:11.2f} {1e3 * times[1]:11.2f} "
          f"{times[0] / times[1]:8.1f}  {same(outs[0], outs[1])}")


if __name__ == "__main__":
    main()
