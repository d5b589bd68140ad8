"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--size 256] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from ctrlmag._kernels import _pykernels

try:
    from ctrlmag._kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(n, rng):
    img = rng.random((n, n, 1))
    xs, ys = np.meshgrid(np.arange(n, dtype=float), np.arange(n, dtype=float))
    xs = xs + rng.normal(0, 2, xs.shape)
    ys = ys + rng.normal(0, 2, ys.shape)
    gx, gy, gt = (rng.normal(size=(n, n)) for _ in range(3))
    mask = rng.random((n, n)) < 0.01
    vals = rng.normal(size=(n * n, 2))
    return {
        "sample_bilinear": lambda k: k.sample_bilinear(img, xs, ys),
        "lk_solve": lambda k: k.lk_solve(gx, gy, gt, 7, 1e-4, 1e-9),
        "edt_sq": lambda k: k.edt_sq(mask),
        "splat_bilinear": lambda k: k.splat_bilinear(xs.ravel(), ys.ravel(), vals, n, n),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    print(f"{'kernel':<16} " + " ".join(f"{b + ' ms':>12}" for b in backends) + f" {'speedup':>9}")
    for name, fn in cases(args.size, rng).items():
        ms = {b: 1e3 * min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)) for b, k in backends.items()}
        speed = f"{ms['python'] / ms['cython']:8.1f}x" if "cython" in ms else "      n/a"
        print(f"{name:<16} " + " ".join(f"{ms[b]:12.2f}" for b in backends) + f" {speed}")


if __name__ == "__main__":
    main()
