"""Compare the compiled and pure-Python SGD layout kernels.

Runs the same embedding with both backends, reports wall time for each,
and verifies that the resulting coordinates are bit-identical.

Usage: python3 benchmarks/layout_benchmark.py [--points N] [--epochs E]
"""

import argparse
import time

import numpy as np

from paretolab import _layout_py, embed


def run_backend(backend, X, cfg):
    saved = embed._layout_backend
    embed._layout_backend = backend
    try:
        t0 = time.perf_counter()
        Y = embed.embed_points(X, cfg)
        return Y, time.perf_counter() - t0
    finally:
        embed._layout_backend = saved


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=1375)
    parser.add_argument("--dims", type=int, default=5)
    parser.add_argument("--epochs", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    X = rng.uniform(size=(args.points, args.dims))
    cfg = embed.EmbedConfig(epochs=args.epochs, seed=args.seed)

    print(f"active backend at import time: {embed.LAYOUT_BACKEND}")
    print(f"{args.points} points, {args.dims} dims, {args.epochs} epochs")

    backends = [("python", _layout_py)]
    if embed.LAYOUT_BACKEND == "cython":
        backends.insert(0, ("cython", embed._layout_backend))

    results = {}
    for name, backend in backends:
        Y, seconds = run_backend(backend, X, cfg)
        results[name] = Y
        print(f"  {name:>7}: {seconds:8.2f} s")

    if len(results) == 2:
        identical = np.array_equal(results["cython"], results["python"])
        print(f"bit-identical coordinates: {identical}")
        if not identical:
            raise SystemExit("backends disagree")
    else:
        print("compiled backend unavailable; ran pure Python only")


if __name__ == "__main__":
    main()
