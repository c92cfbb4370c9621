"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from crgscore import _pykernels

try:
    from crgscore import _ckernels
except ImportError:
    _ckernels = None


def cases(rng):
    pred = rng.integers(0, 2, (3039, 18)).astype(np.uint8)
    ref = rng.integers(0, 2, (3039, 18)).astype(np.uint8)
    a = rng.integers(0, 50, 400).astype(np.int64)
    b = rng.integers(0, 50, 400).astype(np.int64)
    return {
        "confusion_counts 3039x18": lambda m: m.confusion_counts(pred, ref),
        "lcs_length 400x400": lambda m: m.lcs_length(a, b),
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = {"python": _pykernels}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    else:
        print("compiled kernels not built; timing the fallback only")
    print(f"{'kernel':<26}" + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}")
    for name, fn in cases(np.random.default_rng(0)).items():
        times = {}
        for bname, mod in backends.items():
            timer = timeit.Timer(lambda: fn(mod))
            number, _ = timer.autorange()
            times[bname] = min(timer.repeat(args.repeat, number)) / number
        row = f"{name:<26}" + "".join(f"{t * 1e3:>12.3f}ms" for t in times.values())
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
