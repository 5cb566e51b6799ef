"""Time the compiled kernels against the pure-Python ones.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Both backends must return identical results; the script exits non-zero if
they do not, or if the compiled module is not built.
"""

import argparse
import sys
import time

from octagen import _pykernels
from octagen.currents import builtin_logs, derive_index1
from octagen.search import template_space
from octagen.surgery import augment_pipeline

try:
    from octagen import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; run pip install -e . --no-build-isolation")
        return 1

    systems = [("O_18", derive_index1(builtin_logs("z18")[0])), ("K_48", augment_pipeline(48).final.system)]
    cases = []
    for name, rs in systems:
        succ, pred = rs._succ_pred
        dsig = [rs.signature[d >> 1] for d in range(2 * rs.edge_count)]
        cases.append((f"trace {name}", lambda m, a=(succ, pred, dsig): m.trace(*a)))
    for n in (30, 48, 72):
        ts = template_space(n)[:16]
        cases.append(
            (
                f"search n={n} x{len(ts)}",
                lambda m, ts=ts, n=n: [m.corner_search(n, list(t.corners), t.rng_seed, t.limit) for t in ts],
            )
        )

    print(f"{'case':<22} {'python':>10} {'cython':>10} {'speedup':>8}")
    mismatch = False
    for name, fn in cases:
        tp, rp = best_of(lambda: fn(_pykernels), args.repeat)
        tc, rc = best_of(lambda: fn(_ckernels), args.repeat)
        mismatch |= rp != rc
        flag = "" if rp == rc else "  MISMATCH"
        print(f"{name:<22} {tp * 1e3:>8.1f}ms {tc * 1e3:>8.2f}ms {tp / max(tc, 1e-9):>7.1f}x{flag}")
    return 1 if mismatch else 0


if __name__ == "__main__":
    sys.exit(main())
