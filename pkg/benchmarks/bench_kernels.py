"""Compare the compiled and pure-Python orbit kernels.

Run with ``python3 benchmarks/bench_kernels.py [n]``. Each kernel is timed
on the torus-regime parameters, and the outputs of both backends are
compared: "same" is bitwise equality, otherwise the largest relative
difference is shown (``math.hypot`` in CPython is not the C library one).
"""
import sys
import time

import numpy as np

from bykov._backend import available, get_kernels
from bykov.maps import ReturnMap
from bykov.model import ModelParams


def _time(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main(n: int = 200_000) -> None:
    m = ReturnMap.from_params(ModelParams(1.1, 0.9, 1.0, 1.1, 0.9, 1.0, 0.01, 0.002))
    args = m.kernel_args()
    y0 = 1.5e-3
    cases = {
        "orbit": lambda k: k.orbit(0.0, y0, n, 0, *args),
        "rotation": lambda k: k.rotation(0.0, y0, n, 0, *args),
        "lyapunov": lambda k: k.lyapunov(0.0, y0, n, 0, *args),
        "hopf_rk4": lambda k: k.hopf_rk4(0.5, 0.0, 1e-3, n, 0.0, 1.0, 1.0, 0, 0, 0, 0, False),
    }
    backends = available()
    print(f"n = {n}; backends: {', '.join(backends)}")
    print(f"{'kernel':<10}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}  agreement")
    for name, call in cases.items():
        times, outs = [], []
        for b in backends:
            t, out = _time(call, get_kernels(b))
            times.append(t)
            outs.append(out)
        diffs = []
        for o in outs[1:]:
            for x, y in zip(outs[0], o):
                x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
                scale = np.maximum(np.abs(x), 1e-300)
                diffs.append(float(np.max(np.abs(x - y) / scale)) if x.size else 0.0)
        worst = max(diffs, default=0.0)
        same = "same" if worst == 0.0 else f"rel diff {worst:.1e}"
        speed = times[-1] / times[0] if len(times) > 1 else 1.0
        print(f"{name:<10}" + "".join(f"{t:>11.4f}s" for t in times) + f"{speed:>9.1f}x  {same}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 200_000)
