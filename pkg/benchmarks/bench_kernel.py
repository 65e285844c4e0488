"""Time the compiled and pure-Python Monte Carlo kernels on the same workload.

    python benchmarks/bench_kernel.py --trials 100000 --repeat 3
"""

import argparse
import time

import numpy as np

from telesim import kernel
from telesim.harness import _kraus_for
from telesim.protocols import ChannelSpec


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--python-trials", type=int, default=None, help="trials for the Python backend (default: same)")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--alpha2", type=float, default=0.8)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    ch = ChannelSpec.from_alpha2(args.alpha2)
    backends = kernel.available_backends()
    if "cython" not in backends:
        print("compiled kernel not built; timing the Python fallback only")
    print(f"{'protocol':<26}{'backend':<9}{'trials':>9}{'best s':>10}{'trials/s':>13}")
    for proto in kernel.PROTOCOL_CODES:
        kr = _kraus_for(ch, proto)
        rates, outs = {}, {}
        for backend in backends:
            n = args.python_trials if backend == "python" and args.python_trials else args.trials
            dt, out = best_of(
                lambda: kernel.run_trials(proto, ch.alpha, ch.beta, args.seed, 0, n, None, kr, backend), args.repeat
            )
            rates[backend] = n / dt
            outs[backend] = out
            print(f"{proto:<26}{backend:<9}{n:>9}{dt:>10.4f}{n / dt:>13.0f}")
        if len(rates) == 2:
            m = min(len(outs["cython"][0]), len(outs["python"][0]))
            same = all(np.array_equal(a[:m], b[:m]) for a, b in zip(outs["cython"][:3], outs["python"][:3]))
            print(f"{'':<26}speedup {rates['cython'] / rates['python']:.1f}x, outcomes identical: {same}")


if __name__ == "__main__":
    main()
