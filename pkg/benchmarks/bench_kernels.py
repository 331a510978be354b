"""Compare the compiled exterior-algebra kernels with the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat N]

Times wedge and interior products on dense random forms in dimensions 3, 7
and 8, plus one end-to-end operation (metric recovery from a three-form),
for both backends.
"""

import argparse
import timeit

import numpy as np

from g2lab import _kernels_py

try:
    from g2lab import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on build
    _compiled = None


def _dense(rng, n, degree):
    c = np.zeros(1 << n)
    masks = [m for m in range(1 << n) if bin(m).count("1") == degree]
    c[masks] = rng.normal(size=len(masks))
    return c


def _cases(rng):
    for n, p, q in ((3, 1, 1), (7, 3, 4), (7, 2, 2), (8, 4, 4)):
        yield f"wedge  dim={n} {p}^{q}", "wedge", (_dense(rng, n, p), _dense(rng, n, q), n)
    for n, p in ((3, 2), (7, 3), (8, 4)):
        v = np.zeros(8)
        v[:n] = rng.normal(size=n)
        yield f"interior dim={n} deg={p}", "interior", (v, _dense(rng, n, p), n)


def _time(fn, args, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-7)))
    best = min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat))
    return best / number


def _metric_recovery(kernels, repeat):
    # run the full metric recovery with the module-level backend swapped
    from g2lab import exterior
    from g2lab.g2 import metric_from_three_form, standard_phi

    saved = exterior.kernels
    exterior.kernels = kernels
    try:
        phi = standard_phi()
        return _time(metric_from_three_form, (phi,), repeat)
    finally:
        exterior.kernels = saved


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = [("python", _kernels_py)]
    if _compiled is not None:
        backends.append(("cython", _compiled))
    else:
        print("compiled kernels not available; timing the fallback only")
    header = f"{'case':<26}" + "".join(f"{name:>14}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for label, op, call_args in _cases(rng):
        times = [_time(getattr(k, op), call_args, args.repeat) for _, k in backends]
        line = f"{label:<26}" + "".join(f"{t * 1e6:>12.2f}us" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:>9.1f}x"
        print(line)
    times = [_metric_recovery(k, args.repeat) for _, k in backends]
    line = f"{'metric_from_three_form':<26}" + "".join(f"{t * 1e6:>12.2f}us" for t in times)
    if len(times) == 2:
        line += f"{times[0] / times[1]:>9.1f}x"
    print(line)


if __name__ == "__main__":
    main()
