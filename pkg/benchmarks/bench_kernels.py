"""Time the compiled kernels against the pure-Python fallback.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat N] [--json]``

Each kernel runs on identical inputs under both backends; the table reports
the best-of-``repeat`` wall time per call and the speedup. Backends that are
not importable are reported as missing.
"""

import argparse
import json
import timeit

import numpy as np

from cdm import kernels


def _cases(rng):
    X = rng.standard_normal((400, 10))
    Y = rng.standard_normal((300, 10))
    U, V = rng.standard_normal((150, 2)), rng.standard_normal((9, 2))
    lu, lv = rng.integers(0, 3, 150), rng.integers(0, 3, 9)
    pts = rng.standard_normal((50, 5))
    F = rng.standard_normal((120, 4))
    y = np.where(F[:, 0] + 0.5 * rng.standard_normal(120) > 0, 1.0, -1.0)
    K = np.exp(-0.25 * ((F[:, None, :] - F[None, :, :]) ** 2).sum(-1))
    return {
        "pairwise_dist 400x300x10": lambda b: b.pairwise_dist(X, Y),
        "psi_sums N=159 d=2": lambda b: b.psi_sums(U, lu, V, lv),
        "weiszfeld k=50 d=5": lambda b: b.weiszfeld(pts, 1e-10, 1000),
        "smo n=120 rbf": lambda b: b.smo(K, y, 1.0, 1e-3, 100000),
    }


def run(repeat=5):
    rng = np.random.default_rng(0)
    rows = []
    for name, call in _cases(rng).items():
        row = {"kernel": name}
        for backend in ("python", "compiled"):
            mod = kernels.BACKENDS.get(backend)
            if mod is None:
                row[backend] = None
                continue
            timer = timeit.Timer(lambda: call(mod))
            number, _ = timer.autorange()
            row[backend] = min(timer.repeat(repeat, number)) / number
        if row["python"] and row.get("compiled"):
            row["speedup"] = row["python"] / row["compiled"]
        rows.append(row)
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", action="store_true", help="print rows as JSON")
    args = parser.parse_args()
    rows = run(args.repeat)
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    fmt = lambda t: "missing" if t is None else f"{t * 1e3:9.3f} ms"  # noqa: E731
    print(f"{'kernel':28s} {'python':>12s} {'compiled':>12s} {'speedup':>8s}")
    for r in rows:
        sp = f"{r['speedup']:7.1f}x" if "speedup" in r else "   n/a"
        print(f"{r['kernel']:28s} {fmt(r['python']):>12s} {fmt(r.get('compiled')):>12s} {sp:>8s}")


if __name__ == "__main__":
    main()
