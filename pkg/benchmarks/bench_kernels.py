"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py --sentences 20000 --langs 100
"""
import argparse
import json
import time

import numpy as np

from bitextkit import charclass, kernels

SAMPLE = [
    "The quick brown fox jumps over the lazy dog, again and again.",
    "Съешь же ещё этих мягких французских булок, да выпей чаю.",
    "Ξεσκεπάζω την ψυχοφθόρα βδελυγμία.",
    "ऋषियों को सताने वाले दुष्ट राक्षसों के राजा रावण का सर्वनाश करने वाले",
    "我能吞下玻璃而不伤身体。",
    "!!! ??? ... 1234 5678",
]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_histogram(impl, sentences, repeat):
    table = charclass.class_table()

    def run():
        for s in sentences:
            impl.class_histogram(s, table, charclass.NUM_CLASSES)

    return best_of(run, repeat)


def bench_sinkhorn(impl, L, repeat, seed=0):
    rng = np.random.default_rng(seed)
    Q = np.triu(rng.lognormal(0, 2, (L, L)), 1)
    Q[np.triu(rng.random((L, L)) < 0.3, 1)] = 0.0
    Q = Q + Q.T
    Q /= Q.sum()
    mass = Q.sum(axis=1)
    q = mass ** 0.2 / (mass ** 0.2).sum()
    iterations = []

    def run():
        P = Q.copy()
        it, _ = impl.sinkhorn_scale(P, q, q, 1e-10, 10_000)
        iterations.append(it)

    return best_of(run, repeat), iterations[-1]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sentences", type=int, default=20_000)
    ap.add_argument("--langs", type=int, default=100)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print results as JSON")
    args = ap.parse_args(argv)

    sentences = [SAMPLE[i % len(SAMPLE)] for i in range(args.sentences)]
    charclass.class_table()  # build the lookup table outside the timed region
    results = {}
    for name, impl in sorted(kernels.available_backends().items()):
        hist = bench_histogram(impl, sentences, args.repeat)
        sk, iters = bench_sinkhorn(impl, args.langs, args.repeat)
        results[name] = {"class_histogram_s": hist, "sentences_per_s": args.sentences / hist,
                         "sinkhorn_s": sk, "sinkhorn_iterations": iters}

    if args.json:
        print(json.dumps(results, indent=2))
        return
    print(f"{'backend':<8} {'histogram (s)':>14} {'sent/s':>12} {'sinkhorn L=' + str(args.langs) + ' (s)':>20} {'iters':>6}")
    for name, r in results.items():
        print(f"{name:<8} {r['class_histogram_s']:>14.4f} {r['sentences_per_s']:>12.0f} "
              f"{r['sinkhorn_s']:>20.5f} {r['sinkhorn_iterations']:>6}")
    if "cython" in results:
        py, cy = results["python"], results["cython"]
        print(f"speedup: histogram x{py['class_histogram_s'] / cy['class_histogram_s']:.1f}, "
              f"sinkhorn x{py['sinkhorn_s'] / cy['sinkhorn_s']:.1f}")


if __name__ == "__main__":
    main()
