"""Compare the compiled and pure-Python annealing kernels on the case instance.

    python benchmarks/bench_kernel.py [--repeat 5] [--chains 50]

Each timing runs ``--chains`` full chains with distinct seeds at the default
parameters; the best of ``--repeat`` timings is reported.
"""

import argparse
import timeit

from ssopt import _kernel_py, io, kernel, model
from ssopt.annealing import SaParams

START = [2, 3, 4, 1, 5, 6]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--chains", type=int, default=50)
    ap.add_argument("--max-iters", type=int, default=SaParams().max_iters)
    args = ap.parse_args()

    inst = io.load_problem(io.fixture_path("firm600"))
    ci = model.compile_instance(inst)
    c_ref = model.total_cost(inst, model.allocate(inst, START)).total
    p = SaParams(max_iters=args.max_iters)
    kw = dict(t_init=p.t_init, alpha=p.alpha, markov_len=p.markov_len, t_min=p.t_min,
              max_iters=p.max_iters, stagnation_limit=p.stagnation_limit, mode=0, c_ref=c_ref)

    backends = [("python", _kernel_py)]
    if kernel._native is not None:
        backends.insert(0, ("cython", kernel._native))
    else:
        print("compiled kernel not built; timing the Python kernel only")

    moves = sum(len(_kernel_py.run_chain(ci, START, seed=s, **kw)[2]) - 1 for s in range(args.chains))
    results = {}
    for name, mod in backends:
        def batch(mod=mod):
            for s in range(args.chains):
                mod.run_chain(ci, START, seed=s, **kw)
        best = min(timeit.repeat(batch, number=1, repeat=args.repeat))
        results[name] = best
        print(f"{name:7s} {best * 1e3:9.2f} ms for {args.chains} chains "
              f"({moves} moves, {best / moves * 1e6:.2f} us/move)")
    if len(results) == 2:
        print(f"speedup {results['python'] / results['cython']:.1f}x")


if __name__ == "__main__":
    main()
