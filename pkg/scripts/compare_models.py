"""Build the three dilation models of one tuple and compare them.

Prints model dimensions and residuals, the factorization map between the
Douglas and Schaffer models, and the boundary behaviour of the
characteristic function of the last coordinate.

    python3 scripts/compare_models.py --n 2 --r 1 --k 3 --norm 0.85
"""

import argparse
import warnings

import numpy as np

from gamma_models import generators as gen
from gamma_models.errors import GammaModelsError
from gamma_models.models import (
    characteristic_function,
    degree_for_tail,
    douglas_model,
    factorize,
    nagy_foias_model,
    schaffer_model,
)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--r", type=int, default=1, help="coefficient dimension of the generating pencil")
    p.add_argument("--k", type=int, default=3, help="number of kernel points")
    p.add_argument("--norm", type=float, default=0.85, help="bound on ||S_n||")
    p.add_argument("--degree", type=int, default=12, help="truncation degree of the Schaffer model")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    warnings.simplefilter("ignore")

    rng = np.random.default_rng(args.seed)
    T, _ = gen.compressed_tuple(args.n, args.r, args.k, rng, max_norm=args.norm)
    Sn = T[T.n - 1]
    NS = args.degree
    ND = NS + 1 + degree_for_tail(Sn, 1e-15)
    print(f"tuple: n = {T.n}, dim = {T.dim}")

    models = {}
    for name, build in (("schaffer", lambda: schaffer_model(T, N=NS)),
                        ("douglas", lambda: douglas_model(T, N=ND)),
                        ("nagy-foias", lambda: nagy_foias_model(T, N=ND, M=2 * ND + 2))):
        try:
            models[name] = m = build()
        except GammaModelsError as exc:
            print(f"  {name:<11} refused: {exc.code}")
            continue
        rep = m.report
        print(f"  {name:<11} dim {m.dim:>5}  embed {rep['embedding_isometry']:.1e}  "
              f"intertw {max(rep['intertwining']):.1e}  words {rep['words']:.1e}")

    fx = factorize(models["douglas"], models["schaffer"])
    r = fx.report
    print(f"douglas <- schaffer: isometry {r['isometry']:.1e}, embedding {r['embedding']:.1e}, "
          f"intertwining {r['intertwining_max']:.1e}, range vs span {r['range_vs_span']:.1e}")

    theta = characteristic_function(Sn)
    b = theta.boundary_report(64)
    print(f"characteristic function {theta.shape}: norm excess {b['norm_excess']:.1e}, "
          f"inner defect {b['inner_defect']:.1e}, Pythagoras {b['pythagoras']:.1e}")


if __name__ == "__main__":
    main()
