"""Survey of the numerical-radius slack of fundamental operators over a seeded corpus.

For each arity and recipe, solves the fundamental equations of random
Gamma_n-contractions and reports the smallest slack between the pencil
numerical radius and its binomial bound, together with the solver residuals.

    python3 scripts/radius_survey.py --count 30 --seed 0
"""

import argparse
import json
from dataclasses import asdict, dataclass

import numpy as np

from gamma_models import generators as gen
from gamma_models.fundops import solve_fundamental


@dataclass
class SurveyConfig:
    count: int = 30
    seed: int = 0
    arities: tuple = (2, 3, 4)
    kinds: tuple = ("scalar", "diagonal", "compression")


def survey(cfg: SurveyConfig):
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for n in cfg.arities:
        for kind in cfg.kinds:
            margins, r16, r17, gap = [], 0.0, 0.0, 0.0
            for _ in range(cfg.count):
                T = gen.corpus_contraction(n, rng, kind)
                F = solve_fundamental(T)
                if F.rank:
                    margins.append(F.radius_margin)
                r16, r17, gap = max(r16, F.residual_16), max(r17, F.residual_17), max(gap, F.oracle_gap)
            rows.append(dict(n=n, kind=kind, min_margin=min(margins, default=np.nan),
                             median_margin=float(np.median(margins)) if margins else np.nan,
                             residual_16=r16, residual_17=r17, oracle_gap=gap))
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", help="also write the rows to this file")
    args = p.parse_args()
    cfg = SurveyConfig(count=args.count, seed=args.seed)
    rows = survey(cfg)
    print(f"{'n':>2} {'kind':<12} {'min slack':>10} {'median':>8} {'res16':>9} {'res17':>9} {'oracle':>9}")
    for r in rows:
        print(f"{r['n']:>2} {r['kind']:<12} {r['min_margin']:>10.4f} {r['median_margin']:>8.4f} "
              f"{r['residual_16']:>9.1e} {r['residual_17']:>9.1e} {r['oracle_gap']:>9.1e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"config": asdict(cfg), "rows": rows}, fh, indent=1)


if __name__ == "__main__":
    main()
