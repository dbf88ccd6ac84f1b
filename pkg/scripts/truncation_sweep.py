"""Douglas-model residuals as a function of the Hardy truncation degree.

The intertwining defect of the truncated model is controlled by the tail
||S_n^{*(N+1)}||; this script prints both side by side for a few tuples so
the geometric decay (and the floor at rounding level) is visible.

    python3 scripts/truncation_sweep.py --norm 0.8 --degrees 4 8 16 32 64
"""

import argparse
from dataclasses import dataclass, field

import numpy as np

from gamma_models import generators as gen
from gamma_models.models import douglas_model, tail_norm, verify_model
from gamma_models.opcore import op_norm


@dataclass
class SweepConfig:
    norm: float = 0.8
    degrees: list = field(default_factory=lambda: [4, 8, 16, 32, 64])
    seed: int = 0


def tuples(cfg):
    rng = np.random.default_rng(cfg.seed)
    yield "scalar n=2", gen.scalar_tuple([cfg.norm, 1.0])
    yield "compression n=2", gen.compressed_tuple(2, 2, 3, rng, max_norm=cfg.norm)[0]
    z = gen.disc_points(3, 3, rng, cfg.norm ** (1 / 3))
    yield "normal n=3", gen.diagonal_tuple(z, gen.random_unitary(3, rng))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--norm", type=float, default=0.8, help="bound on ||S_n|| of the generated tuples")
    p.add_argument("--degrees", type=int, nargs="+", default=[4, 8, 16, 32, 64])
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    cfg = SweepConfig(args.norm, args.degrees, args.seed)
    for name, T in tuples(cfg):
        Sn = T[T.n - 1]
        print(f"{name}: ||S_n|| = {op_norm(Sn):.3f}")
        print(f"  {'N':>4} {'tail':>9} {'embed':>9} {'intertw':>9} {'words':>9}")
        for N in cfg.degrees:
            m = douglas_model(T, N=N)
            rep = verify_model(m, T, L=min(6, N), certify=False)
            print(f"  {N:>4} {tail_norm(Sn, N):>9.1e} {rep['embedding_isometry']:>9.1e} "
                  f"{max(rep['intertwining']):>9.1e} {rep['words']:>9.1e}")


if __name__ == "__main__":
    main()
