"""Command-line interface: JSON in, JSON out.

Every subcommand reads a tuple document (``{"n", "dim", "matrices", "metadata"}``)
and writes a JSON result to stdout or ``-o``. Library errors are rendered as
``{"error": {"code", "message"}}``. The exit status is 0 when every reported
residual is within its budget, 1 when some budget is exceeded and 2 on errors.
"""

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import generators as gen
from .errors import ConfigError, GammaModelsError
from .fundops import solve_fundamental
from .gammaclass import CertParams, classify
from .hardy import canonical_gamma_unitary, wold
from .models import (
    DilationModel,
    douglas_model,
    factorize,
    nagy_foias_model,
    report_passed,
    schaffer_model,
    verify_model,
)
from .opcore import OperatorTuple, matrix_from_json, matrix_to_json


@dataclass
class RunConfig:
    tol: float = 1e-8
    degree: int = 16  # Hardy truncation N
    grid: int = 64  # torus grid M
    poly_degree: int = None  # None -> 2n
    trials: int = 200
    density: int = None  # None -> 48 grid (n <= 3) or 1e5 random points
    words: int = 6
    seed: int = 0

    def validate(self):
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        for name in ("degree", "grid", "trials", "words"):
            if getattr(self, name) < 0 or (name in ("grid", "trials") and getattr(self, name) == 0):
                raise ConfigError(f"{name} must be positive")
        if self.grid < 2 * self.degree + 1:
            raise ConfigError(f"grid {self.grid} < 2*degree+1 = {2 * self.degree + 1}")
        if self.poly_degree is not None and self.poly_degree < 1:
            raise ConfigError("poly_degree must be positive")
        if self.density is not None and self.density < 1:
            raise ConfigError("density must be positive")
        return self

    def cert_params(self):
        return CertParams(degree=self.poly_degree, trials=self.trials, density=self.density, tol=self.tol,
                          seed=self.seed)


@dataclass
class TupleDocument:
    n: int
    dim: int
    matrices: list
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_tuple(cls, T: OperatorTuple, **metadata):
        meta = dict(metadata)
        if T.structure:
            meta["structure"] = [list(b) for b in T.structure]
        if T.interior is not None:
            meta["interior"] = [int(i) for i in T.interior]
        return cls(T.n, T.dim, [matrix_to_json(a) for a in T.ops], meta)

    @classmethod
    def from_json(cls, doc):
        try:
            n, dim, mats = int(doc["n"]), int(doc["dim"]), doc["matrices"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed tuple document: {exc}") from exc
        if len(mats) != n:
            raise ConfigError(f"expected {n} matrices, found {len(mats)}")
        for m in mats:
            if int(m.get("dim", -1)) != dim:
                raise ConfigError("all matrices must have the declared dim")
        return cls(n, dim, mats, dict(doc.get("metadata", {})))

    def to_tuple(self):
        meta = self.metadata
        structure = [tuple(b) for b in meta["structure"]] if meta.get("structure") else None
        interior = np.asarray(meta["interior"], dtype=int) if meta.get("interior") is not None else None
        return OperatorTuple([matrix_from_json(m) for m in self.matrices], structure=structure, interior=interior)

    def to_json(self):
        return asdict(self)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj):
    # float repr is the shortest string that round-trips, so output is bit-faithful
    return json.dumps(_clean(obj), indent=1, sort_keys=True)


def _load(path):
    with open(path) as fh:
        return json.load(fh)


def _read_tuple(path):
    return TupleDocument.from_json(_load(path)).to_tuple()


# ---------------------------------------------------------------- commands


def cmd_gen(args, cfg):
    rng = np.random.default_rng(cfg.seed)
    n = args.n
    meta = {"seed": cfg.seed, "recipe": args.recipe}
    if args.recipe == "scalar":
        z = _parse_complex_list(args.z) if args.z else gen.disc_points(1, n, rng, 0.95)[0]
        T = gen.scalar_tuple(z)
        meta["z"] = [[float(v.real), float(v.imag)] for v in np.asarray(z, dtype=complex)]
    elif args.recipe == "diagonal":
        T = gen.diagonal_tuple(gen.disc_points(args.dim, n, rng, 0.95), gen.random_unitary(args.dim, rng))
    elif args.recipe == "pencil":
        T, _ = gen.pencil_model(n, args.r, cfg.degree, rng)
    elif args.recipe == "direct_sum":
        T, _, _ = gen.isometry_with_unitary(n, args.r, cfg.degree, args.dim, rng)
    elif args.recipe == "compression":
        T, _ = gen.compressed_tuple(n, args.r, args.k, rng, max_norm=args.max_norm)
    elif args.recipe == "random_commuting":
        T = gen.random_commuting(n, args.dim, rng)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown recipe {args.recipe}")
    return TupleDocument.from_tuple(T, **meta).to_json(), True


def cmd_certify(args, cfg):
    T = _read_tuple(args.input)
    cert = classify(T, tol=cfg.tol, cert_params=cfg.cert_params())
    return cert.to_json(), cert.label != "refuted"


def cmd_fundamental(args, cfg):
    T = _read_tuple(args.input)
    F = solve_fundamental(T, args.which, tol=cfg.tol)
    ok = F.residual_16 <= cfg.tol and F.residual_17 <= 10 * cfg.tol and F.radius_margin >= -cfg.tol
    return F.to_json(), ok


def cmd_wold(args, cfg):
    T = _read_tuple(args.input)
    w = wold(T, tol=cfg.tol)
    out = {
        "shift_mult": w.shift_mult,
        "degree": w.degree,
        "U_w": matrix_to_json(w.U_w),
        "pencil_coeffs": [matrix_to_json(e) for e in w.pencil_coeffs],
        "unitary_part": TupleDocument.from_tuple(w.unitary_part).to_json() if w.unitary_part.dim else None,
        "residuals": w.residuals,
    }
    return out, all(v <= cfg.tol for v in w.residuals.values())


def cmd_canonical(args, cfg):
    T = _read_tuple(args.input)
    c = canonical_gamma_unitary(T, max_iter=args.max_iter)
    out = {
        "rank": c.rank,
        "iterations": c.iterations,
        "label": c.label,
        "P": matrix_to_json(c.P),
        "tuple": TupleDocument.from_tuple(c.tuple).to_json() if c.rank else None,
        "residuals": c.residuals,
    }
    return out, c.residuals["monotonicity"] <= cfg.tol and c.label in ("unitary", "empty")


def _build(kind, T, cfg, degree=None):
    N = cfg.degree if degree is None else degree
    if kind == "douglas":
        return douglas_model(T, N=N, tol=cfg.tol)
    if kind == "nf":
        return nagy_foias_model(T, N=N, M=cfg.grid, tol=cfg.tol)
    if kind == "schaffer":
        return schaffer_model(T, N=N, tol=cfg.tol)
    raise ConfigError(f"unknown model kind {kind}")


def _model_document(model):
    doc = model.to_json()
    doc["metadata"] = {"structure": [list(b) for b in model.space_desc],
                       "interior": [int(i) for i in model.interior()], "recipe": f"dilate:{model.kind}"}
    return doc


def cmd_dilate(args, cfg):
    T = _read_tuple(args.input)
    model = _build(args.kind, T, cfg)
    L = min(cfg.words, model.info["degree"])
    if L != model.report.get("word_length"):
        model.report.update(verify_model(model, T, L=L, tol=cfg.tol, certify=False))
    ok = report_passed(model.report)
    doc = _model_document(model)
    if args.output_model:
        with open(args.output_model, "w") as fh:
            fh.write(dumps(doc))
    return doc, ok


def cmd_factorize(args, cfg):
    T = _read_tuple(args.input)
    minimal = _build(args.minimal, T, cfg)
    degree = args.general_degree
    if degree is None:
        from .models import degree_for_tail

        degree = minimal.info["degree"] + 1 + degree_for_tail(T[T.n - 1], 1e-15)
    general = _build(args.general, T, cfg, degree=degree)
    fx = factorize(general, minimal, tol=cfg.tol)
    rep = dict(fx.report)
    ok = max(rep["isometry"], rep["embedding"], rep["intertwining_max"], rep["range_vs_span"]) <= 10 * cfg.tol
    return {"Xi": matrix_to_json(fx.Xi), "report": rep}, ok


def cmd_verify(args, cfg):
    T = _read_tuple(args.input)
    doc = _load(args.model)
    ops = [matrix_from_json(m) for m in doc["matrices"]]
    emb = matrix_from_json(doc["embed"])
    model = DilationModel(doc.get("kind", "external"), ops, emb, [tuple(b) for b in doc.get("space", [])],
                          info={"degree": cfg.words})
    rep = verify_model(model, T, L=cfg.words, tol=cfg.tol)
    rep["budget"] = doc.get("report", {}).get("budget", {"embedding_isometry": cfg.tol})
    return rep, report_passed(rep)


def cmd_report(args, cfg):
    T = _read_tuple(args.input)
    out = {"n": T.n, "dim": T.dim, "commutation_residual": T.commutation_residual}
    cert = classify(T, tol=cfg.tol, cert_params=cfg.cert_params())
    out["class"] = cert.label
    ok = cert.label != "refuted"
    if not ok:
        return out, False
    for which in ("forward", "adjoint"):
        try:
            F = solve_fundamental(T, which, tol=cfg.tol)
            out[which] = {k: getattr(F, k) for k in ("rank", "residual_16", "residual_17", "radius_margin", "oracle_gap")}
        except GammaModelsError as exc:
            out[which] = {"error": exc.code}
    c = canonical_gamma_unitary(T)
    out["canonical_rank"] = c.rank
    models = {}
    for kind in ("schaffer", "douglas", "nf"):
        try:
            m = _build(kind, T, cfg)
            models[kind] = {"dim": m.dim, "worst": m.report["worst"], "passed": report_passed(m.report)}
        except GammaModelsError as exc:
            models[kind] = {"error": exc.code}
    out["models"] = models
    return out, ok


def _parse_complex_list(text):
    return np.array([complex(tok.strip().replace(" ", "")) for tok in text.split(",")], dtype=complex)


def build_parser():
    p = argparse.ArgumentParser(prog="gamma-models", description=__doc__.splitlines()[0])
    p.add_argument("--tol", type=float, default=1e-8, help="residual tolerance (default 1e-8)")
    p.add_argument("--degree", type=int, default=16, help="Hardy truncation degree N (default 16)")
    p.add_argument("--grid", type=int, default=64, help="torus grid size M, at least 2N+1 (default 64)")
    p.add_argument("--poly-degree", type=int, default=None, help="certificate polynomial degree (default 2n)")
    p.add_argument("--trials", type=int, default=200, help="random polynomials per certificate (default 200)")
    p.add_argument("--density", type=int, default=None, help="boundary samples per axis (n<=3) or total")
    p.add_argument("--words", type=int, default=6, help="maximal word length in model checks (default 6)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("-o", "--output", help="write the JSON result here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[out], help="generate a tuple document")
    g.add_argument("recipe", choices=["scalar", "diagonal", "pencil", "direct_sum", "compression", "random_commuting"])
    g.add_argument("--n", type=int, default=2, help="arity of the tuple")
    g.add_argument("--dim", type=int, default=3, help="matrix size (diagonal, random_commuting) or unitary summand size")
    g.add_argument("--r", type=int, default=2, help="coefficient dimension of pencil recipes")
    g.add_argument("--k", type=int, default=3, help="number of kernel points (compression)")
    g.add_argument("--max-norm", type=float, default=None, help="radial rescaling bound for ||S_n|| (compression)")
    g.add_argument("--z", help="comma-separated complex coordinates for the scalar recipe, e.g. '0.5,0.5j'")
    g.set_defaults(func=cmd_gen)

    for name, func, helptext in (
        ("certify", cmd_certify, "classify a tuple (contraction / isometry / unitary / ...)"),
        ("wold", cmd_wold, "Wold decomposition of a (truncated) Gamma_n-isometry"),
        ("report", cmd_report, "summary of all constructions for a tuple"),
    ):
        s = sub.add_parser(name, parents=[out], help=helptext)
        s.add_argument("input")
        s.set_defaults(func=func)

    f = sub.add_parser("fundamental", parents=[out], help="solve the fundamental operator equations")
    f.add_argument("input")
    f.add_argument("--which", choices=["forward", "adjoint"], default="forward")
    f.set_defaults(func=cmd_fundamental)

    c = sub.add_parser("canonical", parents=[out], help="canonical Gamma_n-unitary of a tuple")
    c.add_argument("input")
    c.add_argument("--max-iter", type=int, default=None)
    c.set_defaults(func=cmd_canonical)

    d = sub.add_parser("dilate", parents=[out], help="build and verify a dilation model")
    d.add_argument("--kind", choices=["douglas", "nf", "schaffer"], required=True)
    d.add_argument("input")
    d.add_argument("output_model", nargs="?", help="also write the model document here")
    d.set_defaults(func=cmd_dilate)

    x = sub.add_parser("factorize", parents=[out], help="factorization map between two models of a tuple")
    x.add_argument("input")
    x.add_argument("--general", choices=["douglas", "nf", "schaffer"], default="douglas")
    x.add_argument("--minimal", choices=["douglas", "nf", "schaffer"], default="schaffer")
    x.add_argument("--general-degree", type=int, default=None, help="truncation degree of the general model")
    x.set_defaults(func=cmd_factorize)

    v = sub.add_parser("verify", parents=[out], help="re-verify a model document against a tuple")
    v.add_argument("model")
    v.add_argument("input")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig(args.tol, args.degree, args.grid, args.poly_degree, args.trials, args.density, args.words,
                    args.seed)
    try:
        cfg.validate()
        result, ok = args.func(args, cfg)
        status = 0 if ok else 1
    except GammaModelsError as exc:
        result, status = {"error": {"code": exc.code, "message": str(exc)}}, 2
    except (OSError, json.JSONDecodeError) as exc:
        result, status = {"error": {"code": "E_IO", "message": str(exc)}}, 2
    text = dumps(result)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return status


if __name__ == "__main__":
    sys.exit(main())
