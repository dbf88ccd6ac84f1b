"""Certification of Gamma_n classes for commuting matrix tuples.

The contraction test is a falsifier. Random polynomials are evaluated at the
tuple and compared with their maximum modulus over the distinguished
boundary, which is sampled on a torus grid (small n) or at random torus
points (larger n). Monomials of degree at most two are checked as well,
against their exact sup. A pass is evidence at the chosen sampling parameters, a
refutation comes with a re-verified witness polynomial.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize

from ._numerics import herm, max_workers
from .errors import ArityMismatch, NotCommuting, NotUnitary, SpectrumOutsideDomain
from .opcore import OperatorTuple, joint_spectrum, op_norm
from .symdomain import SAMPLE_BUDGET, membership, preimage, sample_boundary, symmetrize_many

LABELS = ("contraction", "isometry", "unitary", "co_isometry", "pure_isometry", "refuted")


@dataclass(frozen=True)
class CertParams:
    degree: int = None  # None -> 2n
    trials: int = 200
    density: int = None  # None -> 48 (grid) for n <= 3, 100000 random points otherwise
    tol: float = 1e-8
    seed: int = 0

    def resolved(self, n):
        degree = 2 * n if self.degree is None else self.degree
        if self.density is None:
            density, mode = (48, "grid") if n <= 3 else (100_000, "random")
        else:
            density = self.density
            mode = "grid" if n <= 3 else "random"
        return degree, density, mode


@dataclass
class GammaCertificate:
    label: str
    witness: dict = None
    params: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)

    def to_json(self):
        return asdict(self)


def exponents(n, degree):
    """All multi-indices in n variables with total degree <= degree, graded order."""
    out = []
    for k in range(degree + 1):
        for combo in combinations_with_replacement(range(n), k):
            a = [0] * n
            for j in combo:
                a[j] += 1
            out.append(tuple(a))
    return out


def _monomials_at_points(pts, alphas, degree):
    # pts (m, n) -> (len(alphas), m)
    m, n = pts.shape
    pw = np.ones((n, degree + 1, m), dtype=complex)
    for k in range(1, degree + 1):
        pw[:, k] = pw[:, k - 1] * pts.T
    out = np.ones((len(alphas), m), dtype=complex)
    for j, a in enumerate(alphas):
        for i, e in enumerate(a):
            if e:
                out[j] *= pw[i, e]
    return out


def monomial_matrices(ops, alphas):
    """Matrices S^alpha for each multi-index, built incrementally along the graded order."""
    d = ops[0].shape[0]
    cache = {tuple([0] * len(ops)): np.eye(d, dtype=complex)}
    for a in alphas:
        if a in cache:
            continue
        i = max(j for j, e in enumerate(a) if e)
        prev = list(a)
        prev[i] -= 1
        cache[a] = cache[tuple(prev)] @ ops[i]
    return np.stack([cache[a] for a in alphas])


def random_coefficients(n, degree, trials, seed):
    alphas = exponents(n, degree)
    rng = np.random.default_rng([seed, n, degree, trials])
    c = (rng.standard_normal((trials, len(alphas))) + 1j * rng.standard_normal((trials, len(alphas)))) / np.sqrt(2)
    return alphas, c


def _boundary_values(coeffs, alphas, degree, pts, chunk=8192):
    """|p_j| at the points, reduced to (max per polynomial, argmax index)."""
    m = pts.shape[0]
    starts = list(range(0, m, chunk))

    def work(s):
        vals = np.abs(coeffs @ _monomials_at_points(pts[s : s + chunk], alphas, degree))
        k = np.argmax(vals, axis=1)
        return vals[np.arange(vals.shape[0]), k], k + s

    with ThreadPoolExecutor(max_workers()) as ex:
        parts = list(ex.map(work, starts))
    vals = np.stack([p[0] for p in parts], axis=1)
    idx = np.stack([p[1] for p in parts], axis=1)
    best = np.argmax(vals, axis=1)
    rows = np.arange(vals.shape[0])
    return vals[rows, best], idx[rows, best]


@lru_cache(maxsize=32)
def boundary_sup(n, degree, trials, density, mode, seed):
    """Sampled sup over the distinguished boundary of each seeded random polynomial.

    Returns ``(alphas, coeffs, sups, argmax_angles)``. Only depends on the
    sampling parameters, so it is cached across tuples.
    """
    alphas, coeffs = random_coefficients(n, degree, trials, seed)
    sample = sample_boundary(n, density, mode=mode, rng=[seed, n, density, 7])
    sups, idx = _boundary_values(coeffs, alphas, degree, sample.points)
    return alphas, coeffs, sups, sample.angles[idx]


def _poly_on_torus(c, alphas, degree):
    def f(theta):
        pts = symmetrize_many(np.exp(1j * np.atleast_2d(theta)))
        return np.abs(c @ _monomials_at_points(pts, alphas, degree))

    return f


def refine_sup(c, alphas, degree, n, density, mode, seed, starts=()):
    """Re-estimate max |p| over the boundary at 4x sampling density plus local ascent.

    The grid is refined 4x per torus axis while it stays inside the sample
    budget; otherwise four times as many random torus points are drawn.
    """
    f = _poly_on_torus(c[None, :], alphas, degree)
    if mode == "grid" and (4 * density) ** n <= SAMPLE_BUDGET:
        sample = sample_boundary(n, 4 * density, mode="grid")
    else:
        count = 4 * (density**n if mode == "grid" else density)
        sample = sample_boundary(n, min(count, SAMPLE_BUDGET), mode="random", rng=[seed, n, 11])
    sups, idx = _boundary_values(c[None, :], alphas, degree, sample.points)
    best = float(sups[0])
    seeds = [sample.angles[idx[0]]] + [np.asarray(s, dtype=float) for s in starts]
    for th in seeds:
        res = minimize(lambda t: -f(t)[0], th, method="L-BFGS-B", options={"ftol": 1e-15, "gtol": 1e-12})
        best = max(best, float(-res.fun))
    return best


def _spectral_starts(spec):
    # radial projections of the joint-eigenvalue preimages onto the torus
    out = []
    for s in spec:
        z = preimage(s)
        out.append(np.angle(z))
    return out[:8]


def _require_commuting(T, tol):
    if T.commutation_residual > tol * max(1.0, T.scale**2):
        raise NotCommuting(f"commutation residual {T.commutation_residual:.3e} exceeds tolerance")


def certify_contraction(T: OperatorTuple, params: CertParams = None, spectrum_tol=None, **kw):
    """Falsification test for T being a Gamma_n-contraction."""
    params = params or CertParams(**kw)
    n, tol = T.n, params.tol
    _require_commuting(T, tol)
    degree, density, mode = params.resolved(n)
    pinfo = dict(degree=degree, trials=params.trials, density=density, mode=mode, tol=tol, seed=params.seed)
    spec = joint_spectrum(T, tol=max(tol, 1e-10), rng=params.seed)
    stol = tol if spectrum_tol is None else spectrum_tol
    worst = max((float(np.max(np.abs(preimage(s)))) for s in spec), default=0.0)
    for s in spec:
        if not membership(s, "Gamma_n", stol):
            raise SpectrumOutsideDomain(f"joint eigenvalue {np.round(s, 6).tolist()} lies outside Gamma_{n}")
    res = {"commutation": T.commutation_residual, "max_root_modulus": worst}

    if n == 1:
        # the closed disc: spectral set iff contraction
        nrm = op_norm(T[0])
        res["norm_excess"] = nrm - 1.0
        if nrm > 1.0 + tol:
            wit = dict(coefficients=[[0.0, 0.0], [1.0, 0.0]], sampled_sup=1.0, attained=nrm)
            return GammaCertificate("refuted", wit, pinfo, res)
        return GammaCertificate("contraction", None, pinfo, res)

    alphas, coeffs, sups, arg_angles = boundary_sup(n, degree, params.trials, density, mode, params.seed)
    mats = monomial_matrices(T.ops, alphas)
    norms = np.empty(params.trials)
    # batched p(S) for all trials, chunked to bound memory
    step = max(1, 4_000_000 // mats[0].size)
    for a in range(0, params.trials, step):
        P = np.tensordot(coeffs[a : a + step], mats, axes=(1, 0))
        norms[a : a + step] = np.linalg.norm(P, ord=2, axis=(1, 2))
    excess = norms - sups - tol * np.maximum(1.0, sups)
    res["max_ratio"] = float(np.max(norms / sups))
    # monomial probes of degree <= 2: their sup is exact, prod C(n, i)^alpha_i at z = (1, ..., 1)
    for k, a in enumerate(alphas):
        if not 1 <= sum(a) <= 2:
            continue
        sup = float(np.prod([comb(n, i + 1) ** e for i, e in enumerate(a)]))
        nrm = op_norm(mats[k])
        if nrm > sup + tol * max(1.0, sup):
            coeffs_k = np.zeros(len(alphas), dtype=complex)
            coeffs_k[k] = 1.0
            wit = dict(
                trial="monomial",
                exponents=[list(b) for b in alphas],
                coefficients=[[float(v.real), float(v.imag)] for v in coeffs_k],
                sampled_sup=sup,
                attained=nrm,
            )
            return GammaCertificate("refuted", wit, pinfo, res)
    starts = _spectral_starts(spec)
    for j in np.flatnonzero(excess > 0):
        sup_j = refine_sup(coeffs[j], alphas, degree, n, density, mode, params.seed,
                           starts=[arg_angles[j]] + starts)
        if norms[j] > sup_j + tol * max(1.0, sup_j):
            wit = dict(
                trial=int(j),
                exponents=[list(a) for a in alphas],
                coefficients=[[float(v.real), float(v.imag)] for v in coeffs[j]],
                sampled_sup=sup_j,
                attained=float(norms[j]),
            )
            return GammaCertificate("refuted", wit, pinfo, res)
    return GammaCertificate("contraction", None, pinfo, res)


def _cols(interior, d):
    return np.arange(d) if interior is None else np.asarray(interior, dtype=int)


def isometry_residuals(T: OperatorTuple, interior=None):
    """Residuals of the algebraic isometry identities, restricted to the given columns."""
    n, d = T.n, T.dim
    cols = _cols(interior, d)
    Sn = T[n - 1]
    res = {"isometry": op_norm((herm(Sn) @ Sn - np.eye(d))[:, cols])}
    for i in range(1, n):
        res[f"pencil_{i}"] = op_norm((T[i - 1] - herm(T[n - i - 1]) @ Sn)[:, cols])
    return res


def gamma_scaled(T: OperatorTuple):
    n = T.n
    return OperatorTuple([(n - i) / n * T[i - 1] for i in range(1, n)], structure=T.structure)


def classify(T: OperatorTuple, tol=1e-8, cert_params: CertParams = None, interior=None):
    """Most specific Gamma_n class of T among unitary / isometry / co-isometry / contraction.

    ``interior`` marks columns on which truncated shift identities hold
    exactly (for tuples living on truncated Hardy spaces); only then can the
    pure-isometry label be returned.
    """
    params = cert_params or CertParams(tol=tol)
    if interior is None:
        interior = T.interior
    cert = certify_contraction(T, params)
    if cert.label == "refuted":
        return cert
    res = dict(cert.residuals)
    n, d = T.n, T.dim
    iso = isometry_residuals(T, interior)
    res.update(iso)
    is_iso = all(v <= tol for v in iso.values())
    if is_iso and n > 1:
        sub = certify_contraction(gamma_scaled(T), params)
        res["gamma_scaled_contraction"] = 0.0 if sub.label == "contraction" else 1.0
        is_iso = sub.label == "contraction"
    Sn = T[n - 1]
    res["co_isometry"] = op_norm(Sn @ herm(Sn) - np.eye(d))
    if is_iso and interior is not None and op_norm(np.linalg.matrix_power(herm(Sn), d)) <= tol:
        res["pure"] = op_norm(np.linalg.matrix_power(herm(Sn), d))
        return GammaCertificate("pure_isometry", None, cert.params, res)
    if is_iso and interior is None and res["co_isometry"] <= tol:
        return GammaCertificate("unitary", None, cert.params, res)
    if is_iso:
        return GammaCertificate("isometry", None, cert.params, res)
    adj = T.adjoint()
    co = isometry_residuals(adj)
    res.update({f"adjoint_{k}": v for k, v in co.items()})
    if all(v <= tol for v in co.values()) and n > 1:
        if certify_contraction(gamma_scaled(adj), params).label == "contraction":
            return GammaCertificate("co_isometry", None, cert.params, res)
    return GammaCertificate("contraction", None, cert.params, res)


def conjugate(T: OperatorTuple, U, tol=1e-8):
    """The tuple (U S_i U*)."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (T.dim, T.dim) or op_norm(herm(U) @ U - np.eye(T.dim)) > tol:
        raise NotUnitary("conjugating matrix is not unitary")
    return OperatorTuple([U @ a @ herm(U) for a in T.ops])


def direct_sum(A: OperatorTuple, B: OperatorTuple):
    if A.n != B.n:
        raise ArityMismatch(f"cannot add tuples of arity {A.n} and {B.n}")
    structure = None
    if A.structure or B.structure:
        structure = (A.structure or [("plain", A.dim)]) + (B.structure or [("plain", B.dim)])
    interior = None
    if A.interior is not None or B.interior is not None:
        interior = np.concatenate([_cols(A.interior, A.dim), A.dim + _cols(B.interior, B.dim)])
    return OperatorTuple([sla.block_diag(a, b) for a, b in zip(A.ops, B.ops)], structure=structure, interior=interior)


def norm_prerequisite(T: OperatorTuple):
    """Slack of the necessary bound ||S_i|| <= C(n-1,i) + C(n-1,n-i) (negative means violated)."""
    n = T.n
    return min(comb(n - 1, i) + comb(n - 1, n - i) - op_norm(T[i - 1]) for i in range(1, n + 1))
