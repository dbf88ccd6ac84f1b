"""Truncated vector-valued Hardy spaces, Wold decompositions and the canonical Gamma_n-unitary.

Basis convention for a truncated Hardy space with coefficient space of
dimension r and degree N: the coefficient of z^k in direction a sits at index
``k * r + a``. Multiplication operators are lower block-Toeplitz, and the
truncation keeps degrees 0..N, so M_z kills the top-degree coefficient.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from ._numerics import herm, max_workers
from .errors import (
    DimensionMismatch,
    GridInadequate,
    IllDefinedQuotient,
    IterationDivergence,
    NotAnIsometry,
    SpectrumOutsideDomain,
    TruncationHorizonTooSmall,
)
from .opcore import OperatorTuple, joint_spectrum, op_norm, psd_sqrt
from .symdomain import preimage


@dataclass(frozen=True)
class TruncatedHardySpace:
    coeff_dim: int
    degree: int

    def __post_init__(self):
        if self.coeff_dim < 0 or self.degree < 0:
            raise ValueError("coeff_dim and degree must be nonnegative")

    @property
    def total_dim(self):
        return self.coeff_dim * (self.degree + 1)

    def index(self, k, a):
        return k * self.coeff_dim + a

    def shift(self):
        """(N+1) x (N+1) lower shift on degrees."""
        return np.eye(self.degree + 1, k=-1, dtype=complex)

    def interior(self):
        """Column indices of degrees < N, where truncated shift identities are exact."""
        return np.arange(self.coeff_dim * self.degree)

    def coefficients(self, vec):
        return np.asarray(vec).reshape(self.degree + 1, self.coeff_dim)

    def embed_constant(self, x):
        """Column(s) placing x in the degree-0 slot."""
        x = np.asarray(x, dtype=complex)
        out = np.zeros((self.total_dim,) + x.shape[1:], dtype=complex)
        out[: self.coeff_dim] = x
        return out


@dataclass
class TorusGridSpace:
    coeff_dim: int
    grid_size: int
    weights: np.ndarray = None  # (M, r, r) PSD node weights, identity when None

    @property
    def nodes(self):
        return np.exp(2j * np.pi * np.arange(self.grid_size) / self.grid_size)

    def check_adequate(self, degree):
        if self.grid_size < 2 * degree + 1:
            raise GridInadequate(f"grid size {self.grid_size} < 2N+1 = {2 * degree + 1}")


def mz(space: TruncatedHardySpace):
    return np.kron(space.shift(), np.eye(space.coeff_dim, dtype=complex))


def mphi(space: TruncatedHardySpace, A, B):
    """Truncated multiplication by A + zB."""
    A, B = np.atleast_2d(np.asarray(A, dtype=complex)), np.atleast_2d(np.asarray(B, dtype=complex))
    r = space.coeff_dim
    if A.shape != (r, r) or B.shape != (r, r):
        raise DimensionMismatch(f"coefficients must be {r} x {r}")
    return np.kron(np.eye(space.degree + 1), A) + np.kron(space.shift(), B)


def toeplitz_from_coeffs(space: TruncatedHardySpace, coeffs):
    """Truncated multiplication by sum_k coeffs[k] z^k (lower block Toeplitz)."""
    N = space.degree
    out = np.zeros((space.total_dim, space.total_dim), dtype=complex)
    S = space.shift()
    P = np.eye(N + 1)
    for c in coeffs[: N + 1]:
        out += np.kron(P, c)
        P = S @ P
    return out


# ---------------------------------------------------------------- Wold


@dataclass
class WoldDecomposition:
    U_w: np.ndarray  # rows: orbit basis (degree-major) then unitary basis
    shift_mult: int
    degree: int
    unitary_part: OperatorTuple
    pencil_coeffs: list
    wandering_basis: np.ndarray  # d x r
    unitary_basis: np.ndarray  # d x u
    residuals: dict = field(default_factory=dict)

    @property
    def pure_dim(self):
        return self.shift_mult * (self.degree + 1)


def _null_basis(a, tol):
    u, sv, vh = np.linalg.svd(a)
    rank = int(np.sum(sv > 0.5))
    small = sv[rank:] if rank < sv.size else np.array([])
    if small.size and np.max(small) > np.sqrt(tol):
        raise NotAnIsometry("singular values away from {0, 1}")
    return herm(vh[rank:])


def wold(V: OperatorTuple, tol=1e-8):
    """Split a (truncated) Gamma_n-isometry into a pencil shift part and a Gamma_n-unitary part."""
    from .fundops import check_commutativity_condition
    from .gammaclass import isometry_residuals

    n, d = V.n, V.dim
    Vn = V[n - 1]
    G = herm(Vn) @ Vn
    if op_norm(G @ G - G) > tol:
        raise NotAnIsometry("last coordinate is not a partial isometry")
    iso = isometry_residuals(V, V.interior)
    if max(iso.values()) > tol:
        raise NotAnIsometry(f"isometry identities fail ({max(iso.values()):.2e})")

    # unitary part: range of the d-th power
    P = np.linalg.matrix_power(Vn, max(d, 1))
    u, sv, _ = np.linalg.svd(P)
    Qu = u[:, sv > 0.5]
    # wandering space: kernel of Vn^*
    W = _null_basis(herm(Vn), tol)
    r = W.shape[1]
    pure = d - Qu.shape[1]
    if r == 0 and pure > 0:
        raise NotAnIsometry("non-unitary part without wandering vectors")
    if r and pure % r:
        raise TruncationHorizonTooSmall(f"pure dimension {pure} is not a multiple of multiplicity {r}")
    N = pure // r - 1 if r else 0
    orbit = []
    x = W
    for _ in range(N + 1 if r else 0):
        orbit.append(x)
        x = Vn @ x
    B = np.hstack(orbit) if orbit else np.zeros((d, 0), dtype=complex)
    res = {}
    res["orbit_gram"] = op_norm(herm(B) @ B - np.eye(B.shape[1])) if r else 0.0
    res["orbit_exit"] = op_norm(x) if r else 0.0
    if res["orbit_gram"] > tol or res["orbit_exit"] > tol:
        raise TruncationHorizonTooSmall(
            f"wandering orbit not orthonormal within degree {N} "
            f"(gram {res['orbit_gram']:.2e}, exit {res['orbit_exit']:.2e})"
        )
    U_w = np.vstack([herm(B), herm(Qu)])
    res["unitarity_U_w"] = op_norm(U_w @ herm(U_w) - np.eye(d))
    conj = [U_w @ a @ herm(U_w) for a in V.ops]
    p = B.shape[1]
    res["V12"] = max(op_norm(c[:p, p:]) for c in conj)
    res["V21"] = max(op_norm(c[p:, :p]) for c in conj)

    E = []
    if r:
        space = TruncatedHardySpace(r, N)
        E = [herm(conj[i][:r, :r]) for i in range(n - 1)]
        # block (1,0) of V_i carries E_(n-i)
        res["E_consistency"] = max(
            op_norm(conj[i - 1][r : 2 * r, :r] - E[n - i - 1]) for i in range(1, n)
        ) if N >= 1 else 0.0
        res["pencil_blocks"] = max(
            op_norm(conj[i - 1][:p, :p] - mphi(space, herm(E[i - 1]), E[n - i - 1])) for i in range(1, n)
        )
        res["shift_block"] = op_norm(conj[n - 1][:p, :p] - mz(space))
        inner = space.interior()
        M = [mphi(space, herm(E[i - 1]), E[n - i - 1]) for i in range(1, n)]
        res["pencil_identity"] = max(
            op_norm((M[i - 1] - herm(M[n - i - 1]) @ mz(space))[:, inner]) for i in range(1, n)
        )
        res["commutativity"] = check_commutativity_condition(E)["worst"]
    else:
        for k in ("E_consistency", "pencil_blocks", "shift_block", "pencil_identity", "commutativity"):
            res[k] = 0.0
    uops = [c[p:, p:] for c in conj]
    Un = uops[n - 1]
    u_dim = Un.shape[0]
    res["unitary_part"] = op_norm(herm(Un) @ Un - np.eye(u_dim)) if u_dim else 0.0
    return WoldDecomposition(
        U_w=U_w, shift_mult=r, degree=N, unitary_part=OperatorTuple(uops), pencil_coeffs=E,
        wandering_basis=W, unitary_basis=Qu, residuals=res,
    )


def align_pencil(E_true, E_rec, W_true, W_rec):
    """Express recovered coefficients in the generating wandering basis: X -> C X C^*, C = W_true^* W_rec."""
    C = herm(W_true) @ W_rec
    return [C @ e @ herm(C) for e in E_rec], op_norm(herm(C) @ C - np.eye(C.shape[1]))


def spectrum_distance(A, B):
    """Optimal-matching distance between two joint-eigenvalue multisets."""
    A, B = np.asarray(A), np.asarray(B)
    if A.shape != B.shape:
        return np.inf
    if A.size == 0:
        return 0.0
    cost = np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
    i, j = linear_sum_assignment(cost)
    return float(cost[i, j].max())


# ------------------------------------------------------ canonical unitary


@dataclass
class CanonicalUnitary:
    tuple: OperatorTuple  # in coordinates of `basis`
    P: np.ndarray  # positive square root of the limit of S_n^k S_n^*k
    basis: np.ndarray  # d x m orthonormal basis of Ran P
    iterations: int
    residuals: dict = field(default_factory=dict)

    @property
    def rank(self):
        return self.basis.shape[1]

    def ambient(self):
        """The tuple placed back on the ambient space, zero off Ran P."""
        Q = self.basis
        return [Q @ a @ herm(Q) for a in self.tuple.ops]

    def __iter__(self):
        return iter((self.tuple, self.P))


def canonical_gamma_unitary(T: OperatorTuple, tol=1e-12, max_iter=None, verify=True, cert_params=None):
    """Gamma_n-unitary carried by the asymptotic part of S_n^*.

    A_k = S_n^k (S_n^*)^k decreases to P^2. On Ran P the maps
    P h -> P S_i^* h are well defined and their adjoints form the tuple.
    """
    from .gammaclass import classify

    n, d = T.n, T.dim
    Sn = T[n - 1]
    nrm = op_norm(Sn)
    if max_iter is None:
        max_iter = int(min(1e6, 10 * d / max(1e-6, 1.0 - nrm))) if nrm < 1 else 1_000_000
        if 0 < nrm < 1:
            # enough steps for the geometric bound ||S_n||^(2k) to reach tol
            max_iter = max(max_iter, int(np.ceil(np.log(tol) / (2 * np.log(nrm)))) + 10)
    A = np.eye(d, dtype=complex)
    worst_mono = 0.0
    for k in range(1, max_iter + 1):
        A_next = Sn @ A @ herm(Sn)
        A_next = (A_next + herm(A_next)) / 2
        diff = A - A_next
        worst_mono = min(worst_mono, float(np.linalg.eigvalsh(diff)[0]) if d else 0.0)
        step = op_norm(diff)
        A = A_next
        if step <= tol:
            break
    else:
        raise IterationDivergence(f"no convergence after {max_iter} iterations (last step {step:.2e})")
    res = {"monotonicity": -worst_mono, "psd": max(0.0, -float(np.linalg.eigvalsh(A)[0])) if d else 0.0}
    P, w, v = psd_sqrt(A)
    keep = w > 0.25  # P^2 eigenvalues cluster at 0 and 1 in finite dimension
    Q = v[:, keep]
    lam = np.sqrt(w[keep])
    res["projection_snap"] = op_norm(P - Q @ herm(Q))
    m = Q.shape[1]
    comp = np.eye(d) - Q @ herm(Q)
    ops = []
    wd = 0.0
    for i in range(n):
        Xs = herm(Q) @ P @ herm(T[i])  # coordinates of P S_i^* restricted to rows in Ran P
        wd = max(wd, op_norm(Xs @ comp))
        ops.append(herm((Xs @ Q) / lam[None, :]))
    res["well_defined"] = wd
    if wd > 1e-6:
        raise IllDefinedQuotient(f"P S_i^* does not factor through P (residual {wd:.2e})")
    D = OperatorTuple(ops)
    out = CanonicalUnitary(D, P, Q, k, res)
    if m and verify:
        cert = classify(D, tol=1e-8, cert_params=cert_params)
        res["label_unitary"] = 0.0 if cert.label == "unitary" else 1.0
        out.label = cert.label
    else:
        out.label = "unitary" if m else "empty"
    return out


def is_cnu(T: OperatorTuple, tol=1e-10):
    """Operational c.n.u. test: the asymptotic projection of S_n^* vanishes."""
    return canonical_gamma_unitary(T, tol=1e-12, verify=False).rank == 0 if T.dim else True


# -------------------------------------------------- unitary extension nodes


def check_unitary_extension(E, grid: TorusGridSpace, tol=1e-7, cert_params=None):
    """Node-wise check that (Phi_1(eta), ..., Phi_(n-1)(eta), eta I) is a Gamma_n-unitary."""
    from .fundops import _ops_of
    from .gammaclass import CertParams, certify_contraction, gamma_scaled

    if hasattr(E, "pencil_coeffs"):
        E = E.pencil_coeffs
    ops, n = _ops_of(E)
    r = ops[0].shape[0]
    params = cert_params or CertParams(tol=1e-8)

    def node(k):
        eta = grid.nodes[k]
        phi = [herm(ops[i - 1]) + eta * ops[n - i - 1] for i in range(1, n)]
        tup = OperatorTuple(phi + [eta * np.eye(r)])
        out = {
            "normality": max(op_norm(p @ herm(p) - herm(p) @ p) for p in phi),
            "pencil": max(op_norm(phi[i - 1] - herm(phi[n - i - 1]) * eta) for i in range(1, n)),
            "commutation": tup.commutation_residual,
        }
        try:
            spec = joint_spectrum(tup, tol=1e-8, rng=k)
            out["boundary"] = max(float(np.max(np.abs(np.abs(preimage(s)) - 1.0))) for s in spec)
        except Exception as exc:  # non-commuting node tuple
            out["boundary"] = np.inf
            out["error"] = type(exc).__name__
        ok = all(v <= tol for key, v in out.items() if key != "error")
        if ok and n > 1:
            try:
                lab = certify_contraction(gamma_scaled(tup), params).label
            except SpectrumOutsideDomain:
                lab = "outside"
            out["gamma_scaled"] = lab
            ok = lab == "contraction"
        out["passed"] = bool(ok)
        out["eta"] = [float(eta.real), float(eta.imag)]
        return out

    with ThreadPoolExecutor(max_workers()) as ex:
        nodes = list(ex.map(node, range(grid.grid_size)))
    numeric = ("normality", "pencil", "commutation", "boundary")
    worst_k = int(np.argmax([max(nd[key] for key in numeric) for nd in nodes]))
    failed = [k for k, nd in enumerate(nodes) if not nd["passed"]]
    return {
        "passed": not failed,
        "worst_residual": float(max(nodes[worst_k][key] for key in numeric)),
        "worst_node": worst_k,
        "failed_nodes": failed,
        "nodes": nodes,
    }


def hardy_block_diag(*blocks):
    return sla.block_diag(*blocks)
