"""Seeded constructions of commuting tuples used by tests, scripts and the CLI ``gen`` command.

Every family here is a Gamma_n-contraction by construction:

* scalar and diagonal tuples come from symmetrized points of the closed polydisc;
* Gamma_n-unitaries are normal tuples with joint spectrum on the distinguished boundary;
* kernel compressions restrict a pencil model to the span of finitely many
  Szego kernels, which is co-invariant, so the compression inherits the
  spectral-set property of the pencil tuple.
"""

import numpy as np
import scipy.linalg as sla
from scipy.stats import unitary_group

from ._numerics import herm
from .fundops import pencil_tuple
from .gammaclass import direct_sum
from .hardy import TruncatedHardySpace
from .opcore import OperatorTuple
from .symdomain import symmetrize, symmetrize_many


def random_unitary(d, rng):
    if d == 1:
        return np.exp(2j * np.pi * rng.uniform()) * np.ones((1, 1))
    return unitary_group.rvs(d, random_state=rng)


def disc_points(count, n, rng, radius=1.0):
    r = radius * np.sqrt(rng.uniform(0, 1, size=(count, n)))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, size=(count, n)))


def scalar_tuple(z):
    return OperatorTuple([np.array([[v]]) for v in symmetrize(z)])


def diagonal_tuple(z, U=None):
    """diag(s(z_1), ..., s(z_d)) coordinatewise, optionally conjugated by U. ``z`` is (d, n)."""
    s = symmetrize_many(z)
    ops = [np.diag(s[:, i]) for i in range(s.shape[1])]
    if U is not None:
        ops = [U @ a @ herm(U) for a in ops]
    return OperatorTuple(ops)


def gamma_unitary(n, d, rng):
    zeta = np.exp(2j * np.pi * rng.uniform(0, 1, size=(d, n)))
    return diagonal_tuple(zeta, random_unitary(d, rng))


def scalar_pencil_point(s):
    """Scalar coefficients e_i = (conj(s_i) - s_(n-i) conj(s_n)) / (1 - |s_n|^2) for interior s."""
    s = np.asarray(s, dtype=complex)
    n = s.size
    den = 1.0 - abs(s[-1]) ** 2
    return np.array([(np.conj(s[i - 1]) - s[n - i - 1] * np.conj(s[-1])) / den for i in range(1, n)])


def pencil_coefficients(n, r, rng, radius=0.95):
    """Commuting normal E_1..E_(n-1) = U diag(e) U^* with node tuples on the distinguished boundary."""
    z = disc_points(r, n, rng, radius)
    e = np.array([scalar_pencil_point(symmetrize(row)) for row in z])  # (r, n-1)
    U = random_unitary(r, rng)
    return [U @ np.diag(e[:, i]) @ herm(U) for i in range(n - 1)]


def pencil_model(n, r, N, rng, radius=0.95):
    E = pencil_coefficients(n, r, rng, radius)
    return pencil_tuple(E, TruncatedHardySpace(r, N)), E


def isometry_with_unitary(n, r, N, u, rng):
    """Truncated pencil model (+) Gamma_n-unitary of dimension u."""
    V, E = pencil_model(n, r, N, rng)
    if u == 0:
        return V, E, None
    U = gamma_unitary(n, u, rng)
    return direct_sum(V, U), E, U


def kernel_compression(E, w):
    """Compression of the pencil model with coefficients E to span{k_w (x) e : w in w, e in C^r}.

    With Gram K = [1/(1 - w_j conj(w_l))] (x) I_r = L L^*, the compressed
    tuple is L^{-1} B_i^* L where B_i = blockdiag(Phi_i(w_j)^*).
    """
    E = [np.atleast_2d(np.asarray(e, dtype=complex)) for e in E]
    n = len(E) + 1
    r = E[0].shape[0]
    w = np.asarray(w, dtype=complex)
    K = np.kron(1.0 / (1.0 - w[:, None] * np.conj(w[None, :])), np.eye(r))
    L = np.linalg.cholesky(K)
    ops = []
    for i in range(1, n + 1):
        if i < n:
            blocks = [herm(herm(E[i - 1]) + wj * E[n - i - 1]) for wj in w]
        else:
            blocks = [np.conj(wj) * np.eye(r) for wj in w]
        B = sla.block_diag(*blocks)
        ops.append(np.linalg.solve(L, herm(B) @ L))
    return OperatorTuple(ops)


def compressed_tuple(n, r, k, rng, w_radius=0.6, e_radius=0.95, max_norm=None):
    """Random kernel compression of dimension r*k.

    For k >= 2 the last coordinate has norm one; ``max_norm`` rescales
    radially to bring it down, which keeps the Gamma_n-contraction property.
    """
    E = pencil_coefficients(n, r, rng, e_radius)
    for _ in range(1000):
        w = disc_points(k, 1, rng, w_radius)[:, 0]
        # keep the kernels well separated so the Gram matrix is well conditioned
        gap = np.abs(w[:, None] - w[None, :]) / np.abs(1 - np.conj(w[:, None]) * w[None, :])
        if k > 1 and np.min(gap[~np.eye(k, dtype=bool)]) < 0.2:
            continue
        T = kernel_compression(E, w)
        nrm = np.linalg.norm(T[n - 1], 2)
        if max_norm is not None and nrm > max_norm:
            T = radial_scale(T, (max_norm / nrm) ** (1.0 / n))
        return T, E
    raise RuntimeError("could not draw separated kernel points")


def radial_scale(T, rho):
    """(rho S_1, rho^2 S_2, ..., rho^n S_n), the tuple evaluated along z -> rho z (0 <= rho <= 1)."""
    return OperatorTuple([rho ** (i + 1) * a for i, a in enumerate(T.ops)])


def random_commuting(n, d, rng, scale=0.3):
    """Polynomials in one random matrix: exactly commuting, not necessarily a Gamma_n-contraction."""
    A = scale * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2 * d)
    ops = []
    for _ in range(n):
        c = rng.standard_normal(3) * scale
        ops.append(c[0] * np.eye(d) + c[1] * A + c[2] * A @ A)
    return OperatorTuple(ops)


def corpus_contraction(n, rng, kind):
    """One member of the mixed test corpus: ``scalar``, ``diagonal`` or ``compression``."""
    if kind == "scalar":
        return scalar_tuple(disc_points(1, n, rng, 0.95)[0])
    if kind == "diagonal":
        d = int(rng.integers(2, 5))
        return diagonal_tuple(disc_points(d, n, rng, 0.95), random_unitary(d, rng))
    if kind == "compression":
        r = int(rng.integers(1, 3))
        k = int(rng.integers(2, 4))
        return compressed_tuple(n, r, k, rng)[0]
    raise ValueError(kind)
