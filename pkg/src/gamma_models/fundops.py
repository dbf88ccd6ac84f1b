"""Fundamental operators of a Gamma_n-contraction and the pencil tuples they generate.

For a tuple S with last coordinate S_n and defect D = (I - S_n^* S_n)^(1/2)
the fundamental operators F_1..F_{n-1} live on the defect space and satisfy

    S_i - S_{n-i}^* S_n = D F_i D
    D S_i = F_i D + F_{n-i}^* D S_n

The first identity is solved directly with the pseudo-inverse of D; the
second one is solved independently as a real-linear least-squares problem and
serves as an oracle for the first.
"""

import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np

from ._numerics import herm
from .errors import CommutativityFailed, RankDeficiencyWarning, ResidualTooLarge
from .hardy import TruncatedHardySpace, mphi, mz
from .opcore import OperatorTuple, defect, op_norm, pencil_numerical_radius


@dataclass
class FundamentalSystem:
    which: str  # "forward" (F of T) or "adjoint" (E of T*)
    n: int
    ops: list  # r x r matrices in defect-range coordinates
    basis: np.ndarray  # d x r orthonormal basis of the defect range
    defect_values: np.ndarray  # eigenvalues of D on the basis
    residual_16: float = 0.0
    residual_17: float = 0.0
    radius_margin: float = np.inf
    oracle_gap: float = 0.0
    oracle_ops: list = field(default=None, repr=False)
    warnings: list = field(default_factory=list)

    @property
    def rank(self):
        return self.basis.shape[1]

    def __getitem__(self, i):
        """1-based access, F_i for i = 1..n-1."""
        return self.ops[i - 1]

    def ambient(self, i):
        """F_i extended by zero on the orthogonal complement of the defect space."""
        Q = self.basis
        return Q @ self.ops[i - 1] @ herm(Q)

    def to_json(self):
        from .opcore import matrix_to_json

        return {
            "which": self.which,
            "n": self.n,
            "rank": self.rank,
            "ops": [matrix_to_json(f) for f in self.ops],
            "basis": matrix_to_json(self.basis) if self.basis.size else None,
            "defect_values": [float(v) for v in self.defect_values],
            "residual_16": self.residual_16,
            "residual_17": self.residual_17,
            "radius_margin": self.radius_margin,
            "oracle_gap": self.oracle_gap,
            "warnings": list(self.warnings),
        }


def _commutation_matrix(r):
    # K vec(X) = vec(X^T) for column-major vec
    K = np.zeros((r * r, r * r))
    for a in range(r):
        for b in range(r):
            K[a * r + b, b * r + a] = 1.0
    return K


def _vec(x):
    return x.reshape(-1, order="F")


def _unvec(v, r):
    return v.reshape(r, r, order="F")


def solve_sylvester_pair(G1, G2, B, C, same=False):
    """Least-squares solve of  X B + Y^* C = G1,  Y B + X^* C = G2  for r x r X, Y.

    The map is only real-linear because of the adjoints, so the unknowns are
    split into real and imaginary parts. With ``same`` the two unknowns
    coincide and only the first equation is used.
    """
    r = B.shape[0]
    eye = np.eye(r)
    M1 = np.kron(B.T, eye)  # vec(X B)
    Nc = np.kron(C.T, eye) @ _commutation_matrix(r)  # vec(Y^* C) = Nc conj(vec Y)
    if same:
        A = np.hstack([M1 + Nc, 1j * (M1 - Nc)])
        rhs = _vec(G1)
        sol = np.linalg.lstsq(np.vstack([A.real, A.imag]), np.concatenate([rhs.real, rhs.imag]), rcond=None)[0]
        m = r * r
        X = _unvec(sol[:m] + 1j * sol[m:], r)
        return X, X
    # unknowns [Re X, Im X, Re Y, Im Y]
    A1 = np.hstack([M1, 1j * M1, Nc, -1j * Nc])
    A2 = np.hstack([Nc, -1j * Nc, M1, 1j * M1])
    A = np.vstack([A1, A2])
    rhs = np.concatenate([_vec(G1), _vec(G2)])
    sol = np.linalg.lstsq(np.vstack([A.real, A.imag]), np.concatenate([rhs.real, rhs.imag]), rcond=None)[0]
    m = r * r
    X = _unvec(sol[:m] + 1j * sol[m : 2 * m], r)
    Y = _unvec(sol[2 * m : 3 * m] + 1j * sol[3 * m :], r)
    return X, Y


def omega_bound(n, i):
    return comb(n - 1, i) + comb(n - 1, n - i)


def solve_fundamental(T: OperatorTuple, which="forward", tol=1e-8, angles=360, oracle=True, radius=True):
    """Fundamental operators of T (``forward``) or of T* (``adjoint``)."""
    if which not in ("forward", "adjoint"):
        raise ValueError("which must be 'forward' or 'adjoint'")
    A = T if which == "forward" else T.adjoint()
    n, d = A.n, A.dim
    Sn = A[n - 1]
    dd = defect(Sn, "right", tol)
    Q, lam = dd.range_basis, dd.values
    D = dd.D
    scale = A.scale
    R = [A[i - 1] - herm(A[n - i - 1]) @ Sn for i in range(1, n)]
    warn = []

    if dd.rank == 0:
        msg = "defect rank 0: fundamental operators are vacuous"
        warnings.warn(msg, RankDeficiencyWarning, stacklevel=2)
        warn.append(msg)
        res16 = max((op_norm(r) for r in R), default=0.0)
        if res16 > tol * scale:
            raise ResidualTooLarge(f"S_i - S_(n-i)^* S_n = {res16:.2e} with zero defect")
        return FundamentalSystem(which, n, [np.zeros((0, 0), dtype=complex)] * (n - 1), Q, lam,
                                 residual_16=res16, residual_17=0.0, warnings=warn)

    inv = 1.0 / lam
    F = [inv[:, None] * (herm(Q) @ r @ Q) * inv[None, :] for r in R]
    Fa = [Q @ f @ herm(Q) for f in F]
    res16 = max(op_norm(r - D @ fa @ D) for r, fa in zip(R, Fa))
    if res16 > tol * scale:
        raise ResidualTooLarge(f"fundamental equation residual {res16:.2e} (not a Gamma_n-contraction?)")
    res17 = max(
        op_norm(D @ A[i - 1] - Fa[i - 1] @ D - herm(Fa[n - i - 1]) @ D @ Sn) for i in range(1, n)
    )
    if np.min(lam) < 1e-3:
        warn.append(f"small defect eigenvalue {np.min(lam):.2e}; F amplifies errors")

    sys = FundamentalSystem(which, n, F, Q, lam, residual_16=res16, residual_17=res17, warnings=warn)
    if oracle:
        sys.oracle_ops = fundamental_oracle(A, Q, lam)
        sys.oracle_gap = max(op_norm(f - g) for f, g in zip(F, sys.oracle_ops))
    if radius:
        # w(F_(n-i) + z F_i) = w(F_i + conj(z) F_(n-i)), so pairs i and n-i share one sup over the circle
        sys.radius_margin = min(
            omega_bound(n, i) - pencil_numerical_radius(F[i - 1], F[n - i - 1], angles)
            for i in range(1, n // 2 + 1)
        )
    return sys


def fundamental_oracle(A: OperatorTuple, Q, lam):
    """Solve  L Q^* S_i = F_i L Q^* + F_(n-i)^* L Q^* S_n  pairwise by least squares (L = diag(lam))."""
    n = A.n
    Sn = A[n - 1]
    B = lam[:, None] * herm(Q)
    C = B @ Sn
    out = [None] * (n - 1)
    for i in range(1, n // 2 + 1):
        j = n - i
        if j < 1:
            continue
        G1 = B @ A[i - 1]
        G2 = B @ A[j - 1]
        X, Y = solve_sylvester_pair(G1, G2, B, C, same=(i == j))
        out[i - 1], out[j - 1] = X, Y
    return out


def _ops_of(E):
    if isinstance(E, FundamentalSystem):
        return list(E.ops), E.n
    ops = [np.atleast_2d(np.asarray(e, dtype=complex)) for e in E]
    return ops, len(ops) + 1


def check_commutativity_condition(E, tol=1e-8):
    """Residuals of [E_i, E_j] = 0 and [E_i^*, E_(n-j)] = [E_j^*, E_(n-i)] over all pairs."""
    ops, n = _ops_of(E)
    pairs = {}
    worst = 0.0
    for i in range(1, n):
        for j in range(i, n):
            Ei, Ej = ops[i - 1], ops[j - 1]
            c1 = op_norm(Ei @ Ej - Ej @ Ei)
            a = herm(Ei) @ ops[n - j - 1] - ops[n - j - 1] @ herm(Ei)
            b = herm(Ej) @ ops[n - i - 1] - ops[n - i - 1] @ herm(Ej)
            c2 = op_norm(a - b)
            pairs[f"{i},{j}"] = {"commutator": c1, "mixed": c2}
            worst = max(worst, c1, c2)
    return {"pairs": pairs, "worst": worst, "passed": bool(worst <= tol)}


def pencil_tuple(E, space: TruncatedHardySpace = None, tol=1e-8, degree=16):
    """(M_Phi_1, ..., M_Phi_(n-1), M_z) on a truncated Hardy space, Phi_i(z) = E_i^* + z E_(n-i)."""
    ops, n = _ops_of(E)
    r = ops[0].shape[0] if ops else 0
    if space is None:
        space = TruncatedHardySpace(r, degree)
    rep = check_commutativity_condition(ops, tol) if ops else {"passed": True}
    if not rep["passed"]:
        raise CommutativityFailed(f"E fails the commutativity condition (worst {rep['worst']:.2e})")
    mats = [mphi(space, herm(ops[i - 1]), ops[n - i - 1]) for i in range(1, n)]
    mats.append(mz(space))
    return OperatorTuple(mats, structure=[("hardy", space.coeff_dim, space.degree)], interior=space.interior())
