"""Dense operator-tuple primitives."""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize, minimize_scalar

from ._numerics import EPS, as_matrix, cluster_groups, herm
from .errors import DimensionMismatch, NotAContraction, TriangularizationFailed


@dataclass
class OperatorTuple:
    """Ordered tuple ``(S_1, ..., S_n)`` of square matrices on a common space.

    ``structure`` optionally records a block lower-triangular layout, as a
    list of ``("plain", d)`` / ``("hardy", r, N)`` entries. It lets the joint
    spectrum be read blockwise instead of from a (badly conditioned) Schur
    form of a large nilpotent block.
    """

    ops: list
    structure: list = None
    interior: np.ndarray = None  # column indices where truncated-isometry identities hold
    commutation_residual: float = field(init=False)

    def __post_init__(self):
        self.ops = [as_matrix(a, f"S_{i + 1}") for i, a in enumerate(self.ops)]
        if not self.ops:
            raise ValueError("empty tuple")
        d = self.ops[0].shape[0]
        for a in self.ops:
            if a.shape != (d, d):
                raise DimensionMismatch("all operators must be square of the same size")
            if not np.all(np.isfinite(a)):
                raise ValueError("non-finite matrix entries")
        self.commutation_residual = max(
            (op_norm(a @ b - b @ a) for i, a in enumerate(self.ops) for b in self.ops[i + 1 :]),
            default=0.0,
        )

    @property
    def n(self):
        return len(self.ops)

    @property
    def dim(self):
        return self.ops[0].shape[0]

    @property
    def scale(self):
        return max(1.0, max(op_norm(a) for a in self.ops))

    def __getitem__(self, i):
        return self.ops[i]

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)

    def adjoint(self):
        return OperatorTuple([herm(a) for a in self.ops], structure=self.structure)

    def scaled(self, factors):
        return OperatorTuple([c * a for c, a in zip(factors, self.ops)])


@dataclass
class DefectData:
    D: np.ndarray
    range_basis: np.ndarray  # (d, r), orthonormal columns
    values: np.ndarray  # eigenvalues of D on range_basis
    side: str

    @property
    def rank(self):
        return self.range_basis.shape[1]

    def coords(self, x):
        """Coordinates in the defect space of ``D @ x``."""
        return self.values[:, None] * (herm(self.range_basis) @ x)


def op_norm(a):
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def pinv_apply(a, b, tol=1e-12):
    """``A^+ B`` with singular values below ``tol * sigma_max`` treated as zero."""
    a = as_matrix(a)
    u, sv, vh = np.linalg.svd(a)
    keep = sv > tol * (sv[0] if sv.size else 0.0)
    if not np.any(keep):
        return np.zeros((a.shape[1], np.asarray(b).shape[-1]), dtype=complex)
    return herm(vh[keep]) @ ((herm(u[:, keep]) @ b) / sv[keep, None])


def _phase_fix(vecs):
    # largest-modulus entry of each column made real positive, for reproducible bases
    if vecs.size == 0:
        return vecs
    idx = np.argmax(np.abs(vecs), axis=0)
    piv = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(piv) / piv)[None, :]


def psd_sqrt(h, tol=0.0):
    """Principal square root of a Hermitian matrix with eigenvalues above -tol clipped to 0."""
    w, v = np.linalg.eigh((h + herm(h)) / 2)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ herm(v), w, v


def defect(a, side="right", tol=1e-8):
    """Defect operator ``(I - A*A)^(1/2)`` (right) or ``(I - AA*)^(1/2)`` (left).

    The defect space basis keeps eigenvectors whose eigenvalue of ``I - A*A``
    (resp. ``I - AA*``) exceeds ``tol``. Eigenvalues at or below ``tol`` are
    treated as zero in D as well, since their square roots (about 1e-8 for a
    rounding-level 1e-16) would otherwise leak outside the defect space.
    """
    a = as_matrix(a)
    nrm = op_norm(a)
    if nrm > 1 + tol:
        raise NotAContraction(f"||A|| = {nrm:.3e} > 1")
    g = herm(a) @ a if side == "right" else a @ herm(a)
    if side not in ("right", "left"):
        raise ValueError("side must be 'right' or 'left'")
    eye = np.eye(a.shape[0])
    w, v = np.linalg.eigh(eye - (g + herm(g)) / 2)
    keep = w > tol
    basis = _phase_fix(v[:, keep])
    values = np.sqrt(w[keep])
    d = (basis * values) @ herm(basis)
    return DefectData(D=d, range_basis=basis, values=values, side=side)


def numerical_radius(a, angles=360, refine=True):
    """Lower bound for ``w(A) = max_theta lambda_max(Re(e^{i theta} A))`` from a uniform theta grid.

    The best grid angle is polished with a bounded scalar search, which keeps
    the value a lower bound while removing most of the grid bias.
    """
    a = as_matrix(a)
    if angles < 4:
        raise ValueError("angles must be >= 4")
    theta = 2 * np.pi * np.arange(angles) / angles

    def lam(t):
        ph = np.exp(1j * np.atleast_1d(t))[:, None, None]
        hmat = (ph * a + np.conj(ph) * herm(a)) / 2
        return np.linalg.eigvalsh(hmat)[:, -1]

    vals = lam(theta)
    k = int(np.argmax(vals))
    best = float(vals[k])
    if refine:
        h = 2 * np.pi / angles
        res = minimize_scalar(
            lambda t: -lam(t)[0], bounds=(theta[k] - h, theta[k] + h), method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, float(-res.fun))
    return best


def pencil_numerical_radius(a, b, angles=360):
    """``max_{|z|=1} w(A + zB)`` estimated on an ``angles x angles`` grid plus local polish."""
    a, b = as_matrix(a), as_matrix(b)
    theta = 2 * np.pi * np.arange(angles) / angles
    ph = np.exp(1j * theta)

    def lam(t, p):
        x = np.exp(1j * p) * (a + np.exp(1j * t) * b)
        return np.linalg.eigvalsh((x + herm(x)) / 2)[-1]

    best, arg = -np.inf, (0.0, 0.0)
    chunk = max(1, 20000 // angles)
    for start in range(0, angles, chunk):
        zs = ph[start : start + chunk]
        x = ph[None, :, None, None] * (a[None, None] + zs[:, None, None, None] * b[None, None])
        vals = np.linalg.eigvalsh((x + herm(x)) / 2)[..., -1]
        i, j = np.unravel_index(np.argmax(vals), vals.shape)
        if vals[i, j] > best:
            best, arg = float(vals[i, j]), (theta[start + i], theta[j])
    res = minimize(lambda v: -lam(v[0], v[1]), np.array(arg), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14})
    return max(best, float(-res.fun))


def _triangular_defect(mats):
    return max(float(np.linalg.norm(np.tril(m, -1))) for m in mats)


def joint_spectrum(T: OperatorTuple, tol=1e-8, rng=None, max_attempts=8):
    """Joint eigenvalues (one n-tuple per dimension) of a commuting tuple.

    Uses a Schur form of a random real combination of the operators; when
    the conjugated operators fail to be triangular, the eigenvalue clusters
    of the combination are split off one at a time by reordered Schur forms
    and each cluster is read from traces.
    """
    if T.structure:
        return _structured_spectrum(T, tol, rng, max_attempts)
    rng = np.random.default_rng(rng)
    scale = T.scale
    if T.dim == 0:
        return np.zeros((0, T.n), dtype=complex)
    last = None
    for _ in range(max_attempts):
        c = rng.standard_normal(T.n)
        c /= np.linalg.norm(c)
        L = sum(ci * a for ci, a in zip(c, T.ops))
        R, Z = sla.schur(L, output="complex")
        conj = [herm(Z) @ a @ Z for a in T.ops]
        last = _triangular_defect(conj)
        if last <= tol * scale:
            return np.stack([np.diag(m) for m in conj], axis=1)
        pts = _cluster_split(T.ops, c, scale, tol)
        if pts is not None:
            return pts
    raise TriangularizationFailed(
        f"no simultaneous triangularization after {max_attempts} attempts (defect {last:.2e})"
    )


def _cluster_split(ops, c, scale, tol):
    ops = [np.asarray(a) for a in ops]
    d = ops[0].shape[0]
    out = []
    while d > 0:
        L = sum(ci * a for ci, a in zip(c, ops))
        ev = np.linalg.eigvals(L)
        groups = cluster_groups(ev, scale=scale, cap=1e-3 * scale)
        g = ev[groups[0]]
        k = len(g)
        # a tiny radius around the cluster members selects exactly that cluster
        gap = min((np.min(np.abs(ev[j] - g)) for j in range(d) if j not in groups[0]), default=np.inf)
        rad = max(float(np.max(np.abs(g - g.mean()))) * 1.01, 0.5 * gap if np.isfinite(gap) else 1.0)
        rad = min(rad, 0.5 * gap) if np.isfinite(gap) else rad
        _, Z, sdim = sla.schur(L, output="complex", sort=lambda x: np.min(np.abs(x - g)) < rad)
        if sdim != k:
            return None
        Zk, Zr = Z[:, :k], Z[:, k:]
        for a in ops:
            if op_norm(herm(Zr) @ a @ Zk) > np.sqrt(tol) * scale:
                return None
        mu = [np.trace(herm(Zk) @ a @ Zk) / k for a in ops]
        for a, m in zip(ops, mu):
            blk = herm(Zk) @ a @ Zk - m * np.eye(k)
            if op_norm(np.linalg.matrix_power(blk, k)) > max(tol, 1e3 * EPS) * scale**k:
                return None
        out.extend([mu] * k)
        ops = [herm(Zr) @ a @ Zr for a in ops]
        d -= k
    return np.array(out, dtype=complex)


def _structured_spectrum(T, tol, rng, max_attempts):
    pts, pos = [], 0
    for blk in T.structure:
        if blk[0] == "plain":
            size = blk[1]
            sub = OperatorTuple([a[pos : pos + size, pos : pos + size] for a in T.ops])
            if size:
                pts.append(joint_spectrum(sub, tol, rng, max_attempts))
        elif blk[0] == "hardy":
            r, N = blk[1], blk[2]
            size = r * (N + 1)
            if size:
                sub = OperatorTuple([a[pos : pos + r, pos : pos + r] for a in T.ops])
                pts.append(np.tile(joint_spectrum(sub, tol, rng, max_attempts), (N + 1, 1)))
        else:
            raise ValueError(f"unknown block kind {blk[0]!r}")
        pos += size
    if pos != T.dim:
        raise DimensionMismatch("structure does not cover the space")
    return np.concatenate(pts, axis=0) if pts else np.zeros((0, T.n), dtype=complex)


def matrix_to_json(a):
    a = np.asarray(a, dtype=complex)
    doc = {"dim": int(a.shape[0])} if a.shape[0] == a.shape[1] else {"shape": list(a.shape)}
    doc["entries"] = [[float(v.real), float(v.imag)] for v in a.ravel()]
    return doc


def matrix_from_json(doc):
    shape = tuple(doc["shape"]) if "shape" in doc else (doc["dim"], doc["dim"])
    vals = np.array([complex(re, im) for re, im in doc["entries"]], dtype=complex)
    return vals.reshape(shape)
