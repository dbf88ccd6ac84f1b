"""Isometric dilation models of Gamma_n-contractions and the maps between them.

Three constructions are provided, all on truncated Hardy spaces:

* ``douglas``: Hardy space over the defect space of S_n^*, plus the
  canonical Gamma_n-unitary block.
* ``nagy_foias``: the completely non-unitary case, where the characteristic
  function is inner and the model space is the Hardy part orthogonal to
  its range.
* ``schaffer``: the ambient space plus a Hardy space over the defect space of
  S_n, with the defect coupling in the degree-0 slot.

Truncation only affects the top degree coefficient. The tail of the
defining series is bounded by ``||S_n^{*(N+1)}||``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._numerics import herm
from .errors import (
    CommutativityFailed,
    EvaluationSingular,
    GammaModelsError,
    GridInadequate,
    IllConditionedGram,
    NotAContraction,
    NotCNU,
    NotMinimal,
    TruncationInsufficient,
)
from .fundops import FundamentalSystem, check_commutativity_condition, solve_fundamental
from .gammaclass import CertParams, classify, exponents, monomial_matrices
from .hardy import TorusGridSpace, TruncatedHardySpace, canonical_gamma_unitary
from .opcore import OperatorTuple, defect, op_norm


@dataclass
class DilationModel:
    kind: str  # douglas | nagy_foias | schaffer | padded
    ops: list  # model operators V_1..V_n (sparse or dense, K x K)
    embed: np.ndarray  # K x d isometric embedding
    space_desc: list  # block layout, e.g. [("hardy", r, N), ("plain", m)]
    report: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.ops)

    @property
    def dim(self):
        return self.embed.shape[0]

    def dense_ops(self):
        return [o.toarray() if sp.issparse(o) else np.asarray(o) for o in self.ops]

    def interior(self):
        cols, pos = [], 0
        for blk in self.space_desc:
            if blk[0] == "hardy":
                r, N = blk[1], blk[2]
                cols.append(pos + np.arange(r * N))
                pos += r * (N + 1)
            else:
                cols.append(pos + np.arange(blk[1]))
                pos += blk[1]
        return np.concatenate(cols) if cols else np.zeros(0, dtype=int)

    @property
    def model_tuple(self):
        return OperatorTuple(self.dense_ops(), structure=list(self.space_desc), interior=self.interior())

    def to_json(self):
        from .opcore import matrix_to_json

        return {
            "kind": self.kind,
            "n": self.n,
            "dim": self.dim,
            "space": [list(b) for b in self.space_desc],
            "embed": matrix_to_json(self.embed),
            "matrices": [matrix_to_json(o) for o in self.dense_ops()],
            "report": self.report,
            "info": {k: v for k, v in self.info.items() if isinstance(v, (int, float, str))},
        }


def _sp_mphi(r, N, A, B):
    eye = sp.identity(N + 1, dtype=complex, format="csr")
    shift = sp.eye(N + 1, k=-1, dtype=complex, format="csr")
    return (sp.kron(eye, sp.csr_matrix(A)) + sp.kron(shift, sp.csr_matrix(B))).tocsr()


def _sp_mz(r, N):
    return sp.kron(sp.eye(N + 1, k=-1, dtype=complex), sp.identity(r, dtype=complex)).tocsr()


def _blockdiag(*blocks):
    blocks = [b for b in blocks if b.shape[0]]
    return sp.block_diag([sp.csr_matrix(b) for b in blocks], format="csr") if blocks else sp.csr_matrix((0, 0))


def tail_norm(Sn, N):
    """||S_n^{*(N+1)}||, the truncation budget of Hardy-space models of degree N."""
    return op_norm(np.linalg.matrix_power(herm(np.asarray(Sn)), N + 1))


def degree_for_tail(Sn, target, cap=4000):
    """Smallest N with ||S_n^{*(N+1)}|| <= target (power iteration by repeated multiplication)."""
    Sa = herm(np.asarray(Sn))
    P = Sa.copy()
    for N in range(cap + 1):
        if op_norm(P) <= target:
            return N
        P = P @ Sa
    raise TruncationInsufficient(f"tail does not drop below {target:g} within degree {cap}")


def _check_E(E, tol):
    rep = check_commutativity_condition(E, tol) if E.rank else {"passed": True, "worst": 0.0}
    if not rep["passed"]:
        raise CommutativityFailed(f"fundamental operators fail the commutativity condition ({rep['worst']:.2e})")
    return rep["worst"]


def douglas_embedding(T, E, N, canon):
    """Rows (D_* S_n^{*k} h)_{k<=N} in defect coordinates, then the canonical-unitary coordinates of P h."""
    Sn = T[T.n - 1]
    Qs, lam = E.basis, E.defect_values
    rows = []
    X = lam[:, None] * herm(Qs)
    Sa = herm(Sn)
    for _ in range(N + 1):
        rows.append(X)
        X = X @ Sa
    rows.append(herm(canon.basis) @ canon.P)
    return np.vstack(rows)


def douglas_model(T: OperatorTuple, E: FundamentalSystem = None, N=None, tol=1e-8, canonical=None,
                  tail_budget=None, target=1e-8):
    """Douglas-type model: (M_Phi_i (+) D_i, M_z (+) D_n) with Phi_i(z) = E_i^* + z E_(n-i).

    With ``N=None`` the degree is the smallest one whose tail is below
    ``target``. ``tail_budget`` turns an insufficient explicit degree into
    an error.
    """
    n, d = T.n, T.dim
    Sn = T[n - 1]
    if op_norm(Sn) > 1 + tol:
        raise NotAContraction("S_n is not a contraction")
    if E is None:
        E = solve_fundamental(T, "adjoint", tol=tol, radius=False, oracle=False)
    comm = _check_E(E, tol)
    if N is None:
        N = degree_for_tail(Sn, target)
    tail = tail_norm(Sn, N)
    if tail_budget is not None and tail > tail_budget:
        raise TruncationInsufficient(f"||S_n^*^(N+1)|| = {tail:.2e} exceeds budget {tail_budget:.2e} at N={N}")
    canon = canonical if canonical is not None else canonical_gamma_unitary(T)
    r, m = E.rank, canon.rank
    ops = []
    for i in range(1, n):
        hard = _sp_mphi(r, N, herm(E[i]), E[n - i]) if r else sp.csr_matrix((0, 0))
        ops.append(_blockdiag(hard, canon.tuple[i - 1]))
    ops.append(_blockdiag(_sp_mz(r, N) if r else sp.csr_matrix((0, 0)), canon.tuple[n - 1]))
    emb = douglas_embedding(T, E, N, canon)
    desc = [("hardy", r, N), ("plain", m)]
    model = DilationModel("douglas", ops, emb, desc, info=dict(degree=N, r=r, m=m, tail=tail))
    model.info["E"] = E
    model.info["canonical"] = canon
    model.report = verify_model(model, T, L=min(N, 6), tol=tol, certify=False)
    model.report["commutativity_condition"] = comm
    model.report["tail"] = tail
    budget = max(10 * tol, 10 * tail)
    model.report["budget"] = {"embedding_isometry": budget, "intertwining": budget, "words": 100 * budget}
    return model


@dataclass
class CharacteristicFunction:
    T: np.ndarray
    Q: np.ndarray  # defect basis of T
    Qs: np.ndarray  # defect basis of T^*
    D: np.ndarray
    Ds: np.ndarray

    @property
    def shape(self):
        return (self.Qs.shape[1], self.Q.shape[1])

    def __call__(self, z):
        """Theta(z) : D_T -> D_{T*}, as an r_{T*} x r_T matrix."""
        d = self.T.shape[0]
        R = np.eye(d) - z * herm(self.T)
        if np.linalg.cond(R) > 1e13:
            raise EvaluationSingular(f"resolvent singular at z = {z}")
        inner = -self.T + z * self.Ds @ np.linalg.solve(R, self.D)
        return herm(self.Qs) @ inner @ self.Q

    def taylor(self, K):
        """Coefficients Theta_0..Theta_K."""
        out = [-herm(self.Qs) @ self.T @ self.Q]
        X = self.D @ self.Q
        for _ in range(K):
            out.append(herm(self.Qs) @ self.Ds @ X)
            X = herm(self.T) @ X
        return out

    def delta(self, eta, tol=1e-12):
        """(I - Theta^* Theta)^(1/2) at a boundary point."""
        th = self(eta)
        return defect(th, "right", tol=1e-6).D if th.size else np.zeros((th.shape[1], th.shape[1]))

    def boundary_report(self, M):
        nodes = np.exp(2j * np.pi * np.arange(M) / M)
        norm_excess, unimod, pyth = 0.0, 0.0, 0.0
        for eta in nodes:
            th = self(eta)
            nrm = op_norm(th)
            norm_excess = max(norm_excess, nrm - 1.0)
            g = herm(th) @ th
            w = np.clip(np.linalg.eigvalsh(np.eye(g.shape[0]) - (g + herm(g)) / 2), 0, None)
            v = np.linalg.eigh(np.eye(g.shape[0]) - (g + herm(g)) / 2)[1]
            dl = (v * np.sqrt(w)) @ herm(v)
            pyth = max(pyth, op_norm(dl @ dl + g - np.eye(g.shape[0])))
            if th.shape[0] == th.shape[1]:
                unimod = max(unimod, op_norm(g - np.eye(g.shape[0])))
        return {"norm_excess": norm_excess, "inner_defect": unimod, "pythagoras": pyth}


def characteristic_function(Tn, tol=1e-8):
    Tn = np.atleast_2d(np.asarray(Tn, dtype=complex))
    if op_norm(Tn) > 1 + tol:
        raise NotAContraction("characteristic function needs a contraction")
    dT = defect(Tn, "right", tol)
    dS = defect(Tn, "left", tol)
    return CharacteristicFunction(Tn, dT.range_basis, dS.range_basis, dT.D, dS.D)


def nagy_foias_model(T: OperatorTuple, E: FundamentalSystem = None, N=None, M=None, tol=1e-8, target=1e-8):
    """Characteristic-function model for tuples whose last coordinate is completely non-unitary."""
    n, d = T.n, T.dim
    Sn = T[n - 1]
    if N is None:
        N = degree_for_tail(Sn, target)
    M = 2 * N + 1 if M is None else M
    if M < 2 * N + 1:
        raise GridInadequate(f"grid size {M} < 2N+1 = {2 * N + 1}")
    canon = canonical_gamma_unitary(T, verify=False)
    if canon.rank:
        raise NotCNU(f"asymptotic projection of S_n^* has rank {canon.rank}")
    if E is None:
        E = solve_fundamental(T, "adjoint", tol=tol, radius=False, oracle=False)
    comm = _check_E(E, tol)
    theta = characteristic_function(Sn, tol)
    r = E.rank
    grid = TorusGridSpace(theta.shape[1], M)
    bnd = theta.boundary_report(M)
    # Delta vanishes in the finite-dimensional c.n.u. case, so the torus block is empty
    delta_rank = 0 if bnd["inner_defect"] <= 1e-6 or theta.shape[0] == theta.shape[1] else theta.shape[1]
    ops = [_sp_mphi(r, N, herm(E[i]), E[n - i]) for i in range(1, n)] + [_sp_mz(r, N)]
    emb = douglas_embedding(T, E, N, canon)[: r * (N + 1)]
    desc = [("hardy", r, N), ("plain", 0)]
    model = DilationModel("nagy_foias", ops, emb, desc, info=dict(degree=N, r=r, grid=M, delta_rank=delta_rank))
    model.info["theta"] = theta
    model.info["grid_space"] = grid
    model.report = verify_model(model, T, L=min(N, 6), tol=tol, certify=False)
    model.report["orthogonality"] = _graph_orthogonality(emb, theta, r, N)
    model.report["boundary"] = bnd
    model.report["commutativity_condition"] = comm
    model.report["tail"] = tail_norm(Sn, N)
    budget = max(10 * tol, 10 * model.report["tail"])
    model.report["budget"] = {"embedding_isometry": budget, "intertwining": budget, "words": 100 * budget,
                              "orthogonality": budget}
    return model


def _graph_orthogonality(emb, theta, r, N):
    """max_j ||E^* (Theta z^j)|| over truncated Hardy coordinates."""
    coeffs = theta.taylor(N)
    rT = theta.shape[1]
    if r == 0 or rT == 0:
        return 0.0
    G = np.zeros((r * (N + 1), rT), dtype=complex)
    worst = 0.0
    for j in range(N + 1):
        G[:] = 0
        for k in range(j, N + 1):
            G[k * r : (k + 1) * r] = coeffs[k - j]
        worst = max(worst, op_norm(herm(emb) @ G))
    return worst


def schaffer_model(T: OperatorTuple, F: FundamentalSystem = None, N=16, tol=1e-8):
    """Schaffer-type model on H (+) H^2(D_{S_n}) truncated at degree N."""
    n, d = T.n, T.dim
    if F is None:
        F = solve_fundamental(T, "forward", tol=tol, radius=False, oracle=False)
    Q, lam = F.basis, F.defect_values
    r = F.rank
    Dcoord = lam[:, None] * herm(Q)  # r x d, degree-0 coordinates of D h
    K = d + r * (N + 1)

    def coupling(X):
        out = np.zeros((r * (N + 1), d), dtype=complex)
        out[:r] = X
        return out

    ops = []
    for i in range(1, n + 1):
        if i < n:
            low = coupling(herm(F[n - i]) @ Dcoord) if r else np.zeros((0, d))
            hard = _sp_mphi(r, N, F[i], herm(F[n - i])) if r else sp.csr_matrix((0, 0))
        else:
            low = coupling(Dcoord) if r else np.zeros((0, d))
            hard = _sp_mz(r, N) if r else sp.csr_matrix((0, 0))
        ops.append(sp.bmat([[sp.csr_matrix(T[i - 1]), None], [sp.csr_matrix(low), hard]], format="csr")
                   if r else sp.csr_matrix(T[i - 1]))
    emb = np.vstack([np.eye(d), np.zeros((K - d, d))])
    desc = [("plain", d), ("hardy", r, N)]
    model = DilationModel("schaffer", ops, emb, desc, info=dict(degree=N, r=r))
    model.info["F"] = F
    rep = verify_model(model, T, L=N, tol=tol, certify=False)
    dense = model.dense_ops()
    inner = model.interior()
    rep["interior_isometry"] = op_norm((herm(dense[-1]) @ dense[-1] - np.eye(K))[:, inner])
    rep["interior_commutators"] = max(
        (op_norm((a @ b - b @ a)[:, inner]) for i, a in enumerate(dense) for b in dense[i + 1 :]), default=0.0
    )
    rep["F_commutativity"] = check_commutativity_condition(F)["worst"] if r else 0.0
    rep["budget"] = {"embedding_isometry": 1e-10, "intertwining": 1e-10, "words_relative": 1e-10,
                     "interior_commutators": 1e-9}
    model.report = rep
    return model


def _word_images(ops, X, L):
    """V^alpha X for every multi-index |alpha| <= L (graded order)."""
    n = len(ops)
    alphas = exponents(n, L)
    out = {alphas[0]: X}
    for a in alphas[1:]:
        i = max(j for j, e in enumerate(a) if e)
        prev = list(a)
        prev[i] -= 1
        out[a] = ops[i] @ out[tuple(prev)]
    return alphas, out


def verify_model(model: DilationModel, T: OperatorTuple, L=6, tol=1e-8, certify=None):
    """Residuals of the dilation identities E^* w(V) E = w(S), E S_i^* = V_i^* E, E^* E = I."""
    emb = model.embed
    d = T.dim
    rep = {"embedding_isometry": op_norm(herm(emb) @ emb - np.eye(d))}
    inter = [op_norm(emb @ herm(T[i]) - herm(model.ops[i]) @ emb) for i in range(T.n)]
    rep["intertwining"] = inter
    alphas, imgs = _word_images(model.ops, emb, L)
    Smono = monomial_matrices(T.ops, alphas)
    words, rel = {}, 0.0
    for a, Sm in zip(alphas, Smono):
        err = op_norm(herm(emb) @ np.asarray(imgs[a]) - Sm)
        words[",".join(map(str, a))] = err
        # long words of large-norm tuples carry eps * ||w(S)|| of rounding error
        rel = max(rel, err / max(1.0, op_norm(Sm)))
    rep["words"] = max(words.values())
    rep["words_relative"] = rel
    rep["word_residuals"] = words
    rep["word_length"] = L
    if certify is None:
        certify = model.dim <= 64
    if certify:
        try:
            rep["model_class"] = classify(model.model_tuple, tol=1e-8, cert_params=CertParams(tol=1e-8)).label
        except GammaModelsError as exc:  # e.g. a corrupted model that no longer commutes
            rep["model_class"] = exc.code
    rep["worst"] = max([rep["embedding_isometry"], rep["words"]] + inter)
    return rep


def report_passed(report):
    budget = report.get("budget", {})
    for key, lim in budget.items():
        val = report.get(key)
        if isinstance(val, list):
            val = max(val) if val else 0.0
        if val is not None and val > lim:
            return False
    return True


# ------------------------------------------------------------ factorization


@dataclass
class Factorization:
    Xi: np.ndarray  # K x K_m
    report: dict
    span_basis_minimal: np.ndarray
    span_basis_general: np.ndarray


def _orbit(model, horizon):
    Vn = model.ops[-1]
    X = model.embed
    cols = []
    for _ in range(horizon + 1):
        cols.append(np.asarray(X))
        X = Vn @ X
    return np.hstack(cols)


def _orthonormal_span(G, tol):
    u, sv, _ = np.linalg.svd(G, full_matrices=False)
    keep = sv > np.sqrt(tol) * (sv[0] if sv.size else 0.0)
    return u[:, keep]


def factorize(general: DilationModel, minimal: DilationModel, tol=1e-8, horizon=None, require_minimal=True):
    """The isometry Xi with Xi V_m^k E_m h = V^k E h, built on the generator spans."""
    if general.embed.shape[1] != minimal.embed.shape[1]:
        raise ValueError("models dilate spaces of different dimension")
    if horizon is None:
        horizon = minimal.info.get("degree", 0) + 1
    Gm = _orbit(minimal, horizon)
    G = _orbit(general, horizon)
    gram = herm(Gm) @ Gm
    gram = (gram + herm(gram)) / 2
    w, U = np.linalg.eigh(gram)
    lmax = w[-1] if w.size else 0.0
    keep = w > tol * lmax
    if np.any((w > tol * lmax) & (w < 10 * tol * lmax)):
        raise IllConditionedGram("Gram eigenvalues straddle the rank cutoff")
    scale = 1.0 / np.sqrt(w[keep])
    Om = Gm @ (U[:, keep] * scale)
    O = G @ (U[:, keep] * scale)
    Xi = O @ herm(Om)
    Km = minimal.dim
    rep = {"rank": int(keep.sum()), "horizon": horizon}
    rep["minimality_gap"] = op_norm(np.eye(Km) - Om @ herm(Om))
    if require_minimal and rep["minimality_gap"] > max(tol, 1e-6):
        raise NotMinimal(f"orbit of the minimal model misses {rep['minimality_gap']:.2e} of its space")
    rep["isometry"] = op_norm(herm(Xi) @ Xi - Om @ herm(Om))
    rep["embedding"] = op_norm(Xi @ minimal.embed - general.embed)
    rep["intertwining"] = [
        op_norm(Xi @ herm(a) - herm(b) @ Xi) for a, b in zip(minimal.dense_ops(), general.dense_ops())
    ]
    rep["intertwining_max"] = max(rep["intertwining"])
    span = _orthonormal_span(G, tol)
    rep["range_vs_span"] = op_norm(Xi @ herm(Xi) - span @ herm(span))
    rep["surjective"] = bool(span.shape[1] == general.dim)
    return Factorization(Xi, rep, Om, O)


def pad_model(model: DilationModel, U: OperatorTuple):
    """Direct sum of a model with an uncoupled Gamma_n-unitary summand (embedding unchanged)."""
    ops = [sp.block_diag([sp.csr_matrix(a) if not sp.issparse(a) else a, sp.csr_matrix(u)], format="csr")
           for a, u in zip(model.ops, U.ops)]
    emb = np.vstack([model.embed, np.zeros((U.dim, model.embed.shape[1]))])
    info = dict(model.info)
    return DilationModel("padded", ops, emb, list(model.space_desc) + [("plain", U.dim)], info=info)
