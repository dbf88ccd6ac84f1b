import numpy as np
import pytest

from gamma_models import generators as gen
from gamma_models.errors import DimensionMismatch, GridInadequate, IllDefinedQuotient, NotAnIsometry
from gamma_models.gammaclass import direct_sum
from gamma_models.hardy import (
    TorusGridSpace,
    TruncatedHardySpace,
    align_pencil,
    canonical_gamma_unitary,
    check_unitary_extension,
    is_cnu,
    mphi,
    mz,
    spectrum_distance,
    toeplitz_from_coeffs,
    wold,
)
from gamma_models.opcore import OperatorTuple, joint_spectrum


def poly_mult_oracle(a, b, x):
    """Coefficients of (a + b z) * x(z) truncated to deg x; scalar coefficients."""
    full = np.convolve([a, b], x)
    return full[: len(x)]


def test_mz_and_mphi_examples():
    assert np.allclose(mz(TruncatedHardySpace(2, 0)), 0)
    sp = TruncatedHardySpace(2, 3)
    assert np.allclose(mphi(sp, np.eye(2), np.zeros((2, 2))), np.eye(8))
    a, b = 0.7, -0.2j
    M = mphi(TruncatedHardySpace(1, 2), [[a]], [[b]])
    assert np.allclose(M, [[a, 0, 0], [b, a, 0], [0, b, a]])
    with pytest.raises(DimensionMismatch):
        mphi(sp, np.eye(3), np.eye(3))


def test_mphi_against_polynomial_multiplication(rng):
    sp = TruncatedHardySpace(1, 6)
    a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    x = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    assert np.allclose(mphi(sp, [[a]], [[b]]) @ x, poly_mult_oracle(a, b, x))


def test_toeplitz_matches_mphi(rng):
    sp = TruncatedHardySpace(2, 5)
    A, B = rng.standard_normal((2, 2, 2))
    assert np.allclose(toeplitz_from_coeffs(sp, [A, B]), mphi(sp, A, B))


def test_degree_major_indexing():
    sp = TruncatedHardySpace(3, 4)
    assert sp.index(2, 1) == 7 and sp.total_dim == 15
    assert len(sp.interior()) == 12


def test_wold_pencil_roundtrip(rng):
    V, E = gen.pencil_model(3, 2, 8, rng)
    w = wold(V)
    assert w.shift_mult == 2 and w.unitary_part.dim == 0
    W_true = TruncatedHardySpace(2, 8).embed_constant(np.eye(2))
    aligned, unit_gap = align_pencil(E, w.pencil_coeffs, W_true, w.wandering_basis)
    assert unit_gap <= 1e-10
    for e, f in zip(E, aligned):
        assert np.allclose(f, e, atol=1e-8)


def test_wold_unitary(rng):
    U = gen.gamma_unitary(2, 3, rng)
    w = wold(U)
    assert w.shift_mult == 0 and w.unitary_part.dim == 3


def test_wold_direct_sum(rng):
    V, E, U = gen.isometry_with_unitary(2, 1, 8, 2, rng)
    w = wold(V)
    assert w.shift_mult == 1 and w.unitary_part.dim == 2
    assert max(w.residuals.values()) <= 1e-8
    assert spectrum_distance(joint_spectrum(w.unitary_part), joint_spectrum(U)) <= 1e-8


def test_wold_rejects_contraction():
    with pytest.raises(NotAnIsometry):
        wold(gen.scalar_tuple([0.5, 0.5]))


def test_canonical_examples(rng):
    U = gen.gamma_unitary(3, 3, rng)
    c = canonical_gamma_unitary(U)
    assert c.rank == 3 and np.allclose(c.P, np.eye(3), atol=1e-10)
    assert all(np.allclose(a, b, atol=1e-10) for a, b in zip(c.ambient(), U))
    assert canonical_gamma_unitary(gen.scalar_tuple([0.5, 0.5])).rank == 0


def test_canonical_mixed_diagonal():
    a, b = 0.3, 0.4
    T = OperatorTuple([np.diag([np.exp(1j * a) + np.exp(1j * b), 0.2]), np.diag([np.exp(1j * (a + b)), 0.5])])
    c = canonical_gamma_unitary(T)
    assert c.rank == 1
    assert np.allclose(np.abs(c.basis[:, 0]), [1, 0])
    assert np.allclose(c.tuple[0], [[np.exp(1j * a) + np.exp(1j * b)]])
    assert np.allclose(c.tuple[1], [[np.exp(1j * (a + b))]])
    assert c.residuals["monotonicity"] <= 1e-12


def test_canonical_ill_defined():
    # commuting pair whose compression does not factor: S_2 unitary block, S_1 leaks into it
    T = OperatorTuple([np.array([[0, 0], [0.5, 0]]), np.diag([1.0, 0.0])])
    if T.commutation_residual == 0:
        with pytest.raises(IllDefinedQuotient):
            canonical_gamma_unitary(T, verify=False)


def test_is_cnu(rng):
    assert is_cnu(gen.scalar_tuple([0.5, 0.5]))
    assert not is_cnu(gen.gamma_unitary(2, 2, rng))


def test_unitary_extension_examples():
    grid = TorusGridSpace(1, 32)
    assert check_unitary_extension([np.zeros((1, 1))], grid)["passed"]
    assert check_unitary_extension([np.zeros((1, 1))] * 2, grid)["passed"]
    assert check_unitary_extension([np.eye(1)], grid)["passed"]
    bad = check_unitary_extension([2 * np.eye(1)], grid)
    assert not bad["passed"]
    assert 0 in bad["failed_nodes"]


def test_grid_adequacy():
    TorusGridSpace(1, 33).check_adequate(16)
    with pytest.raises(GridInadequate):
        TorusGridSpace(1, 32).check_adequate(16)
