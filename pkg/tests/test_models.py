import numpy as np
import pytest

from gamma_models import generators as gen
from gamma_models.errors import GridInadequate, NotCNU, NotMinimal, TruncationInsufficient
from gamma_models.models import (
    characteristic_function,
    degree_for_tail,
    douglas_model,
    factorize,
    nagy_foias_model,
    pad_model,
    report_passed,
    schaffer_model,
    tail_norm,
    verify_model,
)
from gamma_models.opcore import OperatorTuple


def mobius(t, z):
    return (z - t) / (1 - np.conj(t) * z)


def test_tail_helpers():
    Sn = np.array([[0.5]])
    assert tail_norm(Sn, 3) == pytest.approx(0.5**4)
    N = degree_for_tail(Sn, 1e-8)
    assert 0.5 ** (N + 1) <= 1e-8 < 0.5**N


def test_douglas_scalar_zero():
    T = gen.scalar_tuple([0.0, 0.0])
    m = douglas_model(T, N=4)
    assert np.allclose(m.embed[:, 0], np.eye(m.dim)[0])
    rep = verify_model(m, T, L=3)
    assert rep["worst"] <= 1e-14


def test_douglas_unitary_collapses(rng):
    U = gen.gamma_unitary(3, 2, rng)
    m = douglas_model(U, N=4)
    assert m.info["r"] == 0 and m.info["m"] == 2
    assert m.report["worst"] <= 1e-12


def test_douglas_matrix(rng):
    T, _ = gen.compressed_tuple(2, 2, 2, rng, max_norm=0.8)
    m = douglas_model(T)
    assert report_passed(m.report)
    assert m.report["embedding_isometry"] <= 1e-7


def test_douglas_tail_budget(rng):
    T = gen.scalar_tuple([0.9, 0.9])
    with pytest.raises(TruncationInsufficient):
        douglas_model(T, N=4, tail_budget=1e-8)


def test_characteristic_function_scalar():
    z = np.exp(0.3j) * 0.4
    Th0 = characteristic_function(np.array([[0.0]]))
    assert Th0(z)[0, 0] == pytest.approx(z)
    Th = characteristic_function(np.array([[0.6]]))
    assert Th(z)[0, 0] == pytest.approx(mobius(0.6, z))
    eta = np.exp(1.1j)
    assert abs(Th(eta)[0, 0]) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(Th.delta(eta), 0, atol=1e-7)


def test_characteristic_function_zero_matrix():
    Th = characteristic_function(np.zeros((3, 3)))
    assert np.allclose(Th(0.3 + 0.2j), (0.3 + 0.2j) * np.eye(3))


def test_characteristic_function_boundary(rng):
    T, _ = gen.compressed_tuple(2, 2, 2, rng, max_norm=0.9)
    rep = characteristic_function(T[1]).boundary_report(64)
    assert rep["norm_excess"] <= 1e-10 and rep["pythagoras"] <= 1e-9


def test_nf_nilpotent_exact():
    T = OperatorTuple([np.zeros((2, 2)), 0.7 * np.eye(2, k=1)])
    m = nagy_foias_model(T, N=2, M=8)
    assert m.report["embedding_isometry"] <= 1e-14 and m.report["worst"] <= 1e-14


def test_nf_refusals(rng):
    with pytest.raises(NotCNU):
        nagy_foias_model(gen.gamma_unitary(2, 2, rng), N=4, M=16)
    with pytest.raises(GridInadequate):
        nagy_foias_model(gen.scalar_tuple([0.3, 0.2]), N=8, M=16)


def test_schaffer_zero_tuple():
    T = OperatorTuple([np.zeros((1, 1))] * 2)
    m = schaffer_model(T, N=4)
    Vn = m.dense_ops()[-1]
    E = m.embed
    for k in range(1, 4):
        assert np.allclose(E.conj().T @ np.linalg.matrix_power(Vn, k) @ E, 0)


def test_schaffer_unitary_padding(rng):
    U = gen.gamma_unitary(2, 2, rng)
    m = schaffer_model(U, N=3)
    assert m.dim == 2  # zero defect: the Hardy block is empty
    assert all(np.allclose(a, b) for a, b in zip(m.dense_ops(), U))


@pytest.mark.parametrize("n", [2, 3])
def test_schaffer_exact(n, rng):
    T, _ = gen.compressed_tuple(n, 1, 2, rng)
    m = schaffer_model(T, N=6)
    rep = verify_model(m, T, L=6)
    assert rep["worst"] <= 1e-10
    assert m.report["interior_commutators"] <= 1e-9


def test_factorize_self_is_identity(rng):
    T = gen.scalar_tuple([0.4, -0.2j])
    m = schaffer_model(T, N=6)
    fx = factorize(m, m)
    assert np.allclose(fx.Xi, np.eye(m.dim), atol=1e-10)


def test_factorize_douglas_schaffer_scalar():
    T = gen.scalar_tuple([0.5, 0.3])
    S = schaffer_model(T, N=8)
    m = degree_for_tail(T[1], 1e-15)
    D = douglas_model(T, N=8 + 1 + m)
    fx = factorize(D, S)
    assert fx.report["embedding"] <= 1e-8 and fx.report["isometry"] <= 1e-8
    assert fx.report["intertwining_max"] <= 1e-8


def test_factorize_padding(rng):
    T = gen.scalar_tuple([0.3, 0.5j])
    S = schaffer_model(T, N=8)
    P = pad_model(S, gen.gamma_unitary(2, 2, rng))
    fx = factorize(P, S)
    assert not fx.report["surjective"]
    proj = np.zeros((P.dim, P.dim))
    proj[: S.dim, : S.dim] = np.eye(S.dim)
    assert np.linalg.norm(fx.Xi @ fx.Xi.conj().T - proj, 2) <= 1e-8


def test_factorize_requires_minimal(rng):
    T = gen.scalar_tuple([0.3, 0.5j])
    S = schaffer_model(T, N=8)
    P = pad_model(S, gen.gamma_unitary(2, 2, rng))
    with pytest.raises(NotMinimal):
        factorize(S, P)


def test_verify_model_length_zero(rng):
    T = gen.scalar_tuple([0.3, 0.1])
    rep = verify_model(schaffer_model(T, N=4), T, L=0)
    assert list(rep["word_residuals"]) == ["0,0"]
