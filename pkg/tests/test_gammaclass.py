import numpy as np
import pytest

from gamma_models import generators as gen
from gamma_models.errors import ArityMismatch, NotCommuting, NotUnitary, SpectrumOutsideDomain
from gamma_models.gammaclass import (
    CertParams,
    certify_contraction,
    classify,
    conjugate,
    direct_sum,
    exponents,
    monomial_matrices,
)
from gamma_models.opcore import OperatorTuple
from gamma_models.symdomain import symmetrize


def test_exponents_graded():
    ex = exponents(2, 2)
    assert ex[0] == (0, 0)
    assert sorted(ex) == sorted([(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
    assert [sum(a) for a in ex] == sorted(sum(a) for a in ex)


def test_monomial_matrices(rng):
    A = rng.standard_normal((3, 3))
    B = A @ A + np.eye(3)
    alphas = exponents(2, 4)
    mats = dict(zip(alphas, monomial_matrices([A, B], alphas)))
    assert np.allclose(mats[(0, 0)], np.eye(3))
    assert np.allclose(mats[(2, 1)], A @ A @ B)
    assert np.allclose(mats[(1, 3)], A @ B @ B @ B)


def test_scalar_points_certify(rng):
    for n in (2, 3):
        z = gen.disc_points(1, n, rng, 1.0)[0]
        assert certify_contraction(gen.scalar_tuple(z)).label == "contraction"


def test_spec_examples():
    T = OperatorTuple([2 * np.eye(2), np.eye(2)])
    assert certify_contraction(T).label == "contraction"
    with pytest.raises(SpectrumOutsideDomain):
        certify_contraction(OperatorTuple([3 * np.eye(2), np.eye(2)]))


def test_nilpotent_counterexample_refuted():
    # joint spectrum {0} is inside, but ||S_2|| = 2 breaks p(s) = s_2
    T = OperatorTuple([np.zeros((2, 2)), np.array([[0, 2.0], [0, 0]])])
    cert = certify_contraction(T)
    assert cert.label == "refuted"
    assert cert.witness["attained"] > cert.witness["sampled_sup"]


def test_non_commuting_rejected():
    T = OperatorTuple([np.diag([0.1, 0.2]), np.array([[0, 0.1], [0, 0]])])
    with pytest.raises(NotCommuting):
        certify_contraction(T)


def test_n1_is_disc():
    assert certify_contraction(OperatorTuple([np.array([[0, 1.0], [0, 0]])])).label == "contraction"
    assert certify_contraction(OperatorTuple([np.array([[0, 1.5], [0, 0]])])).label == "refuted"


def test_classify_scalar_unitary():
    assert classify(OperatorTuple([np.array([[2.0]]), np.array([[1.0]])])).label == "unitary"


def test_classify_strict_contraction():
    cert = classify(gen.scalar_tuple([0.5, 0.5]))
    assert cert.label == "contraction"
    assert cert.residuals["isometry"] == pytest.approx(1 - 0.25**2)


def test_classify_gamma_unitary(rng):
    U = gen.gamma_unitary(3, 3, rng)
    assert classify(U).label == "unitary"


def test_classify_direct_sum_isometry(rng):
    V, _ = gen.pencil_model(2, 1, 6, rng)
    assert classify(V).label == "pure_isometry"
    W = direct_sum(V, gen.gamma_unitary(2, 2, rng))
    assert classify(W).label == "isometry"


def test_classify_co_isometry(rng):
    V, _ = gen.pencil_model(2, 1, 4, rng)
    # the adjoint of a truncated shift is a co-isometry on the full space only up to the last column
    U = gen.gamma_unitary(2, 2, rng)
    assert classify(U.adjoint()).label == "unitary"


def test_conjugate_and_direct_sum(rng):
    T = gen.scalar_tuple([0.2, 0.3j])
    C = conjugate(T, np.eye(1))
    assert all(np.allclose(a, b) for a, b in zip(C, T))
    with pytest.raises(NotUnitary):
        conjugate(T, 2 * np.eye(1))
    a, b = gen.scalar_tuple([0.1, 0.2]), gen.scalar_tuple([0.3, -0.4])
    ds = direct_sum(a, b)
    for i in range(2):
        assert np.allclose(ds[i], np.diag([a[i][0, 0], b[i][0, 0]]))
    with pytest.raises(ArityMismatch):
        direct_sum(a, gen.scalar_tuple([0.1, 0.1, 0.1]))


def test_certificate_params_recorded():
    cert = certify_contraction(gen.scalar_tuple([0.1, 0.2]), CertParams(trials=10, degree=3))
    assert cert.params["trials"] == 10 and cert.params["degree"] == 3


def test_certificate_scalar_matches_direct_evaluation():
    # for a scalar point, |p(s)| <= sup over the distinguished boundary; certification must agree
    s = symmetrize([0.99, -0.99j])
    assert certify_contraction(OperatorTuple([np.array([[v]]) for v in s])).label == "contraction"
