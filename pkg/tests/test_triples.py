import numpy as np
import pytest
from hypothesis import given, strategies as st

from tetrablock.errors import NotAContraction, ValidationError
from tetrablock.geometry import TetraPoint, in_bE, sample_closed_E_array
from tetrablock.harness import gen_e_unitary, interior_points
from tetrablock.numkit import haar_unitary
from tetrablock.polynomials import Polynomial3
from tetrablock.triples import (OperatorTriple, classify, classify_E_isometry,
                                classify_E_unitary, joint_eigenvalues, purity, rho_check,
                                rho_tolerance, vn_falsifier)


def test_triple_validation():
    with pytest.raises(ValidationError) as err:
        OperatorTriple(np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]]), np.zeros((2, 2)))
    assert err.value.pair == ("A", "B")
    assert err.value.norm == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        OperatorTriple(np.eye(2), np.eye(3), np.eye(2))
    assert OperatorTriple(np.zeros((0, 0)), np.zeros((0, 0)), np.zeros((0, 0))).d == 0


def test_classify_E_unitary_examples():
    N3 = np.diag([1, 1j])
    N2 = np.diag([0.5, 0.5])
    assert classify_E_unitary(OperatorTriple(N2.conj().T @ N3, N2, N3))
    assert not classify_E_unitary(OperatorTriple(*(np.zeros((2, 2)),) * 3))
    assert not classify_E_unitary(OperatorTriple(0.4 * np.eye(2), 0.5 * np.eye(2), np.eye(2)))


def test_classify_E_isometry_examples():
    t = gen_e_unitary(3, seed=4)
    assert classify_E_isometry(t)
    assert not classify_E_isometry(OperatorTriple(*(0.5 * np.eye(2),) * 3))


def test_rho_examples():
    r = rho_check(OperatorTriple(*(np.zeros((1, 1)),) * 3))
    assert r.min_eig_rho1 == pytest.approx(1.0) and r.min_eig_rho2 == pytest.approx(1.0)
    assert min(rho_check(OperatorTriple.scalar(0.4, 0.35, 0.5))) >= -1e-12
    r = rho_check(OperatorTriple.scalar(0.7, 0.7, 0))
    assert min(r) <= -0.4 + 1e-12


def test_vn_examples():
    assert vn_falsifier(OperatorTriple(*(np.zeros((2, 2)),) * 3), n_points=200) == []
    pts = interior_points(4, np.random.default_rng(1))
    assert vn_falsifier(OperatorTriple.diagonal(pts), n_points=2000) == []
    viol = vn_falsifier(OperatorTriple.scalar(1.2, 0, 0), n_polys=0, n_points=2000)
    assert viol and viol[0].lhs == pytest.approx(1.2)
    assert viol[0].sup_estimate <= 1.0 + 1e-12
    with pytest.raises(ValueError):
        vn_falsifier(OperatorTriple.scalar(0, 0, 0), max_degree=9)


def test_purity_examples():
    assert purity(0.5 * np.eye(2)) == "pure"
    assert purity(np.diag([1, 0.5])) == "mixed"
    assert purity(np.array([[0, 1], [0, 0]])) == "pure"
    assert purity(haar_unitary(3, np.random.default_rng(0))) == "unitary"
    with pytest.raises(NotAContraction):
        purity(np.diag([1.5, 0.2]))


@given(seed=st.integers(0, 10**5), theta=st.floats(0, 2 * np.pi))
def test_rho_stable_under_rotation(seed, theta):
    rng = np.random.default_rng(seed)
    pts = sample_closed_E_array(3, rng)
    t = OperatorTriple.diagonal(pts).conjugated(haar_unitary(3, rng))
    w = np.exp(1j * theta)
    assert min(rho_check(t, 16, seed)) >= -rho_tolerance(t)
    assert min(rho_check(t.rotated(w), 16, seed)) >= -rho_tolerance(t)


@given(seed=st.integers(0, 10**5), d=st.integers(1, 4))
def test_E_unitaries_pass_vn(seed, d):
    t = gen_e_unitary(d, seed)
    assert classify_E_unitary(t)
    assert vn_falsifier(t, n_polys=5, n_points=1000, seed=seed) == []


@given(seed=st.integers(0, 10**5))
def test_normal_triples_unitary_iff_spectrum_in_bE(seed):
    rng = np.random.default_rng(seed)
    d = 3
    U = haar_unitary(d, rng)
    if seed % 2:
        pts = sample_closed_E_array(d, rng, boundary=True)
    else:
        pts = sample_closed_E_array(d, rng)
    t = OperatorTriple.diagonal(pts).conjugated(U)
    t = OperatorTriple(t.A, t.B, t.P)
    je = joint_eigenvalues(t, seed)
    assert je is not None
    assert classify_E_unitary(t) == all(in_bE(p) for p in je)


def test_adjoint_closure_of_verdicts():
    rng = np.random.default_rng(5)
    agree = 0
    for i in range(100):
        if i % 3 == 0:
            p = TetraPoint.from_certificate(0.7 * np.exp(1j * i), 0.6, 0.3 * np.exp(2j * i))
            t = OperatorTriple.scalar(p.x1, p.x2, p.x3)
        else:
            t = OperatorTriple.diagonal(sample_closed_E_array(2, rng))
            t = t.conjugated(haar_unitary(2, rng))
            t = OperatorTriple(t.A, t.B, t.P)
        verdicts = []
        for s in (t, t.adjoint()):
            rho_ok = min(rho_check(s, 16, i)) >= -rho_tolerance(s)
            vn_ok = not vn_falsifier(s, 3, 4, 500, seed=i)
            verdicts.append((rho_ok, vn_ok))
        agree += verdicts[0] == verdicts[1]
    assert agree == 100


def test_classify_verdicts():
    good = classify(OperatorTriple.scalar(0.4, 0.35, 0.5), n_polys=5, n_points=500)
    assert good.verdict == "evidence-consistent"
    assert good.spectrum_in_closed_E and good.purity == "pure"
    bad = classify(OperatorTriple.scalar(0.7, 0.7, 0), n_polys=5, n_points=500)
    assert bad.verdict == "falsified"
    assert not bad.necessary_ok
    rep = classify(gen_e_unitary(2, 1), n_polys=3, n_points=300).to_json()
    assert rep["is_E_unitary"] and rep["is_E_isometry"] and rep["purity"] == "unitary"


def test_unitary_purity_with_evidence_implies_E_unitary():
    for seed in range(10):
        t = gen_e_unitary(3, seed)
        rep = classify(t, n_polys=3, n_points=300, seed=seed)
        assert rep.purity == "unitary" and rep.verdict == "evidence-consistent"
        assert rep.is_E_unitary
