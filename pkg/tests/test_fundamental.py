import numpy as np
import pytest
from hypothesis import given, strategies as st

from tetrablock.fundamental import (CommutatorReport, FundamentalPair, adjoint_fundamentals,
                                    commutator_report, fundamental_operators)
from tetrablock.geometry import TetraPoint, sample_closed_E_array, solve_certificate
from tetrablock.harness import direct_sum_spec, gen_e_contraction, gen_e_unitary
from tetrablock.numkit import DEFAULT_TOL, adj, op_norm
from tetrablock.triples import OperatorTriple


def test_zero_P_gives_A_and_B():
    rng = np.random.default_rng(0)
    pts = sample_closed_E_array(3, rng)
    pts[:, 2] = 0
    t = OperatorTriple.diagonal(pts)
    fp = fundamental_operators(t)
    assert np.allclose(fp.embedded()[0], t.A) and np.allclose(fp.embedded()[1], t.B)
    fs = adjoint_fundamentals(t)
    assert np.allclose(fs.embedded()[0], adj(t.A))


def test_scalar_example():
    fp = fundamental_operators(OperatorTriple.scalar(0.4, 0.35, 0.5))
    assert fp.F1[0, 0] == pytest.approx(0.3, abs=1e-12)
    assert fp.F2[0, 0] == pytest.approx(0.2, abs=1e-12)
    fs = adjoint_fundamentals(OperatorTriple.scalar(0.4, 0.35, 0.5))
    assert fs.F1[0, 0] == pytest.approx(0.3, abs=1e-12)


def test_unitary_P_gives_empty_pair():
    t = gen_e_unitary(3, 2)
    fp = fundamental_operators(t)
    assert fp.F1.shape == (0, 0) and fp.defect_dim == 0
    assert max(fp.residual1, fp.residual2) < 1e-10
    assert adjoint_fundamentals(t).defect_dim == 0


@given(seed=st.integers(0, 10**5))
def test_reconstruction_on_generated(seed):
    t, _ = gen_e_contraction(direct_sum_spec(seed, 10))
    fp = fundamental_operators(t)
    assert max(fp.residual1, fp.residual2) <= 10 * DEFAULT_TOL.eq_atol
    assert op_norm(fp.F1) <= 1 + 1e-8 and op_norm(fp.F2) <= 1 + 1e-8


@given(seed=st.integers(0, 10**5))
def test_uniqueness_under_perturbation(seed):
    rng = np.random.default_rng(seed)
    t, _ = gen_e_contraction(direct_sum_spec(seed, 8))
    fp = fundamental_operators(t)
    k = fp.defect_dim
    H = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    H /= op_norm(H)
    DE = fp.D @ fp.basis
    X1 = t.A - adj(t.B) @ t.P
    res = op_norm(DE @ (fp.F1 + H) @ adj(DE) - X1)
    sigma_min = np.linalg.svd(adj(fp.basis) @ fp.D @ fp.basis, compute_uv=False).min()
    assert res > DEFAULT_TOL.eq_atol * sigma_min**2


@given(x=st.lists(st.floats(-0.6, 0.6), min_size=6, max_size=6))
def test_scalar_coherence_with_certificate(x):
    p = TetraPoint.from_reals(x)
    if abs(p.x3) >= 0.99:
        return
    fp = fundamental_operators(OperatorTriple.scalar(p.x1, p.x2, p.x3))
    c = solve_certificate(p)
    assert abs(fp.F1[0, 0] - c.c1) <= 1e-10 * max(1, abs(c.c1))
    assert abs(fp.F2[0, 0] - c.c2) <= 1e-10 * max(1, abs(c.c2))


def test_borderline_defect_raises():
    from tetrablock.errors import DegenerateDefect
    with pytest.raises(DegenerateDefect):
        fundamental_operators(OperatorTriple.scalar(0, 0, np.sqrt(1 - 3e-10)))


def test_commutator_report_examples():
    z = np.zeros((0, 0))
    scalar = FundamentalPair(np.array([[0.3]]), np.array([[0.2j]]), 0, 0, 1, None, None)
    assert commutator_report(scalar).holds(0.0)
    diag = FundamentalPair(np.diag([0.1, 0.2j]), np.diag([0.3, -0.1]), 0, 0, 2, None, None)
    assert commutator_report(diag) == CommutatorReport(0.0, 0.0)
    nil = FundamentalPair(np.array([[0, 1], [0, 0]], complex), np.eye(2, dtype=complex),
                          0, 0, 2, None, None)
    r = commutator_report(nil)
    assert r.comm_12 == 0.0 and r.self_comm_gap == pytest.approx(1.0)
    assert commutator_report(FundamentalPair(z, z, 0, 0, 0, None, None)).holds(0.0)
