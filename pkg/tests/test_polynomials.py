import numpy as np
import pytest
from hypothesis import given, strategies as st

from tetrablock.polynomials import MAX_DEGREE, MonomialCache, Polynomial3, exponents_upto


def naive(poly, x1, x2, x3):
    return sum(c * x1**i * x2**j * x3**k for (i, j, k), c in poly.coeffs.items())


@given(seed=st.integers(0, 10**6), deg=st.integers(0, 6))
def test_horner_matches_naive(seed, deg):
    rng = np.random.default_rng(seed)
    f = Polynomial3.random(deg, rng)
    x = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
    assert np.allclose(f(*x), naive(f, *x), rtol=1e-10, atol=1e-10)


def test_matrix_evaluation_on_diagonal_matches_pointwise(rng):
    f = Polynomial3.random(4, rng)
    pts = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    A, B, P = (np.diag(p) for p in pts)
    assert np.allclose(np.diag(f.of_matrices(A, B, P)), f(*pts))


def test_monomial_cache_reuses_products(rng):
    A = np.diag([0.5, 0.2]).astype(complex)
    cache = MonomialCache(A, A, A)
    M = cache.get(2, 1, 0)
    assert np.allclose(M, np.diag([0.5**3, 0.2**3]))
    assert cache.get(2, 1, 0) is M


def test_degree_limits_and_json_round_trip(rng):
    with pytest.raises(ValueError):
        Polynomial3.monomial(MAX_DEGREE + 1, 0, 0)
    f = Polynomial3.random(3, rng)
    g = Polynomial3.from_json(f.to_json())
    assert g.coeffs == f.coeffs
    assert len(exponents_upto(3)) == 20
    assert Polynomial3.constant(2.0)(0, 0, 0) == 2.0
