"""Polynomials in three complex variables.

A :class:`Polynomial3` is a sparse map from exponent triples ``(i, j, k)`` to
complex coefficients. It can be evaluated at points (vectorised, nested
Horner in ``x3``, then ``x2``, then ``x1``) and at commuting matrix triples
(functional calculus with memoised monomials).
"""
from __future__ import annotations

import itertools

import numpy as np

MAX_DEGREE = 16


class Polynomial3:
    def __init__(self, coeffs=None):
        clean = {}
        for exps, c in dict(coeffs or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != 3 or min(exps) < 0:
                raise ValueError(f"bad exponent triple {exps!r}")
            if c != 0:
                clean[exps] = complex(c)
        self.coeffs = clean
        if self.degree > MAX_DEGREE:
            raise ValueError(f"total degree {self.degree} exceeds {MAX_DEGREE}")

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.coeffs), default=0)

    @classmethod
    def monomial(cls, i, j, k, coeff=1.0):
        return cls({(i, j, k): coeff})

    @classmethod
    def constant(cls, c=1.0):
        return cls({(0, 0, 0): c})

    @classmethod
    def random(cls, max_degree: int, rng: np.random.Generator):
        """Complex Gaussian coefficients on every monomial of total degree <= max_degree."""
        exps = exponents_upto(max_degree)
        c = rng.standard_normal(len(exps)) + 1j * rng.standard_normal(len(exps))
        return cls(dict(zip(exps, c)))

    def __call__(self, x1, x2, x3):
        x1, x2, x3 = np.broadcast_arrays(np.asarray(x1, complex),
                                         np.asarray(x2, complex),
                                         np.asarray(x3, complex))
        if not self.coeffs:
            return np.zeros(x1.shape, complex)
        n1 = 1 + max(e[0] for e in self.coeffs)
        n2 = 1 + max(e[1] for e in self.coeffs)
        n3 = 1 + max(e[2] for e in self.coeffs)
        C = np.zeros((n1, n2, n3), complex)
        for (i, j, k), c in self.coeffs.items():
            C[i, j, k] = c
        C = C.reshape((n1, n2, n3) + (1,) * x1.ndim)
        r = C[:, :, -1]
        for k in range(n3 - 2, -1, -1):
            r = r * x3 + C[:, :, k]
        s = r[:, -1]
        for j in range(n2 - 2, -1, -1):
            s = s * x2 + r[:, j]
        t = s[-1]
        for i in range(n1 - 2, -1, -1):
            t = t * x1 + s[i]
        return np.broadcast_to(t, x1.shape).copy()

    def of_matrices(self, A, B, P, cache=None) -> np.ndarray:
        """``f(A, B, P)`` for commuting square matrices.

        ``cache`` may be a :class:`MonomialCache` shared across many
        polynomials on the same triple.
        """
        if cache is None:
            cache = MonomialCache(A, B, P)
        out = np.zeros((cache.d, cache.d), complex)
        for exps, c in self.coeffs.items():
            out += c * cache.get(*exps)
        return out

    def conj(self) -> "Polynomial3":
        """Polynomial with conjugated coefficients, so ``p.conj()(conj x) == conj(p(x))``."""
        return Polynomial3({e: np.conj(c) for e, c in self.coeffs.items()})

    def to_json(self):
        return [[list(e), [c.real, c.imag]] for e, c in sorted(self.coeffs.items())]

    @classmethod
    def from_json(cls, data):
        return cls({tuple(e): complex(re, im) for e, (re, im) in data})

    def __repr__(self):
        terms = " + ".join(f"({c:.3g})x1^{i}x2^{j}x3^{k}"
                           for (i, j, k), c in sorted(self.coeffs.items()))
        return f"Polynomial3({terms or '0'})"


def exponents_upto(max_degree: int):
    return [e for e in itertools.product(range(max_degree + 1), repeat=3)
            if sum(e) <= max_degree]


class MonomialCache:
    """Memoised ``A^i B^j P^k`` products for one commuting triple."""

    def __init__(self, A, B, P):
        self.A, self.B, self.P = (np.asarray(X, complex) for X in (A, B, P))
        self.d = self.A.shape[0]
        self._powers = {0: [np.eye(self.d, dtype=complex)],
                        1: [np.eye(self.d, dtype=complex)],
                        2: [np.eye(self.d, dtype=complex)]}
        self._mono = {}

    def _power(self, which, n):
        base = (self.A, self.B, self.P)[which]
        pw = self._powers[which]
        while len(pw) <= n:
            pw.append(pw[-1] @ base)
        return pw[n]

    def get(self, i, j, k):
        key = (i, j, k)
        if key not in self._mono:
            self._mono[key] = self._power(0, i) @ self._power(1, j) @ self._power(2, k)
        return self._mono[key]
