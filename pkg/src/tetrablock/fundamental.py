"""Fundamental operators of a tetrablock contraction.

For an E-contraction ``(A, B, P)`` there are unique ``F1, F2`` on the defect
space of ``P`` with ``A - B*P = D F1 D`` and ``B - A*P = D F2 D``. They are
solved for in coordinates of an orthonormal basis ``E`` of that space, where
``D`` restricts to the invertible diagonal ``E* D E``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDefect
from .numkit import adj, commutator, defect_decomposition, op_norm
from .triples import OperatorTriple


@dataclass
class FundamentalPair:
    F1: np.ndarray
    F2: np.ndarray
    residual1: float
    residual2: float
    defect_dim: int
    basis: np.ndarray  # d x k, orthonormal basis of the defect space
    D: np.ndarray  # ambient defect operator

    def embedded(self):
        """``(E F1 E*, E F2 E*)`` as operators on the ambient space."""
        E = self.basis
        return E @ self.F1 @ adj(E), E @ self.F2 @ adj(E)

    def to_json(self):
        from .io import matrix_to_json
        return {"F1": matrix_to_json(self.F1), "F2": matrix_to_json(self.F2),
                "residuals": [self.residual1, self.residual2],
                "defect_dim": self.defect_dim}


@dataclass
class CommutatorReport:
    comm_12: float
    self_comm_gap: float

    def holds(self, atol: float) -> bool:
        return self.comm_12 <= atol and self.self_comm_gap <= atol

    def to_json(self):
        return {"comm_12": self.comm_12, "self_comm_gap": self.self_comm_gap}


def fundamental_operators(t: OperatorTriple) -> FundamentalPair:
    tol = t.tol
    D, E, s = defect_decomposition(t.P, tol)
    k = E.shape[1]
    X1 = t.A - adj(t.B) @ t.P
    X2 = t.B - adj(t.A) @ t.P
    if k == 0:
        z = np.zeros((0, 0), complex)
        return FundamentalPair(z, z.copy(), op_norm(X1), op_norm(X2), 0, E, D)
    # E* D E = diag(s) by construction of the basis. Eigenvalues s^2 of I - P*P
    # within a decade of the clamp make the solve divide by roundoff.
    if s.min() <= tol.rank_rtol * s.max() or s.min() ** 2 < 10 * tol.psd_slack:
        raise DegenerateDefect(
            f"defect restriction has eigenvalue {s.min():.3g}; I - P*P eigenvalue "
            f"{s.min() ** 2:.3g} is within a decade of the psd_slack clamp")
    inv = 1.0 / s
    F1 = inv[:, None] * (adj(E) @ X1 @ E) * inv[None, :]
    F2 = inv[:, None] * (adj(E) @ X2 @ E) * inv[None, :]
    DE = D @ E
    r1 = op_norm(DE @ F1 @ adj(DE) - X1)
    r2 = op_norm(DE @ F2 @ adj(DE) - X2)
    return FundamentalPair(F1, F2, r1, r2, k, E, D)


def adjoint_fundamentals(t: OperatorTriple) -> FundamentalPair:
    """Fundamental operators of ``(A*, B*, P*)``, in coordinates of the defect space of ``P*``."""
    return fundamental_operators(t.adjoint())


def commutator_report(fp: FundamentalPair) -> CommutatorReport:
    F1, F2 = fp.F1, fp.F2
    if F1.size == 0:
        return CommutatorReport(0.0, 0.0)
    self1 = commutator(adj(F1), F1)
    self2 = commutator(adj(F2), F2)
    return CommutatorReport(op_norm(commutator(F1, F2)), op_norm(self1 - self2))
