"""Canonical (unitary / completely non-unitary) decomposition and Wold splitting."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NotIsometricInterior
from .numkit import (DEFAULT_TOL, ToleranceProfile, adj, complement_basis,
                     defect_operator, identity, kernel_intersection, op_norm,
                     orthonormality_defect, require_square, spectral_radius)
from .triples import (OperatorTriple, classify_E_unitary, rho_check,
                      rho_tolerance)


def unitary_subspace(P, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the largest reducing subspace on which ``P`` is unitary.

    That subspace is the intersection over ``n >= 0`` of the kernels of
    ``D_P P^n`` and ``D_{P*} P*^n``; by Cayley-Hamilton ``n < d`` suffices.
    Kernel decisions use an absolute floor of ``rank_rtol`` so that powers
    which have decayed to roundoff do not register as nonzero.
    """
    P = require_square(P, "P")
    d = P.shape[0]
    if d == 0:
        return np.zeros((0, 0), complex)
    DP, _ = defect_operator(P, tol)
    DPs, _ = defect_operator(adj(P), tol)
    Q = identity(d)
    Pn = identity(d)
    Psn = identity(d)
    for _ in range(d):
        Q = Q @ kernel_intersection([DP @ Pn @ Q, DPs @ Psn @ Q], tol, scale=1.0)
        if Q.shape[1] == 0:
            break
        Pn = Pn @ P
        Psn = Psn @ adj(P)
    return Q


@dataclass
class DecompositionResult:
    H1_basis: np.ndarray
    H2_basis: np.ndarray
    unitary_part: OperatorTriple
    cnu_part: OperatorTriple
    offdiag_residuals: dict
    block_identity_residuals: dict
    unitary_check: bool
    cnu_check: bool

    @property
    def k1(self):
        return self.H1_basis.shape[1]

    @property
    def k2(self):
        return self.H2_basis.shape[1]

    def max_offdiag(self, names="ABP"):
        return max((v for (n, _), v in self.offdiag_residuals.items() if n in names),
                   default=0.0)

    def to_json(self):
        from .io import matrix_to_json, triple_to_json
        return {
            "k1": self.k1, "k2": self.k2,
            "H1_basis": matrix_to_json(self.H1_basis),
            "H2_basis": matrix_to_json(self.H2_basis),
            "unitary_part": triple_to_json(self.unitary_part),
            "cnu_part": triple_to_json(self.cnu_part),
            "offdiag_residuals": {f"{n}_{side}": v
                                  for (n, side), v in self.offdiag_residuals.items()},
            "block_identity_residuals": dict(self.block_identity_residuals),
            "unitary_check": self.unitary_check,
            "cnu_check": self.cnu_check,
        }


def canonical_decompose(t: OperatorTriple, check_rho: bool = True) -> DecompositionResult:
    """Split the space into the unitary part of ``P`` and its complement.

    Whether ``A`` and ``B`` are reduced by the split is measured, not
    assumed: ``offdiag_residuals`` holds ``||H1* X H2||`` (key ``(X, '12')``)
    and ``||H2* X H1||`` (key ``(X, '21')``) for ``X`` in ``A, B, P``.
    """
    tol = t.tol
    if check_rho:
        r = rho_check(t, n_samples=16)
        if min(r) < -rho_tolerance(t):
            warnings.warn("input fails the rho positivity test; it is not an E-contraction",
                          RuntimeWarning, stacklevel=2)
    H1 = unitary_subspace(t.P, tol)
    H2 = complement_basis(H1, t.d)
    off = {}
    for name, X in zip("ABP", t):
        off[(name, "12")] = op_norm(adj(H1) @ X @ H2) if H1.size and H2.size else 0.0
        off[(name, "21")] = op_norm(adj(H2) @ X @ H1) if H1.size and H2.size else 0.0
    up = t.restricted(H1)
    cp = t.restricted(H2)
    A11, B11, P1 = up.A, up.B, up.P
    blocks = {"A11-B11*P1": op_norm(A11 - adj(B11) @ P1),
              "B11-A11*P1": op_norm(B11 - adj(A11) @ P1)}
    unitary_ok = classify_E_unitary(up)
    cnu_ok = unitary_subspace(cp.P, tol).shape[1] == 0 if cp.d else True
    return DecompositionResult(H1, H2, up, cp, off, blocks, unitary_ok, cnu_ok)


@dataclass
class WoldSplit:
    unitary_basis: np.ndarray
    shift_basis: np.ndarray
    unitary_residual: float  # max deviation of classify_E_unitary identities on the unitary part
    reducing_residual: float
    shift_spectral_radius: float
    near_degenerate: bool

    @property
    def dims(self):
        return self.unitary_basis.shape[1], self.shift_basis.shape[1]

    def to_json(self):
        return {"unitary_dim": self.dims[0], "shift_dim": self.dims[1],
                "unitary_residual": self.unitary_residual,
                "reducing_residual": self.reducing_residual,
                "shift_spectral_radius": self.shift_spectral_radius,
                "near_degenerate": self.near_degenerate}


def wold_split(V, degeneracy: float = 1e-6) -> WoldSplit:
    """Split a (truncated) E-isometry into its unitary part and its shift part.

    ``V`` is a :class:`tetrablock.models.GradedTriple`. The third operator
    must be isometric on every level except the last one. The unitary part
    is the largest reducing subspace on which the truncated ``V3`` is
    unitary; the truncation edge automatically excludes shift directions,
    because they eventually reach the last level where ``V3`` is not
    isometric.
    """
    tol = V.tol
    T1, T2, T3 = V.T1, V.T2, V.T3
    iota = V.interior_inclusion()
    iso_err = op_norm((adj(T3) @ T3 - identity(T3.shape[0])) @ iota)
    if iso_err > 10 * tol.eq_atol:
        raise NotIsometricInterior(
            f"V3 fails to be isometric on interior levels by {iso_err:.3g}")
    Hu = unitary_subspace(T3, tol)
    Hs = complement_basis(Hu, T3.shape[0])
    u_res = 0.0
    red = 0.0
    if Hu.shape[1]:
        A, B, P = (adj(Hu) @ X @ Hu for X in (T1, T2, T3))
        I = identity(Hu.shape[1])
        u_res = max(op_norm(adj(P) @ P - I), op_norm(P @ adj(P) - I),
                    op_norm(A - adj(B) @ P), max(0.0, op_norm(B) - 1))
        if Hs.shape[1]:
            red = max(max(op_norm(adj(Hs) @ X @ Hu), op_norm(adj(Hu) @ X @ Hs))
                      for X in (T1, T2, T3))
    rad = spectral_radius(adj(Hs) @ T3 @ Hs) if Hs.shape[1] else 0.0
    return WoldSplit(Hu, Hs, u_res, red, rad, rad > 1 - degeneracy)


def projector(basis: np.ndarray) -> np.ndarray:
    return basis @ adj(basis)


def projector_commutators(t: OperatorTriple, basis: np.ndarray):
    Q = projector(basis)
    return {name: op_norm(Q @ X - X @ Q) for name, X in zip("ABP", t)}


def bases_orthogonal(result: DecompositionResult) -> float:
    return max(op_norm(adj(result.H1_basis) @ result.H2_basis),
               orthonormality_defect(result.H1_basis),
               orthonormality_defect(result.H2_basis))
