"""Commuting operator triples and their classification.

E-contraction status cannot be decided numerically in general: the defining
inequality ranges over every polynomial. The checks here are one-sided.
A negative rho evaluation or a von Neumann violation *falsifies*; passing
everything is evidence, not proof.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg

from .errors import NotAContraction, ValidationError
from .geometry import (TetraPoint, boundary_heavy_samples, in_bE, in_closed_E,
                       refined_sup_estimate, sup_norm_estimate)
from .numkit import (DEFAULT_TOL, ToleranceProfile, adj, commutator,
                     hermitian_part, identity, op_norm, require_square,
                     spectral_radius)
from .polynomials import MonomialCache, Polynomial3

VN_REL_MARGIN = 5e-3
RHO_FALSIFY = 1e-6


@dataclass
class OperatorTriple:
    """Three commuting square matrices ``(A, B, P)`` on a common space.

    Commutativity is checked at construction (pass ``check=False`` for
    compressions that are not expected to commute).
    """

    A: np.ndarray
    B: np.ndarray
    P: np.ndarray
    tol: ToleranceProfile = DEFAULT_TOL
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        self.A = require_square(self.A, "A")
        self.B = require_square(self.B, "B")
        self.P = require_square(self.P, "P")
        dims = {self.A.shape[0], self.B.shape[0], self.P.shape[0]}
        if len(dims) != 1:
            raise ValidationError(f"A, B, P have different sizes {sorted(dims)}")
        if self.check:
            bound = self.commute_bound()
            for name, c in self.commutator_norms().items():
                if c > bound:
                    raise ValidationError(
                        f"({name[0]},{name[1]}) do not commute: ||[{name[0]},{name[1]}]|| = {c:.3g}",
                        pair=name, norm=c)

    @property
    def d(self) -> int:
        return self.A.shape[0]

    def __iter__(self):
        return iter((self.A, self.B, self.P))

    def commute_bound(self) -> float:
        return self.tol.eq_atol * max(1.0, *self.norms())

    def norms(self):
        return op_norm(self.A), op_norm(self.B), op_norm(self.P)

    def commutator_norms(self):
        A, B, P = self.A, self.B, self.P
        return {("A", "B"): op_norm(commutator(A, B)),
                ("A", "P"): op_norm(commutator(A, P)),
                ("B", "P"): op_norm(commutator(B, P))}

    def adjoint(self) -> "OperatorTriple":
        return OperatorTriple(adj(self.A), adj(self.B), adj(self.P), self.tol, check=self.check)

    def rotated(self, omega) -> "OperatorTriple":
        """``(omega A, omega B, omega^2 P)``."""
        return OperatorTriple(omega * self.A, omega * self.B, omega ** 2 * self.P,
                              self.tol, check=False)

    def conjugated(self, U) -> "OperatorTriple":
        """``(U A U*, U B U*, U P U*)``."""
        Uh = adj(U)
        return OperatorTriple(U @ self.A @ Uh, U @ self.B @ Uh, U @ self.P @ Uh,
                              self.tol, check=False)

    def restricted(self, basis) -> "OperatorTriple":
        Bh = adj(basis)
        return OperatorTriple(Bh @ self.A @ basis, Bh @ self.B @ basis,
                              Bh @ self.P @ basis, self.tol, check=False)

    @classmethod
    def scalar(cls, x1, x2, x3, tol=DEFAULT_TOL):
        return cls([[x1]], [[x2]], [[x3]], tol)

    @classmethod
    def diagonal(cls, points, tol=DEFAULT_TOL):
        arr = np.array([[p.x1, p.x2, p.x3] if isinstance(p, TetraPoint) else p
                        for p in points], complex).reshape(-1, 3)
        return cls(np.diag(arr[:, 0]), np.diag(arr[:, 1]), np.diag(arr[:, 2]), tol)


def _unitary_defects(P):
    I = identity(P.shape[0])
    return op_norm(adj(P) @ P - I), op_norm(P @ adj(P) - I)


def classify_E_unitary(t: OperatorTriple) -> bool:
    """``P`` unitary, ``||B|| <= 1`` and ``A = B* P``."""
    tol = t.tol
    iso, coiso = _unitary_defects(t.P)
    return (iso <= tol.eq_atol and coiso <= tol.eq_atol
            and op_norm(t.B) <= 1 + tol.contraction_slack
            and op_norm(t.A - adj(t.B) @ t.P) <= tol.eq_atol)


def classify_E_isometry(t: OperatorTriple) -> bool:
    """``P`` isometric, ``||B|| <= 1`` and ``A = B* P``.

    On a finite-dimensional space an isometry is unitary, so this agrees with
    :func:`classify_E_unitary`; proper E-isometries only show up as graded
    truncations (see :func:`tetrablock.models.interior_isometry_residuals`).
    """
    tol = t.tol
    iso, _ = _unitary_defects(t.P)
    return (iso <= tol.eq_atol
            and op_norm(t.B) <= 1 + tol.contraction_slack
            and op_norm(t.A - adj(t.B) @ t.P) <= tol.eq_atol)


def rho1(X1, X2, X3):
    I = identity(X1.shape[0])
    return hermitian_part((I - adj(X3) @ X3) + (adj(X1) @ X1 - adj(X2) @ X2)
                          - 2 * hermitian_part(X1 - adj(X2) @ X3))


def rho2(X1, X2, X3):
    return rho1(X2, X1, X3)


class RhoResult(NamedTuple):
    min_eig_rho1: float
    min_eig_rho2: float


def rho_sample_points(n_samples: int, rng: np.random.Generator):
    """Disc points for the ``(A, zB, zP)`` family and circle points for the rotation family."""
    special = np.array([0, 1, -1, 1j, -1j], complex)
    n_disc = max(n_samples, 0)
    disc = np.sqrt(rng.random(n_disc)) * np.exp(2j * np.pi * rng.random(n_disc))
    n_circ = max(64, n_samples)
    circle = np.exp(2j * np.pi * (np.arange(n_circ) + rng.random()) / n_circ)
    return np.concatenate([special, disc, circle]), np.concatenate([special[1:], circle])


def rho_check(t: OperatorTriple, n_samples: int = 64, seed: int = 0) -> RhoResult:
    """Minimum eigenvalues of ``rho_1, rho_2`` over sampled ``z`` and rotations.

    Two families are evaluated: ``rho_i(A, zB, zP)`` for ``z`` in the closed
    disc and ``rho_i(wA, wB, w^2 P)`` for unimodular ``w``. Both must be PSD
    for an E-contraction.
    """
    if t.d == 0:
        return RhoResult(np.inf, np.inf)
    zs, omegas = rho_sample_points(n_samples, np.random.default_rng(seed))
    A, B, P = t.A, t.B, t.P
    m1 = m2 = np.inf
    for z in zs:
        args = (A, z * B, z * P)
        m1 = min(m1, np.linalg.eigvalsh(rho1(*args))[0])
        m2 = min(m2, np.linalg.eigvalsh(rho2(*args))[0])
    for w in omegas:
        args = (w * A, w * B, w * w * P)
        m1 = min(m1, np.linalg.eigvalsh(rho1(*args))[0])
        m2 = min(m2, np.linalg.eigvalsh(rho2(*args))[0])
    return RhoResult(float(m1), float(m2))


def rho_tolerance(t: OperatorTriple) -> float:
    return t.tol.psd_slack * max(1.0, *t.norms()) ** 2


@dataclass
class Violation:
    poly: Polynomial3
    lhs: float
    sup_estimate: float

    def to_json(self):
        return {"poly": self.poly.to_json(), "lhs": self.lhs,
                "sup_estimate": self.sup_estimate}


def vn_falsifier(t: OperatorTriple, max_degree: int = 3, n_polys: int = 20,
                 n_points: int = 2000, seed: int = 0, polys=None,
                 rel_margin: float = VN_REL_MARGIN, refine: bool = True):
    """Search for a polynomial with ``||f(A,B,P)|| > sup |f|`` over the closed tetrablock.

    Parameters
    ----------
    t : OperatorTriple
    max_degree : int
        Largest total degree of the random polynomials (at most 8).
    n_polys : int
        Number of random polynomials; the three coordinate functions are
        always tried in addition, as is every polynomial in ``polys``.
    n_points : int
        Size of the boundary-heavy sample used for the sup estimate.
    seed : int
    rel_margin : float
        A violation is recorded when ``lhs > sup * (1 + rel_margin)``.
    refine : bool
        Polish the sampled sup by local search on the distinguished boundary.

    Returns
    -------
    list of Violation
        Empty means no evidence against E-contractivity was found. Any entry
        certifies that ``t`` is not an E-contraction, since the sup estimate
        is a lower bound.
    """
    if max_degree > 8:
        raise ValueError("max_degree must be <= 8")
    rng = np.random.default_rng(seed)
    candidates = [Polynomial3.monomial(1, 0, 0), Polynomial3.monomial(0, 1, 0),
                  Polynomial3.monomial(0, 0, 1)]
    candidates += list(polys or [])
    for _ in range(n_polys):
        deg = int(rng.integers(1, max_degree + 1)) if max_degree >= 1 else 0
        candidates.append(Polynomial3.random(deg, rng))
    samples = boundary_heavy_samples(n_points, rng)
    cache = MonomialCache(t.A, t.B, t.P)
    out = []
    for f in candidates:
        lhs = op_norm(f.of_matrices(t.A, t.B, t.P, cache)) if t.d else 0.0
        sup = sup_norm_estimate(f, samples)
        if lhs <= sup * (1 + rel_margin):
            continue
        if refine:
            sup = refined_sup_estimate(f, samples, rng)
        if lhs > sup * (1 + rel_margin):
            out.append(Violation(f, float(lhs), float(sup)))
    return out


def purity(P, tol: ToleranceProfile = DEFAULT_TOL) -> str:
    """One of ``'unitary'``, ``'pure'``, ``'cnu'``, ``'mixed'``.

    A pure contraction is also completely non-unitary; ``'pure'`` wins.
    """
    from .decomposition import unitary_subspace

    P = require_square(P, "P")
    iso, coiso = _unitary_defects(P)
    if iso <= tol.eq_atol and coiso <= tol.eq_atol:
        return "unitary"
    # raises NotAContraction for ||P|| > 1
    H1 = unitary_subspace(P, tol)
    if spectral_radius(P) < 1 - tol.rank_rtol:
        return "pure"
    return "cnu" if H1.shape[1] == 0 else "mixed"


def is_normal_triple(t: OperatorTriple) -> bool:
    bound = t.commute_bound()
    return all(op_norm(X @ adj(X) - adj(X) @ X) <= bound for X in t)


def joint_eigenvalues(t: OperatorTriple, seed: int = 0) -> Optional[list]:
    """Joint eigenvalues of a commuting normal triple, else None.

    A random real combination of the three matrices is unitarily
    diagonalised (complex Schur form of a normal matrix is diagonal) and each
    matrix is read off in that basis.
    """
    if not is_normal_triple(t):
        return None
    if t.d == 0:
        return []
    r = np.random.default_rng(seed).standard_normal(3)
    M = r[0] * t.A + r[1] * t.B + r[2] * t.P
    _, Q = scipy.linalg.schur(M, output="complex")
    diag = [np.diag(adj(Q) @ X @ Q) for X in t]
    return [TetraPoint(a, b, p) for a, b, p in zip(*diag)]


@dataclass
class ClassificationReport:
    is_E_unitary: bool
    is_E_isometry: bool
    necessary_ok: bool
    vn_violations: list
    rho_min_eigs: tuple
    norms: tuple
    purity: str
    joint_eigenvalues: Optional[list]
    spectrum_in_closed_E: Optional[bool]
    verdict: str
    notes: list = field(default_factory=list)

    def to_json(self):
        je = None
        if self.joint_eigenvalues is not None:
            je = [[[c.real, c.imag] for c in (p.x1, p.x2, p.x3)]
                  for p in self.joint_eigenvalues]
        return {
            "is_E_unitary": self.is_E_unitary,
            "is_E_isometry": self.is_E_isometry,
            "necessary_ok": self.necessary_ok,
            "vn_violations": [v.to_json() for v in self.vn_violations],
            "rho_min_eigs": list(self.rho_min_eigs),
            "norms": list(self.norms),
            "purity": self.purity,
            "joint_eigenvalues": je,
            "spectrum_in_closed_E": self.spectrum_in_closed_E,
            "verdict": self.verdict,
            "notes": list(self.notes),
        }


def classify(t: OperatorTriple, max_degree: int = 3, n_polys: int = 20,
             n_points: int = 2000, seed: int = 0, rho_samples: int = 64) -> ClassificationReport:
    """Run every check on ``t`` and fold them into a three-valued verdict.

    ``verdict`` is ``'falsified'`` when some check certifies that ``t`` is not
    an E-contraction, ``'evidence-consistent'`` when all checks pass, and
    ``'unknown'`` when the only failures are within roundoff of the
    threshold.
    """
    tol = t.tol
    notes = []
    rho = rho_check(t, rho_samples, seed)
    rho_min = min(rho)
    rho_ok = rho_min >= -rho_tolerance(t)
    violations = vn_falsifier(t, max_degree, n_polys, n_points, seed)
    norms = t.norms()
    try:
        pur = purity(t.P, tol)
    except NotAContraction as exc:
        pur = "not-a-contraction"
        notes.append(str(exc))
    je = joint_eigenvalues(t, seed)
    spec_ok = None
    if je is not None:
        spec_ok = all(in_closed_E(p, tol).member for p in je)
        if spec_ok and t.d and is_normal_triple(t):
            notes.append("normal triple: E-contraction iff joint spectrum lies in the closed tetrablock")
    is_u = classify_E_unitary(t)
    is_i = classify_E_isometry(t)
    if t.d and not is_u and is_i:
        notes.append("finite-dimensional isometries are unitary")
    if violations or rho_min < -RHO_FALSIFY or spec_ok is False:
        verdict = "falsified"
    elif not rho_ok:
        verdict = "unknown"
    else:
        verdict = "evidence-consistent"
    return ClassificationReport(is_u, is_i, rho_ok, violations, tuple(rho), norms,
                                pur, je, spec_ok, verdict, notes)


def bE_spectrum(t: OperatorTriple) -> Optional[bool]:
    je = joint_eigenvalues(t)
    if je is None:
        return None
    return all(in_bE(p, t.tol) for p in je)
