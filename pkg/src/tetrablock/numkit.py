"""Dense complex linear algebra shared by the rest of the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Zero-sized
arrays (shape ``(0, 0)`` or ``(d, 0)``) are legal everywhere and stand for
operators on, or bases of, the trivial space.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import DimensionMismatch, NonSquare, NotAContraction


@dataclass(frozen=True)
class ToleranceProfile:
    """Numerical tolerances used for every equality, sign and rank decision."""

    eq_atol: float = 1e-10
    psd_slack: float = 1e-10
    rank_rtol: float = 1e-10
    contraction_slack: float = 1e-10

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"tolerance {name} must be positive, got {value!r}")

    def with_(self, **changes) -> "ToleranceProfile":
        return replace(self, **changes)

    @classmethod
    def uniform(cls, value: float) -> "ToleranceProfile":
        return cls(value, value, value, value)


DEFAULT_TOL = ToleranceProfile()


def as_cmatrix(M, name="matrix") -> np.ndarray:
    """Coerce to a 2-D complex128 array and reject NaN/Inf entries."""
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def require_square(M, name="matrix") -> np.ndarray:
    M = as_cmatrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise NonSquare(f"{name} must be square, got shape {M.shape}")
    return M


def adj(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def hermitian_part(M: np.ndarray) -> np.ndarray:
    """Re M = (M + M*)/2."""
    return (M + M.conj().T) / 2


def commutator(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


def op_norm(M) -> float:
    """Largest singular value; 0 for empty matrices."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def spectral_radius(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def identity(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128)


def defect_operator(P, tol: ToleranceProfile = DEFAULT_TOL):
    """Defect operator ``D = (I - P*P)^{1/2}`` and an orthonormal basis of its range.

    The square root is taken through a Hermitian eigendecomposition of
    ``I - P*P``. Eigenvalues in ``(-psd_slack, psd_slack)`` are treated as
    zero; a more negative eigenvalue means ``P`` is not a contraction.

    Parameters
    ----------
    P : array_like
        Square complex matrix with ``||P|| <= 1 + contraction_slack``.
    tol : ToleranceProfile

    Returns
    -------
    D : ndarray
        Hermitian PSD matrix, ``D @ D ~= I - P* P``.
    basis : ndarray
        ``d x k`` matrix with orthonormal columns spanning ``Ran D``.
        ``D == basis @ diag(s) @ basis*`` exactly, with ``s`` the retained
        square-root eigenvalues, so ``basis* D basis`` is diagonal and
        invertible.
    """
    D, basis, _ = defect_decomposition(P, tol)
    return D, basis


def defect_decomposition(P, tol: ToleranceProfile = DEFAULT_TOL):
    """Like :func:`defect_operator` but also returns the retained singular values."""
    P = require_square(P, "P")
    d = P.shape[0]
    if d == 0:
        return np.zeros((0, 0), complex), np.zeros((0, 0), complex), np.zeros(0)
    norm = op_norm(P)
    if norm > 1 + tol.contraction_slack:
        raise NotAContraction(f"||P|| = {norm:.17g} exceeds 1 by {norm - 1:.3g}")
    M = hermitian_part(identity(d) - adj(P) @ P)
    w, V = np.linalg.eigh(M)
    if w[0] < -tol.psd_slack:
        raise NotAContraction(f"I - P*P has eigenvalue {w[0]:.3g} < 0")
    w = np.where(w < tol.psd_slack, 0.0, w)
    s = np.sqrt(w)
    smax = s.max() if s.size else 0.0
    keep = s > tol.rank_rtol * smax if smax > 0 else np.zeros(d, bool)
    basis = V[:, keep]
    s = s[keep]
    D = (basis * s) @ adj(basis)
    return D, basis, s


def psd_sqrt(M: np.ndarray, tol: ToleranceProfile = DEFAULT_TOL) -> np.ndarray:
    w, V = np.linalg.eigh(hermitian_part(M))
    if w.size and w[0] < -tol.psd_slack * max(1.0, abs(w[-1])):
        raise ValueError(f"matrix is not PSD (eigenvalue {w[0]:.3g})")
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ adj(V)


def kernel_basis(M: np.ndarray, tol: ToleranceProfile = DEFAULT_TOL,
                 scale: float = 0.0) -> np.ndarray:
    return kernel_intersection([M], tol, scale=scale)


def kernel_intersection(Ms, tol: ToleranceProfile = DEFAULT_TOL,
                        scale: float = 0.0) -> np.ndarray:
    """Orthonormal basis of the common kernel of ``Ms``.

    Kernels are intersected one matrix at a time: each new matrix is
    restricted to the current basis and its numerically null right singular
    vectors are kept. The null cutoff for ``M`` is
    ``rank_rtol * max(||M||, scale)``; ``scale`` provides an absolute floor for
    callers whose matrices can underflow to roundoff noise.
    """
    Ms = [as_cmatrix(M) for M in Ms]
    if not Ms:
        raise DimensionMismatch("kernel_intersection needs at least one matrix")
    d = Ms[0].shape[1]
    for M in Ms:
        if M.shape[1] != d:
            raise DimensionMismatch(
                f"column counts differ: {M.shape[1]} vs {d}")
    Q = identity(d)
    for M in Ms:
        if Q.shape[1] == 0:
            break
        cutoff = tol.rank_rtol * max(op_norm(M), scale)
        R = M @ Q
        if R.shape[0] == 0:
            continue
        _, s, Vh = np.linalg.svd(R, full_matrices=True)
        s_full = np.zeros(Q.shape[1])
        s_full[: s.size] = s
        null = s_full <= cutoff
        Q = Q @ adj(Vh)[:, null]
        # re-orthonormalise to stop drift across long chains
        if Q.shape[1]:
            Q, _ = np.linalg.qr(Q)
    return Q


def range_basis(M: np.ndarray, tol: ToleranceProfile = DEFAULT_TOL,
                scale: float = 0.0) -> np.ndarray:
    M = as_cmatrix(M)
    if M.size == 0:
        return np.zeros((M.shape[0], 0), complex)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    cutoff = tol.rank_rtol * max(s[0] if s.size else 0.0, scale)
    return U[:, s > cutoff]


def complement_basis(Q: np.ndarray, d: int | None = None) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span(Q)``."""
    Q = np.asarray(Q, dtype=np.complex128)
    if d is None:
        d = Q.shape[0]
    k = Q.shape[1] if Q.ndim == 2 else 0
    if k == 0:
        return identity(d)
    U, _, _ = np.linalg.svd(Q, full_matrices=True)
    return U[:, k:]


def restrict(X: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Compression ``basis* X basis``."""
    return adj(basis) @ X @ basis


def orthonormality_defect(Q: np.ndarray) -> float:
    k = Q.shape[1]
    return op_norm(adj(Q) @ Q - identity(k))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases


def block_diag(*blocks) -> np.ndarray:
    blocks = [as_cmatrix(b) for b in blocks]
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=np.complex128)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out
