"""Points of the tetrablock: membership tests, certificates, sampling.

A point ``x = (x1, x2, x3)`` lies in the closed tetrablock iff ``|x3| <= 1``
and ``x1 = c1 + conj(c2) x3``, ``x2 = c2 + conj(c1) x3`` for some ``c1, c2``
with ``|c1| + |c2| <= 1``. Away from ``|x3| = 1`` the pair ``(c1, c2)`` is
unique and is returned as a :class:`Certificate`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BoundaryModulus, NotUnimodular
from .numkit import DEFAULT_TOL, ToleranceProfile
from .polynomials import Polynomial3

BAND = 1e-3


@dataclass(frozen=True)
class TetraPoint:
    x1: complex
    x2: complex
    x3: complex

    def __post_init__(self):
        for name in ("x1", "x2", "x3"):
            v = complex(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"{name} is not finite")
            object.__setattr__(self, name, v)

    @classmethod
    def from_certificate(cls, c1, c2, x3):
        c1, c2, x3 = complex(c1), complex(c2), complex(x3)
        return cls(c1 + c2.conjugate() * x3, c2 + c1.conjugate() * x3, x3)

    @classmethod
    def from_reals(cls, values):
        """Six reals, real and imaginary parts interleaved."""
        v = [float(t) for t in values]
        if len(v) != 6:
            raise ValueError(f"expected 6 reals, got {len(v)}")
        return cls(complex(v[0], v[1]), complex(v[2], v[3]), complex(v[4], v[5]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3])

    def conj(self) -> "TetraPoint":
        return TetraPoint(self.x1.conjugate(), self.x2.conjugate(), self.x3.conjugate())


@dataclass(frozen=True)
class Certificate:
    c1: complex
    c2: complex
    slack: float
    x3_modulus: float

    def reconstructs(self, p: TetraPoint, atol: float = DEFAULT_TOL.eq_atol) -> bool:
        q = TetraPoint.from_certificate(self.c1, self.c2, p.x3)
        return abs(q.x1 - p.x1) <= atol and abs(q.x2 - p.x2) <= atol


@dataclass(frozen=True)
class Membership:
    """Answer of :func:`in_closed_E`.

    ``margin`` is the signed distance-like quantity the decision was made
    on: ``min(slack, 1 - |x3|)`` when ``|x3| < 1``, ``1 - |x3|`` when
    ``|x3| > 1`` and at most ``0`` on the ``|x3| = 1`` shell. ``indeterminate`` flags answers whose
    margin is inside the boundary band.
    """

    member: bool
    certificate: Optional[Certificate]
    margin: float
    indeterminate: bool
    branch: str
    witness: Optional[float] = None

    def __bool__(self):
        return self.member


def solve_certificate(p: TetraPoint, tol: ToleranceProfile = DEFAULT_TOL) -> Certificate:
    """Unique ``(c1, c2)`` with ``x1 = c1 + conj(c2) x3`` and ``x2 = c2 + conj(c1) x3``.

    No membership judgement: the slack may be negative.
    """
    x1, x2, x3 = p.x1, p.x2, p.x3
    r = abs(x3)
    if r >= 1 - tol.rank_rtol:
        raise BoundaryModulus(f"|x3| = {r:.17g} is too close to (or beyond) 1")
    det = 1 - r * r
    c1 = (x1 - x2.conjugate() * x3) / det
    c2 = (x2 - x1.conjugate() * x3) / det
    return Certificate(c1, c2, 1 - abs(c1) - abs(c2), r)


def in_bE(p: TetraPoint, tol: ToleranceProfile = DEFAULT_TOL) -> bool:
    a = tol.eq_atol
    return (abs(abs(p.x3) - 1) <= a and abs(p.x2) <= 1 + a
            and abs(p.x1 - p.x2.conjugate() * p.x3) <= a)


def in_closed_E(p: TetraPoint, tol: ToleranceProfile = DEFAULT_TOL,
                band: float = BAND) -> Membership:
    r = abs(p.x3)
    if r < 1 - tol.rank_rtol:
        cert = solve_certificate(p, tol)
        m = min(cert.slack, 1 - r)
        return Membership(cert.slack >= -tol.eq_atol, cert, m, abs(m) <= band, "certificate")
    if r <= 1 + tol.eq_atol:
        resid = abs(p.x1 - p.x2.conjugate() * p.x3)
        member = resid <= tol.eq_atol and abs(p.x2) <= 1 + tol.eq_atol
        m = -max(resid, abs(p.x2) - 1, 0.0)
        return Membership(member, None, m, abs(m) <= band, "boundary", witness=resid)
    m = 1 - r
    return Membership(False, None, m, abs(m) <= band, "outside")


def bidisc_zero_oracle(p: TetraPoint, grid_n: int = 128):
    """Brute-force search for zeros of ``1 - z x1 - w x2 + z w x3`` on the closed bidisc.

    ``z`` runs over a polar grid (``grid_n`` radii including 0 and 1, times
    ``grid_n`` angles). For each ``z`` the function is affine in ``w``, so the
    best ``w`` is the exact root projected onto the closed disc.

    Returns
    -------
    min_modulus : float
    argmin : tuple of complex
        The ``(z, w)`` attaining it.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be >= 2")
    radii = np.linspace(0.0, 1.0, grid_n)
    angles = np.linspace(0.0, 2 * np.pi, grid_n, endpoint=False)
    z = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    return _min_over_w(p, z)


def _min_over_w(p: TetraPoint, z: np.ndarray):
    a = 1 - z * p.x1
    b = z * p.x3 - p.x2
    absb = np.abs(b)
    safe = absb > 1e-300
    w = np.zeros_like(z)
    w[safe] = -a[safe] / b[safe]
    mod_w = np.abs(w)
    outside = mod_w > 1
    w[outside] = w[outside] / mod_w[outside]
    vals = np.abs(a + w * b)
    i = int(np.argmin(vals))
    return float(vals[i]), (complex(z[i]), complex(w[i]))


def in_open_E(p: TetraPoint, tol: ToleranceProfile = DEFAULT_TOL,
              oracle_grid: Optional[int] = 128) -> bool:
    """Open-tetrablock membership.

    Requires ``|x3| < 1 - t``, certificate slack ``> t`` and, unless
    ``oracle_grid`` is None, an oracle minimum modulus ``> t`` with
    ``t = eq_atol``. The oracle has the last word.
    """
    t = tol.eq_atol
    if not abs(p.x3) < 1 - max(t, tol.rank_rtol):
        return False
    if solve_certificate(p, tol).slack <= t:
        return False
    if oracle_grid is None:
        return True
    return bidisc_zero_oracle(p, oracle_grid)[0] > t


def rotate(p: TetraPoint, omega: complex, tol: ToleranceProfile = DEFAULT_TOL) -> TetraPoint:
    omega = complex(omega)
    if abs(abs(omega) - 1) > tol.eq_atol:
        raise NotUnimodular(f"|omega| = {abs(omega):.17g}")
    return TetraPoint(omega * p.x1, omega * p.x2, omega * omega * p.x3)


def _uniform_disc(n, rng):
    return np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))


def _uniform_l1_ball(n, rng):
    """(c1, c2) uniform on {|c1| + |c2| <= 1} by rejection from the bidisc."""
    out1, out2 = [], []
    have = 0
    while have < n:
        m = max(16, 7 * (n - have))
        c1, c2 = _uniform_disc(m, rng), _uniform_disc(m, rng)
        ok = np.abs(c1) + np.abs(c2) <= 1
        out1.append(c1[ok])
        out2.append(c2[ok])
        have += int(ok.sum())
    return np.concatenate(out1)[:n], np.concatenate(out2)[:n]


def sample_closed_E_array(count: int, rng: np.random.Generator,
                          boundary: bool = False) -> np.ndarray:
    """``(count, 3)`` complex array of points of the closed tetrablock.

    With ``boundary=True`` the certificate is drawn on ``|c1| + |c2| = 1``
    and ``|x3| = 1``, which puts every point on the distinguished boundary.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if boundary:
        t = rng.random(count)
        c1 = t * np.exp(2j * np.pi * rng.random(count))
        c2 = (1 - t) * np.exp(2j * np.pi * rng.random(count))
        x3 = np.exp(2j * np.pi * rng.random(count))
    else:
        c1, c2 = _uniform_l1_ball(count, rng)
        x3 = _uniform_disc(count, rng)
    x1 = c1 + np.conj(c2) * x3
    x2 = c2 + np.conj(c1) * x3
    return np.stack([x1, x2, x3], axis=1)


def sample_closed_E(count: int, seed: int, boundary: bool = False) -> list:
    arr = sample_closed_E_array(count, np.random.default_rng(seed), boundary)
    return [TetraPoint(*row) for row in arr]


def boundary_heavy_samples(count: int, rng: np.random.Generator,
                           interior_fraction: float = 0.2) -> np.ndarray:
    n_in = int(round(count * interior_fraction))
    parts = [sample_closed_E_array(count - n_in, rng, boundary=True)]
    if n_in:
        parts.append(sample_closed_E_array(n_in, rng))
    return np.concatenate(parts)


def _as_point_array(samples) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        arr = np.asarray(samples, complex)
    else:
        arr = np.array([[s.x1, s.x2, s.x3] for s in samples], complex)
    if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] == 0:
        raise ValueError("samples must be a nonempty collection of points")
    return arr


def sup_norm_estimate(poly: Polynomial3, samples) -> float:
    """Max of ``|f|`` over the samples: a lower bound for the sup over the closed tetrablock."""
    arr = _as_point_array(samples)
    return float(np.max(np.abs(poly(arr[:, 0], arr[:, 1], arr[:, 2]))))


def _bE_from_params(theta, rho, phi):
    x3 = np.exp(1j * theta)
    x2 = np.clip(rho, 0.0, 1.0) * np.exp(1j * phi)
    return np.conj(x2) * x3, x2, x3


def refined_sup_estimate(poly: Polynomial3, samples, rng: np.random.Generator,
                         n_starts: int = 12, rounds: int = 40, n_trials: int = 8) -> float:
    """Sample max, then polished by local search on the distinguished boundary.

    Every evaluated point lies in the closed tetrablock, so the result is
    still a lower bound for the true sup norm, only a much tighter one.
    """
    arr = _as_point_array(samples)
    vals = np.abs(poly(arr[:, 0], arr[:, 1], arr[:, 2]))
    best = float(vals.max())
    on_b = np.abs(np.abs(arr[:, 2]) - 1) < 1e-12
    if not on_b.any():
        return best
    idx = np.flatnonzero(on_b)
    idx = idx[np.argsort(vals[idx])[::-1][:n_starts]]
    theta = np.angle(arr[idx, 2])
    rho = np.abs(arr[idx, 1])
    phi = np.angle(arr[idx, 1])
    cur = vals[idx]
    step = 0.1
    for _ in range(rounds):
        m = theta.size
        dt = step * rng.standard_normal((n_trials, m))
        dr = step * rng.standard_normal((n_trials, m))
        dp = step * rng.standard_normal((n_trials, m))
        T, R, F = theta + dt, np.clip(rho + dr, 0, 1), phi + dp
        x1, x2, x3 = _bE_from_params(T, R, F)
        v = np.abs(poly(x1, x2, x3))
        j = np.argmax(v, axis=0)
        cols = np.arange(m)
        vbest = v[j, cols]
        better = vbest > cur
        theta = np.where(better, T[j, cols], theta)
        rho = np.where(better, R[j, cols], rho)
        phi = np.where(better, F[j, cols], phi)
        cur = np.where(better, vbest, cur)
        step *= 0.85
    return max(best, float(cur.max()))
