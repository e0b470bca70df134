"""Pointwise 2x2 metric and operator algebra.

Everything here works on stacked arrays of shape ``(..., 2, 2)`` so the same
function handles a single sample point and a whole grid.  A *metric point* is
a symmetric positive-definite matrix ``[[e11, e12], [e12, e22]]`` in chart
coordinates; an *operator* is an arbitrary real 2x2 matrix acting on tangent
vectors (columns).
"""

from __future__ import annotations

import numpy as np

from .errors import NotSPD, NotSelfAdjoint, NotNormalizedPair, SingularOperator

SYM_TOL = 1e-12
SELF_ADJOINT_TOL = 1e-8
DET_PAIR_TOL = 1e-8
SINGULAR_TOL = 1e-14

E = np.eye(2)
J0 = np.array([[0.0, -1.0], [1.0, 0.0]])


def metric(e11, e12, e22) -> np.ndarray:
    """Stack metric components into ``(..., 2, 2)`` symmetric matrices."""
    e11, e12, e22 = np.broadcast_arrays(
        np.asarray(e11, float), np.asarray(e12, float), np.asarray(e22, float)
    )
    out = np.empty(e11.shape + (2, 2))
    out[..., 0, 0] = e11
    out[..., 0, 1] = e12
    out[..., 1, 0] = e12
    out[..., 1, 1] = e22
    return out


def transpose(A: np.ndarray) -> np.ndarray:
    return np.swapaxes(A, -1, -2)


def det(A: np.ndarray) -> np.ndarray:
    return A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]


def trace(A: np.ndarray) -> np.ndarray:
    return A[..., 0, 0] + A[..., 1, 1]


def inv(A: np.ndarray) -> np.ndarray:
    d = det(A)
    if np.any(np.abs(d) < SINGULAR_TOL):
        raise SingularOperator("operator is not invertible")
    out = np.empty_like(A, dtype=float)
    out[..., 0, 0] = A[..., 1, 1]
    out[..., 0, 1] = -A[..., 0, 1]
    out[..., 1, 0] = -A[..., 1, 0]
    out[..., 1, 1] = A[..., 0, 0]
    return out / d[..., None, None]


def _scale(A: np.ndarray) -> np.ndarray:
    return np.maximum(1.0, np.max(np.abs(A), axis=(-2, -1)))


def symmetrize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + transpose(A))


def check_spd(M, tol: float = SYM_TOL) -> np.ndarray:
    """Return ``M`` as a float array, raising :class:`NotSPD` if any sample fails."""
    M = np.asarray(M, dtype=float)
    if M.shape[-2:] != (2, 2):
        raise ValueError(f"expected (..., 2, 2) array, got shape {M.shape}")
    asym = np.abs(M[..., 0, 1] - M[..., 1, 0]) / _scale(M)
    if np.any(asym > tol):
        raise NotSPD(f"asymmetry {asym.max():.3e} exceeds {tol:.0e}")
    if not np.all(np.isfinite(M)):
        raise NotSPD("non-finite metric entries")
    if np.any(M[..., 0, 0] <= 0) or np.any(det(M) <= 0):
        raise NotSPD("matrix is not positive definite")
    return M


def _spd_power(M: np.ndarray, p: float) -> np.ndarray:
    w, V = np.linalg.eigh(symmetrize(M))
    if np.any(w <= 0):
        raise NotSPD("non-positive eigenvalue")
    return (V * (w ** p)[..., None, :]) @ transpose(V)


def spd_principal_sqrt(M) -> np.ndarray:
    """Unique symmetric positive-definite square root (principal branch)."""
    return _spd_power(check_spd(M), 0.5)


def spd_inv_sqrt(M) -> np.ndarray:
    return _spd_power(check_spd(M), -0.5)


def complex_structure(h) -> np.ndarray:
    """Positively oriented rotation by a right angle for the metric ``h``.

    Closed form ``(1/sqrt(det h)) [[-h12, -h22], [h11, h12]]``; it squares to
    ``-E`` and is an ``h``-isometry.
    """
    h = check_spd(h)
    s = 1.0 / np.sqrt(det(h))
    J = np.empty_like(h)
    J[..., 0, 0] = -h[..., 0, 1]
    J[..., 0, 1] = -h[..., 1, 1]
    J[..., 1, 0] = h[..., 0, 0]
    J[..., 1, 1] = h[..., 0, 1]
    return J * s[..., None, None]


def pull_metric(h, A) -> np.ndarray:
    """The metric ``h(A., A.)``, i.e. ``A^T h A``."""
    h = np.asarray(h, float)
    A = np.asarray(A, float)
    if np.any(np.abs(det(A)) < SINGULAR_TOL):
        raise SingularOperator("pullback by a singular operator")
    return symmetrize(transpose(A) @ h @ A)


def self_adjoint_residual(h, A) -> np.ndarray:
    """``max|hA - (hA)^T|``; zero exactly when ``A`` is ``h``-self-adjoint."""
    hA = np.asarray(h, float) @ np.asarray(A, float)
    return np.abs(hA[..., 0, 1] - hA[..., 1, 0])


def bundle_morphism(h, h2, det_tol: float = DET_PAIR_TOL) -> np.ndarray:
    """The ``h``-self-adjoint positive operator ``b`` with ``h(b., b.) = h2``.

    Computed as ``h^{-1/2} sqrt(h^{-1/2} h2 h^{-1/2}) h^{1/2}`` so that
    ``h b`` stays symmetric in floating point.  The pair must satisfy
    ``|det h2 - det h| <= det_tol * det h`` (pointwise trace of ``det b = 1``);
    pass ``det_tol=np.inf`` to skip that gate.
    """
    h = check_spd(h)
    h2 = check_spd(h2)
    dh = det(h)
    gap = np.abs(det(h2) - dh) / dh
    if np.any(gap > det_tol):
        raise NotNormalizedPair(f"det mismatch {gap.max():.3e} exceeds {det_tol:.0e}")
    r = _spd_power(h, 0.5)
    ri = _spd_power(h, -0.5)
    S = _spd_power(symmetrize(ri @ h2 @ ri), 0.5)
    return ri @ S @ r


def eigen_pair(A, h, tol: float = SELF_ADJOINT_TOL):
    """Eigen-decomposition of an ``h``-self-adjoint operator.

    Returns ``(lam, mu, frame)`` with ``lam >= mu`` and the columns of
    ``frame`` the matching ``h``-orthonormal eigenvectors.
    """
    A = np.asarray(A, float)
    h = check_spd(h)
    res = self_adjoint_residual(h, A) / (_scale(h) * _scale(A))
    if np.any(res > tol):
        raise NotSelfAdjoint(f"self-adjoint residual {res.max():.3e}")
    r = _spd_power(h, 0.5)
    ri = _spd_power(h, -0.5)
    w, V = np.linalg.eigh(symmetrize(r @ A @ ri))
    frame = ri @ V[..., :, ::-1]
    return w[..., 1], w[..., 0], frame
