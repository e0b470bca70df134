"""Dirichlet energy of piecewise-affine maps and a preconditioned NCG solver.

Per face the map is affine with differential ``D = Y X^{-1}``; the domain
metric is sampled at the face centroid and the target metric at the image
centroid.  The energy is

    E = sum_f 1/2 W_f tr(g_f^{-1} D^T h(c_f) D),   W_f = sqrt(det g_f) |face|,

and its gradient is exact for this discrete functional, including the
dependence of ``h(c_f)`` on the image centroid (finite-differenced in the
target chart).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .. import tensor as tc
from ..errors import DegenerateFace, NoConvergence
from .mesh import TriMeshMap, edge_matrices, signed_areas

log = logging.getLogger(__name__)

GRAD_TOL = 1e-8
MAX_ITER = 10_000
FD_REL_STEP = 1e-3


@dataclass
class FaceGeometry:
    """Domain quantities that stay fixed while the images move."""

    Xinv: np.ndarray   # (m, 2, 2)
    g: np.ndarray      # domain metric at centroids
    ginv: np.ndarray
    W: np.ndarray      # sqrt(det g) * chart area
    size: float        # typical chart edge length of the target


def face_geometry(m: TriMeshMap) -> FaceGeometry:
    cached = m.meta.get("_geom")
    if cached is not None and cached[0] is m.vertices and cached[1] is m.domain_metric:
        return cached[2]
    V, F = m.vertices, m.faces
    X = edge_matrices(V, F)
    c = V[F].mean(axis=1)
    g = tc.check_spd(m.g(c[:, 0], c[:, 1]))
    area = signed_areas(V, F)
    W = np.sqrt(tc.det(g)) * area
    size = float(np.median(np.sqrt(np.abs(area))))
    geo = FaceGeometry(tc.inv(X), g, tc.inv(g), W, size)
    m.meta["_geom"] = (m.vertices, m.domain_metric, geo)
    return geo


def differentials(m: TriMeshMap, images=None):
    Y = edge_matrices(m.images if images is None else images, m.faces)
    return Y @ face_geometry(m).Xinv


def face_energies(m: TriMeshMap, images=None) -> np.ndarray:
    geo = face_geometry(m)
    P = m.images if images is None else images
    D = edge_matrices(P, m.faces) @ geo.Xinv
    c = P[m.faces].mean(axis=1)
    h = m.h(c[:, 0], c[:, 1])
    M = geo.ginv @ tc.transpose(D) @ h @ D
    return 0.5 * geo.W * tc.trace(M)


def dirichlet_energy(m: TriMeshMap, images=None) -> float:
    """Discrete energy; raises DegenerateFace if a face is inverted."""
    P = m.images if images is None else images
    if np.any(signed_areas(P, m.faces) <= 0):
        raise DegenerateFace("map inverts a face (Jacobian <= 0)")
    return float(np.sum(face_energies(m, images)))


def _safe_energy(m, images):
    if np.any(signed_areas(images, m.faces) <= 0):
        return np.inf
    try:
        e = float(np.sum(face_energies(m, images)))
    except (ValueError, ArithmeticError):
        return np.inf
    return e if np.isfinite(e) else np.inf


def _metric_derivative(m: TriMeshMap, c, step):
    """Fourth-order central differences of the target metric at points ``c``."""
    out = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = step
        f = lambda s: m.h(c[:, 0] + s * e[0], c[:, 1] + s * e[1])  # noqa: E731
        out.append((8 * (f(1) - f(-1)) - (f(2) - f(-2))) / (12 * step))
    return out


def energy_gradient(m: TriMeshMap, images=None) -> np.ndarray:
    """Gradient of :func:`dirichlet_energy` with respect to every image coordinate."""
    geo = face_geometry(m)
    P = m.images if images is None else images
    F = m.faces
    D = edge_matrices(P, F) @ geo.Xinv
    c = P[F].mean(axis=1)
    h = m.h(c[:, 0], c[:, 1])
    Wk = geo.W[:, None, None]
    dD = Wk * (h @ D @ geo.ginv)
    dY = dD @ tc.transpose(geo.Xinv)
    grad = np.zeros_like(P)
    np.add.at(grad, F[:, 1], dY[:, :, 0])
    np.add.at(grad, F[:, 2], dY[:, :, 1])
    np.add.at(grad, F[:, 0], -dY[:, :, 0] - dY[:, :, 1])
    dh = _metric_derivative(m, c, FD_REL_STEP * geo.size)
    G = D @ geo.ginv @ tc.transpose(D)
    dc = np.column_stack([0.5 * geo.W * np.einsum("fij,fji->f", G, dh[k]) for k in range(2)]) / 3.0
    for a in range(3):
        np.add.at(grad, F[:, a], dc)
    return grad


def stiffness(m: TriMeshMap, images=None):
    """Block stiffness ``sum_f W_f (grad phi_a)^T g^{-1} grad phi_b  (x)  h_f`` (sparse, 2n x 2n)."""
    geo = face_geometry(m)
    P = m.images if images is None else images
    F = m.faces
    c = P[F].mean(axis=1)
    h = m.h(c[:, 0], c[:, 1])
    # barycentric gradients as rows: grad phi_1, grad phi_2 = rows of X^{-1}; phi_0 = -sum
    Gp = np.empty((len(F), 3, 2))
    Gp[:, 1] = geo.Xinv[:, 0, :]
    Gp[:, 2] = geo.Xinv[:, 1, :]
    Gp[:, 0] = -Gp[:, 1] - Gp[:, 2]
    S = geo.W[:, None, None] * np.einsum("fai,fij,fbj->fab", Gp, geo.ginv, Gp)
    rows, cols, vals = [], [], []
    for a in range(3):
        for b in range(3):
            for i in range(2):
                for j in range(2):
                    rows.append(2 * F[:, a] + i)
                    cols.append(2 * F[:, b] + j)
                    vals.append(S[:, a, b] * h[:, i, j])
    n = 2 * len(P)
    return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n, n))


@dataclass
class SolveInfo:
    iterations: int
    grad_norm: float
    energy: float


def reduced_gradient(m: TriMeshMap, images=None, basis=None) -> np.ndarray:
    """Energy gradient in the unconstrained coordinates (free and sliding vertices)."""
    T = m.dof_basis() if basis is None else basis
    return T.T @ energy_gradient(m, images).ravel()


def harmonic_solve(m: TriMeshMap, tol: float = GRAD_TOL, max_iter: int = MAX_ITER,
                   precondition_every: int = 10, return_info: bool = False):
    """Minimize the discrete energy over the free vertices (pinned ones stay put).

    Polak-Ribiere+ nonlinear conjugate gradients, preconditioned by the
    stiffness matrix with the target metric frozen at the current image
    centroids, with Armijo backtracking.  Faces may not invert.
    """
    if len(m.pinned) == 0:
        raise ValueError("at least one pinned vertex is required")
    P = m.images.copy()
    if np.any(signed_areas(P, m.faces) <= 0):
        raise DegenerateFace("initial map inverts a face")
    T = m.dof_basis()
    if T.shape[1] == 0:
        out = m.with_images(P)
        return (out, SolveInfo(0, 0.0, dirichlet_energy(out))) if return_info else out

    def moved(Q, x):
        return Q + (T @ x).reshape(Q.shape)

    E = _safe_energy(m, P)
    g = reduced_gradient(m, P, T)
    lu = None
    d = None
    z_old = g_old = None
    eps = np.finfo(float).eps
    for it in range(max_iter + 1):
        gn = float(np.linalg.norm(g))
        if gn <= tol:
            out = m.with_images(P)
            info = SolveInfo(it, gn, E)
            log.debug("harmonic_solve converged in %d iterations (|g|=%.2e)", it, gn)
            return (out, info) if return_info else out
        if it == max_iter:
            break
        if lu is None or it % precondition_every == 0:
            K = (T.T @ stiffness(m, P) @ T).tocsc()
            lu = splu(K)
        z = lu.solve(g)
        if d is None or g_old is None:
            d = -z
        else:
            beta = max(0.0, float(g @ (z - z_old)) / float(g_old @ z_old))
            d = -z + beta * d
            if g @ d >= 0:
                d = -z
        slope = float(g @ d)
        step = 1.0
        accepted = False
        for _ in range(60):
            Q = moved(P, step * d)
            E_new = _safe_energy(m, Q)
            if E_new <= E + 1e-4 * step * slope + 4 * eps * abs(E):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if g_old is not None:
                d = None
                g_old = None
                continue
            raise NoConvergence(f"line search failed at iteration {it} (|g|={gn:.2e})")
        P = Q
        E = E_new
        g_old, z_old = g, z
        g = reduced_gradient(m, P, T)
    raise NoConvergence(f"no convergence after {max_iter} iterations (|g|={np.linalg.norm(g):.2e})")
