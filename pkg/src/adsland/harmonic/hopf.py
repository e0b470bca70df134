"""Hopf differentials, H/L energy densities and the Bochner residual.

Each domain face gets the conformal coordinate ``w = Q x`` with
``Q = g^{1/2} / det(g)^{1/4}``, so the domain metric reads ``sigma |dw|^2``
with ``sigma = sqrt(det g)``.  The target is treated the same way at the
image centroid (``rho``, ``R``).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .. import tensor as tc
from ..errors import DegenerateFace, NotHarmonic
from .energy import differentials, face_geometry, reduced_gradient
from .mesh import TriMeshMap, signed_areas

BOCHNER_GATE = 1e-6


@dataclass
class HopfField:
    phi: np.ndarray     # complex, per face
    sigma: np.ndarray   # domain conformal factor per face
    frames: np.ndarray  # Q per face

    @property
    def magnitude(self) -> np.ndarray:
        """Scale-free size ``|Phi| / sigma``."""
        return np.abs(self.phi) / self.sigma


@dataclass
class DensityField:
    H: np.ndarray
    L: np.ndarray
    e: np.ndarray
    jac: np.ndarray
    nu: np.ndarray
    phi: np.ndarray
    sigma: np.ndarray
    rho: np.ndarray
    pullback_w: np.ndarray   # pulled-back target metric in the face's w coordinate


def _conformal_frame(g):
    s = np.sqrt(tc.det(g))
    return tc._spd_power(g, 0.5) / np.sqrt(s)[:, None, None], s


def _pullback_w(m: TriMeshMap):
    geo = face_geometry(m)
    D = differentials(m)
    c = m.images[m.faces].mean(axis=1)
    h = m.h(c[:, 0], c[:, 1])
    Q, sigma = _conformal_frame(geo.g)
    Qi = tc.inv(Q)
    Pw = tc.symmetrize(tc.transpose(Qi) @ tc.transpose(D) @ h @ D @ Qi)
    return D, h, Q, Qi, sigma, Pw


def _phi_from(Pw):
    return 0.25 * (Pw[:, 0, 0] - Pw[:, 1, 1] - 2j * Pw[:, 0, 1])


def hopf_differential(m: TriMeshMap) -> HopfField:
    """``Phi = 1/4 [P(dw1,dw1) - P(dw2,dw2) - 2i P(dw1,dw2)]`` per face, ``P`` the pullback."""
    if np.any(signed_areas(m.images, m.faces) == 0):
        raise DegenerateFace("map collapses a face")
    _, _, Q, _, sigma, Pw = _pullback_w(m)
    return HopfField(_phi_from(Pw), sigma, Q)


def density_decomposition(m: TriMeshMap) -> DensityField:
    """Per-face ``H, L, e, Jac, nu`` of the map."""
    D, h, Q, Qi, sigma, Pw = _pullback_w(m)
    R, rho = _conformal_frame(h)
    U = R @ D @ Qi
    uz = 0.5 * ((U[:, 0, 0] + U[:, 1, 1]) + 1j * (U[:, 1, 0] - U[:, 0, 1]))
    uzb = 0.5 * ((U[:, 0, 0] - U[:, 1, 1]) + 1j * (U[:, 1, 0] + U[:, 0, 1]))
    H = rho * np.abs(uz) ** 2 / sigma
    L = rho * np.abs(uzb) ** 2 / sigma
    jac = H - L
    if np.any(jac <= 0):
        raise DegenerateFace(f"{int(np.sum(jac <= 0))} faces with Jacobian <= 0")
    phi = rho * uz * np.conj(uzb)
    return DensityField(H, L, H + L, jac, uzb / uz, phi, sigma, rho, Pw)


def pullback_from_density(d: DensityField) -> np.ndarray:
    """Rebuild ``2 Re(Phi dw^2) + sigma e |dw|^2`` as a matrix."""
    re, im = d.phi.real, d.phi.imag
    se = d.sigma * d.e
    return tc.metric(2 * re + se, -2 * im, -2 * re + se)


def cotan_laplacian(m: TriMeshMap):
    """Cotangent weights in the domain metric and mixed Voronoi vertex areas.

    Barycentric lumping is not consistent on meshes with varying vertex
    valence, so areas follow the circumcentric split (halved-area fallback
    on obtuse triangles).
    """
    geo = face_geometry(m)
    V, F = m.vertices, m.faces
    n = len(V)
    rows, cols, vals = [], [], []
    cots, sq = [], []
    for a in range(3):
        i, j, k = F[:, a], F[:, (a + 1) % 3], F[:, (a + 2) % 3]
        u = V[j] - V[i]
        v = V[k] - V[i]
        dot = np.einsum("fi,fij,fj->f", u, geo.g, v)
        cross = np.sqrt(tc.det(geo.g)) * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
        w = 0.5 * dot / cross
        rows += [j, k]
        cols += [k, j]
        vals += [w, w]
        e = V[k] - V[j]
        cots.append(dot / cross)
        sq.append(np.einsum("fi,fij,fj->f", e, geo.g, e))
    Wm = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(n, n))
    cots = np.column_stack(cots)  # cot of the angle at corner a
    sq = np.column_stack(sq)      # squared length of the edge opposite corner a
    obtuse = cots < 0
    area = np.zeros(n)
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        # edge a-b is opposite corner c, edge a-c opposite corner b
        vor = (sq[:, c] * cots[:, c] + sq[:, b] * cots[:, b]) / 8.0
        A = np.where(obtuse.any(axis=1), np.where(obtuse[:, a], geo.W / 2, geo.W / 4), vor)
        np.add.at(area, F[:, a], A)
    return Wm, area


def vertex_average(m: TriMeshMap, face_values):
    geo = face_geometry(m)
    num = np.zeros(len(m.vertices))
    den = np.zeros(len(m.vertices))
    for a in range(3):
        np.add.at(num, m.faces[:, a], geo.W * face_values)
        np.add.at(den, m.faces[:, a], geo.W)
    return num / den


def interior_vertices(m: TriMeshMap) -> np.ndarray:
    """Vertices neither on the boundary nor pinned, nor adjacent to either."""
    bad = np.zeros(len(m.vertices), bool)
    bad[m.boundary_vertices()] = True
    bad[m.pinned] = True
    touch = np.zeros(len(m.vertices), bool)
    for a in range(3):
        hit = bad[m.faces[:, a]]
        for b in range(3):
            touch[m.faces[hit, b]] = True
    return np.flatnonzero(~touch)


def recovered_differentials(m: TriMeshMap) -> np.ndarray:
    """Per-vertex differential: area-weighted mean of the adjacent face differentials.

    On meshes whose vertex patches are centrally symmetric the recovered
    differential is second-order accurate, unlike piecewise-constant face values.
    At sliding vertices the mirror patch is folded in (``D -> R D R``).
    """
    geo = face_geometry(m)
    D = differentials(m)
    n = len(m.vertices)
    Dv = np.zeros((n, 2, 2))
    den = np.zeros(n)
    for a in range(3):
        np.add.at(Dv, m.faces[:, a], geo.W[:, None, None] * D)
        np.add.at(den, m.faces[:, a], geo.W)
    Dv /= den[:, None, None]
    for i, d in m.sliders.items():
        R = 2 * np.outer(d, d) - np.eye(2)
        Dv[i] = 0.5 * (Dv[i] + R @ Dv[i] @ R)
    return Dv


def vertex_densities(m: TriMeshMap):
    """``H`` and ``L`` at vertices from :func:`recovered_differentials`."""
    Dv = recovered_differentials(m)
    g = m.g(m.vertices[:, 0], m.vertices[:, 1])
    h = m.h(m.images[:, 0], m.images[:, 1])
    Q, sigma = _conformal_frame(g)
    R, rho = _conformal_frame(h)
    U = R @ Dv @ tc.inv(Q)
    uz = 0.5 * ((U[:, 0, 0] + U[:, 1, 1]) + 1j * (U[:, 1, 0] - U[:, 0, 1]))
    uzb = 0.5 * ((U[:, 0, 0] - U[:, 1, 1]) + 1j * (U[:, 1, 0] + U[:, 0, 1]))
    return rho * np.abs(uz) ** 2 / sigma, rho * np.abs(uzb) ** 2 / sigma


def bochner_residual(m: TriMeshMap, K_domain: float = -1.0, gate: float = BOCHNER_GATE):
    """``Delta_g log H - 2(H - L) - 2 K_domain`` at interior vertices.

    With a hyperbolic domain (``K_domain = -1``) this is the discrete form of
    ``Delta log H = 2(H - L - 1)``, valid for harmonic maps into curvature -1
    targets.  Returns ``(vertex_indices, residual)``.
    """
    gn = float(np.linalg.norm(reduced_gradient(m)))
    if gn > gate:
        raise NotHarmonic(f"energy gradient {gn:.2e} exceeds {gate:.0e}")
    H, L = vertex_densities(m)
    if np.any(H <= 0):
        raise DegenerateFace("H vanishes at a vertex")
    logH = np.log(H)
    Wm, area = cotan_laplacian(m)
    lap = (Wm @ logH - np.asarray(Wm.sum(axis=1)).ravel() * logH) / area
    idx = interior_vertices(m)
    return idx, lap[idx] - 2.0 * (H - L)[idx] - 2.0 * K_domain


def write_face_csv(m: TriMeshMap, path) -> None:
    """Per-face export of Phi, H, L, e, Jac and nu."""
    d = density_decomposition(m)
    c = m.vertices[m.faces].mean(axis=1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["face", "x", "y", "phi_re", "phi_im", "H", "L", "e", "jac", "nu_re", "nu_im"])
        for f in range(len(m.faces)):
            w.writerow([f] + [repr(float(v)) for v in (
                c[f, 0], c[f, 1], d.phi[f].real, d.phi[f].imag, d.H[f], d.L[f], d.e[f],
                d.jac[f], d.nu[f].real, d.nu[f].imag)])
