"""Triangle meshes over chart domains and the map container."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from ..errors import DegenerateFace

MIN_FACE_AREA = 1e-12

MetricFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def as_metric_fn(m) -> MetricFn:
    """Accept a MetricField with an evaluator or a bare callable."""
    if callable(m):
        return m
    ev = getattr(m, "evaluator", None)
    if ev is None:
        raise ValueError("metric needs an evaluator for off-grid evaluation")
    return ev


@dataclass
class TriMeshMap:
    """Piecewise-affine map from a triangulated chart domain into a target chart.

    ``domain_metric`` and ``target_metric`` are callables ``(x, y) -> (..., 2, 2)``
    (a :class:`~adsland.models.MetricField` with an evaluator is accepted too).
    ``sliders`` maps vertex index to a direction: that vertex may only move
    along the line through its image with this direction (reflection-symmetric
    seams of doubled surfaces).
    """

    vertices: np.ndarray
    faces: np.ndarray
    images: np.ndarray
    pinned: np.ndarray
    domain_metric: object
    target_metric: object
    meta: dict = field(default_factory=dict)
    sliders: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, float)
        self.faces = np.asarray(self.faces, dtype=np.int64)
        self.images = np.asarray(self.images, float).copy()
        self.pinned = np.unique(np.asarray(self.pinned, dtype=np.int64))
        if self.images.shape != self.vertices.shape:
            raise ValueError("one image per vertex required")
        a = signed_areas(self.vertices, self.faces)
        if np.any(np.abs(a) <= MIN_FACE_AREA):
            raise DegenerateFace(f"face {int(np.argmin(np.abs(a)))} has area <= {MIN_FACE_AREA}")
        if np.any(a < 0):
            raise DegenerateFace("domain faces must be positively oriented")
        self.sliders = {int(k): np.asarray(v, float) / np.linalg.norm(v)
                        for k, v in dict(self.sliders).items()}
        if set(self.sliders) & set(self.pinned.tolist()):
            raise ValueError("a vertex cannot be both pinned and sliding")
        self._g = as_metric_fn(self.domain_metric)
        self._h = as_metric_fn(self.target_metric)

    @property
    def g(self) -> MetricFn:
        return self._g

    @property
    def h(self) -> MetricFn:
        return self._h

    @property
    def free(self) -> np.ndarray:
        mask = np.ones(len(self.vertices), bool)
        mask[self.pinned] = False
        return np.flatnonzero(mask)

    def dof_basis(self):
        """Sparse ``(2n, k)`` matrix mapping reduced coordinates to image displacements."""
        rows, cols, vals = [], [], []
        col = 0
        for i in self.free:
            d = self.sliders.get(int(i))
            if d is None:
                rows += [2 * i, 2 * i + 1]
                cols += [col, col + 1]
                vals += [1.0, 1.0]
                col += 2
            else:
                rows += [2 * i, 2 * i + 1]
                cols += [col, col]
                vals += [d[0], d[1]]
                col += 1
        return sp.csr_matrix((vals, (rows, cols)), shape=(2 * len(self.vertices), col))

    def with_images(self, images) -> "TriMeshMap":
        return replace(self, images=np.asarray(images, float))

    def with_metrics(self, domain=None, target=None) -> "TriMeshMap":
        return replace(self, domain_metric=domain if domain is not None else self.domain_metric,
                       target_metric=target if target is not None else self.target_metric)

    def edges(self):
        e = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def boundary_vertices(self) -> np.ndarray:
        e = np.sort(np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]],
                                    self.faces[:, [2, 0]]]), axis=1)
        uniq, count = np.unique(e, axis=0, return_counts=True)
        return np.unique(uniq[count == 1])


def signed_areas(P, faces):
    a = P[faces[:, 1]] - P[faces[:, 0]]
    b = P[faces[:, 2]] - P[faces[:, 0]]
    return 0.5 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])


def edge_matrices(P, faces):
    """Per-face ``[p1 - p0, p2 - p0]`` as column matrices, shape (m, 2, 2)."""
    X = np.empty((len(faces), 2, 2))
    X[:, :, 0] = P[faces[:, 1]] - P[faces[:, 0]]
    X[:, :, 1] = P[faces[:, 2]] - P[faces[:, 0]]
    return X


# -- generators --------------------------------------------------------------------

def square_mesh(n: int, half: float = 0.4, center=(0.0, 0.0), pattern: str = "alternating"):
    """Uniform grid on a square.

    ``pattern="alternating"`` flips the diagonal by cell parity, which makes the
    mesh symmetric under ``x <-> y``; ``pattern="uniform"`` uses one diagonal
    direction so every interior vertex has valence 6.
    Returns ``(vertices, faces, boundary)``.
    """
    if n < 2 or n % 2:
        raise ValueError("n must be an even integer >= 2")
    if pattern not in ("alternating", "uniform"):
        raise ValueError(f"unknown pattern {pattern!r}")
    s = np.linspace(-half, half, n + 1)
    X, Y = np.meshgrid(s, s, indexing="ij")
    V = np.column_stack([X.ravel() + center[0], Y.ravel() + center[1]])
    idx = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
    F = []
    for i in range(n):
        for j in range(n):
            a, b, c, d = idx[i, j], idx[i + 1, j], idx[i + 1, j + 1], idx[i, j + 1]
            if pattern == "uniform" or (i + j) % 2 == 0:
                F += [(a, b, c), (a, c, d)]
            else:
                F += [(a, b, d), (b, c, d)]
    B = np.unique(np.concatenate([idx[0], idx[-1], idx[:, 0], idx[:, -1]]))
    return V, np.array(F), B


def _ring_faces(i0, i1, n, shift_outer):
    """Triangulate between two rings of ``n`` vertices; the outer ring is rotated
    half a step ahead (``shift_outer=True``) or behind."""
    F = []
    for i in range(n):
        a, b = i0 + i, i0 + (i + 1) % n
        if shift_outer:
            c, d = i1 + i, i1 + (i - 1) % n
            F += [(a, b, c), (a, c, d)]
        else:
            c, d = i1 + (i + 1) % n, i1 + i
            F += [(a, b, c), (a, c, d)]
    return F


def annulus_mesh(r_in: float, r_out: float, n: int, center=(0.0, 0.0), n_rings: Optional[int] = None):
    """Staggered-ring annulus with nearly equilateral triangles in log-polar coordinates.

    ``n`` (angular count) divisible by 4 keeps the mesh symmetric under the
    reflection ``x <-> y``.  Returns ``(vertices, faces, inner, outer)``.
    """
    if n % 4:
        raise ValueError("n must be divisible by 4")
    if n_rings is None:
        step = 2 * math.pi / n * math.sqrt(3) / 2
        n_rings = max(2, int(round(math.log(r_out / r_in) / step)) + 1)
    radii = np.exp(np.linspace(math.log(r_in), math.log(r_out), n_rings))
    V = []
    for j, r in enumerate(radii):
        off = 0.5 * (j % 2)
        ang = 2 * math.pi * (np.arange(n) + off) / n
        V.append(np.column_stack([r * np.cos(ang), r * np.sin(ang)]))
    V = np.concatenate(V) + np.asarray(center)
    F = []
    for j in range(n_rings - 1):
        F += _ring_faces(j * n, (j + 1) * n, n, shift_outer=(j % 2 == 0))
    F = np.array(F)
    F = _orient(V, F)
    return V, F, np.arange(n), np.arange((n_rings - 1) * n, n_rings * n)


def disk_mesh(r_core: float, r_out: float, n: int, center=(0.0, 0.0)):
    """Annulus mesh closed by a fan to a center vertex (geometrically graded toward it).

    Returns ``(vertices, faces, center_index, outer)``.
    """
    V, F, inner, outer = annulus_mesh(r_core, r_out, n, center)
    c = len(V)
    V = np.vstack([V, np.asarray(center, float)])
    fan = np.array([(c, inner[i], inner[(i + 1) % n]) for i in range(n)])
    F = _orient(V, np.vstack([F, fan]))
    return V, F, c, outer


def _orient(V, F):
    F = F.copy()
    neg = signed_areas(V, F) < 0
    F[neg] = F[neg][:, [0, 2, 1]]
    return F


def refine(V, F, pinned_mask=None):
    """Split each triangle into four at edge midpoints (chart-linear)."""
    e = np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])
    key = np.sort(e, axis=1)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    mid = 0.5 * (V[uniq[:, 0]] + V[uniq[:, 1]])
    m = len(F)
    k01, k12, k20 = (len(V) + inv[:m], len(V) + inv[m:2 * m], len(V) + inv[2 * m:])
    a, b, c = F[:, 0], F[:, 1], F[:, 2]
    F2 = np.vstack([np.column_stack([a, k01, k20]), np.column_stack([k01, b, k12]),
                    np.column_stack([k20, k12, c]), np.column_stack([k01, k12, k20])])
    return np.vstack([V, mid]), F2


# -- text I/O -------------------------------------------------------------------------

def write_mesh(m: TriMeshMap, path) -> None:
    """Plain text: ``v x y``, ``f i j k``, ``p i tx ty`` and ``u i X Y`` (current images)."""
    pinned = set(int(i) for i in m.pinned)
    with open(path, "w") as fh:
        for x, y in m.vertices.tolist():
            fh.write(f"v {x!r} {y!r}\n")
        for i, j, k in m.faces:
            fh.write(f"f {i} {j} {k}\n")
        for i in sorted(pinned):
            tx, ty = m.images[i].tolist()
            fh.write(f"p {i} {tx!r} {ty!r}\n")
        for i, (X, Y) in enumerate(m.images.tolist()):
            if i not in pinned:
                fh.write(f"u {i} {X!r} {Y!r}\n")


def read_mesh(path):
    """Return ``(vertices, faces, pinned, images)`` from :func:`write_mesh` output."""
    V, F, P, U = [], [], {}, {}
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag = parts[0]
            if tag == "v":
                V.append((float(parts[1]), float(parts[2])))
            elif tag == "f":
                F.append(tuple(int(p) for p in parts[1:4]))
            elif tag == "p":
                P[int(parts[1])] = (float(parts[2]), float(parts[3]))
            elif tag == "u":
                U[int(parts[1])] = (float(parts[2]), float(parts[3]))
            else:
                raise ValueError(f"unknown mesh record {tag!r}")
    V = np.array(V, float)
    images = V.copy()
    for i, t in {**U, **P}.items():
        images[i] = t
    return V, np.array(F, dtype=np.int64), np.array(sorted(P), dtype=np.int64), images
