"""Pair-energy minimization, minimal Lagrangian maps and the Hopf rotation check."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from .. import tensor as tc
from ..errors import InversionFailure, NoConvergence
from ..landslide import landslide_point
from .energy import differentials, dirichlet_energy, face_geometry, harmonic_solve
from .hopf import _conformal_frame, hopf_differential, recovered_differentials
from .mesh import TriMeshMap, as_metric_fn, signed_areas


class NonUnimodal(UserWarning):
    """Three-point bracketing of the pair energy failed."""


@dataclass
class ConformalFamily:
    """Finite-dimensional family of domain metrics on a fixed mesh.

    ``generator(params)`` returns a metric callable ``(x, y) -> (..., 2, 2)``.
    The maps are Dirichlet problems: ``pinned`` vertices stay at their chart
    positions (the identity on the boundary and at cone points) and
    ``sliders`` move along fixed lines (see :class:`TriMeshMap`).
    """

    bounds: Sequence[tuple]
    generator: Callable
    vertices: np.ndarray
    faces: np.ndarray
    pinned: np.ndarray
    symmetric_value: Optional[Sequence[float]] = None
    meta: dict = field(default_factory=dict)
    sliders: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.bounds)

    def metric(self, params):
        return self.generator(np.atleast_1d(np.asarray(params, float)))

    def map_to(self, params, target, images=None) -> TriMeshMap:
        V = self.vertices
        return TriMeshMap(V, self.faces, V if images is None else images, self.pinned,
                          self.metric(params), target, sliders=self.sliders)

    def metric_derivative(self, params, k: int = 0, step: float = 1e-5):
        """Central-difference derivative of the member metric in parameter ``k``."""
        p = np.atleast_1d(np.asarray(params, float)).copy()
        e = np.zeros_like(p)
        e[k] = step
        gp, gm = self.metric(p + e), self.metric(p - e)
        return lambda x, y: (gp(x, y) - gm(x, y)) / (2 * step)


def stretch_metric(base, s):
    """``A_s^T g A_s`` with ``A_s = diag(e^{s/2}, e^{-s/2})`` (constant anisotropic stretch)."""
    base = as_metric_fn(base)
    a, b = math.exp(s / 2), math.exp(-s / 2)
    A = np.diag([a, b])

    def g(x, y):
        return A @ base(x, y) @ A

    return g


def stretch_family(base, vertices, faces, pinned, bounds=(-0.5, 0.5),
                   sliders=None) -> ConformalFamily:
    """One-parameter family of domain metrics through ``base`` (member 0)."""
    return ConformalFamily([tuple(bounds)], lambda p: stretch_metric(base, float(p[0])),
                           vertices, faces, pinned, symmetric_value=[0.0],
                           sliders=dict(sliders or {}))


def hopf_pairing(m: TriMeshMap, gdot) -> float:
    """``-4 sum_f Re(psi conj(Phi)) / sigma * |face|`` with ``psi`` the Hopf part of ``gdot``.

    For a harmonic map this is the derivative of the energy along a domain
    metric variation ``gdot``.
    """
    geo = face_geometry(m)
    V, F = m.vertices, m.faces
    c = V[F].mean(axis=1)
    Q, sigma = _conformal_frame(geo.g)
    Qi = tc.inv(Q)
    gd = tc.transpose(Qi) @ gdot(c[:, 0], c[:, 1]) @ Qi
    psi = 0.25 * (gd[:, 0, 0] - gd[:, 1, 1] - 2j * gd[:, 0, 1])
    phi = hopf_differential(m).phi
    return float(-4.0 * np.sum(np.real(psi * np.conj(phi)) / sigma * signed_areas(V, F)))


def identity_noise_floor(vertices, faces, pinned, metric, sliders=None, **solve_kw) -> float:
    """Max ``|Phi|/sigma`` of the discrete harmonic map from a metric to itself."""
    m = TriMeshMap(vertices, faces, vertices, pinned, metric, metric, sliders=dict(sliders or {}))
    return float(np.max(hopf_differential(harmonic_solve(m, **solve_kw)).magnitude))


@dataclass
class PairResult:
    params: np.ndarray
    energy: float
    maps: tuple
    phi_sum: float          # max |Phi1 + Phi2| / sigma
    phi_single: float       # max |Phi1| / sigma
    pairing: np.ndarray     # Hopf pairing derivative of the total energy
    evaluations: int


class _PairObjective:
    def __init__(self, family, h1, h2, solve_kw):
        self.family = family
        self.targets = (h1, h2)
        self.solve_kw = solve_kw
        self.warm = [None, None]
        self.cache = {}

    def maps(self, params):
        key = tuple(np.round(np.atleast_1d(params), 15))
        if key not in self.cache:
            out = []
            for i, h in enumerate(self.targets):
                m = self.family.map_to(params, h)
                if self.warm[i] is not None and np.all(signed_areas(self.warm[i], m.faces) > 0):
                    m = m.with_images(self.warm[i])
                s = harmonic_solve(m, **self.solve_kw)
                self.warm[i] = s.images
                out.append(s)
            self.cache[key] = (sum(dirichlet_energy(s) for s in out), tuple(out))
        return self.cache[key]

    def __call__(self, params):
        return self.maps(params)[0]


def pair_energy(family: ConformalFamily, h1, h2, params, **solve_kw) -> float:
    return _PairObjective(family, h1, h2, solve_kw)(params)


def minimize_pair_energy(family: ConformalFamily, h1, h2, xtol: float = 1e-5,
                         **solve_kw) -> PairResult:
    """Minimize ``E(c, h1) + E(c, h2)`` over the family.

    One parameter: bounded Brent search (golden section with parabolic steps);
    two parameters: Nelder-Mead.  Each evaluation solves two harmonic maps,
    warm-started from the previous solutions.
    """
    obj = _PairObjective(family, as_metric_fn(h1), as_metric_fn(h2), solve_kw)
    if family.dim == 1:
        lo, hi = family.bounds[0]
        mid = 0.5 * (lo + hi)
        f_lo, f_mid, f_hi = obj([lo]), obj([mid]), obj([hi])
        if not (f_mid <= f_lo and f_mid <= f_hi):
            warnings.warn("pair energy is not bracketed by the family bounds", NonUnimodal)
        res = optimize.minimize_scalar(lambda s: obj([s]), bounds=(lo, hi), method="bounded",
                                       options={"xatol": xtol})
        if not res.success:
            raise NoConvergence(f"1-parameter search failed: {res.message}")
        best = np.array([res.x])
    else:
        x0 = np.array([0.5 * (a + b) for a, b in family.bounds])
        res = optimize.minimize(obj, x0, method="Nelder-Mead",
                                options={"xatol": xtol, "fatol": 1e-14, "maxiter": 400})
        if not res.success:
            raise NoConvergence(f"Nelder-Mead failed: {res.message}")
        best = np.asarray(res.x)
    E, maps = obj.maps(best)
    hp = [hopf_differential(m) for m in maps]
    phi_sum = float(np.max(np.abs(hp[0].phi + hp[1].phi) / hp[0].sigma))
    pairing = np.array([sum(hopf_pairing(m, family.metric_derivative(best, k)) for m in maps)
                        for k in range(family.dim)])
    return PairResult(best, E, maps, phi_sum, float(np.max(hp[0].magnitude)), pairing,
                      len(obj.cache))


@dataclass
class MinimalLagrangianReport:
    area_ratio: np.ndarray       # sqrt(det u^*h2 / det h1) per face, recovered differential
    det_b: np.ndarray
    self_adjoint: np.ndarray
    b: np.ndarray
    face_area_ratio: np.ndarray  # same ratio from the raw piecewise-constant differential


def minimal_lagrangian_map(h1, h2, family: ConformalFamily, result: Optional[PairResult] = None,
                           **solve_kw):
    """Compose ``u2`` with the mesh inverse of ``u1``.

    The composed map lives on the mesh with vertices at the ``u1`` images;
    per face the operator ``b`` with ``h1(b., b.) = u^* h2`` is extracted from
    the differential recovered at the face's vertices.
    Returns ``(TriMeshMap, MinimalLagrangianReport)``.
    """
    if result is None:
        result = minimize_pair_energy(family, h1, h2, **solve_kw)
    u1, u2 = result.maps
    if np.any(signed_areas(u1.images, u1.faces) <= 0):
        raise InversionFailure("u1 folds a face; it cannot be inverted on the mesh")
    m = TriMeshMap(u1.images, u1.faces, u2.images, u1.pinned, h1, h2, sliders=u1.sliders)
    geo = face_geometry(m)
    c = m.images[m.faces].mean(axis=1)
    hc = m.h(c[:, 0], c[:, 1])
    g = geo.g

    def ratio_of(D):
        pull = tc.symmetrize(tc.transpose(D) @ hc @ D)
        return pull, np.sqrt(tc.det(pull) / tc.det(g))

    raw = ratio_of(differentials(m))[1]
    pull, ratio = ratio_of(recovered_differentials(m)[m.faces].mean(axis=1))
    b = tc.bundle_morphism(g, pull, det_tol=np.inf)
    sa = tc.self_adjoint_residual(g, b) / (tc._scale(g) * tc._scale(b))
    return m, MinimalLagrangianReport(ratio, tc.det(b), sa, b, raw)


@dataclass
class RotationReport:
    alpha: float
    fuchsian: bool
    mean_rotation: float      # mean per-face arg(Phi_alpha / Phi)
    rotation_error: float     # |mean_rotation - alpha| / alpha (absolute when alpha = 0)
    modulus_error: float      # |mean(|Phi_alpha|/|Phi|) - 1|
    per_face_angle: np.ndarray
    per_face_ratio: np.ndarray
    center_drift: Optional[float] = None
    note: str = ""


def center_metric(h, b_fn):
    """``h(b., .)``, conformal to the metric of the maximal surface of the pair."""
    h = as_metric_fn(h)

    def c(x, y):
        return tc.symmetrize(h(x, y) @ b_fn(x, y))

    return c


def landslide_metric(h, h2, alpha):
    h, h2 = as_metric_fn(h), as_metric_fn(h2)
    return lambda x, y: landslide_point(h(x, y), h2(x, y), alpha)[0]


def hopf_rotation_check(h, h2, alpha: float, vertices, faces, pinned,
                        family: Optional[ConformalFamily] = None, fuchsian_tol: float = 1e-6,
                        **solve_kw) -> RotationReport:
    """Compare the Hopf differentials of the harmonic maps ``c -> h`` and ``c -> h_alpha``.

    ``c`` is the center metric of the pair, both maps share the mesh and pins.
    With ``family`` given, the pair-energy minimizer is recomputed for the
    landslid pair and its distance from the original minimizer is reported.
    """
    h, h2 = as_metric_fn(h), as_metric_fn(h2)
    b_fn = lambda x, y: tc.bundle_morphism(h(x, y), h2(x, y))  # noqa: E731
    c = center_metric(h, b_fn)
    cen = np.asarray(vertices)[np.asarray(faces)].mean(axis=1)
    if np.max(np.abs(b_fn(cen[:, 0], cen[:, 1]) - tc.E)) <= fuchsian_tol:
        return RotationReport(alpha, True, 0.0, 0.0, 0.0, np.zeros(len(faces)),
                              np.ones(len(faces)), note="Fuchsian: rotation undefined")
    m = TriMeshMap(vertices, faces, vertices, pinned, c, h)
    phi = hopf_differential(harmonic_solve(m, **solve_kw))
    ha = landslide_metric(h, h2, alpha)
    fa = harmonic_solve(m.with_metrics(target=ha), **solve_kw)
    phia = hopf_differential(fa)
    ratio = phia.phi / phi.phi
    ang = np.angle(ratio * np.exp(-1j * alpha)) + alpha
    mean_rot = float(np.mean(ang))
    rot_err = abs(mean_rot - alpha) / abs(alpha) if alpha != 0 else abs(mean_rot)
    mod = np.abs(ratio)
    drift = None
    if family is not None:
        p0 = minimize_pair_energy(family, h, h2, **solve_kw).params
        hap = landslide_metric(h, h2, alpha + math.pi)
        p1 = minimize_pair_energy(family, ha, hap, **solve_kw).params
        drift = float(np.max(np.abs(p1 - p0)))
    return RotationReport(alpha, False, mean_rot, rot_err, float(abs(np.mean(mod) - 1.0)),
                          ang, mod, drift)
