"""Landslide flow on normalized pairs of hyperbolic metrics.

For a pair ``(h, h2)`` with bundle morphism ``b`` (``h(b., b.) = h2``), the
landslide by ``alpha`` replaces the pair by ``(h_alpha, h_{alpha+pi})`` where
``h_alpha = h(beta_alpha., beta_alpha.)`` and
``beta_alpha = cos(alpha/2) E + sin(alpha/2) J b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tensor as tc
from .errors import (
    BadCurvature,
    InversionFailure,
    NoConvergence,
    NotNormalizedPair,
    NotSelfAdjoint,
    NotUnimodular,
    SingularOperator,
)
from .models import MetricField
from .surfaces import EmbeddingData

UNIMODULAR_TOL = 1e-8


@dataclass
class MetricPair:
    h: MetricField
    h2: MetricField
    normalized: bool = True

    def __post_init__(self):
        if self.h.chart != self.h2.chart or self.h.samples.shape != self.h2.samples.shape:
            raise ValueError("pair fields must share chart and grid")
        if self.normalized:
            _check_normalized(self.h.samples, self.h2.samples)

    def morphism(self) -> np.ndarray:
        return tc.bundle_morphism(self.h.samples, self.h2.samples)


@dataclass
class LandslideResult:
    h_alpha: MetricField
    h_alpha_pi: MetricField
    alpha: float

    def pair(self) -> MetricPair:
        return MetricPair(self.h_alpha, self.h_alpha_pi)


def _first_bad(mask):
    idx = np.argwhere(mask)
    return tuple(int(i) for i in idx[0]) if len(idx) else None


def _check_normalized(h, h2, tol=tc.DET_PAIR_TOL):
    dh = tc.det(h)
    gap = np.abs(tc.det(h2) - dh) / dh
    bad = _first_bad(np.atleast_1d(gap > tol))
    if bad is not None:
        raise NotNormalizedPair(
            f"det mismatch {np.atleast_1d(gap)[bad]:.3e} at sample {bad}")


def beta(h, b, alpha: float) -> np.ndarray:
    """``cos(alpha/2) E + sin(alpha/2) J b`` with ``J`` the complex structure of ``h``."""
    h = tc.check_spd(h)
    b = np.asarray(b, float)
    res = tc.self_adjoint_residual(h, b) / (tc._scale(h) * tc._scale(b))
    if np.any(res > tc.SELF_ADJOINT_TOL):
        raise NotSelfAdjoint(f"b is not h-self-adjoint (residual {res.max():.2e})")
    if np.any(np.abs(tc.det(b) - 1.0) > UNIMODULAR_TOL):
        raise NotUnimodular("det b differs from 1")
    if np.any(tc.trace(b) <= 0):
        raise NotUnimodular("b must have positive eigenvalues")
    J = tc.complex_structure(h)
    return math.cos(alpha / 2) * tc.E + math.sin(alpha / 2) * (J @ b)


def landslide_point(h, h2, alpha: float):
    """Return ``(h_alpha, h_{alpha+pi})`` for a pointwise normalized pair."""
    h = tc.check_spd(h)
    _check_normalized(h, tc.check_spd(h2))
    b = tc.bundle_morphism(h, h2)
    return (tc.pull_metric(h, beta(h, b, alpha)),
            tc.pull_metric(h, beta(h, b, alpha + math.pi)))


def _landslide_samples(h, h2, alpha):
    """Samplewise landslide with errors reporting the offending grid index."""
    try:
        return landslide_point(h, h2, alpha)
    except (NotNormalizedPair, NotSelfAdjoint, NotUnimodular) as exc:
        flat_h = h.reshape(-1, 2, 2)
        flat_h2 = h2.reshape(-1, 2, 2)
        for k in range(flat_h.shape[0]):
            try:
                landslide_point(flat_h[k], flat_h2[k], alpha)
            except type(exc) as inner:
                idx = np.unravel_index(k, h.shape[:-2])
                raise type(exc)(f"sample {tuple(int(i) for i in idx)}: {inner}") from None
        raise


def landslide_field(pair: MetricPair, alpha: float) -> LandslideResult:
    h, h2 = pair.h, pair.h2
    ha, hap = _landslide_samples(h.samples, h2.samples, alpha)
    ev_a = ev_ap = None
    if h.evaluator is not None and h2.evaluator is not None:
        def ev_a(u, v):
            return landslide_point(h.at(u, v), h2.at(u, v), alpha)[0]

        def ev_ap(u, v):
            return landslide_point(h.at(u, v), h2.at(u, v), alpha)[1]

    return LandslideResult(h.with_samples(ha, ev_a, alpha=alpha),
                           h.with_samples(hap, ev_ap, alpha=alpha + math.pi), alpha)


def _exp_traceless(p, q):
    """``exp([[p, q], [q, -p]])``."""
    n = math.hypot(p, q)
    ch = math.cosh(n)
    sh = math.sinh(n) / n if n > 1e-300 else 1.0
    return np.array([[ch + sh * p, sh * q], [sh * q, ch - sh * p]])


def invert_landslide(h, target, alpha: float, tol: float = 1e-12, max_iter: int = 50):
    """Find ``b`` (h-self-adjoint, det 1, positive) with ``h(beta_alpha., beta_alpha.) = target``.

    Works in an ``h``-orthonormal frame where ``b = exp(S)`` with ``S``
    symmetric and traceless, so det and positivity hold by construction.
    Gauss-Newton with Armijo backtracking from ``b = E``.
    """
    h = tc.check_spd(h)
    target = tc.check_spd(target)
    if abs(tc.det(target) - tc.det(h)) > tc.DET_PAIR_TOL * tc.det(h):
        raise NotNormalizedPair("det target differs from det h")
    r = tc._spd_power(h, 0.5)
    ri = tc._spd_power(h, -0.5)
    T = tc.symmetrize(ri @ target @ ri)
    T = T / math.sqrt(tc.det(T))
    c, s = math.cos(alpha / 2), math.sin(alpha / 2)
    if np.max(np.abs(T - tc.E)) < 1e-14:
        return tc.E.copy()
    if abs(s) < 1e-12:
        raise InversionFailure("alpha is a multiple of 2 pi; every b is a solution")

    def residual(x):
        B = _exp_traceless(*x)
        beta_ = c * tc.E + s * (tc.J0 @ B)
        D = beta_.T @ beta_ - T
        return np.array([D[0, 0], D[0, 1], D[1, 1]])

    x = np.zeros(2)
    f = residual(x)
    for _ in range(max_iter):
        nf = np.linalg.norm(f)
        if nf <= tol:
            return ri @ _exp_traceless(*x) @ r
        eps = 1e-7
        Jac = np.column_stack([(residual(x + eps * e) - residual(x - eps * e)) / (2 * eps)
                               for e in np.eye(2)])
        step = np.linalg.lstsq(Jac, -f, rcond=None)[0]
        lam = 1.0
        while lam > 1e-8:
            f_new = residual(x + lam * step)
            if np.linalg.norm(f_new) <= (1 - 1e-4 * lam) * nf:
                break
            lam *= 0.5
        else:
            raise NoConvergence("line search stalled")
        x = x + lam * step
        f = f_new
    if np.linalg.norm(f) <= tol:
        return ri @ _exp_traceless(*x) @ r
    raise NoConvergence(f"residual {np.linalg.norm(f):.2e} after {max_iter} iterations")


def dual_curvature(K: float) -> float:
    """``K* = -K / (1 + K)``."""
    return -K / (1.0 + K)


def k_surface_from_pair(pair: MetricPair, K: float) -> EmbeddingData:
    """Embedding data ``I = h/|K|``, ``B = sqrt(-1-K) b`` of the K-surface."""
    if not K < -1:
        raise BadCurvature("K must be < -1")
    b = pair.morphism()
    I = pair.h.scaled(1.0 / abs(K))
    I.meta["K"] = K
    return EmbeddingData(I, math.sqrt(-1.0 - K) * b, "future-convex")


def mess_metrics(data: EmbeddingData):
    """Left and right metrics ``I((E +- JB)., (E +- JB).)``."""
    I = data.I.samples
    J = tc.complex_structure(I)
    JB = J @ data.B
    out = []
    for sign in (1.0, -1.0):
        A = tc.E + sign * JB
        if np.any(np.abs(tc.det(A)) < 1e-12):
            raise SingularOperator("E +- JB is singular")
        out.append(data.I.with_samples(tc.pull_metric(I, A)))
    return tuple(out)


def maximal_surface_from_pair(h, b):
    """Data ``(I', B')`` of the maximal surface of a normalized pair."""
    h = tc.check_spd(h)
    b = np.asarray(b, float)
    Epb = tc.E + b
    if np.any(np.abs(tc.det(Epb)) < 1e-12):
        raise SingularOperator("E + b is singular")
    inv = tc.inv(Epb)
    Jp = inv @ tc.complex_structure(h) @ Epb
    I1 = 0.25 * tc.pull_metric(h, Epb)
    B1 = -Jp @ inv @ (tc.E - b)
    return I1, B1
