"""Embedding data ``(I, B)`` of spacelike surfaces in AdS cone spacetimes."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tensor as tc
from .errors import (
    BadCurvature,
    FlowDegenerate,
    GridTooCoarse,
    Inadmissible,
    NotSelfAdjoint,
    NotStrictlyConvex,
)
from .models import ConeData, MetricField, admissible, fd_first, gaussian_curvature_fd, interior_slice

FUTURE = "future-convex"
PAST = "past-convex"
NONE = "none"
FLOW_GUARD = 1e-10


def classify_convexity(B, I, tol=0.0) -> str:
    lam, mu, _ = tc.eigen_pair(B, I)
    if np.all(mu >= -tol):
        return FUTURE
    if np.all(lam <= tol):
        return PAST
    return NONE


@dataclass
class EmbeddingData:
    I: MetricField
    B: np.ndarray
    convexity: str = NONE

    def __post_init__(self):
        self.B = np.asarray(self.B, float)
        if self.B.shape != self.I.samples.shape:
            raise ValueError("B must have one operator per metric sample")
        I = self.I.samples
        res = tc.self_adjoint_residual(I, self.B) / (tc._scale(I) * tc._scale(self.B))
        if np.any(res > tc.SELF_ADJOINT_TOL):
            raise NotSelfAdjoint(f"B is not I-self-adjoint (residual {res.max():.2e})")
        if self.convexity not in (FUTURE, PAST, NONE):
            raise ValueError(f"unknown convexity {self.convexity!r}")
        if self.convexity != NONE:
            lam, mu, _ = tc.eigen_pair(self.B, I)
            scale = 1e-12 * np.maximum(1.0, np.abs(lam))
            if self.convexity == FUTURE and np.any(mu < -scale):
                raise ValueError("future-convex data needs nonnegative principal curvatures")
            if self.convexity == PAST and np.any(lam > scale):
                raise ValueError("past-convex data needs nonpositive principal curvatures")

    @property
    def curvature(self) -> np.ndarray:
        """Gauss equation value ``-1 - det B``."""
        return -1.0 - tc.det(self.B)


def fundamental_forms(data: EmbeddingData):
    """``II = I(B., .)`` and ``III = I(B., B.)`` as raw ``(..., 2, 2)`` arrays."""
    I = data.I.samples
    II = tc.symmetrize(I @ data.B)
    III = tc.symmetrize(tc.transpose(data.B) @ I @ data.B)
    return II, III


def gauss_residual(data: EmbeddingData) -> np.ndarray:
    """``K_FD(I) + 1 + det B`` on interior samples."""
    K = gaussian_curvature_fd(data.I)
    return K + 1.0 + tc.det(data.B)[interior_slice(data.I.chart)]


def christoffel(chart, g):
    """``Gamma[..., i, j, k]`` on interior samples from central differences."""
    gu, gv = fd_first(chart, g)
    dg = np.stack([gu, gv], axis=-3)  # dg[..., l, a, b] = d_l g_ab
    ginv = tc.inv(g[interior_slice(chart)])
    # Gamma_ljk lowered: 0.5 (d_j g_lk + d_k g_lj - d_l g_jk)
    low = 0.5 * (np.einsum("...jlk->...ljk", dg) + np.einsum("...klj->...ljk", dg) - dg)
    return np.einsum("...il,...ljk->...ijk", ginv, low)


def codazzi_residual(data: EmbeddingData) -> np.ndarray:
    """``|(nabla_x B) d_y - (nabla_y B) d_x|_I`` on interior samples."""
    chart = data.I.chart
    if chart is None:
        raise GridTooCoarse("codazzi residual needs a chart grid")
    nu, nv = chart.shape
    if nu < 5 or (not chart.periodic and nv < 5):
        raise GridTooCoarse("fewer than 3 interior points per direction")
    g = data.I.samples
    B = data.B
    Gam = christoffel(chart, g)
    Bu, Bv = fd_first(chart, B)
    Bi = B[interior_slice(chart)]
    v = Bu[..., :, 1] - Bv[..., :, 0]
    v = v + np.einsum("...il,...l->...i", Gam[..., :, 0, :], Bi[..., :, 1])
    v = v - np.einsum("...il,...l->...i", Gam[..., :, 1, :], Bi[..., :, 0])
    gi = g[interior_slice(chart)]
    return np.sqrt(np.einsum("...i,...ij,...j->...", v, gi, v))


def _flow_operator(B, t):
    c, s = math.cos(t), math.sin(t)
    return c * tc.E + s * B


def normal_flow(data: EmbeddingData, t: float) -> EmbeddingData:
    """Push the surface a distance ``t`` along its normal geodesics."""
    if t == 0:
        return data
    A = _flow_operator(data.B, t)
    d = tc.det(A)
    bad = np.argwhere(np.atleast_1d(d <= FLOW_GUARD))
    if len(bad):
        raise FlowDegenerate(f"det(cos t E + sin t B) <= {FLOW_GUARD:g} at t={t}, "
                             f"sample {tuple(int(i) for i in bad[0])}")
    c, s = math.cos(t), math.sin(t)
    It = tc.pull_metric(data.I.samples, A)
    Bt = (c * data.B - s * tc.E) @ tc.inv(A)
    # B_t commutes with B and is I_t-self-adjoint; clean roundoff in the I_t-symmetric part
    Bt = tc.inv(It) @ tc.symmetrize(It @ Bt)
    ev = None
    if data.I.evaluator is not None and np.allclose(data.B, data.B.reshape(-1, 2, 2)[0]):
        base, A0 = data.I.evaluator, A.reshape(-1, 2, 2)[0]
        ev = lambda u, v: tc.pull_metric(base(u, v), A0)  # noqa: E731
    I_new = data.I.with_samples(It, ev, flow_time=data.I.meta.get("flow_time", 0.0) + t)
    return EmbeddingData(I_new, Bt, classify_convexity(Bt, It))


def flow_eigenvalue(lam, t):
    """Closed-form principal curvature after flowing by ``t``."""
    return (lam - math.tan(t)) / (1.0 + lam * math.tan(t))


def dual_surface(data: EmbeddingData) -> EmbeddingData:
    """Dual surface: ``I* = III``, ``B* = -B^{-1}``, convexity flipped."""
    if np.any(np.abs(tc.det(data.B)) <= 1e-12):
        raise NotStrictlyConvex("B is not invertible")
    _, III = fundamental_forms(data)
    Bs = -tc.inv(data.B)
    flip = {FUTURE: PAST, PAST: FUTURE, NONE: NONE}[data.convexity]
    I_new = MetricField(data.I.chart, III, list(data.I.cone_points), None, dict(data.I.meta))
    return EmbeddingData(I_new, Bs, flip)


@dataclass
class SpacetimeBlock:
    times: np.ndarray
    chart: object
    samples: np.ndarray  # (nt, ..., 3, 3)


def assemble_spacetime(data: EmbeddingData, times: Sequence[float]) -> SpacetimeBlock:
    """Metric ``-dt^2 + I((cos t E + sin t B)., (cos t E + sin t B).)`` at the requested times."""
    times = np.asarray(times, float)
    shape = data.I.samples.shape[:-2]
    out = np.zeros((len(times),) + shape + (3, 3))
    for k, t in enumerate(times):
        if not -math.pi / 2 < t < math.pi / 2:
            raise FlowDegenerate(f"time {t} outside (-pi/2, pi/2)")
        A = _flow_operator(data.B, t)
        d = tc.det(A)
        bad = np.argwhere(np.atleast_1d(d <= FLOW_GUARD))
        if len(bad):
            raise FlowDegenerate(f"guard fails at t={t}, sample {tuple(int(i) for i in bad[0])}")
        out[k, ..., 0, 0] = -1.0
        out[k, ..., 1:, 1:] = tc.pull_metric(data.I.samples, A)
    return SpacetimeBlock(times, data.I.chart, out)


def curvature_ratio_check(g: MetricField, A) -> np.ndarray:
    """``K(g(A., A.)) det A - K(g)`` on interior samples."""
    A = np.asarray(A, float)
    h = g.with_samples(tc.pull_metric(g.samples, A))
    return (gaussian_curvature_fd(h) * tc.det(A)[interior_slice(g.chart)]
            - gaussian_curvature_fd(g))


def k_surface_area(K: float, cone: ConeData) -> float:
    """Gauss-Bonnet area ``(2 pi / K)(chi + sum(theta_i / 2 pi - 1))``."""
    if K > -1:
        raise BadCurvature("K must be <= -1")
    if not admissible(cone):
        raise Inadmissible("cone data violates the admissibility inequality")
    return 2 * math.pi / K * cone.cone_euler_characteristic


def leaf_angle(K: float) -> float:
    """``arctan sqrt(-1 - K)``: normal distance from the totally geodesic slice."""
    return math.atan(math.sqrt(-1.0 - K))


def flow_time(K1: float, K2: float) -> float:
    """Signed normal-flow time taking the K1 leaf to the K2 leaf (Fuchsian case)."""
    return leaf_angle(K1) - leaf_angle(K2)


def fuchsian_leaf(h: MetricField, K: float) -> EmbeddingData:
    if not K < -1:
        raise BadCurvature("leaf curvature must be < -1")
    I = h.scaled(1.0 / abs(K))
    I.meta["K"] = K
    B = np.broadcast_to(math.sqrt(-1.0 - K) * tc.E, h.samples.shape).copy()
    return EmbeddingData(I, B, FUTURE)


def fuchsian_foliation(h: MetricField, K_list: Sequence[float]):
    """Leaves ``I_K = h/|K|``, ``B_K = sqrt(-1-K) E`` of the Fuchsian foliation."""
    return [fuchsian_leaf(h, K) for K in K_list]


# -- CSV -------------------------------------------------------------------------

def _coords(fld: MetricField):
    if fld.chart is not None:
        U, V = fld.chart.grid()
        return U.ravel(), V.ravel()
    n = fld.samples.reshape(-1, 2, 2).shape[0]
    return np.arange(n, dtype=float), np.zeros(n)


def write_embedding_csv(data: EmbeddingData, path) -> None:
    U, V = _coords(data.I)
    I = data.I.samples.reshape(-1, 2, 2)
    B = data.B.reshape(-1, 2, 2)
    with open(path, "w", newline="") as fh:
        fh.write(f"# convexity={data.convexity!r}\n")
        w = csv.writer(fh)
        w.writerow(["u", "v", "I11", "I12", "I22", "B11", "B12", "B21", "B22"])
        for k in range(len(U)):
            w.writerow([repr(float(x)) for x in (U[k], V[k], I[k, 0, 0], I[k, 0, 1], I[k, 1, 1],
                                                 B[k, 0, 0], B[k, 0, 1], B[k, 1, 0], B[k, 1, 1])])


def write_spacetime_csv(block: SpacetimeBlock, data_field: MetricField, path) -> None:
    U, V = _coords(data_field)
    idx = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "u", "v"] + [f"g{i}{j}" for i, j in idx])
        for k, t in enumerate(block.times):
            S = block.samples[k].reshape(-1, 3, 3)
            for m in range(len(U)):
                w.writerow([repr(float(t)), repr(float(U[m])), repr(float(V[m]))]
                           + [repr(float(S[m, i, j])) for i, j in idx])
