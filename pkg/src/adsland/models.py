"""Charts, sampled metric fields and the explicit model geometries.

A :class:`MetricField` keeps the grid samples together with the analytic
evaluator that produced them, so derived fields (pullbacks, landslides) can be
evaluated off-grid by composition instead of interpolation.
"""

from __future__ import annotations

import ast
import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from . import tensor as tc
from .errors import BadAngle, GridTooCoarse, NotConverged, OutOfDomain

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]

POLAR = "polar"
CONFORMAL = "conformal"
DEFAULT_R_MIN = 1e-2


@dataclass(frozen=True)
class Chart:
    """Rectangular coordinate patch with a sampling grid.

    Polar charts are ``(r, alpha)`` with ``alpha`` periodic of period
    ``period`` (the cone angle); the grid covers one full period with the
    endpoint excluded.  Conformal charts are ``(x, y)`` with both endpoints
    included.
    """

    kind: str
    bounds: tuple
    shape: tuple
    period: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (POLAR, CONFORMAL):
            raise ValueError(f"unknown chart kind {self.kind!r}")
        if min(self.shape) < 4:
            raise GridTooCoarse("grid counts must be >= 4 in each direction")
        if self.kind == POLAR:
            if self.period is None or self.period <= 0:
                raise ValueError("polar charts need a positive period")
            if self.bounds[0] <= 0:
                raise ValueError("polar charts must exclude the cone point (r_min > 0)")

    @classmethod
    def polar(cls, theta0, r_min=DEFAULT_R_MIN, r_max=1.0, n_r=64, n_alpha=32):
        return cls(POLAR, (float(r_min), float(r_max), 0.0, float(theta0)),
                   (int(n_r), int(n_alpha)), float(theta0))

    @classmethod
    def conformal(cls, x0, x1, y0, y1, nx=64, ny=64):
        return cls(CONFORMAL, (float(x0), float(x1), float(y0), float(y1)),
                   (int(nx), int(ny)))

    @property
    def periodic(self) -> bool:
        return self.kind == POLAR

    def axes(self):
        u0, u1, v0, v1 = self.bounds
        nu, nv = self.shape
        u = np.linspace(u0, u1, nu)
        if self.periodic:
            v = np.arange(nv) * (self.period / nv)
        else:
            v = np.linspace(v0, v1, nv)
        return u, v

    def spacing(self):
        u, v = self.axes()
        return u[1] - u[0], v[1] - v[0]

    def grid(self):
        u, v = self.axes()
        return np.meshgrid(u, v, indexing="ij")

    def refined(self, factor=2):
        """Same patch with grid spacing divided by ``factor``."""
        nu, nv = self.shape
        nu2 = (nu - 1) * factor + 1
        nv2 = nv * factor if self.periodic else (nv - 1) * factor + 1
        return Chart(self.kind, self.bounds, (nu2, nv2), self.period)


@dataclass
class MetricField:
    """Grid of metric samples over a chart (or a bare batch when ``chart`` is None)."""

    chart: Optional[Chart]
    samples: np.ndarray
    cone_points: list = field(default_factory=list)
    evaluator: Optional[Evaluator] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.samples = tc.check_spd(self.samples)
        if self.chart is not None and self.samples.shape[:2] != tuple(self.chart.shape):
            raise ValueError("samples do not match the chart grid")

    @classmethod
    def from_function(cls, chart: Chart, fn: Evaluator, cone_points=(), meta=None):
        U, V = chart.grid()
        return cls(chart, fn(U, V), list(cone_points), fn, dict(meta or {}))

    def at(self, u, v) -> np.ndarray:
        """Evaluate the metric at arbitrary chart points."""
        if self.evaluator is None:
            raise ValueError("field has no evaluator; off-grid evaluation unavailable")
        return self.evaluator(np.asarray(u, float), np.asarray(v, float))

    def with_samples(self, samples, evaluator=None, **meta) -> "MetricField":
        m = dict(self.meta)
        m.update(meta)
        return MetricField(self.chart, samples, list(self.cone_points), evaluator, m)

    def scaled(self, s: float) -> "MetricField":
        ev = None
        if self.evaluator is not None:
            base = self.evaluator
            ev = lambda u, v: s * base(u, v)  # noqa: E731
        return self.with_samples(s * self.samples, ev)

    @property
    def theta0(self):
        return self.meta.get("theta0")


@dataclass(frozen=True)
class ConeData:
    """Topological data: genus and cone angles (each in (0, pi))."""

    genus: int = 0
    angles: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if self.genus < 0:
            raise ValueError("genus must be nonnegative")

    @property
    def euler_characteristic(self) -> int:
        return 2 - 2 * self.genus

    @property
    def cone_euler_characteristic(self) -> float:
        """``chi(Sigma) + sum(theta_i / 2 pi - 1)``."""
        return self.euler_characteristic + sum(a / (2 * math.pi) - 1.0 for a in self.angles)


def _check_angle(theta0, allow_smooth=True):
    ok = 0.0 < theta0 < math.pi or (allow_smooth and math.isclose(theta0, 2 * math.pi))
    if not ok:
        raise BadAngle(f"cone angle {theta0} not in (0, pi)")


def polar_metric(r, alpha):
    r = np.asarray(r, float)
    return tc.metric(np.ones_like(r), np.zeros_like(r), np.sinh(r) ** 2)


def cone_disk_polar(theta0: float, chart: Chart) -> MetricField:
    """``dr^2 + sinh(r)^2 dalpha^2`` with ``alpha`` of period ``theta0``."""
    _check_angle(theta0)
    if chart.kind != POLAR or not math.isclose(chart.period, theta0):
        raise ValueError("cone_disk_polar needs a polar chart with period theta0")
    return MetricField.from_function(chart, polar_metric, [((0.0, 0.0), theta0)],
                                     {"kind": POLAR, "theta0": theta0})


def conformal_factor(theta0: float, x, y):
    """Conformal factor of the cone disk in the coordinate ``z``."""
    t = theta0 / (2 * math.pi)
    rho2 = np.asarray(x, float) ** 2 + np.asarray(y, float) ** 2
    q = rho2 ** t / t ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        return 4.0 * rho2 ** (t - 1.0) / (1.0 - q) ** 2


def _conformal_evaluator(theta0):
    def ev(x, y):
        lam = conformal_factor(theta0, x, y)
        return tc.metric(lam, np.zeros_like(lam), lam)
    return ev


def _check_conformal_domain(theta0, chart):
    t = theta0 / (2 * math.pi)
    X, Y = chart.grid()
    rho2 = X ** 2 + Y ** 2
    q = rho2 ** t / t ** 2
    if np.any(rho2 == 0) or np.any(q >= 1):
        raise OutOfDomain("grid leaves 0 < |z|^{2t}/t^2 < 1")


def cone_disk_conformal(theta0: float, chart: Chart) -> MetricField:
    """The cone disk in the conformal coordinate ``z`` (``theta0 = 2 pi`` is Poincare)."""
    _check_angle(theta0)
    if chart.kind != CONFORMAL:
        raise ValueError("cone_disk_conformal needs a conformal chart")
    _check_conformal_domain(theta0, chart)
    return MetricField.from_function(chart, _conformal_evaluator(theta0),
                                     [((0.0, 0.0), theta0)],
                                     {"kind": CONFORMAL, "theta0": theta0})


def poincare_disk(chart: Chart) -> MetricField:
    return cone_disk_conformal(2 * math.pi, chart)


def _holomorphic_jacobian(dw):
    """Real 2x2 matrix of multiplication by the complex number ``dw``."""
    out = np.empty(np.shape(dw) + (2, 2))
    out[..., 0, 0] = dw.real
    out[..., 0, 1] = -dw.imag
    out[..., 1, 0] = dw.imag
    out[..., 1, 1] = dw.real
    return out


def chart_change_power(source: MetricField, t: float) -> MetricField:
    """Pull a conformal-chart field back by ``z -> z^t / t`` (principal branch).

    The result lives on the source chart's grid.  Points on or across the
    negative real axis are rejected.
    """
    if not 0.0 < t <= 1.0:
        raise ValueError("t must lie in (0, 1]")
    chart = source.chart
    if chart is None or chart.kind != CONFORMAL:
        raise ValueError("chart_change_power needs a conformal source field")
    if t == 1.0:
        return source
    x0, x1, y0, y1 = chart.bounds
    if x0 <= 0 and y0 <= 0 <= y1:
        raise OutOfDomain("grid meets the branch cut along the negative real axis")
    base = source.evaluator
    if base is None:
        raise ValueError("source field needs an evaluator")

    def ev(x, y):
        z = np.asarray(x, float) + 1j * np.asarray(y, float)
        w = z ** t / t
        D = _holomorphic_jacobian(z ** (t - 1.0))
        return tc.symmetrize(tc.transpose(D) @ base(w.real, w.imag) @ D)

    theta_src = source.theta0 if source.theta0 is not None else 2 * math.pi
    theta = t * theta_src
    return MetricField.from_function(chart, ev, [((0.0, 0.0), theta)],
                                     {"kind": CONFORMAL, "theta0": theta})


@dataclass
class AdsSlice:
    spatial: MetricField
    lapse: float
    time: float


def ads_cone_slice(theta0: float, t: float, chart: Chart) -> AdsSlice:
    """Constant-time slice of ``-dt^2 + cos^2 t (dr^2 + sinh^2 r dalpha^2)``."""
    _check_angle(theta0)
    if not -math.pi / 2 < t < math.pi / 2:
        raise ValueError("time must lie in (-pi/2, pi/2)")
    c2 = math.cos(t) ** 2
    spatial = cone_disk_polar(theta0, chart)
    scaled = spatial.scaled(c2)
    scaled.meta["time"] = t
    return AdsSlice(scaled, -1.0, t)


# -- finite-difference curvature ------------------------------------------------

def _stencil(chart: Chart, X: np.ndarray):
    """Pad periodic directions so every difference below is a plain interior one."""
    if chart.periodic:
        X = np.concatenate([X[:, -1:], X, X[:, :1]], axis=1)
    return X


def interior_slice(chart: Chart):
    """Index of the samples on which FD quantities are reported."""
    if chart.periodic:
        return (slice(1, -1), slice(None))
    return (slice(1, -1), slice(1, -1))


def _check_resolution(chart: Chart):
    nu, nv = chart.shape
    if nu - 2 < 3 or (not chart.periodic and nv - 2 < 3):
        raise GridTooCoarse("fewer than 3 interior points per direction")


def fd_first(chart: Chart, X: np.ndarray):
    """Central first derivatives of a grid quantity, cropped to the interior."""
    du, dv = chart.spacing()
    P = _stencil(chart, X)
    Xu = (P[2:, 1:-1] - P[:-2, 1:-1]) / (2 * du)
    Xv = (P[1:-1, 2:] - P[1:-1, :-2]) / (2 * dv)
    return Xu, Xv


def brioschi(E, F, G, Eu, Ev, Fu, Fv, Gu, Gv, Evv, Fuv, Guu):
    """Gaussian curvature from metric coefficients and their derivatives."""
    m1 = np.empty(E.shape + (3, 3))
    m1[..., 0, 0] = -0.5 * Evv + Fuv - 0.5 * Guu
    m1[..., 0, 1] = 0.5 * Eu
    m1[..., 0, 2] = Fu - 0.5 * Ev
    m1[..., 1, 0] = Fv - 0.5 * Gu
    m1[..., 1, 1] = E
    m1[..., 1, 2] = F
    m1[..., 2, 0] = 0.5 * Gv
    m1[..., 2, 1] = F
    m1[..., 2, 2] = G
    m2 = np.zeros(E.shape + (3, 3))
    m2[..., 0, 1] = m2[..., 1, 0] = 0.5 * Ev
    m2[..., 0, 2] = m2[..., 2, 0] = 0.5 * Gu
    m2[..., 1, 1] = E
    m2[..., 1, 2] = m2[..., 2, 1] = F
    m2[..., 2, 2] = G
    return (np.linalg.det(m1) - np.linalg.det(m2)) / (E * G - F * F) ** 2


def gaussian_curvature_fd(fld: MetricField) -> np.ndarray:
    """Second-order central Brioschi curvature on the interior samples."""
    chart = fld.chart
    if chart is None:
        raise GridTooCoarse("field has no chart grid")
    _check_resolution(chart)
    du, dv = chart.spacing()
    s = fld.samples
    E, F, G = (_stencil(chart, s[..., i, j]) for i, j in ((0, 0), (0, 1), (1, 1)))
    c = (slice(1, -1), slice(1, -1))

    def d_u(X):
        return (X[2:, 1:-1] - X[:-2, 1:-1]) / (2 * du)

    def d_v(X):
        return (X[1:-1, 2:] - X[1:-1, :-2]) / (2 * dv)

    Evv = (E[1:-1, 2:] - 2 * E[c] + E[1:-1, :-2]) / dv ** 2
    Guu = (G[2:, 1:-1] - 2 * G[c] + G[:-2, 1:-1]) / du ** 2
    Fuv = (F[2:, 2:] - F[2:, :-2] - F[:-2, 2:] + F[:-2, :-2]) / (4 * du * dv)
    return brioschi(E[c], F[c], G[c], d_u(E), d_v(E), d_u(F), d_v(F),
                    d_u(G), d_v(G), Evv, Fuv, Guu)


# -- cone angle estimate -------------------------------------------------------

def _radial_profile(fld: MetricField, cone_point):
    """Return ``(radius(s), circumference(s))`` along chart circles about the cone."""
    chart = fld.chart
    cx, cy = cone_point
    if chart is not None and chart.kind == POLAR:
        period = chart.period

        def radius(s):
            def f(r):
                a = np.linspace(0.0, period, 64, endpoint=False)
                g = fld.at(np.full_like(a, r), a)
                return float(np.mean(np.sqrt(g[..., 0, 0])))
            return integrate.quad(f, 0.0, s, epsabs=0, epsrel=1e-13, limit=200)[0]

        def circumference(s):
            def f(a):
                return float(np.sqrt(fld.at(np.array(s), np.array(a))[..., 1, 1]))
            return integrate.quad(f, 0.0, period, epsabs=0, epsrel=1e-13, limit=200)[0]

        return radius, circumference

    def radius(s):
        phis = np.linspace(0.0, 2 * math.pi, 16, endpoint=False)
        vals = []
        for phi in phis:
            n = np.array([math.cos(phi), math.sin(phi)])

            def f(r):
                g = fld.at(np.array(cx + r * n[0]), np.array(cy + r * n[1]))
                return float(np.sqrt(n @ g @ n))
            vals.append(integrate.quad(f, 0.0, s, epsabs=0, epsrel=1e-12, limit=200)[0])
        return float(np.mean(vals))

    def circumference(s):
        def f(phi):
            tau = np.array([-math.sin(phi), math.cos(phi)])
            g = fld.at(np.array(cx + s * math.cos(phi)), np.array(cy + s * math.sin(phi)))
            return float(np.sqrt(tau @ g @ tau)) * s
        return integrate.quad(f, 0.0, 2 * math.pi, epsabs=0, epsrel=1e-13, limit=200)[0]

    return radius, circumference


def cone_angle_estimate(fld: MetricField, cone_point=(0.0, 0.0), r_min=DEFAULT_R_MIN,
                        levels: int = 3, tol: float = 1e-3) -> float:
    """Limit of circumference/radius of small circles about ``cone_point``.

    Geodesic radii ``8 r_min, 4 r_min, 2 r_min`` are located along chart rays
    and the ratios are Richardson-extrapolated in the squared radius.
    """
    radius, circumference = _radial_profile(fld, cone_point)
    ratios = []
    for k in range(levels):
        rho = r_min * 2 ** (levels - k)
        hi = 1e-12
        while radius(hi) < rho:
            hi *= 2.0
            if hi > 1e6:
                raise NotConverged("radius search diverged")
        s = optimize.brentq(lambda x: radius(x) - rho, hi / 2 if hi > 1e-12 else 0.0, hi,
                            xtol=1e-15, rtol=1e-14)
        ratios.append(circumference(s) / rho)
    table = [ratios]
    for j in range(1, levels):
        prev = table[-1]
        f = 4.0 ** j
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)])
    last, before = table[-1][0], table[-2][-1]
    if abs(last - before) > tol:
        raise NotConverged(f"successive estimates differ by {abs(last - before):.2e}")
    return last


# -- scalar formulas -------------------------------------------------------------

def collar_widths(lengths: Sequence[float], cone: ConeData):
    """Collar widths about closed geodesics (``w``) and cone points (``v``)."""
    for a in cone.angles:
        if not 0.0 < a < math.pi:
            raise BadAngle(f"cone angle {a} not in (0, pi)")
    if any(l <= 0 for l in lengths):
        raise ValueError("geodesic lengths must be positive")
    largest = max(cone.angles) if cone.angles else 0.0
    w = [math.asinh(math.cos(largest) / math.sinh(l / 2)) for l in lengths]
    v = [math.acosh(1.0 / math.sin(a)) for a in cone.angles]
    return w, v


def admissible(cone: ConeData) -> bool:
    """Whether ``2 pi (2 - 2g) + sum(theta_i - 2 pi) < 0``."""
    return 2 * math.pi * (2 - 2 * cone.genus) + sum(a - 2 * math.pi for a in cone.angles) < 0


# -- CSV -------------------------------------------------------------------------

def _meta_line(meta: dict) -> str:
    def plain(v):
        return v.item() if isinstance(v, np.generic) else v
    return "# " + " ".join(f"{k}={plain(meta[k])!r}" for k in sorted(meta))


def write_field_csv(fld: MetricField, path, **extra) -> None:
    """One row per sample: chart coordinates then ``e11, e12, e22``."""
    meta = {"kind": fld.chart.kind if fld.chart else "samples", "theta0": fld.theta0}
    meta.update(extra)
    if fld.chart is not None:
        U, V = fld.chart.grid()
    else:
        idx = np.indices(fld.samples.shape[:-2])
        U, V = (idx[0], idx[1]) if idx.shape[0] > 1 else (idx[0], np.zeros_like(idx[0]))
    s = fld.samples
    with open(path, "w", newline="") as fh:
        fh.write(_meta_line(meta) + "\n")
        w = csv.writer(fh)
        w.writerow(["u", "v", "e11", "e12", "e22"])
        for row in zip(U.ravel(), V.ravel(), s[..., 0, 0].ravel(), s[..., 0, 1].ravel(),
                       s[..., 1, 1].ravel()):
            w.writerow([repr(float(x)) for x in row])


def read_field_csv(path):
    """Inverse of :func:`write_field_csv`: returns ``(meta, coords, samples)``."""
    with open(path) as fh:
        first = fh.readline().lstrip("#").split()
        meta = {}
        for item in first:
            k, _, v = item.partition("=")
            meta[k] = ast.literal_eval(v)
        rows = np.array([[float(x) for x in r] for r in csv.reader(fh) if r and r[0] != "u"])
    coords = rows[:, :2]
    samples = tc.metric(rows[:, 2], rows[:, 3], rows[:, 4])
    return meta, coords, samples
