"""Reference fixtures shared by the tests, the acceptance suite and the CLI.

* ``fuchsian-cone-disk``: the cone disk ``dr^2 + sinh^2 r dalpha^2`` paired with itself.
* ``radial-pair``: a normalized pair on a cone annulus with the explicit
  Codazzi morphism ``b = diag(1/q, q)``, ``q^2 = 1 + c / sinh^2 r`` in the
  orthonormal frame ``(d_r, d_alpha / sinh r)``.  ``h(b., b.)`` is again
  hyperbolic because ``b`` is Codazzi with determinant 1.
* ``cone4``: genus 0 with four cone angles ``pi/2``.
* ``stretch``: a one-parameter anisotropic stretch family on a cone annulus mesh.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import models as mg
from . import tensor as tc
from .harmonic.mesh import annulus_mesh, disk_mesh, square_mesh
from .harmonic.pair import ConformalFamily, stretch_family, stretch_metric
from .landslide import MetricPair

CONE4 = mg.ConeData(0, (math.pi / 2,) * 4)
DEFAULT_THETA = math.pi / 2
PAIR_CONSTANT = 0.5
FIXTURES = ("fuchsian-cone-disk", "radial-pair", "cone4", "stretch")


def reference_chart(theta0=DEFAULT_THETA, spacing=1.0 / 128, r_min=1.0, r_max=2.0):
    """Polar cone annulus used for finite-difference checks (away from the cone point)."""
    n_r = int(round((r_max - r_min) / spacing)) + 1
    n_a = max(8, int(round(theta0 / spacing / 4)))
    return mg.Chart.polar(theta0, r_min, r_max, n_r, n_a)


def radial_q2(r, c=PAIR_CONSTANT):
    return 1.0 + c / np.sinh(r) ** 2


def radial_pair_polar(r, alpha, c=PAIR_CONSTANT):
    """``(h, h2, b)`` of the radial pair in polar coordinates."""
    r = np.asarray(r, float)
    s2 = np.sinh(r) ** 2
    q = np.sqrt(radial_q2(r, c))
    z = np.zeros_like(r)
    h = tc.metric(np.ones_like(r), z, s2)
    h2 = tc.metric(1.0 / q ** 2, z, q ** 2 * s2)
    b = np.zeros(r.shape + (2, 2))
    b[..., 0, 0] = 1.0 / q
    b[..., 1, 1] = q
    return h, h2, b


def radial_pair_fields(chart: mg.Chart, c=PAIR_CONSTANT) -> MetricPair:
    theta0 = chart.period
    h = mg.cone_disk_polar(theta0, chart)
    h2 = mg.MetricField.from_function(chart, lambda r, a: radial_pair_polar(r, a, c)[1],
                                      h.cone_points, {"kind": mg.POLAR, "theta0": theta0})
    return MetricPair(h, h2)


def fuchsian_pair_fields(chart: mg.Chart) -> MetricPair:
    h = mg.cone_disk_polar(chart.period, chart)
    return MetricPair(h, h)


# -- scaled conformal cone chart ----------------------------------------------

@dataclass(frozen=True)
class ScaledCone:
    """Conformal cone disk in a chart ``zeta`` where ``|zeta| = 1`` is hyperbolic radius ``R``.

    ``z = kappa zeta`` with ``kappa = t^{1/t} tanh(R/2)^{1/t}``.
    """

    theta0: float = DEFAULT_THETA
    radius: float = 1.0

    @property
    def t(self) -> float:
        return self.theta0 / (2 * math.pi)

    @property
    def kappa(self) -> float:
        t = self.t
        return t ** (1 / t) * math.tanh(self.radius / 2) ** (1 / t)

    def metric(self, x, y):
        k = self.kappa
        lam = k * k * mg.conformal_factor(self.theta0, k * np.asarray(x), k * np.asarray(y))
        return tc.metric(lam, np.zeros_like(lam), lam)

    def distance(self, x, y):
        """Hyperbolic distance to the cone point."""
        rho = np.hypot(x, y)
        return 2 * np.arctanh(math.tanh(self.radius / 2) * rho ** self.t)

    def morphism(self, x, y, c=PAIR_CONSTANT):
        """The radial-pair ``b`` in the ``zeta`` chart (radial eigenvalue ``1/q``)."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        q = np.sqrt(radial_q2(self.distance(x, y), c))
        rho = np.hypot(x, y)
        nx, ny = x / rho, y / rho
        p = 1.0 / q
        b = np.empty(x.shape + (2, 2))
        b[..., 0, 0] = p * nx * nx + q * ny * ny
        b[..., 0, 1] = b[..., 1, 0] = (p - q) * nx * ny
        b[..., 1, 1] = p * ny * ny + q * nx * nx
        return b

    def partner(self, c=PAIR_CONSTANT):
        """``h(b., b.)`` as a metric callable."""
        def h2(x, y):
            b = self.morphism(x, y, c)
            return tc.pull_metric(self.metric(x, y), b)
        return h2


def rotation_fixture(n: int = 48, inner: float = 0.1, theta0=DEFAULT_THETA, radius=1.0,
                     c=PAIR_CONSTANT):
    """Annulus mesh (about 2k faces for ``n = 48``) with both boundary rings pinned,
    plus the radial pair in the scaled cone chart.

    Returns ``(vertices, faces, pinned, h, h2)``.
    """
    cone = ScaledCone(theta0, radius)
    V, F, pinned = cone_annulus_mesh(n, inner)
    return V, F, pinned, cone.metric, cone.partner(c)


def cone_disk_mesh(n: int = 32, core: float = 0.05):
    """Disk mesh graded toward the cone point at the origin; center and rim pinned."""
    V, F, center, outer = disk_mesh(core, 1.0, n)
    return V, F, np.concatenate([[center], outer])


def cone_annulus_mesh(n: int = 48, inner: float = 0.1):
    """Annulus about the cone point; both rings pinned (the cone itself is excluded)."""
    V, F, ring_in, ring_out = annulus_mesh(inner, 1.0, n)
    return V, F, np.concatenate([ring_in, ring_out])


def stretch_fixture(n: int = 32, theta0=DEFAULT_THETA, radius=1.0, bounds=(-0.5, 0.5),
                    inner: float = 0.1) -> ConformalFamily:
    cone = ScaledCone(theta0, radius)
    V, F, pinned = cone_annulus_mesh(n, inner)
    fam = stretch_family(cone.metric, V, F, pinned, bounds)
    fam.meta.update(theta0=theta0, radius=radius)
    return fam


def stretched_target(base, a: float):
    """``B_a^T H(B_a x) B_a`` with ``B_a = diag(e^{a/2}, e^{-a/2})``: a hyperbolic metric
    isometric to ``H`` by a linear change of chart."""
    ea, eb = math.exp(a / 2), math.exp(-a / 2)
    B = np.diag([ea, eb])

    def h(x, y):
        return B @ base(ea * np.asarray(x), eb * np.asarray(y)) @ B

    return h


# -- cone4: the doubled hyperbolic rectangle ----------------------------------------

def klein(x, y):
    """Klein model of the hyperbolic plane (geodesics are chords)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    w = 1.0 - x * x - y * y
    return tc.metric(1 / w + x * x / w ** 2, x * y / w ** 2, 1 / w + y * y / w ** 2)


def rectangle_height(x: float) -> float:
    """Half-height ``y`` of the Klein rectangle ``[-x, x] x [-y, y]`` with corner angles pi/4.

    The corner angle satisfies ``cos = xy / sqrt((1-x^2)(1-y^2))``, which gives
    ``y^2 = (1 - x^2) / (1 + x^2)``.
    """
    return math.sqrt((1 - x * x) / (1 + x * x))


REGULAR_HALF = math.sqrt(math.sqrt(2) - 1)


def rectangle_metric(x: float = REGULAR_HALF):
    """Hyperbolic metric on the chart square ``[-1, 1]^2`` pulled back from the Klein
    rectangle of half-width ``x``.

    The edges are geodesics and the corner angles pi/4, so the double of the
    square along its edges is a sphere with four cone points of angle pi/2.
    """
    A = np.diag([x, rectangle_height(x)])

    def h(u, v):
        return A @ klein(x * np.asarray(u), A[1, 1] * np.asarray(v)) @ A

    return h


def pillowcase_mesh(n: int = 16, pattern: str = "alternating"):
    """One sheet of the doubled square: corners pinned, edge vertices sliding.

    A harmonic map of the closed double that commutes with the reflection
    swapping the sheets maps each edge to itself, so it is the minimizer on
    one sheet with the edge vertices free to slide.
    Returns ``(vertices, faces, pinned, sliders)``.
    """
    V, F, B = square_mesh(n, 1.0, pattern=pattern)
    on_x = np.isclose(np.abs(V[B, 0]), 1.0)
    on_y = np.isclose(np.abs(V[B, 1]), 1.0)
    pinned = B[on_x & on_y]
    sliders = {int(i): (0.0, 1.0) for i in B[on_x & ~on_y]}
    sliders.update({int(i): (1.0, 0.0) for i in B[on_y & ~on_x]})
    return V, F, pinned, sliders


def cone4_family(n: int = 16, bounds=(-0.5, 0.5)) -> ConformalFamily:
    """Stretch family through the regular rectangle metric on the pillowcase sheet."""
    V, F, pinned, sliders = pillowcase_mesh(n)
    fam = stretch_family(rectangle_metric(), V, F, pinned, bounds, sliders)
    fam.meta.update(cone=CONE4)
    return fam


def cone4_pair(x: float = 0.75):
    """Two rectangle metrics exchanged by ``u <-> v`` (half-widths ``x`` and ``y(x)``)."""
    return rectangle_metric(x), rectangle_metric(rectangle_height(x))


def poincare(x, y):
    lam = 4.0 / (1.0 - np.asarray(x) ** 2 - np.asarray(y) ** 2) ** 2
    return tc.metric(lam, np.zeros_like(lam), lam)


def bochner_fixture(n: int, stretch: float = 1.3, half: float = 0.4):
    """Poincare square with a linearly stretched hyperbolic target; boundary pinned."""
    V, F, B = square_mesh(n, half, pattern="uniform")
    target = stretched_target(poincare, 2 * math.log(stretch))
    return V, F, B, poincare, target


__all__ = [
    "CONE4", "FIXTURES", "ScaledCone", "reference_chart", "radial_pair_fields",
    "radial_pair_polar", "fuchsian_pair_fields", "rotation_fixture", "cone_disk_mesh", "cone_annulus_mesh",
    "stretch_fixture", "stretched_target", "poincare", "bochner_fixture", "stretch_metric",
    "klein", "rectangle_height", "rectangle_metric", "pillowcase_mesh", "cone4_family", "cone4_pair",
]
