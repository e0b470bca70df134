"""Quantitative invariant checks shared by the acceptance suite and the CLI.

Each ``criterion_*`` function returns a list of :class:`Check` records with
their default tolerances.  Tolerances can be overridden by name afterwards
(:func:`apply_overrides`), which recomputes pass/fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate, optimize

from . import fixtures as fx
from . import models as mg
from . import tensor as tc
from .harmonic import (
    TriMeshMap,
    bochner_residual,
    density_decomposition,
    differentials,
    dirichlet_energy,
    harmonic_solve,
    hopf_differential,
    hopf_rotation_check,
    identity_noise_floor,
    minimize_pair_energy,
    pullback_from_density,
    signed_areas,
)
from .harmonic.energy import face_geometry
from .landslide import (
    beta,
    dual_curvature,
    k_surface_from_pair,
    landslide_field,
    landslide_point,
    maximal_surface_from_pair,
    mess_metrics,
)
from .surfaces import (
    EmbeddingData,
    dual_surface,
    flow_eigenvalue,
    flow_time,
    fuchsian_leaf,
    gauss_residual,
    k_surface_area,
    normal_flow,
)

LE, GE = "<=", ">="

# w(pi/3, l=2) = asinh(cos(pi/3)/sinh(1)), evaluated as log(x + sqrt(x^2 + 1)) with
# 40-digit decimal arithmetic
COLLAR_W_ORACLE = 0.41356845081927838
COLLAR_W_QUOTED = 0.414318
COLLAR_V_QUOTED = 1.316958


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    op: str = LE

    @property
    def passed(self) -> bool:
        v = self.value
        if not math.isfinite(v):
            return False
        return v <= self.tol if self.op == LE else v >= self.tol

    def as_dict(self) -> dict:
        return {"name": self.name, "value": float(self.value), "tol": float(self.tol),
                "op": self.op, "pass": bool(self.passed)}


def apply_overrides(checks, overrides: dict):
    return [replace(c, tol=float(overrides[c.name])) if c.name in overrides else c for c in checks]


def _rel(a, b):
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    scale = np.maximum(np.abs(b).max(axis=(-2, -1)), 1.0) if b.ndim >= 2 else np.maximum(np.abs(b), 1.0)
    d = np.abs(a - b)
    if d.ndim >= 2:
        d = d.max(axis=(-2, -1))
    return float(np.max(d / scale))


# -- random samples ------------------------------------------------------------------

def _rotation(th):
    c, s = np.cos(th), np.sin(th)
    R = np.empty(th.shape + (2, 2))
    R[..., 0, 0], R[..., 0, 1], R[..., 1, 0], R[..., 1, 1] = c, -s, s, c
    return R


def random_spd(rng, n, spread=1.5):
    lam = np.exp(rng.uniform(-spread, spread, (n, 2)))
    R = _rotation(rng.uniform(0, math.pi, n))
    return tc.symmetrize(R @ (lam[:, :, None] * tc.transpose(R)))


def random_morphism(rng, h, spread=1.0):
    """Random ``h``-self-adjoint ``b`` with det 1 and positive eigenvalues."""
    n = len(h)
    p, q = rng.uniform(-spread, spread, (2, n))
    nrm = np.hypot(p, q)
    ch, sh = np.cosh(nrm), np.where(nrm > 0, np.sinh(nrm) / np.where(nrm > 0, nrm, 1), 1.0)
    X = tc.metric(ch + sh * p, sh * q, ch - sh * p)
    r = tc.spd_principal_sqrt(h)
    return tc.inv(r) @ X @ r


def random_pairs(rng, n):
    h = random_spd(rng, n)
    b = random_morphism(rng, h)
    return h, tc.pull_metric(h, b), b


# -- criteria ------------------------------------------------------------------------

def criterion_1(seed=1, n=10_000):
    """Landslide flow axioms on random pointwise pairs."""
    rng = np.random.default_rng(seed)
    h, h2, _ = random_pairs(rng, n)
    a1, a2 = rng.uniform(-2 * math.pi, 2 * math.pi, 2)
    comp_err = 0.0
    for a, a_ in ((a1, a2), (0.7, -2.1), (math.pi / 3, math.pi / 2)):
        x, y = landslide_point(h, h2, a)
        x2, y2 = landslide_point(x, y, a_)
        z, w = landslide_point(h, h2, a + a_)
        comp_err = max(comp_err, _rel(x2, z), _rel(y2, w))
    x0, y0 = landslide_point(h, h2, 0.0)
    xp, yp = landslide_point(h, h2, math.pi)
    x2p, y2p = landslide_point(h, h2, 2 * math.pi)
    return [
        Check("landslide_composition", comp_err, 1e-10),
        Check("landslide_identity", max(_rel(x0, h), _rel(y0, h2)), 1e-10),
        Check("landslide_pi_swap", max(_rel(xp, h2), _rel(yp, h)), 1e-10),
        Check("landslide_2pi_identity", max(_rel(x2p, h), _rel(y2p, h2)), 1e-10),
    ]


def criterion_2(seed=1, n=10_000):
    rng = np.random.default_rng(seed)
    h, h2, b = random_pairs(rng, n)
    alphas = rng.uniform(-2 * math.pi, 2 * math.pi, 8)
    det_beta = max(float(np.max(np.abs(tc.det(beta(h, b, a)) - 1.0))) for a in alphas)
    dh = tc.det(h)
    det_pres = max(float(np.max(np.abs(tc.det(landslide_point(h, h2, a)[0]) - dh) / dh))
                   for a in alphas)
    return [Check("beta_unimodular", det_beta, 1e-12),
            Check("landslide_det_preserved", det_pres, 1e-9)]


def _landslide_curvature_error(spacing, alpha):
    pair = fx.radial_pair_fields(fx.reference_chart(spacing=spacing))
    res = landslide_field(pair, alpha)
    return max(float(np.max(np.abs(mg.gaussian_curvature_fd(f) + 1.0)))
               for f in (res.h_alpha, res.h_alpha_pi))


def criterion_3(alphas=(math.pi / 3, math.pi / 2, 2 * math.pi / 3), spacing=1.0 / 128):
    """FD curvature of landslid radial-pair fields and its refinement rate."""
    out = []
    for a in alphas:
        tag = f"{a / math.pi:.4g}pi"
        coarse = _landslide_curvature_error(2 * spacing, a)
        fine = _landslide_curvature_error(spacing, a)
        out.append(Check(f"h_alpha_curvature[{tag}]", fine, 1e-3))
        out.append(Check(f"h_alpha_curvature_rate[{tag}]", coarse / fine, 3.5, GE))
    return out


def _radial_k_surface(K, spacing=1.0 / 64):
    return k_surface_from_pair(fx.radial_pair_fields(fx.reference_chart(spacing=spacing)), K)


def criterion_4(Ks=(-1.1, -4 / 3, -2.0, -5.0, -100.0)):
    inv_err = 0.0
    kstar_err = 0.0
    for K in Ks:
        d = _radial_k_surface(K)
        dd = dual_surface(dual_surface(d))
        inv_err = max(inv_err, _rel(dd.I.samples, d.I.samples), _rel(dd.B, d.B))
        ds = dual_surface(d)
        kstar = dual_curvature(K)
        # curvature read from the dual's embedding data through the Gauss equation
        kstar_err = max(kstar_err, float(np.max(np.abs(ds.curvature - kstar))) / max(1, abs(kstar)),
                        abs(dual_curvature(kstar) - K) / max(1, abs(K)))
    grid = -np.exp(np.linspace(math.log(1.001), math.log(1000.0), 4001))
    gap = np.array([dual_curvature(K) - K for K in grid])
    crossings = int(np.sum(np.sign(gap[1:]) != np.sign(gap[:-1])))
    root = optimize.brentq(lambda K: dual_curvature(K) - K, -10.0, -1.01, xtol=1e-15)
    return [
        Check("dual_involution", inv_err, 1e-12),
        Check("dual_curvature", kstar_err, 1e-12),
        Check("dual_fixed_point", abs(root + 2.0) + abs(crossings - 1), 1e-12),
    ]


def _batch_embedding(I, B):
    return EmbeddingData(mg.MetricField(None, I), B)


def criterion_5(seed=2):
    rng = np.random.default_rng(seed)
    lams = np.array([0.1, 0.5, 1.0, 2.0, 5.0])
    ts = np.array([0.05, 0.3, 0.7, 1.0, 1.3])
    L1, L2 = np.meshgrid(lams, lams[::-1], indexing="ij")
    l1, l2 = L1.ravel(), L2.ravel()
    n = len(l1)
    I = random_spd(rng, n)
    r = tc.spd_principal_sqrt(I)
    R = _rotation(rng.uniform(0, math.pi, n))
    D = np.zeros((n, 2, 2))
    D[:, 0, 0], D[:, 1, 1] = l1, l2
    B = tc.inv(r) @ R @ D @ tc.transpose(R) @ r
    data = _batch_embedding(I, B)
    eig_err = 0.0
    for t in ts:
        out = normal_flow(data, t)
        lam, mu, _ = tc.eigen_pair(out.B, out.I.samples)
        want = np.sort(np.column_stack([flow_eigenvalue(l1, t), flow_eigenvalue(l2, t)]), axis=1)
        got = np.column_stack([mu, lam])
        eig_err = max(eig_err, float(np.max(np.abs(got - want) / np.maximum(1, np.abs(want)))))
    semi = 0.0
    for t1, t2 in ((0.2, 0.5), (0.4, 0.9), (0.3, -0.25)):
        a = normal_flow(normal_flow(data, t1), t2)
        b = normal_flow(data, t1 + t2)
        semi = max(semi, _rel(a.I.samples, b.I.samples), _rel(a.B, b.B))
    half = normal_flow(data, math.pi / 2)
    dual = dual_surface(data)
    dual_err = max(_rel(half.I.samples, dual.I.samples), _rel(half.B, dual.B))
    return [Check("flow_eigenvalues", eig_err, 1e-12),
            Check("flow_semigroup", semi, 1e-10),
            Check("flow_half_pi_dual", dual_err, 1e-10)]


def criterion_6(spacing=1.0 / 64):
    chart = fx.reference_chart(spacing=spacing)
    h = mg.cone_disk_polar(chart.period, chart)
    K1, K2 = -4.0, -4.0 / 3.0
    t = flow_time(K1, K2)
    moved = normal_flow(fuchsian_leaf(h, K1), t)
    target = fuchsian_leaf(h, K2)
    leaf_err = max(_rel(moved.I.samples, target.I.samples), _rel(moved.B, target.B))
    # numerical area of a leaf over the reference annulus against its closed form
    r, _ = chart.axes()
    da = chart.spacing()[1]
    dens = np.sqrt(tc.det(target.I.samples)).sum(axis=1) * da
    area = integrate.simpson(dens, x=r)
    r0, r1 = chart.bounds[:2]
    exact = chart.period * (math.cosh(r1) - math.cosh(r0)) / abs(K2)
    closed = [
        abs(k_surface_area(-2.0, mg.ConeData(2)) - 2 * math.pi),
        abs(k_surface_area(-4.0, fx.CONE4) - 2 * math.pi / -4.0 * (2 + 4 * (0.25 - 1))),
        abs(k_surface_area(-4 / 3, mg.ConeData(1, (math.pi / 2,)))
            - 2 * math.pi / (-4 / 3) * (0 + (0.25 - 1))),
    ]
    return [Check("foliation_flow_time", abs(t - math.pi / 6), 1e-15),
            Check("foliation_leaf_match", leaf_err, 1e-10),
            Check("leaf_area_closed_form", max(closed), 1e-14),
            Check("leaf_area_numeric", abs(area - exact) / exact, 1e-8)]


def _gauss_error(K, spacing):
    return float(np.max(np.abs(gauss_residual(_radial_k_surface(K, spacing)))))


def criterion_7(Ks=(-1.5, -2.0, -4.0), spacing=1.0 / 128):
    out = []
    for K in Ks:
        coarse, fine = _gauss_error(K, 2 * spacing), _gauss_error(K, spacing)
        out.append(Check(f"gauss_residual[K={K:g}]", fine, 1e-3))
        out.append(Check(f"gauss_residual_rate[K={K:g}]", coarse / fine, 3.5, GE))
    return out


def criterion_8(alphas=(math.pi / 3, math.pi / 2, 2 * math.pi / 3), spacing=1.0 / 64):
    pair = fx.radial_pair_fields(fx.reference_chart(spacing=spacing))
    out = []
    for a in alphas:
        K = -1.0 / math.cos(a / 2) ** 2
        left, right = mess_metrics(k_surface_from_pair(pair, K))
        err = max(_rel(left.samples, landslide_field(pair, a).h_alpha.samples),
                  _rel(right.samples, landslide_field(pair, -a).h_alpha.samples))
        out.append(Check(f"mess_landslide[{a / math.pi:.4g}pi]", err, 1e-10))
    return out


def criterion_9(seed=3, n=10_000):
    rng = np.random.default_rng(seed)
    h, _, b = random_pairs(rng, n)
    I1, B1 = maximal_surface_from_pair(h, b)
    Jp = tc.complex_structure(I1)
    tr = float(np.max(np.abs(tc.trace(B1)) / np.maximum(1, tc._scale(B1))))
    lhs = -tc.det(tc.E + Jp @ B1)
    rhs = -1.0 - tc.det(B1)
    gauss = float(np.max(np.abs(lhs - rhs) / np.maximum(1, np.abs(rhs))))
    return [Check("maximal_traceless", tr, 1e-12), Check("maximal_gauss", gauss, 1e-12)]


def _inner_max(n):
    V, F, B, g, h = fx.bochner_fixture(n)
    m = harmonic_solve(TriMeshMap(V, F, V, B, g, h))
    idx, res = bochner_residual(m)
    inner = np.all(np.abs(V[idx]) <= 0.2 + 1e-12, axis=1)
    return float(np.max(np.abs(res[inner]))), m


def criterion_10(levels=(16, 32, 64), seed=4):
    V, F, pinned = fx.cone_annulus_mesh(32)
    cone = fx.ScaledCone()
    ident = TriMeshMap(V, F, V, pinned, cone.metric, cone.metric)
    area = float(np.sum(face_geometry(ident).W))
    e_id = abs(dirichlet_energy(ident) - area) / area
    phi_id = float(np.max(hopf_differential(ident).magnitude))

    errs, maps = [], []
    for n in levels:
        e, m = _inner_max(n)
        errs.append(e)
        maps.append(m)
    m = maps[0]
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(-1, 1, 2)

    def scaled(x, y):
        lam = np.exp(a * x + b * y * y)
        return lam[..., None, None] * m.g(x, y)

    conf = abs(dirichlet_energy(m.with_metrics(domain=scaled)) - dirichlet_energy(m)) / dirichlet_energy(m)
    d = density_decomposition(m)
    geo = face_geometry(m)
    Dm = differentials(m)
    hc = m.h(*m.images[m.faces].mean(axis=1).T)
    jac_direct = (signed_areas(m.images, m.faces) / signed_areas(m.vertices, m.faces)
                  * np.sqrt(tc.det(hc) / tc.det(geo.g)))
    ef = 0.5 * tc.trace(geo.ginv @ tc.transpose(Dm) @ hc @ Dm)
    dens = max(
        float(np.max(np.abs(d.e - ef) / ef)),
        float(np.max(np.abs(d.jac - jac_direct) / jac_direct)),
        float(np.max(np.abs(np.abs(d.phi) ** 2 - d.sigma ** 2 * d.H * d.L) / (d.sigma ** 2 * d.H * d.H))),
        float(np.max(np.abs(pullback_from_density(d) - d.pullback_w)) / np.max(np.abs(d.pullback_w))),
    )
    out = [Check("identity_energy_area", e_id, 1e-9),
           Check("identity_hopf", phi_id, 1e-8),
           Check("conformal_invariance", conf, 1e-10),
           Check("density_identities", dens, 1e-9)]
    for (n0, e0), (n1, e1) in zip(zip(levels, errs), zip(levels[1:], errs[1:])):
        out.append(Check(f"bochner_ratio[{n0}->{n1}]", e0 / e1, 2.0, GE))
    out.append(Check(f"bochner_residual[n={levels[-1]}]", errs[-1], 1e-2))
    return out


def criterion_11(n=16, x=0.75):
    fam = fx.cone4_family(n)
    h = fx.rectangle_metric()
    floor = identity_noise_floor(fam.vertices, fam.faces, fam.pinned, h, fam.sliders)
    self_pair = minimize_pair_energy(fam, h, h)
    h1, h2 = fx.cone4_pair(x)
    sym = minimize_pair_energy(fam, h1, h2)
    s0 = fam.symmetric_value[0]
    return [Check("pair_self_parameter", abs(self_pair.params[0] - s0), 1e-3),
            Check("pair_self_hopf_over_floor", self_pair.phi_sum / floor, 10.0),
            Check("pair_symmetric_parameter", abs(sym.params[0] - s0), 1e-3)]


def criterion_12(alphas=(math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi), n=48):
    V, F, pinned, h, h2 = fx.rotation_fixture(n)
    out = []
    for a in alphas:
        rep = hopf_rotation_check(h, h2, a, V, F, pinned)
        tag = f"{a / math.pi:.4g}pi"
        out.append(Check(f"hopf_rotation[{tag}]", rep.rotation_error, 0.05))
        out.append(Check(f"hopf_modulus[{tag}]", rep.modulus_error, 0.05))
    return out


def admissible_oracle(genus, angles):
    """Positive hyperbolic area by Gauss-Bonnet, evaluated directly."""
    area = -(2 * math.pi * (2 - 2 * genus) + sum(a - 2 * math.pi for a in angles))
    return area > 0


def criterion_13(quoted=True, seed=5, draws=1000):
    """Collar widths and the admissibility truth table.

    ``quoted=True`` compares against the reference decimals as published;
    ``quoted=False`` uses the independently evaluated value of the formula.
    """
    _, v = mg.collar_widths([1.0], mg.ConeData(0, (math.pi / 6,)))
    w, _ = mg.collar_widths([2.0], mg.ConeData(0, (math.pi / 3,)))
    w_ref = COLLAR_W_QUOTED if quoted else COLLAR_W_ORACLE
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(draws):
        g = int(rng.integers(0, 4))
        k = int(rng.integers(0, 6))
        angles = tuple(rng.uniform(1e-3, math.pi - 1e-3, k))
        if mg.admissible(mg.ConeData(g, angles)) != admissible_oracle(g, angles):
            mismatches += 1
    return [Check("collar_v", abs(v[0] - COLLAR_V_QUOTED), 1e-6),
            Check("collar_w", abs(w[0] - w_ref), 1e-6),
            Check("admissibility_table", mismatches, 0)]


CRITERIA = {
    1: ("landslide flow axioms", criterion_1),
    2: ("unimodularity and det preservation", criterion_2),
    3: ("hyperbolicity of h_alpha", criterion_3),
    4: ("duality", criterion_4),
    5: ("normal flow", criterion_5),
    6: ("Fuchsian foliation consistency", criterion_6),
    7: ("Gauss equation", criterion_7),
    8: ("Mess/earthquake relation", criterion_8),
    9: ("maximal-surface identities", criterion_9),
    10: ("harmonic module", criterion_10),
    11: ("pair-energy minimization", criterion_11),
    12: ("Hopf rotation", criterion_12),
    13: ("collar widths and admissibility", criterion_13),
}
