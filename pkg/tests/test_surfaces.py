import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from adsland import fixtures as fx
from adsland import landslide as ls
from adsland import models as mg
from adsland import surfaces as sf
from adsland import tensor as tc
from adsland.checks import random_pairs, random_spd
from adsland.errors import BadCurvature, FlowDegenerate, GridTooCoarse, Inadmissible, NotStrictlyConvex

CHART = mg.Chart.polar(math.pi / 2, 0.5, 1.5, 33, 32)


def cone_field(chart=CHART):
    return mg.cone_disk_polar(math.pi / 2, chart)


def const_B(fld, B):
    return np.broadcast_to(np.asarray(B, float), fld.samples.shape).copy()


def random_data(rng, n=400, spread=0.8, convexity=sf.FUTURE):
    I = random_spd(rng, n)
    lam = np.exp(rng.uniform(-spread, spread, (n, 2)))
    r = tc.spd_principal_sqrt(I)
    th = rng.uniform(0, math.pi, n)
    c, s = np.cos(th), np.sin(th)
    R = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    X = R @ (lam[:, :, None] * tc.transpose(R))
    sign = 1.0 if convexity == sf.FUTURE else -1.0
    return sf.EmbeddingData(mg.MetricField(None, I), sign * tc.inv(r) @ X @ r, convexity)


def test_embedding_invariants():
    f = cone_field()
    with pytest.raises(ValueError):
        sf.EmbeddingData(f, const_B(f, -np.eye(2)), sf.FUTURE)
    with pytest.raises(ValueError):
        sf.EmbeddingData(f, const_B(f, np.eye(2)), sf.PAST)
    with pytest.raises(Exception):
        sf.EmbeddingData(f, const_B(f, [[0.0, 1.0], [0.0, 0.0]]))


def test_fundamental_forms_examples():
    h = random_spd(np.random.default_rng(0), 5)
    fld = mg.MetricField(None, h / 4)
    II, III = sf.fundamental_forms(sf.EmbeddingData(fld, 0 * h))
    assert np.allclose(II, 0) and np.allclose(III, 0)
    II, III = sf.fundamental_forms(sf.EmbeddingData(fld, const_B(fld, np.eye(2))))
    assert np.allclose(II, h / 4) and np.allclose(III, h / 4)
    _, III = sf.fundamental_forms(sf.EmbeddingData(fld, const_B(fld, math.sqrt(3) * np.eye(2))))
    assert np.allclose(III, 3 * h / 4)


def test_gauss_residual_examples():
    f = cone_field()
    assert np.max(np.abs(sf.gauss_residual(sf.EmbeddingData(f, 0 * f.samples)))) < 5e-3
    t = 0.6
    d = sf.EmbeddingData(f.scaled(math.cos(t) ** 2), const_B(f, math.tan(t) * np.eye(2)))
    assert np.max(np.abs(sf.gauss_residual(d))) < 1e-2
    with pytest.raises(GridTooCoarse):
        sf.gauss_residual(sf.EmbeddingData(mg.MetricField(None, f.samples[0]), f.samples[0] * 0))


def test_codazzi_examples():
    f = cone_field()
    assert np.max(sf.codazzi_residual(sf.EmbeddingData(f, const_B(f, 2.5 * np.eye(2))))) < 1e-12
    d = sf.EmbeddingData(f.scaled(0.5), const_B(f, math.tan(0.3) * np.eye(2)))
    assert np.max(sf.codazzi_residual(d)) < 1e-12
    with pytest.raises(GridTooCoarse):
        sf.codazzi_residual(sf.EmbeddingData(mg.MetricField(None, f.samples), f.samples * 0))


def test_k_surface_residuals_converge():
    errs_g, errs_c = [], []
    for spacing in (1 / 16, 1 / 32, 1 / 64):
        P = fx.radial_pair_fields(fx.reference_chart(spacing=spacing))
        d = ls.k_surface_from_pair(P, -2.0)
        errs_g.append(np.max(np.abs(sf.gauss_residual(d))))
        errs_c.append(np.max(sf.codazzi_residual(d)))
    for e in (errs_g, errs_c):
        assert e[0] / e[1] > 3.5 and e[1] / e[2] > 3.5


def test_normal_flow_examples():
    assert sf.flow_eigenvalue(1.0, math.pi / 4) == pytest.approx(0.0, abs=1e-15)
    lam = sf.flow_eigenvalue(math.sqrt(3), math.pi / 6)
    assert lam == pytest.approx(1 / math.sqrt(3), abs=1e-15)
    assert -1 - lam ** 2 == pytest.approx(-4 / 3)
    d = random_data(np.random.default_rng(3))
    assert sf.normal_flow(d, 0.0) is d
    out = sf.normal_flow(d, 0.4)
    lam, mu, _ = tc.eigen_pair(d.B, d.I.samples)
    lt, mt, _ = tc.eigen_pair(out.B, out.I.samples)
    ref = np.sort(np.column_stack([sf.flow_eigenvalue(lam, 0.4), sf.flow_eigenvalue(mu, 0.4)]), 1)
    assert np.allclose(np.column_stack([mt, lt]), ref, atol=1e-12)


def test_flow_degenerate():
    f = cone_field()
    d = sf.EmbeddingData(f, const_B(f, -np.eye(2)), sf.PAST)
    with pytest.raises(FlowDegenerate, match="sample"):
        sf.normal_flow(d, math.pi / 4)
    with pytest.raises(FlowDegenerate):
        sf.assemble_spacetime(d, [0.0, math.pi / 4])


def test_normal_flow_semigroup_and_dual(rng):
    d = random_data(rng)
    a = sf.normal_flow(sf.normal_flow(d, 0.2), 0.5)
    b = sf.normal_flow(d, 0.7)
    assert np.allclose(a.I.samples, b.I.samples, rtol=1e-10, atol=1e-10)
    assert np.allclose(a.B, b.B, rtol=1e-10, atol=1e-10)
    dual = sf.dual_surface(d)
    half = sf.normal_flow(d, math.pi / 2)
    assert np.allclose(half.I.samples, dual.I.samples, atol=1e-10 * np.abs(dual.I.samples).max())
    assert np.allclose(half.B, dual.B, atol=1e-10 * np.abs(dual.B).max())


@given(st.floats(0.05, 20), st.floats(-1.2, 1.2), st.floats(-1.2, 1.2))
def test_flow_semigroup_property(lam, s, t):
    assume(1 + lam * math.tan(s) > 1e-3 and 1 + lam * math.tan(s + t) > 1e-3)
    assume(abs(s + t) < 1.4)
    ls_ = sf.flow_eigenvalue(lam, s)
    assume(1 + ls_ * math.tan(t) > 1e-3)
    assert sf.flow_eigenvalue(ls_, t) == pytest.approx(sf.flow_eigenvalue(lam, s + t), rel=1e-9, abs=1e-9)


@given(st.floats(0.05, 20))
def test_flow_decreasing(lam):
    t0 = -math.atan(1 / lam)
    ts = np.linspace(t0 + 1e-3, math.pi / 2 - 1e-3, 50)
    vals = [sf.flow_eigenvalue(lam, t) for t in ts]
    assert np.all(np.diff(vals) < 0)


def test_dual_examples(rng):
    h = random_spd(rng, 10)
    d = sf.EmbeddingData(mg.MetricField(None, h / 2), const_B(mg.MetricField(None, h), np.eye(2)), sf.FUTURE)
    ds = sf.dual_surface(d)
    assert np.allclose(ds.I.samples, h / 2) and ds.convexity == sf.PAST
    assert np.allclose(ds.curvature, -2.0)
    d = random_data(rng)
    dd = sf.dual_surface(sf.dual_surface(d))
    assert np.allclose(dd.I.samples, d.I.samples, atol=1e-12 * np.abs(d.I.samples).max())
    assert np.allclose(dd.B, d.B, atol=1e-12 * np.abs(d.B).max())
    assert dd.convexity == d.convexity
    _, III = sf.fundamental_forms(sf.dual_surface(d))
    assert np.allclose(III, d.I.samples, atol=1e-11 * np.abs(d.I.samples).max())
    K, Ks = d.curvature, sf.dual_surface(d).curvature
    assert np.allclose(Ks, -K / (1 + K), rtol=1e-12)
    with pytest.raises(NotStrictlyConvex):
        sf.dual_surface(sf.EmbeddingData(d.I, 0 * d.B))


@given(st.floats(-50, -1.001))
def test_dual_curvature_fixed_point(K):
    Ks = ls.dual_curvature(K)
    assert Ks < -1
    assert ls.dual_curvature(Ks) == pytest.approx(K, rel=1e-9)
    if abs(K + 2) > 1e-6:
        assert abs(Ks - K) > 0


def test_spacetime(rng):
    f = cone_field()
    block = sf.assemble_spacetime(sf.EmbeddingData(f, 0 * f.samples), [-0.4, 0.0, math.pi / 3])
    for k, t in enumerate(block.times):
        sl = mg.ads_cone_slice(math.pi / 2, t, CHART).spatial.samples
        assert np.allclose(block.samples[k][..., 1:, 1:], sl, atol=1e-12)
        assert np.all(block.samples[k][..., 0, 0] == -1) and np.all(block.samples[k][..., 0, 1:] == 0)
    d = random_data(rng)
    block = sf.assemble_spacetime(d, [0.0, math.pi / 6])
    assert np.allclose(block.samples[0][..., 1:, 1:], d.I.samples)
    assert np.allclose(block.samples[1][..., 1:, 1:], sf.normal_flow(d, math.pi / 6).I.samples,
                       atol=1e-12 * np.abs(d.I.samples).max())


def test_curvature_ratio(rng):
    f = cone_field()
    assert np.max(np.abs(sf.curvature_ratio_check(f, const_B(f, np.eye(2))))) == 0
    assert np.max(np.abs(sf.curvature_ratio_check(f, const_B(f, 1.7 * np.eye(2))))) < 1e-10
    P = fx.radial_pair_fields(fx.reference_chart(spacing=1 / 64))
    b = P.morphism()
    beta = ls.beta(P.h.samples, b, math.pi / 2)
    assert np.max(np.abs(sf.curvature_ratio_check(P.h, beta))) < 2e-3


def test_areas():
    assert sf.k_surface_area(-2.0, mg.ConeData(2)) == pytest.approx(2 * math.pi)
    assert sf.k_surface_area(-1.0, mg.ConeData(0, (math.pi / 2,) * 4)) == pytest.approx(2 * math.pi)
    a = [sf.k_surface_area(K, mg.ConeData(2)) for K in (-2, -4, -8, -1e6)]
    assert np.all(np.diff(a) < 0) and a[-1] < 2e-5
    with pytest.raises(Inadmissible):
        sf.k_surface_area(-2.0, mg.ConeData(0, (0.9 * math.pi,) * 3))
    with pytest.raises(BadCurvature):
        sf.k_surface_area(-0.5, mg.ConeData(2))


def test_fuchsian_foliation():
    h = cone_field()
    leaves = sf.fuchsian_foliation(h, [-1.0000001, -4.0, -4 / 3])
    assert np.max(np.abs(leaves[0].B)) < 1e-3 and np.allclose(leaves[0].I.samples, h.samples, rtol=1e-6)
    t = sf.flow_time(-4.0, -4 / 3)
    assert t == pytest.approx(math.pi / 6)
    flowed = sf.normal_flow(leaves[1], t)
    assert np.allclose(flowed.I.samples, leaves[2].I.samples, atol=1e-10)
    assert np.allclose(flowed.B, leaves[2].B, atol=1e-10)
    assert sf.flow_time(-4.0, -2.0) > 0 and sf.flow_time(-2.0, -4.0) < 0
    with pytest.raises(BadCurvature):
        sf.fuchsian_leaf(h, -1.0)


def test_csv_exports(tmp_path):
    d = random_data(np.random.default_rng(5), n=7)
    sf.write_embedding_csv(d, tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "# convexity='future-convex'" and len(lines) == 9
    f = cone_field(mg.Chart.polar(math.pi / 2, 1.0, 2.0, 4, 4))
    block = sf.assemble_spacetime(sf.EmbeddingData(f, 0 * f.samples), [0.0, 0.5])
    sf.write_spacetime_csv(block, f, tmp_path / "s.csv")
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 16 and rows[0].split(",")[:4] == ["t", "u", "v", "g00"]
