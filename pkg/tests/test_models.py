import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adsland import models as mg
from adsland.errors import BadAngle, GridTooCoarse, OutOfDomain


# inside |z| < t^(1/t) = 1/256 for theta0 = pi/2
SMALL = (1e-3, 2e-3, 1e-3, 2e-3)


def polar_chart(theta0=math.pi / 2, r_min=0.5, r_max=1.5, n=33):
    return mg.Chart.polar(theta0, r_min, r_max, n, n)


def test_chart_invariants():
    with pytest.raises(GridTooCoarse):
        mg.Chart.conformal(0, 1, 0, 1, 3, 8)
    with pytest.raises(ValueError):
        mg.Chart("polar", (0.0, 1.0, 0.0, 1.0), (8, 8), 1.0)
    c = polar_chart(n=16).refined()
    assert c.shape == (31, 32)


def test_cone_disk_polar_samples():
    ch = mg.Chart.polar(math.pi / 2, 1.0, 2.0, 5, 8)
    f = mg.cone_disk_polar(math.pi / 2, ch)
    assert np.allclose(f.samples[0, 0], [[1, 0], [0, math.sinh(1) ** 2]])
    assert f.samples[0, 0, 1, 1] == pytest.approx(1.3811, abs=1e-4)
    tiny = mg.Chart.polar(math.pi / 2, 1e-8, 1.0, 5, 8)
    assert mg.cone_disk_polar(math.pi / 2, tiny).samples[0, 0, 1, 1] < 1e-15
    assert f.cone_points[0][1] == math.pi / 2
    for bad in (0.0, math.pi, 4.0):
        with pytest.raises(BadAngle):
            mg.cone_disk_polar(bad, mg.Chart.polar(max(bad, 1.0), 1.0, 2.0, 5, 8))


def test_conformal_examples():
    # t = 1/2, |z| = 1/4 sits on the edge of definition: t^-2 |z|^{2t} = 1
    assert not np.isfinite(mg.conformal_factor(math.pi, 0.25, 0.0))
    assert mg.conformal_factor(math.pi, 0.1, 0.0) == pytest.approx(4 * 10 / 0.6 ** 2, rel=1e-14)
    ch = mg.Chart.conformal(0.1, 0.5, 0.1, 0.5, 9, 9)
    f = mg.cone_disk_conformal(2 * math.pi, ch)
    X, Y = ch.grid()
    lam = 4 / (1 - X ** 2 - Y ** 2) ** 2
    assert np.allclose(f.samples[..., 0, 0], lam) and np.allclose(f.samples[..., 0, 1], 0)
    with pytest.raises(OutOfDomain):
        mg.cone_disk_conformal(math.pi / 2, mg.Chart.conformal(-0.1, 0.1, -0.1, 0.1, 5, 5))
    with pytest.raises(OutOfDomain):
        mg.cone_disk_conformal(math.pi / 2, mg.Chart.conformal(1e-3, 5e-3, 1e-3, 5e-3, 5, 5))


def test_chart_change_power_matches_cone_disk():
    theta0 = math.pi / 2
    t = theta0 / (2 * math.pi)
    ch = mg.Chart.conformal(*SMALL, 12, 12)
    src = mg.poincare_disk(ch)
    assert mg.chart_change_power(src, 1.0) is src
    pulled = mg.chart_change_power(src, t)
    direct = mg.cone_disk_conformal(theta0, ch)
    rel = np.abs(pulled.samples - direct.samples).max() / np.abs(direct.samples).max()
    assert rel < 1e-10
    with pytest.raises(OutOfDomain):
        mg.chart_change_power(mg.poincare_disk(mg.Chart.conformal(-0.3, -0.05, -0.1, 0.1, 6, 6)), t)


def test_ads_slice():
    ch = polar_chart()
    base = mg.cone_disk_polar(math.pi / 2, ch)
    assert np.allclose(mg.ads_cone_slice(math.pi / 2, 0.0, ch).spatial.samples, base.samples)
    sl = mg.ads_cone_slice(math.pi / 2, math.pi / 3, ch)
    assert np.allclose(sl.spatial.samples, 0.25 * base.samples)
    assert sl.lapse == -1.0
    K = mg.gaussian_curvature_fd(sl.spatial)
    assert np.max(np.abs(K * math.cos(math.pi / 3) ** 2 + 1)) < 5e-3


def test_curvature_fd():
    ch = mg.Chart.conformal(0, 1, 0, 1, 8, 8)
    flat = mg.MetricField.from_function(ch, lambda x, y: np.broadcast_to(np.eye(2), x.shape + (2, 2)).copy())
    assert np.allclose(mg.gaussian_curvature_fd(flat), 0)
    with pytest.raises(GridTooCoarse):
        mg.gaussian_curvature_fd(mg.MetricField(None, np.eye(2)[None].repeat(4, 0)))
    f = mg.cone_disk_polar(math.pi / 2, polar_chart())
    assert np.allclose(mg.gaussian_curvature_fd(f.scaled(3.0)), mg.gaussian_curvature_fd(f) / 3.0)


@pytest.mark.parametrize("kind", ["polar", "conformal"])
def test_curvature_convergence(kind):
    errs = []
    for n in (33, 65, 129):
        if kind == "polar":
            f = mg.cone_disk_polar(math.pi / 2, mg.Chart.polar(math.pi / 2, 0.5, 1.5, n, n - 1))
        else:
            f = mg.cone_disk_conformal(math.pi / 2, mg.Chart.conformal(*SMALL, n, n))
        errs.append(np.max(np.abs(mg.gaussian_curvature_fd(f) + 1)))
    assert errs[-1] < 1e-3
    assert errs[0] / errs[1] >= 3.5 and errs[1] / errs[2] >= 3.5


def test_cone_angle_estimates():
    f = mg.cone_disk_polar(math.pi / 2, polar_chart(r_min=0.01))
    assert mg.cone_angle_estimate(f) == pytest.approx(math.pi / 2, abs=1e-3)
    disk = mg.poincare_disk(mg.Chart.conformal(0.1, 0.5, 0.1, 0.5, 8, 8))
    assert mg.cone_angle_estimate(disk) == pytest.approx(2 * math.pi, abs=1e-3)
    conf = mg.cone_disk_conformal(math.pi / 2, mg.Chart.conformal(*SMALL, 8, 8))
    assert mg.cone_angle_estimate(conf) == pytest.approx(mg.cone_angle_estimate(f), abs=1e-3)


def test_collar_widths():
    _, v = mg.collar_widths([1.0], mg.ConeData(0, (math.pi / 2,)))
    assert v[0] == pytest.approx(0.0, abs=1e-7)
    _, v = mg.collar_widths([1.0], mg.ConeData(0, (math.pi / 6,)))
    assert v[0] == pytest.approx(math.log(2 + math.sqrt(3)), abs=1e-12)
    assert v[0] == pytest.approx(1.316958, abs=1e-6)
    w, _ = mg.collar_widths([2.0], mg.ConeData(0, (math.pi / 3,)))
    # independent oracle: asinh(x) = log(x + sqrt(x^2 + 1))
    x = 0.5 / ((math.e - 1 / math.e) / 2)
    assert w[0] == pytest.approx(math.log(x + math.sqrt(x * x + 1)), abs=1e-14)
    assert w[0] == pytest.approx(0.4135684508, abs=1e-10)
    with pytest.raises(BadAngle):
        mg.collar_widths([1.0], mg.ConeData(0, (math.pi,)))


@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.05, 1.5), st.floats(0.05, 1.5))
def test_collar_monotone(l1, l2, a1, a2):
    l1, l2 = sorted((l1, l2))
    a1, a2 = sorted((a1, a2))
    w1, v1 = mg.collar_widths([l1, l2], mg.ConeData(0, (a1,)))
    assert w1[0] >= w1[1]
    w2, v2 = mg.collar_widths([l1], mg.ConeData(0, (a2,)))
    assert w2[0] <= w1[0] + 1e-15 and v2[0] <= v1[0] + 1e-15


def test_admissible():
    assert mg.admissible(mg.ConeData(2))
    assert mg.admissible(mg.ConeData(0, (math.pi / 2,) * 4))
    assert not mg.admissible(mg.ConeData(0, (0.9 * math.pi,) * 3))


def test_field_csv_roundtrip(tmp_path):
    f = mg.cone_disk_polar(math.pi / 2, mg.Chart.polar(math.pi / 2, 1.0, 2.0, 5, 6))
    p = tmp_path / "f.csv"
    mg.write_field_csv(f, p)
    meta, coords, samples = mg.read_field_csv(p)
    assert meta == {"kind": "polar", "theta0": math.pi / 2}
    assert np.array_equal(samples, f.samples.reshape(-1, 2, 2))
    U, V = f.chart.grid()
    assert np.array_equal(coords, np.column_stack([U.ravel(), V.ravel()]))


def test_field_csv_numpy_meta(tmp_path):
    f = mg.cone_disk_polar(math.pi / 2, mg.Chart.polar(math.pi / 2, 1.0, 2.0, 4, 4))
    mg.write_field_csv(f, tmp_path / "f.csv", alpha=np.float64(0.5))
    assert mg.read_field_csv(tmp_path / "f.csv")[0]["alpha"] == 0.5
