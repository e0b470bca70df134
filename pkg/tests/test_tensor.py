import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adsland import tensor as tc
from adsland.checks import random_morphism, random_spd
from adsland.errors import NotNormalizedPair, NotSelfAdjoint, NotSPD

angles = st.floats(0, np.pi)
logs = st.floats(-2, 2)


@st.composite
def spd(draw):
    th, a, b = draw(angles), draw(logs), draw(logs)
    c, s = np.cos(th), np.sin(th)
    R = np.array([[c, -s], [s, c]])
    return R @ np.diag([np.exp(a), np.exp(b)]) @ R.T


def test_metric_and_checks():
    h = tc.metric(2.0, 0.5, 1.0)
    assert h.shape == (2, 2) and h[0, 1] == h[1, 0] == 0.5
    with pytest.raises(NotSPD):
        tc.check_spd(tc.metric(1.0, 2.0, 1.0))
    with pytest.raises(NotSPD):
        tc.check_spd(np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_sqrt_examples(rng):
    assert np.allclose(tc.spd_principal_sqrt(np.eye(2)), np.eye(2))
    assert np.allclose(tc.spd_principal_sqrt(np.diag([4.0, 0.25])), np.diag([2.0, 0.5]))
    M = random_spd(rng, 10_000)
    O = tc.spd_principal_sqrt(M)
    assert np.max(np.abs(O @ O - M)) < 1e-10 * np.max(np.abs(M))
    # brute-force oracle: eigendecomposition sample by sample
    for k in range(0, 10_000, 997):
        w, V = np.linalg.eig(M[k])
        ref = (V * np.sqrt(w.real)) @ np.linalg.inv(V)
        assert np.allclose(O[k], ref, atol=1e-12)


def test_complex_structure_examples():
    assert np.allclose(tc.complex_structure(np.eye(2)), [[0, -1], [1, 0]])
    J = tc.complex_structure(np.diag([4.0, 1.0]))
    assert np.allclose(J, [[0, -0.5], [2, 0]])
    assert np.allclose(J @ J, -np.eye(2))


@given(spd())
def test_complex_structure_properties(h):
    J = tc.complex_structure(h)
    assert np.allclose(J @ J, -np.eye(2), atol=1e-9)
    assert np.allclose(J.T @ h @ J, h, atol=1e-9 * np.abs(h).max())
    assert abs(np.linalg.det(J) - 1) < 1e-9 and abs(np.trace(J)) < 1e-9 * np.abs(J).max()


def test_pull_metric_examples(rng):
    h = random_spd(rng, 1)[0]
    assert np.allclose(tc.pull_metric(h, np.eye(2)), h)
    assert np.allclose(tc.pull_metric(np.eye(2), np.diag([2, 0.5])), np.diag([4, 0.25]))
    A = rng.normal(size=(1000, 2, 2))
    H = random_spd(rng, 1000)
    P = tc.pull_metric(H, A)
    assert np.allclose(tc.det(P), tc.det(H) * tc.det(A) ** 2, rtol=1e-9)


def test_bundle_morphism_examples(rng):
    assert np.allclose(tc.bundle_morphism(np.eye(2), np.eye(2)), np.eye(2))
    assert np.allclose(tc.bundle_morphism(np.eye(2), np.diag([4, 0.25])), np.diag([2, 0.5]))
    h = random_spd(rng, 10_000)
    b = random_morphism(rng, h)
    h2 = tc.pull_metric(h, b)
    out = tc.bundle_morphism(h, h2)
    assert np.max(np.abs(tc.pull_metric(h, out) - h2) / np.abs(h2).max(axis=(1, 2))[:, None, None]) < 1e-10
    assert np.max(tc.self_adjoint_residual(h, out) / tc._scale(h) / tc._scale(out)) < 1e-10
    with pytest.raises(NotNormalizedPair):
        tc.bundle_morphism(np.eye(2), np.diag([2.0, 1.0]))


def test_self_adjoint_residual_examples():
    assert tc.self_adjoint_residual(np.eye(2), np.array([[1.0, 2.0], [2.0, 3.0]])) == 0
    h = np.array([[2.0, 0.3], [0.3, 1.0]])
    J = tc.complex_structure(h)
    hJ = h @ J
    assert np.isclose(tc.self_adjoint_residual(h, J), abs(hJ[0, 1] - hJ[1, 0]))
    assert tc.self_adjoint_residual(h, J) > 0


def test_eigen_pair_examples(rng):
    lam, mu, _ = tc.eigen_pair(np.eye(2), np.eye(2))
    assert lam == pytest.approx(1) and mu == pytest.approx(1)
    lam, mu, _ = tc.eigen_pair(np.diag([2.0, 0.5]), np.eye(2))
    assert (lam, mu) == pytest.approx((2, 0.5))
    h = random_spd(rng, 500)
    b = random_morphism(rng, h)
    lam, mu, V = tc.eigen_pair(b, h)
    # reconstruction A = sum lam_i v_i (h v_i)^T
    hv = np.einsum("kij,kjl->kil", h, V)
    rec = (lam[:, None, None] * np.einsum("ki,kj->kij", V[:, :, 0], hv[:, :, 0])
           + mu[:, None, None] * np.einsum("ki,kj->kij", V[:, :, 1], hv[:, :, 1]))
    assert np.max(np.abs(rec - b)) < 1e-10 * np.abs(b).max()
    with pytest.raises(NotSelfAdjoint):
        tc.eigen_pair(np.array([[1.0, 1.0], [0.0, 1.0]]), np.eye(2))


@given(spd(), st.floats(-1, 1), st.floats(-1, 1))
def test_bundle_morphism_properties(h, p, q):
    n = np.hypot(p, q)
    X = np.eye(2) * np.cosh(n) + (np.sinh(n) / n if n else 1.0) * np.array([[p, q], [q, -p]])
    r = tc.spd_principal_sqrt(h)
    b = np.linalg.inv(r) @ X @ r
    out = tc.bundle_morphism(h, tc.pull_metric(h, b))
    assert np.allclose(out, b, atol=1e-8 * np.abs(b).max())
    assert abs(np.linalg.det(out) - 1) < 1e-9
    assert np.trace(out) > 0
