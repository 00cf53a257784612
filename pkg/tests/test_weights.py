import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mkge.weights import DirichletRegConfig, dirichlet_reg, restrict, restrict_vjp

vec8 = arrays(np.float64, 8, elements=st.floats(-4, 4))


def fd_jacobian_vjp(f, x, v, h=1e-6):
    out = np.zeros_like(x)
    for n in range(x.size):
        e = np.zeros_like(x)
        e[n] = h
        out[n] = np.dot(v, (f(x + e) - f(x - e)) / (2 * h))
    return out


def test_restrict_basic_values():
    np.testing.assert_allclose(restrict(np.full(8, 3.7), "softmax"), np.full(8, 1 / 8))
    assert restrict(np.zeros(1), "tanh")[0] == 0.0
    assert restrict(np.zeros(1), "sigmoid")[0] == 0.5
    x = np.array([1.0, -2.0])
    np.testing.assert_array_equal(restrict(x, "none"), x)


def test_restrict_unknown():
    with pytest.raises(ValueError):
        restrict(np.zeros(2), "relu")


def test_softmax_stable_for_large_inputs():
    out = restrict(np.array([1000.0, 1000.0, -1000.0]), "softmax")
    np.testing.assert_allclose(out, [0.5, 0.5, 0.0])


@given(vec8)
def test_restriction_ranges(x):
    s = restrict(x, "softmax")
    assert s.sum() == pytest.approx(1.0)
    assert np.all(np.abs(restrict(x, "tanh")) < 1)
    sg = restrict(x, "sigmoid")
    assert np.all((sg > 0) & (sg < 1))


@pytest.mark.parametrize("kind", ["none", "tanh", "sigmoid", "softmax"])
def test_restrict_vjp_matches_finite_differences(kind, rng):
    for _ in range(10):
        x = rng.normal(size=8)
        v = rng.normal(size=8)
        got = restrict_vjp(x, kind, v)
        want = fd_jacobian_vjp(lambda z: restrict(z, kind), x, v)
        np.testing.assert_allclose(got, want, rtol=1e-6, atol=1e-9)


def test_dirichlet_uniform_example():
    cfg = DirichletRegConfig(alpha=1 / 16, lambda_dir=1e-2, enabled=True)
    loss, _ = dirichlet_reg(np.ones(8), cfg)
    expect = -1e-2 * 8 * (1 / 16 - 1) * math.log(1 / 8)
    assert loss == pytest.approx(expect, rel=1e-12)
    assert loss == pytest.approx(-0.15596, abs=1e-5)


def test_dirichlet_zero_strength(rng):
    loss, grad = dirichlet_reg(rng.normal(size=8), DirichletRegConfig(lambda_dir=0.0))
    assert loss == 0.0
    assert not grad.any()


def test_dirichlet_alpha_one(rng):
    loss, grad = dirichlet_reg(rng.normal(size=8), DirichletRegConfig(alpha=1.0, lambda_dir=0.5))
    assert loss == 0.0
    assert not grad.any()


def test_dirichlet_all_zero_errors():
    with pytest.raises(ValueError, match="all-zero"):
        dirichlet_reg(np.zeros(8), DirichletRegConfig())


def test_dirichlet_config_validation():
    with pytest.raises(ValueError):
        DirichletRegConfig(alpha=0.0)
    with pytest.raises(ValueError):
        DirichletRegConfig(lambda_dir=-1.0)


@given(arrays(np.float64, 8, elements=st.floats(0.01, 5) | st.floats(-5, -0.01)),
       st.floats(1e-3, 1e3))
def test_dirichlet_scale_invariant(w, c):
    cfg = DirichletRegConfig(alpha=1 / 16, lambda_dir=1e-2)
    a, _ = dirichlet_reg(w, cfg)
    b, _ = dirichlet_reg(c * w, cfg)
    assert b == pytest.approx(a, rel=1e-9, abs=1e-12)


def test_dirichlet_prefers_concentrated_mass():
    cfg = DirichletRegConfig(alpha=1 / 16, lambda_dir=1e-2)
    one_hot = np.zeros(8)
    one_hot[2] = 1.0
    assert dirichlet_reg(one_hot, cfg)[0] < dirichlet_reg(np.ones(8), cfg)[0]


def test_dirichlet_gradient_finite_differences(rng):
    cfg = DirichletRegConfig(alpha=0.3, lambda_dir=0.7)
    for _ in range(20):
        w = rng.normal(size=8)
        w[np.abs(w) < 0.05] = 0.3
        _, g = dirichlet_reg(w, cfg)
        fd = np.zeros(8)
        for n in range(8):
            e = np.zeros(8)
            e[n] = 1e-6
            fd[n] = (dirichlet_reg(w + e, cfg)[0] - dirichlet_reg(w - e, cfg)[0]) / 2e-6
        np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-7)


def test_dirichlet_zero_entry_subgradient():
    cfg = DirichletRegConfig(alpha=0.5, lambda_dir=1.0)
    w = np.array([1.0, 0.0, 2.0])
    loss, g = dirichlet_reg(w, cfg)
    assert math.isfinite(loss)
    assert g[1] == 0.0
