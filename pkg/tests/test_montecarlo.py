import math

import numpy as np
import pytest

from noiseamp import (Algo, AlgoConfig, NonFinite, PseudoHuber, Quadratic,
                      SigmaMode, ensemble_variance, make_spectrum,
                      optimal_quadratic_params, propagate_covariance,
                      simulate, standard_normals, variance_amplification)


def test_normals_reproducible_and_keyed():
    a = standard_normals(42, 0, 1000)
    b = standard_normals(42, 0, 1000)
    np.testing.assert_array_equal(a, b)
    c = standard_normals(42, 1, 1000)
    assert not np.array_equal(a, c)
    d = standard_normals(43, 0, 1000)
    assert not np.array_equal(a, d)
    # prefix property: shorter draws are a prefix of longer ones
    np.testing.assert_array_equal(a[:10], standard_normals(42, 0, 10))


def test_normals_frozen_reference():
    # Pinned values guard the generator against accidental changes.
    np.testing.assert_allclose(
        standard_normals(42, 0, 4),
        [-0.261072457116615, -1.4176846696795498,
         0.10497935973445952, 0.7767199860611191], rtol=0, atol=0)


def test_normals_moments():
    z = standard_normals(0, 0, 200000)
    assert abs(z.mean()) < 0.01
    assert abs(z.var() - 1.0) < 0.01
    assert abs((z ** 3).mean()) < 0.02


def test_gd_unit_mode():
    # alpha * lambda = 1 wipes the state each step: x^{k+1} = sigma w^k.
    cfg = AlgoConfig(algo=Algo.GD, alpha=1.0)
    res = simulate(cfg, Quadratic(make_spectrum([1.0])), 50000, seed=42)
    assert res.j_hat == pytest.approx(1.0, rel=0.03)


class _GenericQuadratic:
    """Quadratic gradient without the fast-path type, to exercise the loop."""

    def __init__(self, s):
        self.lams = s.values.copy()

    @property
    def dim(self):
        return self.lams.size

    def gradient(self, x):
        return self.lams * x


def test_filter_path_matches_explicit_recursion():
    s = make_spectrum([0.5, 2.0, 3.5])
    for algo in (Algo.GD, Algo.HB, Algo.NA):
        beta = 0.0 if algo == Algo.GD else 0.45
        cfg = AlgoConfig(algo=algo, alpha=0.2, beta=beta, sigma=0.8)
        fast = simulate(cfg, Quadratic(s), 2000, seed=5, track_per_step=True)
        slow = simulate(cfg, _GenericQuadratic(s), 2000, seed=5,
                        track_per_step=True)
        assert fast.j_hat == pytest.approx(slow.j_hat, rel=1e-9)
        np.testing.assert_allclose(fast.per_step, slow.per_step,
                                   rtol=1e-8, atol=1e-10)


def test_simulation_matches_exact_variance():
    s = make_spectrum([1.0, 9.0])
    for algo in (Algo.GD, Algo.HB, Algo.NA):
        p = optimal_quadratic_params(algo, 1.0, 9.0)
        cfg = AlgoConfig(algo=algo, alpha=p.alpha, beta=p.beta)
        exact = variance_amplification(cfg, s).j
        res = simulate(cfg, Quadratic(s), 200000, seed=7)
        assert res.j_hat == pytest.approx(exact, rel=0.05)


def test_divergence_detected():
    cfg = AlgoConfig(algo=Algo.GD, alpha=1.0)
    with pytest.raises(NonFinite):
        simulate(cfg, Quadratic(make_spectrum([3.0])), 5000, seed=0)
    with pytest.raises(NonFinite):
        simulate(cfg, PseudoHuber(3.0, 3.0, 1), 500000, seed=0)


def test_sigma_mode_equals_alpha():
    s = make_spectrum([1.0, 4.0])
    cfg = AlgoConfig(algo=Algo.GD, alpha=0.25, sigma=7.0,
                     sigma_mode=SigmaMode.EQUALS_ALPHA)
    ref = AlgoConfig(algo=Algo.GD, alpha=0.25, sigma=0.25)
    a = simulate(cfg, Quadratic(s), 1000, seed=3)
    b = simulate(ref, Quadratic(s), 1000, seed=3)
    assert a.j_hat == b.j_hat


def test_ensemble_small():
    s = make_spectrum([1.0])
    cfg = AlgoConfig(algo=Algo.GD, alpha=1.0)
    res = ensemble_variance(cfg, Quadratic(s), 1, 2, seed=42)
    # One step, two replicates: average of the two first-step squared norms.
    w0 = standard_normals(42, 0, 1)[0]
    w1 = standard_normals(42, 1, 1)[0]
    assert res.j_hat == pytest.approx(0.5 * (w0 ** 2 + w1 ** 2), rel=1e-14)
    assert res.per_step.shape == (2,)
    assert res.per_step[0] == 0.0
    assert res.replicates == 2
    assert len(res.j_hat_replicates) == 2


def test_ensemble_tracks_covariance_recursion():
    s = make_spectrum([1.0, 4.0, 9.0])
    p = optimal_quadratic_params(Algo.HB, 1.0, 9.0)
    cfg = AlgoConfig(algo=Algo.HB, alpha=p.alpha, beta=p.beta)
    res = ensemble_variance(cfg, Quadratic(s), 200, 50, seed=1)
    theory = propagate_covariance(cfg, s, 201)
    for t in (5, 20, 80, 200):
        se = max(res.per_step_stderr[t], 1e-12)
        assert abs(res.per_step[t] - theory[t]) <= 5.0 * se


def test_pseudo_huber_gradient_and_curvature():
    obj = PseudoHuber(1.0, 10.0, 4, delta=0.7)
    rng = np.random.default_rng(0)
    x = rng.normal(size=4)
    eps = 1e-6
    fd = np.array([(obj.value(x + eps * e) - obj.value(x - eps * e))
                   / (2 * eps) for e in np.eye(4)])
    np.testing.assert_allclose(obj.gradient(x), fd, rtol=1e-6, atol=1e-8)
    # m-strong convexity and L-smoothness along random secants
    for _ in range(500):
        a = rng.normal(scale=3.0, size=4)
        b = rng.normal(scale=3.0, size=4)
        inner = float(np.dot(obj.gradient(a) - obj.gradient(b), a - b))
        gap = float(np.dot(a - b, a - b))
        assert 1.0 * gap - 1e-9 <= inner <= 10.0 * gap + 1e-9


def test_pseudo_huber_validation():
    with pytest.raises(ValueError):
        PseudoHuber(2.0, 1.0, 3)
    with pytest.raises(ValueError):
        PseudoHuber(1.0, 2.0, 3, delta=0.0)


def test_tridiagonal_spectrum_closed_form():
    # The 1-D Dirichlet Laplacian (tridiagonal Toeplitz [-1, 2, -1]) has
    # eigenvalues 2 - 2 cos(k pi / (n + 1)).
    n = 50
    closed = 2.0 - 2.0 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1))
    mat = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    np.testing.assert_allclose(np.sort(closed), np.linalg.eigvalsh(mat),
                               atol=1e-10)
