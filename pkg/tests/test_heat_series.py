import math

import numpy as np
import pytest

from aqrm.fock import FockConfig, oracle_kernel, oracle_partition
from aqrm.heat_series import (
    SeriesConfig,
    eta,
    heat_kernel,
    heat_kernel_grid,
    kernel_term,
    omega_numerator,
    partition_function,
    psi_minus,
    tail_bound,
    theta,
    trace_diag,
    trace_integral,
    xi,
)
from aqrm.model import JX, ModelParams, exp_spin, mehler_base
from aqrm.simplex import QuadratureRule

BENCH = ModelParams(0.5, 1.0, 0.3)
rng = np.random.default_rng(11)


def _sorted_mu(lam):
    return np.sort(rng.uniform(0, 1, lam))


def _theta_loops(x, y, mu, t, g):
    m = [0.0] + list(mu)
    lam = len(mu)
    pre = 2 * math.sqrt(2) * g * math.exp(-t) / (1 - math.exp(-2 * t))
    out = pre * (x * (math.exp(t) + math.exp(-t)) - 2 * y) * (1 - (-1) ** lam) / 2
    out -= math.sqrt(2) * g * (x - y) * (1 + math.exp(-t)) / (1 - math.exp(-t))
    acc = 0.0
    for gam, mg in enumerate(m):
        acc += (-1) ** gam * (
            x * (math.exp(t * (1 - mg)) + math.exp(t * (mg - 1))) - y * (math.exp(-t * mg) + math.exp(t * mg))
        )
    return out + pre * (-1) ** lam * acc


def _xi_loops(mu, t, g):
    m = [0.0] + list(mu)
    lam = len(mu)
    k = 2 * g * g * math.exp(-t) / (1 - math.exp(-2 * t))
    ml = m[-1]
    s = sum((-1) ** gam * (math.exp(-t * mg) + math.exp(t * mg)) for gam, mg in enumerate(m))
    out = -k * (math.exp(t * (1 - ml) / 2) - math.exp(t * (ml - 1) / 2)) ** 2 * (-1) ** lam * s
    c = lambda v: math.exp(t * (1 - v)) + math.exp(t * (v - 1))
    d = lambda v: math.exp(t * v) + math.exp(-t * v)
    for a in range(lam):
        for b in range(a + 1, lam):
            if (b - a) % 2 == 1:
                out -= k * (c(m[b + 1]) - c(m[b])) * (d(m[a]) - d(m[a + 1]))
    return out


def test_theta_matches_loops():
    for lam in range(0, 7):
        for _ in range(5):
            mu = _sorted_mu(lam)
            x, y = rng.uniform(-2, 2, 2)
            t = rng.uniform(0.2, 2.5)
            assert abs(theta(x, y, mu, t, BENCH) - _theta_loops(x, y, mu, t, 0.5)) < 1e-11


def test_theta_lambda_zero_and_g_zero():
    t, x, y = 0.8, 0.3, -1.1
    ref = math.sqrt(2) * 0.5 * (x + y) * (1 - math.exp(-t)) / (1 + math.exp(-t))
    assert abs(theta(x, y, np.zeros(0), t, BENCH) - ref) < 1e-14
    assert theta(x, y, _sorted_mu(3), t, ModelParams(0.0, 1.0)) == 0.0


def test_xi_matches_loops():
    for lam in range(0, 8):
        for _ in range(5):
            mu = _sorted_mu(lam)
            t = rng.uniform(0.2, 2.5)
            assert abs(xi(mu, t, ModelParams(0.8, 1.0)) - _xi_loops(mu, t, 0.8)) < 1e-11


def test_xi_lambda_zero_reproduces_standalone_term():
    g, t = 0.7, 1.3
    p = ModelParams(g, 1.0)
    expo = -2 * g * g / math.tanh(t / 2) + 4 * g * g * math.cosh(t) / math.sinh(t) + xi(np.zeros(0), t, p)
    assert abs(expo + 2 * g * g * math.tanh(t / 2)) < 1e-13
    assert xi(_sorted_mu(4), t, ModelParams(0.0, 1.0)) == 0.0


def test_eta_examples():
    assert eta(np.zeros(0), 1.0) == 0.0
    assert eta(np.array([0.5]), 1.0) == -1.0
    assert eta(np.array([0.25, 0.75]), 2.0) == -2.0


def test_psi_minus_examples():
    assert psi_minus(np.array([0.0]), 1.0, BENCH) == 0.0
    assert psi_minus(_sorted_mu(4), 1.0, ModelParams(0.0, 1.0)) == 0.0
    mus = np.sort(rng.uniform(0, 1, (200, 6)), axis=1)
    assert np.all(psi_minus(mus, 1.7, BENCH) >= 0)


def test_vectorized_over_nodes():
    mus = np.sort(rng.uniform(0, 1, (4, 3)), axis=1)
    batch = xi(mus, 0.9, BENCH)
    assert np.allclose(batch, [xi(m, 0.9, BENCH) for m in mus], rtol=1e-14)


def test_kernel_term_lambda_zero():
    p = ModelParams(0.5, 1.0, 0.0)
    t, x, y = 1.0, 0.2, -0.1
    mat, err = kernel_term(0, x, y, t, p)
    a = math.sqrt(2) * 0.5 * (x + y) * math.tanh(t / 2)
    ref = math.exp(-2 * 0.25 * math.tanh(t / 2)) * np.array([[math.cosh(a), -math.sinh(a)], [-math.sinh(a), math.cosh(a)]])
    assert np.allclose(mat, ref, rtol=1e-13) and err == 0.0


def test_kernel_term_delta_zero():
    for lam in (1, 2, 5):
        mat, _ = kernel_term(lam, 0.1, 0.3, 1.0, ModelParams(0.5, 0.0, 0.3))
        assert np.all(mat == 0)


def test_kernel_term_errors():
    with pytest.raises(ValueError):
        kernel_term(-1, 0, 0, 1.0, BENCH)
    with pytest.raises(ValueError):
        kernel_term(1, 0, 0, -1.0, BENCH)


def test_tail_bound_majorizes_terms():
    for lam in range(0, 7):
        for _ in range(3):
            x, y = rng.uniform(-2, 2, 2)
            t = rng.uniform(0.3, 2.0)
            mat, _ = kernel_term(lam, x, y, t, BENCH)
            assert np.max(np.abs(mat)) <= tail_bound(lam, t, BENCH, x, y)


def test_tail_bound_delta_zero_and_decay():
    assert tail_bound(3, 1.0, ModelParams(0.5, 0.0, 0.3)) == 0.0
    vals = [tail_bound(lam, 1.0, BENCH, 0.5, 0.5) for lam in range(8, 20)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_heat_kernel_delta_zero_closed_form():
    # sigma_x = +-1 sectors are displaced oscillators with shifts -+ sqrt2 g and energies -g^2 +- eps
    g, eps, t = 0.6, 0.4, 0.9
    p = ModelParams(g, 0.0, eps)
    for x, y in rng.uniform(-2, 2, (4, 2)):
        ref = np.zeros((2, 2))
        for s in (1, -1):
            proj = 0.5 * (np.eye(2) + s * JX)
            ref += mehler_base(x + s * math.sqrt(2) * g, y + s * math.sqrt(2) * g, g, t) * math.exp(-s * eps * t) * proj
        res = heat_kernel(x, y, t, p)
        assert np.allclose(res.value, ref, rtol=1e-12, atol=1e-14)


def test_heat_kernel_g_zero():
    p = ModelParams(0.0, 1.0, 0.3)
    res = heat_kernel(0.4, -0.2, 0.8, p)
    ref = mehler_base(0.4, -0.2, 0.0, 0.8) * exp_spin(p, 0.8)
    assert np.max(np.abs(res.value - ref)) <= res.quad_error + res.tail_bound
    assert np.max(np.abs(res.value - ref)) < 1e-7


def test_heat_kernel_matches_oracle():
    res = heat_kernel(0.2, -0.1, 1.0, BENCH)
    ref = oracle_kernel(0.2, -0.1, 1.0, BENCH, FockConfig(300))
    assert res.converged
    assert np.max(np.abs(res.value - ref) / np.abs(ref)) < 1e-4


def test_heat_kernel_eps_zero_oracle():
    p = ModelParams(0.5, 1.0, 0.0)
    res = heat_kernel(0.3, 0.5, 1.2, p)
    ref = oracle_kernel(0.3, 0.5, 1.2, p, FockConfig(300))
    assert np.max(np.abs(res.value - ref)) < 1e-5


def test_self_adjoint():
    xs = np.linspace(-1.5, 1.5, 5)
    grid = heat_kernel_grid(xs, xs, 1.0, BENCH)
    assert np.max(np.abs(grid - np.swapaxes(np.swapaxes(grid, 0, 1), 2, 3))) < 1e-6


def test_grid_matches_pointwise():
    xs, ys = np.array([-0.5, 0.7]), np.array([0.1, 1.2, -1.0])
    grid = heat_kernel_grid(xs, ys, 0.7, BENCH)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            assert np.allclose(grid[i, j], heat_kernel(x, y, 0.7, BENCH).value, rtol=1e-10, atol=1e-14)


def test_non_convergence_flag():
    res = heat_kernel(0.0, 0.0, 2.0, BENCH, SeriesConfig(lambda_max=1))
    assert not res.converged and res.tail_bound > 1e-8


def test_trace_diag_matches_kernel_trace():
    for x in rng.uniform(-2, 2, 4):
        a = trace_diag(x, 0.8, BENCH).value
        b = np.trace(heat_kernel(x, x, 0.8, BENCH).value)
        assert abs(a - b) < 1e-10 * max(1.0, abs(b))


def test_trace_integral_matches_partition():
    for t in (0.5, 1.0, 2.0):
        a = trace_integral(t, BENCH).value
        b = partition_function(t, BENCH).value
        assert abs(a - b) < 1e-5 * abs(b)


def test_partition_delta_zero():
    p = ModelParams(0.7, 0.0, 0.4)
    for beta in (0.5, 1.0, 3.0):
        ref = 2 * math.exp(beta * 0.49) * math.cosh(0.4 * beta) / (1 - math.exp(-beta))
        assert abs(partition_function(beta, p).value - ref) < 1e-13 * ref


def test_partition_g_zero():
    p = ModelParams(0.0, 1.0, 0.3)
    ref = 2 * math.cosh(p.mu) / (1 - math.exp(-1))
    res = partition_function(1.0, p, SeriesConfig(lambda_max=8))
    assert abs(res.value - ref) < 1e-6


def test_partition_matches_oracle():
    p = ModelParams(1.0, 0.7, 0.4)
    z = partition_function(1.5, p).value
    zo, _ = oracle_partition(1.5, p, FockConfig(400))
    assert abs(z - zo) < 1e-4 * zo


def test_partition_eps_symmetry():
    for beta in (0.5, 1.3):
        a = partition_function(beta, BENCH).value
        b = partition_function(beta, BENCH.flipped()).value
        assert a == b
        assert a > 0


def test_partition_vectorized_and_errors():
    betas = np.array([0.5, 1.0, 2.0])
    vals = partition_function(betas, BENCH).value
    assert np.allclose(vals, [partition_function(b, BENCH).value for b in betas], rtol=1e-12)
    with pytest.raises(ValueError):
        partition_function(0.0, BENCH)


def test_omega_identity_and_limit():
    for t in (0.3, 1.0, 2.5):
        om = omega_numerator(t, BENCH).value
        z = partition_function(t, BENCH).value
        assert abs(om - (1 - math.exp(-t)) * z) < 1e-12 * abs(om)
    assert abs(omega_numerator(1e-3, BENCH).value - 2) < 0.02


def test_omega_complex():
    t = 0.7 + 1.1j
    a = omega_numerator(t, BENCH).value
    b = omega_numerator(t.conjugate(), BENCH).value
    assert abs(a - np.conj(b)) < 1e-12 * abs(a)
    # inside the disc with Re t < 0
    c = omega_numerator(-0.5 + 0.5j, BENCH)
    assert c.converged and np.isfinite(c.value)
    with pytest.raises(ValueError):
        omega_numerator(-3.0 + 0.5j, BENCH)


def test_monotone_quadrature_override():
    cfg = SeriesConfig(rule=QuadratureRule("quasi", 2**12))
    a = partition_function(1.0, BENCH, cfg).value
    b = partition_function(1.0, BENCH).value
    assert abs(a - b) < 1e-3 * b
