import itertools
import math

import numpy as np
import pytest

from aqrm.heat_series import heat_kernel
from aqrm.model import JX, DegenerateModelError, ModelParams, exp_spin, h_func, mehler_base, one_step_kernel
from aqrm.trotter import (
    G_N,
    G_N_product,
    I_N,
    all_bitstrings,
    alpha_closed,
    alpha_rec,
    eta_i,
    fourier_ghat,
    fourier_ghat_brute,
    g_vw,
    lambda_j,
    loglim,
    omega_ij,
    phi,
    trotter_kernel,
    weighted_fourier_sum,
)

BENCH = ModelParams(0.5, 1.0, 0.3)
rng = np.random.default_rng(5)


def test_phi_examples():
    assert phi((0, 0, 0)) == 0
    assert phi((1, 0, 1)) == 2
    assert phi((0, 1, 1, 0, 1)) == 4
    with pytest.raises(ValueError):
        phi((0, 2))


def test_alpha_examples_and_identity():
    assert alpha_closed((0,)) == alpha_rec((0,)) == 1
    assert alpha_closed((1,)) == alpha_rec((1,)) == 0
    for k in range(1, 13):
        for s in all_bitstrings(k):
            assert alpha_closed(s) == alpha_rec(s)


def test_all_bitstrings():
    S = all_bitstrings(3)
    assert S.shape == (8, 3)
    assert [tuple(r) for r in S] == list(itertools.product((0, 1), repeat=3))


def test_index_helpers():
    assert eta_i((0, 0, 1), 1) == 2
    assert eta_i((0, 0, 1), 2) == 0
    assert eta_i((1, 1), 1) == -2
    u, N = 0.7, 5
    assert lambda_j(u, 1, N) == pytest.approx(1 - u ** (2 * N - 1), rel=1e-15)
    assert omega_ij(u, 2, N, N) == 0
    for bad in (lambda: eta_i((0, 1), 2), lambda: lambda_j(u, 0, N), lambda: omega_ij(u, 1, 6, N)):
        with pytest.raises(IndexError):
            bad()


def test_I_N_g_zero():
    u, x, y = 0.8, 0.3, -0.6
    for N in (1, 3, 6):
        ref = mehler_base(x, y, 0.0, -N * math.log(u))
        for s in all_bitstrings(N):
            assert I_N(x, y, u, s, 0.0) == pytest.approx(ref, rel=1e-13)


def test_I_N_global_bit_flip():
    u, g = 0.75, 0.6
    for N in (1, 2, 5):
        for s in all_bitstrings(N):
            x, y = rng.uniform(-1.5, 1.5, 2)
            a = I_N(x, y, u, s, g)
            b = I_N(-x, -y, u, 1 - s, g)
            assert a == pytest.approx(b, rel=1e-12)


def test_I_N_errors():
    with pytest.raises(ValueError):
        I_N(0, 0, 1.2, (0,), 0.5)
    with pytest.raises(ValueError):
        I_N(0, 0, 0.5, (), 0.5)


def test_G_closed_form_vs_product():
    for p in (BENCH, ModelParams(0.5, 0.4, -0.8)):
        for k in range(1, 7):
            for s in all_bitstrings(k):
                assert np.allclose(G_N(0.8, s, p), G_N_product(0.8, s, p), rtol=1e-12, atol=1e-15)


def test_G_k1():
    u = 0.6
    for b in (0, 1):
        ref = 0.5 * (np.eye(2) + (-1) ** (1 - b) * JX) @ exp_spin(BENCH, -math.log(u))
        assert np.allclose(G_N(u, (b,), BENCH), ref, rtol=1e-14)


def test_G_degenerate():
    with pytest.raises(DegenerateModelError):
        G_N(0.5, (0, 1), ModelParams(0.5, 0.0, 0.0))


def test_trotter_n1_equals_one_step():
    for x, y in rng.uniform(-1.5, 1.5, (4, 2)):
        assert np.allclose(trotter_kernel(1, x, y, 0.6, BENCH), one_step_kernel(x, y, 0.6, BENCH), rtol=1e-12)


def _compose(n, x, y, t, p, nodes=60):
    z, w = np.polynomial.hermite.hermgauss(nodes)
    w = w * np.exp(z * z)

    def kern(a, b):
        if b is None:
            return np.array([one_step_kernel(a, zi, t / n, p) for zi in z])
        return np.array([one_step_kernel(zi, b, t / n, p) for zi in z])

    if n == 2:
        return np.einsum("z,zab,zbc->ac", w, kern(x, None), kern(None, y))
    mid = np.array([[one_step_kernel(zi, zj, t / n, p) for zj in z] for zi in z])
    return np.einsum("z,zab,zq,zqbc,q,qcd->ad", w, kern(x, None), np.ones((nodes, nodes)), mid, w, kern(None, y))


def test_trotter_matches_composition():
    x, y, t = 0.4, -0.3, 1.0
    for n in (2, 3):
        a = trotter_kernel(n, x, y, t, BENCH)
        b = _compose(n, x, y, t, BENCH)
        assert np.max(np.abs(a - b)) < 1e-10


def test_trotter_convergence_ladder():
    x, y, t = 0.2, -0.1, 1.0
    ref = heat_kernel(x, y, t, BENCH).value
    errs = [np.max(np.abs(trotter_kernel(n, x, y, t, BENCH) - ref)) for n in (4, 8, 16)]
    for a, b in zip(errs, errs[1:]):
        assert 1.5 <= a / b <= 2.5


def test_trotter_reversed_order_adjoint():
    # K(y, x)^T is the kernel of the reversed product, i.e. E K(x, y) E^{-1} with E = e^{-tM/N}
    for n in (2, 5):
        E = exp_spin(BENCH, 1.0 / n)
        k = trotter_kernel(n, 0.3, 0.7, 1.0, BENCH)
        kt = trotter_kernel(n, 0.7, 0.3, 1.0, BENCH)
        assert np.allclose(kt.T, E @ k @ np.linalg.inv(E), rtol=1e-11)


def test_trotter_eps_zero_parity():
    p = ModelParams(0.5, 1.0, 0.0)
    sz = np.diag([1.0, -1.0])
    for n in (2, 5):
        k = trotter_kernel(n, 0.3, 0.7, 1.0, p)
        km = trotter_kernel(n, -0.3, -0.7, 1.0, p)
        assert np.allclose(sz @ km @ sz, k, rtol=1e-12)


def test_trotter_guards():
    with pytest.raises(ValueError):
        trotter_kernel(21, 0, 0, 1.0, BENCH)
    with pytest.raises(ValueError):
        trotter_kernel(0, 0, 0, 1.0, BENCH)
    with pytest.raises(ValueError):
        trotter_kernel(2, 0, 0, -1.0, BENCH)


def test_fourier_ghat_k0():
    u = 0.7
    tau = u ** (2 * BENCH.mu)
    for v in (0, 1):
        for w in (0, 1):
            assert fourier_ghat((), v, w, u, BENCH) == pytest.approx(h_func(v, w, tau, BENCH), rel=1e-15)


def test_fourier_ghat_brute_force():
    u = 0.65
    for k in range(1, 9):
        for rho in all_bitstrings(k)[:: max(1, 2 ** k // 16)]:
            for v in (0, 1):
                for w in (0, 1):
                    a = fourier_ghat(rho, v, w, u, BENCH)
                    b = fourier_ghat_brute(rho, v, w, u, BENCH)
                    assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


def test_fourier_trivial_character():
    u, k = 0.5, 4
    total = sum(g_vw(s, 0, 1, u, BENCH) for s in all_bitstrings(k))
    assert fourier_ghat((0,) * k, 0, 1, u, BENCH) == pytest.approx(total, rel=1e-13)


def test_weighted_fourier_sum():
    u = 0.6
    for p in (BENCH, ModelParams(0.5, 1.0, 0.0)):
        for k in (1, 3, 6):
            A = rng.uniform(-1, 1, k)
            for v in (0, 1):
                for w in (0, 1):
                    direct, closed = weighted_fourier_sum(A, v, w, u, p)
                    assert abs(direct - closed) < 1e-10 * max(1.0, abs(direct))
    direct, closed = weighted_fourier_sum(np.zeros(3), 0, 1, u, BENCH)
    assert direct == pytest.approx(fourier_ghat((0, 0, 0), 0, 1, u, BENCH), rel=1e-14)
    with pytest.raises(ValueError):
        weighted_fourier_sum([], 0, 0, u, BENCH)


def test_loglim_leading_coefficient():
    t = 1.3
    Ns = np.array([50.0, 100.0, 200.0, 400.0, 800.0])
    for i in (0, 1):
        scaled = Ns * loglim(i, t, Ns, BENCH)
        c0, c1 = np.polyfit(1.0 / Ns, scaled, 1)[::-1]
        target = (-1) ** i * t * BENCH.eps
        assert abs(c0 - target) < 0.01 * abs(target)
