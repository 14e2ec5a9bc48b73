import math
import warnings

import numpy as np
import pytest

from aqrm.fock import (
    FockConfig,
    build_hamiltonian,
    counting,
    eigen_spectrum,
    hermite_psi,
    hermite_table,
    oracle_kernel,
    oracle_partition,
)
from aqrm.model import ModelParams, exp_spin, mehler_base


def test_hamiltonian_structure():
    H = build_hamiltonian(ModelParams(0.7, 0.4, 0.3), FockConfig(20))
    assert H.shape == (42, 42)
    assert np.array_equal(H, H.T)
    H0 = build_hamiltonian(ModelParams(0.0, 0.4, 0.0), FockConfig(20))
    assert np.array_equal(H0, np.diag(np.diag(H0)))
    assert np.allclose(np.sort(np.diag(H0)), np.sort([n + s * 0.4 for n in range(21) for s in (1, -1)]))


def test_g_zero_spectrum():
    p = ModelParams(0.0, 1.0, 0.3)
    spec = eigen_spectrum(p, FockConfig(60))
    ref = np.sort([n + s * p.mu for n in range(60) for s in (1, -1)])[: len(spec)]
    assert np.max(np.abs(spec.eigenvalues - ref)) < 1e-10


def test_delta_zero_spectrum():
    p = ModelParams(0.6, 0.0, 0.25)
    spec = eigen_spectrum(p, FockConfig(200))
    ref = np.sort([n - 0.36 + s * 0.25 for n in range(200) for s in (1, -1)])[:20]
    assert np.max(np.abs(spec.eigenvalues[:20] - ref)) < 1e-10


def test_cutoff_convergence():
    p = ModelParams(1.0, 1.0, 1.0)
    a = eigen_spectrum(p, FockConfig(150)).eigenvalues[:50]
    b = eigen_spectrum(p, FockConfig(300)).eigenvalues[:50]
    assert np.max(np.abs(a - b)) < 1e-8


def test_eps_symmetry():
    p = ModelParams(0.8, 0.6, 0.45)
    a = eigen_spectrum(p, FockConfig(200)).eigenvalues
    b = eigen_spectrum(p.flipped(), FockConfig(200)).eigenvalues
    assert np.max(np.abs(a - b)) < 1e-10


def test_variational_bounds():
    for g, d, e in [(0.5, 1.0, 0.3), (1.0, 0.7, -0.4), (1.5, 2.0, 0.0)]:
        ev = eigen_spectrum(ModelParams(g, d, e), FockConfig(200)).eigenvalues
        assert ev[0] <= -g * g + d
        assert ev[0] >= -g * g - math.sqrt(d * d + e * e)


def test_hermite_psi():
    assert hermite_psi(0, 0.0) == pytest.approx(math.pi**-0.25, rel=1e-15)
    z, w = np.polynomial.hermite.hermgauss(80)
    tab = hermite_table(50, z) * np.exp(z * z / 2)
    gram = (tab * w) @ tab.T
    assert np.max(np.abs(gram - np.eye(51))) < 1e-10
    x = np.linspace(0.1, 3, 7)
    for n in range(12):
        assert np.allclose(hermite_psi(n, -x), (-1) ** n * hermite_psi(n, x), rtol=1e-14)


def test_oracle_kernel_symmetric():
    p = ModelParams(0.5, 1.0, 0.3)
    a = oracle_kernel(0.3, -0.8, 2.0, p, FockConfig(120))
    b = oracle_kernel(-0.8, 0.3, 2.0, p, FockConfig(120))
    assert np.max(np.abs(a - b.T)) < 1e-12


def test_oracle_kernel_decoupled():
    p = ModelParams(0.0, 0.8, 0.0)
    k = oracle_kernel(0.2, 0.5, 1.5, p, FockConfig(120))
    ref = mehler_base(0.2, 0.5, 0.0, 1.5) * exp_spin(p, 1.5)
    assert np.max(np.abs(k - ref)) < 1e-10


def test_oracle_kernel_truncation_warning():
    with pytest.warns(RuntimeWarning):
        oracle_kernel(0.0, 0.0, 0.05, ModelParams(0.5, 1.0, 0.3), FockConfig(60))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        oracle_kernel(0.0, 0.0, 4.0, ModelParams(0.5, 1.0, 0.3), FockConfig(60))


def test_oracle_partition_closed_forms():
    p = ModelParams(0.0, 1.0, 0.3)
    z, _ = oracle_partition(1.0, p, FockConfig(200))
    assert abs(z - 2 * math.cosh(p.mu) / (1 - math.exp(-1))) < 1e-10
    p = ModelParams(0.6, 0.0, 0.25)
    z, _ = oracle_partition(1.0, p, FockConfig(200))
    assert abs(z - 2 * math.exp(0.36) * math.cosh(0.25) / (1 - math.exp(-1))) < 1e-9
    with pytest.raises(ValueError):
        oracle_partition(0.01, p, FockConfig(30))


def test_counting():
    spec = eigen_spectrum(ModelParams(0.0, 0.4, 0.0), FockConfig(100))
    assert counting(10.5, spec) == 22
    counts = [counting(T, spec) for T in np.linspace(-1, 15, 40)]
    assert all(b >= a for a, b in zip(counts, counts[1:]))
    with pytest.raises(ValueError):
        counting(spec.top + 1, spec)


def test_weyl_ratio():
    spec = eigen_spectrum(ModelParams(1.0, 1.0, 0.5), FockConfig(600))
    assert 0.9 <= counting(50, spec) / 100 <= 1.1


def test_spectrum_exports():
    spec = eigen_spectrum(ModelParams(0.5, 1.0, 0.3), FockConfig(30))
    assert len(spec) == 10
    assert spec.to_csv().splitlines()[0] == "index,eigenvalue"
    assert '"cutoff": 30' in spec.to_json()
    with pytest.raises(ValueError):
        FockConfig(0)
