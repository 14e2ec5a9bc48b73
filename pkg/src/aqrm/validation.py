"""Acceptance checks shared by ``aqrm validate`` and the test-suite.

Each check returns a :class:`CheckResult`; ``SUITES`` groups them for the CLI.
"""

from __future__ import annotations

import itertools
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .fock import FockConfig, eigen_spectrum, oracle_kernel, oracle_partition
from .heat_series import (
    SeriesConfig,
    heat_kernel,
    heat_kernel_grid,
    partition_function,
    trace_diag,
    trace_integral,
)
from .model import ModelParams
from .trotter import alpha_closed, alpha_rec, all_bitstrings, fourier_ghat, fourier_ghat_brute, trotter_kernel
from .trotter import weighted_fourier_sum
from .zeta import ZetaConfig, ZetaQuery, residue_probe, weyl_report, zeta_dirichlet, zeta_hankel, zeta_mellin

BENCH = ModelParams(0.5, 1.0, 0.3)


@dataclass
class CheckResult:
    id: int
    name: str
    passed: bool
    detail: str
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.id:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _rel(a, b, floor=0.0):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)))


@_timed
def check_delta_zero() -> CheckResult:
    """Delta = 0 partition function against the displaced-oscillator closed form."""
    worst = 0.0
    for g, eps, beta in itertools.product((0.5, 1.0), (0.2, 0.7), (0.5, 1.0, 2.0)):
        z = partition_function(beta, ModelParams(g, 0.0, eps)).value
        exact = 2 * math.exp(beta * g * g) * math.cosh(beta * eps) / -math.expm1(-beta)
        worst = max(worst, abs(z - exact) / exact)
    return CheckResult(1, "closed form delta=0", worst < 1e-10, f"max rel err {worst:.2e} (tol 1e-10)", {"max_rel": worst})


@_timed
def check_g_zero() -> CheckResult:
    """g = 0 partition function against 2 cosh(beta mu) / (1 - e^-beta)."""
    worst = 0.0
    cfg = SeriesConfig(lambda_max=8)
    for delta, eps, beta in ((1.0, 0.3, 1.0), (0.7, 0.5, 2.0)):
        z = partition_function(beta, ModelParams(0.0, delta, eps), cfg).value
        exact = 2 * math.cosh(beta * math.hypot(delta, eps)) / -math.expm1(-beta)
        worst = max(worst, abs(z - exact) / exact)
    return CheckResult(2, "closed form g=0", worst < 1e-6, f"max rel err {worst:.2e} (tol 1e-6)", {"max_rel": worst})


@_timed
def check_series_vs_oracle() -> CheckResult:
    """Heat kernel on {0, +-0.5}^2 x {0.5, 1} and Z(1) against the Fock oracle (cutoff 300)."""
    fc = FockConfig(300)
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for x, y, t in itertools.product((0.0, 0.5, -0.5), (0.0, 0.5, -0.5), (0.5, 1.0)):
            k = heat_kernel(x, y, t, BENCH).value
            o = oracle_kernel(x, y, t, BENCH, fc)
            worst = max(worst, _rel(k, o, 1e-3 * np.max(np.abs(o))))
    z = partition_function(1.0, BENCH).value
    zo, _ = oracle_partition(1.0, BENCH, fc)
    zrel = abs(z - zo) / zo
    ok = worst < 1e-4 and zrel < 1e-4
    return CheckResult(
        3, "series vs Fock oracle", ok, f"kernel max rel {worst:.2e}, Z(1) rel {zrel:.2e} (tol 1e-4)",
        {"kernel_max_rel": worst, "partition_rel": zrel},
    )


@_timed
def check_trotter() -> CheckResult:
    """First-order convergence of the Trotter path sum towards the series kernel."""
    x, y, t = 0.2, -0.1, 1.0
    ref = heat_kernel(x, y, t, BENCH).value
    errs = [float(np.max(np.abs(trotter_kernel(n, x, y, t, BENCH) - ref))) for n in (4, 8, 16)]
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    ok = all(1.5 <= r <= 3.0 for r in ratios) and errs[0] > errs[1] > errs[2]
    return CheckResult(
        4, "Trotter convergence", ok, f"errors {', '.join(f'{e:.2e}' for e in errs)}, ratios "
        f"{', '.join(f'{r:.2f}' for r in ratios)} (want 1.5..3)", {"errors": errs, "ratios": ratios},
    )


@_timed
def check_eps_symmetry() -> CheckResult:
    """Z and the kernel trace are unchanged by eps -> -eps."""
    worst = 0.0
    bitwise = True
    flip = BENCH.flipped()
    for beta in (0.5, 1.0, 2.0):
        a, b = partition_function(beta, BENCH).value, partition_function(beta, flip).value
        bitwise &= bool(a == b)
        worst = max(worst, abs(a - b) / a)
        a, b = trace_integral(beta, BENCH).value, trace_integral(beta, flip).value
        worst = max(worst, abs(a - b) / a)
    # pointwise: tr K(x, x; -eps) = tr K(-x, -x; eps) (parity conjugation)
    xs = np.array([-0.7, 0.1, 0.4])
    for x in xs:
        a = np.trace(heat_kernel(x, x, 1.0, flip).value)
        b = np.trace(heat_kernel(-x, -x, 1.0, BENCH).value)
        worst = max(worst, abs(a - b) / abs(b))
    a = trace_diag(xs, 1.0, flip).value
    b = trace_diag(-xs, 1.0, BENCH).value
    worst = max(worst, _rel(a, b))
    ok = worst < 1e-12 and bitwise
    return CheckResult(5, "eps -> -eps symmetry", ok, f"max rel diff {worst:.1e}, Z bit-equal={bitwise} (tol 1e-12)",
                       {"max_rel": worst, "bitwise": bitwise})


@_timed
def check_combinatorics(seed: int = 0) -> CheckResult:
    """alpha closed form vs recursion (k <= 12), Fourier transform vs brute force (k <= 8), weighted sums."""
    alpha_bad = 0
    for k in range(1, 13):
        for rho in all_bitstrings(k):
            alpha_bad += alpha_closed(rho) != alpha_rec(rho)
    u = 0.6
    params = BENCH
    ghat_err = 0.0
    for k in range(0, 9):
        for rho in all_bitstrings(k):
            for v, w in itertools.product((0, 1), repeat=2):
                a = fourier_ghat(rho, v, w, u, params)
                b = fourier_ghat_brute(rho, v, w, u, params)
                ghat_err = max(ghat_err, abs(a - b) / max(1.0, abs(b)))
    rng = np.random.default_rng(seed)
    sum_err = 0.0
    for trial in range(100):
        k = int(rng.integers(1, 9))
        v, w = (int(b) for b in rng.integers(0, 2, 2))
        A = rng.uniform(-1, 1, k)
        lhs, rhs = weighted_fourier_sum(A, v, w, u, params)
        sum_err = max(sum_err, abs(lhs - rhs) / max(1.0, abs(lhs)))
    ok = alpha_bad == 0 and ghat_err < 1e-10 and sum_err < 1e-10
    return CheckResult(
        6, "combinatorial identities", ok,
        f"alpha mismatches {alpha_bad}, ghat err {ghat_err:.1e}, weighted-sum err {sum_err:.1e} (tol 1e-10)",
        {"alpha_mismatch": alpha_bad, "ghat_err": ghat_err, "sum_err": sum_err},
    )


@_timed
def check_zeta() -> CheckResult:
    """Mellin vs Dirichlet, Hankel vs Mellin, contour independence."""
    spec = eigen_spectrum(BENCH, FockConfig(600))
    q = ZetaQuery(2.0, 1.0, BENCH)
    zm = zeta_mellin(q).value
    zd = zeta_dirichlet(q, spec)
    md = abs(zm - zd) / abs(zd)
    hm = 0.0
    for s in (2.5, 3 + 1j):
        q = ZetaQuery(s, 1.0, BENCH)
        hm = max(hm, abs(zeta_hankel(q).value - zeta_mellin(q).value) / abs(zeta_mellin(q).value))
    vals = [
        zeta_hankel(ZetaQuery(2.5, 2.0, BENCH, ZetaConfig(delta=d, ray_length=R))).value
        for d, R in ((0.3, 30.0), (0.6, 45.0), (1.0, 60.0))
    ]
    indep = max(abs(v - vals[0]) for v in vals) / abs(vals[0])
    ok = md < 1e-3 and hm < 1e-3 and indep < 1e-6
    return CheckResult(
        7, "zeta consistency", ok,
        f"mellin/dirichlet {md:.1e}, hankel/mellin {hm:.1e} (tol 1e-3), contour {indep:.1e} (tol 1e-6)",
        {"mellin_dirichlet": md, "hankel_mellin": hm, "contour": indep},
    )


@_timed
def check_residue() -> CheckResult:
    """(s-1) zeta(s) -> 2 at s = 1 for two parameter triples and two shifts."""
    vals = {}
    for p in (BENCH, ModelParams(1.0, 0.7, 0.5)):
        for tau in (1.0, 2.0):
            vals[(p.g, p.delta, p.eps, tau)] = residue_probe(tau, p).value
    worst = max(abs(v - 2.0) for v in vals.values())
    detail = ", ".join(f"{v:.5f}" for v in vals.values())
    return CheckResult(8, "residue at s=1", worst < 0.02, f"residues {detail} (want 2 +- 0.02)",
                       {"residues": [[*k, v] for k, v in vals.items()]})


@_timed
def check_weyl() -> CheckResult:
    """N(T) / 2T at T = 50, cutoff 600, eps in {0, 0.7}."""
    ratios = []
    for eps in (0.0, 0.7):
        spec = eigen_spectrum(ModelParams(1.0, 1.0, eps), FockConfig(600))
        ratios.append(weyl_report(spec, [50.0])[0][2])
    agree = abs(ratios[0] - ratios[1]) / ratios[1]
    ok = all(0.95 <= r <= 1.05 for r in ratios) and agree < 0.05
    return CheckResult(9, "Weyl law", ok, f"ratios {ratios[0]:.4f}, {ratios[1]:.4f}, spread {agree:.1e}",
                       {"ratios": ratios, "spread": agree})


@_timed
def check_self_consistency() -> CheckResult:
    """Semigroup, self-adjointness and trace integral."""
    z, wz = np.polynomial.hermite.hermgauss(60)
    wz = wz * np.exp(z * z)
    pts = np.array([-0.5, 0.3])
    A = heat_kernel_grid(pts, z, 0.5, BENCH)
    B = heat_kernel_grid(z, pts, 0.7, BENCH)
    comp = np.einsum("xzab,z,zybc->xyac", A, wz, B)
    direct = heat_kernel_grid(pts, pts, 1.2, BENCH)
    semi = float(np.max(np.abs(comp - direct)))

    grid = np.linspace(-1.0, 1.0, 5)
    sa, tol = 0.0, 0.0
    for x, y in itertools.product(grid, grid):
        kxy = heat_kernel(x, y, 1.0, BENCH)
        kyx = heat_kernel(y, x, 1.0, BENCH)
        sa = max(sa, float(np.max(np.abs(kxy.value - kyx.value.T))))
        tol = max(tol, kxy.quad_error + kyx.quad_error + kxy.tail_bound + kyx.tail_bound)
    tr = abs(trace_integral(1.0, BENCH).value - partition_function(1.0, BENCH).value)
    ok = semi < 1e-3 and sa <= tol and tr < 1e-5
    return CheckResult(
        10, "analytic self-consistency", ok,
        f"semigroup {semi:.1e} (tol 1e-3), adjoint {sa:.1e} (tol {tol:.1e}), trace {tr:.1e} (tol 1e-5)",
        {"semigroup": semi, "adjoint": sa, "adjoint_tol": tol, "trace": tr},
    )


ALL_CHECKS = [
    check_delta_zero,
    check_g_zero,
    check_series_vs_oracle,
    check_trotter,
    check_eps_symmetry,
    check_combinatorics,
    check_zeta,
    check_residue,
    check_weyl,
    check_self_consistency,
]

SUITES = {
    "closed-forms": [check_delta_zero, check_g_zero, check_eps_symmetry],
    "oracle": [check_series_vs_oracle, check_trotter, check_self_consistency],
    "fourier": [check_combinatorics],
    "zeta": [check_zeta, check_residue, check_weyl],
    "all": ALL_CHECKS,
}


def run_suite(name: str):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    return [check() for check in SUITES[name]]
