"""Spectral zeta function ``zeta(s; tau) = sum_j (lambda_j + tau)^{-s}``.

Three routes are provided:

* ``zeta_dirichlet``: the defining sum over an oracle spectrum plus a Weyl tail.
* ``zeta_mellin``: ``Gamma(s)^{-1} int_0^inf t^{s-1} Z(t) e^{-tau t} dt`` for ``Re s > 1``.
* ``zeta_hankel``: the Hankel-contour continuation to ``s != 1``.

Both integral routes take ``Z(t)`` from the heat-kernel series for
``t <= t_split``.  For larger ``t`` they use a spectral representation obtained
by Nystrom discretization of the series kernel at ``t0`` (its eigenvalues are
``e^{-t0 lambda_k}``), which converges far faster than the series there.

Levels with ``Re(lambda_k + tau) <= deflate_margin`` are removed from ``Z`` and
their ``(lambda_k + tau)^{-s}`` (principal branch) is added back exactly.  For
``lambda_1 + tau <= 0`` this is what makes the integrals finite at all; such
results carry the ``"divergent-integral"`` flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh
from scipy.special import gamma as gamma_fn
from scipy.special import roots_jacobi, roots_legendre

from .fock import Spectrum, counting
from .heat_series import SeriesConfig, heat_kernel_grid, omega_numerator
from .model import SQRT2, ModelParams


@dataclass(frozen=True)
class ZetaConfig:
    """Quadrature and contour settings.

    ``delta`` is the Hankel circle radius and ``ray_length`` the ray cut-off
    ``R`` (``None`` picks it from the decay rate).
    """

    series: SeriesConfig = field(default_factory=SeriesConfig)
    t_split: float = 1.0
    nystrom_t0: float = 0.5
    nystrom_points: int = 161
    nystrom_half_width: float | None = None
    deflate_margin: float = 0.25
    small_nodes: int = 40
    panel_nodes: int = 24
    panel_width: float = 1.0
    delta: float = 0.5
    ray_length: float | None = None
    circle_nodes: int = 64
    decay_tol: float = 1e-16

    def __post_init__(self):
        if not 0 < self.delta < math.pi:
            raise ValueError("contour radius must be in (0, pi)")
        if not 0 < self.nystrom_t0 <= self.t_split:
            raise ValueError("need 0 < nystrom_t0 <= t_split")


@dataclass(frozen=True)
class ZetaQuery:
    s: complex
    tau: float
    params: ModelParams
    cfg: ZetaConfig = field(default_factory=ZetaConfig)

    def __post_init__(self):
        if not math.isfinite(self.tau):
            raise ValueError("tau must be finite")


@dataclass
class ZetaResult:
    value: complex
    error: float
    flags: tuple = ()
    deflated: tuple = ()


# ----------------------------------------------------------------------------
# spectral representation of Z(t) for large t


@lru_cache(maxsize=16)
def _nystrom_cached(params: ModelParams, t0: float, n: int, half: float, series: SeriesConfig):
    x = np.linspace(-half, half, n)
    h = x[1] - x[0]
    G = heat_kernel_grid(x, x, t0, params, series)
    K = G.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n) * h
    nu = eigh(0.5 * (K + K.T), eigvals_only=True)[::-1]
    nu = nu[nu > 1e-14 * nu[0]]
    lam = -np.log(nu) / t0
    lam.setflags(write=False)
    return lam


def nystrom_spectrum(params: ModelParams, cfg: ZetaConfig | None = None) -> np.ndarray:
    """Eigenvalues ``lambda_k`` (ascending) extracted from the series kernel at ``t0``.

    The trapezoid grid covers ``[-L, L]`` with ``L = 8 + 2 sqrt2 g`` unless
    overridden.  Only the low part is accurate; high levels only matter for
    ``t`` near ``t0`` where their weight is tiny.
    """
    cfg = cfg or ZetaConfig()
    half = cfg.nystrom_half_width or 8.0 + 2.0 * SQRT2 * params.g
    return _nystrom_cached(params, cfg.nystrom_t0, cfg.nystrom_points, half, cfg.series)


def _split_levels(q: ZetaQuery):
    lam = nystrom_spectrum(q.params, q.cfg)
    shifted = lam + q.tau
    if np.min(np.abs(shifted)) < 1e-6:
        raise ValueError(f"-tau={-q.tau} is within 1e-6 of an eigenvalue")
    mask = shifted <= q.cfg.deflate_margin
    return lam[mask], lam[~mask]


def _flags(deflated, tau) -> tuple:
    flags = []
    if len(deflated):
        flags.append("deflated")
        if deflated[0] + tau <= 0:
            flags.append("divergent-integral")
    return tuple(flags)


def _z_series(t, params: ModelParams, cfg: ZetaConfig, chunk: int = 8):
    """``Z(t) = Omega(t) / (1 - e^{-t})`` from the series for an array of (complex) t."""
    t = np.atleast_1d(t)
    out = np.empty(t.shape, dtype=complex if np.iscomplexobj(t) else float)
    err = 0.0
    for lo in range(0, len(t), chunk):
        tt = t[lo : lo + chunk]
        res = omega_numerator(tt, params, cfg.series, radius=max(cfg.delta, 1.0) + 1e-9)
        out[lo : lo + chunk] = res.value / -np.expm1(-tt)
        denom = float(np.min(np.abs(-np.expm1(-tt))))
        err = max(err, (res.quad_error + res.tail_bound) / denom)
    return out, err


def _z_remainder_series(t, q: ZetaQuery, deflated):
    z, err = _z_series(t, q.params, q.cfg)
    if len(deflated):
        z = z - np.exp(-np.multiply.outer(t, deflated)).sum(axis=-1)
    return z, err


def _z_remainder_spectral(t, rest):
    return np.exp(-np.multiply.outer(t, rest)).sum(axis=-1)


def _decay_length(rest, tau, cfg: ZetaConfig, s_re: float) -> float:
    rate = float(rest[0] + tau)
    # t^{Re s} e^{-rate t} below decay_tol, solved crudely by fixed-point iteration
    R = -math.log(cfg.decay_tol) / rate
    for _ in range(20):
        R = (-math.log(cfg.decay_tol) + max(s_re, 0.0) * math.log(max(R, 1.0))) / rate
    return max(R, cfg.t_split + cfg.panel_width)


def _panel_rule(a: float, b: float, cfg: ZetaConfig):
    n_pan = max(1, int(math.ceil((b - a) / cfg.panel_width)))
    x, w = roots_legendre(cfg.panel_nodes)
    edges = np.linspace(a, b, n_pan + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


# ----------------------------------------------------------------------------
# Dirichlet reference


def zeta_dirichlet(q: ZetaQuery, spectrum: Spectrum) -> complex:
    """Sum over the trusted spectrum plus ``2 (lambda_last + tau)^{1-s} / (s - 1)``."""
    s = complex(q.s)
    if s.real <= 1:
        raise ValueError("Dirichlet series needs Re(s) > 1")
    shifted = spectrum.eigenvalues.astype(complex) + q.tau
    if np.min(np.abs(shifted)) < 1e-6:
        raise ValueError(f"-tau={-q.tau} is within 1e-6 of an eigenvalue")
    body = np.sum(shifted ** (-s))
    tail = 2.0 * shifted[-1] ** (1.0 - s) / (s - 1.0)
    return complex(body + tail)


# ----------------------------------------------------------------------------
# Mellin route


def _mellin_small(q: ZetaQuery, deflated, n: int):
    """``int_0^{t_split} t^{s-1} Z_rem(t) e^{-tau t} dt`` by Gauss-Jacobi in ``t^{Re s - 2}``."""
    s = complex(q.s)
    T = q.cfg.t_split
    beta = s.real - 2.0
    x, w = roots_jacobi(n, 0.0, beta)
    t = T * (1.0 + x) / 2.0
    w = w * (T / 2.0) ** (beta + 1.0)
    z, err = _z_remainder_series(t, q, deflated)
    f = t * z * np.exp(-q.tau * t) * t ** (1j * s.imag)
    return complex(np.sum(w * f)), err * float(np.sum(np.abs(w) * t * np.exp(-q.tau * t)))


def _mellin_large(q: ZetaQuery, rest):
    s = complex(q.s)
    R = _decay_length(rest, q.tau, q.cfg, s.real)
    nodes, weights = _panel_rule(q.cfg.t_split, R, q.cfg)
    f = nodes ** (s - 1.0) * _z_remainder_spectral(nodes, rest) * np.exp(-q.tau * nodes)
    return complex(np.sum(weights * f))


def zeta_mellin(q: ZetaQuery) -> ZetaResult:
    """Mellin transform of ``Z(t) e^{-tau t}``; requires ``Re s > 1``."""
    s = complex(q.s)
    if s.real <= 1:
        raise ValueError("the Mellin integral needs Re(s) > 1")
    deflated, rest = _split_levels(q)
    n = q.cfg.small_nodes
    small, serr = _mellin_small(q, deflated, n)
    small_lo, _ = _mellin_small(q, deflated, n - 8)
    large = _mellin_large(q, rest)
    g = complex(gamma_fn(s))
    value = (small + large) / g + np.sum((deflated + q.tau).astype(complex) ** (-s))
    err = (abs(small - small_lo) + serr) / abs(g)
    return ZetaResult(complex(value), float(err), _flags(deflated, q.tau), tuple(map(float, deflated)))


# ----------------------------------------------------------------------------
# Hankel route


def _is_int(s: complex) -> bool:
    return s.imag == 0 and float(s.real).is_integer()


def zeta_hankel(q: ZetaQuery) -> ZetaResult:
    """Contour continuation ``-Gamma(1-s)/(2 pi i) int (-w)^{s-1} Z(w) e^{-tau w} dw``.

    The contour runs in along the upper side of the positive axis from ``R``
    to ``delta``, once anticlockwise round ``|w| = delta`` and back out along
    the lower side, with ``arg(-w)`` in ``[-pi, pi]``.  Integer ``s >= 2`` is
    delegated to :func:`zeta_mellin`; ``s = 1`` is the pole.
    """
    s = complex(q.s)
    if s == 1:
        raise ValueError("s = 1 is the pole of the zeta function")
    if _is_int(s) and s.real >= 2:
        res = zeta_mellin(q)
        res.flags = res.flags + ("integer-s-mellin",)
        return res
    cfg = q.cfg
    deflated, rest = _split_levels(q)
    delta = cfg.delta
    pref = -complex(gamma_fn(1.0 - s)) / (2j * math.pi)

    # circle: w = delta e^{i phi}, (-w)^{s-1} = delta^{s-1} e^{i (phi - pi)(s-1)}
    x, wq = roots_legendre(cfg.circle_nodes)
    phi = math.pi * (x + 1.0)
    wphi = math.pi * wq
    w = delta * np.exp(1j * phi)
    zc, zerr = _z_remainder_series(w, q, deflated)
    circ_f = delta ** (s - 1.0) * np.exp(1j * (phi - math.pi) * (s - 1.0)) * zc * np.exp(-q.tau * w) * 1j * w
    circle = complex(np.sum(wphi * circ_f))

    rays = 0.0
    R = cfg.ray_length or _decay_length(rest, q.tau, cfg, s.real)
    flags = list(_flags(deflated, q.tau))
    if not (_is_int(s) and s.real <= 0):
        ray = 0.0
        if delta < cfg.t_split:
            xr, wr = roots_legendre(cfg.panel_nodes)
            r = delta + (cfg.t_split - delta) * (xr + 1.0) / 2.0
            wr = wr * (cfg.t_split - delta) / 2.0
            zr, _ = _z_remainder_series(r, q, deflated)
            ray += np.sum(wr * r ** (s - 1.0) * zr * np.exp(-q.tau * r))
        start = max(delta, cfg.t_split)
        nodes, weights = _panel_rule(start, R, cfg)
        ray += np.sum(weights * nodes ** (s - 1.0) * _z_remainder_spectral(nodes, rest) * np.exp(-q.tau * nodes))
        rays = 2j * np.sin(math.pi * (s - 1.0)) * ray
        tail = R ** max(s.real - 1.0, 0.0) * math.exp(-R * (rest[0] + q.tau)) * len(rest)
        if tail > 1e-10:
            flags.append("ray-truncation")
    value = pref * (rays + circle) + np.sum((deflated + q.tau).astype(complex) ** (-s))
    err = abs(pref) * zerr * 2 * math.pi * delta ** (s.real) * math.exp(abs(q.tau) * delta)
    return ZetaResult(complex(value), float(err), tuple(flags), tuple(map(float, deflated)))


# ----------------------------------------------------------------------------
# residue and Weyl law


@dataclass
class ResidueResult:
    value: float
    error: float
    samples: list
    converged: bool


def residue_probe(tau: float, params: ModelParams, cfg: ZetaConfig | None = None, ks=range(2, 7)) -> ResidueResult:
    """Richardson extrapolation of ``(s-1) zeta_mellin(s)`` at ``s = 1 + 2^{-k}``."""
    cfg = cfg or ZetaConfig()
    hs = [2.0**-k for k in ks]
    vals = [(h * zeta_mellin(ZetaQuery(1.0 + h, tau, params, cfg)).value).real for h in hs]
    table = [vals]
    for j in range(1, len(vals)):
        prev = table[-1]
        table.append([(2**j * prev[i + 1] - prev[i]) / (2**j - 1) for i in range(len(prev) - 1)])
    est = table[-1][0]
    err = abs(est - table[-2][-1])
    return ResidueResult(float(est), float(err), list(zip(hs, vals)), err < 1e-2)


def weyl_report(spectrum: Spectrum, T_list):
    """Rows ``(T, N(T), N(T) / (2 T))``."""
    rows = []
    for T in T_list:
        n = counting(T, spectrum)
        rows.append((float(T), n, n / (2.0 * T)))
    return rows
