"""Closed-form heat kernel, diagonal trace and partition function of the AQRM.

The kernel is a series in powers of ``t*delta``; the lambda-th term is an
integral over the ordered lambda-simplex of exponentials built from the
functions ``theta``, ``xi``, ``eta`` and (for the trace) ``psi_minus``.  All
helpers broadcast: ``mu`` may have shape ``(lam,)`` or ``(P, lam)`` and ``t``
may be a scalar or a 1-D array of (possibly complex) times, in which case the
results gain a leading time axis.

The convention ``mu_0 = 0`` is applied internally; callers never pass it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import SQRT2, HeatTime, ModelParams
from .simplex import TENSOR, QuadratureRule, companion_nodes, default_rule, simplex_nodes, weighted_sum

__all__ = [
    "SeriesConfig",
    "KernelResult",
    "SeriesResult",
    "theta",
    "xi",
    "eta",
    "psi_minus",
    "kernel_term",
    "heat_kernel",
    "heat_kernel_grid",
    "trace_diag",
    "trace_integral",
    "partition_function",
    "omega_numerator",
    "tail_bound",
]


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation and quadrature settings for the series.

    ``lambda_max`` caps the simplex dimension of kernel terms.  For the
    partition function (which only has even dimensions ``2l``) it caps ``l``.
    ``rule`` overrides the per-dimension default simplex rule; ``tensor_order``
    only changes the order of the tensor rules (dimensions up to 5).
    ``trace_points`` is the Gauss-Legendre size for spatial ``dx`` integrals;
    the window is ``trace_sigmas`` envelope widths plus the coupling shift.
    """

    lambda_max: int = 12
    tail_tol: float = 1e-8
    rule: QuadratureRule | None = None
    seed: int = 0
    trace_points: int = 96
    trace_sigmas: float = 6.0
    tensor_order: int | None = None

    def __post_init__(self):
        if self.lambda_max < 0:
            raise ValueError("lambda_max must be >= 0")
        if not self.tail_tol > 0:
            raise ValueError("tail_tol must be > 0")

    def rule_for(self, lam: int) -> QuadratureRule:
        if self.rule is not None:
            return self.rule
        rule = default_rule(lam, self.seed)
        if self.tensor_order is not None and rule.kind == TENSOR:
            return QuadratureRule(TENSOR, self.tensor_order)
        return rule


@dataclass
class KernelResult:
    value: np.ndarray
    lambda_used: int
    quad_error: float
    tail_bound: float
    converged: bool = True


@dataclass
class SeriesResult:
    """Scalar (or array) series value with its diagnostics."""

    value: object
    lambda_used: int
    quad_error: float
    tail_bound: float
    converged: bool = True
    terms: list = field(default_factory=list)


# ----------------------------------------------------------------------------
# building blocks


def _time(t):
    if isinstance(t, HeatTime):
        return t.t
    return t


def _check_real_time(t):
    t = _time(t)
    if np.iscomplexobj(t):
        return t
    if np.any(np.asarray(t) <= 0):
        raise ValueError("t must be > 0")
    return t


def _mu_array(p) -> np.ndarray:
    mu = np.asarray(getattr(p, "mu", p), dtype=float)
    if mu.ndim == 0:
        mu = mu.reshape(1)
    return mu


def _with_mu0(mu: np.ndarray) -> np.ndarray:
    """Prepend the ``mu_0 = 0`` column: ``(..., lam) -> (..., lam+1)``."""
    return np.concatenate([np.zeros(mu.shape[:-1] + (1,)), mu], axis=-1)


def _tcol(t):
    """Time as an array broadcastable against ``(P,)`` results."""
    t = np.asarray(t)
    return t[..., None] if t.ndim else t


def _alt(vals):
    """``sum_gamma (-1)^gamma vals[..., gamma]``."""
    signs = (-1.0) ** np.arange(vals.shape[-1])
    return np.sum(vals * signs, axis=-1)


def theta_coeffs(mu, t, g: float):
    """Coefficients ``(X, Y)`` with ``theta = X*x + Y*y``."""
    m = _with_mu0(mu)
    lam = m.shape[-1] - 1
    gate = (1 - (-1) ** lam) / 2
    sgn = (-1.0) ** lam
    tc = _tcol(t)
    t3 = tc[..., None]
    pre = SQRT2 * g / np.sinh(tc)  # 2 sqrt2 g e^-t / (1 - e^-2t)
    cth = 1.0 / np.tanh(tc / 2.0)  # (1 + e^-t) / (1 - e^-t)
    c = 2.0 * np.cosh(t3 * (1.0 - m))
    d = 2.0 * np.cosh(t3 * m)
    X = pre * gate * 2.0 * np.cosh(tc) - SQRT2 * g * cth + pre * sgn * _alt(c)
    Y = -2.0 * pre * gate + SQRT2 * g * cth - pre * sgn * _alt(d)
    return X, Y


def theta(x, y, p, t, params: ModelParams):
    """Linear-in-(x, y) exponent of the lambda-th kernel term."""
    X, Y = theta_coeffs(_mu_array(p), _time(t), params.g)
    return X * x + Y * y


def xi(p, t, params: ModelParams):
    """Quadratic-in-g exponent of the lambda-th term (zero when g = 0)."""
    m = _with_mu0(_mu_array(p))
    lam = m.shape[-1] - 1
    g = params.g
    tc = _tcol(_time(t))
    t3 = tc[..., None]
    k = g * g / np.sinh(tc)  # 2 g^2 e^-t / (1 - e^-2t)
    ml = m[..., -1]
    d = 2.0 * np.cosh(t3 * m)
    out = -k * 4.0 * np.sinh(tc * (1.0 - ml) / 2.0) ** 2 * (-1.0) ** lam * _alt(d)
    if lam >= 2:
        c = 2.0 * np.cosh(t3 * (1.0 - m))
        cdiff = c[..., 1:] - c[..., :-1]  # index beta: c(mu_{beta+1}) - c(mu_beta)
        ddiff = d[..., :-1] - d[..., 1:]  # index alpha: d(mu_alpha) - d(mu_alpha+1)
        # pairs alpha < beta <= lam-1 with beta - alpha odd
        run = [np.zeros_like(ddiff[..., 0]), np.zeros_like(ddiff[..., 0])]
        acc = np.zeros_like(out)
        for beta in range(lam):
            acc = acc + cdiff[..., beta] * run[(beta + 1) % 2]
            run[beta % 2] = run[beta % 2] + ddiff[..., beta]
        out = out - k * acc
    return out


def eta(p, t):
    """``-2 t (-1)^lam sum_gamma (-1)^gamma mu_gamma``."""
    m = _with_mu0(_mu_array(p))
    lam = m.shape[-1] - 1
    return -2.0 * _tcol(_time(t)) * (-1.0) ** lam * _alt(m)


def psi_minus(p, t, params: ModelParams):
    """Non-negative (for real t) exponent produced by the Gaussian dx integral."""
    m = _with_mu0(_mu_array(p))
    tc = _tcol(_time(t))
    k = params.g**2 / np.sinh(tc)
    bracket = _alt(2.0 * np.sinh(tc[..., None] * (0.5 - m)))
    return k * bracket**2


def _coth_power(t, lam: int):
    """``coth(t/2)`` for even lam, ``tanh(t/2)`` for odd lam."""
    return 1.0 / np.tanh(t / 2.0) if lam % 2 == 0 else np.tanh(t / 2.0)


def _term_exponent(mu, t, params: ModelParams, lam: int):
    """Exponent shared by kernel and trace terms (without psi or the (t delta)^lam power)."""
    g = params.g
    tc = _tcol(t)
    expo = -2.0 * g * g * _coth_power(tc, lam) + xi(mu, t, params)
    if lam % 2 == 0:
        ml = mu[..., -1] if lam else np.zeros(mu.shape[:-1])
        expo = expo + 4.0 * g * g * np.cosh(tc * (1.0 - ml)) / np.sinh(tc)
    return expo


def _power(t, delta: float, lam: int):
    return (_tcol(t) * delta) ** lam if lam else 1.0


@dataclass
class _TermData:
    lam: int
    w: np.ndarray  # quadrature weight x (t delta)^lam x exp(exponent)
    X: np.ndarray
    Y: np.ndarray
    shift: np.ndarray  # eps * (eta + t)


def _term_data(lam, t, params: ModelParams, mu, w) -> _TermData:
    X, Y = theta_coeffs(mu, t, params.g)
    weff = w * _power(t, params.delta, lam) * np.exp(_term_exponent(mu, t, params, lam))
    shift = params.eps * (eta(mu, t) + _tcol(t))
    return _TermData(lam, weff, X, Y, shift)


def _term_matrix(d: _TermData, x, y) -> np.ndarray:
    arg = d.X * x + d.Y * y + d.shift
    cs = weighted_sum(d.w, np.cosh(arg)) if np.ndim(d.w) == 1 else np.sum(d.w * np.cosh(arg), -1)
    ss = weighted_sum(d.w, np.sinh(arg)) if np.ndim(d.w) == 1 else np.sum(d.w * np.sinh(arg), -1)
    sgn = (-1.0) ** d.lam
    return np.array([[sgn * cs, -sgn * ss], [-ss, cs]])


def kernel_term(lam: int, x, y, t, params: ModelParams, rule: QuadratureRule | None = None):
    """The lambda-th series summand (2x2) without the ``K0`` prefactor.

    Returns ``(matrix, quad_error)``.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    t = _check_real_time(t)
    if lam > 0 and params.delta == 0:
        return np.zeros((2, 2)), 0.0
    rule = rule or default_rule(lam)
    mu, w = simplex_nodes(lam, rule)
    val = _term_matrix(_term_data(lam, t, params, mu, w), x, y)
    if lam == 0:
        return val, 0.0
    mu_lo, w_lo = companion_nodes(lam, rule)
    lo = _term_matrix(_term_data(lam, t, params, mu_lo, w_lo), x, y)
    return val, float(np.max(np.abs(val - lo)))


def k0_tilde(x, y, g: float, t):
    """``exp(g^2 t)`` times the Mehler kernel of ``a^dag a`` (broadcasting)."""
    one_m_u2 = -np.expm1(-2.0 * t)
    u = np.exp(-t)
    expo = -(1.0 + u * u) * (x * x + y * y) / (2.0 * one_m_u2) + 2.0 * u * x * y / one_m_u2
    return np.exp(g * g * t + expo) / np.sqrt(np.pi * one_m_u2)


# ----------------------------------------------------------------------------
# truncation majorant


def _alt_monotone_bound(amax):
    # alternating sum of a monotone non-negative sequence is bounded by its max
    return amax


def tail_bound(lam: int, t, params: ModelParams, x=None, y=None) -> float:
    """Majorant of the lambda-th summand.

    With ``x, y`` given it bounds the kernel term entries (without ``K0``);
    otherwise it bounds the partition-function summand of dimension ``lam``
    (the partition-function bracket, without ``2 e^{g^2 t} / (1 - e^{-t})``).
    Suprema over the simplex use monotonicity of the alternating sums for
    real ``t`` and the plain triangle inequality for complex ``t``.
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    t = _time(t)
    if lam >= 1 and params.delta == 0:
        return 0.0
    g, eps = params.g, params.eps
    at = abs(t)
    if np.iscomplexobj(t):
        # For ordered mu, |sum (-1)^gamma f(mu_gamma)| <= max|f| + TV(f), and the
        # xi double sum is bounded by TV(c) TV(d); all lambda-independent.
        ch, sh_a = math.cosh(at), math.sinh(at)
        k = g * g / abs(np.sinh(t))
        tv = 2 * at * sh_a  # total variation of 2cosh(t mu) and 2cosh(t(1-mu))
        alt_cd = 2 * ch + tv
        expo = float(np.real(-2 * g * g * _coth_power(t, lam)))
        if lam % 2 == 0:
            expo += 4 * ch * k
        expo += k * 4 * math.sinh(at / 2) ** 2 * alt_cd
        if lam >= 2:
            expo += k * tv * tv
        if x is None:
            alt_s = 2 * math.sinh(at / 2) + 2 * at * math.cosh(at / 2)
            expo += k * alt_s**2 + abs(eps) * 3 * at
        else:
            pre = SQRT2 * g / abs(np.sinh(t))
            cth = abs(1 / np.tanh(t / 2))
            xb = pre * 2 * ch * (lam % 2) + SQRT2 * g * cth + pre * alt_cd
            yb = 2 * pre * (lam % 2) + SQRT2 * g * cth + pre * alt_cd
            expo += xb * abs(x) + yb * abs(y) + abs(eps) * 3 * at
        return float((at * params.delta) ** lam / math.factorial(lam) * math.exp(expo))
    sh, ch = math.sinh(t), math.cosh(t)
    k = g * g / sh
    const = -2 * g * g * float(_coth_power(t, lam))
    sup = const
    if lam % 2 == 0:
        sup += 4 * g * g * ch / sh
    # xi: first part <= k*4 sinh^2(t/2)*2cosh t; double sum <= k*(2cosh t - 2)^2
    sup += k * 4 * math.sinh(t / 2) ** 2 * _alt_monotone_bound(2 * ch)
    if lam >= 2:
        sup += k * (2 * ch - 2) ** 2
    if x is None:
        sup += k * (4 * math.sinh(t / 2)) ** 2  # psi_minus
        sup += abs(eps) * 3 * t  # cosh(eps (t + eta)), |eta| <= 2t
    else:
        pre = SQRT2 * g / sh
        cth = 1.0 / math.tanh(t / 2)
        xb = pre * 2 * ch * (lam % 2) + SQRT2 * g * cth + pre * 2 * ch
        yb = 2 * pre * (lam % 2) + SQRT2 * g * cth + pre * 2 * ch
        sup += xb * abs(x) + yb * abs(y) + abs(eps) * 3 * t
    return float((t * params.delta) ** lam / math.factorial(lam) * math.exp(sup))


# ----------------------------------------------------------------------------
# heat kernel


def heat_kernel(x: float, y: float, t, params: ModelParams, cfg: SeriesConfig | None = None) -> KernelResult:
    """Series heat kernel ``K(x, y, t)`` as a 2x2 matrix with diagnostics."""
    cfg = cfg or SeriesConfig()
    t = _check_real_time(t)
    if np.iscomplexobj(t):
        raise ValueError("heat_kernel is real-mode only")
    total = np.zeros((2, 2))
    qerr = 0.0
    lam_used = 0
    tb = 0.0
    for lam in range(cfg.lambda_max + 1):
        term, err = kernel_term(lam, x, y, t, params, cfg.rule_for(lam))
        total = total + term
        qerr += err
        lam_used = lam
        tb = tail_bound(lam + 1, t, params, x, y)
        if tb < cfg.tail_tol:
            break
    pref = k0_tilde(x, y, params.g, t)
    return KernelResult(pref * total, lam_used, pref * qerr, pref * tb, tb < cfg.tail_tol)


def heat_kernel_grid(xs, ys, t, params: ModelParams, cfg: SeriesConfig | None = None, chunk: int = 8192):
    """Kernel on the tensor grid ``xs x ys``; returns shape ``(nx, ny, 2, 2)``.

    Uses ``cosh(X x + Y y + s) = (e^{Xx} e^{Yy+s} + e^{-Xx} e^{-Yy-s}) / 2`` so the
    node sum becomes two matrix products per simplex dimension.
    """
    cfg = cfg or SeriesConfig()
    t = float(_check_real_time(t))
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    xmax, ymax = float(np.max(np.abs(xs))), float(np.max(np.abs(ys)))
    out = np.zeros((len(xs), len(ys), 2, 2))
    for lam in range(cfg.lambda_max + 1):
        if lam > 0 and params.delta == 0:
            break
        mu, w = simplex_nodes(lam, cfg.rule_for(lam))
        cs = np.zeros((len(xs), len(ys)))
        ss = np.zeros((len(xs), len(ys)))
        for lo in range(0, len(w), chunk):
            d = _term_data(lam, t, params, mu[lo : lo + chunk], w[lo : lo + chunk])
            ex = np.exp(np.outer(xs, d.X))
            ey = np.exp(np.outer(ys, d.Y) + d.shift) * d.w
            ey_m = np.exp(-np.outer(ys, d.Y) - d.shift) * d.w
            a = ex @ ey.T
            b = (1.0 / ex) @ ey_m.T
            cs += 0.5 * (a + b)
            ss += 0.5 * (a - b)
        sgn = (-1.0) ** lam
        out[..., 0, 0] += sgn * cs
        out[..., 0, 1] -= sgn * ss
        out[..., 1, 0] -= ss
        out[..., 1, 1] += cs
        if tail_bound(lam + 1, t, params, xmax, ymax) < cfg.tail_tol:
            break
    pref = k0_tilde(xs[:, None], ys[None, :], params.g, t)
    return pref[..., None, None] * out


# ----------------------------------------------------------------------------
# diagonal trace and partition function


def _trace_window(t: float, params: ModelParams, cfg: SeriesConfig) -> float:
    sigma = 1.0 / math.sqrt(2.0 * math.tanh(t / 2.0))
    return cfg.trace_sigmas * sigma + 2.0 * SQRT2 * params.g


def trace_diag(x, t, params: ModelParams, cfg: SeriesConfig | None = None) -> SeriesResult:
    """Diagonal trace ``tr K(x, x, t)``; only even dimensions contribute.

    ``x`` may be an array.
    """
    cfg = cfg or SeriesConfig()
    t = float(_check_real_time(t))
    g, eps = params.g, params.eps
    x = np.asarray(x, dtype=float)
    th = math.tanh(t / 2.0)
    pref = 2.0 * np.exp(g * g * t - x * x * th) / math.sqrt(math.pi * -math.expm1(-2.0 * t))
    total = np.exp(-2.0 * g * g * th) * np.cosh(2.0 * SQRT2 * g * x * th + eps * t)
    qerr, tb, l_used = 0.0, 0.0, 0
    xflat = np.atleast_1d(x).ravel()
    if params.delta > 0:
        for l in range(1, cfg.lambda_max + 1):
            tb = tail_bound(2 * l, t, params, float(np.max(np.abs(xflat))), float(np.max(np.abs(xflat))))
            if tb < cfg.tail_tol:
                break
            rule = cfg.rule_for(2 * l)
            vals = []
            for mu, w in (simplex_nodes(2 * l, rule), companion_nodes(2 * l, rule)):
                vals.append(_trace_term(mu, w, xflat, t, params, 2 * l))
            total = total + vals[0].reshape(x.shape)
            qerr += float(np.max(np.abs(vals[0] - vals[1]) * pref.ravel()))
            l_used = l
    return SeriesResult(pref * total, 2 * l_used, qerr, float(np.max(pref)) * tb, tb < cfg.tail_tol)


def _trace_term(mu, w, xflat, t, params: ModelParams, lam: int):
    g = params.g
    m = _with_mu0(mu)
    weff = w * (t * params.delta) ** lam * np.exp(_term_exponent(mu, t, params, lam))
    # 2 sqrt2 g x / (1 + e^-t) * sum (-1)^gamma (e^{-t mu} - e^{t(mu - 1)})
    b = 2.0 * SQRT2 * g / math.cosh(t / 2.0) * _alt(np.sinh(t * (0.5 - m)))
    shift = params.eps * (eta(mu, t) + t)
    arg = np.outer(xflat, b) + shift
    return np.sum(weff * np.cosh(arg), axis=-1)


def trace_integral(t, params: ModelParams, cfg: SeriesConfig | None = None) -> SeriesResult:
    """``int tr K(x, x, t) dx`` by Gauss-Legendre over the Gaussian window."""
    cfg = cfg or SeriesConfig()
    t = float(_check_real_time(t))
    half = _trace_window(t, params, cfg)
    nodes, weights = np.polynomial.legendre.leggauss(cfg.trace_points)
    res = trace_diag(half * nodes, t, params, cfg)
    val = half * float(np.sum(weights * res.value))
    return SeriesResult(val, res.lambda_used, 2 * half * res.quad_error, 2 * half * res.tail_bound, res.converged)


def _bracket_term(mu, w, t, params: ModelParams, lam: int):
    """Summand of the partition-function bracket for dimension ``lam`` (even), summed over nodes."""
    expo = _term_exponent(mu, t, params, lam) + psi_minus(mu, t, params)
    ch = np.cosh(params.eps * (_tcol(t) + eta(mu, t)))
    vals = _power(t, params.delta, lam) * ch * np.exp(expo)
    return np.sum(w * vals, axis=-1)


def _bracket(t, params: ModelParams, cfg: SeriesConfig) -> SeriesResult:
    """``cosh(eps t) + sum_{l>=1} (t delta)^{2l} int ...``; ``t`` scalar or 1-D array."""
    total = np.cosh(params.eps * np.asarray(t))
    qerr, tb, l_used = 0.0, 0.0, 0
    terms = [total]
    if params.delta > 0:
        tt = np.atleast_1d(t)
        for l in range(1, cfg.lambda_max + 1):
            tb = max(tail_bound(2 * l, ti, params) for ti in tt)
            if tb < cfg.tail_tol:
                break
            rule = cfg.rule_for(2 * l)
            v = _bracket_term(*simplex_nodes(2 * l, rule), t, params, 2 * l)
            v_lo = _bracket_term(*companion_nodes(2 * l, rule), t, params, 2 * l)
            total = total + v
            terms.append(v)
            qerr += float(np.max(np.abs(v - v_lo)))
            l_used = l
        else:
            tb = max(tail_bound(2 * cfg.lambda_max + 2, ti, params) for ti in tt)
    return SeriesResult(total, 2 * l_used, qerr, tb, tb < cfg.tail_tol, terms)


def partition_function(beta: float, params: ModelParams, cfg: SeriesConfig | None = None) -> SeriesResult:
    """Partition function ``Z(beta) = tr exp(-beta H)`` from the series."""
    cfg = cfg or SeriesConfig()
    beta = _time(beta)
    if np.iscomplexobj(beta) or not np.all(np.asarray(beta) > 0):
        raise ValueError("beta must be real and > 0")
    br = _bracket(beta, params, cfg)
    pref = 2.0 * np.exp(params.g**2 * beta) / -np.expm1(-np.asarray(beta))
    br.value = pref * br.value
    br.quad_error *= float(np.max(pref))
    br.tail_bound *= float(np.max(pref))
    return br


def omega_numerator(t, params: ModelParams, cfg: SeriesConfig | None = None, radius: float = 3.0) -> SeriesResult:
    """``Omega(t) = (1 - e^{-t}) Z(t)``, holomorphic on ``{Re t > 0} U {|t| < radius}``.

    ``t`` may be complex and may be a 1-D array.
    """
    cfg = cfg or SeriesConfig()
    t = _time(t)
    for ti in np.atleast_1d(t):
        HeatTime(complex(ti) if np.iscomplexobj(ti) else float(ti), radius)
    br = _bracket(t, params, cfg)
    pref = 2.0 * np.exp(params.g**2 * np.asarray(t))
    br.value = pref * br.value
    br.quad_error *= float(np.max(np.abs(pref)))
    br.tail_bound *= float(np.max(np.abs(pref)))
    return br
