"""Model parameters, 2x2 spin algebra and the elementary kernels of the AQRM.

The Hamiltonian is ``a^dag a + delta*sigma_z + g*(a + a^dag)*sigma_x + eps*sigma_x``
with the oscillator frequency fixed to one.  All 2x2 matrices are plain numpy
arrays of shape ``(2, 2)``; entries are real for real times and complex when a
complex time is passed in.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)

I2 = np.eye(2)
JX = np.array([[0.0, 1.0], [1.0, 0.0]])  # sigma_x
KZ = np.array([[1.0, 0.0], [0.0, -1.0]])  # sigma_z

# relative threshold below which eps is treated as exactly zero in exp_spin
EPS_ZERO = 1e-12


class DegenerateModelError(ValueError):
    """Raised when eps = delta = 0, where mu vanishes and h-functions are undefined."""


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the asymmetric Rabi Hamiltonian.

    ``omega`` is carried for documentation only; every formula assumes 1.
    """

    g: float
    delta: float
    eps: float = 0.0
    omega: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.g) and math.isfinite(self.delta) and math.isfinite(self.eps)):
            raise ValueError("model parameters must be finite")
        if self.g < 0 or self.delta < 0:
            raise ValueError(f"g and delta must be >= 0, got g={self.g}, delta={self.delta}")
        if self.omega != 1.0:
            raise ValueError("only omega = 1 is supported")

    @property
    def mu(self) -> float:
        return mu(self)

    def flipped(self) -> "ModelParams":
        """Same model with the bias reversed (eps -> -eps)."""
        return ModelParams(self.g, self.delta, -self.eps)

    def as_dict(self) -> dict:
        return {"g": self.g, "delta": self.delta, "eps": self.eps, "omega": self.omega}


@dataclass(frozen=True)
class HeatTime:
    """A heat-kernel time ``t`` with ``u = exp(-t)`` derived on demand.

    Real times must be positive.  Complex times must lie in the holomorphy
    domain ``{Re t > 0} U {|t| < radius}`` with ``radius < pi``.
    """

    t: complex | float
    radius: float = 3.0

    def __post_init__(self):
        t = self.t
        if not self.radius < math.pi:
            raise ValueError("disc radius must be < pi")
        if isinstance(t, complex) or np.iscomplexobj(t):
            t = complex(t)
            if not (t.real > 0 or abs(t) < self.radius):
                raise ValueError(f"complex time {t} lies outside the holomorphy domain")
        else:
            if not float(t) > 0:
                raise ValueError(f"time must be > 0, got {t}")

    @property
    def u(self):
        return cmath.exp(-self.t) if isinstance(self.t, complex) else math.exp(-self.t)

    @property
    def is_complex(self) -> bool:
        return isinstance(self.t, complex)


def as_time(t) -> HeatTime:
    return t if isinstance(t, HeatTime) else HeatTime(t)


def mu(params: ModelParams) -> float:
    """Mixing energy sqrt(eps^2 + delta^2), the spin-part eigenvalue scale."""
    return math.hypot(params.eps, params.delta)


def h_func(v: int, w: int, tau, params: ModelParams):
    """Scalar transfer function ``h_{v,w}(tau)`` of the spin part.

    Uses the three explicit branches; symmetric in ``(v, w)``.
    """
    if v not in (0, 1) or w not in (0, 1):
        raise ValueError("v and w must be bits")
    m = mu(params)
    if m == 0.0:
        raise DegenerateModelError("h-functions need mu > 0 (eps = delta = 0 is degenerate)")
    if v != w:
        return params.delta * (1 - tau) / m
    sign = 1.0 if v == 0 else -1.0
    return (m * (1 + tau) + sign * params.eps * (1 - tau)) / m


def h_table(tau, params: ModelParams) -> np.ndarray:
    """All four values ``h[v, w] = h_{v,w}(tau)`` as a 2x2 array."""
    return np.array([[h_func(v, w, tau, params) for w in (0, 1)] for v in (0, 1)])


def exp_spin(params: ModelParams, t) -> np.ndarray:
    """Return ``exp(-t M)`` for ``M = delta*sigma_z + eps*sigma_x``.

    ``t`` may be real or complex.  For ``eps`` numerically zero the diagonal
    form is used directly, because the eigenvector matrix divides by ``eps``.
    """
    d, e = params.delta, params.eps
    if abs(e) < EPS_ZERO * max(1.0, d):
        dtype = complex if isinstance(t, complex) else float
        return np.array([[np.exp(-t * d), 0.0], [0.0, np.exp(t * d)]], dtype=dtype)
    m = mu(params)
    # C M C^{-1} = diag(-mu, mu) with C = [[d - m, e], [d + m, e]]
    C = np.array([[d - m, e], [d + m, e]])
    Cinv = np.array([[e, -e], [-(d + m), d - m]]) / (e * (d - m) - e * (d + m))
    diag = np.diag([np.exp(t * m), np.exp(-t * m)])
    return Cinv @ diag @ C


def mehler_base(x, y, g: float, t) -> float:
    """``K0(x, y, g, e^{-t})``: Mehler kernel of ``a^dag a`` times ``e^{g^2 t}``."""
    t = as_time(t).t
    if isinstance(t, complex):
        raise ValueError("mehler_base is real-mode only")
    one_m_u2 = -math.expm1(-2.0 * t)
    u = math.exp(-t)
    expo = -(1.0 + u * u) * (x * x + y * y) / (2.0 * one_m_u2) + 2.0 * u * x * y / one_m_u2
    return np.exp(g * g * t + expo) / math.sqrt(math.pi * one_m_u2)


def one_step_kernel(x: float, y: float, t, params: ModelParams) -> np.ndarray:
    """Kernel of ``exp(-t (b^dag b - g^2)) exp(-t M)`` with ``b = a + g sigma_x``.

    Scalar displaced-Mehler factor, times ``exp(-tanh(t/2) sqrt2 g (x+y) sigma_x)``,
    times ``exp_spin(params, t)``.
    """
    t = as_time(t).t
    if isinstance(t, complex):
        raise ValueError("one_step_kernel is real-mode only")
    g = params.g
    th = math.tanh(t / 2.0)  # (1-u)/(1+u)
    one_m_u2 = -math.expm1(-2.0 * t)
    scalar = math.exp(g * g * t) / math.sqrt(math.pi * one_m_u2) * math.exp(
        -th * ((x + y) ** 2 + 8.0 * g * g) / 4.0 - (x - y) ** 2 / (4.0 * th)
    )
    a = th * SQRT2 * g * (x + y)
    coupling = math.cosh(a) * I2 - math.sinh(a) * JX
    return scalar * coupling @ exp_spin(params, t)
