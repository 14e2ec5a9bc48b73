"""Finite-N Trotter-Kato kernel as a path sum over Z_2^N, plus the Fourier identities.

``K^(N)(x, y, t) = sum_s G_N(u, s) I_N(x, y, u, s)`` with per-step ``u = e^{-t/N}``.
Bitstrings are sequences of 0/1; position ``i`` in the docs is 1-based.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .model import I2, JX, SQRT2, DegenerateModelError, ModelParams, exp_spin, h_table

N_MAX = 20

# M_ij = (-1)^(i+j) e_i e_j^T with e_0 = (1, -1), e_1 = (1, 1)
_E = np.array([[1.0, -1.0], [1.0, 1.0]])
M_MATS = {(i, j): (-1.0) ** (i + j) * np.outer(_E[i], _E[j]) for i in (0, 1) for j in (0, 1)}


def _bits(s) -> tuple:
    s = tuple(int(b) for b in s)
    if any(b not in (0, 1) for b in s):
        raise ValueError("bitstring entries must be 0 or 1")
    return s


def all_bitstrings(k: int) -> np.ndarray:
    """All of Z_2^k as rows of a ``(2^k, k)`` int array, lexicographic order."""
    if k == 0:
        return np.zeros((1, 0), dtype=np.int8)
    idx = np.arange(2**k)
    return ((idx[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.int8)


# ----------------------------------------------------------------------------
# combinatorics


def phi(rho) -> int:
    """``j_l - j_{l-1} + ... + (-1)^(l-1) j_1`` over the (1-based) one-positions."""
    pos = [i + 1 for i, b in enumerate(_bits(rho)) if b]
    return sum((-1) ** i * pos[len(pos) - 1 - i] for i in range(len(pos)))


def alpha_closed(rho) -> int:
    rho = _bits(rho)
    if not rho:
        raise ValueError("alpha needs length >= 1")
    return len(rho) - sum(rho) // 2 - phi(rho)


def alpha_rec(rho) -> int:
    """Recursion from ``alpha((0)) = 1``, ``alpha((1)) = 0``.

    Appending 0 adds one; appending 1 to ``s`` of length ``k`` gives ``k - |s| - alpha(s)``.
    """
    rho = _bits(rho)
    if not rho:
        raise ValueError("alpha needs length >= 1")
    a = 1 - rho[0]
    weight = rho[0]
    for k, b in enumerate(rho[1:], start=1):
        a = a + 1 if b == 0 else k - weight - a
        weight += b
    return a


def eta_i(s, i: int) -> int:
    """``(-1)^s(i) + (-1)^s(i+1)`` for ``1 <= i <= N-1``."""
    s = _bits(s)
    if not 1 <= i < len(s):
        raise IndexError(f"eta index {i} out of range for N={len(s)}")
    return (-1) ** s[i - 1] + (-1) ** s[i]


def lambda_j(u, j: int, N: int):
    if not 1 <= j <= N:
        raise IndexError(f"Lambda index {j} out of range for N={N}")
    return u ** (j - 1) * (1 - u ** (2 * (N - j) + 1))


def omega_ij(u, i: int, j: int, N: int):
    if not (1 <= i <= N and 1 <= j <= N):
        raise IndexError(f"Omega index ({i}, {j}) out of range for N={N}")
    return u ** (j - i) * (1 - u ** (2 * i)) * (1 - u ** (2 * (N - j)))


def _omega_matrix(u: float, N: int) -> np.ndarray:
    """Symmetric ``(N-1, N-1)`` table ``S[i, j] = Omega^(min, max)``."""
    n = N - 1
    S = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            S[i - 1, j - 1] = S[j - 1, i - 1] = omega_ij(u, i, j, N)
    return S


# ----------------------------------------------------------------------------
# scalar and matrix parts


def _k0(x, y, g, U):
    # K_0(x, y, g, U) = U^{-g^2} / sqrt(pi (1 - U^2)) exp(...)
    one_m = 1.0 - U * U
    expo = -(1.0 + U * U) * (x * x + y * y) / (2.0 * one_m) + 2.0 * U * x * y / one_m
    return U ** (-g * g) * math.exp(expo) / math.sqrt(math.pi * one_m)


def _log_ibar(x, y, u, S, g):
    """``log(I_N / K_0)`` for a batch of bitstrings ``S`` of shape ``(P, N)``."""
    N = S.shape[1]
    sg = 1.0 - 2.0 * S
    lam = np.array([lambda_j(u, j, N) for j in range(1, N + 1)])
    lin = SQRT2 * g * (1 - u) / (1 - u ** (2 * N)) * (sg @ (x * lam + y * lam[::-1]))
    out = lin - 2.0 * N * g * g * (1 - u) / (1 + u)
    if N >= 2:
        eta = sg[:, :-1] + sg[:, 1:]
        quad = np.einsum("pi,ij,pj->p", eta, _omega_matrix(u, N), eta)
        out = out + g * g * (1 - u) ** 2 / (2 * (1 + u) ** 2 * (1 - u ** (2 * N))) * quad
    return out


def I_N(x: float, y: float, u: float, s, g: float) -> float:
    """Scalar Gaussian path integral for bitstring ``s`` (length N >= 1)."""
    s = _bits(s)
    if not s:
        raise ValueError("bitstring must have length >= 1")
    if not 0 < u < 1:
        raise ValueError("u must be in (0, 1)")
    N = len(s)
    val = _log_ibar(x, y, u, np.array([s], dtype=float), g)[0]
    return _k0(x, y, g, u**N) * math.exp(val)


def g_k(u: float, s, params: ModelParams) -> float:
    """Scalar part ``prod h_{s(i), s(i+1)}(u^{2 mu}) / (u^{(k-1) mu} 2^k)``."""
    s = _bits(s)
    k = len(s)
    m = params.mu
    if m == 0:
        raise DegenerateModelError("g_k needs mu > 0")
    h = h_table(u ** (2 * m), params)
    prod = 1.0
    for a, b in zip(s[:-1], s[1:]):
        prod *= h[a, b]
    return prod / (u ** ((k - 1) * m) * 2**k)


def G_N(u: float, s, params: ModelParams) -> np.ndarray:
    """``g_k(u, s) M_{s(1), s(k)} u^{M}`` (closed form)."""
    s = _bits(s)
    if not s:
        raise ValueError("bitstring must have length >= 1")
    return g_k(u, s, params) * M_MATS[(s[0], s[-1])] @ exp_spin(params, -math.log(u))


def G_N_product(u: float, s, params: ModelParams) -> np.ndarray:
    """Direct ordered product ``prod_j (1/2)(I + (-1)^{1 - s(j)} J) u^M``."""
    s = _bits(s)
    E = exp_spin(params, -math.log(u))
    out = np.eye(2)
    for b in s:
        out = out @ (0.5 * (I2 + (-1.0) ** (1 - b) * JX) @ E)
    return out


def trotter_kernel(N: int, x: float, y: float, t: float, params: ModelParams, n_max: int = N_MAX, chunk: int = 1 << 15):
    """Exact kernel of ``(e^{-(t/N)(b^dag b - g^2)} e^{-(t/N) M})^N`` by the full path sum."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if N > n_max:
        raise ValueError(f"N={N} exceeds the path-sum limit {n_max} (2^N paths)")
    if not t > 0:
        raise ValueError("t must be > 0")
    g = params.g
    u = math.exp(-t / N)
    m = params.mu
    if m == 0:
        # M = 0: spin part is trivial, every h reduces to a constant; use the product form
        raise DegenerateModelError("trotter_kernel needs mu > 0")
    logh = np.log(h_table(u ** (2 * m), params))
    log_norm = -(N - 1) * m * math.log(u) - N * math.log(2.0)
    # sums over paths grouped by (first bit, last bit)
    class_sum = np.zeros((2, 2))
    total = 2**N
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total))
        S = ((idx[:, None] >> np.arange(N - 1, -1, -1)) & 1).astype(np.int64)
        logg = logh[S[:, :-1], S[:, 1:]].sum(axis=1) + log_norm
        vals = np.exp(logg + _log_ibar(x, y, u, S.astype(float), g))
        np.add.at(class_sum, (S[:, 0], S[:, -1]), vals)
    acc = sum(class_sum[i, j] * M_MATS[(i, j)] for i in (0, 1) for j in (0, 1))
    return _k0(x, y, g, u**N) * acc @ exp_spin(params, t / N)


# ----------------------------------------------------------------------------
# Fourier analysis on Z_2^k


def _B(rho_i: int, h: np.ndarray) -> np.ndarray:
    sgn = (-1.0) ** rho_i
    return np.array([[h[0, 0], h[0, 1]], [sgn * h[1, 0], sgn * h[1, 1]]])


def g_vw(s, v: int, w: int, u: float, params: ModelParams) -> float:
    """``h_{v,s(1)} h_{s(k),w} prod h_{s(i),s(i+1)}`` at ``tau = u^{2 mu}``; ``h_{v,w}`` for k = 0."""
    s = _bits(s)
    h = h_table(u ** (2 * params.mu), params)
    if not s:
        return float(h[v, w])
    val = h[v, s[0]] * h[s[-1], w]
    for a, b in zip(s[:-1], s[1:]):
        val *= h[a, b]
    return float(val)


def fourier_ghat(rho, v: int, w: int, u: float, params: ModelParams) -> float:
    """Fourier transform of ``g^(v,w)_k`` at ``rho`` via the B-matrix product."""
    rho = _bits(rho)
    h = h_table(u ** (2 * params.mu), params)
    if not rho:
        return float(h[v, w])
    row = np.array([h[0, v], h[1, v]])
    for r in rho[:-1]:
        row = row @ _B(r, h)
    col = np.array([h[0, w], (-1.0) ** rho[-1] * h[1, w]])
    return float(row @ col)


def fourier_ghat_brute(rho, v: int, w: int, u: float, params: ModelParams) -> float:
    """``sum_s g^(v,w)_k(s) (-1)^{rho . s}`` by enumeration."""
    rho = np.array(_bits(rho), dtype=int)
    k = len(rho)
    if k == 0:
        return g_vw((), v, w, u, params)
    S = all_bitstrings(k).astype(int)
    h = h_table(u ** (2 * params.mu), params)
    vals = h[v, S[:, 0]] * h[S[:, -1], w] * np.prod(h[S[:, :-1], S[:, 1:]], axis=1)
    chars = (-1.0) ** (S @ rho)
    return float(np.sum(vals * chars))


def weighted_fourier_sum(A, v: int, w: int, u: float, params: ModelParams):
    """Both sides of the weighted Fourier-sum identity; returns ``(direct, closed)``.

    ``direct`` is ``sum_rho ghat(rho) prod A_i^{rho_i}``; ``closed`` is the
    stratified form in ``|rho| = l`` with the ``alpha`` exponent.
    """
    A = np.asarray(A, dtype=float)
    k = len(A)
    if k < 1:
        raise ValueError("A must have length >= 1")
    h = h_table(u ** (2 * params.mu), params)
    ratio = h[w, w] / h[1 - w, 1 - w]
    direct = 0.0
    closed = 0.0
    for rho in itertools.product((0, 1), repeat=k):
        r = np.array(rho)
        direct += fourier_ghat(rho, v, w, u, params) * np.prod(np.where(r == 1, A, 1.0))
        ell = int(r.sum())
        j = [0] + [i + 1 for i, b in enumerate(rho) if b] + [k]
        prod = 1.0
        for i in range(ell + 1):
            sgn = (-1.0) ** (w + ell + i)
            prod *= np.prod(1.0 + sgn * A[j[i] : j[i + 1]])
        closed += (
            h[v, (ell + w) % 2] * h[0, 1] ** ell * h[1 - w, 1 - w] ** (k - ell) * ratio ** alpha_closed(rho) * prod
        )
    return float(direct), float(closed)


def loglim(i: int, t: float, N, params: ModelParams):
    """``log(h_ii(e^{-2 t mu / N}) / (2 e^{-t mu / N}))``; tends to ``(-1)^i t eps / N``."""
    m = params.mu
    a = t * m / np.asarray(N, dtype=float)
    sgn = 1.0 if i == 0 else -1.0
    # h_ii(e^{-2a}) / (2 e^{-a}) = cosh(a) + sgn (eps / mu) sinh(a)
    return np.log(np.cosh(a) + sgn * params.eps / m * np.sinh(a))
