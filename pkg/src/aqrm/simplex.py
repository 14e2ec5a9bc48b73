"""Quadrature over the ordered simplex ``0 <= mu_1 <= ... <= mu_lam <= 1``.

Two rules are available:

* ``tensor``: Gauss-Legendre on the unit cube pulled back by the collapsed map
  ``mu_lam = v_lam, mu_k = v_k * mu_{k+1}`` (Jacobian ``prod_k v_k^{k-1}``).
* ``quasi``: scrambled Sobol points in the cube, each sorted ascending.  Sorting
  folds the cube onto the simplex ``lam!`` times, so every point carries weight
  ``1 / (n * lam!)`` and no Jacobian.

Both return nodes of shape ``(P, lam)`` and weights summing to ``1/lam!``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import qmc

TENSOR = "tensor"
QUASI = "quasi"
COMPANION_SEED_OFFSET = 7919


@dataclass(frozen=True)
class QuadratureRule:
    """Simplex rule: ``order`` is points per axis (tensor) or sample count (quasi)."""

    kind: str = TENSOR
    order: int = 12
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (TENSOR, QUASI):
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.order < 2:
            raise ValueError("rule order must be >= 2")


def default_rule(lam: int, seed: int = 0) -> QuadratureRule:
    """Tensor order 12 up to lam=3, order 8 for lam=4,5, 2**14 Sobol points beyond."""
    if lam <= 3:
        return QuadratureRule(TENSOR, 12)
    if lam <= 5:
        return QuadratureRule(TENSOR, 8)
    return QuadratureRule(QUASI, 2**14, seed)


@lru_cache(maxsize=None)
def _gauss01(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0


@lru_cache(maxsize=64)
def tensor_nodes(lam: int, order: int):
    """Collapsed tensor Gauss-Legendre nodes/weights on the ordered simplex."""
    if lam < 0:
        raise ValueError("simplex dimension must be >= 0")
    if lam == 0:
        return _frozen(np.zeros((1, 0))), _frozen(np.ones(1))
    x, w = _gauss01(order)
    idx = np.indices((order,) * lam).reshape(lam, -1).T
    v = x[idx]
    weights = np.prod(w[idx], axis=1)
    mu = np.empty_like(v)
    mu[:, -1] = v[:, -1]
    for k in range(lam - 2, -1, -1):
        mu[:, k] = v[:, k] * mu[:, k + 1]
    weights = weights * np.prod(mu[:, 1:], axis=1)
    return _frozen(mu), _frozen(weights)


@lru_cache(maxsize=64)
def quasi_sequence(lam: int, n: int, seed: int = 0) -> np.ndarray:
    """``n`` scrambled Sobol points in ``[0,1]^lam``, each sorted ascending."""
    if lam < 1:
        raise ValueError("quasi-random points need lam >= 1")
    sampler = qmc.Sobol(d=lam, scramble=True, seed=seed)
    m = int(round(math.log2(n)))
    pts = sampler.random_base2(m) if 2**m == n else sampler.random(n)
    return _frozen(np.sort(pts, axis=1))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def simplex_nodes(lam: int, rule: QuadratureRule | None = None):
    """Nodes ``(P, lam)`` and weights ``(P,)`` for the rule; weights sum to ``1/lam!``."""
    if lam < 0:
        raise ValueError("simplex dimension must be >= 0")
    rule = rule or default_rule(lam)
    if lam == 0:
        return tensor_nodes(0, 2)
    if rule.kind == TENSOR:
        return tensor_nodes(lam, rule.order)
    pts = quasi_sequence(lam, rule.order, rule.seed)
    return pts, np.full(len(pts), 1.0 / (len(pts) * math.factorial(lam)))


def companion_nodes(lam: int, rule: QuadratureRule | None = None):
    """The second rule used for the error estimate.

    Tensor rules drop one point per axis.  Quasi rules use an independently
    scrambled sample of the same size: nested Sobol subsets share their bias,
    so their difference underestimates the error.
    """
    rule = rule or default_rule(lam)
    if lam == 0:
        return tensor_nodes(0, 2)
    if rule.kind == TENSOR:
        return tensor_nodes(lam, max(rule.order - 1, 1))
    pts = quasi_sequence(lam, rule.order, rule.seed + COMPANION_SEED_OFFSET)
    return pts, np.full(len(pts), 1.0 / (len(pts) * math.factorial(lam)))


def weighted_sum(w: np.ndarray, values) -> np.ndarray:
    """``sum_p w[p] * values[p]`` with numpy's pairwise reduction (no BLAS)."""
    values = np.asarray(values)
    return np.sum(w.reshape((-1,) + (1,) * (values.ndim - 1)) * values, axis=0)


def simplex_integrate(f, lam: int, rule: QuadratureRule | None = None):
    """Integrate ``f`` over the ordered ``lam``-simplex.

    ``f`` receives an array of shape ``(P, lam)`` and returns ``(P,)`` or
    ``(P, ...)`` values.  Returns ``(value, error_estimate)``.
    """
    if lam < 0:
        raise ValueError("simplex dimension must be >= 0")
    if lam == 0:
        val = np.asarray(f(np.zeros((1, 0))))[0]
        return val, 0.0
    mu, w = simplex_nodes(lam, rule)
    mu_lo, w_lo = companion_nodes(lam, rule)
    val = weighted_sum(w, f(mu))
    val_lo = weighted_sum(w_lo, f(mu_lo))
    return val, float(np.max(np.abs(val - val_lo)))
