"""Truncated Fock-basis diagonalization: the independent ground truth.

Basis ordering is ``|n> (x) |s>`` flattened to index ``2n + s`` with ``s = 0``
the sigma_z = +1 state.  Position-space spinors are assembled from the
eigenvectors and normalized Hermite functions.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from .model import ModelParams


@dataclass(frozen=True)
class FockConfig:
    """``cutoff`` is the largest boson number kept; ``target_count`` defaults to cutoff // 3."""

    cutoff: int = 300
    target_count: int | None = None

    def __post_init__(self):
        if self.cutoff < 1:
            raise ValueError("cutoff must be >= 1")
        if self.target_count is not None and not 0 < self.target_count <= self.cutoff // 2:
            raise ValueError("target_count must be in [1, cutoff // 2]")

    @property
    def trusted(self) -> int:
        return self.target_count or max(self.cutoff // 3, 1)


@dataclass(frozen=True)
class Spectrum:
    """Trusted eigenvalues (ascending) of the truncated Hamiltonian."""

    eigenvalues: np.ndarray
    cutoff: int
    params: ModelParams
    vectors: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def top(self) -> float:
        return float(self.eigenvalues[-1])

    def close_pairs(self, tol: float = 1e-8):
        """Index pairs of numerically coincident neighbours (multiplicity is not certified)."""
        ev = self.eigenvalues
        return [(i, i + 1) for i in np.nonzero(np.diff(ev) < tol)[0]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "eigenvalue"])
        for i, v in enumerate(self.eigenvalues, start=1):
            w.writerow([i, repr(float(v))])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "params": self.params.as_dict(),
                "cutoff": self.cutoff,
                "eigenvalues": [float(v) for v in self.eigenvalues],
            }
        )


def build_hamiltonian(params: ModelParams, cfg: FockConfig) -> np.ndarray:
    """Dense symmetric matrix of size ``2 (cutoff + 1)``."""
    nc = cfg.cutoff
    n = np.arange(nc + 1)
    dim = 2 * (nc + 1)
    H = np.zeros((dim, dim))
    up, dn = 2 * n, 2 * n + 1
    H[up, up] = n + params.delta
    H[dn, dn] = n - params.delta
    H[up, dn] = H[dn, up] = params.eps
    c = params.g * np.sqrt(n[:-1] + 1.0)
    # (a + a^dag) sigma_x couples |n, s> with |n+1, 1-s>
    H[up[:-1], dn[1:]] = H[dn[1:], up[:-1]] = c
    H[dn[:-1], up[1:]] = H[up[1:], dn[:-1]] = c
    return H


def eigen_spectrum(params: ModelParams, cfg: FockConfig | None = None, vectors: bool = False) -> Spectrum:
    """Dense eigensolve; exposes only the trusted lower part of the spectrum."""
    cfg = cfg or FockConfig()
    H = build_hamiltonian(params, cfg)
    k = cfg.trusted
    if vectors:
        w, V = eigh(H, subset_by_index=(0, k - 1))
        return Spectrum(w, cfg.cutoff, params, V)
    w = eigh(H, eigvals_only=True, subset_by_index=(0, k - 1))
    return Spectrum(w, cfg.cutoff, params)


def hermite_table(nmax: int, x) -> np.ndarray:
    """``psi_n(x)`` for ``n = 0..nmax``; shape ``(nmax + 1,) + x.shape``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = np.pi**-0.25 * np.exp(-x * x / 2.0)
    if nmax > 0:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, nmax):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * x * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def hermite_psi(n: int, x):
    """Normalized oscillator eigenfunction ``psi_n(x)``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return hermite_table(n, x)[n]


def spinors(spec: Spectrum, x) -> np.ndarray:
    """Position-space eigen-spinors, shape ``(2, K) + x.shape``."""
    if spec.vectors is None:
        raise ValueError("spectrum was built without eigenvectors")
    nc = spec.cutoff
    psi = hermite_table(nc, x)
    Vr = spec.vectors.reshape(nc + 1, 2, -1)
    return np.einsum("nsk,n...->sk...", Vr, psi)


class _OracleCache:
    def __init__(self):
        self._store = {}

    def get(self, params: ModelParams, cfg: FockConfig) -> Spectrum:
        key = (params, cfg)
        if key not in self._store:
            self._store[key] = eigen_spectrum(params, cfg, vectors=True)
        return self._store[key]


_cache = _OracleCache()


def oracle_kernel(x: float, y: float, t: float, params: ModelParams, cfg: FockConfig | None = None) -> np.ndarray:
    """``sum_k e^{-t lambda_k} Phi_k(x) Phi_k(y)^T`` over trusted eigenpairs."""
    if not t > 0:
        raise ValueError("t must be > 0")
    cfg = cfg or FockConfig()
    spec = _cache.get(params, cfg)
    ev = spec.eigenvalues
    if math.exp(-t * (ev[-1] - ev[0])) > 1e-12:
        warnings.warn("oracle kernel truncation is not negligible at this t", RuntimeWarning, stacklevel=2)
    Fx = spinors(spec, float(x))
    Fy = spinors(spec, float(y))
    wt = np.exp(-t * ev)
    return np.einsum("k,ak,bk->ab", wt, Fx, Fy)


def oracle_partition(beta: float, params: ModelParams, cfg: FockConfig | None = None, spectrum: Spectrum | None = None):
    """``sum e^{-beta lambda_k}`` plus a Weyl-spacing tail; returns ``(value, tail)``."""
    if not beta > 0:
        raise ValueError("beta must be > 0")
    spec = spectrum or eigen_spectrum(params, cfg or FockConfig())
    ev = spec.eigenvalues
    body = float(np.sum(np.exp(-beta * (ev - ev[0])))) * math.exp(-beta * ev[0])
    # levels beyond the trusted range, spaced 1/2 on average
    tail = 2.0 * math.exp(-beta * ev[-1]) / -math.expm1(-beta / 2.0)
    if tail > 1e-6 * body:
        raise ValueError(f"oracle partition tail {tail:.3e} is not negligible; raise the cutoff")
    return body + tail, tail


def counting(T: float, spectrum: Spectrum) -> int:
    """Number of eigenvalues ``<= T``."""
    if T > spectrum.top:
        raise ValueError(f"T={T} is beyond the trusted range (top {spectrum.top:.4g})")
    return int(np.searchsorted(spectrum.eigenvalues, T, side="right"))
