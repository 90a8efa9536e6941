"""Normalized Laplacians and Chebyshev polynomial filters."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import Graph

PRUNE_TOL = 1e-12


class SpectralConvergenceWarning(RuntimeWarning):
    pass


def _prune(m: sp.spmatrix, tol: float = PRUNE_TOL) -> sp.csr_matrix:
    m = sp.csr_matrix(m)
    m.data[np.abs(m.data) < tol] = 0.0
    m.eliminate_zeros()
    m.sort_indices()
    return m


def normalized_laplacian(g: Graph, allow_isolated: bool = False) -> sp.csr_matrix:
    """``L = I - D^-1/2 A D^-1/2``.

    Isolated nodes are an error unless ``allow_isolated``, in which case their
    row and column are all zero.
    """
    deg = np.asarray(g.degrees, dtype=float)
    if (deg == 0).any() and not allow_isolated:
        raise ValueError("normalized Laplacian undefined for isolated nodes")
    e = g.edge_array()
    inv = np.zeros_like(deg)
    inv[deg > 0] = 1.0 / np.sqrt(deg[deg > 0])
    w = -inv[e[:, 0]] * inv[e[:, 1]]
    n = g.num_nodes
    rows = np.concatenate([e[:, 0], e[:, 1], np.arange(n)])
    cols = np.concatenate([e[:, 1], e[:, 0], np.arange(n)])
    vals = np.concatenate([w, w, (deg > 0).astype(float)])
    return _prune(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))


def lambda_max(l: sp.spmatrix | np.ndarray, max_iter: int = 200, tol: float = 1e-7) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration, clamped to [0, 2].

    Falls back to 2 (an upper bound for normalized Laplacians) when the
    Rayleigh quotient does not settle within ``max_iter`` iterations.
    """
    n = l.shape[0]
    rng = np.random.default_rng(0)
    v = rng.random(n) + 0.5
    v /= np.linalg.norm(v)
    lam = 0.0
    prev_step = np.inf
    for _ in range(max_iter):
        w = l @ v
        new = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        step = abs(new - lam)
        # the quotient converges geometrically from below; extrapolate the
        # remaining distance from the ratio of successive steps
        rho = step / prev_step if prev_step > 0 else 0.0
        remaining = step * rho / (1.0 - rho) if rho < 1.0 else np.inf
        if max(step, remaining) <= tol * max(abs(new), 1e-300):
            return float(min(max(new, 0.0), 2.0))
        lam, prev_step = new, step
    warnings.warn("power iteration did not converge; using lambda_max = 2",
                  SpectralConvergenceWarning, stacklevel=2)
    return 2.0


def rescaled_laplacian(l: sp.spmatrix, lam: float) -> sp.csr_matrix:
    if not lam > 0:
        raise ValueError(f"lambda_max must be positive, got {lam}")
    n = l.shape[0]
    return _prune((2.0 / lam) * sp.csr_matrix(l) - sp.identity(n, format="csr"))


@dataclass(frozen=True)
class ChebyshevFilters:
    """``filters[k] = T_k(L~)`` for ``k = 0..order``."""

    order: int
    filters: tuple[sp.csr_matrix, ...]

    @property
    def n(self) -> int:
        return self.filters[0].shape[0]

    def dense(self) -> np.ndarray:
        return np.stack([f.toarray() for f in self.filters])


def chebyshev_filters(lt: sp.spmatrix, k_order: int) -> ChebyshevFilters:
    if lt.shape[0] != lt.shape[1]:
        raise ValueError("rescaled Laplacian must be square")
    if k_order < 0:
        raise ValueError("order must be non-negative")
    lt = _prune(lt)
    out = [sp.identity(lt.shape[0], format="csr")]
    if k_order >= 1:
        out.append(lt)
    for _ in range(2, k_order + 1):
        out.append(_prune(2.0 * (lt @ out[-1]) - out[-2]))
    return ChebyshevFilters(k_order, tuple(out))


def graph_filters(g: Graph, k_order: int, fixed_lambda: bool = False) -> ChebyshevFilters:
    """Filters of a connected graph; ``fixed_lambda`` uses lambda_max = 2."""
    lap = normalized_laplacian(g)
    lam = 2.0 if fixed_lambda else lambda_max(lap)
    return chebyshev_filters(rescaled_laplacian(lap, lam), k_order)


def apply_filter(t: sp.spmatrix | np.ndarray, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if t.shape[1] != x.shape[0]:
        raise ValueError(f"filter {t.shape} cannot apply to signal {x.shape}")
    return np.asarray(t @ x)
