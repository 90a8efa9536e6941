"""The t-SNE style graph layout cost: neighbour distributions, perplexity
calibration, the three-term loss and its analytic gradient."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

EPS_R = 1.0 / 20.0
PROB_FLOOR = 1e-300


@dataclass(frozen=True)
class LossWeights:
    lambda_kl: float
    lambda_c: float
    lambda_r: float
    eps_r: float = EPS_R

    def __post_init__(self):
        for name in ("lambda_kl", "lambda_c", "lambda_r", "eps_r"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v}")


@dataclass(frozen=True)
class Schedule:
    variant: str
    stage1: LossWeights
    stage2: LossWeights


STAGE2 = LossWeights(1.0, 0.01, 0.6)
TSNET = Schedule("tsnet", LossWeights(1.0, 1.2, 0.0), STAGE2)
TSNET_STAR = Schedule("tsnet_star", LossWeights(1.0, 0.1, 0.0), STAGE2)
SCHEDULES = {"tsnet": TSNET, "tsnet_star": TSNET_STAR}


@dataclass(frozen=True)
class JointP:
    p: np.ndarray
    sigmas: np.ndarray
    target_perplexity: float

    @property
    def n(self) -> int:
        return self.p.shape[0]


def _as_p(p) -> np.ndarray:
    return p.p if isinstance(p, JointP) else np.asarray(p, dtype=float)


def _conditional_rows(d: np.ndarray, sigmas: np.ndarray) -> np.ndarray:
    """Row-stochastic p_{j|i} for every row of ``d``; diagonal excluded."""
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    expo = -(d ** 2) / (2.0 * np.asarray(sigmas, dtype=float)[:, None] ** 2)
    expo[np.arange(n), np.arange(n)] = -np.inf
    expo -= expo.max(axis=1, keepdims=True)
    e = np.exp(expo)
    return e / e.sum(axis=1, keepdims=True)


def conditional_p(delta_row, sigma: float, i: int) -> np.ndarray:
    """Gaussian neighbour probabilities of node ``i`` from its distance row."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    row = np.asarray(delta_row, dtype=float)
    expo = -(row ** 2) / (2.0 * sigma ** 2)
    expo[i] = -np.inf
    expo -= expo.max()
    e = np.exp(expo)
    return e / e.sum()


def _entropy2(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -t.sum(axis=-1)


def perplexity(p_row) -> float:
    return float(2.0 ** _entropy2(np.asarray(p_row, dtype=float)))


def calibrate_sigmas(d: np.ndarray, target_perplexity: float, lo: float = 1e-4, hi: float = 1e4,
                     max_iter: int = 60, tol: float = 1e-4) -> np.ndarray:
    """Bisect (in log space) each node's bandwidth to hit the target perplexity."""
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    if n < 2:
        raise ValueError("need at least two nodes")
    target = float(target_perplexity)
    if target > n - 1:
        warnings.warn(f"perplexity {target} unreachable with {n} nodes; clamped", RuntimeWarning,
                      stacklevel=2)
        target = n - 1 - 1e-3
    log_lo = np.full(n, np.log(lo))
    log_hi = np.full(n, np.log(hi))
    sig = np.full(n, np.sqrt(lo * hi))
    done = np.zeros(n, dtype=bool)
    for _ in range(max_iter):
        kappa = 2.0 ** _entropy2(_conditional_rows(d, sig))
        err = kappa - target
        done |= np.abs(err) < tol
        if done.all():
            break
        # perplexity grows with sigma
        up = (err < 0) & ~done
        down = (err > 0) & ~done
        log_lo[up] = np.log(sig[up])
        log_hi[down] = np.log(sig[down])
        sig = np.where(done, sig, np.exp(0.5 * (log_lo + log_hi)))
    return sig


def default_perplexity(n: int, n_max: int = 128) -> float:
    """Size dependent target perplexity: n/3 clamped to [5, n_max/2] and to n - 2."""
    if n < 2:
        raise ValueError("need at least two nodes")
    if n <= 3:
        return float(n - 1)
    return float(min(min(max(n / 3.0, 5.0), n_max / 2.0), n - 2))


def joint_p(d: np.ndarray, target_perplexity: float) -> JointP:
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    sig = calibrate_sigmas(d, target_perplexity)
    cond = _conditional_rows(d, sig)
    p = (cond + cond.T) / (2.0 * n)
    np.fill_diagonal(p, 0.0)
    p.flags.writeable = False
    return JointP(p, sig, float(target_perplexity))


def _sq_dists(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return (diff ** 2).sum(-1)


def joint_q(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    kern = 1.0 / (1.0 + _sq_dists(x))
    np.fill_diagonal(kern, 0.0)
    return kern / kern.sum()


def kl_cost(p, q: np.ndarray) -> float:
    p = _as_p(p)
    q = np.asarray(q, dtype=float)
    mask = p > 0
    return float((p[mask] * (np.log(p[mask]) - np.log(np.maximum(q[mask], PROB_FLOOR)))).sum())


def _check_layout(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError(f"layout must be N x 2, got {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("layout has non-finite coordinates")
    return x


def full_loss(x, p, w: LossWeights) -> float:
    """``lambda_kl*C_KL + lambda_c/(2N) sum|X_i|^2 - lambda_r/(2N^2) sum_{i!=j} log(|X_i-X_j|+eps_r)``."""
    x = _check_layout(x)
    p = _as_p(p)
    n = x.shape[0]
    if p.shape != (n, n):
        raise ValueError("p and layout sizes differ")
    loss = 0.0
    if w.lambda_kl:
        loss += w.lambda_kl * kl_cost(p, joint_q(x))
    if w.lambda_c:
        loss += w.lambda_c / (2.0 * n) * float((x ** 2).sum())
    if w.lambda_r:
        dist = np.sqrt(_sq_dists(x))
        off = ~np.eye(n, dtype=bool)
        loss -= w.lambda_r / (2.0 * n * n) * float(np.log(dist[off] + w.eps_r).sum())
    return loss


def loss_gradient(x, p, w: LossWeights) -> np.ndarray:
    x = _check_layout(x)
    p = _as_p(p)
    n = x.shape[0]
    diff = x[:, None, :] - x[None, :, :]
    sq = (diff ** 2).sum(-1)
    grad = np.zeros_like(x)
    if w.lambda_kl:
        kern = 1.0 / (1.0 + sq)
        np.fill_diagonal(kern, 0.0)
        q = kern / kern.sum()
        grad += w.lambda_kl * 4.0 * (((p - q) * kern)[:, :, None] * diff).sum(axis=1)
    if w.lambda_c:
        grad += w.lambda_c * x / n
    if w.lambda_r:
        dist = np.sqrt(sq)
        denom = dist * (dist + w.eps_r)
        # coincident points contribute a zero subgradient
        coef = np.divide(1.0, denom, out=np.zeros_like(denom), where=denom > 0)
        grad -= (w.lambda_r / (n * n)) * (coef[:, :, None] * diff).sum(axis=1)
    return grad
