"""Wishart rank-distinguishing experiments for matrix-vector query lower bounds.

The game: A is drawn from W(n, r) or W(n, r + 2) with equal probability and
a tester sees k matrix-vector products.  The optimal tester only needs the
leading k x k corner, which is W(k, r) or W(k, r + 2), and its advantage is
the total-variation distance between those two laws.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, stats

from .matrix import (
    SymmetricMatrix,
    eigvalsh_desc,
    haar_frame,
    rng_from_seed,
    sub_seed,
)

RANK_R = "rank-r"
RANK_R_PLUS_2 = "rank-(r+2)"

DEFAULT_TV_SAMPLES = 100_000
DEFAULT_TRIALS = 2000


class SingularMatrixError(ValueError):
    """Cholesky failed: the matrix is singular or indefinite."""


@dataclass(frozen=True)
class WishartSample:
    n: int
    r: int
    seed: int
    values: SymmetricMatrix = field(repr=False)


def _check_nr(n, r):
    if n < 1 or r < 1:
        raise ValueError(f"Wishart dimensions must be positive, got n={n}, r={r}")


def sample_wishart(n: int, r: int, seed: int) -> WishartSample:
    """One draw of G G^T with G an n x r standard Gaussian matrix."""
    _check_nr(n, r)
    G = rng_from_seed(seed).standard_normal((n, r))
    return WishartSample(n, r, seed, SymmetricMatrix.from_dense(G @ G.T))


def wishart_batch(n: int, r: int, size: int, rng: np.random.Generator, method: str = "gram") -> np.ndarray:
    """``size`` independent W(n, r) draws stacked as a (size, n, n) array.

    ``gram`` forms G G^T directly.  ``bartlett`` uses the Bartlett
    decomposition A = L L^T, L lower triangular with chi(r - i) diagonal and
    standard normal strictly-lower entries; it needs r >= n and draws only
    O(n^2) variates per sample.
    """
    _check_nr(n, r)
    if method == "gram" or (method == "bartlett" and r < n):
        G = rng.standard_normal((size, n, r))
        return G @ G.transpose(0, 2, 1)
    if method != "bartlett":
        raise ValueError(f"unknown Wishart sampling method {method!r}")
    L = np.zeros((size, n, n))
    il = np.tril_indices(n, -1)
    L[:, il[0], il[1]] = rng.standard_normal((size, il[0].size))
    idx = np.arange(n)
    L[:, idx, idx] = np.sqrt(rng.chisquare(r - idx, size=(size, n)))
    return L @ L.transpose(0, 2, 1)


def _falling_log(r: int, n: int) -> float:
    # log r(r-1)...(r-n+1)
    return float(np.sum(np.log(r - np.arange(n, dtype=float))))


def wishart_log_density_ratio(A, r: int) -> float:
    """log f_{n, r+2}(A) / f_{n, r}(A) = log det A - log r(r-1)...(r-n+1)."""
    M = A.to_dense() if isinstance(A, SymmetricMatrix) else np.asarray(A, dtype=float)
    n = M.shape[0]
    if n > r:
        raise ValueError(f"need n <= r, got n={n}, r={r}")
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"Cholesky failed: {exc}") from exc
    return 2.0 * float(np.sum(np.log(np.diag(L)))) - _falling_log(r, n)


def log_density_ratio_batch(As: np.ndarray, r: int) -> np.ndarray:
    """Vectorized :func:`wishart_log_density_ratio`; -inf where Cholesky fails."""
    n = As.shape[-1]
    if n > r:
        raise ValueError(f"need n <= r, got n={n}, r={r}")
    try:
        L = np.linalg.cholesky(As)
        logdet = 2.0 * np.log(np.diagonal(L, axis1=-2, axis2=-1)).sum(axis=-1)
    except np.linalg.LinAlgError:
        logdet = np.empty(len(As))
        for i, M in enumerate(As):
            try:
                logdet[i] = 2.0 * np.log(np.diag(np.linalg.cholesky(M))).sum()
            except np.linalg.LinAlgError:
                logdet[i] = -np.inf
    return logdet - _falling_log(r, n)


@dataclass(frozen=True)
class TVEstimate:
    value: float
    stderr: float
    samples: int


def tv_monte_carlo(n: int, r: int, samples: int = DEFAULT_TV_SAMPLES, seed: int = 0,
                   batch: int = 10_000, method: str = "bartlett") -> TVEstimate:
    """Monte-Carlo TV(W(n, r), W(n, r + 2)) = E_{A ~ W(n, r)} (1 - ratio(A))_+."""
    if n > r:
        raise ValueError(f"need n <= r, got n={n}, r={r}")
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = rng_from_seed(seed)
    vals = np.empty(samples)
    for start in range(0, samples, batch):
        size = min(batch, samples - start)
        As = wishart_batch(n, r, size, rng, method)
        vals[start:start + size] = np.clip(1.0 - np.exp(log_density_ratio_batch(As, r)), 0.0, 1.0)
    stderr = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("nan")
    return TVEstimate(float(vals.mean()), stderr, samples)


def tv_limit(alpha: float) -> float:
    """Limiting TV as n, r grow with n/r -> alpha.

    E[1 - (1 - alpha) e^x]_+ for x ~ N(0, -2 log(1 - alpha)), by quadrature
    in the standardized variable z = x / sd.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    sd = math.sqrt(-2.0 * math.log1p(-alpha))
    upper = -math.log1p(-alpha) / sd  # integrand is positive for z below this

    def integrand(z):
        return -math.expm1(math.log1p(-alpha) + sd * z) * stats.norm.pdf(z)

    value, _ = integrate.quad(integrand, -np.inf, upper, epsabs=1e-12, epsrel=1e-10)
    return float(value)


def lr_distinguisher(corner, r: int) -> str:
    """Bayes-optimal guess between W(k, r) and W(k, r + 2) at equal priors.

    A singular corner has zero density ratio and is assigned to rank r.
    """
    try:
        llr = wishart_log_density_ratio(corner, r)
    except SingularMatrixError:
        return RANK_R
    return RANK_R_PLUS_2 if llr >= 0 else RANK_R


@dataclass(frozen=True)
class DistinguishingOutcome:
    k: int
    n: int
    r: int
    advantage: float
    trials: int
    seed: int
    tester: str = "lr"

    def to_dict(self) -> dict:
        return asdict(self)


def _advantage(decide_high_null: np.ndarray, decide_high_alt: np.ndarray) -> float:
    trials = decide_high_null.size + decide_high_alt.size
    correct = np.count_nonzero(~decide_high_null) + np.count_nonzero(decide_high_alt)
    return 2.0 * correct / trials - 1.0


def lr_advantage(k: int, r: int, trials: int, seed: int, method: str = "gram", batch: int = 500) -> float:
    """Empirical advantage of :func:`lr_distinguisher` on k x k corners.

    The first ``trials // 2`` instances come from W(k, r), the rest from
    W(k, r + 2).  Corners of W(n, r) are W(k, r) for any n >= k, so the
    corner is sampled directly.
    """
    if k > r:
        raise ValueError(f"query budget k={k} exceeds r={r}")
    if trials < 2:
        raise ValueError("need at least 2 trials")
    rng = rng_from_seed(seed)
    n_null = trials // 2
    decisions = []
    for dof, count in ((r, n_null), (r + 2, trials - n_null)):
        out = []
        for start in range(0, count, batch):
            As = wishart_batch(k, dof, min(batch, count - start), rng, method)
            out.append(log_density_ratio_batch(As, r) >= 0)
        decisions.append(np.concatenate(out))
    return _advantage(*decisions)


def advantage_curve(r: int, k_list, trials: int = DEFAULT_TRIALS, seed: int = 0) -> list[DistinguishingOutcome]:
    out = []
    for i, k in enumerate(k_list):
        adv = lr_advantage(int(k), r, trials, sub_seed(seed, i))
        out.append(DistinguishingOutcome(int(k), int(k), r, adv, trials, seed))
    return out


def _lanczos_ritz(matvec, n: int, budget: int, rng: np.random.Generator) -> np.ndarray:
    """Ritz values after ``budget`` Lanczos steps (full reorthogonalization)."""
    V = np.zeros((n, budget))
    alpha = np.zeros(budget)
    beta = np.zeros(budget)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    steps = budget
    for j in range(budget):
        V[:, j] = v
        w = matvec(v)
        alpha[j] = v @ w
        w -= V[:, : j + 1] @ (V[:, : j + 1].T @ w)
        b = np.linalg.norm(w)
        if j + 1 == budget or b < 1e-10:
            steps = j + 1
            break
        beta[j] = b
        v = w / b
    T = np.diag(alpha[:steps]) + np.diag(beta[: steps - 1], 1) + np.diag(beta[: steps - 1], -1)
    return eigvalsh_desc(T)


def power_tester_statistic(matvec, n: int, budget: int, rng: np.random.Generator) -> float:
    """Mean log Ritz value of a Krylov run from a random start."""
    ritz = _lanczos_ritz(matvec, n, budget, rng)
    return float(np.mean(np.log(np.maximum(ritz, 1e-300))))


def adaptive_power_advantage(r: int, budget: int, trials: int = DEFAULT_TRIALS, seed: int = 0,
                             n: int | None = None) -> DistinguishingOutcome:
    """Held-out advantage of an adaptive Krylov tester on W(n, r) vs W(n, r + 2).

    The tester queries A = G G^T only through products, chosen adaptively by
    Lanczos.  Its decision threshold is fit on one set of ``trials``
    instances and scored on a second, independent set.
    """
    n = 2 * r if n is None else n
    if budget > n:
        raise ValueError(f"budget {budget} exceeds matrix dimension {n}")

    def run(rng):
        half = trials // 2
        stats_, labels = [], []
        for i in range(trials):
            dof = r if i < half else r + 2
            G = rng.standard_normal((n, dof))
            stats_.append(power_tester_statistic(lambda v: G @ (G.T @ v), n, budget, rng))
            labels.append(i >= half)
        return np.array(stats_), np.array(labels)

    x_fit, y_fit = run(rng_from_seed(sub_seed(seed, 0)))
    best = (-np.inf, 0.0, 1)
    for thr in np.unique(x_fit):
        for direction in (1, -1):
            pred = direction * (x_fit - thr) >= 0
            acc = np.mean(pred == y_fit)
            if acc > best[0]:
                best = (acc, thr, direction)
    _, thr, direction = best
    x_test, y_test = run(rng_from_seed(sub_seed(seed, 1)))
    pred = direction * (x_test - thr) >= 0
    adv = _advantage(pred[~y_test], pred[y_test])
    return DistinguishingOutcome(budget, n, r, float(adv), trials, seed, tester="adaptive-power")


def sample_random_projection(d: int, r: int, seed: int) -> SymmetricMatrix:
    """Orthogonal projection onto a Haar-random r-dimensional subspace of R^d."""
    if not 1 <= r <= d:
        raise ValueError(f"need 1 <= r <= d, got r={r}, d={d}")
    U = haar_frame(d, r, rng_from_seed(seed))
    return SymmetricMatrix.from_dense(U @ U.T)


@dataclass(frozen=True)
class CornerGaussianity:
    ks_statistic: float
    mean: float
    count: int


def projection_corner_gaussianity(d: int, r: int, k: int, trials: int, seed: int) -> CornerGaussianity:
    """KS distance between pooled entries of sqrt(d) * (k x r corner of Haar U) and N(0, 1).

    The corner is close to Gaussian only when d >> r^2; smaller d is allowed
    so the failure of that regime can be observed.
    """
    if not 1 <= k <= r <= d:
        raise ValueError(f"need 1 <= k <= r <= d, got k={k}, r={r}, d={d}")
    rng = rng_from_seed(seed)
    pooled = np.concatenate([(math.sqrt(d) * haar_frame(d, r, rng)[:k]).ravel() for _ in range(trials)])
    ks = stats.kstest(pooled, "norm").statistic
    return CornerGaussianity(float(ks), float(pooled.mean()), pooled.size)
