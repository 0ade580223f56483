"""Closed forms and Monte Carlo checks for the hubness/shrinkage analysis.

Every randomized routine takes an explicit integer seed. Work is split into
fixed-size batches, each drawing from its own child of
``numpy.random.SeedSequence(seed)``, so results do not depend on how the
batches are scheduled.
"""
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy import stats

from .errors import RankDeficientWarning
from .hubness import hubness_report
from .neighbors import pairwise_euclidean
from .regression import hat_matrix, solve_ridge, spectral_norm

_BATCH = 10_000
_BATCH_ELEMENTS = 2_000_000


class MonteCarloEstimate(NamedTuple):
    estimate: float
    std_error: float


class BallProbabilities(NamedTuple):
    p1: float
    p2: float


class SkewnessPair(NamedTuple):
    skew_a: float
    skew_b: float


@dataclass(frozen=True)
class DeltaParams:
    gamma: float
    dim: int
    s2: float = 1.0
    query_s2: float = 1.0
    num_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not (self.s2 > 0 and self.query_s2 > 0):
            raise ValueError("variances must be positive")
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")


@dataclass(frozen=True)
class BallExperimentParams:
    dim: int = 2
    num_dataset: int = 100
    r: float = 0.5
    norm1: float = 0.5
    norm2: float = 2.5
    num_trials: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("dim must be >= 2: in one dimension the two constraints meet only on a null set")
        if self.num_dataset < 1 or self.num_trials < 1:
            raise ValueError("num_dataset and num_trials must be positive")
        if not self.r > 0:
            raise ValueError("r must be positive")
        if not 0 <= self.norm1 < self.norm2:
            raise ValueError("need 0 <= norm1 < norm2")


@dataclass(frozen=True)
class TwoConfigParams:
    dim: int = 300
    s1: float = 1.0
    s2: float = 2.0
    num_queries: int = 1000
    num_targets: int = 1000
    k: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.s1 <= self.s2:
            raise ValueError("need 0 < s1 <= s2")
        if not 1 <= self.k <= self.num_targets:
            raise ValueError("need 1 <= k <= num_targets")
        if self.dim < 1 or self.num_queries < 1:
            raise ValueError("dim and num_queries must be positive")


def _batches(total, size):
    return [min(size, total - start) for start in range(0, total, size)]


def _child_rngs(seed, n):
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in seed.spawn(n)]


def _mean_and_se(chunks):
    values = np.concatenate(chunks)
    n = values.size
    mean = float(values.mean())
    if n < 2:
        return MonteCarloEstimate(mean, math.nan)
    return MonteCarloEstimate(mean, float(values.std(ddof=1) / math.sqrt(n)))


def squared_norm_std(dim, s2):
    """Standard deviation of ``||y||^2`` for ``y ~ N(0, s2 I_dim)``: ``sqrt(2 dim) s2``."""
    return math.sqrt(2.0 * dim) * s2


def delta_closed_form(gamma, dim, s2):
    """Expected gap in squared distance from a zero-mean query to two targets
    whose squared norms differ by ``gamma`` standard deviations."""
    if dim < 1 or not s2 > 0:
        raise ValueError("need dim >= 1 and s2 > 0")
    return math.sqrt(2.0) * gamma * math.sqrt(dim) * s2


def gapped_targets(gamma, dim, s2, rng):
    """Two targets along one random direction with ``||y2||^2 - ||y1||^2 = gamma * sigma``.

    ``||y1||^2`` is drawn from ``s2 * chi2(dim)``; draws that would make
    ``||y2||^2`` negative are rejected.
    """
    gap = gamma * squared_norm_std(dim, s2)
    u = rng.standard_normal(dim)
    u /= np.linalg.norm(u)
    while True:
        n1 = s2 * rng.chisquare(dim)
        n2 = n1 + gap
        if n2 >= 0:
            break
    return math.sqrt(n1) * u, math.sqrt(n2) * u


def delta_monte_carlo(params):
    """Sample mean and standard error of ``||x - y2||^2 - ||x - y1||^2``.

    ``y1`` and ``y2`` are fixed per call (see :func:`gapped_targets`); ``x``
    is drawn from ``N(0, query_s2 I)``.
    """
    p = params
    target_rng, *query_rngs = _child_rngs(p.seed, 1 + len(_batches(p.num_samples, _BATCH)))
    y1, y2 = gapped_targets(p.gamma, p.dim, p.s2, target_rng)
    scale = math.sqrt(p.query_s2)
    chunks = []
    for size, rng in zip(_batches(p.num_samples, _BATCH), query_rngs):
        x = scale * rng.standard_normal((size, p.dim))
        d2 = x - y2
        d1 = x - y1
        chunks.append(np.einsum("ij,ij->i", d2, d2) - np.einsum("ij,ij->i", d1, d1))
    return _mean_and_se(chunks)


def squared_norm_variance_mc(dim, s2, num_samples=100_000, seed=0):
    """Empirical variance of ``||y||^2`` over ``y ~ N(0, s2 I_dim)``."""
    if dim < 1 or not s2 > 0 or num_samples < 2:
        raise ValueError("need dim >= 1, s2 > 0 and num_samples >= 2")
    sizes = _batches(num_samples, _BATCH)
    chunks = []
    for size, rng in zip(sizes, _child_rngs(seed, len(sizes))):
        y = math.sqrt(s2) * rng.standard_normal((size, dim))
        chunks.append(np.einsum("ij,ij->i", y, y))
    return float(np.concatenate(chunks).var(ddof=1))


def _sample_norms_in_band(lo, hi, dim, size, rng):
    """Norms of standard normal vectors conditioned on ``lo <= ||y|| <= hi``."""
    dist = stats.chi2(dim)
    c_lo, c_hi = dist.cdf(lo * lo), dist.cdf(hi * hi)
    if c_hi - c_lo > 1e-12:
        sq = dist.ppf(rng.uniform(c_lo, c_hi, size))
        return np.sqrt(np.clip(sq, lo * lo, hi * hi))
    # band too thin for the inverse CDF; the density is flat across it
    return rng.uniform(lo, hi, size)


def _points_on_spheres(y, norm, r, rng):
    """Uniform points at distance ``r`` from each row of ``y`` with norm ``norm``."""
    rho = np.linalg.norm(y, axis=1)
    unit = y / rho[:, None]
    along = (norm * norm + rho * rho - r * r) / (2.0 * rho)
    across = np.sqrt(np.maximum(norm * norm - along * along, 0.0))
    g = rng.standard_normal(y.shape)
    g -= np.einsum("ij,ij->i", g, unit)[:, None] * unit
    g /= np.linalg.norm(g, axis=1)[:, None]
    return along[:, None] * unit + across[:, None] * g


def _ball_hit_rate(params, norm, seed):
    p = params
    lo, hi = abs(norm - p.r), norm + p.r
    if p.num_dataset == 1:
        return 1.0
    per_batch = max(1, _BATCH_ELEMENTS // (p.num_dataset * p.dim))
    sizes = _batches(p.num_trials, per_batch)
    hits = 0
    for size, rng in zip(sizes, _child_rngs(seed, len(sizes))):
        rho = _sample_norms_in_band(lo, hi, p.dim, size, rng)
        direction = rng.standard_normal((size, p.dim))
        direction /= np.linalg.norm(direction, axis=1)[:, None]
        y = rho[:, None] * direction
        x = _points_on_spheres(y, norm, p.r, rng)
        others = rng.standard_normal((size, p.num_dataset - 1, p.dim))
        d_y = np.linalg.norm(x - y, axis=1)
        d_others = np.linalg.norm(others - x[:, None, :], axis=2).min(axis=1)
        hits += int(np.count_nonzero(d_y <= d_others))
    return hits / p.num_trials


def ball_experiment(params):
    """Probability that ``y`` is the nearest member of ``Y`` to ``x1`` and to ``x2``.

    ``Y`` holds ``num_dataset`` standard normal points and ``y`` is one of
    them, picked uniformly. ``x_i`` lies at distance ``r`` from ``y`` with
    ``||x_i|| = norm_i``. Trials where no such ``x_i`` exists are redrawn;
    this is done exactly by drawing ``||y||`` from its distribution
    conditioned on the feasible band ``[|norm_i - r|, norm_i + r]``.

    The two alternatives are estimated from independent trial streams,
    since one ``y`` generally cannot admit both norms at once.
    """
    seed1, seed2 = np.random.SeedSequence(params.seed).spawn(2)
    return BallProbabilities(
        _ball_hit_rate(params, params.norm1, seed1),
        _ball_hit_rate(params, params.norm2, seed2),
    )


def pooled_binomial_se(p1, p2, n1, n2=None):
    n2 = n1 if n2 is None else n2
    pooled = (p1 * n1 + p2 * n2) / (n1 + n2)
    return math.sqrt(pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2))


def two_config_experiment(params):
    """N_k skewness with short queries/long targets (a) versus the reverse (b).

    (a): queries ~ N(0, s1^2 I), targets ~ N(0, s2^2 I).
    (b): queries ~ N(0, s2^2 I), targets ~ N(0, s1^2 I).
    """
    p = params
    rq_a, rt_a, rq_b, rt_b = _child_rngs(p.seed, 4)
    shape_q = (p.dim, p.num_queries)
    shape_t = (p.dim, p.num_targets)
    skews = []
    for rq, rt, sq, st in ((rq_a, rt_a, p.s1, p.s2), (rq_b, rt_b, p.s2, p.s1)):
        queries = sq * rq.standard_normal(shape_q)
        targets = st * rt.standard_normal(shape_t)
        skews.append(hubness_report(pairwise_euclidean(queries, targets), p.k).skewness)
    return SkewnessPair(*skews)


def two_config_sweep(params, seeds):
    """Run :func:`two_config_experiment` for each seed; returns arrays (skew_a, skew_b)."""
    pairs = [two_config_experiment(replace(params, seed=int(s))) for s in seeds]
    return np.array([p.skew_a for p in pairs]), np.array([p.skew_b for p in pairs])


# --- verification suite ----------------------------------------------------


@dataclass
class Check:
    name: str
    params: dict
    estimate: float
    expected: float
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class VerifyConfig:
    gammas: tuple = (0.0, 0.5, 1.0, 2.0)
    dims: tuple = (10, 100)
    s2s: tuple = (0.5, 1.0, 2.0)
    delta_samples: int = 100_000
    variance_cases: tuple = ((1, 1.0), (10, 2.0), (50, 1.0))
    variance_samples: int = 100_000
    variance_rtol: float = 0.05
    shrink_trials: int = 1000
    lambdas: tuple = (0.0, 1e-3, 1.0, 1e3)
    ball: BallExperimentParams = BallExperimentParams()
    two_config: TwoConfigParams = TwoConfigParams()
    two_config_seeds: int = 20
    seed: int = 0

    @classmethod
    def quick(cls):
        return cls(
            shrink_trials=100,
            ball=BallExperimentParams(num_trials=4000),
            two_config=TwoConfigParams(dim=100, num_queries=300, num_targets=300),
            two_config_seeds=5,
        )


def _delta_checks(cfg, closed_form):
    checks = []
    cell = 0
    for gamma in cfg.gammas:
        for dim in cfg.dims:
            for s2 in cfg.s2s:
                params = DeltaParams(gamma, dim, s2, 1.0, cfg.delta_samples, cfg.seed + cell)
                cell += 1
                est, se = delta_monte_carlo(params)
                expected = closed_form(gamma, dim, s2)
                tol = 3.0 * se
                checks.append(Check(
                    "delta", {"gamma": gamma, "dim": dim, "s2": s2, "samples": cfg.delta_samples},
                    est, expected, tol, abs(est - expected) <= tol, {"std_error": se},
                ))
    return checks


def _variance_checks(cfg):
    checks = []
    for i, (dim, s2) in enumerate(cfg.variance_cases):
        est = squared_norm_variance_mc(dim, s2, cfg.variance_samples, cfg.seed + i)
        expected = 2.0 * dim * s2 * s2
        tol = cfg.variance_rtol * expected
        checks.append(Check(
            "norm_variance", {"dim": dim, "s2": s2, "samples": cfg.variance_samples},
            est, expected, tol, abs(est - expected) <= tol,
        ))
    return checks


def shrinkage_trial(rng, lam):
    """One random instance: returns ``(||MA||_2, ||B||_2, ||hat||_2, sigma^2/(sigma^2+lam))``."""
    c, d = rng.integers(2, 31, size=2)
    n = rng.integers(5, 101)
    A = rng.standard_normal((c, n))
    B = rng.standard_normal((d, n))
    M = solve_ridge(A, B, lam)
    sigma = spectral_norm(A)
    return (
        spectral_norm(M @ A),
        spectral_norm(B),
        spectral_norm(hat_matrix(A, lam)),
        sigma * sigma / (sigma * sigma + lam),
    )


def _shrinkage_checks(cfg):
    worst_ratio = 0.0
    worst_hat = 0.0
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RankDeficientWarning)
        for t in range(cfg.shrink_trials):
            lam = cfg.lambdas[t % len(cfg.lambdas)]
            ma, b, hat, bound = shrinkage_trial(rng, lam)
            worst_ratio = max(worst_ratio, ma / b)
            worst_hat = max(worst_hat, abs(hat - bound))
    return [
        Check("shrinkage", {"trials": cfg.shrink_trials, "lambdas": list(cfg.lambdas)},
              worst_ratio, 1.0, 1e-10, worst_ratio <= 1.0 + 1e-10),
        Check("hat_norm", {"trials": cfg.shrink_trials, "lambdas": list(cfg.lambdas)},
              worst_hat, 0.0, 1e-8, worst_hat <= 1e-8),
    ]


def _ball_check(cfg):
    p = cfg.ball
    p1, p2 = ball_experiment(p)
    se = pooled_binomial_se(p1, p2, p.num_trials)
    return Check(
        "ball_ordering",
        {"dim": p.dim, "num_dataset": p.num_dataset, "r": p.r, "norm1": p.norm1,
         "norm2": p.norm2, "trials": p.num_trials},
        p2 - p1, 0.0, 2.0 * se, p2 - p1 > 2.0 * se, {"p1": p1, "p2": p2},
    )


def _two_config_check(cfg):
    p = cfg.two_config
    seeds = range(cfg.seed, cfg.seed + cfg.two_config_seeds)
    a, b = two_config_sweep(p, seeds)
    return Check(
        "two_config_ordering",
        {"dim": p.dim, "s1": p.s1, "s2": p.s2, "num_queries": p.num_queries,
         "num_targets": p.num_targets, "k": p.k, "seeds": cfg.two_config_seeds},
        float(b.mean()), float(a.mean()), 0.0, float(b.mean()) < float(a.mean()),
        {"mean_skew_a": float(a.mean()), "mean_skew_b": float(b.mean())},
    )


def run_verification(cfg=None, closed_form=delta_closed_form):
    """Run every check; ``closed_form`` is swappable so the failure path can be exercised."""
    cfg = cfg or VerifyConfig()
    return [
        *_delta_checks(cfg, closed_form),
        *_variance_checks(cfg),
        *_shrinkage_checks(cfg),
        _ball_check(cfg),
        _two_config_check(cfg),
    ]
