"""Ranking metrics, ridge-parameter calibration and the experiment runner.

Both mapping directions end with a nearest-neighbor search between test
sources and test targets:

* ``Ridge_X->Y`` maps test sources into target space and ranks the raw test
  targets around them.
* ``Ridge_Y->X`` maps test targets into source space and ranks those images
  around the raw test sources.
"""
import hashlib
import json
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .hubness import hubness_report
from .neighbors import DEFAULT_NICDM_K, nicdm, pairwise_euclidean, rank_all
from .regression import Direction, fit_ridge, predict

DEFAULT_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0, 1e2, 1e3)
DEFAULT_FOLDS = 5
DEFAULT_K = (1, 10)


# --- metrics -----------------------------------------------------------------


def _gold_positions(ranking, gold):
    if not gold:
        raise ValueError(f"empty gold set for query {ranking.query_id!r}")
    ids = ranking.ids()
    positions = [i + 1 for i, t in enumerate(ids) if t in gold]
    if len(positions) != len(gold):
        missing = set(gold) - set(ids)
        raise ValueError(f"gold targets {sorted(map(str, missing))} are not in the ranking")
    return positions


def average_precision(ranking, gold):
    """Mean over gold items of (gold items ranked at or above it) / its rank."""
    positions = _gold_positions(ranking, set(gold))
    return sum((i + 1) / pos for i, pos in enumerate(positions)) / len(positions)


def _gold_for(gold, ranking):
    try:
        return gold[ranking.query_id]
    except KeyError:
        raise KeyError(f"no gold targets for query {ranking.query_id!r}") from None


def mean_average_precision(rankings, gold):
    if not rankings:
        raise ValueError("no rankings")
    return sum(average_precision(r, _gold_for(gold, r)) for r in rankings) / len(rankings)


def mean_reciprocal_rank(rankings, gold):
    if not rankings:
        raise ValueError("no rankings")
    return sum(1.0 / _gold_positions(r, set(_gold_for(gold, r)))[0] for r in rankings) / len(rankings)


def top_k_accuracy(rankings, gold, k, macro=False):
    """Fraction of queries with a gold target among their first ``k``.

    With ``macro=True`` queries are grouped by their gold set (their class)
    and the per-class accuracies are averaged.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not rankings:
        raise ValueError("no rankings")
    hits = {}
    for r in rankings:
        g = frozenset(_gold_for(gold, r))
        hit = any(t in g for t in r.ids(k))
        hits.setdefault(g if macro else None, []).append(hit)
    return float(np.mean([np.mean(v) for v in hits.values()]))


# --- test-side bookkeeping ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class RankingTask:
    """Unique queries, candidate vocabulary and gold sets drawn from one dataset."""

    query_ids: tuple
    query_vectors: np.ndarray  # source space, one column per query
    target_ids: tuple
    target_vectors: np.ndarray  # target space, one column per candidate
    gold: dict

    @classmethod
    def from_dataset(cls, ds):
        q_first, t_first = {}, {}
        gold = {}
        for col, (s, t) in enumerate(zip(ds.source_ids, ds.target_ids)):
            q_first.setdefault(s, col)
            t_first.setdefault(t, col)
            gold.setdefault(s, set()).add(t)
        return cls(
            tuple(q_first),
            ds.source[:, list(q_first.values())],
            tuple(t_first),
            ds.target[:, list(t_first.values())],
            {q: frozenset(g) for q, g in gold.items()},
        )


def direction_distances(train, task, direction, lam, model=None):
    """Euclidean dissimilarities (queries x candidates) after mapping in ``direction``."""
    direction = Direction(direction)
    if direction is Direction.SOURCE_TO_TARGET:
        model = model or fit_ridge(train.source, train.target, lam, direction=direction)
        return pairwise_euclidean(predict(model, task.query_vectors), task.target_vectors)
    model = model or fit_ridge(train.target, train.source, lam, direction=direction)
    return pairwise_euclidean(task.query_vectors, predict(model, task.target_vectors))


# --- methods -----------------------------------------------------------------


@dataclass(frozen=True)
class MethodSpec:
    direction: Direction
    use_nicdm: bool = False

    @property
    def name(self):
        arrow = "X->Y" if self.direction is Direction.SOURCE_TO_TARGET else "Y->X"
        return f"Ridge_{arrow}" + ("+NICDM" if self.use_nicdm else "")

    @property
    def key(self):
        return f"ridge-{self.direction.value}" + ("+nicdm" if self.use_nicdm else "")

    @classmethod
    def parse(cls, text):
        """Accept ``ridge-xy``, ``ridge-yx`` and either with a ``+nicdm`` suffix."""
        key = text.strip().lower()
        base, _, suffix = key.partition("+")
        if base not in ("ridge-xy", "ridge-yx") or suffix not in ("", "nicdm"):
            raise ValueError(f"unknown method {text!r}; use ridge-xy, ridge-yx, optionally +nicdm")
        return cls(Direction(base[-2:]), suffix == "nicdm")


def expand_methods(keys, with_nicdm=False):
    """Parse method keys; ``with_nicdm`` adds the NICDM variant of each."""
    specs = []
    for key in keys:
        spec = MethodSpec.parse(key)
        variants = [spec, MethodSpec(spec.direction, True)] if with_nicdm and not spec.use_nicdm else [spec]
        for v in variants:
            if v not in specs:
                specs.append(v)
    return specs


# --- calibration -------------------------------------------------------------


class Calibration(NamedTuple):
    lam: float
    cv_map: float


def target_folds(train, folds, seed):
    """Partition pair columns into ``folds`` groups, keeping each target id in one group."""
    targets = list(dict.fromkeys(train.target_ids))
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if len(targets) < folds:
        raise ValueError(f"{len(targets)} distinct targets cannot fill {folds} folds")
    perm = np.random.default_rng(seed).permutation(len(targets))
    fold_of = {targets[j]: pos % folds for pos, j in enumerate(perm)}
    assignment = np.array([fold_of[t] for t in train.target_ids])
    return [np.flatnonzero(assignment == f) for f in range(folds)]


def cross_validated_map(train, direction, lam, folds=DEFAULT_FOLDS, seed=0, nicdm_k=None):
    """Mean held-out MAP of one ridge parameter.

    In each fold the held-out pairs' targets are the whole candidate
    vocabulary, so validation targets are never seen in fitting.
    """
    scores = []
    for held in target_folds(train, folds, seed):
        rest = np.setdiff1d(np.arange(len(train)), held)
        task = RankingTask.from_dataset(train.subset(held))
        dist = direction_distances(train.subset(rest), task, direction, lam)
        if nicdm_k is not None:
            dist = nicdm(dist, min(nicdm_k, *dist.shape))
        rankings = rank_all(dist, task.target_ids, task.query_ids)
        scores.append(mean_average_precision(rankings, task.gold))
    return float(np.mean(scores))


def calibrate_lambda(train, direction, grid=DEFAULT_GRID, folds=DEFAULT_FOLDS, seed=0, nicdm_k=None):
    """Grid value with the best cross-validated MAP; ties go to the larger value."""
    values = sorted({float(g) for g in grid})
    if not values:
        raise ValueError("empty lambda grid")
    if values[0] < 0:
        raise ValueError("lambda grid values must be nonnegative")
    best = None
    for lam in values:
        score = cross_validated_map(train, direction, lam, folds, seed, nicdm_k)
        if best is None or score >= best.cv_map:
            best = Calibration(lam, score)
    return best


# --- experiment runner -------------------------------------------------------


@dataclass
class EvalReport:
    method_name: str
    map: float
    acc: dict
    nk_skewness: dict
    num_queries: int
    lam: float
    config_digest: str
    config: dict = field(default_factory=dict, repr=False)

    def record(self):
        return asdict(self)


def _digest(obj):
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()


def evaluate(train, test, method, lam, k_list=DEFAULT_K, nicdm_k=DEFAULT_NICDM_K,
             macro=False, task=None, model=None, config=None):
    """Fit, rank and score one method at a fixed ridge parameter."""
    task = task or RankingTask.from_dataset(test)
    dist = direction_distances(train, task, method.direction, lam, model)
    if method.use_nicdm:
        dist = nicdm(dist, nicdm_k)
    rankings = rank_all(dist, task.target_ids, task.query_ids)
    k_list = tuple(sorted(set(int(k) for k in k_list)))
    config = dict(config or {}, method=method.key, lam=float(lam), k_list=list(k_list),
                  nicdm_k=nicdm_k if method.use_nicdm else None, macro=bool(macro))
    return EvalReport(
        method_name=method.name,
        map=mean_average_precision(rankings, task.gold),
        acc={k: top_k_accuracy(rankings, task.gold, k, macro) for k in k_list},
        nk_skewness={k: hubness_report(dist, k).skewness for k in k_list},
        num_queries=len(rankings),
        lam=float(lam),
        config_digest=_digest(config),
        config=config,
    )


def run_experiment(train, test, methods, k_list=DEFAULT_K, lam=None, grid=DEFAULT_GRID,
                   folds=DEFAULT_FOLDS, seed=0, nicdm_k=DEFAULT_NICDM_K, macro=False):
    """One :class:`EvalReport` per method, in the order given.

    With ``lam=None`` the ridge parameter is calibrated per direction by
    cross-validation on ``train`` (Euclidean ranking); NICDM variants reuse
    the value chosen for their direction.
    """
    methods = [m if isinstance(m, MethodSpec) else MethodSpec.parse(m) for m in methods]
    if not methods:
        raise ValueError("no methods given")
    task = RankingTask.from_dataset(test)
    if max(k_list) > len(task.target_ids):
        raise ValueError(f"k={max(k_list)} exceeds the {len(task.target_ids)} distinct test targets")
    base = {
        "train": train.digest(),
        "test": test.digest(),
        "grid": None if lam is not None else sorted({float(g) for g in grid}),
        "folds": None if lam is not None else folds,
        "cv_seed": None if lam is not None else seed,
    }
    chosen, models = {}, {}
    reports = []
    for method in methods:
        d = method.direction
        if d not in chosen:
            chosen[d] = float(lam) if lam is not None else calibrate_lambda(train, d, grid, folds, seed).lam
            A, B = (train.source, train.target) if d is Direction.SOURCE_TO_TARGET else (train.target, train.source)
            models[d] = fit_ridge(A, B, chosen[d], direction=d)
        reports.append(evaluate(train, test, method, chosen[d], k_list, nicdm_k, macro,
                                task=task, model=models[d], config=base))
    return reports
