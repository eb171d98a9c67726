"""
Predictor screening: score every predictor against the response, rank them
by descending score, and cut the ranking with a threshold rule.

Scores are computed independently per predictor and written into a
preallocated array by index, so the result never depends on how many
worker threads were used.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import DcsisScorer, SisScorer
from .dcor import dcor_sq_from_terms, dcov_terms_against, distance_summary
from .errors import ConfigError, DegenerateInputError, DomainError, ShapeError
from .lds import DirectionNumberTable
from .mrank import rank_cloud

log = logging.getLogger(__name__)


class MrdcScorer:
    """Rank-maps the response once; each predictor is rank-mapped on demand."""

    name = "mrdc"

    def __init__(self, response, backend=None, table: DirectionNumberTable | None = None):
        self.table = table
        self.backend = backend
        self.response_rank = rank_cloud(response, table, backend=backend)
        self.summary = distance_summary(self.response_rank.points, backend=backend)

    @staticmethod
    def check_predictors(d: int) -> None:
        pass

    def score(self, xj) -> float:
        rx = rank_cloud(xj, self.table, backend=self.backend)
        return dcor_sq_from_terms(dcov_terms_against(rx.points, self.summary))


METHODS = {"mrdc": MrdcScorer, "dcsis": DcsisScorer, "sis": SisScorer}


# -- threshold rules ------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdRule:
    """``hard`` (param = multiplier), ``max-ratio``, ``top`` (param = k),
    or ``cutoff`` (param = (c, kappa)): keep scores >= c * n**-kappa."""

    kind: str
    param: object = None

    def __post_init__(self):
        if self.kind == "hard":
            if not (isinstance(self.param, int) and self.param >= 1):
                raise ConfigError(f"hard threshold multiplier must be a positive integer, got {self.param!r}")
        elif self.kind == "top":
            if not (isinstance(self.param, int) and self.param >= 0):
                raise ConfigError(f"top-k needs a nonnegative integer k, got {self.param!r}")
        elif self.kind == "cutoff":
            c, kappa = self.param
            if not c > 0:
                raise ConfigError(f"cutoff constant must be positive, got {c!r}")
        elif self.kind != "max-ratio":
            raise ConfigError(f"unknown threshold rule {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "ThresholdRule":
        """Parse ``hard:M``, ``max-ratio``, ``top:K`` or ``cutoff:C,KAPPA``."""
        kind, _, arg = text.strip().partition(":")
        try:
            if kind == "hard":
                return cls("hard", int(arg))
            if kind == "top":
                return cls("top", int(arg))
            if kind == "cutoff":
                c, kappa = (float(v) for v in arg.split(","))
                return cls("cutoff", (c, kappa))
        except ValueError as exc:
            raise ConfigError(f"bad threshold rule {text!r}") from exc
        if kind == "max-ratio" and not arg:
            return cls("max-ratio")
        raise ConfigError(f"unknown threshold rule {text!r}")

    def describe(self) -> str:
        if self.kind == "max-ratio":
            return "max-ratio"
        if self.kind == "cutoff":
            return "cutoff:{},{}".format(*self.param)
        return f"{self.kind}:{self.param}"


def base_threshold(n: int) -> int:
    """``floor(n / ln n)``, the unit hard-threshold size d1."""
    if n < 2:
        raise DomainError(f"hard threshold needs n >= 2, got {n}")
    return int(math.floor(n / math.log(n)))


def hard_threshold(ranking, n: int, multiplier: int) -> np.ndarray:
    """Top ``multiplier * floor(n / ln n)`` entries of ``ranking``."""
    if multiplier < 1:
        raise DomainError(f"multiplier must be >= 1, got {multiplier}")
    ranking = np.asarray(ranking)
    return ranking[: multiplier * base_threshold(n)]


def max_ratio_threshold(sorted_scores) -> int:
    """Estimated active-set size: argmax over j of ``w_(j) / w_(j+1)`` (1-based).

    A zero successor after a positive score counts as an infinite ratio;
    ``0 / 0`` counts as 1. Ties go to the smallest j.

    >>> max_ratio_threshold([0.9, 0.8, 0.7, 0.1, 0.05])
    3
    """
    w = np.asarray(sorted_scores, dtype=np.float64)
    if w.ndim != 1 or w.size < 2:
        raise DomainError("max-ratio needs at least two scores")
    if np.any(w < 0):
        raise DomainError("scores must be nonnegative")
    if np.any(np.diff(w) > 0):
        raise DomainError("scores must be sorted in descending order")
    if not np.any(w > 0):
        raise DegenerateInputError("all scores are zero; max-ratio is undefined")
    head, tail = w[:-1], w[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = head / tail
    ratios[(tail == 0) & (head > 0)] = np.inf
    ratios[(tail == 0) & (head == 0)] = 1.0
    return int(np.argmax(ratios)) + 1


def rank_gap(scores, active) -> float:
    """``min(scores[active]) - max(scores[inactive])``; positive iff the
    active set occupies the top of the ranking."""
    w = np.asarray(scores, dtype=np.float64)
    act = np.zeros(w.size, dtype=bool)
    act[np.asarray(list(active), dtype=np.int64)] = True
    if not act.any() or act.all():
        raise DomainError("active set must be a nonempty proper subset")
    return float(w[act].min() - w[~act].max())


def rank_scores(scores) -> np.ndarray:
    """Indices by descending score, ties by ascending index."""
    w = np.asarray(scores, dtype=np.float64)
    return np.argsort(-w, kind="stable")


def apply_rule(scores, ranking, n: int, rule: ThresholdRule) -> tuple[np.ndarray, dict]:
    ranking = np.asarray(ranking)
    p = ranking.size
    if rule.kind == "hard":
        d1 = base_threshold(n)
        size = min(rule.param * d1, p)
        return ranking[:size], {"d1": d1, "multiplier": rule.param, "size": size}
    if rule.kind == "top":
        size = min(rule.param, p)
        return ranking[:size], {"size": size}
    if rule.kind == "max-ratio":
        s0 = max_ratio_threshold(np.asarray(scores)[ranking])
        return ranking[:s0], {"size": s0}
    c, kappa = rule.param
    cut = c * float(n) ** (-kappa)
    size = int(np.count_nonzero(np.asarray(scores)[ranking] >= cut))
    return ranking[:size], {"cutoff": cut, "size": size}


# -- reports --------------------------------------------------------------------


@dataclass
class ScreenReport:
    scores: np.ndarray
    ranking: np.ndarray
    selected: np.ndarray
    rule: ThresholdRule
    rule_info: dict
    method: str
    n: int
    p: int
    d: int
    q: int
    warnings: list = field(default_factory=list)
    feature_names: list | None = None
    elapsed: float = 0.0  # wall time; kept out of serialized output

    def positions(self) -> np.ndarray:
        """1-based rank position of each predictor."""
        pos = np.empty(self.p, dtype=np.int64)
        pos[self.ranking] = np.arange(1, self.p + 1)
        return pos

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "n": self.n,
            "p": self.p,
            "d": self.d,
            "q": self.q,
            "rule": self.rule.describe(),
            "rule_info": self.rule_info,
            "scores": [float(s) for s in self.scores],
            "ranking": [int(i) for i in self.ranking],
            "selected": [int(i) for i in self.selected],
            "warnings": list(self.warnings),
            "feature_names": self.feature_names,
        }


def _as_tensor(X) -> np.ndarray:
    x = np.asarray(X, dtype=np.float64)
    if x.ndim == 2:
        x = x[:, :, None]
    if x.ndim != 3:
        raise ShapeError(f"predictors must be n x p or n x p x d, got shape {x.shape}")
    return x


def _as_response(Y) -> np.ndarray:
    y = np.asarray(Y, dtype=np.float64)
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2:
        raise ShapeError(f"response must be n or n x q, got shape {y.shape}")
    return y


def compute_scores(
    X,
    Y,
    method: str = "mrdc",
    *,
    threads: int = 1,
    table: DirectionNumberTable | None = None,
    backend: str | None = None,
) -> tuple[np.ndarray, list]:
    """Score every predictor. Returns ``(scores, warnings)``.

    Degenerate predictors (zero distance variance) score 0 and add a
    warning; a degenerate response raises ``DegenerateInputError``.
    """
    x = _as_tensor(X)
    y = _as_response(Y)
    n, p, d = x.shape
    if y.shape[0] != n:
        raise ShapeError(f"X has {n} samples but Y has {y.shape[0]}")
    if n < 2:
        raise DomainError("screening needs n >= 2")
    if p < 1:
        raise DomainError("screening needs p >= 1")
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    scorer_cls = METHODS[method]
    scorer_cls.check_predictors(d)
    scorer = scorer_cls(y, backend=backend, table=table)

    scores = np.zeros(p)
    degenerate = np.zeros(p, dtype=bool)

    def work(js):
        for j in js:
            try:
                scores[j] = scorer.score(x[:, j, :])
            except DegenerateInputError:
                scores[j] = 0.0
                degenerate[j] = True

    if threads <= 1 or p < 2:
        work(range(p))
    else:
        chunks = np.array_split(np.arange(p), min(p, threads * 4))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, chunks))

    warnings = [f"predictor {int(j)}: zero distance variance, score set to 0" for j in np.flatnonzero(degenerate)]
    for msg in warnings:
        log.warning(msg)
    return scores, warnings


def screen(
    X,
    Y,
    rule: ThresholdRule | str | None = None,
    method: str = "mrdc",
    *,
    threads: int = 1,
    table: DirectionNumberTable | None = None,
    backend: str | None = None,
    feature_names: list | None = None,
) -> ScreenReport:
    """Score, rank and threshold all predictors.

    ``X`` is ``n x p`` or ``n x p x d``; ``Y`` is ``n`` or ``n x q``. The
    default rule is ``hard:1`` (keep ``floor(n / ln n)`` predictors).
    """
    if rule is None:
        rule = ThresholdRule("hard", 1)
    elif isinstance(rule, str):
        rule = ThresholdRule.parse(rule)
    x = _as_tensor(X)
    y = _as_response(Y)
    t0 = time.perf_counter()
    scores, warnings = compute_scores(x, y, method, threads=threads, table=table, backend=backend)
    ranking = rank_scores(scores)
    selected, info = apply_rule(scores, ranking, x.shape[0], rule)
    return ScreenReport(
        scores=scores,
        ranking=ranking,
        selected=selected,
        rule=rule,
        rule_info=info,
        method=method,
        n=x.shape[0],
        p=x.shape[1],
        d=x.shape[2],
        q=y.shape[1],
        warnings=warnings,
        feature_names=feature_names,
        elapsed=time.perf_counter() - t0,
    )
