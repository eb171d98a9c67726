"""
Synthetic screening experiments.

Designs
-------
``ex1-case1`` / ``ex1-case2``
    Univariate response ``Y = b1*X1 + b2*X6 + b3*X12**2 + b4*X22 + e`` with
    predictors from a multivariate t_1 (AR(1) scale, rho = 0.5),
    ``b ~ U(2, 5)``; ``e ~ N(0, 1)`` (case 1) or ``e ~ t_1`` (case 2).
``ex2``
    Three-platform predictors ``X_j = [U_j, V_j, W_j]`` from multivariate
    t_2, t_1, t_3 (rho = 0.8); ten responses, the first four built from
    predictors 2, 4, 101, 102 on randomly chosen platforms with t_1 noise,
    the last six pure t_1 noise.
``ex3-case1`` / ``ex3-case2``
    Platforms Pareto(10, 15), Bin(4, 0.3), Pareto(12, 30); active predictors
    2, 3, 101, 102; Pareto(10, 15) noise. Case 2 replaces response 2 by its
    empirical-quartile bin index.
``gaussian-rho``
    ``Y = rho*X1 + sqrt(1 - rho**2)*e`` with i.i.d. standard normal
    predictors.

Predictor and feature indices are 0-based in code; labels such as ``X12``
use the 1-based names.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import ndtr

from .errors import ConfigError, DomainError
from .screening import METHODS, base_threshold, compute_scores, rank_gap, rank_scores

# 0-based active predictors per example
_ACTIVE = {
    "ex1-case1": (0, 5, 11, 21),
    "ex1-case2": (0, 5, 11, 21),
    "ex2": (1, 3, 100, 101),
    "ex3-case1": (1, 2, 100, 101),
    "ex3-case2": (1, 2, 100, 101),
    "gaussian-rho": (0,),
}
_SHAPE = {  # (d, q)
    "ex1-case1": (1, 1),
    "ex1-case2": (1, 1),
    "ex2": (3, 10),
    "ex3-case1": (3, 10),
    "ex3-case2": (3, 10),
    "gaussian-rho": (1, 1),
}
EXAMPLES = tuple(_ACTIVE)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


# -- marginal generators ----------------------------------------------------------


def gen_ar1_gaussian(n: int, p: int, rho: float, seed=None) -> np.ndarray:
    """Rows i.i.d. N(0, S) with ``S[j, k] = rho**|j - k|``.

    Built column by column as ``Z_j = rho*Z_{j-1} + sqrt(1 - rho**2)*e_j``,
    which reproduces that covariance exactly in O(n p).
    """
    if not abs(rho) < 1:
        raise DomainError(f"|rho| must be < 1, got {rho}")
    rng = _rng(seed)
    z = rng.standard_normal((n, p))
    s = math.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        z[:, j] = rho * z[:, j - 1] + s * z[:, j]
    return z


def gen_mvt(n: int, p: int, rho: float, df: float, seed=None) -> np.ndarray:
    """Multivariate t with AR(1) scale matrix: one chi-square divisor per row."""
    if not df >= 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {df}")
    rng = _rng(seed)
    g = gen_ar1_gaussian(n, p, rho, rng)
    w = rng.chisquare(df, size=n)
    return g / np.sqrt(w / df)[:, None]


def gen_mv_pareto(n: int, p: int, rho: float, shape: float, scale: float, seed=None) -> np.ndarray:
    """Pareto(shape, scale) marginals joined by an AR(1) Gaussian copula.

    ``X = scale * (1 - Phi(G))**(-1/shape)``; increasing in ``G``, so the
    copula's positive dependence carries over.
    """
    if not (shape > 0 and scale > 0):
        raise DomainError(f"Pareto shape and scale must be positive, got {shape}, {scale}")
    g = gen_ar1_gaussian(n, p, rho, seed)
    return scale * ndtr(-g) ** (-1.0 / shape)


def _pareto(rng, a: float, m: float, size) -> np.ndarray:
    return m * (1.0 + rng.pareto(a, size=size))


# -- designs ----------------------------------------------------------------------


@dataclass(frozen=True)
class SimDesign:
    example: str
    n: int = 200
    p: int = 500
    reps: int = 50
    seed: int = 0
    thresholds: tuple = (1, 2, 3)
    rho: float = 0.5

    def __post_init__(self):
        if self.example not in _ACTIVE:
            raise ConfigError(f"unknown example {self.example!r}; choose from {list(EXAMPLES)}")
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        need = max(self.active) + 1
        if self.p < need:
            raise ConfigError(f"{self.example} needs p >= {need}, got {self.p}")
        if not self.thresholds or any(int(m) < 1 for m in self.thresholds):
            raise ConfigError(f"threshold multipliers must be positive integers: {self.thresholds}")
        object.__setattr__(self, "thresholds", tuple(int(m) for m in self.thresholds))
        if self.example == "gaussian-rho" and not abs(self.rho) < 1:
            raise ConfigError(f"rho must satisfy |rho| < 1, got {self.rho}")

    @property
    def active(self) -> tuple:
        return _ACTIVE[self.example]

    @property
    def d(self) -> int:
        return _SHAPE[self.example][0]

    @property
    def q(self) -> int:
        return _SHAPE[self.example][1]

    @classmethod
    def from_dict(cls, cfg: dict) -> "SimDesign":
        known = {"example", "n", "p", "reps", "seed", "thresholds", "rho"}
        extra = set(cfg) - known
        if extra:
            raise ConfigError(f"unknown design keys: {sorted(extra)}")
        if "example" not in cfg:
            raise ConfigError("design is missing 'example'")
        kw = dict(cfg)
        if "thresholds" in kw:
            kw["thresholds"] = tuple(kw["thresholds"])
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "SimDesign":
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read design {path}: {exc}") from exc
        return cls.from_dict(cfg)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["thresholds"] = list(self.thresholds)
        return out


@dataclass
class TrueModel:
    active: tuple
    beta: np.ndarray
    platform_ids: np.ndarray | None = None


def replicate_seed(base_seed: int, replicate: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=base_seed, spawn_key=(replicate,))


def _multi_platform_response(rng, platforms, cols, noise):
    n = platforms[0].shape[0]
    y = np.empty((n, 10))
    betas = np.empty((4, 4))
    ids = np.empty((4, 4), dtype=np.int64)
    for k in range(4):
        idk = rng.integers(1, 4, size=4)
        b = rng.uniform(1.0, 2.0, size=4)
        eps = noise(n)
        y[:, k] = (
            b[0] * platforms[idk[0] - 1][:, cols[0]]
            + b[1] * platforms[idk[1] - 1][:, cols[1]]
            + b[2] * platforms[idk[2] - 1][:, cols[2]]
            + b[3] * platforms[idk[3] - 1][:, cols[3]] ** 2
            + eps
        )
        betas[k] = b
        ids[k] = idk
    for k in range(4, 10):
        y[:, k] = noise(n)
    return y, betas, ids


def quartile_bins(v: np.ndarray) -> np.ndarray:
    """Empirical-quartile bin index in {0, 1, 2, 3}."""
    cuts = np.quantile(v, [0.25, 0.5, 0.75])
    return np.searchsorted(cuts, v, side="right").astype(np.float64)


def build_example(design: SimDesign, replicate: int):
    """Generate ``(X, Y, truth)`` for one replicate; X is ``n x p x d``."""
    rng = _rng(replicate_seed(design.seed, replicate))
    n, p, ex = design.n, design.p, design.example
    active = design.active

    if ex in ("ex1-case1", "ex1-case2"):
        x = gen_mvt(n, p, 0.5, 1, rng)
        beta = rng.uniform(2.0, 5.0, size=4)
        eps = rng.standard_normal(n) if ex == "ex1-case1" else rng.standard_cauchy(n)
        c = active
        y = beta[0] * x[:, c[0]] + beta[1] * x[:, c[1]] + beta[2] * x[:, c[2]] ** 2 + beta[3] * x[:, c[3]] + eps
        return x[:, :, None], y[:, None], TrueModel(active, beta)

    if ex == "gaussian-rho":
        x = rng.standard_normal((n, p))
        e = rng.standard_normal(n)
        y = design.rho * x[:, 0] + math.sqrt(1.0 - design.rho**2) * e
        return x[:, :, None], y[:, None], TrueModel(active, np.array([design.rho]))

    if ex == "ex2":
        u = gen_mvt(n, p, 0.8, 2, rng)
        v = gen_mvt(n, p, 0.8, 1, rng)
        w = gen_mvt(n, p, 0.8, 3, rng)
        y, betas, ids = _multi_platform_response(rng, (u, v, w), active, rng.standard_cauchy)
        return np.stack([u, v, w], axis=2), y, TrueModel(active, betas, ids)

    # ex3-case1 / ex3-case2
    u = gen_mv_pareto(n, p, 0.8, 10.0, 15.0, rng)
    v = rng.binomial(4, 0.3, size=(n, p)).astype(np.float64)
    w = gen_mv_pareto(n, p, 0.8, 12.0, 30.0, rng)
    y, betas, ids = _multi_platform_response(
        rng, (u, v, w), active, lambda size: _pareto(rng, 10.0, 15.0, size)
    )
    if ex == "ex3-case2":
        y[:, 1] = quartile_bins(y[:, 1])
    return np.stack([u, v, w], axis=2), y, TrueModel(active, betas, ids)


# -- evaluation -------------------------------------------------------------------


def feature_label(j: int) -> str:
    return f"X{j + 1}"


@dataclass
class SimReport:
    design: dict
    method: str
    active: list
    thresholds: dict  # label -> selection size
    S: list
    S_mean: float
    S_std: float | None
    Ps: dict  # threshold label -> {feature label: rate}
    Pa: dict  # threshold label -> rate
    active_positions: list = field(default_factory=list)
    rank_gaps: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def table(self) -> str:
        labels = [feature_label(j) for j in self.active]
        std = "NA" if self.S_std is None else f"{self.S_std:.2f}"
        lines = [
            f"{self.method}: S.mean = {self.S_mean:.2f}, S.std = {std}",
            "Model size " + "".join(f"{lab:>8}" for lab in labels) + f"{'All':>8}",
        ]
        for key, size in self.thresholds.items():
            ps = "".join(f"{self.Ps[key][lab]:>8.3g}" for lab in labels)
            lines.append(f"{key + ' (' + str(size) + ')':<11}" + ps + f"{self.Pa[key]:>8.3g}")
        return "\n".join(lines)


def evaluate(positions, active, n: int, multipliers=(1, 2, 3), *, design=None, method="", rank_gaps=()) -> SimReport:
    """Aggregate per-replicate rank positions into S / Ps / Pa.

    ``positions`` holds, per replicate, either a full 1-based position array
    of length p or a ``ScreenReport``.
    """
    active = [int(j) for j in active]
    rows = []
    for item in positions:
        pos = item.positions() if hasattr(item, "positions") else np.asarray(item)
        if max(active) >= pos.size or min(active) < 0:
            raise DomainError(f"active index out of range for p = {pos.size}")
        rows.append(pos[active])
    act_pos = np.array(rows, dtype=np.int64).reshape(len(rows), len(active))
    S = act_pos.max(axis=1)
    d1 = base_threshold(n)
    thresholds = {f"d{m}": m * d1 for m in multipliers}
    Ps, Pa = {}, {}
    labels = [feature_label(j) for j in active]
    for key, size in thresholds.items():
        inside = act_pos <= size
        Ps[key] = {lab: float(inside[:, k].mean()) for k, lab in enumerate(labels)}
        Pa[key] = float(inside.all(axis=1).mean())
    reps = len(rows)
    return SimReport(
        design=design.to_dict() if design is not None else {},
        method=method,
        active=active,
        thresholds=thresholds,
        S=[int(s) for s in S],
        S_mean=float(S.mean()),
        S_std=float(S.std(ddof=1)) if reps > 1 else None,
        Ps=Ps,
        Pa=Pa,
        active_positions=act_pos.tolist(),
        rank_gaps=[float(g) for g in rank_gaps],
    )


def _run_replicate(design: SimDesign, r: int, methods, table, backend):
    x, y, truth = build_example(design, r)
    out = {}
    for m in methods:
        scores, _ = compute_scores(x, y, m, threads=1, table=table, backend=backend)
        ranking = rank_scores(scores)
        pos = np.empty(design.p, dtype=np.int64)
        pos[ranking] = np.arange(1, design.p + 1)
        gap = rank_gap(scores, truth.active) if len(truth.active) < design.p else float("nan")
        out[m] = (pos, gap)
    return out


def run_simulation(
    design: SimDesign,
    methods=("mrdc",),
    *,
    threads: int = 1,
    table=None,
    backend: str | None = None,
) -> dict:
    """Run every replicate for every method; returns ``{method: SimReport}``.

    Replicates run on a thread pool; results are gathered by replicate index
    so the thread count does not influence the output.
    """
    methods = list(methods)
    for m in methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; choose from {sorted(METHODS)}")
        METHODS[m].check_predictors(design.d)
        if m == "sis" and design.q != 1:
            raise ConfigError(f"method 'sis' needs a univariate response; {design.example} has q = {design.q}")

    def one(r):
        return _run_replicate(design, r, methods, table, backend)

    if threads <= 1:
        results = [one(r) for r in range(design.reps)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(design.reps)))

    reports = {}
    for m in methods:
        reports[m] = evaluate(
            [res[m][0] for res in results],
            design.active,
            design.n,
            design.thresholds,
            design=design,
            method=m,
            rank_gaps=[res[m][1] for res in results],
        )
    return reports


def comparison_table(reports: dict) -> str:
    """Side-by-side S summary followed by each method's Ps/Pa block."""
    names = list(reports)
    head = f"{'':<8}" + "".join(f"{m:>12}" for m in names)
    mean = f"{'S.mean':<8}" + "".join(f"{reports[m].S_mean:>12.2f}" for m in names)
    std = f"{'S.std':<8}" + "".join(
        f"{'NA':>12}" if reports[m].S_std is None else f"{reports[m].S_std:>12.2f}" for m in names
    )
    blocks = [head, mean, std, ""]
    for m in names:
        blocks.append(reports[m].table())
        blocks.append("")
    return "\n".join(blocks).rstrip() + "\n"
