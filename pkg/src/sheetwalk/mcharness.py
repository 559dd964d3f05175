"""Deterministic Monte Carlo harness over the grid statistics.

Replicate ``r`` of an experiment always simulates stream
``StreamKey(seed, r)``, and worker ``r mod W`` owns it under a static
partition, so the full set of simulated values — and every float reduced
from them, since aggregation happens in replicate order after the pool
returns — is byte-identical for any worker count.  Raw per-replicate
values are retained, not just summaries.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .exactprob import DIAG_LOG_COEFF, delta_mean_exact
from .randfield import RademacherField, Seed, StreamKey
from .walkstats import annulus_zero_check, diag_zero_count, sweep_grid, twin_zero_count


class Statistic(enum.Enum):
    """Per-grid statistics the harness can sample."""

    GAMMA = "gamma"
    GAMMA_PRIME = "gamma_prime"
    Z_CROSSINGS = "z_crossings"
    DELTA = "delta"
    DELTA_FASTPATH = "delta_fastpath"
    D_ANTIDIAG = "d_antidiag"
    TWIN_ZEROS = "twin_zeros"
    ANNULUS = "annulus"


_BUNDLE_FIELDS = {
    Statistic.GAMMA,
    Statistic.GAMMA_PRIME,
    Statistic.Z_CROSSINGS,
    Statistic.DELTA,
    Statistic.D_ANTIDIAG,
}


@dataclass(frozen=True)
class ExperimentConfig:
    statistic: Statistic
    sizes: tuple[int, ...]
    replicates: int
    seed: Seed
    workers: int = 1
    eps: float = 0.25  # wedge/annulus aperture where the statistic needs one
    radius: int = 8  # companion distance for twin-zero counting

    def __post_init__(self) -> None:
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "seed", Seed(self.seed))
        if not self.sizes:
            raise ValueError("need at least one grid size")
        if any(n < 1 for n in self.sizes):
            raise ValueError(f"grid sizes must be >= 1, got {self.sizes}")
        if self.replicates < 1:
            raise ValueError(f"replicates must be >= 1, got {self.replicates}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")


@dataclass(frozen=True)
class SummaryStats:
    count: int
    mean: float
    variance: float  # sample variance (ddof=1); 0 for a single replicate
    stderr: float  # sqrt(variance / count)
    minimum: float
    maximum: float


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    values: dict[int, np.ndarray]  # size -> per-replicate values, replicate order
    summaries: dict[int, SummaryStats] = dataclass_field(default_factory=dict)


def summarize(values: np.ndarray) -> SummaryStats:
    values = np.asarray(values, dtype=np.float64)
    if values.size < 1:
        raise ValueError("cannot summarize an empty sample")
    variance = float(np.var(values, ddof=1)) if values.size > 1 else 0.0
    return SummaryStats(
        count=int(values.size),
        mean=float(values.mean()),
        variance=variance,
        stderr=math.sqrt(variance / values.size),
        minimum=float(values.min()),
        maximum=float(values.max()),
    )


def _evaluate(config: ExperimentConfig, replicate: int, size: int) -> float:
    key = StreamKey(config.seed, replicate)
    stat = config.statistic
    if stat is Statistic.DELTA_FASTPATH:
        return float(diag_zero_count(key, size))
    field = RademacherField(key)
    if stat is Statistic.TWIN_ZEROS:
        return float(twin_zero_count(field, config.eps, size, config.radius))
    if stat is Statistic.ANNULUS:
        return float(annulus_zero_check(field, config.eps, size)[1])
    bundle = sweep_grid(field, size)
    return float(getattr(bundle, stat.value))


def _worker_chunk(args: tuple[ExperimentConfig, int]) -> list[tuple[int, int, float]]:
    config, worker_index = args
    out = []
    for r in range(worker_index, config.replicates, config.workers):
        for size in config.sizes:
            out.append((size, r, _evaluate(config, r, size)))
    return out


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Simulate every (size, replicate) cell of the experiment grid.

    The outcome is a pure function of ``(statistic, sizes, replicates,
    seed, eps, radius)`` — the worker count only changes wall time.
    """
    if config.workers == 1:
        chunks = [_worker_chunk((config, 0))]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            chunks = list(
                pool.map(_worker_chunk, [(config, w) for w in range(config.workers)])
            )
    values = {
        size: np.empty(config.replicates, dtype=np.float64) for size in config.sizes
    }
    for chunk in chunks:
        for size, r, value in chunk:
            values[size][r] = value
    summaries = {size: summarize(vals) for size, vals in values.items()}
    return ExperimentResult(config=config, values=values, summaries=summaries)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr: float  # OLS slope standard error; 0 when the fit is exact
    points_used: tuple[int, ...]


def estimate_exponent(
    sizes, means, *, drop_below: int | None = None
) -> SlopeFit:
    """Least-squares slope of ``log mean`` against ``log size``.

    Nonpositive means cannot enter a log fit; they are dropped with a
    warning.  ``drop_below`` additionally excludes sizes under a floor
    (small-size transients).  Fewer than two surviving points is an error.
    """
    sizes = np.asarray(sizes, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    if sizes.shape != means.shape or sizes.ndim != 1:
        raise ValueError("sizes and means must be 1-d and the same length")
    keep = np.ones(sizes.size, dtype=bool)
    if drop_below is not None:
        keep &= sizes >= drop_below
    bad = keep & (means <= 0)
    if bad.any():
        warnings.warn(
            f"excluding {int(bad.sum())} nonpositive mean(s) from the log fit",
            stacklevel=2,
        )
        keep &= means > 0
    if keep.sum() < 2:
        raise ValueError("need at least two positive points to fit a slope")
    x = np.log(sizes[keep])
    y = np.log(means[keep])
    dx = x - x.mean()
    sxx = float(dx @ dx)
    slope = float(dx @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = x.size - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    return SlopeFit(
        slope=slope,
        intercept=intercept,
        stderr=math.sqrt(s2 / sxx),
        points_used=tuple(int(n) for n in sizes[keep]),
    )


@dataclass(frozen=True)
class DeviationRow:
    size: int
    mc_mean: float
    exact_mean: float
    stderr: float
    z_score: float  # inf when the Monte Carlo spread degenerates to zero
    degenerate: bool


def compare_to_exact(
    summaries: dict[int, SummaryStats], exact: dict[int, float]
) -> list[DeviationRow]:
    """Z-scores of Monte Carlo means against exact expectations.

    Requires two replicates minimum (otherwise no spread estimate
    exists).  A zero standard error yields an infinite sentinel z-score
    with the row flagged degenerate rather than a crash or a silent pass.
    """
    rows = []
    for size in sorted(exact):
        if size not in summaries:
            raise ValueError(f"no Monte Carlo summary for size {size}")
        s = summaries[size]
        if s.count < 2:
            raise ValueError(f"size {size}: need >= 2 replicates, got {s.count}")
        gap = s.mean - exact[size]
        degenerate = s.stderr == 0.0
        if degenerate:
            z = math.inf if gap != 0 else 0.0
        else:
            z = gap / s.stderr
        rows.append(
            DeviationRow(
                size=size,
                mc_mean=s.mean,
                exact_mean=exact[size],
                stderr=s.stderr,
                z_score=z,
                degenerate=degenerate,
            )
        )
    return rows


@dataclass(frozen=True)
class LogLawRow:
    size: int
    exact_mean: float
    prediction: float  # ln(size) / sqrt(2 pi)
    ratio: float  # exact_mean / prediction
    mc_mean: float | None = None
    mc_stderr: float | None = None


def delta_log_law_report(
    sizes,
    *,
    replicates: int = 0,
    seed: Seed | int = 0,
    workers: int = 1,
) -> list[LogLawRow]:
    """Tabulate the diagonal zero count against its logarithmic law.

    Sizes count *diagonal points*: row ``n`` covers the even diagonal out
    to ``(2n, 2n)``, i.e. a simulated grid of edge ``2n``.  Pure
    reporting — one row per size with the exact mean, the
    ``ln n / sqrt(2 pi)`` prediction and their ratio, plus Monte Carlo
    columns (via the distribution-level fast path) when ``replicates``
    is positive.  No row is asserted here; judgments belong to callers.
    """
    sizes = tuple(int(n) for n in sizes)
    if not sizes or any(n < 2 for n in sizes):
        raise ValueError(f"sizes must all be >= 2, got {sizes}")
    mc: dict[int, SummaryStats] = {}
    if replicates:
        result = run_experiment(
            ExperimentConfig(
                statistic=Statistic.DELTA_FASTPATH,
                sizes=tuple(2 * n for n in sizes),  # grid edge = 2 * points
                replicates=replicates,
                seed=Seed(seed),
                workers=workers,
            )
        )
        mc = {n: result.summaries[2 * n] for n in sizes}
    rows = []
    for n in sizes:
        exact = delta_mean_exact(n)
        prediction = DIAG_LOG_COEFF * math.log(n)
        rows.append(
            LogLawRow(
                size=n,
                exact_mean=exact,
                prediction=prediction,
                ratio=exact / prediction,
                mc_mean=mc[n].mean if mc else None,
                mc_stderr=mc[n].stderr if mc else None,
            )
        )
    return rows
