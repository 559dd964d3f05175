"""The acceptance-check suite behind ``sheetwalk verify``.

Thirteen checks, each a literal assertion about the package's exact
values, Monte Carlo output, or file-level determinism.  ``full`` runs
every check at its committed size; ``quick`` shrinks the expensive grids
for a sub-minute smoke pass.  Results are reported honestly: a check
that measures a violated bound FAILS and says what it measured — three
bounds in this suite are unattainable as committed (the README's
verification section carries the analysis) and stay red by design.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np

from . import exactprob
from .exactprob import (
    DIAG_LOG_COEFF,
    antidiag_mean_exact,
    delta_mean_exact,
    delta_var_exact,
    gamma_mean_exact,
    hit_constant_estimate,
    p_exact,
    p_float,
    p_float_vec,
)
from .mcharness import (
    ExperimentConfig,
    Statistic,
    delta_log_law_report,
    estimate_exponent,
    run_experiment,
)
from .randfield import RademacherField, Seed, StreamKey
from .walkstats import (
    annulus_zero_check,
    brute_force_bundle,
    decomposition_audit,
    sweep_grid,
    twin_zero_count,
)


@dataclass(frozen=True)
class CheckResult:
    index: int
    name: str
    passed: bool
    seconds: float
    detail: str


# --------------------------------------------------------------- check 1


def _rebuild_dyadic(limit: int) -> tuple[list[tuple[int, int]], np.ndarray]:
    # reimplements the ratio recurrence with its own odd-part bookkeeping
    num, exp = 1, 0
    pairs = [(1, 0)]
    floats = np.empty(limit + 1)
    floats[0] = 1.0
    for n in range(limit):
        num *= 2 * n + 1
        m = n + 1
        exp += 1
        while m % 2 == 0:
            m //= 2
            exp += 1
        num //= m
        pairs.append((num, exp))
        floats[n + 1] = num / (1 << exp)
    return pairs, floats


def _check_return_probability(level: str, workers: int) -> tuple[bool, str]:
    limit = exactprob.EXACT_CEILING if level == "full" else 2000
    ident_limit = 1000 if level == "full" else 200
    pairs, floats = _rebuild_dyadic(limit)
    table = exactprob._table()
    same_pairs = pairs == list(table.exact_values[: limit + 1])
    got = np.array([p_float(n) for n in range(limit + 1)])
    rel = np.abs(got - floats) / floats
    max_rel = float(rel.max())
    samples = list(range(51)) + [509, 997, limit]
    closed_ok = all(
        p_exact(n) == Fraction(math.comb(2 * n, n), 4**n) for n in samples
    )
    ident_ok = all(
        p_exact(n + 1) * (2 * n + 2) == p_exact(n) * (2 * n + 1)
        for n in range(ident_limit)
    )
    ok = same_pairs and closed_ok and ident_ok and max_rel <= 1e-12
    return ok, (
        f"rebuilt table to n={limit}: max rel err {max_rel:.1e}, "
        f"closed form ok={closed_ok}, rational recurrence identity to "
        f"n={ident_limit} ok={ident_ok}"
    )


# --------------------------------------------------------------- check 2


def _check_wallis_envelope(level: str, workers: int) -> tuple[bool, str]:
    limit = 10_000 if level == "full" else 2000
    n = np.arange(1, limit + 1, dtype=np.int64)
    defect = p_float_vec(n) * np.sqrt(np.pi * n) - (1.0 - 1.0 / (8.0 * n))
    scaled = defect * n.astype(np.float64) ** 2
    ok = bool((defect >= 0).all() and (scaled <= 0.012).all())
    worst = int(n[scaled.argmax()])
    return ok, (
        f"0 <= defect <= 0.012/n^2 on [1,{limit}]: "
        f"max n^2*defect {scaled.max():.8f} at n={worst}, min defect {defect.min():.2e}"
    )


# --------------------------------------------------------------- check 3


def _check_difference_window(level: str, workers: int) -> tuple[bool, str]:
    mono_limit = 1_000_000 if level == "full" else 100_000
    window_hi = 10_000 if level == "full" else 2000
    values = p_float_vec(np.arange(mono_limit + 2, dtype=np.int64))
    decreasing = bool((np.diff(values) < 0).all())
    n = np.arange(100, window_hi + 1, dtype=np.int64)
    x = n.astype(np.float64)
    scaled = x**1.5 * p_float_vec(n) / (2.0 * x + 2.0)
    lo, hi = float(scaled.min()), float(scaled.max())
    in_band = 0.2790 <= lo and hi <= 0.2825
    ok = decreasing and in_band
    detail = (
        f"strictly decreasing to n={mono_limit}: {decreasing}; scaled difference "
        f"on [100,{window_hi}] in [{lo:.10f}, {hi:.10f}] vs [0.2790, 0.2825]"
    )
    if not in_band:
        detail += (
            f"; min sits at n={int(n[scaled.argmin()])} — the committed lower "
            "edge is above the true minimum (band holds from n=102); see README"
        )
    return ok, detail


# --------------------------------------------------------------- check 4


def _check_diagonal_mean_law(level: str, workers: int) -> tuple[bool, str]:
    if level == "full":
        chain = [100 * 2**k for k in range(10)]  # 100 .. 51200
        ratio_at = 10**6
    else:
        chain = [100 * 2**k for k in range(5)]
        ratio_at = 10**5
    centered = {n: delta_mean_exact(n, centered=True) for n in chain}
    centered.update(
        (2 * n, delta_mean_exact(2 * n, centered=True)) for n in chain
    )
    gaps = [abs(centered[2 * n] - centered[n]) for n in chain]
    ratio = delta_mean_exact(ratio_at) / math.log(ratio_at)
    ok = max(gaps) <= 0.01 and 0.34 <= ratio <= 0.46
    return ok, (
        f"doubling gaps of the centered mean on {chain[0]}..{chain[-1]}: "
        f"max {max(gaps):.6f} (<= 0.01); mean/ln at {ratio_at:.0e}: {ratio:.6f} "
        "in [0.34, 0.46]"
    )


# --------------------------------------------------------------- check 5


def _check_diagonal_variance_band(level: str, workers: int) -> tuple[bool, str]:
    sizes = (10, 100, 1000, 2000) if level == "full" else (10, 100, 1000)
    gaps = {
        n: abs(delta_var_exact(n) - DIAG_LOG_COEFF * math.log(n)) for n in sizes
    }
    worst_n = max(gaps, key=gaps.get)
    ok = all(g <= 0.5 for g in gaps.values())
    detail = "|variance - ln-law| at " + ", ".join(
        f"N={n}: {gaps[n]:.4f}" for n in sizes
    )
    if not ok:
        detail += (
            f" — exceeds the committed 0.5 at N={worst_n}; the exact variance "
            "grows like 0.61*ln N, so no constant-offset band of width 0.5 can "
            "hold (see README)"
        )
    return ok, detail


# --------------------------------------------------------------- check 6


def _check_fastpath_consistency(level: str, workers: int) -> tuple[bool, str]:
    points, reps = (10_000, 2000) if level == "full" else (2000, 500)
    (row,) = delta_log_law_report(
        [points], replicates=reps, seed=Seed(11), workers=workers
    )
    z = (row.mc_mean - row.exact_mean) / row.mc_stderr
    ok = abs(z) <= 4.0
    return ok, (
        f"diagonal fast path, {points} points x {reps} replicates: "
        f"mc {row.mc_mean:.4f} vs exact {row.exact_mean:.4f}, z = {z:+.3f}"
    )


# --------------------------------------------------------------- check 7


def _check_zero_count_scaling(level: str, workers: int) -> tuple[bool, str]:
    sizes = tuple(2**k for k in range(6, 11))
    fit = estimate_exponent(sizes, [gamma_mean_exact(n) for n in sizes])
    reps = 50 if level == "full" else 12
    result = run_experiment(
        ExperimentConfig(
            statistic=Statistic.GAMMA,
            sizes=(1024,),
            replicates=reps,
            seed=Seed(2),
            workers=workers,
        )
    )
    ratio = result.summaries[1024].mean / gamma_mean_exact(1024)
    slope_ok = 0.97 <= fit.slope <= 1.03
    mc_ok = abs(ratio - 1.0) <= 0.10
    detail = (
        f"exact-mean slope over 64..1024: {fit.slope:.4f} vs [0.97, 1.03]; "
        f"Monte Carlo mean / exact at N=1024 (M={reps}): {ratio:.4f}"
    )
    if not slope_ok:
        detail += (
            " — slope misses the band: the mean carries a -c*sqrt(N) boundary "
            "term that inflates pre-asymptotic slopes (see README)"
        )
    return slope_ok and mc_ok, detail


# --------------------------------------------------------------- check 8


def _full_crossing_config(level: str, workers: int) -> ExperimentConfig:
    if level == "full":
        return ExperimentConfig(
            statistic=Statistic.Z_CROSSINGS,
            sizes=(128, 256, 512, 1024),
            replicates=200,
            seed=Seed(1),
            workers=workers,
        )
    return ExperimentConfig(
        statistic=Statistic.Z_CROSSINGS,
        sizes=(64, 128, 256, 512),
        replicates=60,
        seed=Seed(1),
        workers=workers,
    )


def _check_crossing_count_scaling(level: str, workers: int) -> tuple[bool, str]:
    config = _full_crossing_config(level, workers)
    result = run_experiment(config)
    means = [result.summaries[n].mean for n in config.sizes]
    fit = estimate_exponent(config.sizes, means)
    ok = 1.40 <= fit.slope <= 1.60
    return ok, (
        f"crossing-count slope over {config.sizes[0]}..{config.sizes[-1]} "
        f"(M={config.replicates}, seed 1): {fit.slope:.4f} vs [1.40, 1.60]"
    )


# --------------------------------------------------------------- check 9


def _check_crossing_decomposition(level: str, workers: int) -> tuple[bool, str]:
    # audits exactly the grids simulated by checks 7 and 8
    grids = 0
    ok = True
    gamma_reps = 50 if level == "full" else 12
    for r in range(gamma_reps):
        _, good = decomposition_audit(
            RademacherField(StreamKey(Seed(2), r)), 1024
        )
        ok &= good
        grids += 1
    config = _full_crossing_config(level, workers)
    for r in range(config.replicates):
        field = RademacherField(StreamKey(config.seed, r))
        for n in config.sizes:
            _, good = decomposition_audit(field, n)
            ok &= good
            grids += 1
    return bool(ok), (
        f"crossing total equals profile sum and zero-touch counts are "
        f"sandwiched by row zeros on all {grids} grids"
    )


# -------------------------------------------------------------- check 10


def _recount_twins(field, eps: float, N: int, radius: int) -> int:
    # dense quadratic recount over the extended band; no shared code with
    # the rolling-window implementation
    rows = N - 1 + radius
    cols = math.ceil((N - 1) / eps) - 1 + radius
    extent = max(rows, cols)
    zeros = set()
    col = np.zeros(extent, dtype=np.int64)
    for i in range(1, extent + 1):
        col += np.cumsum(field.row_signs(i, extent))
        zeros.update((i, int(j) + 1) for j in np.nonzero(col == 0)[0])
    count = 0
    for zi, zj in zeros:
        if not (1 < zi < N and eps * zi < zj < zi / eps):
            continue
        count += any(
            (oi, oj) != (zi, zj) and abs(oi - zi) + abs(oj - zj) <= radius
            for oi, oj in zeros
        )
    return count


def _check_oracle_equivalence(level: str, workers: int) -> tuple[bool, str]:
    seeds = 50 if level == "full" else 12
    sizes = (5, 8, 12, 17, 24)
    ok = True
    for seed in range(seeds):
        n = sizes[seed % len(sizes)]
        field = RademacherField(StreamKey(Seed(seed), 0))
        a = sweep_grid(field, n, collect_zeros=True)
        b = brute_force_bundle(field, n)
        ok &= (
            a.gamma == b.gamma
            and a.gamma_prime == b.gamma_prime
            and a.z_crossings == b.z_crossings
            and a.delta == b.delta
            and a.d_antidiag == b.d_antidiag
            and a.row_profiles.tolist() == b.row_profiles.tolist()
            and a.zero_coordinates == b.zero_coordinates
        )
        ok &= twin_zero_count(field, 0.5, n, 3) == _recount_twins(field, 0.5, n, 3)
        lo = math.ceil(0.5 * n)
        dense_annulus = sum(
            1 for (i, j) in b.zero_coordinates if i >= lo and j >= lo
        )
        ok &= annulus_zero_check(field, 0.5, n) == (dense_annulus > 0, dense_annulus)
    return bool(ok), (
        f"sweep counters, twin zeros (radius 3) and annulus counts (eps 0.5) "
        f"match dense recounts for {seeds} seeds at N in {sizes}"
    )


# -------------------------------------------------------------- check 11


def _check_antidiagonal_constant(level: str, workers: int) -> tuple[bool, str]:
    # the anti-diagonal mean stays bounded: ~N/2 admissible cells, each ~c/N
    ms = (250, 500, 1000, 2000) if level == "full" else (250, 500, 1000)
    values = [antidiag_mean_exact(2 * m) for m in ms]
    gaps = [abs(b - a) for a, b in zip(values, values[1:])]
    cauchy_ok = all(g <= 0.01 for g in gaps)
    last = values[-1]
    low, high = math.sqrt(math.pi / 8), math.sqrt(math.pi / 2)
    verdicts = []
    if abs(last - low) <= 0.02:
        verdicts.append(f"matches sqrt(pi/8)={low:.4f}")
    if abs(last - high) <= 0.02:
        verdicts.append(f"matches sqrt(pi/2)={high:.4f}")
    which = "; ".join(verdicts) if verdicts else (
        f"matches neither sqrt(pi/8)={low:.4f} nor sqrt(pi/2)={high:.4f} "
        f"within 0.02 (closest: sqrt(pi/2), gap {abs(last - high):.4f}; "
        "the sequence is still converging toward it)"
    )
    detail = (
        f"exact mean at half-sizes {ms}: last {last:.6f}, successive gaps "
        + ", ".join(f"{g:.4f}" for g in gaps)
        + f" vs <= 0.01; {which}"
    )
    if not cauchy_ok:
        detail += " — gaps shrink like 1/sqrt(M), too slowly for the committed 0.01 (see README)"
    return cauchy_ok, detail


# -------------------------------------------------------------- check 12


def _check_hitting_floor(level: str, workers: int) -> tuple[bool, str]:
    estimate = hit_constant_estimate(200)
    ok = estimate >= 0.5
    return ok, f"hit_constant_estimate(200) = {estimate:.6f} >= 0.5"


# -------------------------------------------------------------- check 13


def _check_determinism(level: str, workers: int) -> tuple[bool, str]:
    from . import cli  # deferred: cli imports this module for cmd_verify

    worker_counts = (1, 2, 8) if level == "full" else (1, 2)
    render_n = 256 if level == "full" else 128
    raws = []
    ok = True
    with TemporaryDirectory() as tmp:
        for w in worker_counts:
            outdir = Path(tmp) / f"w{w}"
            code = cli.main(
                [
                    "simulate",
                    "--stat",
                    "z-crossings",
                    "--sizes",
                    "32,64",
                    "--reps",
                    "24",
                    "--seed",
                    "7",
                    "--workers",
                    str(w),
                    "--out",
                    str(outdir),
                ]
            )
            ok &= code == 0
            raws.append((outdir / "raw.csv").read_bytes())
        ok &= all(raw == raws[0] for raw in raws)
        images = []
        for run in ("a", "b"):
            target = Path(tmp) / f"{run}.pgm"
            code = cli.main(
                ["render", "--seed", "7", "--n", str(render_n), "--out", str(target)]
            )
            ok &= code == 0
            images.append(target.read_bytes())
        ok &= images[0] == images[1]
    return bool(ok), (
        f"raw CSV identical across workers {worker_counts}; "
        f"render(seed 7, N={render_n}) identical across two runs"
    )


_CHECKS = (
    ("return-probability", _check_return_probability),
    ("wallis-envelope", _check_wallis_envelope),
    ("difference-window", _check_difference_window),
    ("diagonal-mean-log-law", _check_diagonal_mean_law),
    ("diagonal-variance-band", _check_diagonal_variance_band),
    ("fastpath-consistency", _check_fastpath_consistency),
    ("zero-count-scaling", _check_zero_count_scaling),
    ("crossing-count-scaling", _check_crossing_count_scaling),
    ("crossing-decomposition", _check_crossing_decomposition),
    ("oracle-equivalence", _check_oracle_equivalence),
    ("antidiagonal-constant", _check_antidiagonal_constant),
    ("hitting-floor", _check_hitting_floor),
    ("determinism", _check_determinism),
)

#: Checks that measure bounds known to be unattainable as committed; they
#: stay red on a correct build.  Kept failing on purpose — see README.
EXPECTED_RED = frozenset(
    {
        "difference-window",
        "diagonal-variance-band",
        "zero-count-scaling",
        "antidiagonal-constant",
    }
)


def check_names() -> tuple[str, ...]:
    return tuple(name for name, _ in _CHECKS)


def run_checks(
    level: str = "full", workers: int = 1, names: set[str] | None = None
) -> list[CheckResult]:
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    results = []
    for index, (name, func) in enumerate(_CHECKS, start=1):
        if names is not None and name not in names:
            continue
        start = time.perf_counter()
        try:
            passed, detail = func(level, workers)
        except Exception as exc:  # a crashed check is a failed check
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(
            CheckResult(
                index=index,
                name=name,
                passed=passed,
                seconds=time.perf_counter() - start,
                detail=detail,
            )
        )
    return results


def format_report(results: list[CheckResult], level: str) -> str:
    lines = [f"sheetwalk verification — level={level}"]
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(
            f"[{r.index:2d}/13] {status} {r.name:<{width}}  "
            f"({r.seconds:6.2f}s)  {r.detail}"
        )
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    failed_expected = [r.name for r in results if not r.passed and r.name in EXPECTED_RED]
    if failed_expected:
        lines.append(
            "expected-red checks (committed bounds shown unattainable; "
            "README has the analysis): " + ", ".join(failed_expected)
        )
    return "\n".join(lines) + "\n"
