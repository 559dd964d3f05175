"""Command-line front end.

Five subcommands: ``exact`` (closed-form tables), ``simulate`` (Monte
Carlo runs to CSV), ``estimate`` (log-log slope fits of summary means),
``render`` (zero-set images), ``verify`` (the acceptance-check suite).

Exit codes are part of the contract: 0 success, 1 verification failure,
2 usage/validation, 3 capacity, 4 I/O.  All file output is atomic
(temp file + rename), and a run's manifest is written last, so a
manifest's existence certifies complete outputs.  Reals are serialized
with shortest round-trip ``repr``; the ``exact`` tables use 15
significant digits, with exact numerator/denominator available under
``--rational``.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from . import exactprob
from .exactprob import CapacityError
from .mcharness import (
    ExperimentConfig,
    Statistic,
    estimate_exponent,
    run_experiment,
)
from .randfield import RademacherField, Seed, StreamKey
from .walkstats import iter_partial_rows

RENDER_CEILING = 2**13

_STAT_NAMES = {
    "gamma": Statistic.GAMMA,
    "gamma-prime": Statistic.GAMMA_PRIME,
    "z-crossings": Statistic.Z_CROSSINGS,
    "delta": Statistic.DELTA,
    "delta-fast": Statistic.DELTA_FASTPATH,
    "antidiag": Statistic.D_ANTIDIAG,
    "twin-zeros": Statistic.TWIN_ZEROS,
    "annulus": Statistic.ANNULUS,
}

RAW_HEADER = "N,replicate,value"
SUMMARY_HEADER = "N,M,mean,variance,stderr,min,max"


def _fmt15(x: float) -> str:
    return "%.15g" % x


def _atomic_write(path: Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _csv_bytes(header: str, rows) -> bytes:
    out = io.StringIO()
    out.write(header + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerows(rows)
    return out.getvalue().encode("utf-8")


@contextlib.contextmanager
def _directory_lock(outdir: Path):
    # advisory: concurrent runs against one directory would interleave files
    lock = outdir / ".sheetwalk.lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise OSError(
            f"output directory is locked by another run (remove {lock} if stale)"
        ) from None
    try:
        os.close(fd)
        yield
    finally:
        with contextlib.suppress(OSError):
            os.unlink(lock)


@dataclass(frozen=True)
class RunManifest:
    """Provenance record for one CLI run; always the last file written."""

    version: str
    command: str
    config: dict
    seed: int
    workers: int
    started: str
    finished: str
    outputs: list[dict]

    def to_json(self) -> bytes:
        payload = {
            "version": self.version,
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "workers": self.workers,
            "started": self.started,
            "finished": self.finished,
            "outputs": self.outputs,
        }
        return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8")


def _output_entry(path: Path) -> dict:
    data = path.read_bytes()
    return {
        "name": path.name,
        "bytes": len(data),
        "sha256": hashlib.sha256(data).hexdigest(),
    }


@dataclass(frozen=True)
class ZeroSetImage:
    """Grayscale zero-set image: pixel (1,1) top-left, rows in row-major order."""

    n: int
    pixels: bytes  # one byte per cell: 0 zero, 128 negative, 255 positive

    def to_pgm(self) -> bytes:
        return b"P5\n%d %d\n255\n" % (self.n, self.n) + self.pixels


def render_zero_set(field, n: int) -> ZeroSetImage:
    if n < 1:
        raise ValueError(f"image edge must be >= 1, got {n}")
    if n > RENDER_CEILING:
        raise CapacityError(f"render capped at N={RENDER_CEILING}, got {n}")
    buf = bytearray()
    for _, col in iter_partial_rows(field, n):
        row = np.where(col == 0, 0, np.where(col < 0, 128, 255)).astype(np.uint8)
        buf += row.tobytes()
    return ZeroSetImage(n=n, pixels=bytes(buf))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _resolve_workers(flag: int | None) -> int:
    # env overrides the default; an explicit flag wins over both
    if flag is not None:
        if flag < 1:
            raise ValueError(f"workers must be >= 1, got {flag}")
        return flag
    env = os.environ.get("WORKERS")
    if env is not None:
        value = int(env)
        if value < 1:
            raise ValueError(f"WORKERS must be >= 1, got {value}")
        return value
    return os.cpu_count() or 1


# ---------------------------------------------------------------- exact


def cmd_exact(args: argparse.Namespace) -> int:
    target = args.target
    if target == "pn":
        if args.max < 0:
            raise ValueError(f"--max must be >= 0, got {args.max}")
        rows = []
        for n in range(args.max + 1):
            value = exactprob.p_exact(n)
            rows.append(
                (n, f"{value.numerator}/{value.denominator}")
                if args.rational
                else (n, _fmt15(float(value)))
            )
        body = _csv_bytes("n,p", rows)
    elif target == "delta-mean":
        mean = exactprob.delta_mean_exact(args.n)
        centered = exactprob.delta_mean_exact(args.n, centered=True)
        body = _csv_bytes(
            "N,mean,centered", [(args.n, _fmt15(mean), _fmt15(centered))]
        )
    elif target == "delta-var":
        var = exactprob.delta_var_exact(args.n)
        centered = var - exactprob.DIAG_LOG_COEFF * math.log(args.n)
        body = _csv_bytes(
            "N,variance,centered", [(args.n, _fmt15(var), _fmt15(centered))]
        )
    elif target == "gamma-mean":
        mean = exactprob.gamma_mean_exact(args.n)
        centered = exactprob.gamma_mean_exact(args.n, centered=True)
        body = _csv_bytes(
            "N,mean,centered", [(args.n, _fmt15(mean), _fmt15(centered))]
        )
    elif target == "antidiag-mean":
        mean = exactprob.antidiag_mean_exact(args.n)
        centered = mean - math.sqrt(math.pi / 2)  # gap to the limiting constant
        body = _csv_bytes(
            "N,mean,centered", [(args.n, _fmt15(mean), _fmt15(centered))]
        )
    else:  # hit-constant
        estimate = exactprob.hit_constant_estimate(args.n)
        body = _csv_bytes("n_max,estimate", [(args.n, _fmt15(estimate))])
    if args.out:
        _atomic_write(Path(args.out), body)
    else:
        sys.stdout.write(body.decode("utf-8"))
    return 0


# ------------------------------------------------------------- simulate


def cmd_simulate(args: argparse.Namespace) -> int:
    sizes = tuple(int(part) for part in args.sizes.split(","))
    workers = _resolve_workers(args.workers)
    config = ExperimentConfig(
        statistic=_STAT_NAMES[args.stat],
        sizes=sizes,
        replicates=args.reps,
        seed=Seed(args.seed),
        workers=workers,
        eps=args.eps,
        radius=args.radius,
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    started = _now()
    with _directory_lock(outdir):
        result = run_experiment(config)
        raw_rows = [
            (n, r, repr(float(result.values[n][r])))
            for n in sizes
            for r in range(config.replicates)
        ]
        raw_path = outdir / "raw.csv"
        _atomic_write(raw_path, _csv_bytes(RAW_HEADER, raw_rows))
        summary_rows = []
        for n in sizes:
            s = result.summaries[n]
            summary_rows.append(
                (
                    n,
                    s.count,
                    repr(s.mean),
                    repr(s.variance),
                    repr(s.stderr),
                    repr(s.minimum),
                    repr(s.maximum),
                )
            )
        summary_path = outdir / "summary.csv"
        _atomic_write(summary_path, _csv_bytes(SUMMARY_HEADER, summary_rows))
        manifest = RunManifest(
            version=__version__,
            command="simulate",
            config={
                "statistic": args.stat,
                "sizes": list(sizes),
                "replicates": config.replicates,
                "eps": config.eps,
                "radius": config.radius,
            },
            seed=int(config.seed),
            workers=workers,
            started=started,
            finished=_now(),
            outputs=[_output_entry(raw_path), _output_entry(summary_path)],
        )
        _atomic_write(outdir / "manifest.json", manifest.to_json())
    return 0


# ------------------------------------------------------------- estimate


def cmd_estimate(args: argparse.Namespace) -> int:
    path = Path(args.summary)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != SUMMARY_HEADER.split(","):
            raise ValueError(
                f"{path}: expected header {SUMMARY_HEADER!r}, got {header}"
            )
        rows = [(int(row[0]), float(row[2])) for row in reader]
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two summary rows, got {len(rows)}")
    sizes = np.array([n for n, _ in rows], dtype=np.float64)
    means = np.array([m for _, m in rows], dtype=np.float64)
    fit = estimate_exponent(sizes, means, drop_below=args.drop_below)
    keep = [i for i, n in enumerate(sizes) if int(n) in fit.points_used]
    residuals = []
    for i in keep:
        log_mean = math.log(means[i])
        fitted = fit.intercept + fit.slope * math.log(sizes[i])
        residuals.append(
            {
                "N": int(sizes[i]),
                "log_mean": log_mean,
                "fitted": fitted,
                "residual": log_mean - fitted,
            }
        )
    report = {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "stderr": fit.stderr,
        "points_used": list(fit.points_used),
        "residuals": residuals,
    }
    body = (json.dumps(report, indent=2, sort_keys=True) + "\n").encode("utf-8")
    if args.out:
        _atomic_write(Path(args.out), body)
    else:
        sys.stdout.write(body.decode("utf-8"))
    return 0


# --------------------------------------------------------------- render


def cmd_render(args: argparse.Namespace) -> int:
    field = RademacherField(StreamKey(Seed(args.seed), 0))
    image = render_zero_set(field, args.n)
    _atomic_write(Path(args.out), image.to_pgm())
    return 0


# --------------------------------------------------------------- verify


def cmd_verify(args: argparse.Namespace) -> int:
    from . import checks

    workers = _resolve_workers(args.workers)
    results = checks.run_checks(level=args.level, workers=workers)
    sys.stdout.write(checks.format_report(results, level=args.level))
    if args.out:
        payload = {
            "level": args.level,
            "passed": all(r.passed for r in results),
            "checks": [
                {
                    "name": r.name,
                    "passed": r.passed,
                    "seconds": round(r.seconds, 3),
                    "detail": r.detail,
                }
                for r in results
            ],
        }
        _atomic_write(
            Path(args.out),
            (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode("utf-8"),
        )
    return 0 if all(r.passed for r in results) else 1


# ----------------------------------------------------------------- main


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sheetwalk",
        description="Simulate two-parameter sign surfaces and check their "
        "zero-set statistics against exact closed forms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_exact = sub.add_parser("exact", help="print closed-form tables as CSV")
    exact_sub = p_exact.add_subparsers(dest="target", required=True)
    p_pn = exact_sub.add_parser("pn", help="return probabilities p(0..max)")
    p_pn.add_argument("--max", type=int, required=True)
    p_pn.add_argument(
        "--rational", action="store_true", help="exact numerator/denominator column"
    )
    p_pn.add_argument("--out")
    for name, helptext in [
        ("delta-mean", "expected diagonal zero count"),
        ("delta-var", "variance of the diagonal zero count"),
        ("gamma-mean", "expected grid zero count"),
        ("antidiag-mean", "expected anti-diagonal zero count"),
        ("hit-constant", "conditional hitting-probability floor"),
    ]:
        p_t = exact_sub.add_parser(name, help=helptext)
        p_t.add_argument("--n", type=int, required=True)
        p_t.add_argument("--out")

    p_sim = sub.add_parser("simulate", help="Monte Carlo experiment to CSV files")
    p_sim.add_argument("--stat", choices=sorted(_STAT_NAMES), required=True)
    p_sim.add_argument("--sizes", required=True, help="comma-separated grid edges")
    p_sim.add_argument("--reps", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--workers", type=int, default=None)
    p_sim.add_argument("--eps", type=float, default=0.25)
    p_sim.add_argument("--radius", type=int, default=8)
    p_sim.add_argument("--out", default=".", help="output directory")

    p_est = sub.add_parser("estimate", help="log-log slope fit of summary means")
    p_est.add_argument("--summary", required=True, help="summary CSV from simulate")
    p_est.add_argument("--drop-below", type=int, default=None)
    p_est.add_argument("--out")

    p_rend = sub.add_parser("render", help="zero-set image as binary PGM")
    p_rend.add_argument("--seed", type=int, default=0)
    p_rend.add_argument("--n", type=int, required=True)
    p_rend.add_argument("--out", required=True)

    p_ver = sub.add_parser("verify", help="run the acceptance-check suite")
    p_ver.add_argument("--level", choices=("quick", "full"), default="quick")
    p_ver.add_argument("--workers", type=int, default=None)
    p_ver.add_argument("--out", help="also write a JSON report")

    return parser


_DISPATCH = {
    "exact": cmd_exact,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "render": cmd_render,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except CapacityError as exc:
        print(f"sheetwalk: capacity: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError) as exc:
        print(f"sheetwalk: invalid input: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"sheetwalk: i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
