"""Pathwise zero-set statistics of one simulated grid.

The rectangle sum ``S(i,j)`` is the sum of the sign field over
``[1,i] x [1,j]``.  A full ``N x N`` array of sums is never materialized:
:func:`iter_partial_rows` keeps one length-``N`` vector of column sums and
folds in one row of signs at a time, so memory stays ``O(N)`` while every
statistic is accumulated in the same pass.

Bounds that keep int64 safe: ``|S(i,j)| <= i*j <= 2**30`` at the sweep
ceiling, and the crossing test multiplies horizontal neighbors, so
products stay below ``2**60``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .exactprob import CapacityError
from .randfield import RademacherField, StreamKey, signed_binomial_batch

SWEEP_CEILING = 2**15  # largest grid edge the O(N)-memory sweep accepts


@dataclass(frozen=True, eq=False)
class StatBundle:
    """All counters from one sweep of an ``N x N`` grid.

    ``row_profiles[i-1]`` is the number of horizontal sign changes
    (weak: zero counts) in row ``i``; summing it recovers
    ``z_crossings`` exactly.  ``zero_coordinates`` is populated only
    when the sweep was asked to collect them.
    """

    N: int
    gamma: int  # cells with S = 0
    gamma_prime: int  # cells with S = 1
    z_crossings: int  # horizontal pairs with S(i,j) * S(i,j+1) <= 0
    delta: int  # even diagonal cells (2i,2i) with S = 0
    d_antidiag: int  # anti-diagonal cells (i, N-i) with S = 0
    row_profiles: np.ndarray
    max_f: int
    zero_coordinates: tuple[tuple[int, int], ...] | None = None


def iter_partial_rows(field: RademacherField, N: int) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(i, S(i, 1..N))`` for each row; the vector is reused in place.

    Callers that keep a row beyond one iteration must copy it.
    """
    if N < 1:
        raise ValueError(f"grid edge must be >= 1, got {N}")
    if N > SWEEP_CEILING:
        raise CapacityError(f"sweep capped at N={SWEEP_CEILING}, got {N}")
    col = np.zeros(N, dtype=np.int64)
    for i in range(1, N + 1):
        col += np.cumsum(field.row_signs(i, N))
        yield i, col


def sweep_grid(
    field: RademacherField, N: int, *, collect_zeros: bool = False
) -> StatBundle:
    """One pass over the grid, returning every pathwise counter at once."""
    gamma = gamma_prime = z_total = delta = anti = 0
    profiles = np.zeros(N if N >= 1 else 0, dtype=np.int64)
    coords: list[tuple[int, int]] = []
    for i, col in iter_partial_rows(field, N):
        zero_mask = col == 0
        gamma += int(np.count_nonzero(zero_mask))
        gamma_prime += int(np.count_nonzero(col == 1))
        f_i = int(np.count_nonzero(col[:-1] * col[1:] <= 0))
        profiles[i - 1] = f_i
        z_total += f_i
        if i % 2 == 0 and col[i - 1] == 0:
            delta += 1
        if i < N and col[N - i - 1] == 0:
            anti += 1
        if collect_zeros and zero_mask.any():
            coords.extend((i, int(j) + 1) for j in np.nonzero(zero_mask)[0])
    return StatBundle(
        N=N,
        gamma=gamma,
        gamma_prime=gamma_prime,
        z_crossings=z_total,
        delta=delta,
        d_antidiag=anti,
        row_profiles=profiles,
        max_f=int(profiles.max()),
        zero_coordinates=tuple(coords) if collect_zeros else None,
    )


def brute_force_bundle(field: RademacherField, N: int) -> StatBundle:
    """Reference recount via a dense table of sums, pure Python arithmetic.

    Quadratic memory; exists to cross-check :func:`sweep_grid` on small
    grids, not for production sizes.
    """
    if N < 1:
        raise ValueError(f"grid edge must be >= 1, got {N}")
    if N > 256:
        raise CapacityError(f"dense recount capped at N=256, got {N}")
    S = [[0] * (N + 1) for _ in range(N + 1)]
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            S[i][j] = (
                field.value(i, j) + S[i - 1][j] + S[i][j - 1] - S[i - 1][j - 1]
            )
    gamma = sum(S[i][j] == 0 for i in range(1, N + 1) for j in range(1, N + 1))
    gamma_prime = sum(S[i][j] == 1 for i in range(1, N + 1) for j in range(1, N + 1))
    profiles = np.array(
        [
            sum(S[i][j] * S[i][j + 1] <= 0 for j in range(1, N))
            for i in range(1, N + 1)
        ],
        dtype=np.int64,
    )
    delta = sum(S[2 * k][2 * k] == 0 for k in range(1, N // 2 + 1))
    anti = sum(S[i][N - i] == 0 for i in range(1, N))
    coords = tuple(
        (i, j) for i in range(1, N + 1) for j in range(1, N + 1) if S[i][j] == 0
    )
    return StatBundle(
        N=N,
        gamma=gamma,
        gamma_prime=gamma_prime,
        z_crossings=int(profiles.sum()),
        delta=delta,
        d_antidiag=anti,
        row_profiles=profiles,
        max_f=int(profiles.max()),
        zero_coordinates=coords,
    )


def upcrossing_times(values) -> tuple[np.ndarray, np.ndarray]:
    """Indices ``t`` (1-based) where ``values[t-1] * values[t] <= 0``.

    Returns ``(times, zero_flags)``; a flag marks crossings whose product
    is exactly zero (sign ambiguous at the boundary).
    """
    arr = np.asarray(values, dtype=np.int64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("need a nonempty 1-d sequence of values")
    prod = arr[:-1] * arr[1:]
    times = np.nonzero(prod <= 0)[0] + 1
    return times.astype(np.int64), prod[times - 1] == 0


def decomposition_audit(field: RademacherField, N: int) -> tuple[StatBundle, bool]:
    """Sweep a grid and re-derive the crossing decomposition row by row.

    Checks, per row: the crossing count from :func:`upcrossing_times`
    equals the sweep's profile entry, and the zero-touch crossings are
    sandwiched between the row's zeros over ``[1, N-1]`` and twice its
    zeros over ``[1, N]`` (every zero makes at most two of the touching
    products vanish).  Returns the bundle plus the audit verdict.
    """
    bundle = sweep_grid(field, N)
    ok = True
    z_recount = 0
    for i, col in iter_partial_rows(field, N):
        times, flags = upcrossing_times(col)
        z_recount += int(times.size)
        ok &= int(times.size) == int(bundle.row_profiles[i - 1])
        touched = int(flags.sum())
        zeros_interior = int(np.count_nonzero(col[: N - 1] == 0))
        zeros_full = zeros_interior + (1 if col[N - 1] == 0 else 0)
        ok &= zeros_interior <= touched <= 2 * zeros_full
    ok &= z_recount == bundle.z_crossings
    return bundle, bool(ok)


def diag_zero_count(key: StreamKey, N: int) -> int:
    """Zero count on the even diagonal, sampled distribution-only.

    Draws the diagonal increments directly — ``S(2k,2k) - S(2k-2,2k-2)``
    is a signed binomial over the ``8k-4`` fresh cells of the L-shaped
    block — instead of sweeping the whole grid.  Same law as the
    ``delta`` field of :func:`sweep_grid`, NOT pathwise equal to it:
    the draws come from a different stream than the sign field.
    """
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    steps = N // 2
    if steps == 0:
        return 0
    counts = 8 * np.arange(1, steps + 1, dtype=np.int64) - 4
    increments = signed_binomial_batch(key, counts)
    return int(np.count_nonzero(np.cumsum(increments) == 0))


def hitting_set(bundle: StatBundle, alpha: float, beta: float) -> set[int]:
    """Rows ``i <= N**(1-alpha)`` whose crossing count beats ``N**(1/2-beta)``."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must be in (0,1), got {alpha}")
    if not 0 < beta < 0.5:
        raise ValueError(f"beta must be in (0,1/2), got {beta}")
    row_cap = int(bundle.N ** (1.0 - alpha))
    threshold = bundle.N ** (0.5 - beta)
    profiles = bundle.row_profiles
    return {i for i in range(1, min(row_cap, bundle.N) + 1) if profiles[i - 1] > threshold}


def annulus_zero_check(field: RademacherField, eps: float, N: int) -> tuple[bool, int]:
    """Presence and count of zeros on the co-annulus square ``[eps*N, N]^2``."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    lo = math.ceil(eps * N)
    count = 0
    for i, col in iter_partial_rows(field, N):
        if i >= lo:
            count += int(np.count_nonzero(col[lo - 1 :] == 0))
    return count > 0, count


def twin_zero_count(field: RademacherField, eps: float, N: int, radius: int) -> int:
    """Zeros in the wedge ``{eps*i < j < i/eps, 1 < i < N}`` with a companion.

    A companion is any *other* zero of the sum array (wedge membership not
    required) at L1 distance at most ``radius``.  The sweep runs over a
    band of ``radius`` extra rows and columns so companions just outside
    the wedge are seen; memory stays ``O((N + radius) / eps)`` by keeping
    only ``2*radius + 1`` rows of zero positions at a time.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0,1), got {eps}")
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    if N <= 2:
        return 0
    max_wedge_col = math.ceil((N - 1) / eps) - 1
    width = max_wedge_col + radius
    last_row = N - 1 + radius
    zero_rows: dict[int, np.ndarray] = {}

    def has_companion(i: int, j: int) -> bool:
        for r in range(max(1, i - radius), i + radius + 1):
            cols = zero_rows.get(r)
            if cols is None or cols.size == 0:
                continue
            w = radius - abs(r - i)
            hits = int(np.searchsorted(cols, j + w, side="right")) - int(
                np.searchsorted(cols, j - w, side="left")
            )
            if r == i:
                hits -= 1  # the candidate itself always falls in the window
            if hits > 0:
                return True
        return False

    twins = 0
    col = np.zeros(width, dtype=np.int64)
    pending: deque[tuple[int, int]] = deque()  # wedge zeros awaiting the full band
    for i in range(1, last_row + 1):
        col += np.cumsum(field.row_signs(i, width))
        zero_rows[i] = np.nonzero(col == 0)[0].astype(np.int64) + 1
        if 1 < i < N:
            zc = zero_rows[i]
            in_wedge = zc[(zc > eps * i) & (zc < i / eps)]
            pending.extend((i, int(j)) for j in in_wedge)
        while pending and pending[0][0] + radius <= i:
            ci, cj = pending.popleft()
            twins += has_companion(ci, cj)
        zero_rows.pop(i - 2 * radius, None)
    for ci, cj in pending:
        twins += has_companion(ci, cj)
    return twins
