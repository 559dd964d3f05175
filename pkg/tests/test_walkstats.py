import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sheetwalk.exactprob import CapacityError
from sheetwalk.randfield import RademacherField, Seed, StreamKey
from sheetwalk.walkstats import (
    SWEEP_CEILING,
    annulus_zero_check,
    brute_force_bundle,
    decomposition_audit,
    diag_zero_count,
    hitting_set,
    iter_partial_rows,
    sweep_grid,
    twin_zero_count,
    upcrossing_times,
)


class ConstantField:
    """Stub: every sign +1, so S(i,j) = i*j."""

    def value(self, i, j):
        return 1

    def row_signs(self, i, count):
        return np.ones(count, dtype=np.int64)


class AlternatingColumnsField:
    """Stub: +1 on odd columns, -1 on even, so S(i,j) = i*(j mod 2)."""

    def value(self, i, j):
        return 1 if j % 2 else -1

    def row_signs(self, i, count):
        signs = np.ones(count, dtype=np.int64)
        signs[1::2] = -1
        return signs


def field(seed=1, replicate=0):
    return RademacherField(StreamKey(Seed(seed), replicate))


class TestSweepFrozenExamples:
    def test_all_plus_grid_has_no_zeros_and_one_unit_cell(self):
        b = sweep_grid(ConstantField(), 5)
        assert b.gamma == 0
        assert b.gamma_prime == 1  # only S(1,1) == 1
        assert b.z_crossings == 0
        assert b.delta == 0
        assert b.max_f == 0

    def test_alternating_columns_four_by_four(self):
        b = sweep_grid(AlternatingColumnsField(), 4)
        assert b.gamma == 8  # every even column vanishes
        assert b.z_crossings == 12  # every horizontal pair touches a zero
        assert b.delta == 2
        assert b.d_antidiag == 1  # only S(2,2) on the i+j=4 line
        assert b.row_profiles.tolist() == [3, 3, 3, 3]
        assert b.max_f == 3

    def test_zero_coordinates_collection(self):
        b = sweep_grid(AlternatingColumnsField(), 3, collect_zeros=True)
        assert b.zero_coordinates == ((1, 2), (2, 2), (3, 2))
        assert sweep_grid(AlternatingColumnsField(), 3).zero_coordinates is None

    def test_profile_sums_to_crossings(self):
        b = sweep_grid(field(3), 64)
        assert int(b.row_profiles.sum()) == b.z_crossings

    def test_domain_and_capacity(self):
        with pytest.raises(ValueError):
            sweep_grid(field(), 0)
        with pytest.raises(CapacityError):
            sweep_grid(field(), SWEEP_CEILING + 1)

    def test_single_cell_grid(self):
        b = sweep_grid(field(2), 1)
        assert b.gamma == 0  # a lone sign is never zero
        assert b.z_crossings == 0
        assert b.row_profiles.tolist() == [0]


class TestPartialRows:
    def test_rows_are_prefix_sums(self):
        rows = {}
        for i, col in iter_partial_rows(AlternatingColumnsField(), 4):
            rows[i] = col.copy()  # buffer is reused; contract says copy
        assert rows[1].tolist() == [1, 0, 1, 0]
        assert rows[3].tolist() == [3, 0, 3, 0]

    def test_buffer_reuse_is_real(self):
        it = iter_partial_rows(ConstantField(), 3)
        _, first = next(it)
        _, second = next(it)
        assert first is second


class TestBruteForceOracle:
    def test_matches_sweep_on_stub(self):
        for N in (1, 2, 3, 4, 7):
            a = sweep_grid(AlternatingColumnsField(), N, collect_zeros=True)
            b = brute_force_bundle(AlternatingColumnsField(), N)
            assert (a.gamma, a.gamma_prime, a.z_crossings, a.delta, a.d_antidiag) == (
                b.gamma,
                b.gamma_prime,
                b.z_crossings,
                b.delta,
                b.d_antidiag,
            )
            assert a.row_profiles.tolist() == b.row_profiles.tolist()
            assert a.zero_coordinates == b.zero_coordinates

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_sweep_on_random_fields(self, seed):
        f = field(seed)
        a = sweep_grid(f, 17, collect_zeros=True)
        b = brute_force_bundle(f, 17)
        assert a.gamma == b.gamma
        assert a.gamma_prime == b.gamma_prime
        assert a.z_crossings == b.z_crossings
        assert a.delta == b.delta
        assert a.d_antidiag == b.d_antidiag
        assert a.row_profiles.tolist() == b.row_profiles.tolist()
        assert a.zero_coordinates == b.zero_coordinates

    def test_capacity(self):
        with pytest.raises(CapacityError):
            brute_force_bundle(field(), 257)


@given(seed=st.integers(0, 2**32), n=st.integers(1, 12))
@settings(max_examples=40, deadline=None)
def test_sweep_equals_brute_force(seed, n):
    f = field(seed)
    a, b = sweep_grid(f, n), brute_force_bundle(f, n)
    assert (a.gamma, a.z_crossings, a.delta) == (b.gamma, b.z_crossings, b.delta)


@given(seed=st.integers(0, 2**32), n=st.integers(1, 40))
@settings(max_examples=40, deadline=None)
def test_zeros_need_even_cell_area(seed, n):
    # S(i,j) sums i*j signs, so an odd-area cell can never vanish
    b = sweep_grid(field(seed), n, collect_zeros=True)
    assert all((i * j) % 2 == 0 for i, j in b.zero_coordinates)


class TestDecompositionAudit:
    def test_random_fields_pass(self):
        for seed in range(5):
            bundle, ok = decomposition_audit(field(seed), 48)
            assert ok
            assert bundle.z_crossings == int(bundle.row_profiles.sum())

    def test_stub_field_passes(self):
        _, ok = decomposition_audit(AlternatingColumnsField(), 16)
        assert ok

    def test_single_column_grid(self):
        _, ok = decomposition_audit(field(3), 1)
        assert ok


class TestUpcrossingTimes:
    def test_pinned_hand_worked_sequences(self):
        times, flags = upcrossing_times([1, -1, -1, 1])
        assert times.tolist() == [1, 3]
        assert flags.tolist() == [False, False]

        times, flags = upcrossing_times([2, 0, -2])
        assert times.tolist() == [1, 2]
        assert flags.tolist() == [True, True]

        times, flags = upcrossing_times([1, 1, 1, 1])
        assert times.tolist() == []
        assert flags.tolist() == []

    def test_empty_is_a_domain_error(self):
        with pytest.raises(ValueError):
            upcrossing_times([])

    def test_agrees_with_row_profiles(self):
        f = field(5)
        b = sweep_grid(f, 32)
        for i, col in iter_partial_rows(f, 32):
            times, _ = upcrossing_times(col)
            assert times.size == b.row_profiles[i - 1]


class TestDiagZeroCount:
    def test_empty_grid(self):
        assert diag_zero_count(StreamKey(Seed(1), 0), 0) == 0
        assert diag_zero_count(StreamKey(Seed(1), 0), 1) == 0

    def test_deterministic(self):
        key = StreamKey(Seed(9), 5)
        assert diag_zero_count(key, 500) == diag_zero_count(key, 500)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            diag_zero_count(StreamKey(Seed(1), 0), -2)

    def test_distribution_matches_sweep_law(self):
        # same mean as the pathwise delta across replicates, loose 5-sigma band
        key_vals = [diag_zero_count(StreamKey(Seed(3), r), 40) for r in range(400)]
        sweep_vals = [
            sweep_grid(RademacherField(StreamKey(Seed(4), r)), 40).delta
            for r in range(400)
        ]
        diff = np.mean(key_vals) - np.mean(sweep_vals)
        scale = np.sqrt((np.var(key_vals) + np.var(sweep_vals)) / 400)
        assert abs(diff) < 5 * scale


class TestHittingSet:
    def test_frozen_example(self):
        b = sweep_grid(AlternatingColumnsField(), 16)
        assert hitting_set(b, 0.5, 0.25) == {1, 2, 3, 4}

    def test_empty_when_threshold_unreachable(self):
        b = sweep_grid(ConstantField(), 16)
        assert hitting_set(b, 0.5, 0.25) == set()

    @pytest.mark.parametrize("alpha,beta", [(0, 0.25), (1, 0.25), (0.5, 0), (0.5, 0.5)])
    def test_parameter_domain(self, alpha, beta):
        b = sweep_grid(ConstantField(), 4)
        with pytest.raises(ValueError):
            hitting_set(b, alpha, beta)


class TestTwinZeros:
    def test_frozen_example(self):
        assert twin_zero_count(AlternatingColumnsField(), 0.5, 6, 100) == 8

    def test_radius_zero_rejected(self):
        with pytest.raises(ValueError):
            twin_zero_count(field(), 0.5, 6, 0)

    def test_eps_domain(self):
        for eps in (0.0, 1.0, -0.5):
            with pytest.raises(ValueError):
                twin_zero_count(field(), eps, 6, 2)

    def test_tiny_grids_have_no_wedge(self):
        assert twin_zero_count(field(1), 0.5, 2, 3) == 0

    def test_radius_one_requires_adjacent_zero(self):
        # wedge zeros of the alternating stub sit at even columns with odd
        # neighbors nonzero, so the only companions at L1 distance 1 are the
        # vertical ones, which always exist
        assert twin_zero_count(AlternatingColumnsField(), 0.5, 6, 1) == 8

    def test_matches_quadratic_recount(self):
        eps, N, radius = 0.4, 18, 3
        for seed in range(6):
            f = field(seed, 2)
            extent_rows = N - 1 + radius
            extent_cols = int(np.ceil((N - 1) / eps)) - 1 + radius
            wide = max(extent_rows, extent_cols)
            zeros = set()
            col = np.zeros(wide, dtype=np.int64)
            for i in range(1, wide + 1):
                col += np.cumsum(f.row_signs(i, wide))
                zeros.update((i, int(j) + 1) for j in np.nonzero(col == 0)[0])
            expected = 0
            for (zi, zj) in zeros:
                if not (1 < zi < N and eps * zi < zj < zi / eps):
                    continue
                expected += any(
                    (oi, oj) != (zi, zj) and abs(oi - zi) + abs(oj - zj) <= radius
                    for (oi, oj) in zeros
                )
            assert twin_zero_count(f, eps, N, radius) == expected


class TestAnnulus:
    def test_frozen_example(self):
        assert annulus_zero_check(AlternatingColumnsField(), 0.5, 4) == (True, 6)

    def test_no_zero_case(self):
        assert annulus_zero_check(ConstantField(), 0.5, 8) == (False, 0)

    def test_eps_domain(self):
        with pytest.raises(ValueError):
            annulus_zero_check(field(), 1.0, 8)

    def test_count_agrees_with_zero_coordinates(self):
        f = field(11)
        N, eps = 40, 0.3
        lo = int(np.ceil(eps * N))
        b = sweep_grid(f, N, collect_zeros=True)
        expected = sum(1 for (i, j) in b.zero_coordinates if i >= lo and j >= lo)
        nonempty, count = annulus_zero_check(f, eps, N)
        assert count == expected
        assert nonempty == (count > 0)
