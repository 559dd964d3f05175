import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from sheetwalk.randfield import (
    RademacherField,
    Seed,
    StreamKey,
    sample_signed_binomial,
    signed_binomial_batch,
)


def field(seed=1, replicate=0):
    return RademacherField(StreamKey(Seed(seed), replicate))


class TestSeedAndKey:
    def test_seed_reduces_mod_2_64(self):
        assert Seed(2**64 + 5) == Seed(5)
        assert Seed(-1) == Seed(2**64 - 1)
        assert 0 <= Seed(-12345) < 2**64

    def test_replicate_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            StreamKey(Seed(0), -1)

    def test_keys_are_hashable_values(self):
        assert StreamKey(Seed(3), 1) == StreamKey(Seed(3), 1)
        assert len({StreamKey(Seed(3), r) for r in (0, 1, 1)}) == 2


class TestFieldValues:
    def test_values_are_signs(self):
        f = field()
        assert {f.value(i, j) for i in range(1, 20) for j in range(1, 20)} == {-1, 1}

    @pytest.mark.parametrize("i,j", [(0, 1), (1, 0), (0, 0), (-2, 3), (3, -2)])
    def test_indices_start_at_one(self, i, j):
        with pytest.raises(ValueError):
            field().value(i, j)

    def test_same_key_same_field(self):
        a, b = field(9, 4), field(9, 4)
        cells = [(i, j) for i in range(1, 30) for j in range(1, 30)]
        assert [a.value(i, j) for i, j in cells] == [b.value(i, j) for i, j in cells]

    def test_read_order_is_irrelevant(self):
        f = field(7)
        cells = [(i, j) for i in range(1, 40) for j in range(1, 40)]
        forward = {c: f.value(*c) for c in cells}
        random.Random(0).shuffle(cells)
        assert all(field(7).value(*c) == forward[c] for c in cells)

    def test_replicates_differ(self):
        a, b = field(1, 0), field(1, 1)
        assert any(a.value(i, j) != b.value(i, j) for i in range(1, 10) for j in range(1, 10))

    def test_row_prefix_consistency(self):
        f = field(3)
        assert np.array_equal(f.row_signs(5, 100)[:40], f.row_signs(5, 40))

    def test_empty_row(self):
        assert field().row_signs(1, 0).shape == (0,)


@given(
    seed=st.integers(min_value=0, max_value=2**64 - 1),
    replicate=st.integers(min_value=0, max_value=2**20),
    i=st.integers(min_value=1, max_value=2**40),
    j=st.integers(min_value=1, max_value=4096),
)
@settings(max_examples=200, deadline=None)
def test_scalar_and_vector_paths_agree(seed, replicate, i, j):
    # value() walks the Python-int mix, row_signs() the uint64 numpy mix.
    f = RademacherField(StreamKey(Seed(seed), replicate))
    assert f.value(i, j) == f.row_signs(i, j)[-1]


class TestFieldStatistics:
    def test_mean_over_a_million_cells(self):
        f = field(3)
        total = sum(int(f.row_signs(i, 1000).sum()) for i in range(1, 1001))
        assert abs(total / 1e6) < 4e-3

    def test_streams_of_distinct_replicates_are_uncorrelated(self):
        # 1e5 shared cells; |corr| < 4/sqrt(n) holds for honest independence.
        a, b = field(2, 0), field(2, 1)
        n, dot = 100_000, 0
        for i in range(1, 101):
            dot += int((a.row_signs(i, 1000) * b.row_signs(i, 1000)).sum())
        assert abs(dot / n) < 4 / math.sqrt(n)


class TestSignedBinomial:
    def test_parity_and_range(self):
        key = StreamKey(Seed(4), 0)
        for count in (1, 2, 3, 64, 65, 100):
            v = sample_signed_binomial(key, 0, count)
            assert -count <= v <= count and (v - count) % 2 == 0

    def test_deterministic_per_index(self):
        key = StreamKey(Seed(4), 2)
        first = [sample_signed_binomial(key, k, 65) for k in range(20)]
        again = [sample_signed_binomial(key, k, 65) for k in range(20)]
        assert first == again
        assert len(set(first)) > 1

    def test_rejects_bad_arguments(self):
        key = StreamKey(Seed(0), 0)
        with pytest.raises(ValueError):
            sample_signed_binomial(key, -1, 2)
        with pytest.raises(ValueError):
            sample_signed_binomial(key, 0, 0)

    def test_count_two_hits_zero_half_the_time(self):
        key = StreamKey(Seed(6), 0)
        n = 100_000
        zeros = sum(sample_signed_binomial(key, k, 2) == 0 for k in range(n))
        se = math.sqrt(0.25 / n)
        assert abs(zeros / n - 0.5) < 4 * se

    def test_count_eight_matches_exact_law(self):
        # chi-square GOF against C(8,k)/2^8 at significance 1e-3.
        key = StreamKey(Seed(8), 0)
        n = 100_000
        draws = np.array([sample_signed_binomial(key, k, 8) for k in range(n)])
        observed = np.array([(draws == s).sum() for s in range(-8, 9, 2)])
        expected = n * np.array([math.comb(8, k) / 256 for k in range(9)])
        _, pvalue = stats.chisquare(observed, expected)
        assert pvalue > 1e-3

    def test_large_count_moments(self):
        key = StreamKey(Seed(9), 0)
        n, count = 20_000, 1000
        draws = np.array([sample_signed_binomial(key, k, count) for k in range(n)])
        assert abs(draws.mean()) < 4 * math.sqrt(count / n)
        assert abs(draws.var() / count - 1) < 0.05


class TestSignedBinomialBatch:
    def test_matches_parity_and_is_deterministic(self):
        key = StreamKey(Seed(10), 3)
        counts = np.arange(1, 500, dtype=np.int64)
        a = signed_binomial_batch(key, counts)
        b = signed_binomial_batch(key, counts)
        assert np.array_equal(a, b)
        assert np.all((a - counts) % 2 == 0)
        assert np.all(np.abs(a) <= counts)

    def test_rejects_nonpositive_counts(self):
        with pytest.raises(ValueError):
            signed_binomial_batch(StreamKey(Seed(0), 0), np.array([3, 0]))

    def test_batch_mean_scales_like_sqrt_count(self):
        key = StreamKey(Seed(11), 0)
        counts = np.full(50_000, 400, dtype=np.int64)
        draws = signed_binomial_batch(key, counts)
        assert abs(draws.mean()) < 4 * math.sqrt(400 / counts.size)
        assert abs(draws.var() / 400 - 1) < 0.05
