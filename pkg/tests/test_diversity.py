"""Disagreement measures against independent oracles and their properties."""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elbt.diversity import (
    EmptyCandidatesError,
    UtilityScore,
    mad_diversity,
    select_max_utility,
    vote_diversity,
)

finite_floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def mad_oracle(preds):
    """Separately coded reference: fsum-based mean absolute deviation."""
    mu = math.fsum(preds) / len(preds)
    return math.fsum(abs(p - mu) for p in preds) / len(preds)


class TestMadDiversity:
    @pytest.mark.parametrize(
        "preds,expected",
        [
            ([2.0, 2.0, 2.0], 0.0),
            ([1.0, 2.0, 3.0], 2.0 / 3.0),
            ([0.0, 10.0], 5.0),
        ],
    )
    def test_fixed_cases(self, preds, expected):
        assert math.isclose(mad_diversity(preds), expected, abs_tol=1e-12)

    def test_requires_two_members(self):
        with pytest.raises(ValueError):
            mad_diversity([1.0])

    def test_against_oracle_1000_vectors(self):
        rng = random.Random(99)
        for _ in range(1000):
            n = rng.randint(2, 12)
            preds = [rng.uniform(-500, 500) for _ in range(n)]
            assert abs(mad_diversity(preds) - mad_oracle(preds)) <= 1e-12

    @given(st.lists(finite_floats, min_size=2, max_size=10), finite_floats)
    @settings(max_examples=100)
    def test_translation_invariant(self, preds, shift):
        shifted = [p + shift for p in preds]
        assert math.isclose(
            mad_diversity(preds), mad_diversity(shifted), rel_tol=1e-9, abs_tol=1e-6
        )

    @given(
        st.lists(finite_floats, min_size=2, max_size=10),
        st.floats(min_value=-100, max_value=100, allow_nan=False),
    )
    @settings(max_examples=100)
    def test_absolutely_homogeneous(self, preds, k):
        scaled = [k * p for p in preds]
        assert math.isclose(
            mad_diversity(scaled), abs(k) * mad_diversity(preds), rel_tol=1e-9, abs_tol=1e-6
        )

    def test_nonnegative(self):
        rng = random.Random(3)
        for _ in range(200):
            preds = [rng.uniform(-10, 10) for _ in range(rng.randint(2, 8))]
            assert mad_diversity(preds) >= 0.0


class TestVoteDiversity:
    @pytest.mark.parametrize(
        "preds,combined,expected",
        [
            (["A", "A", "A", "A", "A"], "A", 0.0),
            (["A", "A", "A", "B", "B"], "A", 0.4),
            (["A", "B", "C"], "A", 2.0 / 3.0),
        ],
    )
    def test_fixed_cases(self, preds, combined, expected):
        assert vote_diversity(preds, combined) == expected

    def test_requires_two_members(self):
        with pytest.raises(ValueError):
            vote_diversity(["A"], "A")

    def test_count_formula_1000_vectors(self):
        rng = random.Random(4)
        labels = ["a", "b", "c", "d"]
        for _ in range(1000):
            n = rng.randint(2, 15)
            preds = [rng.choice(labels) for _ in range(n)]
            combined = rng.choice(labels)
            agreements = sum(1 for p in preds if p == combined)
            assert vote_diversity(preds, combined) == (n - agreements) / n

    def test_bounded_by_one(self):
        assert vote_diversity(["a", "b"], "c") == 1.0

    @given(st.lists(st.sampled_from("abc"), min_size=2, max_size=12))
    @settings(max_examples=100)
    def test_zero_iff_unanimous(self, preds):
        combined = preds[0]
        d = vote_diversity(preds, combined)
        assert (d == 0.0) == all(p == combined for p in preds)


class TestSelectMaxUtility:
    def scores(self, ds):
        return [UtilityScore((i,), d, "b") for i, d in enumerate(ds)]

    def test_unique_max(self):
        assert select_max_utility(self.scores([0.1, 0.7, 0.3]), set(), seed=0) == (1,)

    def test_all_equal_uniform_and_reproducible(self):
        scores = self.scores([0.5] * 10)
        first = select_max_utility(scores, set(), seed=123)
        assert select_max_utility(scores, set(), seed=123) == first
        picks = {select_max_utility(scores, set(), seed=s) for s in range(40)}
        assert len(picks) > 3  # spreads over candidates rather than pinning one

    def test_two_way_tie_never_third(self):
        scores = self.scores([0.9, 0.1, 0.9])
        for s in range(30):
            assert select_max_utility(scores, set(), seed=s) in {(0,), (2,)}

    def test_excluded_never_returned(self):
        scores = self.scores([0.9, 0.5])
        assert select_max_utility(scores, {(0,)}, seed=0) == (1,)

    def test_empty_after_exclusion(self):
        with pytest.raises(EmptyCandidatesError):
            select_max_utility(self.scores([0.2]), {(0,)}, seed=0)

    @given(
        st.lists(st.floats(min_value=0, max_value=1, allow_nan=False), min_size=1, max_size=20),
        st.integers(min_value=0, max_value=2**32),
    )
    @settings(max_examples=150)
    def test_always_returns_an_argmax(self, ds, seed):
        scores = self.scores(ds)
        winner = select_max_utility(scores, set(), seed=seed)
        best = max(ds)
        assert ds[winner[0]] == best

    def test_negative_diversity_rejected(self):
        with pytest.raises(ValueError):
            UtilityScore((1,), -0.1, "b")
