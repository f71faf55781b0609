import random
from fractions import Fraction

import pytest

from orderflow.errors import CapExceeded, DuplicateValue, LengthMismatch, LengthTooSmall
from orderflow.perms import (
    HEAD,
    TAIL,
    PatternDistribution,
    Perm,
    all_perms,
    distribution_from_csv,
    distribution_to_csv,
    is_compatible,
    order_pattern,
    perm,
    preimages,
    pushforward,
    restrict,
)


class TestOrderPattern:
    @pytest.mark.parametrize(
        "values,expected",
        [
            ((0.3, 0.1, 0.9), "213"),
            ((0.1, 0.2, 0.3), "123"),
            ((2, 4, 1), "231"),
            ((5,), "1"),
        ],
    )
    def test_examples(self, values, expected):
        assert order_pattern(values) == perm(expected)

    def test_duplicates_rejected(self):
        with pytest.raises(DuplicateValue):
            order_pattern((1, 3, 1))

    def test_idempotent_on_permutations_exhaustive(self):
        for n in range(1, 8):
            for sigma in all_perms(n):
                assert order_pattern(sigma.word) == sigma


class TestRestrict:
    @pytest.mark.parametrize(
        "sigma,head_result,tail_result",
        [
            ("2413", "231", "312"),
            ("4231", "312", "231"),
            ("132", "12", "21"),
        ],
    )
    def test_examples(self, sigma, head_result, tail_result):
        assert restrict(perm(sigma), HEAD) == perm(head_result)
        assert restrict(perm(sigma), TAIL) == perm(tail_result)

    def test_too_short(self):
        with pytest.raises(LengthTooSmall):
            restrict(perm("1"), HEAD)

    def test_preimage_counts_exhaustive(self):
        # Each pattern has exactly n+1 one-longer extensions per side.
        for n in range(1, 7):
            by_head: dict[Perm, int] = {}
            by_tail: dict[Perm, int] = {}
            for tau in all_perms(n + 1):
                by_head[restrict(tau, HEAD)] = by_head.get(restrict(tau, HEAD), 0) + 1
                by_tail[restrict(tau, TAIL)] = by_tail.get(restrict(tau, TAIL), 0) + 1
            for sigma in all_perms(n):
                assert by_head[sigma] == n + 1
                assert by_tail[sigma] == n + 1

    def test_preimages_helper_agrees(self):
        for sigma in all_perms(3):
            for side in (HEAD, TAIL):
                expected = {t for t in all_perms(4) if restrict(t, side) == sigma}
                assert set(preimages(sigma, side)) == expected


class TestPerm:
    def test_text_forms(self):
        assert str(perm("2413")) == "2413"
        long = Perm(tuple([10, 1, 2, 3, 4, 5, 6, 7, 8, 9]))
        assert str(long) == "10,1,2,3,4,5,6,7,8,9"
        assert Perm.parse(str(long)) == long

    def test_validation(self):
        with pytest.raises(ValueError):
            Perm((1, 1, 2))
        with pytest.raises(ValueError):
            Perm(())

    def test_cap(self):
        with pytest.raises(CapExceeded):
            Perm(tuple(range(1, 14)))

    def test_cap_env_override(self, monkeypatch):
        monkeypatch.setenv("ORDERFLOW_CAP", "14")
        assert Perm(tuple(range(1, 14))).n == 13
        monkeypatch.setenv("ORDERFLOW_CAP", "5")
        with pytest.raises(CapExceeded):
            Perm(tuple(range(1, 7)))


class TestDistributions:
    def test_pushforward_uniform(self):
        assert pushforward(PatternDistribution.uniform(3), HEAD).close_to(
            PatternDistribution.uniform(2)
        )

    def test_pushforward_point_mass(self):
        mu = PatternDistribution.point_mass(perm("132"))
        assert pushforward(mu, HEAD) == PatternDistribution.point_mass(perm("12"))
        assert pushforward(mu, TAIL) == PatternDistribution.point_mass(perm("21"))

    def test_pushforward_three_pattern_example(self):
        third = Fraction(1, 3)
        mu = PatternDistribution(3, {perm("123"): third, perm("132"): third, perm("213"): third})
        down = pushforward(mu, HEAD)
        assert down(perm("12")) == Fraction(2, 3)
        assert down(perm("21")) == Fraction(1, 3)

    def test_pushforward_preserves_mass_and_sign(self):
        rng = random.Random(7)
        for _ in range(20):
            weights = [rng.randint(0, 10) for _ in range(24)]
            total = sum(weights) or 1
            mu = PatternDistribution(
                4,
                {
                    s: Fraction(w, total)
                    for s, w in zip(all_perms(4), weights)
                    if w
                },
            )
            for side in (HEAD, TAIL):
                down = pushforward(mu, side)
                assert sum(down.mass.values()) == 1
                assert all(m > 0 for m in down.mass.values())

    def test_is_compatible(self):
        assert is_compatible(PatternDistribution.uniform(2), PatternDistribution.uniform(3))
        assert not is_compatible(
            PatternDistribution.point_mass(perm("12")), PatternDistribution.uniform(3)
        )
        third = Fraction(1, 3)
        mu3 = PatternDistribution(3, {perm("123"): third, perm("132"): third, perm("213"): third})
        mu2 = PatternDistribution(2, {perm("12"): Fraction(2, 3), perm("21"): Fraction(1, 3)})
        assert is_compatible(mu2, mu3)

    def test_is_compatible_length_check(self):
        with pytest.raises(LengthMismatch):
            is_compatible(PatternDistribution.uniform(2), PatternDistribution.uniform(4))

    def test_validation(self):
        with pytest.raises(ValueError):
            PatternDistribution(2, {perm("12"): Fraction(1, 2)})
        with pytest.raises(ValueError):
            PatternDistribution(2, {perm("12"): Fraction(3, 2), perm("21"): Fraction(-1, 2)})
        with pytest.raises(LengthMismatch):
            PatternDistribution(2, {perm("123"): Fraction(1)})

    def test_float_mode(self):
        mu = PatternDistribution(2, {perm("12"): 0.5, perm("21"): 0.5}, exact=False)
        assert mu.close_to(PatternDistribution(2, {perm("12"): 0.5 + 1e-12, perm("21"): 0.5 - 1e-12}, exact=False))


class TestCsv:
    def test_round_trip_exact(self):
        mu = PatternDistribution(2, {perm("12"): Fraction(2, 3), perm("21"): Fraction(1, 3)})
        again = distribution_from_csv(distribution_to_csv(mu))
        assert again == mu and again.exact

    def test_round_trip_float(self):
        mu = PatternDistribution(2, {perm("12"): 0.25, perm("21"): 0.75}, exact=False)
        again = distribution_from_csv(distribution_to_csv(mu))
        assert not again.exact
        assert again.close_to(mu)

    def test_header_required(self):
        with pytest.raises(LengthMismatch):
            distribution_from_csv("oops,mass\n12,1\n")
