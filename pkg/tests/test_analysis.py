import math
from fractions import Fraction

import pytest

from orderflow.analysis import (
    empirical_distribution,
    entropy_estimate,
    exact_distribution,
    exclusion_type_test,
    forbidden_patterns,
    growth_check,
    partially_driftless_in,
    pattern_graph,
    unit_samples,
)
from orderflow.digraph import Subgraph
from orderflow.drift import loop_drift
from orderflow.errors import DegenerateTie, NotPiecewiseAffine
from orderflow.flows import flow_residual
from orderflow.maps import IntervalMap, Piece, builtin, cyclic_lift, permutation_map
from orderflow.paths import path
from orderflow.perms import HEAD, TAIL, all_perms, perm, pushforward, restrict

DOUBLING_MU3 = {
    "123": Fraction(1, 4),
    "132": Fraction(1, 6),
    "213": Fraction(1, 12),
    "231": Fraction(1, 12),
    "312": Fraction(1, 6),
    "321": Fraction(1, 4),
}


class TestExactDistribution:
    def test_doubling_length_two(self, doubling):
        mu = exact_distribution(doubling, 2).distribution
        assert mu(perm("12")) == Fraction(1, 2) and mu(perm("21")) == Fraction(1, 2)

    def test_doubling_length_three(self, doubling):
        mu = exact_distribution(doubling, 3).distribution
        assert {str(s): m for s, m in mu.mass.items()} == DOUBLING_MU3

    def test_rotation_length_three(self, rotation_3_10):
        report = exact_distribution(rotation_3_10, 3)
        mu = report.distribution
        assert mu(perm("123")) == Fraction(2, 5)
        assert mu(perm("231")) == Fraction(3, 10)
        assert mu(perm("312")) == Fraction(3, 10)
        assert report.realized == {perm("123"), perm("231"), perm("312")}

    def test_length_one(self, doubling):
        mu = exact_distribution(doubling, 1).distribution
        assert mu(perm("1")) == 1

    def test_logistic_rejected(self):
        with pytest.raises(NotPiecewiseAffine):
            exact_distribution(builtin("logistic"), 2)

    def test_identity_region_degenerate(self):
        half = Fraction(1, 2)
        stuck = IntervalMap(
            (Piece(Fraction(0), half, Fraction(1), Fraction(0)), Piece(half, Fraction(1), Fraction(1), Fraction(0)))
        )
        with pytest.raises(DegenerateTie):
            exact_distribution(stuck, 2)

    def test_subdivision_cap(self, doubling):
        from orderflow.errors import CapExceeded

        with pytest.raises(CapExceeded):
            exact_distribution(doubling, 8, cap=10)


class TestEmpiricalDistribution:
    def test_rotation_head_mass(self, rotation_3_10):
        report = empirical_distribution(rotation_3_10, 2, 100_000, seed=11)
        assert abs(float(report.distribution(perm("12"))) - 0.7) < 0.005
        assert report.discards == 0

    def test_matches_exact_within_bound(self, doubling):
        samples, delta = 100_000, 1e-3
        emp = empirical_distribution(doubling, 3, samples, seed=3).distribution
        exact = exact_distribution(doubling, 3).distribution
        bound = 4 * math.sqrt(math.log(2 * math.factorial(3) / delta) / samples)
        for s in all_perms(3):
            assert abs(float(emp(s)) - float(exact(s))) <= bound
            # at this sample size the agreement is much tighter in practice
            assert abs(float(emp(s)) - float(exact(s))) <= 0.01

    def test_length_one_point_mass(self, tent):
        report = empirical_distribution(tent, 1, 100, seed=0)
        assert report.distribution(perm("1")) == 1.0

    def test_determinism(self, doubling):
        a = empirical_distribution(doubling, 3, 5_000, seed=5).distribution
        b = empirical_distribution(doubling, 3, 5_000, seed=5).distribution
        assert dict(a.mass) == dict(b.mass)

    def test_sampler_is_counter_based(self):
        first = list(unit_samples("s", 5))
        assert list(unit_samples("s", 3, start=2)) == first[2:5]

    def test_discard_rate_low_for_builtins(self, doubling, rotation_3_10, tent):
        for f in (doubling, rotation_3_10, tent):
            report = empirical_distribution(f, 4, 100_000, seed=17)
            assert report.discards / 100_000 < 1e-4


class TestStatisticalInvariants:
    def test_exact_flow_residual_vanishes_for_preserving_maps(
        self, doubling, rotation_3_10, tent
    ):
        for f in (doubling, rotation_3_10, tent):
            for n in (2, 3, 4):
                assert flow_residual(exact_distribution(f, n).distribution) == 0

    def test_empirical_flow_residual_small_for_preserving_maps(self, doubling, tent, loop_132_321_213):
        samples, delta = 100_000, 1e-3
        bound = 4 * math.sqrt(math.log(1 / delta) / samples)
        pm = permutation_map(cyclic_lift(loop_132_321_213))
        for f in (doubling, tent, pm):
            mu = empirical_distribution(f, 3, samples, seed=23).distribution
            assert flow_residual(mu) <= bound

    def test_logistic_is_visibly_not_preserving(self):
        lg = builtin("logistic")
        mu = empirical_distribution(lg, 3, 100_000, seed=19).distribution
        assert flow_residual(mu) > 0.1

    def test_tower_compatibility_exact(self, doubling, rotation_3_10):
        for f in (doubling, rotation_3_10):
            mus = {n: exact_distribution(f, n).distribution for n in (2, 3, 4)}
            assert pushforward(mus[3], HEAD) == mus[2]
            assert pushforward(mus[4], HEAD) == mus[3]

    def test_realized_sets_refine(self, doubling, rotation_3_10):
        for f in (doubling, rotation_3_10):
            for n in (2, 3):
                upper = exact_distribution(f, n + 1).realized
                lower = exact_distribution(f, n).realized
                assert {restrict(s, HEAD) for s in upper} <= lower
                assert {restrict(s, TAIL) for s in upper} <= lower


class TestPatternGraph:
    def test_doubling_covers_everything(self, doubling, G2_full):
        assert pattern_graph(doubling, 2).edges == G2_full.edges

    def test_rotation(self, rotation_3_10):
        assert pattern_graph(rotation_3_10, 2).edges == {
            perm("123"),
            perm("231"),
            perm("312"),
        }

    def test_permutation_map(self, loop_132_321_213, driftless_triple):
        f = permutation_map(cyclic_lift(loop_132_321_213))
        assert pattern_graph(f, 2).edges == driftless_triple.edges


class TestPartiallyDriftless:
    def test_found_in_full_graph(self, doubling, G2_full):
        loop = partially_driftless_in(pattern_graph(doubling, 2))
        assert loop is not None
        assert "0" in loop_drift(loop).diagonal()

    def test_absent_in_forced_cycle(self, two_cycle):
        assert partially_driftless_in(two_cycle) is None

    def test_found_in_figure_support(self, figure_loop):
        H = Subgraph(3, frozenset(figure_loop.edges))
        loop = partially_driftless_in(H)
        assert loop is not None
        assert "0" in loop_drift(loop).diagonal()


class TestEntropy:
    def test_doubling_small(self, doubling):
        rows = entropy_estimate(doubling, 3)
        assert rows[-1] == (3, 6, pytest.approx(math.log(6) / 2))

    def test_rotation_is_low_complexity(self, rotation_3_10):
        rows = entropy_estimate(rotation_3_10, 8)
        counts = {n: c for n, c, _ in rows}
        assert counts[3] == 3
        estimates = [est for n, _, est in rows if n >= 3]
        assert all(a >= b for a, b in zip(estimates, estimates[1:]))
        assert estimates[-1] < 0.4


class TestForbidden:
    def test_rotation(self, rotation_3_10):
        forbidden, basic = forbidden_patterns(rotation_3_10, 3)
        assert forbidden == {perm("132"), perm("213"), perm("321")}
        assert basic == forbidden

    def test_doubling_three_empty(self, doubling):
        forbidden, basic = forbidden_patterns(doubling, 3)
        assert forbidden == frozenset() and basic == frozenset()

    def test_doubling_four_all_basic(self, doubling):
        forbidden, basic = forbidden_patterns(doubling, 4)
        assert forbidden
        # No length-3 pattern is forbidden, so nothing is explained away.
        assert basic == forbidden

    def test_rotation_four_has_non_basic(self, rotation_3_10):
        forbidden, basic = forbidden_patterns(rotation_3_10, 4)
        assert basic < forbidden


class TestExclusion:
    def test_doubling(self, doubling):
        rows = exclusion_type_test(doubling, 2, 4)
        assert rows[0].m == 3 and rows[0].equal
        assert rows[1].m == 4 and not rows[1].equal
        assert rows[1].missing and not rows[1].extra

    def test_permutation_map_matches_at_three(self, loop_132_321_213):
        f = permutation_map(cyclic_lift(loop_132_321_213))
        rows = exclusion_type_test(f, 2, 3)
        assert rows[0].equal


class TestGrowth:
    def test_three_loop(self, loop_132_321_213):
        rows = growth_check(loop_132_321_213, 2)
        assert [(k, fact) for k, _, fact in rows] == [(1, 1), (2, 2)]
        assert all(count >= fact for _, count, fact in rows)
        assert rows[0][1] == 4

    def test_counting_routes_agree_on_a_loop_power(self, loop_132_321_213):
        # Brute force and downset counting must agree where both apply.
        from orderflow.paths import build_poset, lifts, linear_extensions

        power = loop_132_321_213**2
        assert len(lifts(power, 8)) == linear_extensions(build_poset(power), "count")

    def test_figure_loop(self, figure_loop):
        rows = growth_check(figure_loop, 1)
        assert rows[0][1] >= 1

    def test_requires_free_diagonal(self):
        with pytest.raises(ValueError):
            growth_check(path(2, ["123"]), 1)
