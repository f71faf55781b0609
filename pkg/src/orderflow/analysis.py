"""Pattern statistics of interval maps.

The exact route subdivides [0,1) into maximal intervals where the first n
iterates are simultaneously affine (pulling piece boundaries back through
the orbit), splits once more at pairwise equality crossings, and reads one
order pattern off each open cell; masses are exact interval lengths and this
is the oracle the rest of the package is checked against.  The empirical
route samples a counter-based deterministic stream, so runs are reproducible
per seed and parallelizable by index range.
"""

from __future__ import annotations

import hashlib
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal

from .caps import LIFT_ENUM_MAX, SUBDIVISION_MAX
from .digraph import Subgraph
from .drift import ProfileSaturation, ZERO as SIGN_ZERO
from .errors import CapExceeded, DegenerateTie, NotPiecewiseAffine
from .exactnum import Exact
from .maps import IntervalMap
from .paths import DiPath, build_poset, lifts, linear_extensions
from .perms import PatternDistribution, Perm, all_perms, order_pattern

Mode = Literal["exact", "empirical"]


@dataclass(frozen=True)
class PatternReport:
    """Distribution plus bookkeeping for one (map, n) query."""

    n: int
    distribution: PatternDistribution
    realized: frozenset[Perm]
    samples: int | None  # None marks an exact computation
    discards: int = 0

    @property
    def exact(self) -> bool:
        return self.samples is None


# -- exact subdivision --------------------------------------------------------


def _compose_affine(outer_a, outer_b, inner_a, inner_b):
    return outer_a * inner_a, outer_a * inner_b + outer_b


def exact_distribution(f: IntervalMap, n: int, cap: int = SUBDIVISION_MAX) -> PatternReport:
    """Exact pattern distribution of the first n iterates.

    Requires every piece affine (coefficients may lie in Q(sqrt2)); regions
    where two iterates coincide identically would make the pattern undefined
    on positive measure and are reported as a degeneracy instead of guessed.
    """
    if n < 1:
        raise ValueError("pattern length must be at least 1")
    if any(not p.affine for p in f.pieces):
        raise NotPiecewiseAffine(f"{f.name or 'map'} has a non-affine piece")

    lo_bounds = [p.lo for p in f.pieces]

    def locate(value) -> int:
        idx = bisect_right(lo_bounds, value) - 1
        if idx < 0 or not f.pieces[idx].lo <= value < f.pieces[idx].hi:
            raise ValueError(f"iterate value {value} escapes [0, 1)")
        return idx

    # Segments are open intervals (lo, hi) with the list of affine maps for
    # iterates 0..k so far; iterate 0 is the identity.
    segments: list[tuple[Exact, Exact, list[tuple[Exact, Exact]]]] = [
        (Fraction(0), Fraction(1), [(Fraction(1), Fraction(0))])
    ]
    for _ in range(n - 1):
        refined: list[tuple[Exact, Exact, list[tuple[Exact, Exact]]]] = []
        for lo, hi, comps in segments:
            a, b = comps[-1]
            cuts: list[Exact] = []
            if a != 0:
                vlo, vhi = a * lo + b, a * hi + b
                if vlo > vhi:
                    vlo, vhi = vhi, vlo
                for bound in lo_bounds:
                    if vlo < bound < vhi:
                        cuts.append((bound - b) / a)
            points = [lo] + sorted(cuts) + [hi]
            for left, right in zip(points, points[1:]):
                mid = (left + right) / 2
                piece = f.pieces[locate(a * mid + b)]
                refined.append((left, right, comps + [_compose_affine(piece.a, piece.b, a, b)]))
            if len(refined) > cap:
                raise CapExceeded(f"subdivision grew past {cap} intervals")
        segments = refined

    masses: dict[Perm, Exact] = {}
    for lo, hi, comps in segments:
        cuts = []
        for i in range(n):
            for j in range(i + 1, n):
                ai, bi = comps[i]
                aj, bj = comps[j]
                if ai == aj:
                    if bi == bj:
                        raise DegenerateTie(
                            f"iterates {i} and {j} coincide on ({lo}, {hi})"
                        )
                    continue
                x = (bj - bi) / (ai - aj)
                if lo < x < hi:
                    cuts.append(x)
        points = [lo] + sorted(set(cuts)) + [hi]
        for left, right in zip(points, points[1:]):
            mid = (left + right) / 2
            values = [a * mid + b for a, b in comps]
            sigma = order_pattern(values)
            masses[sigma] = masses.get(sigma, Fraction(0)) + (right - left)

    total = sum(masses.values(), Fraction(0))
    assert total == 1, f"subdivision lost mass: total {total}"
    dist = PatternDistribution(n, masses)
    return PatternReport(n, dist, frozenset(dist.mass), samples=None)


# -- deterministic sampling ----------------------------------------------------


def unit_samples(seed, count: int, start: int = 0) -> Iterable[float]:
    """Uniform floats in [0, 1) keyed by (seed, index); order-independent."""
    for i in range(start, start + count):
        digest = hashlib.blake2b(f"{seed}:{i}".encode(), digest_size=8).digest()
        yield int.from_bytes(digest, "big") / 2**64


def _float_pieces(f: IntervalMap):
    los = [float(p.lo) for p in f.pieces]
    polys = [(float(p.c), float(p.a), float(p.b)) for p in f.pieces]
    his = [float(p.hi) for p in f.pieces]
    return los, his, polys


def empirical_distribution(
    f: IntervalMap, n: int, samples: int, seed
) -> PatternReport:
    """Histogram of order patterns over pseudo-random orbits.

    Orbits showing an exact repeat (a tie between two window values) are
    discarded and counted; identity placeholders in truncated constructions
    surface this way and stay out of the histogram.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    los, his, polys = _float_pieces(f)
    counts: dict[Perm, int] = {}
    discards = 0
    for x in unit_samples(seed, samples):
        values = [x]
        ok = True
        for _ in range(n - 1):
            v = values[-1]
            idx = bisect_right(los, v) - 1
            if idx < 0 or v >= his[idx]:
                ok = False
                break
            c, a, b = polys[idx]
            values.append((c * v + a) * v + b)
        if not ok or len(set(values)) != n:
            discards += 1
            continue
        sigma = order_pattern(values)
        counts[sigma] = counts.get(sigma, 0) + 1
    kept = samples - discards
    if kept == 0:
        raise ValueError("all samples were discarded")
    dist = PatternDistribution(n, {s: c / kept for s, c in counts.items()}, exact=False)
    return PatternReport(n, dist, frozenset(counts), samples=samples, discards=discards)


def distribution_report(f: IntervalMap, n: int, mode: Mode, samples: int = 100_000, seed=0) -> PatternReport:
    if mode == "exact":
        return exact_distribution(f, n)
    if mode == "empirical":
        return empirical_distribution(f, n, samples, seed)
    raise ValueError(f"mode must be 'exact' or 'empirical', got {mode!r}")


# -- derived statistics ---------------------------------------------------------


def pattern_graph(f: IntervalMap, n: int, mode: Mode = "exact", samples: int = 100_000, seed=0) -> Subgraph:
    """The subgraph of G_n whose edges are the realized (n+1)-patterns."""
    report = distribution_report(f, n + 1, mode, samples=samples, seed=seed)
    return Subgraph(n, frozenset(report.realized))


def partially_driftless_in(H: Subgraph) -> DiPath | None:
    """Some loop in H with a zero diagonal drift entry, or None.

    Scans the loop-profile saturation of each strongly connected piece; the
    representative path attached to the first free profile is the witness.
    """
    from .digraph import strongly_connected_components

    for comp in strongly_connected_components(H):
        if not comp.edges:
            continue
        sat = ProfileSaturation(comp)
        for v in sorted(comp.vertices):
            for prof, rep in sat.loop_profiles(v).items():
                if any(prof.diagonal(j) == SIGN_ZERO for j in range(1, H.n + 1)):
                    return DiPath(H.n, rep)
    return None


def entropy_estimate(
    f: IntervalMap, n_max: int, mode: Mode = "exact", samples: int = 100_000, seed=0
) -> list[tuple[int, int, float]]:
    """Realized-pattern counts and the normalized log-count sequence.

    The statistic log|realized_n| / (n-1) converges to the topological
    entropy for piecewise continuous, piecewise monotone maps.
    """
    if n_max > 10:
        raise CapExceeded("entropy estimates stop at n_max = 10")
    rows = []
    for n in range(2, n_max + 1):
        realized = distribution_report(f, n, mode, samples=samples, seed=seed).realized
        rows.append((n, len(realized), math.log(len(realized)) / (n - 1)))
    return rows


def forbidden_patterns(
    f: IntervalMap, n: int, mode: Mode = "exact", samples: int = 100_000, seed=0
) -> tuple[frozenset[Perm], frozenset[Perm]]:
    """Unrealized patterns of length n, and the basic ones among them.

    A forbidden pattern is basic when no proper consecutive window of it is
    itself forbidden at its own length, so it is not explained by a shorter
    obstruction.
    """
    realized_by_len = {
        k: distribution_report(f, k, mode, samples=samples, seed=seed).realized
        for k in range(2, n + 1)
    }
    forbidden = frozenset(s for s in all_perms(n) if s not in realized_by_len[n])
    basic = []
    for sigma in forbidden:
        explained = False
        for width in range(2, n):
            for off in range(n - width + 1):
                window = order_pattern(sigma.word[off : off + width])
                if window not in realized_by_len[width]:
                    explained = True
                    break
            if explained:
                break
        if not explained:
            basic.append(sigma)
    return forbidden, frozenset(basic)


@dataclass(frozen=True)
class ExclusionRow:
    m: int
    equal: bool
    missing: frozenset[Perm]  # lift preimage members the map does not realize
    extra: frozenset[Perm]  # realized patterns outside the lift preimage


def exclusion_type_test(
    f: IntervalMap, n: int, m_max: int, mode: Mode = "exact", samples: int = 100_000, seed=0
) -> list[ExclusionRow]:
    """Compare realized patterns with all lifts of paths in the level-n graph.

    A map of exclusion type n would make every row equal for all m; any
    discrepancy up to m_max refutes that type (the verdict is necessarily
    partial in the other direction).
    """
    if m_max > LIFT_ENUM_MAX:
        raise CapExceeded(f"exclusion testing enumerates S_m only up to m = {LIFT_ENUM_MAX}")
    H = pattern_graph(f, n, mode, samples=samples, seed=seed)
    rows = []
    for m in range(n + 1, m_max + 1):
        realized = distribution_report(f, m, mode, samples=samples, seed=seed).realized
        preimage = set()
        for sigma in all_perms(m):
            if all(
                order_pattern(sigma.word[i : i + n + 1]) in H.edges
                for i in range(m - n)
            ):
                preimage.add(sigma)
        rows.append(
            ExclusionRow(
                m,
                preimage == set(realized),
                frozenset(preimage - set(realized)),
                frozenset(set(realized) - preimage),
            )
        )
    return rows


def growth_check(gamma: DiPath, k_max: int) -> list[tuple[int, int, int]]:
    """Lift counts of loop powers against the factorial lower bound.

    For a loop with a zero diagonal drift entry, the k-th power admits at
    least k! lifts.  Counts come from brute force while S_m fits, then from
    extension counting on the power's poset.
    """
    gamma.require_loop()
    from .drift import loop_drift

    diag = loop_drift(gamma).diagonal()
    if SIGN_ZERO not in diag:
        raise ValueError("growth bound needs a loop with a zero diagonal drift entry")
    rows = []
    for k in range(1, k_max + 1):
        m = k * gamma.length + gamma.n
        power = gamma**k
        if m <= LIFT_ENUM_MAX:
            count = len(lifts(power, m))
        else:
            count = linear_extensions(build_poset(power), "count")
        rows.append((k, count, math.factorial(k)))
    return rows
