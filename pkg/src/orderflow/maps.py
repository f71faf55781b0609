"""Piecewise self-maps of [0,1) with exact coefficients.

Pieces are polynomial of degree at most two (degree two only for the
logistic family); everything else is affine with coefficients in Q or
Q(sqrt 2).  The irrational coefficients enter through permutation maps:
equal subintervals permuted by translations realize a prescribed loop of
order patterns, and one transition is composed with an in-piece rotation by
(sqrt(2)-1)/l so that almost every orbit is aperiodic while Lebesgue measure
and the pattern distribution are untouched.
"""

from __future__ import annotations

import heapq
import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .caps import CYCLIC_LIFT_MAX
from .digraph import Subgraph, strongly_connected_components, head, tail
from .drift import (
    DRIFTLESS,
    TOTALLY_DRIFTLESS,
    classify_loop,
    subgraph_drifts,
    synthesize_totally_driftless_loop,
)
from .errors import (
    CapExceeded,
    CyclicObstruction,
    FormatError,
    NotRealizable,
    UnknownBuiltin,
)
from .exactnum import Exact, Sqrt2, exact, exact_str, parse_exact
from .flows import as_flow, support_face
from .paths import DiPath
from .perms import PatternDistribution, Perm, order_pattern

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class Piece:
    """One half-open piece [lo, hi) with map x -> c x^2 + a x + b."""

    lo: Exact
    hi: Exact
    a: Exact
    b: Exact
    c: Exact = ZERO

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"piece [{self.lo}, {self.hi}) is empty")

    def __call__(self, x):
        if self.c == 0:
            return self.a * x + self.b
        return (self.c * x + self.a) * x + self.b

    @property
    def affine(self) -> bool:
        return self.c == 0


@dataclass(frozen=True)
class IntervalMap:
    """A self-map of [0,1) given by pieces that partition the interval."""

    pieces: tuple[Piece, ...]
    name: str = ""
    measure_preserving: bool = False
    almost_aperiodic: bool = False
    rotated_piece: int | None = None

    def __post_init__(self):
        ps = sorted(self.pieces, key=_Lo)
        if not ps:
            raise ValueError("a map needs at least one piece")
        if ps[0].lo != 0 or ps[-1].hi != 1:
            raise ValueError("pieces must cover [0, 1)")
        for left, right in zip(ps, ps[1:]):
            if left.hi != right.lo:
                raise ValueError(f"gap or overlap at {left.hi} != {right.lo}")
        object.__setattr__(self, "pieces", tuple(ps))

    def piece_index(self, x) -> int:
        los = [p.lo for p in self.pieces]
        idx = bisect_right(los, x) - 1
        if idx < 0 or not self.pieces[idx].lo <= x < self.pieces[idx].hi:
            raise ValueError(f"{x} is outside [0, 1)")
        return idx

    def __call__(self, x):
        return self.pieces[self.piece_index(x)](x)


class _Lo:
    """Sort key wrapping exact bounds (comparison needs only __lt__)."""

    __slots__ = ("v",)

    def __init__(self, p: Piece):
        self.v = p.lo

    def __lt__(self, other):
        return self.v < other.v


def iterate(f: IntervalMap, x, k: int) -> list:
    """The orbit (x, f x, ..., f^k x), in exact arithmetic for exact input."""
    orbit = [x]
    for _ in range(k):
        orbit.append(f(orbit[-1]))
    return orbit


# -- measure preservation ----------------------------------------------------


def preserves_measure(pieces: tuple[Piece, ...]) -> bool | None:
    """Exact Lebesgue-preservation check for affine pieces; None if non-affine.

    The pushforward density at y is the sum of 1/|slope| over pieces whose
    image covers y; the map preserves measure iff that sum is 1 on every cell
    of the image arrangement.
    """
    if any(not p.affine for p in pieces):
        return None
    spans = []
    for p in pieces:
        if p.a == 0:
            return False
        ylo, yhi = p(p.lo), p(p.hi)
        if ylo > yhi:
            ylo, yhi = yhi, ylo
        if ylo < 0 or yhi > 1:
            return False
        spans.append((ylo, yhi, ONE / abs(p.a)))
    cuts = sorted({c for span in spans for c in span[:2]} | {ZERO, ONE})
    for c1, c2 in zip(cuts, cuts[1:]):
        density = sum((w for ylo, yhi, w in spans if ylo <= c1 and c2 <= yhi), ZERO)
        if density != 1:
            return False
    return True


# -- built-in maps -----------------------------------------------------------


def builtin(name: str, param=None) -> IntervalMap:
    """Construct a named map: rotation, doubling, tent, or logistic.

    Rotations take an offset in (0, 1); rational offsets are periodic and the
    map is flagged not almost aperiodic, while a Q(sqrt2) offset gives the
    aperiodic rotation family.  Logistic accepts only the parameter 4 and is
    the one non-affine, non-measure-preserving inhabitant.
    """
    if name == "rotation":
        if param is None:
            raise ValueError("rotation needs an offset in (0, 1)")
        alpha = param if isinstance(param, Sqrt2) else Fraction(param)
        if not 0 < alpha < 1:
            raise ValueError(f"rotation offset must lie in (0, 1), got {alpha}")
        pieces = (
            Piece(ZERO, 1 - alpha, ONE, alpha),
            Piece(1 - alpha, ONE, ONE, alpha - 1),
        )
        return IntervalMap(
            pieces,
            name=f"rotation({exact_str(alpha)})",
            measure_preserving=True,
            almost_aperiodic=isinstance(alpha, Sqrt2),
        )
    if name == "doubling":
        half = Fraction(1, 2)
        pieces = (Piece(ZERO, half, Fraction(2), ZERO), Piece(half, ONE, Fraction(2), -ONE))
        return IntervalMap(pieces, name="doubling", measure_preserving=True, almost_aperiodic=True)
    if name == "tent":
        half = Fraction(1, 2)
        pieces = (Piece(ZERO, half, Fraction(2), ZERO), Piece(half, ONE, Fraction(-2), Fraction(2)))
        return IntervalMap(pieces, name="tent", measure_preserving=True, almost_aperiodic=True)
    if name == "logistic":
        if param is not None and Fraction(param) != 4:
            raise ValueError("only the logistic map with parameter 4 is supported")
        pieces = (Piece(ZERO, ONE, Fraction(4), ZERO, Fraction(-4)),)
        return IntervalMap(pieces, name="logistic(4)", measure_preserving=False, almost_aperiodic=True)
    raise UnknownBuiltin(f"no builtin named {name!r}")


def parse_map_spec(spec: str) -> IntervalMap:
    """CLI-facing map reference: 'doubling', 'rotation:3/10', 'logistic', ..."""
    if ":" in spec:
        name, raw = spec.split(":", 1)
        return builtin(name, parse_exact(raw))
    return builtin(spec)


# -- block sums ---------------------------------------------------------------


def _rescale_piece(p: Piece, shift: Exact, scale: Exact) -> Piece:
    """Conjugate a piece by x -> shift + scale * x (scale > 0)."""
    # y = shift + scale * q((x - shift) / scale) for q(u) = c u^2 + a u + b.
    c = p.c / scale if p.c != 0 else ZERO
    a = p.a - 2 * p.c * shift / scale if p.c != 0 else p.a
    b = p.c * shift * shift / scale - p.a * shift + scale * p.b + shift
    return Piece(shift + scale * p.lo, shift + scale * p.hi, a, b, c)


def block_sum(f: IntervalMap, g: IntervalMap, t) -> IntervalMap:
    """Run f on [0, t) and g on [t, 1), each rescaled into its block.

    Orbits never leave their block, so the pattern distribution of the sum is
    the t : (1-t) convex combination of the constituents', exactly.
    """
    t = t if isinstance(t, Sqrt2) else Fraction(t)
    if not 0 < t < 1:
        raise ValueError(f"block weight must lie strictly between 0 and 1, got {t}")
    left = [_rescale_piece(p, ZERO, t) for p in f.pieces]
    right = [_rescale_piece(p, t, 1 - t) for p in g.pieces]
    rotated = None
    if f.rotated_piece is not None:
        rotated = f.rotated_piece
    elif g.rotated_piece is not None:
        rotated = len(left) + g.rotated_piece
    return IntervalMap(
        tuple(left + right),
        name=f"block_sum({f.name}, {g.name}, {t})",
        measure_preserving=f.measure_preserving and g.measure_preserving,
        almost_aperiodic=f.almost_aperiodic and g.almost_aperiodic,
        rotated_piece=rotated,
    )


# -- cyclic rankings and permutation maps -------------------------------------


@dataclass(frozen=True)
class CyclicRanking:
    """A bijection of cycle positions to ranks realizing a loop's windows."""

    length: int
    rank: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.rank) != list(range(1, self.length + 1)):
            raise ValueError("rank must be a bijection onto 1..length")


def ranking_realizes(r: CyclicRanking, gamma: DiPath) -> bool:
    """Whether every cyclic window of ranks reproduces the matching edge."""
    ell, w = r.length, gamma.n + 1
    if ell != gamma.length:
        return False
    for b, e in enumerate(gamma.edges):
        window = tuple(r.rank[(b + t) % ell] for t in range(w))
        if len(set(window)) != w or order_pattern(window) != e:
            return False
    return True


def cyclic_lift(gamma: DiPath, cap: int = CYCLIC_LIFT_MAX) -> CyclicRanking:
    """Rank the positions of a driftless loop so all cyclic windows match.

    Window constraints give strict comparisons between positions mod the loop
    length; any consistent ranking works, so one topological sort of the
    constraint digraph suffices and failure (a directed cycle) is reported as
    an obstruction rather than glossed over.
    """
    gamma.require_loop()
    cls = classify_loop(gamma)
    if cls not in (DRIFTLESS, TOTALLY_DRIFTLESS):
        raise CyclicObstruction(f"loop classifies as {cls}; it cannot close up cyclically")
    ell = gamma.length
    if ell > cap:
        raise CapExceeded(f"loop length {ell} exceeds cyclic ranking cap {cap}")
    w = gamma.n + 1
    succs: list[set[int]] = [set() for _ in range(ell)]
    indeg = [0] * ell
    for b, e in enumerate(gamma.edges):
        word = e.word
        for cslot in range(w):
            for dslot in range(cslot + 1, w):
                p1, p2 = (b + cslot) % ell, (b + dslot) % ell
                if p1 == p2:
                    raise CyclicObstruction("a window wraps onto itself (loop shorter than window)")
                lowpos, highpos = (p1, p2) if word[cslot] < word[dslot] else (p2, p1)
                if highpos not in succs[lowpos]:
                    succs[lowpos].add(highpos)
                    indeg[highpos] += 1
    ready = [i for i in range(ell) if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for u in sorted(succs[v]):
            indeg[u] -= 1
            if indeg[u] == 0:
                heapq.heappush(ready, u)
    if len(order) < ell:
        raise CyclicObstruction("window constraints force a cyclic chain of inequalities")
    rank = [0] * ell
    for position_rank, pos in enumerate(order, start=1):
        rank[pos] = position_rank
    ranking = CyclicRanking(ell, tuple(rank))
    assert ranking_realizes(ranking, gamma), "ranking must reproduce the loop's windows"
    return ranking


def permutation_map(r: CyclicRanking) -> IntervalMap:
    """Translate equal pieces of [0,1) along the temporal cycle of a ranking.

    The piece of rank r(i) is translated onto the piece of rank r(i+1); the
    final transition additionally rotates within its target piece by
    (sqrt(2)-1)/l, so the map stays measure preserving, keeps each piece's
    image a single piece, and loses all rational periodicity.
    """
    ell = r.length
    width = Fraction(1, ell)
    delta = exact(Fraction(-1, ell), Fraction(1, ell))  # (sqrt2 - 1) / ell
    pieces: list[Piece] = []
    for i in range(ell):
        src, dst = r.rank[i], r.rank[(i + 1) % ell]
        lo = Fraction(src - 1, ell)
        hi = Fraction(src, ell)
        shift = Fraction(dst - src, ell)
        if i < ell - 1:
            pieces.append(Piece(lo, hi, ONE, shift))
        else:
            cut = hi - delta
            pieces.append(Piece(lo, cut, ONE, shift + delta))
            pieces.append(Piece(cut, hi, ONE, shift + delta - width))
    # After sorting, the rotated transition sits at the index of its source
    # piece: ranks below it contribute one piece each.
    label = ",".join(map(str, r.rank)) if ell <= 16 else f"{ell} pieces"
    result = IntervalMap(
        tuple(pieces),
        name=f"permutation_map({label})",
        measure_preserving=True,
        almost_aperiodic=True,
        rotated_piece=r.rank[ell - 1] - 1,
    )
    assert preserves_measure(result.pieces) is True
    return result


# -- realization of flows ------------------------------------------------------


def _euler_circuit(edges_mult: dict[Perm, int], base: Perm, n: int) -> DiPath:
    """Closed walk from base using each edge exactly its multiplicity (Hierholzer).

    Conservation of the scaled flow balances in- and out-multiplicity at every
    vertex and the component is strongly connected, so the circuit exists.
    """
    remaining = dict(edges_mult)
    adj: dict[Perm, list[Perm]] = {}
    for e in sorted(remaining, reverse=True):
        adj.setdefault(head(e), []).append(e)  # pop() consumes in sorted order

    v_stack: list[Perm] = [base]
    e_stack: list[Perm] = []
    circuit: list[Perm] = []
    while v_stack:
        v = v_stack[-1]
        out = adj.get(v, [])
        while out and remaining[out[-1]] == 0:
            out.pop()
        if out:
            e = out[-1]
            remaining[e] -= 1
            v_stack.append(tail(e))
            e_stack.append(e)
        else:
            v_stack.pop()
            if e_stack:
                circuit.append(e_stack.pop())
    circuit.reverse()
    assert all(m == 0 for m in remaining.values()), "component not connected for Euler walk"
    return DiPath(n, tuple(circuit))


def realize_flow(mu: PatternDistribution, tol) -> IntervalMap:
    """A measure-preserving map whose exact pattern distribution is tol-close to mu.

    Per connected component of the support: scale the flow to integer edge
    multiplicities, walk an Eulerian circuit beta through them, synthesize a
    totally driftless loop delta in the component, and realize beta^N delta
    as a permutation map with N chosen so the loop's counting measure lands
    within tol of the component flow (the appended delta keeps the whole loop
    totally driftless, hence cyclically rankable).  Components are then glued
    by block sums weighted by their flow masses.
    """
    flow = as_flow(mu)
    n = flow.n
    H = support_face(flow)
    comps = strongly_connected_components(H)
    built: list[tuple[Fraction, IntervalMap]] = []
    for comp in comps:
        if subgraph_drifts(Subgraph(H.n, comp.edges)).drifts:
            raise NotRealizable(f"component at {min(comp.vertices)} drifts")
        mass = sum((flow(e) for e in comp.edges), ZERO)
        weights = {e: flow(e) / mass for e in comp.edges}
        denom = math.lcm(*(w.denominator for w in weights.values()))
        mult = {e: int(w * denom) for e, w in weights.items()}
        total = sum(mult.values())
        base = min(comp.vertices)
        beta = _euler_circuit(mult, base, H.n)
        delta = synthesize_totally_driftless_loop(Subgraph(H.n, comp.edges))
        delta_counts = {e: delta.edges.count(e) for e in comp.edges}

        def error_at(k: int) -> Fraction:
            length = k * total + delta.length
            return max(
                abs(Fraction(k * mult[e] + delta_counts[e], length) - weights[e])
                for e in comp.edges
            )

        # The error at k repetitions is at most len(delta)/(k*total + len(delta)),
        # so this many repetitions certainly suffice:
        n_guaranteed = max(1, math.ceil(delta.length * (1 - tol) / (total * tol)))
        # Only loops within the cyclic ranking cap are admissible at all.
        n_cap = (CYCLIC_LIFT_MAX - delta.length) // total
        reps = next(
            (k for k in range(1, min(n_guaranteed, n_cap) + 1) if error_at(k) <= tol),
            None,
        )
        if reps is None:
            raise CapExceeded(
                f"reaching tolerance {tol} needs a loop longer than the cyclic "
                f"ranking cap {CYCLIC_LIFT_MAX}"
            )
        loop = DiPath(H.n, beta.edges * reps + delta.edges)
        ranking = cyclic_lift(loop)
        built.append((mass, permutation_map(ranking)))

    def glue(parts: list[tuple[Fraction, IntervalMap]]) -> IntervalMap:
        if len(parts) == 1:
            return parts[0][1]
        t = parts[0][0] / sum((m for m, _ in parts), ZERO)
        return block_sum(parts[0][1], glue(parts[1:]), t)

    result = glue(built)
    from .analysis import exact_distribution  # deferred: analysis imports maps

    achieved = exact_distribution(result, n).distribution
    gap = max(abs(achieved(s) - flow(s)) for s in set(achieved.mass) | set(flow.mass))
    assert gap <= tol, f"realization missed tolerance: {float(gap)} > {tol}"
    return result


# -- serialization -------------------------------------------------------------


def map_to_json(f: IntervalMap) -> str:
    pieces = []
    for p in f.pieces:
        rec = {"lo": exact_str(p.lo), "hi": exact_str(p.hi), "a": exact_str(p.a), "b": exact_str(p.b)}
        if p.c != 0:
            rec["c"] = exact_str(p.c)
        pieces.append(rec)
    payload = {
        "name": f.name,
        "measure_preserving": f.measure_preserving,
        "almost_aperiodic": f.almost_aperiodic,
        "pieces": pieces,
    }
    if f.rotated_piece is not None:
        payload["tail"] = {"piece": f.rotated_piece}
    return json.dumps(payload, sort_keys=True)


def map_from_json(text: str) -> IntervalMap:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    if "pieces" not in payload:
        raise FormatError("map JSON missing key 'pieces'")
    pieces = []
    for i, rec in enumerate(payload["pieces"]):
        missing = {"lo", "hi", "a", "b"} - set(rec)
        if missing:
            raise FormatError(f"piece {i} missing keys {sorted(missing)}")
        try:
            pieces.append(
                Piece(
                    parse_exact(rec["lo"]),
                    parse_exact(rec["hi"]),
                    parse_exact(rec["a"]),
                    parse_exact(rec["b"]),
                    parse_exact(rec.get("c", "0")),
                )
            )
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"piece {i}: {exc}") from exc
    tail_info = payload.get("tail")
    try:
        return IntervalMap(
            tuple(pieces),
            name=payload.get("name", ""),
            measure_preserving=bool(payload.get("measure_preserving", False)),
            almost_aperiodic=bool(payload.get("almost_aperiodic", False)),
            rotated_piece=None if tail_info is None else int(tail_info["piece"]),
        )
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
