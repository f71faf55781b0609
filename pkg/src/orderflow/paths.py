"""Paths on permutation digraphs and their posets.

A path of length l on G_n is determined by its edge sequence (each edge in
S_{n+1}, consecutive windows agreeing); it constrains l + n real values, and
the poset of forced order relations among them decides exactly which
permutations of S_{l+n} project onto the path.  Lifts of a path are the
linear extensions of its poset, which is the central oracle equivalence the
test suite leans on.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Literal, Sequence

from .caps import EXTENSION_COUNT_MAX, EXTENSION_ENUM_MAX, LIFT_ENUM_MAX
from .errors import CapExceeded, EndpointMismatch, FormatError, NotALoop
from .perms import HEAD, TAIL, Perm, perm, restrict


@dataclass(frozen=True)
class DiPath:
    """A path on G_n as an edge sequence; a length-0 path stores its vertex."""

    n: int
    edges: tuple[Perm, ...]
    start: Perm | None = None

    def __post_init__(self):
        if not self.edges:
            if self.start is None or self.start.n != self.n:
                raise ValueError("a length-0 path needs its single vertex of length n")
            return
        if self.start is not None:
            if self.start != restrict(self.edges[0], HEAD):
                raise ValueError("explicit start vertex disagrees with the first edge")
            object.__setattr__(self, "start", None)  # derived; keep equality canonical
        for e in self.edges:
            if e.n != self.n + 1:
                raise ValueError(f"edge {e} has length {e.n}, expected {self.n + 1}")
        for a, b in zip(self.edges, self.edges[1:]):
            if restrict(a, TAIL) != restrict(b, HEAD):
                raise ValueError(f"consecutive edges {a}, {b} disagree on their shared vertex")

    @property
    def length(self) -> int:
        return len(self.edges)

    def vertices(self) -> tuple[Perm, ...]:
        if not self.edges:
            return (self.start,)
        verts = [restrict(self.edges[0], HEAD)]
        verts.extend(restrict(e, TAIL) for e in self.edges)
        return tuple(verts)

    @property
    def first_vertex(self) -> Perm:
        return self.start if not self.edges else restrict(self.edges[0], HEAD)

    @property
    def last_vertex(self) -> Perm:
        return self.start if not self.edges else restrict(self.edges[-1], TAIL)

    @property
    def is_loop(self) -> bool:
        return self.length >= 1 and self.first_vertex == self.last_vertex

    def require_loop(self) -> "DiPath":
        if not self.is_loop:
            raise NotALoop(f"path from {self.first_vertex} to {self.last_vertex} is not a loop")
        return self

    def __mul__(self, other: "DiPath") -> "DiPath":
        return concat(self, other)

    def __pow__(self, k: int) -> "DiPath":
        self.require_loop()
        if k < 1:
            raise ValueError("loop powers need k >= 1")
        return DiPath(self.n, self.edges * k)

    def rotate(self, k: int) -> "DiPath":
        """The same loop traversed starting k edges later."""
        self.require_loop()
        k %= self.length
        return DiPath(self.n, self.edges[k:] + self.edges[:k])


def path(n: int, edges: Sequence, start=None) -> DiPath:
    return DiPath(n, tuple(perm(e) for e in edges), None if start is None else perm(start))


def concat(p: DiPath, q: DiPath) -> DiPath:
    if p.n != q.n:
        raise EndpointMismatch(f"paths live on G_{p.n} and G_{q.n}")
    if p.last_vertex != q.first_vertex:
        raise EndpointMismatch(f"cannot join at {p.last_vertex} != {q.first_vertex}")
    if not p.edges and not q.edges:
        return p
    return DiPath(p.n, p.edges + q.edges)


def _one_step_down(p: DiPath) -> DiPath:
    # The vertex sequence becomes the edge sequence one level down.
    return DiPath(p.n - 1, p.vertices())


def project(obj: Perm | DiPath, n: int) -> DiPath:
    """Iterated one-step projection down to G_n.

    A permutation sigma of S_m is a length-0 path on G_m; its projection to
    G_n is the path of length m - n whose edges are the order patterns of the
    consecutive (n+1)-windows of sigma.
    """
    if n < 1:
        raise ValueError("target level must be at least 1")
    p = DiPath(obj.n, (), obj) if isinstance(obj, Perm) else obj
    if n > p.n:
        raise ValueError(f"cannot project a path on G_{p.n} up to G_{n}")
    while p.n > n:
        p = _one_step_down(p)
    return p


def lifts(p: DiPath, m: int, cap: int = LIFT_ENUM_MAX) -> list[Perm]:
    """All permutations of S_m projecting onto p, by brute force.

    Only the full collapse m = length + n is supported: then a lift is a
    single permutation whose (n+1)-windows realize the edges of p in order.
    Surjectivity of the projection guarantees the result is never empty.
    """
    if m != p.length + p.n:
        raise ValueError(f"need m = length + n = {p.length + p.n}, got {m}")
    if m > cap:
        raise CapExceeded(f"lift enumeration in S_{m} exceeds cap {cap}")
    windows = [e.word for e in p.edges]
    if not windows:
        return [p.start]
    w = p.n + 1
    found = []
    for cand in itertools.permutations(range(1, m + 1)):
        ok = True
        for off, pattern in enumerate(windows):
            for a in range(w):
                for b in range(a + 1, w):
                    if (cand[off + a] < cand[off + b]) != (pattern[a] < pattern[b]):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            found.append(Perm(cand))
    assert found, "path lifting is surjective; empty lift set indicates a bug"
    return found


def edges_between(u: Perm, w: Perm) -> list[Perm]:
    """All edges of G_n from u to w (both in S_n)."""
    from .perms import preimages

    return [e for e in preimages(u, HEAD) if restrict(e, TAIL) == w]


def lift_paths_one_step(p: DiPath) -> list[DiPath]:
    """All paths on G_{n+1} projecting onto p (one level up).

    The lifted vertices are forced (they are p's edges); only the lifted
    edges vary.  Defined for paths of length >= 1; the lift has length l - 1.
    """
    if p.length < 1:
        raise ValueError("only paths of positive length lift downward-determined")
    if p.length == 1:
        return [DiPath(p.n + 1, (), p.edges[0])]
    choices = [edges_between(a, b) for a, b in zip(p.edges, p.edges[1:])]
    out = []
    for combo in itertools.product(*choices):
        out.append(DiPath(p.n + 1, combo))
    return out


# -- the poset of a path -----------------------------------------------------


@dataclass(frozen=True)
class PathPoset:
    """Forced order relations among the m values realizing a path.

    ``leq`` is a tuple of m bitmasks: bit j of row i is set iff element i+1
    is <= element j+1 (1-indexed elements, 0-indexed bits).  The relation is
    reflexive, antisymmetric, and transitively closed.  ``window`` records
    the n of the originating path when there is one: every n consecutive
    elements are then totally ordered.
    """

    m: int
    leq: tuple[int, ...]
    window: int | None = None

    def __post_init__(self):
        if len(self.leq) != self.m:
            raise ValueError("leq must have one row per element")
        for i, row in enumerate(self.leq):
            if not row >> i & 1:
                raise ValueError("leq must be reflexive")
        _check_antisymmetry(self.leq)
        closed = _transitive_closure(self.leq)
        if tuple(closed) != tuple(self.leq):
            raise ValueError("leq must be transitively closed")

    def holds(self, i: int, j: int) -> bool:
        """Whether x_i <= x_j (1-indexed)."""
        return bool(self.leq[i - 1] >> (j - 1) & 1)

    def comparability(self, i: int, j: int) -> str:
        down = self.holds(i, j)
        up = self.holds(j, i)
        if down and up:
            return "equal"
        if down:
            return "leq"
        if up:
            return "geq"
        return "incomparable"

    def covers(self) -> list[tuple[int, int]]:
        """Hasse diagram as (lower, upper) pairs, 1-indexed."""
        out = []
        for i in range(self.m):
            for j in range(self.m):
                if i == j or not self.leq[i] >> j & 1:
                    continue
                strictly_between = any(
                    k != i and k != j and self.leq[i] >> k & 1 and self.leq[k] >> j & 1
                    for k in range(self.m)
                )
                if not strictly_between:
                    out.append((i + 1, j + 1))
        return out


def _check_antisymmetry(rows: Sequence[int]) -> None:
    for i, row in enumerate(rows):
        for j in range(i + 1, len(rows)):
            if row >> j & 1 and rows[j] >> i & 1:
                raise ValueError(f"elements {i + 1} and {j + 1} compare both ways")


def _transitive_closure(rows: Sequence[int]) -> list[int]:
    # Warshall on the boolean semiring with rows as bitmasks; updating in
    # place makes a single sweep over intermediate vertices sufficient.
    closed = list(rows)
    m = len(closed)
    for k in range(m):
        bit = 1 << k
        row_k = closed[k]
        for i in range(m):
            if closed[i] & bit:
                closed[i] |= row_k
    return closed


def build_poset(p: DiPath) -> PathPoset:
    """Close the edge-window total orders of a path into its poset.

    Each edge e_b totally orders the window of elements b..b+n; the vertex
    windows are implied whenever the path has an edge.  Antisymmetry of the
    closure is asserted on every build.
    """
    n = p.n
    if p.length == 0:
        m = n
        word = p.start.word
        rows = [1 << i for i in range(m)]
        for i in range(m):
            for j in range(m):
                if word[i] <= word[j]:
                    rows[i] |= 1 << j
        return PathPoset(m, tuple(rows), window=n)
    m = p.length + n
    rows = [1 << i for i in range(m)]
    for b, e in enumerate(p.edges):
        word = e.word
        for c in range(n + 1):
            for d in range(n + 1):
                if word[c] <= word[d]:
                    rows[b + c] |= 1 << (b + d)
    closed = _transitive_closure(rows)
    _check_antisymmetry(closed)
    return PathPoset(m, tuple(closed), window=n)


def comparability(p: DiPath, i: int, j: int, oracle: bool = False) -> str:
    """Relation between x_i and x_j: 'leq', 'geq', 'equal' or 'incomparable'.

    With ``oracle=True`` the answer is recomputed by enumerating every lift
    and intersecting their orders; the two methods must agree.
    """
    m = p.length + p.n
    if not (1 <= i <= m and 1 <= j <= m):
        raise ValueError(f"indices must lie in 1..{m}")
    answer = build_poset(p).comparability(i, j)
    if oracle:
        sigmas = lifts(p, m)
        down = all(s(i) <= s(j) for s in sigmas)
        up = all(s(i) >= s(j) for s in sigmas)
        brute = "equal" if down and up else "leq" if down else "geq" if up else "incomparable"
        if brute != answer:
            raise AssertionError(f"poset says {answer}, lift oracle says {brute}")
    return answer


def linear_extensions(
    P: PathPoset,
    mode: Literal["count", "enumerate"] = "count",
    enum_cap: int = EXTENSION_ENUM_MAX,
    count_cap: int = EXTENSION_COUNT_MAX,
):
    """Count or list the total-order extensions of a path poset.

    Counting runs a downset DP (memoized on the placed-set bitmask); listing
    backtracks and reports each extension as the permutation assigning ranks,
    which for a path poset is exactly a lift of the path.
    """
    preds = []
    for i in range(P.m):
        mask = 0
        for k in range(P.m):
            if k != i and P.leq[k] >> i & 1:
                mask |= 1 << k
        preds.append(mask)
    full = (1 << P.m) - 1

    if mode == "count":
        if P.m > count_cap:
            raise CapExceeded(f"extension counting beyond m = {count_cap}")
        from functools import lru_cache

        @lru_cache(maxsize=None)
        def count(placed: int) -> int:
            if placed == full:
                return 1
            total = 0
            for i in range(P.m):
                if placed >> i & 1 == 0 and preds[i] & ~placed == 0:
                    total += count(placed | 1 << i)
            return total

        return count(0)

    if mode == "enumerate":
        if P.m > enum_cap:
            raise CapExceeded(f"extension enumeration beyond m = {enum_cap}")
        out: list[Perm] = []
        order: list[int] = []

        def walk(placed: int):
            if placed == full:
                word = [0] * P.m
                for rank, elt in enumerate(order, start=1):
                    word[elt] = rank
                out.append(Perm(tuple(word)))
                return
            for i in range(P.m):
                if placed >> i & 1 == 0 and preds[i] & ~placed == 0:
                    order.append(i)
                    walk(placed | 1 << i)
                    order.pop()

        walk(0)
        return out

    raise ValueError(f"mode must be 'count' or 'enumerate', got {mode!r}")


# -- serialization ----------------------------------------------------------


def path_to_json(p: DiPath) -> str:
    payload: dict = {"n": p.n, "edges": [str(e) for e in p.edges]}
    if not p.edges:
        payload["start"] = str(p.start)
    return json.dumps(payload, sort_keys=True)


def path_from_json(text: str) -> DiPath:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    missing = {"n", "edges"} - set(payload)
    if missing:
        raise FormatError(f"path JSON missing keys {sorted(missing)}")
    start = payload.get("start")
    try:
        return path(payload["n"], payload["edges"], start)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def poset_to_json(P: PathPoset) -> str:
    return json.dumps({"m": P.m, "covers": P.covers()}, sort_keys=True)
