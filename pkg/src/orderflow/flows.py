"""The flow polytope of pattern distributions.

A distribution on S_n is an edge weighting of G_{n-1}; it is a flow when
inflow equals outflow at every vertex, which is exactly the constraint that
the two one-step pushforwards of the distribution agree.  Faces of the flow
polytope correspond to face subgraphs, vertices to embedded loops, and a face
is realizable by a measure-preserving interval map precisely when its
subgraph is driftless.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .caps import POLYTOPE_DIM_MAX
from .digraph import (
    Subgraph,
    adjacency,
    embedded_loops,
    face_dimension,
    head,
    is_face_subgraph,
    tail,
)
from .drift import subgraph_drifts
from .errors import CapExceeded, FormatError, NotAFlow, NotFaceSubgraph
from .paths import DiPath
from .perms import HEAD, TAIL, PatternDistribution, Perm, all_perms, perm, pushforward

# Distributions double as flows; ``as_flow`` is the gatekeeper.
Flow = PatternDistribution

SNAP_TOL = 1e-9
SNAP_DENOMINATOR = 10**6


def flow_residual(mu: PatternDistribution):
    """Largest conservation violation over the vertices of G_{n-1}.

    Zero iff mu is a flow.  Length-1 distributions are vacuously flows.
    """
    if mu.n < 2:
        return Fraction(0) if mu.exact else 0.0
    down = pushforward(mu, HEAD)
    up = pushforward(mu, TAIL)
    zero = Fraction(0) if mu.exact else 0.0
    worst = zero
    for v in set(down.mass) | set(up.mass):
        gap = abs(down(v) - up(v))
        if gap > worst:
            worst = gap
    return worst


def snap_to_exact(mu: PatternDistribution, tol: float = SNAP_TOL) -> tuple[PatternDistribution, float]:
    """Round float masses to nearby rationals and renormalize.

    Face membership is discontinuous, so float flows are snapped before any
    exact test.  Returns the snapped distribution and the largest per-entry
    adjustment, which must stay within ``tol``.
    """
    if mu.exact:
        return mu, 0.0
    snapped: dict[Perm, Fraction] = {}
    worst = 0.0
    for sigma, m in mu.mass.items():
        r = Fraction(m).limit_denominator(SNAP_DENOMINATOR)
        worst = max(worst, abs(float(r) - float(m)))
        if r > 0:
            snapped[sigma] = r
    if worst > tol:
        raise NotAFlow(f"snapping moved a mass by {worst}, beyond tolerance {tol}")
    total = sum(snapped.values())
    snapped = {s: m / total for s, m in snapped.items()}
    return PatternDistribution(mu.n, snapped, exact=True), worst


def as_flow(mu: PatternDistribution, tol: float = SNAP_TOL) -> PatternDistribution:
    """Validate conservation, snapping float inputs first."""
    flow, _ = snap_to_exact(mu, tol)
    residual = flow_residual(flow)
    if residual != 0:
        raise NotAFlow(f"conservation fails with residual {residual}")
    return flow


def support_face(mu: PatternDistribution) -> Subgraph:
    """The face subgraph carrying the positive-mass edges of a flow."""
    flow = as_flow(mu)
    H = Subgraph(flow.n - 1, frozenset(flow.mass))
    if not is_face_subgraph(H):
        raise NotAFlow("support of a flow must be a face subgraph")
    return H


def face_realizable(H: Subgraph) -> bool:
    """Whether the open face of H contains distributions of measure-preserving maps.

    True exactly when no connected component of H drifts.
    """
    if not is_face_subgraph(H):
        raise NotFaceSubgraph("realizability is a question about face subgraphs")
    return not subgraph_drifts(H).drifts


@dataclass(frozen=True)
class CensusRow:
    dimension: int
    total: int
    realizable: int


def census(n: int, dimensions=None, samples: int | None = None, seed: int | None = None) -> list[CensusRow]:
    """Face census of the flow polytope: per dimension, how many faces are realizable.

    Exhaustive over all edge subsets of G_{n-1} for n <= 3.  For n = 4 the
    options are ``dimensions=[0]`` (vertices, i.e. embedded loops, still
    exhaustive) or ``samples`` random edge subsets with the given seed, which
    gives a labeled non-exhaustive table.  Larger n is refused.
    """
    from .digraph import PermDigraph

    G = PermDigraph(n - 1)
    edges = sorted(G.edges())
    counts: dict[int, list[int]] = {}

    def tally(H: Subgraph):
        if not H.edges or not is_face_subgraph(H):
            return
        d = face_dimension(H)
        if dimensions is not None and d not in dimensions:
            return
        row = counts.setdefault(d, [0, 0])
        row[0] += 1
        if face_realizable(H):
            row[1] += 1

    if n <= 3:
        for mask in range(1, 1 << len(edges)):
            H = Subgraph(n - 1, frozenset(e for k, e in enumerate(edges) if mask >> k & 1))
            tally(H)
    elif n == 4 and dimensions == [0]:
        for loop_edges in embedded_loops(G.full_subgraph()):
            tally(Subgraph(n - 1, frozenset(loop_edges)))
    elif n == 4 and samples is not None:
        rng = random.Random(seed)
        for _ in range(samples):
            chosen = frozenset(e for e in edges if rng.random() < 0.5)
            tally(Subgraph(n - 1, chosen))
    else:
        raise CapExceeded(
            "census is exhaustive only for n <= 3; for n = 4 pass dimensions=[0] or samples"
        )
    return [CensusRow(d, t, r) for d, (t, r) in sorted(counts.items())]


def census_to_csv(rows: list[CensusRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dimension", "total", "realizable"])
    for row in rows:
        w.writerow([row.dimension, row.total, row.realizable])
    return buf.getvalue()


def cycle_decompose(mu: PatternDistribution) -> list[tuple[DiPath, Fraction]]:
    """Write a flow as a positive combination of embedded loops.

    Standard circulation peeling: follow positive out-edges until a vertex
    repeats, subtract the bottleneck along the extracted cycle, repeat.  Each
    round zeroes at least one edge, so at most |E| loops come back, and the
    weighted loops re-sum exactly to the input.
    """
    flow = as_flow(mu)
    if not flow.exact:
        raise NotAFlow("cycle decomposition needs exact rational weights")
    n = flow.n - 1
    residual: dict[Perm, Fraction] = dict(flow.mass)
    out: list[tuple[DiPath, Fraction]] = []

    def out_edge(v: Perm) -> Perm:
        options = [e for e in residual if head(e) == v]
        if not options:
            raise NotAFlow(f"conservation fails at {v} during decomposition")
        return min(options)

    while residual:
        start = head(min(residual))
        seen_at: dict[Perm, int] = {start: 0}
        verts = [start]
        walk: list[Perm] = []
        while True:
            e = out_edge(verts[-1])
            walk.append(e)
            w = tail(e)
            if w in seen_at:
                cycle = tuple(walk[seen_at[w] :])
                break
            seen_at[w] = len(walk)
            verts.append(w)
        weight = min(residual[e] for e in cycle)
        for e in cycle:
            residual[e] -= weight
            if residual[e] == 0:
                del residual[e]
        out.append((DiPath(n, cycle), weight))
    return out


def interior_flow(H: Subgraph) -> PatternDistribution:
    """Some flow supported on exactly H (a point of the open face).

    Built as the normalized sum of counting measures of one loop through
    each edge; which interior point comes back is arbitrary but
    deterministic.
    """
    if not is_face_subgraph(H):
        raise NotFaceSubgraph("interior points exist only for face subgraphs")
    adj = adjacency(H)
    counts: dict[Perm, int] = {}

    def shortest_path(src: Perm, dst: Perm) -> tuple[Perm, ...]:
        from collections import deque

        if src == dst:
            return ()
        seen = {src: ()}
        frontier = deque([src])
        while frontier:
            v = frontier.popleft()
            for e in adj[v]:
                w = tail(e)
                if w not in seen:
                    seen[w] = seen[v] + (e,)
                    if w == dst:
                        return seen[w]
                    frontier.append(w)
        raise NotFaceSubgraph(f"no return path from {src} to {dst}")

    for e in sorted(H.edges):
        loop = (e,) + shortest_path(tail(e), head(e))
        for f in loop:
            counts[f] = counts.get(f, 0) + 1
    total = sum(counts.values())
    masses = {e: Fraction(c, total) for e, c in counts.items()}
    return PatternDistribution(H.n + 1, masses)


def polytope_dimension(n: int) -> int:
    """Affine dimension of the flow polytope at length n, by constraint rank.

    The conservation constraints are the incidence rows of G_{n-1}; exactly
    one dependency (their sum vanishes) is expected, and the final dimension
    must come out as n! - (n-1)!.
    """
    if n < 2:
        return 0
    if n > POLYTOPE_DIM_MAX:
        raise CapExceeded(f"polytope dimension computed only up to n = {POLYTOPE_DIM_MAX}")
    verts = list(all_perms(n - 1))
    vindex = {v: i for i, v in enumerate(verts)}
    cols = list(all_perms(n))
    rows = [[0] * len(cols) for _ in verts]
    for c, e in enumerate(cols):
        rows[vindex[head(e)]][c] += 1
        rows[vindex[tail(e)]][c] -= 1

    def rank(mat: list[list[int]]) -> int:
        mat = [list(Fraction(x) for x in row) for row in mat]
        r = 0
        ncols = len(mat[0]) if mat else 0
        for c in range(ncols):
            pivot = next((i for i in range(r, len(mat)) if mat[i][c] != 0), None)
            if pivot is None:
                continue
            mat[r], mat[pivot] = mat[pivot], mat[r]
            inv = 1 / mat[r][c]
            mat[r] = [x * inv for x in mat[r]]
            for i in range(len(mat)):
                if i != r and mat[i][c] != 0:
                    f = mat[i][c]
                    mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
            r += 1
            if r == len(mat):
                break
        return r

    flow_rank = rank(rows)
    assert flow_rank == math.factorial(n - 1) - 1, "expected exactly one dependency"
    dim = math.factorial(n) - flow_rank - 1
    assert dim == math.factorial(n) - math.factorial(n - 1)
    return dim


# -- serialization ----------------------------------------------------------


def flow_to_json(mu: PatternDistribution) -> str:
    weights = {str(s): str(m) if mu.exact else repr(float(m)) for s, m in sorted(mu.mass.items())}
    return json.dumps({"n": mu.n, "weights": weights}, sort_keys=True)


def flow_from_json(text: str) -> PatternDistribution:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    missing = {"n", "weights"} - set(payload)
    if missing:
        raise FormatError(f"flow JSON missing keys {sorted(missing)}")
    mass: dict[Perm, object] = {}
    exact_mode = True
    for key, raw in payload["weights"].items():
        try:
            sigma = perm(key)
        except ValueError as exc:
            raise FormatError(f"weight key {key!r}: {exc}") from exc
        if sigma.n != payload["n"]:
            raise FormatError(f"weight key {key} has wrong length for n={payload['n']}")
        if isinstance(raw, str) and ("/" in raw or raw.lstrip("+-").isdigit()):
            mass[sigma] = Fraction(raw)
        else:
            mass[sigma] = float(raw)
            exact_mode = False
    if not exact_mode:
        mass = {s: float(m) for s, m in mass.items()}
    try:
        return PatternDistribution(payload["n"], mass, exact=exact_mode)
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
