"""Permutations, order patterns, restrictions, and pattern distributions.

A ``Perm`` is a permutation of [n] in one-line notation: ``word[i]`` is the
rank of the i-th entry among all n entries.  Order patterns of real tuples,
the head/tail restrictions (drop the last or first entry and re-rank), and
probability distributions on S_n are the currency every other module trades
in.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

from .caps import perm_cap
from .errors import CapExceeded, DuplicateValue, LengthMismatch, LengthTooSmall
from .exactnum import Exact

HEAD = "head"
TAIL = "tail"

# Tolerances for floating-point distributions.
FLOAT_TOTAL_TOL = 1e-12
FLOAT_ENTRY_TOL = 1e-9


@dataclass(frozen=True, order=True)
class Perm:
    """A permutation of [n] = {1, ..., n} in one-line notation."""

    word: tuple[int, ...]

    def __post_init__(self):
        n = len(self.word)
        if n < 1:
            raise ValueError("a permutation needs length at least 1")
        cap = perm_cap()
        if n > cap:
            raise CapExceeded(f"permutation length {n} exceeds cap {cap}")
        if sorted(self.word) != list(range(1, n + 1)):
            raise ValueError(f"{self.word} is not a permutation of 1..{n}")

    @property
    def n(self) -> int:
        return len(self.word)

    def __call__(self, i: int) -> int:
        """The rank sigma(i), 1-indexed."""
        return self.word[i - 1]

    def position_of(self, rank: int) -> int:
        """sigma^{-1}(rank), 1-indexed."""
        return self.word.index(rank) + 1

    def __str__(self) -> str:
        if self.n <= 9:
            return "".join(str(v) for v in self.word)
        return ",".join(str(v) for v in self.word)

    @classmethod
    def parse(cls, text: str) -> "Perm":
        s = text.strip()
        if "," in s:
            return cls(tuple(int(t) for t in s.split(",")))
        return cls(tuple(int(ch) for ch in s))


def perm(spec) -> Perm:
    """Convenience constructor: perm('2413'), perm((2,4,1,3)) or perm(p)."""
    if isinstance(spec, Perm):
        return spec
    if isinstance(spec, str):
        return Perm.parse(spec)
    return Perm(tuple(spec))


def order_pattern(values: Sequence) -> Perm:
    """The permutation ranking a tuple of pairwise distinct values.

    Entry i of the result is the rank of ``values[i]`` (1 = smallest).
    """
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    for a, b in zip(order, order[1:]):
        if not values[a] < values[b]:
            raise DuplicateValue(f"values at positions {a} and {b} compare equal")
    ranks = [0] * n
    for r, i in enumerate(order, start=1):
        ranks[i] = r
    return Perm(tuple(ranks))


def restrict(sigma: Perm, side: str) -> Perm:
    """Drop the last (head) or first (tail) entry and re-rank.

    These are the two endpoint maps of the permutation digraph: an edge
    sigma in S_{n+1} runs from restrict(sigma, HEAD) to restrict(sigma, TAIL).
    """
    if sigma.n < 2:
        raise LengthTooSmall("cannot restrict a permutation of length 1")
    if side == HEAD:
        return order_pattern(sigma.word[:-1])
    if side == TAIL:
        return order_pattern(sigma.word[1:])
    raise ValueError(f"side must be {HEAD!r} or {TAIL!r}, got {side!r}")


def all_perms(n: int) -> Iterator[Perm]:
    """S_n in lexicographic order."""
    cap = perm_cap()
    if n > cap:
        raise CapExceeded(f"S_{n} enumeration exceeds cap {cap}")
    for word in itertools.permutations(range(1, n + 1)):
        yield Perm(word)


def preimages(sigma: Perm, side: str) -> list[Perm]:
    """The n+1 permutations of S_{n+1} restricting to sigma on the given side.

    For the head side these append a new final rank v and bump all existing
    ranks >= v; for the tail side they prepend.
    """
    n = sigma.n
    out = []
    for v in range(1, n + 2):
        bumped = tuple(w + 1 if w >= v else w for w in sigma.word)
        if side == HEAD:
            out.append(Perm(bumped + (v,)))
        elif side == TAIL:
            out.append(Perm((v,) + bumped))
        else:
            raise ValueError(f"side must be {HEAD!r} or {TAIL!r}, got {side!r}")
    return out


def _validate_masses(n: int, mass: Mapping[Perm, object], exact_mode: bool) -> dict:
    clean = {}
    total = Fraction(0) if exact_mode else 0.0
    for sigma, m in mass.items():
        if sigma.n != n:
            raise LengthMismatch(f"mass on {sigma} in a length-{n} distribution")
        if m < 0:
            raise ValueError(f"negative mass {m} on {sigma}")
        if m == 0:
            continue
        clean[sigma] = m
        total += m
    if exact_mode:
        if total != 1:
            raise ValueError(f"total mass {total} != 1")
    elif abs(total - 1.0) > FLOAT_TOTAL_TOL:
        raise ValueError(f"total mass {total} deviates from 1 beyond {FLOAT_TOTAL_TOL}")
    return clean


@dataclass(frozen=True)
class PatternDistribution:
    """A probability distribution on S_n.

    ``exact`` distributions carry Fraction (or Q(sqrt2)) masses compared with
    exact equality; float distributions use the module tolerances.  Zero
    masses are not stored.
    """

    n: int
    mass: Mapping[Perm, Exact | float]
    exact: bool = True

    def __post_init__(self):
        clean = _validate_masses(self.n, self.mass, self.exact)
        object.__setattr__(self, "mass", clean)

    def __call__(self, sigma: Perm):
        zero = Fraction(0) if self.exact else 0.0
        return self.mass.get(sigma, zero)

    def support(self) -> frozenset[Perm]:
        return frozenset(self.mass)

    @classmethod
    def point_mass(cls, sigma: Perm) -> "PatternDistribution":
        return cls(sigma.n, {sigma: Fraction(1)})

    @classmethod
    def uniform(cls, n: int, exact: bool = True) -> "PatternDistribution":
        perms = list(all_perms(n))
        if exact:
            w = Fraction(1, len(perms))
            return cls(n, {s: w for s in perms})
        return cls(n, {s: 1.0 / len(perms) for s in perms}, exact=False)

    def close_to(self, other: "PatternDistribution", tol: float = FLOAT_ENTRY_TOL) -> bool:
        """Entrywise equality: exact when both sides are exact, else within tol."""
        if self.n != other.n:
            raise LengthMismatch(f"lengths {self.n} and {other.n}")
        keys = set(self.mass) | set(other.mass)
        if self.exact and other.exact:
            return all(self(s) == other(s) for s in keys)
        return all(abs(float(self(s)) - float(other(s))) <= tol for s in keys)


def pushforward(mu: PatternDistribution, side: str) -> PatternDistribution:
    """Project a distribution on S_{n+1} down to S_n along a restriction.

    The mass of sigma is the total mass of its preimages, so the result is
    again a probability distribution.
    """
    if mu.n < 2:
        raise LengthTooSmall("cannot push a length-1 distribution down")
    out: dict[Perm, object] = {}
    for sigma, m in mu.mass.items():
        tgt = restrict(sigma, side)
        out[tgt] = out.get(tgt, Fraction(0) if mu.exact else 0.0) + m
    return PatternDistribution(mu.n - 1, out, exact=mu.exact)


def is_compatible(mu: PatternDistribution, mu_next: PatternDistribution) -> bool:
    """Whether mu is the head-pushforward of mu_next (lengths n and n+1)."""
    if mu_next.n != mu.n + 1:
        raise LengthMismatch(f"lengths {mu.n} and {mu_next.n} do not differ by one")
    return pushforward(mu_next, HEAD).close_to(mu)


# -- CSV interchange -------------------------------------------------------
#
# Header ``perm,mass``; one row per permutation with nonzero mass; masses are
# 'p/q' rational strings (exact) or decimal strings (float).


def distribution_to_csv(mu: PatternDistribution) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["perm", "mass"])
    for sigma in sorted(mu.mass):
        m = mu.mass[sigma]
        w.writerow([str(sigma), str(m) if mu.exact else repr(float(m))])
    return buf.getvalue()


def distribution_from_csv(text: str) -> PatternDistribution:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["perm", "mass"]:
        raise LengthMismatch("distribution CSV must start with header 'perm,mass'")
    mass: dict[Perm, object] = {}
    exact_mode = True
    n = None
    for row in rows[1:]:
        if not row:
            continue
        sigma = Perm.parse(row[0])
        n = sigma.n if n is None else n
        raw = row[1].strip()
        if "/" in raw or raw.lstrip("+-").isdigit():
            value: object = Fraction(raw)
        else:
            value = float(raw)
            exact_mode = False
        mass[sigma] = value
    if n is None:
        raise LengthMismatch("distribution CSV has no rows")
    if not exact_mode:
        # A single decimal entry demotes the whole file to float arithmetic.
        mass = {s: float(m) for s, m in mass.items()}
    return PatternDistribution(n, mass, exact=exact_mode)
