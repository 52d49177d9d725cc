"""Enumerate multi-filtered structures of a fixed combinatorial type over F_q
and count the semistable ones.

A type fixes the number of chains s, the rank n, and for each chain a
non-decreasing jump table l_i with l_i(0) = 0 and eventual value n; the
chain steps then have dimensions n - l_i(j).  Points of the corresponding
product of flag varieties are enumerated exhaustively, no point-count
formulas are assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, List, Sequence

from .arith import gaussian_binomial, matmul, mat_mod, row_space
from .errors import EnumerationTooLarge
from .filtration import FilteredSpace, enumerate_subspaces, is_semistable

Matrix = tuple


@dataclass(frozen=True)
class TypeDatum:
    """Type (s, n; l_i) with each l_i a tuple of (j, value) jumps."""

    ident: str
    s: int
    n: int
    tables: tuple  # per chain, tuple of (j, l(j)) pairs, sorted by j

    def level_dims(self, i: int) -> tuple:
        """Chain-step dimensions (n - l(j)) for j = 0, 1, ... down to 0."""
        jumps = dict(self.tables[i])
        dims = [self.n]
        j = 1
        current = 0
        while dims[-1] > 0:
            current = max(
                [v for jj, v in self.tables[i] if jj <= j], default=current
            )
            dims.append(self.n - current)
            j += 1
        return tuple(dims)

    def validate(self) -> None:
        if self.s != len(self.tables):
            raise ValueError("number of jump tables must equal s")
        for table in self.tables:
            last_j, last_v = 0, 0
            for j, v in table:
                if j <= last_j and (j, v) != table[0]:
                    raise ValueError("jump positions must increase")
                if v < last_v or not 0 <= v <= self.n:
                    raise ValueError("jump values must be non-decreasing in [0, n]")
                last_j, last_v = j, v
            if last_v != self.n:
                raise ValueError("each table must eventually reach n")


@dataclass(frozen=True)
class FlagPoint:
    """One point of the product of flag varieties: full chains per factor."""

    chains: tuple  # per chain, tuple of subspace rref bases (V first, 0 last)


def _subspaces_inside(ambient: Matrix, d: int, q: int, cap: int) -> Iterator[Matrix]:
    """Subspaces of dimension d inside span(ambient rows)."""
    b = len(ambient)
    if d == b:
        yield ambient
        return
    if d == 0:
        yield ()
        return
    for small in enumerate_subspaces(q, b, d, cap):
        rows = matmul(small, ambient)
        yield row_space(mat_mod(rows, q), q)


def _chain_points(
    ambient: Matrix, dims: Sequence[int], q: int, cap: int
) -> Iterator[tuple]:
    if len(dims) == 1:
        yield (ambient,)
        return
    for nxt in _subspaces_inside(ambient, dims[1], q, cap):
        for rest in _chain_points(nxt, dims[1:], q, cap):
            yield (ambient,) + rest


def flag_count(q: int, t: TypeDatum) -> int:
    total = 1
    for i in range(t.s):
        dims = t.level_dims(i)
        for a, b in zip(dims, dims[1:]):
            total *= gaussian_binomial(a, b, q)
    return total


def enumerate_flags(q: int, t: TypeDatum, cap: int = 10 ** 6) -> Iterator[FlagPoint]:
    """Yield each point of the product of flag varieties over F_q once."""
    t.validate()
    total = flag_count(q, t)
    if total > cap:
        raise EnumerationTooLarge(f"{total} flag points exceeds cap {cap}")
    full = row_space(tuple(tuple(1 if i == j else 0 for j in range(t.n)) for i in range(t.n)), q)
    per_chain: List[list] = []
    for i in range(t.s):
        dims = t.level_dims(i)
        per_chain.append(list(_chain_points(full, dims, q, cap)))
    for combo in product(*per_chain):
        yield FlagPoint(tuple(combo))


def point_space(q: int, t: TypeDatum, point: FlagPoint) -> FilteredSpace:
    return FilteredSpace(t.n, q, point.chains)


def count_semistable(q: int, t: TypeDatum, cap: int = 10 ** 6) -> int:
    """Number of flag points whose filtered space is semistable."""
    count = 0
    for point in enumerate_flags(q, t, cap):
        ok, _ = is_semistable(point_space(q, t, point), cap)
        if ok:
            count += 1
    return count


def count_row(q: int, t: TypeDatum, cap: int = 10 ** 6) -> tuple:
    """(q, type id, total points, semistable points) for the CSV output."""
    total = flag_count(q, t)
    return q, t.ident, total, count_semistable(q, t, cap)
