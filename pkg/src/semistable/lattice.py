"""Free rank-n modules over the local ring at p sitting inside Q^n.

A Lattice stores its basis vectors in ambient coordinates.  Sublattice
generators are always expressed in the coordinates of the parent lattice.
Subspaces of the ambient Q^n are stored as canonical rref row bases.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from . import arith
from .arith import (
    INF,
    echelon_dvr,
    matvec,
    reduce_mod,
    rref,
    row_space,
    transpose,
    valuation,
)
from .errors import RankDeficient

Vec = tuple
Matrix = tuple


@dataclass(frozen=True)
class KSubspace:
    """Subspace of Q^n, held as its canonical rref row basis."""

    ambient_dim: int
    rows: Matrix

    @property
    def dim(self) -> int:
        return len(self.rows)

    @staticmethod
    def from_rows(ambient_dim: int, rows: Sequence[Vec]) -> "KSubspace":
        canon = row_space(tuple(tuple(Fraction(x) for x in r) for r in rows), None)
        return KSubspace(ambient_dim, canon)

    @staticmethod
    def full(n: int) -> "KSubspace":
        return KSubspace(n, arith.identity(n))

    @staticmethod
    def zero(n: int) -> "KSubspace":
        return KSubspace(n, ())


@dataclass(frozen=True)
class Lattice:
    """Full-rank lattice in Q^n; ``vectors`` are the basis, ambient coords."""

    dim: int
    vectors: Matrix

    @staticmethod
    def standard(n: int) -> "Lattice":
        return Lattice(n, arith.identity(n))

    @staticmethod
    def from_rows(rows: Sequence[Vec]) -> "Lattice":
        vecs = tuple(tuple(Fraction(x) for x in r) for r in rows)
        n = len(vecs)
        if any(len(r) != n for r in vecs) or arith.rank(vecs, None) != n:
            raise ValueError("lattice basis must be square and nonsingular")
        return Lattice(n, vecs)


@dataclass(frozen=True)
class Sublattice:
    """Saturated submodule of a lattice; generators in parent coordinates."""

    parent: Lattice
    vectors: Matrix  # generator vectors, rows, entries of valuation >= 0

    @property
    def rank(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True)
class ChainModuleSpace:
    """(Z/p^m)^n in lattice coordinates with distinguished submodule images."""

    prime: int
    level: int
    rank: int
    chains: tuple  # per chain, per step: tuple of generator rows over Z/p^m


@lru_cache(maxsize=None)
def _coordinate_matrix(lattice: Lattice) -> Matrix:
    """Matrix sending ambient vectors to lattice coordinates (exact)."""
    n = lattice.dim
    cols = transpose(lattice.vectors)
    aug = tuple(row + tuple(arith.identity(n)[i]) for i, row in enumerate(cols))
    red, pivots = rref(aug, None)
    if len(pivots) != n or any(c >= n for c in pivots):
        raise ValueError("lattice basis is singular")
    return tuple(row[n:] for row in red)


def to_lattice_coords(lattice: Lattice, vec: Vec) -> Vec:
    return matvec(_coordinate_matrix(lattice), tuple(Fraction(x) for x in vec))


def from_lattice_coords(lattice: Lattice, coords: Vec) -> Vec:
    n = lattice.dim
    return tuple(
        sum((Fraction(coords[k]) * lattice.vectors[k][j] for k in range(n)), Fraction(0))
        for j in range(n)
    )


def lattice_contains(lattice: Lattice, vec: Vec, p: int) -> bool:
    return all(valuation(x, p) >= 0 for x in to_lattice_coords(lattice, vec))


def lattice_equal(a: Lattice, b: Lattice, p: int) -> bool:
    """Mutual containment: each basis written in the other's coordinates is integral."""
    return all(lattice_contains(b, v, p) for v in a.vectors) and all(
        lattice_contains(a, v, p) for v in b.vectors
    )


def index_valuation(outer: Lattice, inner: Lattice, p: int) -> int:
    """Valuation of det of inner's basis in outer coordinates."""
    coords = tuple(to_lattice_coords(outer, v) for v in inner.vectors)
    _, e = echelon_dvr(coords, p)
    vals = arith.echelon_pivot_valuations(e, p)
    if len(vals) != outer.dim:
        raise ValueError("inner lattice does not have full rank")
    return int(sum(vals))


def saturate_rows(rows: Sequence[Vec], p: int) -> Matrix:
    """Basis over the local ring of (row span over Q) ∩ (integral vectors).

    Pivots are chosen with globally minimal valuation (any column), which
    keeps every elimination multiplier integral; scaling each echelon row by
    p^(-pivot valuation) then lands exactly on the saturation.
    """
    mat = [list(map(Fraction, r)) for r in rows if any(x != 0 for x in r)]
    if not mat:
        return ()
    ncols = len(mat[0])
    used: set = set()
    out = []
    r = 0
    while r < len(mat):
        best = None
        bestv = INF
        for i in range(r, len(mat)):
            for c in range(ncols):
                if c in used:
                    continue
                v = valuation(mat[i][c], p)
                if v < bestv:
                    best, bestv = (i, c), v
        if best is None or bestv is INF:
            break
        bi, bc = best
        mat[r], mat[bi] = mat[bi], mat[r]
        piv = mat[r][bc]
        for i in range(r + 1, len(mat)):
            if mat[i][bc] != 0:
                f = mat[i][bc] / piv
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        scale = Fraction(1, p ** int(bestv)) if bestv >= 0 else Fraction(p ** (-int(bestv)))
        mat[r] = [scale * x for x in mat[r]]
        used.add(bc)
        r += 1
    return tuple(tuple(row) for row in mat[:r])


def intersect(lattice: Lattice, space: KSubspace, p: int) -> Sublattice:
    """Saturated sublattice space ∩ lattice, generators in lattice coords."""
    if space.ambient_dim != lattice.dim:
        raise ValueError("ambient dimensions disagree")
    coords = tuple(to_lattice_coords(lattice, row) for row in space.rows)
    return Sublattice(lattice, saturate_rows(coords, p))


def reduce_lattice(
    lattice: Lattice,
    chains: Sequence[Sequence[KSubspace]],
    p: int,
    m: int,
) -> ChainModuleSpace:
    """(Z/p^m)^n in lattice coordinates with the image of each chain step."""
    q = p ** m
    out_chains = []
    for chain in chains:
        steps = []
        for space in chain:
            gens = intersect(lattice, space, p).vectors
            reduced = tuple(
                tuple(reduce_mod(x, p, m) for x in g) for g in gens
            )
            steps.append(tuple(g for g in reduced if any(v % q for v in g)))
        out_chains.append(tuple(steps))
    return ChainModuleSpace(p, m, lattice.dim, tuple(out_chains))


def elementary_modification(
    lattice: Lattice, btilde_rows: Sequence[Vec], p: int, m: int
) -> Lattice:
    """Kernel of lattice -> (lattice / p^m) / span(btilde) as a new lattice.

    btilde_rows generate the target submodule of (Z/p^m)^n in lattice
    coordinates; the result is spanned by integral lifts of these generators
    together with p^m times the old basis.
    """
    n = lattice.dim
    q = p ** m
    rows = [tuple(int(x) % q for x in r) for r in btilde_rows]
    rows = [r for r in rows if any(r)]
    if rows and arith.rank(arith.mat_mod(tuple(rows), p), p) != len(rows):
        raise RankDeficient(
            "generators do not reduce to independent vectors mod p, "
            "so the quotient is not flat"
        )
    gens = [tuple(Fraction(x) for x in r) for r in rows]
    gens += [
        tuple(Fraction(q if i == j else 0) for j in range(n)) for i in range(n)
    ]
    _, e = echelon_dvr(tuple(gens), p)
    basis_coords = tuple(row for row in e if any(x != 0 for x in row))
    if len(basis_coords) != n:
        raise RankDeficient("modification did not produce a full-rank lattice")
    vectors = tuple(from_lattice_coords(lattice, row) for row in basis_coords)
    return Lattice(n, vectors)
