"""Multi-filtered vector spaces over F_p or Q.

A subspace is a canonical rref row basis (a tuple of rows, zero rows
dropped); the zero subspace is the empty tuple.  A chain is a tuple of
subspaces starting at the full space and ending at zero, decreasing along
the way.  ``prime`` is None for exact rationals and the prime p otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Iterator, Optional, Sequence

from . import arith
from .arith import gaussian_binomial, rank, row_space, rref, subspace_total
from .errors import (
    EnumerationTooLarge,
    NotContained,
    UniquenessViolation,
    ZeroDimensional,
)

Vec = tuple
Matrix = tuple
Chain = tuple  # tuple of subspaces


@dataclass(frozen=True)
class FilteredSpace:
    """Vector space of dimension ``dim`` with finitely many chains."""

    dim: int
    prime: Optional[int]
    chains: tuple  # tuple of Chain


def make_chain(n: int, p: Optional[int], steps: Sequence[Matrix]) -> Chain:
    """Normalize interior steps into a full chain (prepend V, append 0)."""
    full = row_space(arith.identity(n), p)
    chain = [full]
    for s in steps:
        canon = row_space(tuple(s), p)
        if not contains_space(chain[-1], canon, p):
            raise ValueError("chain steps must be decreasing")
        chain.append(canon)
    if chain[-1] != ():
        chain.append(())
    return tuple(chain)


def filtered_space(
    n: int, p: Optional[int], step_chains: Sequence[Sequence[Matrix]]
) -> FilteredSpace:
    return FilteredSpace(n, p, tuple(make_chain(n, p, c) for c in step_chains))


# ---------------------------------------------------------------------------
# subspace computations over a field

def contains_space(big: Matrix, small: Matrix, p: Optional[int]) -> bool:
    if not small:
        return True
    if not big:
        return False
    return rank(big + small, p) == rank(big, p)


def intersect_spaces(a: Matrix, b: Matrix, n: int, p: Optional[int]) -> Matrix:
    """Canonical basis of span(a) ∩ span(b)."""
    if not a or not b:
        return ()
    eqs = tuple(
        tuple(r[c] for r in a) + tuple(-Fraction(r[c]) if p is None else (-r[c]) % p for r in b)
        for c in range(n)
    )
    ker = arith.kernel_field(eqs, p)
    rows = []
    for z in ker:
        x = z[: len(a)]
        rows.append(tuple(
            sum(c * row[j] for c, row in zip(x, a)) for j in range(n)
        ))
    return row_space(tuple(rows), p)


def quotient_image(rows: Matrix, w: Matrix, n: int, p: Optional[int]) -> Matrix:
    """Canonical basis of the image of span(rows) in V / span(w).

    Coordinates on the quotient are the non-pivot columns of w after
    reduction by w's rref rows.
    """
    _, pivots = rref(w, p) if w else ((), ())
    free = [c for c in range(n) if c not in pivots]
    out = []
    for v in rows:
        v = list(v)
        for r, c in enumerate(pivots):
            f = v[c]
            if f != 0:
                v = [arith._field_norm(x - f * y, p) for x, y in zip(v, w[r])]
        out.append(tuple(v[c] for c in free))
    return row_space(tuple(out), p)


def subspace_in_coords(space: Matrix, basis: Matrix, p: Optional[int]) -> Matrix:
    """Rewrite span(space) in the coordinates given by basis rows."""
    out = []
    for v in space:
        coeffs = arith.solve_field(arith.transpose(basis), v, p)
        if coeffs is None:
            raise NotContained("vector outside the coordinate basis span")
        out.append(coeffs)
    return row_space(tuple(out), p)


# ---------------------------------------------------------------------------
# weight and slope

def weight(x: FilteredSpace) -> int:
    """Sum over chains and levels j >= 1 of dim Fil^j."""
    return sum(len(step) for chain in x.chains for step in chain[1:])


def slope(x: FilteredSpace) -> Fraction:
    if x.dim == 0:
        raise ZeroDimensional("slope of the zero space")
    return Fraction(weight(x), x.dim)


def subspace_weight(x: FilteredSpace, w: Matrix) -> int:
    n, p = x.dim, x.prime
    total = 0
    for chain in x.chains:
        for step in chain[1:]:
            if not step or not w:
                continue
            total += len(w) + len(step) - rank(w + step, p)
    return total


def subspace_slope(x: FilteredSpace, w: Matrix) -> Fraction:
    if not w:
        raise ZeroDimensional("slope of the zero subspace")
    return Fraction(subspace_weight(x, w), len(w))


def induced_sub(x: FilteredSpace, w: Matrix) -> FilteredSpace:
    """Filtration cut down to span(w), expressed in w's own coordinates."""
    n, p = x.dim, x.prime
    if not contains_space(row_space(arith.identity(n), p), w, p):
        raise NotContained("subspace not inside the ambient space")
    chains = []
    for chain in x.chains:
        steps = []
        for step in chain:
            inter = intersect_spaces(step, w, n, p) if w else ()
            steps.append(subspace_in_coords(inter, w, p) if w else ())
        chains.append(tuple(steps))
    return FilteredSpace(len(w), p, tuple(chains))


def induced_quotient(x: FilteredSpace, w: Matrix) -> FilteredSpace:
    n, p = x.dim, x.prime
    if w and arith.rank(w, p) != len(w):
        raise NotContained("subspace basis must be independent")
    chains = []
    for chain in x.chains:
        chains.append(tuple(quotient_image(step, w, n, p) for step in chain))
    return FilteredSpace(n - len(w), p, tuple(chains))


# ---------------------------------------------------------------------------
# subspace enumeration over F_p

def enumerate_subspaces(
    p: int, n: int, d: Optional[int] = None, cap: int = 10 ** 6
) -> Iterator[Matrix]:
    """Yield every subspace of F_p^n (of dimension d, or all) exactly once.

    Subspaces come out as rref bases, ordered by dimension, then pivot
    pattern, then free entries counted in base p.
    """
    total = subspace_total(n, p, d)
    if total > cap:
        raise EnumerationTooLarge(f"{total} subspaces exceeds cap {cap}")
    dims = [d] if d is not None else list(range(n + 1))
    for dim in dims:
        if dim == 0:
            yield ()
            continue
        for pivots in combinations(range(n), dim):
            freepos = [
                (i, c)
                for i in range(dim)
                for c in range(pivots[i] + 1, n)
                if c not in pivots
            ]
            for values in product(range(p), repeat=len(freepos)):
                rows = [[0] * n for _ in range(dim)]
                for i, c in enumerate(pivots):
                    rows[i][c] = 1
                for (i, c), v in zip(freepos, values):
                    rows[i][c] = v
                yield tuple(tuple(r) for r in rows)


@lru_cache(maxsize=32)
def _all_subspaces(p: int, n: int, cap: int) -> tuple:
    return tuple(enumerate_subspaces(p, n, None, cap))


def is_semistable(x: FilteredSpace, cap: int = 10 ** 6):
    """Brute-force test; returns (verdict, witness or None)."""
    if x.prime is None:
        raise ValueError("brute-force semistability needs a finite field")
    mu = slope(x)
    for w in _all_subspaces(x.prime, x.dim, cap):
        if not w or len(w) == x.dim:
            continue
        if subspace_slope(x, w) > mu:
            return False, w
    return True, None


def max_destabilizer(x: FilteredSpace, cap: int = 10 ** 6) -> Matrix:
    """Nonzero subspace maximizing (slope, dim) lexicographically.

    On semistable input the maximizer is the whole space.  Uniqueness of the
    maximizer is asserted on every call; a tie raises UniquenessViolation.
    """
    if x.prime is None:
        raise ValueError("destabilizer search needs a finite field")
    best = None
    best_key = None
    tie = None
    for w in _all_subspaces(x.prime, x.dim, cap):
        if not w:
            continue
        key = (subspace_slope(x, w), len(w))
        if best_key is None or key > best_key:
            best, best_key, tie = w, key, None
        elif key == best_key:
            tie = w
    if tie is not None:
        raise UniquenessViolation(
            f"two subspaces attain (slope, dim) = {best_key}: {best} and {tie} "
            f"on chains {x.chains}"
        )
    return best


# ---------------------------------------------------------------------------
# generic fiber (over Q): exact where possible, else reduction at a spare prime

AUX_PRIMES = (5, 7, 11, 13)


@dataclass(frozen=True)
class GenericCheck:
    semistable: Optional[bool]  # None = could not certify either way
    method: str
    detail: str = ""


def _single_chain_semistable(n: int, chain) -> tuple:
    dims = [space.dim for space in chain[1:]]
    mu = Fraction(sum(dims), n)
    worst = None
    for d in range(1, n + 1):
        s = Fraction(sum(min(d, f) for f in dims), d)
        if s > mu and (worst is None or s > worst[0]):
            worst = (s, d)
    return worst is None, worst


def _coordinate_supports(chains) -> Optional[list]:
    supports = []
    for chain in chains:
        levels = []
        for space in chain:
            cols = []
            for row in space.rows:
                nz = [c for c, x in enumerate(row) if x != 0]
                if len(nz) != 1 or row[nz[0]] != 1:
                    return None
                cols.append(nz[0])
            levels.append(frozenset(cols))
        supports.append(levels)
    return supports


def generic_semistable(n: int, chains, skip_primes=()) -> GenericCheck:
    """Best-effort semistability of the generic fiber (chains of KSubspace).

    Exact for a single chain and for chains of standard coordinate
    subspaces; otherwise certified through reduction at a spare prime, which
    is sound when it answers "semistable" and inconclusive when not.
    """
    if len(chains) == 1:
        ok, worst = _single_chain_semistable(n, chains[0])
        detail = "" if ok else f"a {worst[1]}-dim subspace reaches slope {worst[0]}"
        return GenericCheck(ok, "single-chain profile maximization", detail)

    supports = _coordinate_supports(chains)
    if supports is not None:
        mu = Fraction(sum(len(s) for lv in supports for s in lv[1:]), n)
        for size in range(1, n + 1):
            for subset in combinations(range(n), size):
                t = frozenset(subset)
                w = sum(len(t & s) for lv in supports for s in lv[1:])
                if Fraction(w, size) > mu:
                    return GenericCheck(
                        False,
                        "coordinate-subspace enumeration",
                        f"coordinates {sorted(t)} reach slope {Fraction(w, size)}",
                    )
        return GenericCheck(True, "coordinate-subspace enumeration")

    from .lattice import Lattice, reduce_lattice  # no cycle at import time

    for q in AUX_PRIMES:
        if q in skip_primes:
            continue
        module = reduce_lattice(Lattice.standard(n), chains, q, 1)
        red = FilteredSpace(
            n,
            q,
            tuple(
                tuple(row_space(step, q) for step in chain)
                for chain in module.chains
            ),
        )
        try:
            ok, _ = is_semistable(red)
        except EnumerationTooLarge:
            continue
        if ok:
            return GenericCheck(True, f"verified over F_{q} reduction", f"p'={q}")
    return GenericCheck(
        None,
        "reduction checks inconclusive",
        f"unstable at every spare prime tried {AUX_PRIMES}",
    )
