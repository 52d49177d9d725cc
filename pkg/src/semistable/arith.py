"""Exact arithmetic kernels.

Scalars live in three places: the rationals Q carrying the p-adic valuation
(the local ring at p is the subring of nonnegative valuation), the prime
field F_p, and the finite chain rings Z/p^m.  Rationals are
``fractions.Fraction`` values; F_p and Z/p^m entries are plain ints reduced
into [0, modulus).

Matrix convention: a matrix is a tuple of row tuples.  Transform-returning
functions give (U, E) with E = U A, or (U, V, exps) with U A V diagonal.
The valuation of zero is INF (math.inf), which compares above every integer.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from operator import index
from typing import Optional, Sequence

from .errors import NegativeValuation

INF = math.inf

Vec = tuple
Matrix = tuple


# ---------------------------------------------------------------------------
# scalars

def valuation(x, p: int):
    """p-adic valuation of a rational; valuation(0) = INF."""
    fr = Fraction(x)
    if fr == 0:
        return INF
    num, den = fr.numerator, fr.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def in_local_ring(x, p: int) -> bool:
    return valuation(x, p) >= 0


def reduce_mod(x, p: int, m: int) -> int:
    """Apply the ring map {v_p >= 0} -> Z/p^m.

    The reduced fraction of an element of nonnegative valuation has
    denominator prime to p, so the denominator can be inverted mod p^m.
    """
    fr = Fraction(x)
    if fr != 0 and valuation(fr, p) < 0:
        raise NegativeValuation(f"{fr} has negative {p}-adic valuation")
    q = p ** m
    return fr.numerator * pow(fr.denominator, -1, q) % q


def chain_val(x: int, p: int, m: int):
    """Valuation of x in Z/p^m; INF when x is 0 mod p^m."""
    x %= p ** m
    if x == 0:
        return INF
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# dense helpers (entry type agnostic unless stated)

def identity(n: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def zeros(r: int, c: int) -> Matrix:
    return tuple((0,) * c for _ in range(r))


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a)) if a else ()


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def matvec(a: Matrix, v: Vec) -> Vec:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def mat_mod(a: Matrix, q: int) -> Matrix:
    return tuple(tuple(index(x) % q for x in row) for row in a)


def vec_mod(v: Vec, q: int) -> Vec:
    return tuple(index(x) % q for x in v)


def reduce_vec(v: Vec, p: int, m: int) -> Vec:
    """Entrywise ring map into Z/p^m; handles p-integral rationals."""
    return tuple(reduce_mod(x, p, m) for x in v)


def reduce_mat(a: Matrix, p: int, m: int) -> Matrix:
    return tuple(reduce_vec(row, p, m) for row in a)


def scale_vec(c, v: Vec) -> Vec:
    return tuple(c * x for x in v)


def add_vec(u: Vec, v: Vec) -> Vec:
    return tuple(x + y for x, y in zip(u, v))


def stack(a: Sequence[Vec], b: Sequence[Vec]) -> Matrix:
    return tuple(a) + tuple(b)


# ---------------------------------------------------------------------------
# reduced row echelon forms over a field (F_p for p given, Q otherwise)

def _field_inv(x, p: Optional[int]):
    if p is None:
        return Fraction(1, 1) / x
    return pow(x, -1, p)


def _field_norm(x, p: Optional[int]):
    if p is None:
        return x if isinstance(x, Fraction) else Fraction(x)
    return x % p


def rref(a: Matrix, p: Optional[int] = None):
    """Reduced row echelon form with pivot columns.

    Shape is preserved (zero rows stay); the output is the canonical
    representative of the row space.  p = None means exact rationals.
    """
    mat = [list(row) for row in a]
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        pr = None
        for i in range(r, nrows):
            if _field_norm(mat[i][c], p) != 0:
                pr = i
                break
        if pr is None:
            continue
        mat[r], mat[pr] = mat[pr], mat[r]
        inv = _field_inv(mat[r][c], p)
        mat[r] = [_field_norm(inv * x, p) for x in mat[r]]
        for i in range(nrows):
            if i != r and _field_norm(mat[i][c], p) != 0:
                f = mat[i][c]
                mat[i] = [_field_norm(x - f * y, p) for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    return tuple(tuple(row) for row in mat), tuple(pivots)


def row_space(a: Sequence[Vec], p: Optional[int] = None) -> Matrix:
    """Canonical basis (rref rows, zero rows dropped) of the row span."""
    if not a:
        return ()
    red, pivots = rref(tuple(a), p)
    return red[: len(pivots)]


def rank(a: Sequence[Vec], p: Optional[int] = None) -> int:
    return len(row_space(a, p))


def kernel_field(a: Matrix, p: Optional[int] = None) -> Matrix:
    """Basis of {x : a x = 0} over F_p or Q (rows of a are equations)."""
    if not a:
        return ()
    ncols = len(a[0])
    red, pivots = rref(a, p)
    free = [c for c in range(ncols) if c not in pivots]
    one = 1 if p is not None else Fraction(1)
    out = []
    for f in free:
        v = [0] * ncols
        v[f] = one
        for r, c in enumerate(pivots):
            v[c] = _field_norm(-red[r][f], p)
        out.append(tuple(v))
    return tuple(out)


def solve_field(a: Matrix, b: Vec, p: Optional[int] = None) -> Optional[Vec]:
    """One solution x of a x = b over F_p or Q, or None."""
    if not a:
        return None
    ncols = len(a[0])
    aug = tuple(tuple(row) + (bi,) for row, bi in zip(a, b))
    red, pivots = rref(aug, p)
    if ncols in pivots:
        return None
    x = [0] * ncols
    for r, c in enumerate(pivots):
        x[c] = red[r][ncols]
    return tuple(x)


def in_row_span(rows: Sequence[Vec], v: Vec, p: Optional[int] = None) -> bool:
    if not rows:
        return all(_field_norm(x, p) == 0 for x in v)
    return rank(tuple(rows) + (v,), p) == rank(rows, p)


# ---------------------------------------------------------------------------
# echelon form over the local ring at p

def echelon_dvr(a: Matrix, p: int):
    """Row echelon over the ring of p-integral rationals.

    Returns (U, E) with E = U A, U invertible over the local ring
    (det(U) has valuation 0).  Columns are processed left to right and the
    pivot of each column is an entry of minimal valuation, so every
    elimination multiplier stays p-integral.
    """
    mat = [[Fraction(x) for x in row] for row in a]
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    u = [[Fraction(1 if i == j else 0) for j in range(nrows)] for i in range(nrows)]
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        best, bestv = None, INF
        for i in range(r, nrows):
            v = valuation(mat[i][c], p)
            if v < bestv:
                best, bestv = i, v
        if best is None or bestv is INF:
            continue
        mat[r], mat[best] = mat[best], mat[r]
        u[r], u[best] = u[best], u[r]
        for i in range(r + 1, nrows):
            if mat[i][c] != 0:
                f = mat[i][c] / mat[r][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
                u[i] = [x - f * y for x, y in zip(u[i], u[r])]
        r += 1
    return tuple(tuple(row) for row in u), tuple(tuple(row) for row in mat)


def echelon_pivot_valuations(e: Matrix, p: int) -> tuple:
    """Valuations of the leading entries of the nonzero rows of e."""
    out = []
    for row in e:
        lead = next((x for x in row if x != 0), None)
        if lead is not None:
            out.append(valuation(lead, p))
    return tuple(out)


# ---------------------------------------------------------------------------
# Smith-type elimination over Z/p^m

def smith_chain_transforms(a: Matrix, p: int, m: int):
    """Diagonalize a over Z/p^m: returns (U, V, exps) with U a V = diag(p^e).

    U and V are unimodular mod p^m.  exps has length min(rows, cols), is
    nondecreasing, and uses INF for diagonal entries that vanish mod p^m.
    """
    q = p ** m
    mat = [[index(x) % q for x in row] for row in a]
    nr = len(mat)
    nc = len(mat[0]) if nr else 0
    u = [[1 if i == j else 0 for j in range(nr)] for i in range(nr)]
    v = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]
    k = 0
    exps = []
    size = min(nr, nc)
    while k < size:
        bi = bj = None
        bv = INF
        for i in range(k, nr):
            for j in range(k, nc):
                w = chain_val(mat[i][j], p, m)
                if w < bv:
                    bi, bj, bv = i, j, w
                    if w == 0:
                        break
            if bv == 0:
                break
        if bi is None:
            break
        mat[k], mat[bi] = mat[bi], mat[k]
        u[k], u[bi] = u[bi], u[k]
        for row in mat:
            row[k], row[bj] = row[bj], row[k]
        for row in v:
            row[k], row[bj] = row[bj], row[k]
        e = int(bv)
        pe = p ** e
        unit = mat[k][k] // pe
        uinv = pow(unit, -1, q)
        mat[k] = [(uinv * x) % q for x in mat[k]]
        u[k] = [(uinv * x) % q for x in u[k]]
        for i in range(nr):
            if i != k and mat[i][k]:
                t = mat[i][k] // pe
                mat[i] = [(x - t * y) % q for x, y in zip(mat[i], mat[k])]
                u[i] = [(x - t * y) % q for x, y in zip(u[i], u[k])]
        for j in range(nc):
            if j != k and mat[k][j]:
                t = mat[k][j] // pe
                for row in mat:
                    row[j] = (row[j] - t * row[k]) % q
                for row in v:
                    row[j] = (row[j] - t * row[k]) % q
        exps.append(e)
        k += 1
    exps.extend([INF] * (size - len(exps)))
    return (
        tuple(tuple(row) for row in u),
        tuple(tuple(row) for row in v),
        tuple(exps),
    )


def smith_chain(a: Matrix, p: int, m: int) -> tuple:
    """Elementary divisor exponents of a over Z/p^m (INF for vanishing ones)."""
    return smith_chain_transforms(a, p, m)[2]


def cokernel_exponents(a: Matrix, p: int, m: int) -> tuple:
    """Exponents a_t with coker(a on (Z/p^m)^rows) = + Z/p^{a_t}, sorted.

    a maps (Z/p^m)^cols into (Z/p^m)^rows by its columns; the exponents are
    capped at m and padded with m for coordinates no column reaches.
    """
    nr = len(a)
    exps = smith_chain(a, p, m) if a and a[0] else ()
    out = [m if e is INF else min(int(e), m) for e in exps]
    out.extend([m] * (nr - len(out)))
    return tuple(sorted(out))


def solve_chain(a: Matrix, b: Vec, p: int, m: int) -> Optional[Vec]:
    """One solution x of a x = b over Z/p^m, or None."""
    q = p ** m
    nr = len(a)
    nc = len(a[0]) if nr else 0
    b = vec_mod(b, q)
    if nc == 0:
        return () if all(x == 0 for x in b) else None
    u, v, exps = smith_chain_transforms(a, p, m)
    y = vec_mod(matvec(u, b), q)
    z = [0] * nc
    for t in range(nr):
        if t < len(exps) and exps[t] is not INF:
            e = int(exps[t])
            if chain_val(y[t], p, m) < e:
                return None
            z[t] = (y[t] // (p ** e)) % q
        elif y[t] != 0:
            return None
    return vec_mod(matvec(v, tuple(z)), q)


def kernel_chain(a: Matrix, p: int, m: int) -> Matrix:
    """Generators of {x : a x = 0} over Z/p^m."""
    q = p ** m
    nr = len(a)
    nc = len(a[0]) if nr else 0
    if nc == 0:
        return ()
    if nr == 0:
        return identity(nc)
    _, v, exps = smith_chain_transforms(a, p, m)
    vt = transpose(v)
    gens = []
    for t in range(nc):
        e = exps[t] if t < len(exps) else INF
        if e == 0:
            continue
        scale = 1 if e is INF else p ** (m - int(e))
        gens.append(vec_mod(scale_vec(scale, vt[t]), q))
    return tuple(gens)


def inv_chain(a: Matrix, p: int, m: int) -> Matrix:
    """Inverse of a unimodular matrix over Z/p^m."""
    q = p ** m
    n = len(a)
    mat = [[index(x) % q for x in row] for row in a]
    inv = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for c in range(n):
        pr = next((i for i in range(c, n) if mat[i][c] % p != 0), None)
        if pr is None:
            raise ValueError("matrix is not invertible mod p")
        mat[c], mat[pr] = mat[pr], mat[c]
        inv[c], inv[pr] = inv[pr], inv[c]
        f = pow(mat[c][c], -1, q)
        mat[c] = [(f * x) % q for x in mat[c]]
        inv[c] = [(f * x) % q for x in inv[c]]
        for i in range(n):
            if i != c and mat[i][c]:
                t = mat[i][c]
                mat[i] = [(x - t * y) % q for x, y in zip(mat[i], mat[c])]
                inv[i] = [(x - t * y) % q for x, y in zip(inv[i], inv[c])]
    return tuple(tuple(row) for row in inv)


def in_span_chain(gens: Sequence[Vec], v: Vec, p: int, m: int) -> bool:
    """Is v in the column span of the given generators over Z/p^m?"""
    if not gens:
        return all(x % (p ** m) == 0 for x in v)
    cols = transpose(tuple(gens))
    return solve_chain(cols, v, p, m) is not None


def span_equal_chain(g1: Sequence[Vec], g2: Sequence[Vec], p: int, m: int) -> bool:
    return all(in_span_chain(g2, v, p, m) for v in g1) and all(
        in_span_chain(g1, v, p, m) for v in g2
    )


def intersect_chain(g1: Sequence[Vec], g2: Sequence[Vec], p: int, m: int) -> Matrix:
    """Generators of span(g1) ∩ span(g2) over Z/p^m (vectors as rows)."""
    if not g1 or not g2:
        return ()
    a = transpose(tuple(g1))
    b = transpose(tuple(g2))
    q = p ** m
    eqs = tuple(
        row_a + tuple((-x) % q for x in row_b) for row_a, row_b in zip(a, b)
    )
    gens = []
    for z in kernel_chain(eqs, p, m):
        x = z[: len(g1)]
        vec = vec_mod(
            tuple(sum(c * g[i] for c, g in zip(x, g1)) for i in range(len(g1[0]))), q
        )
        if any(vec):
            gens.append(vec)
    return prune_generators(gens, p, m)


def prune_generators(gens: Sequence[Vec], p: int, m: int) -> Matrix:
    """Drop generators that are redundant by Nakayama (mod-p dependent)."""
    q = p ** m
    kept: list = []
    kept_mod = []
    for g in gens:
        g = vec_mod(g, q)
        gm = vec_mod(g, p)
        if not any(gm):
            # purely divisible generator, keep only if not already in span
            if any(g) and not in_span_chain(kept, g, p, m):
                kept.append(g)
                kept_mod.append(gm)
            continue
        if in_row_span(tuple(kept_mod), gm, p):
            if not in_span_chain(kept, g, p, m):
                kept.append(g)
                kept_mod.append(gm)
            continue
        kept.append(g)
        kept_mod.append(gm)
    return tuple(kept)


def saturated_mod(gens: Sequence[Vec], p: int) -> bool:
    """Generators span a free direct summand iff they stay independent mod p."""
    if not gens:
        return True
    return rank(mat_mod(tuple(gens), p), p) == len(gens)


def complete_basis_fp(rows: Sequence[Vec], n: int, p: int) -> Matrix:
    """Standard vectors completing independent mod-p rows to a basis of F_p^n."""
    red = row_space(mat_mod(tuple(rows), p) if rows else (), p)
    _, pivots = rref(red, p) if red else ((), ())
    free = [c for c in range(n) if c not in pivots]
    return tuple(tuple(1 if j == c else 0 for j in range(n)) for c in free)


# ---------------------------------------------------------------------------
# counting

@lru_cache(maxsize=None)
def gaussian_binomial(n: int, k: int, p: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= p ** (n - i) - 1
        den *= p ** (i + 1) - 1
    return num // den


def subspace_total(n: int, p: int, d: Optional[int] = None) -> int:
    if d is not None:
        return gaussian_binomial(n, d, p)
    return sum(gaussian_binomial(n, k, p) for k in range(n + 1))
