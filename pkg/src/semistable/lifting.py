"""Lifting destabilizing residue sequences modulo prime powers.

Everything here happens in the coordinates of a fixed lattice: the residue
space M/pM over F_p, the truncations M/p^m M over Z/p^m, and the images
F~_ij of the saturated chain sublattices inside them.  A destabilizing
subspace Bbar of the residue lifts modulo p^m when some free direct summand
of M/p^m M reduces to Bbar and meets every F~_ij in a submodule that still
covers Bbar ∩ Fbar_ij mod p.

Two routes compute the maximal such m.  The brute force enumerates every
candidate summand as a graph over Bbar with corrections in p(Z/p^m) and
checks the covering conditions directly.  The inductive mechanism folds in
one chain at a time: it lifts the new chain on its own (always possible),
measures the mismatch with the running lift as a homomorphism class in
H/(H1 ∩ pH + pH2), and reads the new maximal order off the valuations of
that class.  The two must agree; the test suite enforces it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, Optional, Sequence, Tuple

from . import arith
from .arith import (
    INF,
    add_vec,
    chain_val,
    complete_basis_fp,
    in_row_span,
    intersect_chain,
    inv_chain,
    kernel_field,
    mat_mod,
    matvec,
    prune_generators,
    rank,
    row_space,
    scale_vec,
    smith_chain_transforms,
    solve_chain,
    solve_field,
    transpose,
    vec_mod,
)
from .errors import EnumerationTooLarge, NotSaturated
from .filtration import FilteredSpace, intersect_spaces, quotient_image
from .lattice import KSubspace, Lattice, reduce_lattice

Vec = tuple
Matrix = tuple
CondKey = Tuple[int, int]


@dataclass(frozen=True)
class ReductionSequence:
    """Residue sequence 0 -> Bbar -> Mbar -> Gbar -> 0 with chain data."""

    prime: int
    lattice: Lattice
    chains: tuple  # chains of KSubspace over Q, full (V first, 0 last)
    destabilizer: Matrix  # Bbar, rref rows over F_p in lattice coordinates
    residue: FilteredSpace  # Mbar with its induced chains
    conditions: tuple  # ((i, j), basis of Bbar ∩ Fbar_ij) for nonzero pieces


@dataclass(frozen=True)
class LiftWitness:
    """A lift of Bbar modulo p^level together with its certificates."""

    prime: int
    level: int
    generators: Matrix  # rows over Z/p^level, lattice coordinates
    complement: Matrix  # rows spanning a complement
    certificates: tuple  # ((i, j), rows in F~_ij ∩ span(generators))


@dataclass(frozen=True)
class FilteredHomModule:
    """Generators of the chain-preserving Hom submodules at one stage."""

    prime: int
    level: int
    rank_source: int
    rank_target: int
    h1: Matrix  # flat generators, maps preserving the settled chains
    h2: Matrix  # flat generators, maps preserving the incoming chain


def residue_space(lattice: Lattice, chains, p: int) -> FilteredSpace:
    """The F_p reduction of the lattice with its induced chains."""
    module = reduce_lattice(lattice, chains, p, 1)
    return FilteredSpace(
        lattice.dim,
        p,
        tuple(
            tuple(row_space(step, p) for step in chain) for chain in module.chains
        ),
    )


from functools import lru_cache


@lru_cache(maxsize=256)
def _saturated_chain_gens(lattice: Lattice, chains, p: int):
    """Saturated sublattice generators over Q for every chain step."""
    from .lattice import intersect

    return tuple(
        tuple(intersect(lattice, space, p).vectors for space in chain)
        for chain in chains
    )


def chain_images(lattice: Lattice, chains, p: int, m: int):
    """Images of the chain sublattices in (Z/p^m)^n, lattice coordinates."""
    q = p ** m
    out = []
    for chain in _saturated_chain_gens(lattice, tuple(tuple(c) for c in chains), p):
        steps = []
        for gens in chain:
            reduced = tuple(
                tuple(arith.reduce_mod(x, p, m) for x in g) for g in gens
            )
            steps.append(tuple(g for g in reduced if any(g)))
        out.append(tuple(steps))
    return tuple(out)


def build_sequence(
    lattice: Lattice, chains, p: int, destabilizer: Matrix, residue: FilteredSpace
) -> ReductionSequence:
    n = lattice.dim
    conds = []
    for i, chain in enumerate(residue.chains):
        for j in range(1, len(chain)):
            d = intersect_spaces(destabilizer, chain[j], n, p)
            if d:
                conds.append(((i, j), d))
    return ReductionSequence(p, lattice, tuple(tuple(c) for c in chains),
                             destabilizer, residue, tuple(conds))


# ---------------------------------------------------------------------------
# Hom modules

def hom_filtered(
    rank_source: int,
    rank_target: int,
    conditions: Sequence[Tuple[Matrix, Matrix]],
    p: int,
    m: int,
) -> Matrix:
    """Generators of {φ : φ(X) ⊆ span(Z) for every condition (X, Z)}.

    φ is a rank_target x rank_source matrix over Z/p^m, flattened row-major;
    X rows live in source coordinates and Z rows in target coordinates.  The
    membership conditions are solved as one kernel computation with one
    auxiliary block of unknowns per (condition, X row).
    """
    q = p ** m
    nail = rank_source * rank_target
    aux_sizes = []
    items = []
    for x_rows, z_rows in conditions:
        for x in x_rows:
            items.append((tuple(int(v) % q for v in x), tuple(z_rows)))
            aux_sizes.append(len(z_rows))
    total_aux = sum(aux_sizes)
    if not items:
        return tuple(
            tuple(1 if t == s else 0 for s in range(nail)) for t in range(nail)
        )
    eqs = []
    aux_base = 0
    for (x, z_rows), aux in zip(items, aux_sizes):
        for l in range(rank_target):
            row = [0] * (nail + total_aux)
            for k in range(rank_source):
                row[l * rank_source + k] = x[k]
            for t, z in enumerate(z_rows):
                row[nail + aux_base + t] = (-int(z[l])) % q
            eqs.append(tuple(row))
        aux_base += aux
    gens = [g[:nail] for g in arith.kernel_chain(tuple(eqs), p, m)]
    gens = [g for g in gens if any(g)]
    return prune_generators(gens, p, m)


def _intersect_p_multiples(gens: Sequence[Vec], dim: int, p: int, m: int) -> Matrix:
    """Generators of span(gens) ∩ p·(Z/p^m)^dim."""
    if not gens:
        return ()
    q = p ** m
    out = [vec_mod(scale_vec(p, g), q) for g in gens]
    modp = mat_mod(tuple(gens), p)
    eqs = transpose(modp)  # rows: coordinates, cols: generators
    for k in kernel_field(eqs, p):
        vec = [0] * dim
        for c, g in zip(k, gens):
            if c:
                vec = [a + c * b for a, b in zip(vec, g)]
        v = vec_mod(tuple(vec), q)
        if any(v):
            out.append(v)
    return prune_generators(out, p, m)


def quotient_decomposition(
    dim_h: int, h1_gens: Sequence[Vec], h2_gens: Sequence[Vec], p: int, m: int
) -> tuple:
    """Exponents a_t with H/(H1 ∩ pH + pH2) = + Z/p^{a_t}, sorted.

    Follows the split-and-eliminate route: split H = H2 ⊕ H3, rewrite the H1
    generators in H/pH2 (H2 coordinates live mod p, H3 coordinates mod p^m),
    then run valuation-pivot elimination on the H3 block, preferring pivots
    in generators with no H2 component so the mod-p block stays intact.
    """
    q = p ** m
    h2_list = [vec_mod(g, q) for g in h2_gens if any(int(x) % q for x in g)]
    if not arith.saturated_mod(h2_list, p):
        raise NotSaturated("H2 generators are dependent mod p")
    r2 = len(h2_list)
    comp = complete_basis_fp(h2_list, dim_h, p)
    basis = tuple(h2_list) + comp
    minv = inv_chain(transpose(basis), p, m) if dim_h else ()
    rows = []
    for gvec in h1_gens:
        c = matvec(minv, vec_mod(gvec, q)) if dim_h else ()
        e_part = [int(x) % p for x in c[:r2]]
        f_part = [int(x) % q for x in c[r2:]]
        if any(e_part) or any(f_part):
            rows.append((e_part, f_part))

    # F_p elimination on the H2-block, same row operations on the H3-block.
    lead = {}
    for idx in range(len(rows)):
        e, f = rows[idx]
        col = next((c for c in range(r2) if e[c]), None)
        while col in lead:
            j = lead[col]
            t = e[col] * pow(rows[j][0][col], -1, p)
            e = [(a - t * b) % p for a, b in zip(e, rows[j][0])]
            f = [(a - t * b) % q for a, b in zip(f, rows[j][1])]
            rows[idx] = (e, f)
            col = next((c for c in range(r2) if e[c]), None)
        if col is not None:
            lead[col] = idx

    r3 = dim_h - r2
    processed_rows: set = set()
    processed_cols: set = set()
    hits = []  # (column, pivot valuation, pivot row has an H2 part)
    while True:
        best = None
        bestv = INF
        best_pure = False
        for i, (e, f) in enumerate(rows):
            if i in processed_rows:
                continue
            pure = not any(e)
            for c in range(r3):
                if c in processed_cols:
                    continue
                v = chain_val(f[c], p, m)
                if v < bestv or (v == bestv and pure and not best_pure):
                    best, bestv, best_pure = (i, c), v, pure
        if best is None or bestv is INF:
            break
        bi, bc = best
        e_piv, f_piv = rows[bi]
        pe = p ** int(bestv)
        for i, (e, f) in enumerate(rows):
            if i == bi or f[bc] == 0:
                continue
            t = f[bc] // pe
            rows[i] = (
                [(a - t * b) % p for a, b in zip(e, e_piv)],
                [(a - t * b) % q for a, b in zip(f, f_piv)],
            )
        for c in range(r3):
            if c != bc:
                f_piv[c] = 0
        processed_rows.add(bi)
        processed_cols.add(bc)
        hits.append((bc, int(bestv), any(e_piv)))

    exps = [1] * r2
    hit_cols = {c: (v, has_e) for c, v, has_e in hits}
    for c in range(r3):
        if c not in hit_cols:
            exps.append(m)
            continue
        v, has_e = hit_cols[c]
        exps.append(min(1 + v, m) if has_e else min(max(v, 1), m))
    return tuple(sorted(exps))


# ---------------------------------------------------------------------------
# single-chain adapted lifts

def _adapted_flag_basis(flag: Sequence[Matrix], p: int):
    """Rows with levels: the vectors of level >= j span flag[j], any j."""
    vecs = []
    levels = []
    for j in range(len(flag) - 1, -1, -1):
        for row in flag[j]:
            if not in_row_span(tuple(vecs), row, p):
                vecs.append(row)
                levels.append(j)
    return vecs, levels


def _quotient_coords(v: Vec, wbar: Matrix, pivots, free, p: int) -> Vec:
    """Raw coordinates of v in V/span(wbar) (reduce, then keep free columns)."""
    v = list(v)
    for r, c in enumerate(pivots):
        f = v[c]
        if f % p:
            v = [(a - f * b) % p for a, b in zip(v, wbar[r])]
    return tuple(v[c] % p for c in free)


def _lift_into_image(vbar: Vec, level: int, images, p: int, m: int) -> Vec:
    """Element of F~_level congruent to vbar mod p (level 0 lifts freely)."""
    if level == 0:
        return vec_mod(vbar, p ** m)
    gens = images[level]
    coeffs = solve_field(transpose(mat_mod(gens, p)), vec_mod(vbar, p), p)
    assert coeffs is not None, "residue vector missing from the image mod p"
    n = len(vbar)
    out = [0] * n
    for c, gvec in zip(coeffs, gens):
        if c:
            out = [a + c * b for a, b in zip(out, gvec)]
    return vec_mod(tuple(out), p ** m)


def lift_single_chain(
    seq: ReductionSequence, chain_idx: int, m: int, images_chain
) -> Tuple[Matrix, Matrix, tuple, tuple]:
    """Adapted lift of the destabilizer along one chain.

    Returns (b_rows, g_rows, b_levels, g_levels): a free lift of Bbar and a
    complement, both split compatibly with every step of the chain, meaning
    F~_j = (F~_j ∩ B) ⊕ (F~_j ∩ G) with the level >= j generators spanning
    the two sides.
    """
    p = seq.prime
    n = seq.lattice.dim
    bbar = seq.destabilizer
    fbar = seq.residue.chains[chain_idx]
    dflag = [intersect_spaces(bbar, step, n, p) for step in fbar]
    b_vecs, b_levels = _adapted_flag_basis(dflag, p)
    cflag = [quotient_image(step, bbar, n, p) for step in fbar]
    gq_vecs, g_levels = _adapted_flag_basis(cflag, p)

    # lift each quotient vector to a representative inside its chain step
    _, bpivots = arith.rref(bbar, p) if bbar else ((), ())
    bfree = [c for c in range(n) if c not in bpivots]
    g_vecs = []
    for vq, lvl in zip(gq_vecs, g_levels):
        step = fbar[lvl]
        images_q = tuple(_quotient_coords(row, bbar, bpivots, bfree, p) for row in step)
        coeffs = solve_field(transpose(images_q), vq, p)
        assert coeffs is not None, "quotient vector missing from the step image"
        rep = [0] * n
        for c, row in zip(coeffs, step):
            if c:
                rep = [(a + c * b) % p for a, b in zip(rep, row)]
        g_vecs.append(tuple(rep))

    b_rows = tuple(
        _lift_into_image(v, lvl, images_chain, p, m)
        for v, lvl in zip(b_vecs, b_levels)
    )
    g_rows = tuple(
        _lift_into_image(v, lvl, images_chain, p, m)
        for v, lvl in zip(g_vecs, g_levels)
    )
    return b_rows, g_rows, tuple(b_levels), tuple(g_levels)


# ---------------------------------------------------------------------------
# brute-force liftability

def _covering_ok(f_gens, b_rows, dbar, p: int, m: int) -> bool:
    inter = intersect_chain(f_gens, b_rows, p, m)
    if not inter:
        return not dbar
    red = row_space(mat_mod(inter, p), p)
    return len(red) == len(dbar)


def _pick_certificates(inter, dbar, p: int):
    picked = []
    picked_mod = []
    for gvec in inter:
        gm = vec_mod(gvec, p)
        if any(gm) and not in_row_span(tuple(picked_mod), gm, p):
            picked.append(gvec)
            picked_mod.append(gm)
            if len(picked) == len(dbar):
                break
    assert len(picked) == len(dbar), "certificates do not cover the residue piece"
    return tuple(picked)


def _make_witness(seq: ReductionSequence, m: int, b_rows, images) -> LiftWitness:
    p = seq.prime
    n = seq.lattice.dim
    comp = complete_basis_fp(b_rows, n, p)
    certs = []
    for (i, j), dbar in seq.conditions:
        inter = intersect_chain(images[i][j], b_rows, p, m)
        certs.append(((i, j), _pick_certificates(inter, dbar, p)))
    return LiftWitness(p, m, tuple(vec_mod(r, p ** m) for r in b_rows),
                       comp, tuple(certs))


def is_liftable(
    seq: ReductionSequence, m: int, cap: int = 10 ** 6
) -> Optional[LiftWitness]:
    """Search for a lift of the destabilizing sequence modulo p^m.

    Candidates are free summands reducing to Bbar, normalized so the pivot
    columns carry the identity; the corrections on the other columns range
    over p(Z/p^m), giving p^((m-1) r (n-r)) candidates in a fixed order.
    """
    p = seq.prime
    n = seq.lattice.dim
    bbar = seq.destabilizer
    r = len(bbar)
    free = n - r
    count = p ** ((m - 1) * r * free)
    if count > cap:
        raise EnumerationTooLarge(
            f"{count} candidate lifts at level {m} exceeds cap {cap}"
        )
    images = chain_images(seq.lattice, seq.chains, p, m)
    _, pivots = arith.rref(bbar, p)
    nonpivot = [c for c in range(n) if c not in pivots]
    q = p ** m
    base = [list(int(x) for x in row) for row in bbar]
    span_corrections = range(p ** (m - 1))
    for assignment in product(span_corrections, repeat=r * len(nonpivot)):
        rows = [row[:] for row in base]
        for idx, v in enumerate(assignment):
            if v:
                k, t = divmod(idx, len(nonpivot))
                rows[k][nonpivot[t]] = (rows[k][nonpivot[t]] + p * v) % q
        b_rows = tuple(tuple(row) for row in rows)
        if all(
            _covering_ok(images[i][j], b_rows, dbar, p, m)
            for (i, j), dbar in seq.conditions
        ):
            return _make_witness(seq, m, b_rows, images)
    return None


def brute_force_max_lift(
    seq: ReductionSequence, lift_cap: int = 64, enum_cap: int = 10 ** 6
):
    """Oracle for the maximal lift order by direct search, (m or INF, witness)."""
    best = is_liftable(seq, 1, enum_cap)
    assert best is not None
    for m in range(2, lift_cap + 1):
        nxt = is_liftable(seq, m, enum_cap)
        if nxt is None:
            return m - 1, best
        best = nxt
    return INF, best


# ---------------------------------------------------------------------------
# inductive mechanism

def _coords_in(basis_rows: Matrix, v: Vec, p: int, m: int) -> Vec:
    minv = inv_chain(transpose(basis_rows), p, m)
    return vec_mod(matvec(minv, vec_mod(v, p ** m)), p ** m)


def _module_in_coords(gens, basis_rows, keep, p, m):
    """Rewrite module elements in split-basis coordinates, keeping a slice."""
    out = []
    for gvec in gens:
        c = _coords_in(basis_rows, gvec, p, m)
        out.append(c[keep[0]:keep[1]])
    return prune_generators(out, p, m)


def _apply_hom(flat, b_rows, g_rows, p, m):
    """Rows of the graph of the flat hom over the given source rows."""
    q = p ** m
    r = len(b_rows)
    gdim = len(g_rows)
    out = []
    for k, brow in enumerate(b_rows):
        acc = list(brow)
        for l in range(gdim):
            c = flat[l * r + k]
            if c:
                acc = [a + c * b for a, b in zip(acc, g_rows[l])]
        out.append(vec_mod(tuple(acc), q))
    return tuple(out)


def _stage_data(seq: ReductionSequence, i: int, b_rows, mu: int):
    """Stage ingredients at one working modulus.

    Folds chain i into the lift b_rows (a witness for the chains before it,
    truncated to mu): the incoming chain gets its own adapted lift and
    complement, the mismatch A between the two lifts is read off as a graph
    map, H1 collects the maps preserving the settled chains (the complement
    carries the image filtration of the quotient), and H2 is the incoming
    chain's torsor transported through the graph isomorphism.  Returns
    (A, N generators, H1 ∩ pH generators, complement rows, hom module).
    """
    p = seq.prime
    n = seq.lattice.dim
    r = len(seq.destabilizer)
    gdim = n - r
    q = p ** mu
    images = chain_images(seq.lattice, seq.chains, p, mu)
    b_rows = tuple(vec_mod(row, q) for row in b_rows)
    bs_rows, gs_rows, bs_lv, gs_lv = lift_single_chain(seq, i, mu, images[i])
    g_rows = gs_rows
    split = tuple(bs_rows) + tuple(g_rows)
    ucoef = [[0] * r for _ in range(r)]
    acoef = [[0] * r for _ in range(gdim)]
    for k, brow in enumerate(b_rows):
        c = _coords_in(split, brow, p, mu)
        for l in range(r):
            ucoef[l][k] = c[l]
        for l in range(gdim):
            acoef[l][k] = (-c[r + l]) % q
    a_flat = tuple(acoef[l][k] for l in range(gdim) for k in range(r))
    assert all(x % p == 0 for x in a_flat), "graph mismatch must vanish mod p"

    # Settled chains: φ(F ∩ B) must land in the image of F in the quotient,
    # read inside the complement.
    base = tuple(b_rows) + tuple(g_rows)
    h1_conditions = []
    for k in range(i):
        chain = images[k]
        for j in range(1, len(chain)):
            f_gens = chain[j]
            x_rows = _module_in_coords(
                intersect_chain(f_gens, b_rows, p, mu), base, (0, r), p, mu
            )
            y_rows = prune_generators(
                [_coords_in(base, fv, p, mu)[r:] for fv in f_gens], p, mu
            )
            if x_rows:
                h1_conditions.append((x_rows, y_rows))
    h1 = hom_filtered(r, gdim, h1_conditions, p, mu)

    # Incoming chain: its lifts are graphs over the adapted lift, with
    # coordinate conditions from the adapted levels; transport to the
    # common base through b'_k -> bs-coordinates.
    h2_conditions = []
    for j in sorted({lv for lv in bs_lv if lv > 0}):
        x_rows = tuple(
            tuple(1 if t == k else 0 for t in range(r))
            for k in range(r)
            if bs_lv[k] >= j
        )
        z_rows = tuple(
            tuple(1 if t == l else 0 for t in range(gdim))
            for l in range(gdim)
            if gs_lv[l] >= j
        )
        if x_rows:
            h2_conditions.append((x_rows, z_rows))
    h2_adapted = hom_filtered(r, gdim, h2_conditions, p, mu)
    h2 = []
    for flat in h2_adapted:
        cr = [
            [
                sum(flat[l * r + t] * ucoef[t][k] for t in range(r)) % q
                for k in range(r)
            ]
            for l in range(gdim)
        ]
        h2.append(tuple(cr[l][k] for l in range(gdim) for k in range(r)))
    h2 = tuple(prune_generators(h2, p, mu))

    h1p = _intersect_p_multiples(h1, r * gdim, p, mu)
    ngens = list(h1p) + [vec_mod(scale_vec(p, hvec), q) for hvec in h2]
    ngens = [g for g in ngens if any(g)]
    hom = FilteredHomModule(p, mu, r, gdim, tuple(h1), h2)
    return a_flat, ngens, h1p, g_rows, hom


def _stage_solve(a_flat, ngens, h1p, dim_h, p: int, mu: int):
    """psi1 with A = psi1 + (p H2 part) over Z/p^mu, or None."""
    if not ngens:
        return tuple([0] * dim_h) if not any(x % p ** mu for x in a_flat) else None
    coeffs = solve_chain(transpose(tuple(ngens)), a_flat, p, mu)
    if coeffs is None:
        return None
    psi1 = [0] * dim_h
    for cidx in range(len(h1p)):
        c = coeffs[cidx]
        if c:
            psi1 = [a + c * b for a, b in zip(psi1, h1p[cidx])]
    return vec_mod(tuple(psi1), p ** mu)


def max_lift_order(
    seq: ReductionSequence, lift_cap: int = 64, enum_cap: int = 10 ** 6
):
    """Maximal m with the sequence liftable mod p^m, with a witness.

    Returns (INF, witness at the cap) when the sequence lifts at the cap
    itself, which is the unbounded sentinel.  Chains fold in one at a time.
    A stage first tries its working modulus; when the mismatch class does
    not die there, the valuations of its residue in H/(H1 ∩ pH + pH2) give
    a level where a common lift certainly exists, and the stage climbs from
    that level to the last one that still solves.  The climb matters: the
    torsors at a lower level can be strictly larger than the truncations
    from above, so the top-level residue alone only bounds the answer.
    """
    p = seq.prime
    n = seq.lattice.dim
    s = len(seq.chains)
    r = len(seq.destabilizer)
    gdim = n - r
    dim_h = r * gdim
    w = lift_cap
    capped = True
    b_rows, _, _, _ = lift_single_chain(
        seq, 0, w, chain_images(seq.lattice, seq.chains, p, w)[0]
    )

    for i in range(1, s):
        if w == 1:
            break
        a_flat, ngens, h1p, g_rows, _ = _stage_data(seq, i, b_rows, w)
        psi1 = _stage_solve(a_flat, ngens, h1p, dim_h, p, w)
        if psi1 is not None:
            b_rows = _apply_hom(psi1, b_rows, g_rows, p, w)
            continue

        # residue valuations give a level that certainly solves
        u, _, exps = smith_chain_transforms(transpose(tuple(ngens)), p, w) \
            if ngens else (arith.identity(dim_h), None, ())
        alpha = vec_mod(matvec(u, a_flat), p ** w)
        hint = INF
        for t in range(dim_h):
            e = exps[t] if t < len(exps) else INF
            a_t = w if e is INF else min(int(e), w)
            v = chain_val(alpha[t], p, a_t)
            if v is not INF and v < hint:
                hint = v
        assert hint is not INF and hint >= 1
        best = int(hint)
        adat = _stage_data(seq, i, b_rows, best)
        bpsi = _stage_solve(adat[0], adat[1], adat[2], dim_h, p, best)
        assert bpsi is not None, "stage must solve at the residue level"
        bdat = adat
        for mu in range(best + 1, w):
            cand = _stage_data(seq, i, b_rows, mu)
            cpsi = _stage_solve(cand[0], cand[1], cand[2], dim_h, p, mu)
            if cpsi is None:
                break
            best, bpsi, bdat = mu, cpsi, cand
        w = best
        capped = False
        b_rows = _apply_hom(bpsi, tuple(vec_mod(row, p ** w) for row in b_rows),
                            bdat[3], p, w)

    images = chain_images(seq.lattice, seq.chains, p, w)
    witness = _make_witness(seq, w, tuple(b_rows), images)
    return (INF, witness) if capped else (w, witness)
