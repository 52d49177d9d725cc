"""Iterated elementary modification until the residue filtration is semistable.

Each round finds the unique maximal destabilizer of the current reduction,
lifts it to the largest possible modulus p^m, and replaces the lattice by
the preimage of the lifted summand.  The pair (slope, dim) of the
destabilizer drops strictly in lexicographic order, which forces
termination.  Every round also assembles the reversed residue sequence
0 -> Gbar -> Mbar' -> Bbar -> 0 and checks the induced filtrations match.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

from . import arith
from .arith import INF, mat_mod, matvec, row_space, scale_vec, solve_field, transpose, vec_mod
from .errors import EnumerationTooLarge, GenericUnstable, IterationCapExceeded
from .filtration import (
    FilteredSpace,
    intersect_spaces,
    is_semistable,
    max_destabilizer,
    quotient_image,
    subspace_slope,
)
from .lattice import (
    Lattice,
    elementary_modification,
    index_valuation,
    lattice_equal,
    reduce_lattice,
    to_lattice_coords,
)
from .lifting import (
    LiftWitness,
    ReductionSequence,
    build_sequence,
    chain_images,
    is_liftable,
    max_lift_order,
    residue_space,
)


@dataclass(frozen=True)
class Caps:
    enum: int = 10 ** 6
    lift: int = 64
    max_iter: int = 10 ** 4


@dataclass(frozen=True)
class ReversedSequence:
    """0 -> Gbar -> Mbar' -> Bbar -> 0 in the coordinates of the new lattice."""

    prime: int
    dim: int
    rank: int  # dim Bbar
    chains: tuple  # induced chains on Mbar'
    gsub: tuple  # rows spanning the Gbar part inside Mbar'
    proj: tuple  # rank x dim matrix, Mbar' -> Bbar in witness coordinates
    quotient_chains: tuple  # ((i, j), basis of the Bbar-side step), j >= 1


@dataclass(frozen=True)
class DescentStep:
    lattice: Lattice
    reduction_dims: tuple
    destabilizer: tuple
    slope: Fraction
    dim: int
    level: int
    witness: LiftWitness
    result: Lattice
    reversed_seq: ReversedSequence


@dataclass(frozen=True)
class DescentTrace:
    prime: int
    dim: int
    chains: tuple
    initial: Lattice
    steps: tuple
    final: Lattice
    final_dims: tuple
    verdict: str


def reduction_dims(red: FilteredSpace) -> tuple:
    return tuple(tuple(len(step) for step in chain) for chain in red.chains)


def _bbar_coords(bbar, vec, p):
    coeffs = solve_field(transpose(bbar), vec_mod(vec, p), p)
    if coeffs is None:
        raise AssertionError("vector claimed in Bbar is outside it")
    return coeffs


def check_residue_sequence(
    old: Lattice,
    new: Lattice,
    witness: LiftWitness,
    chains,
    p: int,
    m: int,
    seq: ReductionSequence,
) -> ReversedSequence:
    """Assemble the reversed residue sequence and assert its exactness.

    Checks: the new lattice sits between p^m old and old with elementary
    divisors (0^r, m^(n-r)); it reduces onto the lifted summand mod p^m; and
    the chains induced on the new reduction are exact against the two ends,
    with the quotient side matching the destabilizer's own filtration.
    """
    n = old.dim
    r = len(witness.generators)
    coords = tuple(to_lattice_coords(old, v) for v in new.vectors)
    exps = arith.smith_chain(arith.reduce_mat(coords, p, m + 1), p, m + 1)
    assert tuple(sorted(int(e) for e in exps)) == tuple([0] * r + [m] * (n - r)), \
        "modification divisors are not (0^r, m^(n-r))"
    assert index_valuation(old, new, p) == m * (n - r)
    assert arith.span_equal_chain(
        arith.reduce_mat(coords, p, m), witness.generators, p, m
    ), "new lattice does not reduce onto the lifted summand"

    red_new = residue_space(new, chains, p)
    gsub_rows = row_space(
        tuple(
            arith.reduce_vec(to_lattice_coords(new, scale_vec(p ** m, v)), p, 1)
            for v in old.vectors
        ),
        p,
    )
    assert len(gsub_rows) == n - r, "kernel of the residue projection has wrong rank"

    proj_cols = []
    for crow in coords:
        c = arith.reduce_vec(crow, p, m)
        sol = arith.solve_chain(transpose(witness.generators), c, p, m)
        assert sol is not None
        proj_cols.append(vec_mod(sol, p))
    proj = transpose(tuple(proj_cols))  # r x n over F_p

    for grow in gsub_rows:
        assert all(x % p == 0 for x in matvec(proj, grow)), \
            "Gbar rows must die under the projection"

    bbar = seq.destabilizer
    quotient_chains = []
    for i, chain in enumerate(red_new.chains):
        for j in range(1, len(chain)):
            step = chain[j]
            image = row_space(tuple(vec_mod(matvec(proj, v), p) for v in step), p)
            dbar = intersect_spaces(bbar, seq.residue.chains[i][j], n, p)
            dbar_w = row_space(
                tuple(_bbar_coords(witness.generators, d, p) for d in dbar), p
            )
            assert image == dbar_w, (
                "projected chain does not match the destabilizer filtration "
                f"at chain {i} level {j}"
            )
            ker_dim = len(intersect_spaces(step, gsub_rows, n, p))
            assert len(step) == ker_dim + len(image), "induced chains are not exact"
            gbar_dim = len(quotient_image(seq.residue.chains[i][j], bbar, n, p))
            assert ker_dim == gbar_dim, "Gbar side filtration mismatch"
            quotient_chains.append(((i, j), image))
    return ReversedSequence(
        p, n, r, red_new.chains, gsub_rows, proj, tuple(quotient_chains)
    )


def verify_no_splitting(rseq: ReversedSequence, cap: int = 10 ** 6) -> bool:
    """True when no section of Mbar' -> Bbar respects all induced chains."""
    p, n, r = rseq.prime, rseq.dim, rseq.rank
    g = n - r
    if r == 0:
        return False
    count = p ** (r * g)
    if count > cap:
        raise EnumerationTooLarge(f"{count} candidate sections exceeds cap {cap}")
    basis = []
    for k in range(r):
        target = tuple(1 if t == k else 0 for t in range(r))
        x = solve_field(rseq.proj, target, p)
        assert x is not None, "projection is not onto"
        basis.append(x)
    qsteps = [
        (rseq.chains[i][j], image) for (i, j), image in rseq.quotient_chains
    ]
    for coeffs in product(range(p), repeat=r * g):
        cols = []
        for k in range(r):
            v = list(basis[k])
            for l in range(g):
                c = coeffs[l * r + k]
                if c:
                    v = [(a + c * b) % p for a, b in zip(v, rseq.gsub[l])]
            cols.append(tuple(v))
        ok = True
        for step, image in qsteps:
            for d in image:
                vec = [0] * n
                for k in range(r):
                    if d[k]:
                        vec = [(a + d[k] * b) % p for a, b in zip(vec, cols[k])]
                if not arith.in_row_span(step, tuple(vec), p):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return False
    return True


def descent_step(lattice: Lattice, chains, p: int, caps: Caps = Caps()):
    """One modification round; returns (step record, new lattice)."""
    red = residue_space(lattice, chains, p)
    ok, _ = is_semistable(red, caps.enum)
    if ok:
        raise ValueError("reduction is already semistable, nothing to modify")
    bbar = max_destabilizer(red, caps.enum)
    seq = build_sequence(lattice, chains, p, bbar, red)
    m, witness = max_lift_order(seq, caps.lift, caps.enum)
    if m is INF:
        raise GenericUnstable(
            "the destabilizing sequence lifts at the cap modulus, "
            "so the generic fiber itself is unstable"
        )
    new = elementary_modification(lattice, witness.generators, p, m)
    rseq = check_residue_sequence(lattice, new, witness, chains, p, m, seq)
    step = DescentStep(
        lattice=lattice,
        reduction_dims=reduction_dims(red),
        destabilizer=bbar,
        slope=subspace_slope(red, bbar),
        dim=len(bbar),
        level=m,
        witness=witness,
        result=new,
        reversed_seq=rseq,
    )
    return step, new


def run_descent(
    chains,
    p: int,
    start: Optional[Lattice] = None,
    caps: Caps = Caps(),
):
    """Iterate modifications until the reduction is semistable.

    Returns (final lattice, DescentTrace).  The destabilizer's (slope, dim)
    pair must drop strictly between rounds; the iteration cap exists only to
    turn a violation of that descent into an error instead of a hang.
    """
    n = chains[0][0].ambient_dim
    lattice = start if start is not None else Lattice.standard(n)
    initial = lattice
    steps = []
    prev_key = None
    for _ in range(caps.max_iter + 1):
        red = residue_space(lattice, chains, p)
        ok, _ = is_semistable(red, caps.enum)
        if ok:
            trace = DescentTrace(
                p,
                lattice.dim,
                tuple(tuple(c) for c in chains),
                initial,
                tuple(steps),
                lattice,
                reduction_dims(red),
                "semistable",
            )
            return lattice, trace
        step, lattice = descent_step(lattice, chains, p, caps)
        key = (step.slope, step.dim)
        assert prev_key is None or key < prev_key, (
            f"descent violated: {key} does not drop below {prev_key}"
        )
        prev_key = key
        steps.append(step)
    raise IterationCapExceeded(
        f"no semistable reduction within {caps.max_iter} modifications "
        f"({len(steps)} steps recorded)"
    )


# ---------------------------------------------------------------------------
# independent trace verification

@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    reason: str = ""
    step: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


def _witness_valid(seq: ReductionSequence, witness: LiftWitness, m: int) -> bool:
    p = seq.prime
    gens = tuple(vec_mod(g, p ** m) for g in witness.generators)
    if len(gens) != len(seq.destabilizer):
        return False
    if not arith.saturated_mod(gens, p):
        return False
    if row_space(mat_mod(gens, p), p) != seq.destabilizer:
        return False
    images = chain_images(seq.lattice, seq.chains, p, m)
    from .lifting import _covering_ok

    return all(
        _covering_ok(images[i][j], gens, dbar, p, m)
        for (i, j), dbar in seq.conditions
    )


def verify_trace(
    chains, p: int, start: Optional[Lattice], trace: DescentTrace, caps: Caps = Caps()
) -> VerificationResult:
    """Re-validate a trace with the enumeration primitives only.

    Destabilizers are re-derived by exhaustive search, witnesses are checked
    against the chain images, maximality of each lift order is re-tested by
    direct candidate search at m + 1 (when the search fits the cap), and the
    modifications, the descent and the final verdict are all recomputed.
    """
    n = chains[0][0].ambient_dim
    lattice = start if start is not None else Lattice.standard(n)
    if not lattice_equal(lattice, trace.initial, p):
        return VerificationResult(False, "initial lattice mismatch")
    prev_key = None
    for idx, step in enumerate(trace.steps):
        if not lattice_equal(lattice, step.lattice, p):
            return VerificationResult(False, "step lattice mismatch", idx)
        red = residue_space(step.lattice, chains, p)
        if reduction_dims(red) != tuple(tuple(c) for c in step.reduction_dims):
            return VerificationResult(False, "reduction dims mismatch", idx)
        ok, _ = is_semistable(red, caps.enum)
        if ok:
            return VerificationResult(False, "unexpected semistable reduction", idx)
        bbar = max_destabilizer(red, caps.enum)
        if bbar != tuple(tuple(row) for row in step.destabilizer):
            return VerificationResult(False, "destabilizer not optimal", idx)
        if (subspace_slope(red, bbar), len(bbar)) != (step.slope, step.dim):
            return VerificationResult(False, "slope or dim mismatch", idx)
        seq = build_sequence(step.lattice, chains, p, bbar, red)
        if not _witness_valid(seq, step.witness, step.level):
            return VerificationResult(False, "invalid witness", idx)
        try:
            if is_liftable(seq, step.level + 1, caps.enum) is not None:
                return VerificationResult(False, "liftable at m+1", idx)
        except EnumerationTooLarge:
            pass  # maximality not re-checkable within the cap; skip
        modified = elementary_modification(
            step.lattice, step.witness.generators, p, step.level
        )
        if not lattice_equal(modified, step.result, p):
            return VerificationResult(False, "modification mismatch", idx)
        key = (step.slope, step.dim)
        if prev_key is not None and not key < prev_key:
            return VerificationResult(False, "descent violated", idx)
        prev_key = key
        lattice = step.result
    if not lattice_equal(lattice, trace.final, p):
        return VerificationResult(False, "final lattice mismatch")
    red = residue_space(trace.final, chains, p)
    ok, _ = is_semistable(red, caps.enum)
    if not ok:
        return VerificationResult(False, "final reduction not semistable")
    if reduction_dims(red) != tuple(tuple(c) for c in trace.final_dims):
        return VerificationResult(False, "final dims mismatch")
    return VerificationResult(True)
