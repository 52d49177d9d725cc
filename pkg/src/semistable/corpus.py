"""Random instance generation for fuzzing and the acceptance suite.

Instances mix plain random chains with congruence-biased ones whose steps
agree mod p but differ by p-power corrections, since those are the
instances that force nontrivial lift orders.  The generic fiber filter only
admits instances certified semistable, so every admitted run must
terminate.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .descent import Caps
from .filtration import generic_semistable
from .lattice import KSubspace, Lattice
from .serialize import Problem


def _random_invertible(rng: random.Random, n: int, lo: int = -4, hi: int = 4):
    from .arith import rank

    while True:
        rows = tuple(
            tuple(Fraction(rng.randint(lo, hi)) for _ in range(n)) for _ in range(n)
        )
        if rank(rows, None) == n:
            return rows


def _biased_rows(rng: random.Random, n: int, p: int):
    """Rows congruent to small vectors mod p with p-power corrections."""
    base = _random_invertible(rng, n, -2, 2)
    k = rng.choice([1, 1, 2, 2, 3])
    out = []
    for row in base:
        bump = tuple(
            Fraction(p ** k * rng.randint(-2, 2)) if rng.random() < 0.6 else Fraction(0)
            for _ in range(n)
        )
        out.append(tuple(a + b for a, b in zip(row, bump)))
    return tuple(out)


def random_chains(rng: random.Random, n: int, p: int, s: int, biased: bool = True):
    """s full chains of KSubspace with lengths at most 3."""
    chains = []
    for _ in range(s):
        rows = _biased_rows(rng, n, p) if biased and rng.random() < 0.7 \
            else _random_invertible(rng, n)
        length = rng.randint(1, min(3, max(1, n - 1)))
        dims = sorted(rng.sample(range(1, n), min(length, n - 1)), reverse=True) \
            if n > 1 else []
        steps = [KSubspace.from_rows(n, rows[:d]) for d in dims]
        chains.append(tuple([KSubspace.full(n)] + steps + [KSubspace.zero(n)]))
    return tuple(chains)


def random_lattice(rng: random.Random, n: int, p: int) -> Lattice:
    rows = _random_invertible(rng, n)
    scaled = tuple(
        tuple(x * p ** k for x in row)
        for row, k in ((r, rng.randint(0, 2)) for r in rows)
    )
    return Lattice.from_rows(scaled)


@dataclass(frozen=True)
class RandomInstance:
    prime: int
    dim: int
    chains: tuple
    method: str  # how generic semistability was certified


def generate_semistable_instances(
    seed: int,
    count: int,
    primes=(2, 3),
    max_dim: int = 4,
    max_chains: int = 3,
    max_attempts_factor: int = 60,
):
    """Instances with certified semistable generic fiber, deterministic."""
    rng = random.Random(seed)
    out = []
    attempts = 0
    while len(out) < count and attempts < count * max_attempts_factor:
        attempts += 1
        p = rng.choice(primes)
        n = rng.randint(2, max_dim)
        s = rng.randint(1, max_chains)
        chains = random_chains(rng, n, p, s)
        check = generic_semistable(n, chains, skip_primes=(p,))
        if check.semistable:
            out.append(RandomInstance(p, n, chains, check.method))
    return out


def instance_problem(inst: RandomInstance, caps: Caps = Caps()) -> Problem:
    return Problem(inst.prime, inst.dim, inst.chains, None, caps)
