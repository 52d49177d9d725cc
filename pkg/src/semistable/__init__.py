"""Exact integral models with semistable reduction for multi-filtered
vector spaces over Q with a p-adic valuation."""

from .arith import INF, reduce_mod, rref, smith_chain, valuation
from .descent import (
    Caps,
    DescentStep,
    DescentTrace,
    run_descent,
    verify_no_splitting,
    verify_trace,
)
from .errors import (
    EnumerationTooLarge,
    GenericUnstable,
    IterationCapExceeded,
    NegativeValuation,
    NotContained,
    NotSaturated,
    ParseError,
    RankDeficient,
    SemistableError,
    UniquenessViolation,
    ZeroDimensional,
)
from .filtration import (
    FilteredSpace,
    enumerate_subspaces,
    generic_semistable,
    induced_quotient,
    induced_sub,
    is_semistable,
    max_destabilizer,
    slope,
    weight,
)
from .flags import TypeDatum, count_semistable, enumerate_flags
from .lattice import (
    KSubspace,
    Lattice,
    Sublattice,
    elementary_modification,
    intersect,
    reduce_lattice,
)
from .lifting import (
    LiftWitness,
    ReductionSequence,
    brute_force_max_lift,
    hom_filtered,
    is_liftable,
    max_lift_order,
    quotient_decomposition,
    residue_space,
)

__version__ = "0.1.0"
