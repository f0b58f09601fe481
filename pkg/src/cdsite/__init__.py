"""Verification workbench for completely decomposable Grothendieck topologies
on finite spectral spaces.

Finite posets stand in for the underlying spaces of Noetherian schemes; the
package builds the nine standard families of distinguished squares on small
sites over them, checks the completeness / regularity / boundedness axioms by
exhaustive computation, recognizes and decomposes coverings through splitting
sequences, and checks sheaf descent.
"""

from .errors import (
    CategoryOverflow,
    CdSiteError,
    DepthExhausted,
    MissingPullback,
    NoRefinement,
    NoRepair,
    NotACovering,
    ParseError,
    PreconditionViolated,
    ValidationError,
    WrongMorphismClass,
)
from .spaces import (
    FiniteSpace,
    IncreasingSequence,
    OpenSubset,
    STANDARD_DENSITY,
    SpaceMap,
    StandardDensity,
    closure,
    closure_witness,
    density_class,
    dimension,
    disjoint_union,
    has_increasing_sequence,
    is_dense_open,
    monotone_maps_between,
    pushforward_density,
    refine_chain_through_dense,
    repair_middle,
)
from .symbols import FAMILY_SYMBOLS, SymbolOrder, trivial_symbols

__version__ = "0.1.0"
