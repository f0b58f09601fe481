"""Exception types shared across the package."""


class CdSiteError(Exception):
    """Base class for all package errors."""


class ValidationError(CdSiteError):
    """An object violates one of its structural invariants."""


class ParseError(CdSiteError):
    """Malformed instance text (bad JSON, missing keys, bad references)."""


class MissingPullback(CdSiteError):
    """A required fiber product does not exist in the ambient category."""


class NoRepair(CdSiteError):
    """No replacement middle point exists for a length-2 chain.

    Carries the offending chain, the forbidden closed set, and the point
    whose closure witnesses that the space has a locally closed point of
    dimension at least two (the hypothesis the repair needs).
    """

    def __init__(self, chain, closed_set, witness_point):
        self.chain = tuple(chain)
        self.closed_set = frozenset(closed_set)
        self.witness_point = witness_point
        super().__init__(
            f"no middle point outside {sorted(self.closed_set)} for chain "
            f"{self.chain}; locally closed point {witness_point!r} has a "
            f"specialization chain of length >= 2 below it"
        )


class NoRefinement(CdSiteError):
    """A chain cannot be pushed into a dense open (propagated repair failure)."""


class PreconditionViolated(CdSiteError):
    """An operation was called on inputs outside its stated preconditions."""


class WrongMorphismClass(CdSiteError):
    """The map is not etale-like / proper-like as the operation requires."""


class NotACovering(CdSiteError):
    """Decomposition was requested for a map that is not a covering."""


class DepthExhausted(CdSiteError):
    """A bounded search hit its depth limit without a conclusive answer."""


class CategoryOverflow(CdSiteError):
    """Closing a category under the requested operations exceeded the cap."""
