"""Residue-field symbols and their extension order.

Points of a space carry abstract field names.  ``leq(k, K)`` means the field
K extends k, so a map of spaces may send a point with symbol K onto a point
with symbol k.  The only arithmetic ever needed is equality ("the residue
extension is an isomorphism") and least upper bounds (for fiber products).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError


@dataclass(frozen=True)
class SymbolOrder:
    names: tuple[str, ...]
    pairs: frozenset = field(default_factory=frozenset)  # (k, K): K extends k

    def __post_init__(self):
        seen = set(self.names)
        if len(seen) != len(self.names):
            raise ValidationError("duplicate residue symbols")
        closed = {(a, a) for a in self.names}
        for a, b in self.pairs:
            if a not in seen or b not in seen:
                raise ValidationError(f"unknown residue symbol in pair ({a}, {b})")
            closed.add((a, b))
        changed = True
        while changed:
            changed = False
            for a, b in list(closed):
                for c, d in list(closed):
                    if b == c and (a, d) not in closed:
                        closed.add((a, d))
                        changed = True
        for a, b in closed:
            if a != b and (b, a) in closed:
                raise ValidationError(f"residue symbols {a!r} and {b!r} extend each other")
        object.__setattr__(self, "pairs", frozenset(closed))

    def leq(self, a: str, b: str) -> bool:
        """True when b extends a (so a point labeled b may map onto one labeled a)."""
        return (a, b) in self.pairs

    def join(self, a: str, b: str):
        """Least common extension of a and b, or None if there is no unique one."""
        uppers = [c for c in self.names if self.leq(a, c) and self.leq(b, c)]
        minimal = [c for c in uppers if all(not self.leq(d, c) or d == c for d in uppers)]
        if len(minimal) == 1:
            return minimal[0]
        return None

    def contains(self, name: str) -> bool:
        return name in self.names


def trivial_symbols(names) -> SymbolOrder:
    """Symbol order where distinct field names are incomparable."""
    return SymbolOrder(tuple(sorted(set(names))))


# Two-symbol tower used throughout the built-in instance family: k1 extends k0.
FAMILY_SYMBOLS = SymbolOrder(("k0", "k1"), frozenset({("k0", "k1")}))
