"""Sieves and simple coverings.

A sieve on X is a set of maps into X closed under precomposition.  A simple
covering of X is a tree whose internal nodes carry distinguished squares and
whose leaves are identity markers; a sieve "contains" a simple covering when
every root-to-leaf composite belongs to the sieve.

The containment search is a least fixpoint over the finitely many maps into
the target: a map g is covered when it lies in the sieve, or when some
distinguished square over its source has both legs covered after composing
with g.  Exhausting the fixpoint therefore certifies a negative answer.
"""

from __future__ import annotations

from dataclasses import dataclass

from .category import SiteCategory
from .errors import CategoryOverflow, ValidationError
from .spaces import FiniteSpace, SpaceMap, dimension
from .squares import CdStructure, DistinguishedSquare


@dataclass(frozen=True)
class Sieve:
    target: FiniteSpace
    maps: frozenset

    def __contains__(self, f: SpaceMap) -> bool:
        return f in self.maps

    def __le__(self, other: "Sieve") -> bool:
        return self.target == other.target and self.maps <= other.maps

    def sort_key(self):
        return tuple(sorted((m.source.points, m.graph) for m in self.maps))


def is_sieve(C: SiteCategory, s: Sieve) -> bool:
    for f in s.maps:
        if f.target != s.target:
            return False
        for g in C.maps_into(f.source):
            if g.then(f) not in s.maps:
                return False
    return True


def generated_sieve(C: SiteCategory, generators) -> Sieve:
    gens = tuple(generators)
    if not gens:
        raise ValidationError("a generated sieve needs at least one map")
    target = gens[0].target
    members = set()
    for g in gens:
        if g.target != target:
            raise ValidationError("sieve generators must share a target")
        g = C.intern(g)
        for T in C.objects:
            for h in C.maps_between(T, g.source):
                members.add(C.compose(h, g))
        members.add(g)
    return Sieve(target, frozenset(members))


def maximal_sieve(C: SiteCategory, X: FiniteSpace) -> Sieve:
    return Sieve(X, frozenset(C.maps_into(X)))


def square_sieve(C: SiteCategory, sq: DistinguishedSquare) -> Sieve:
    """The sieve generated by the two structure maps of a square."""
    key = ("square-sieve", sq.e, sq.p)
    if key not in C.cache:
        C.cache[key] = generated_sieve(C, (sq.e, sq.p))
    return C.cache[key]


def pullback_sieve(C: SiteCategory, s: Sieve, f: SpaceMap) -> Sieve:
    if f.target != s.target:
        raise ValidationError("pullback map must land in the sieve's target")
    f = C.intern(f)
    return Sieve(
        f.source,
        frozenset(g for g in C.maps_into(f.source) if C.compose(g, f) in s.maps),
    )


# -- simple covering trees ---------------------------------------------------


@dataclass(frozen=True)
class CoveringLeaf:
    space: FiniteSpace
    factor: SpaceMap | None = None  # optional witness used by decompositions


@dataclass(frozen=True)
class EmptyCoveringLeaf:
    space: FiniteSpace  # empty: the empty family covers it


@dataclass(frozen=True)
class CoveringNode:
    square: DistinguishedSquare
    sub_a: object
    sub_y: object


def tree_root(tree) -> FiniteSpace:
    if isinstance(tree, (CoveringLeaf, EmptyCoveringLeaf)):
        return tree.space
    return tree.square.X


def tree_depth(tree) -> int:
    if isinstance(tree, (CoveringLeaf, EmptyCoveringLeaf)):
        return 0
    return 1 + max(tree_depth(tree.sub_a), tree_depth(tree.sub_y))


def leaf_maps(tree):
    """Root-to-leaf composites, the covering family the tree presents."""
    if isinstance(tree, CoveringLeaf):
        return [SpaceMap.identity(tree.space)]
    if isinstance(tree, EmptyCoveringLeaf):
        return []
    out = [k.then(tree.square.e) for k in leaf_maps(tree.sub_a)]
    out += [k.then(tree.square.p) for k in leaf_maps(tree.sub_y)]
    return out


def validate_tree(tree, P: CdStructure, symbols=None) -> bool:
    """Every internal square distinguished, children sitting on its corners,
    empty leaves only where the structure admits the degenerate square."""
    if isinstance(tree, CoveringLeaf):
        return True
    if isinstance(tree, EmptyCoveringLeaf):
        return tree.space.n == 0 and P.admits_empty_square(symbols)
    if not P.is_distinguished(tree.square, symbols):
        return False
    if tree_root(tree.sub_a) != tree.square.A or tree_root(tree.sub_y) != tree.square.Y:
        return False
    return validate_tree(tree.sub_a, P, symbols) and validate_tree(tree.sub_y, P, symbols)


def tree_to_json(tree) -> dict:
    if isinstance(tree, CoveringLeaf):
        return {"kind": "leaf", "space": list(tree.space.points)}
    if isinstance(tree, EmptyCoveringLeaf):
        return {"kind": "empty"}
    sq = tree.square
    return {
        "kind": "square",
        "X": list(sq.X.points),
        "A": list(sq.A.points),
        "Y": list(sq.Y.points),
        "B": list(sq.B.points),
        "p": sq.p.mapping(),
        "sub_a": tree_to_json(tree.sub_a),
        "sub_y": tree_to_json(tree.sub_y),
    }


# -- containment fixpoint ----------------------------------------------------


def sieve_contains_simple_covering(C: SiteCategory, P: CdStructure, s: Sieve, depth=None):
    """(verdict, tree): verdict True with a witness tree, False when the
    exhausted fixpoint proves no simple covering of any depth lies in the
    sieve, None when a finite depth bound was hit first."""
    key = ("contains-cover", id(P), C.index_of(s.target), s.maps, depth)
    if key in C.cache:
        verdict, witness = C.cache[key]
        return verdict, witness
    X = s.target
    universe = C.maps_into(X)
    covered = {}
    empty_ok = P.admits_empty_square(C.symbols)
    for g in universe:
        if g in s.maps:
            covered[g] = ("leaf",)
        elif g.source.n == 0 and empty_ok:
            covered[g] = ("empty",)
    rounds = 0
    hit_bound = False
    while True:
        if depth is not None and rounds >= depth:
            hit_bound = any(g not in covered for g in universe)
            break
        changed = False
        for g in universe:
            if g in covered:
                continue
            for sq in P.squares_over(C, g.source):
                ge = C.compose(sq.e, g)
                gp = C.compose(sq.p, g)
                if ge in covered and gp in covered:
                    covered[g] = ("node", sq, ge, gp)
                    changed = True
                    break
        rounds += 1
        if not changed:
            break

    def build(g):
        entry = covered[g]
        if entry[0] == "leaf":
            return CoveringLeaf(g.source)
        if entry[0] == "empty":
            return EmptyCoveringLeaf(g.source)
        _, sq, ge, gp = entry
        return CoveringNode(sq, build(ge), build(gp))

    idx = SpaceMap.identity(X)
    if idx in covered:
        result = (True, build(idx))
    elif hit_bound:
        result = (None, None)
    else:
        result = (False, None)
    C.cache[key] = result
    return result


def all_sieves_on(C: SiteCategory, X: FiniteSpace, max_generators: int = 16):
    """Every sieve on X, via down-sets of the factorization preorder on the
    maps into X.  Guarded: the count is exponential in the number of
    factorization classes."""
    universe = list(C.maps_into(X))
    factors_through = []
    for g in universe:
        row = set()
        for j, h in enumerate(universe):
            if any(
                C.compose(k, h) is g or C.compose(k, h) == g
                for k in C.maps_between(g.source, h.source)
            ):
                row.add(j)
        factors_through.append(row)
    classes = []
    class_of = {}
    for i, g in enumerate(universe):
        for c, members in enumerate(classes):
            j = members[0]
            if j in factors_through[i] and i in factors_through[j]:
                members.append(i)
                class_of[i] = c
                break
        else:
            class_of[i] = len(classes)
            classes.append([i])
    if len(classes) > max_generators:
        raise CategoryOverflow(
            f"{len(classes)} factorization classes on {X!r} exceed the sieve "
            f"enumeration bound {max_generators}"
        )
    n = len(classes)
    up = [0] * n  # class order: c1 <= c2 when c1 factors through c2
    for c1 in range(n):
        mask = 0
        i = classes[c1][0]
        for c2 in range(n):
            j = classes[c2][0]
            if i in factors_through[j]:
                mask |= 1 << c2
        up[c1] = mask | (1 << c1)
    from . import kernels

    sieves = []
    for mask in kernels.all_up_sets(tuple(up)):
        down = ((1 << n) - 1) & ~mask
        members = frozenset(
            universe[i] for c in range(n) if (down >> c) & 1 for i in classes[c]
        )
        sieves.append(Sieve(X, members))
    sieves.sort(key=Sieve.sort_key)
    return tuple(sieves)


def covering_sieves(C: SiteCategory, P: CdStructure, X: FiniteSpace, depth=None):
    """All sieves on X containing a simple covering of depth <= depth
    (upward closed by construction: supersets of covering sieves again
    contain the same tree)."""
    if depth is None:
        depth = dimension(X) + 2
    out = []
    for s in all_sieves_on(C, X):
        verdict, _ = sieve_contains_simple_covering(C, P, s, depth)
        if verdict:
            out.append(s)
    return tuple(out)
