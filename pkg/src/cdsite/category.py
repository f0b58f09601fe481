"""Finite categories of spaces: objects, hom-sets, closure, fiber products.

A SiteCategory is a finite list of spaces together with finite hom-sets of
monotone label-compatible maps, closed under composition and containing the
identities.  The empty space is always an object and every space receives the
empty map, so degenerate squares exist wherever a structure admits them.
"""

from __future__ import annotations

from .errors import CategoryOverflow, MissingPullback, ValidationError
from .spaces import FiniteSpace, SpaceMap, closed_masks, monotone_maps_between, open_masks
from .symbols import SymbolOrder

DEFAULT_MAX_OBJECTS = 500
DEFAULT_MAX_MAPS = 200_000


class SiteCategory:
    """Immutable by convention; carries a cache dict for memoized analyses.

    All hom-set members are interned, and compose() memoizes composition on
    the interned objects, so membership tests hit the identity fast path.
    """

    def __init__(self, objects, homs, symbols: SymbolOrder, validate: bool = True):
        self.objects: tuple[FiniteSpace, ...] = tuple(objects)
        self.symbols = symbols
        self._index = {}
        for i, obj in enumerate(self.objects):
            if obj in self._index:
                raise ValidationError("duplicate object in category")
            self._index[obj] = i
        self._intern: dict = {}
        self._homs = {}
        for key, maps in homs.items():
            self._homs[key] = tuple(
                self.intern(f) for f in sorted(maps, key=lambda f: f.graph)
            )
        self._hom_sets = {key: frozenset(v) for key, v in self._homs.items()}
        self._into = {}
        self._outof = {}
        for (i, j), maps in sorted(self._homs.items()):
            self._into.setdefault(j, []).extend(maps)
            self._outof.setdefault(i, []).extend(maps)
        self._compose_cache: dict = {}
        self.cache: dict = {}
        if validate:
            self._validate()

    def intern(self, f: SpaceMap) -> SpaceMap:
        return self._intern.setdefault(f, f)

    def compose(self, f: SpaceMap, g: SpaceMap) -> SpaceMap:
        """f followed by g, memoized and interned."""
        key = (id(f), id(g))
        out = self._compose_cache.get(key)
        if out is None:
            out = self.intern(f.then(g))
            self._compose_cache[key] = out
        return out

    def _validate(self):
        for (i, j), maps in self._homs.items():
            for f in maps:
                if f.source != self.objects[i] or f.target != self.objects[j]:
                    raise ValidationError("hom-set entry with wrong endpoints")
                if not f.label_compatible(self.symbols):
                    raise ValidationError(f"map {f!r} is not label-compatible")
        for i, obj in enumerate(self.objects):
            if SpaceMap.identity(obj) not in self._hom_sets.get((i, i), frozenset()):
                raise ValidationError("category is missing an identity map")
        for (i, j), maps in self._homs.items():
            for f in maps:
                for k in range(len(self.objects)):
                    for g in self._homs.get((j, k), ()):
                        if f.then(g) not in self._hom_sets.get((i, k), frozenset()):
                            raise ValidationError(
                                "category is not closed under composition"
                            )

    # -- lookups -------------------------------------------------------------

    def index_of(self, obj: FiniteSpace) -> int:
        try:
            return self._index[obj]
        except KeyError:
            raise ValidationError("space is not an object of the category") from None

    def contains_object(self, obj: FiniteSpace) -> bool:
        return obj in self._index

    def maps_between(self, src: FiniteSpace, tgt: FiniteSpace):
        return self._homs.get((self.index_of(src), self.index_of(tgt)), ())

    def maps_into(self, tgt: FiniteSpace):
        return tuple(self._into.get(self.index_of(tgt), ()))

    def maps_from(self, src: FiniteSpace):
        return tuple(self._outof.get(self.index_of(src), ()))

    def contains_map(self, f: SpaceMap) -> bool:
        if not self.contains_object(f.source) or not self.contains_object(f.target):
            return False
        key = (self.index_of(f.source), self.index_of(f.target))
        return f in self._hom_sets.get(key, frozenset())

    def all_maps(self):
        for key in sorted(self._homs):
            yield from self._homs[key]

    @property
    def map_count(self) -> int:
        return sum(len(v) for v in self._homs.values())

    def __repr__(self):
        return f"SiteCategory({len(self.objects)} objects, {self.map_count} maps)"


def _with_empty(spaces):
    out = list(dict.fromkeys(spaces))
    empty = FiniteSpace.empty()
    if empty not in out:
        out.append(empty)
    return out


def full_subsite(spaces, symbols: SymbolOrder) -> SiteCategory:
    """The full subcategory of labeled finite spaces on the given objects
    (plus the empty space): every monotone label-compatible map is present,
    so composition closure holds by construction."""
    objects = _with_empty(spaces)
    if len(objects) > DEFAULT_MAX_OBJECTS:
        raise CategoryOverflow(f"{len(objects)} objects exceed the cap")
    homs = {}
    for i, src in enumerate(objects):
        for j, tgt in enumerate(objects):
            maps = monotone_maps_between(src, tgt, symbols)
            if maps:
                homs[(i, j)] = maps
    return SiteCategory(objects, homs, symbols, validate=False)


def subspace_site(ambient: FiniteSpace, symbols: SymbolOrder) -> SiteCategory:
    """Full subcategory on every subspace of the ambient space (all subsets
    are constructible, so traces of opens on closeds etc. are all present)."""
    objects = [ambient.subspace(m) for m in range(1 << ambient.n)]
    return full_subsite(objects, symbols)


def generated_site(
    spaces,
    maps=(),
    symbols: SymbolOrder | None = None,
    *,
    subspaces: str = "all",
    max_objects: int = DEFAULT_MAX_OBJECTS,
    max_maps: int = DEFAULT_MAX_MAPS,
) -> SiteCategory:
    """Close listed generators under identities, subspace inclusions,
    restrictions of listed maps, the empty maps, and composition.

    subspaces: "all" adds every open and closed subspace of each listed
    object (fiber products along embeddings then exist for free), "none"
    adds only the empty space.
    """
    if symbols is None:
        names = set()
        for s in spaces:
            names.update(s.labels)
        symbols = SymbolOrder(tuple(sorted(names or {"k0"})))
    objects = _with_empty(spaces)
    if subspaces not in ("all", "none"):
        raise ValidationError("subspaces must be 'all' or 'none'")
    if subspaces == "all":
        for base in list(objects):
            masks = set(open_masks(base)) | set(closed_masks(base))
            for mask in sorted(masks):
                sub = base.subspace(mask)
                if sub not in objects:
                    objects.append(sub)
                if len(objects) > max_objects:
                    raise CategoryOverflow(
                        f"subspace closure exceeded {max_objects} objects"
                    )
    map_set = set()

    def add(f: SpaceMap):
        if not f.label_compatible(symbols):
            raise ValidationError(f"generator map {f!r} is not label-compatible")
        map_set.add(f)

    for obj in objects:
        add(SpaceMap.identity(obj))
        add(SpaceMap(FiniteSpace.empty(), obj, ()))
    for f in maps:
        if f.source not in objects or f.target not in objects:
            raise ValidationError("generator map endpoints must be listed objects")
        add(f)
    # inclusions between nested subspace objects of the same point universe
    for small in objects:
        for big in objects:
            if small is big or small.n > big.n:
                continue
            if set(small.points) <= set(big.points):
                try:
                    inc = SpaceMap.inclusion(small, big)
                except ValidationError:
                    continue
                if inc.is_embedding():
                    add(inc)
    # restrictions of generator maps to subspace objects
    for f in list(map_set):
        for src in objects:
            if not set(src.points) <= set(f.source.points) or src.n == 0:
                continue
            src_mask = f.source.mask_of(src.points)
            if f.source.subspace(src_mask) != src:
                continue
            img = f.image_of(src_mask)
            for tgt in objects:
                if not set(tgt.points) <= set(f.target.points):
                    continue
                tgt_mask = f.target.mask_of(tgt.points)
                if f.target.subspace(tgt_mask) != tgt or img & ~tgt_mask:
                    continue
                add(f.restrict(src_mask, tgt_mask))
                if len(map_set) > max_maps:
                    raise CategoryOverflow("restriction closure exceeded the map cap")
    # composition closure
    changed = True
    while changed:
        changed = False
        by_source = {}
        for f in map_set:
            by_source.setdefault(f.source, []).append(f)
        for f in list(map_set):
            for g in by_source.get(f.target, ()):
                h = f.then(g)
                if h not in map_set:
                    map_set.add(h)
                    changed = True
                    if len(map_set) > max_maps:
                        raise CategoryOverflow("composition closure exceeded the map cap")
    index = {obj: i for i, obj in enumerate(objects)}
    homs = {}
    for f in map_set:
        homs.setdefault((index[f.source], index[f.target]), []).append(f)
    return SiteCategory(objects, homs, symbols)


# -- fiber products ----------------------------------------------------------


def fiber_product_pairs(f: SpaceMap, g: SpaceMap):
    """Index pairs (i, j) with f(i) = g(j); the point set of the fiber product."""
    if f.target != g.target:
        raise ValidationError("fiber product needs a common target")
    return [
        (i, j)
        for i in range(f.source.n)
        for j in range(g.source.n)
        if f.graph[i] == g.graph[j]
    ]


def canonical_fiber_product(f: SpaceMap, g: SpaceMap, symbols: SymbolOrder):
    """The pair space with componentwise order and least-upper-bound labels,
    with its two projections.  Raises MissingPullback when some pair of
    residue symbols has no unique least common extension."""
    pairs = fiber_product_pairs(f, g)
    labeled = []
    for i, j in pairs:
        lab = symbols.join(f.source.labels[i], g.source.labels[j])
        if lab is None:
            raise MissingPullback(
                f"no least common extension of {f.source.labels[i]!r} and "
                f"{g.source.labels[j]!r}"
            )
        labeled.append((f"({f.source.points[i]},{g.source.points[j]})", lab))
    rels = []
    for a, (i1, j1) in enumerate(pairs):
        for b, (i2, j2) in enumerate(pairs):
            if a == b:
                continue
            if (f.source.up[i1] >> i2) & 1 and (g.source.up[j1] >> j2) & 1:
                rels.append((labeled[a][0], labeled[b][0]))
    prod = FiniteSpace.build(labeled, rels)
    names = {labeled[k][0]: pairs[k] for k in range(len(pairs))}
    proj_f = SpaceMap.from_ids(
        prod, f.source, {nm: f.source.points[ij[0]] for nm, ij in names.items()}
    )
    proj_g = SpaceMap.from_ids(
        prod, g.source, {nm: g.source.points[ij[1]] for nm, ij in names.items()}
    )
    return prod, proj_f, proj_g


def is_pullback_in(C: SiteCategory, pB: SpaceMap, eB: SpaceMap, e: SpaceMap, p: SpaceMap) -> bool:
    """Universal property of (B; pB: B->A, eB: B->Y) against every object of C."""
    if pB.source != eB.source:
        return False
    if pB.then(e) != eB.then(p):
        return False
    B = pB.source
    for T in C.objects:
        pairs = [
            (u, v)
            for u in C.maps_between(T, e.source)
            for v in C.maps_between(T, p.source)
            if u.then(e) == v.then(p)
        ]
        mediating = {
            (w.then(pB), w.then(eB)): w for w in C.maps_between(T, B)
        }
        if len(mediating) != len(C.maps_between(T, B)):
            return False  # (pB, eB) not jointly monic on T-points
        for u, v in pairs:
            if (u, v) not in mediating:
                return False
    return True
