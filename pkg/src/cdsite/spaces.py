"""Finite spectral spaces as specialization posets.

A finite T0 space is the same thing as a finite poset.  We write ``x <= y``
when x lies in the closure of {y} (x specializes y).  Opens are then exactly
the generization-closed (up-) sets, closed sets the specialization-closed
(down-) sets, and irreducible closed sets are point closures.  Every point
carries a residue-field symbol; a map of spaces is monotone and may only move
a point onto a point whose symbol it extends.

Point sets are bitmasks internally; the public operations speak in point ids.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import kernels
from .errors import NoRefinement, NoRepair, PreconditionViolated, ValidationError
from .symbols import SymbolOrder, trivial_symbols


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    points: tuple[str, ...]  # sorted ids
    labels: tuple[str, ...]  # residue symbol per point
    up: tuple[int, ...]  # up[i] = bitmask of generizations of point i (incl. i)

    def __post_init__(self):
        n = len(self.points)
        if len(set(self.points)) != n:
            raise ValidationError("point identifiers must be unique")
        if tuple(sorted(self.points)) != self.points:
            raise ValidationError("points must be sorted")
        if len(self.labels) != n or len(self.up) != n:
            raise ValidationError("labels/order tables must match the point list")
        full = (1 << n) - 1
        for i in range(n):
            m = self.up[i]
            if not (m >> i) & 1 or m & ~full:
                raise ValidationError("order table is not reflexive or out of range")
        for i in range(n):
            for j in range(n):
                if (self.up[i] >> j) & 1:
                    if i != j and (self.up[j] >> i) & 1:
                        raise ValidationError(
                            f"antisymmetry violated between {self.points[i]!r} "
                            f"and {self.points[j]!r}"
                        )
                    if self.up[j] & ~self.up[i]:
                        raise ValidationError("order table is not transitive")
        object.__setattr__(self, "_hash", hash((self.points, self.labels, self.up)))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FiniteSpace):
            return NotImplemented
        return (
            self._hash == other._hash
            and self.points == other.points
            and self.labels == other.labels
            and self.up == other.up
        )

    # -- construction -------------------------------------------------------

    @classmethod
    def build(cls, labeled_points, specializations=()) -> "FiniteSpace":
        """Build from (id, label) pairs and a list of asserted pairs a <= b.

        The order is the reflexive-transitive closure of the listed pairs;
        antisymmetry violations are rejected.
        """
        pts = sorted(pid for pid, _ in labeled_points)
        label_by_id = {pid: lab for pid, lab in labeled_points}
        if len(label_by_id) != len(pts):
            raise ValidationError("point identifiers must be unique")
        index = {p: i for i, p in enumerate(pts)}
        n = len(pts)
        up = [1 << i for i in range(n)]
        for a, b in specializations:
            if a not in index or b not in index:
                raise ValidationError(f"unknown point in specialization ({a}, {b})")
            up[index[a]] |= 1 << index[b]
        changed = True
        while changed:
            changed = False
            for i in range(n):
                m = up[i]
                acc = m
                while m:
                    low = m & -m
                    acc |= up[low.bit_length() - 1]
                    m &= m - 1
                if acc != up[i]:
                    up[i] = acc
                    changed = True
        return cls(tuple(pts), tuple(label_by_id[p] for p in pts), tuple(up))

    @classmethod
    def empty(cls) -> "FiniteSpace":
        return cls((), (), ())

    @classmethod
    def single(cls, pid: str, label: str = "k0") -> "FiniteSpace":
        return cls((pid,), (label,), (1,))

    # -- basics --------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def index(self, pid: str) -> int:
        try:
            return self.points.index(pid)
        except ValueError:
            raise ValidationError(f"unknown point identifier {pid!r}") from None

    def mask_of(self, ids) -> int:
        m = 0
        for pid in ids:
            m |= 1 << self.index(pid)
        return m

    def ids_of(self, mask: int) -> tuple[str, ...]:
        return tuple(p for i, p in enumerate(self.points) if (mask >> i) & 1)

    def label_of(self, pid: str) -> str:
        return self.labels[self.index(pid)]

    def leq(self, a: str, b: str) -> bool:
        """a lies in the closure of b."""
        return bool((self.up[self.index(a)] >> self.index(b)) & 1)

    def subspace(self, mask: int) -> "FiniteSpace":
        """Induced space on a subset of points (every subset is constructible)."""
        keep = [i for i in range(self.n) if (mask >> i) & 1]
        pos = {i: k for k, i in enumerate(keep)}
        up = []
        for i in keep:
            m, acc = self.up[i] & mask, 0
            while m:
                low = m & -m
                acc |= 1 << pos[low.bit_length() - 1]
                m &= m - 1
            up.append(acc)
        return FiniteSpace(
            tuple(self.points[i] for i in keep),
            tuple(self.labels[i] for i in keep),
            tuple(up),
        )

    def rename(self, prefix: str) -> "FiniteSpace":
        order = sorted(range(self.n), key=lambda i: prefix + self.points[i])
        pos = {i: k for k, i in enumerate(order)}
        up = []
        for i in order:
            m, acc = self.up[i], 0
            while m:
                low = m & -m
                acc |= 1 << pos[low.bit_length() - 1]
                m &= m - 1
            up.append(acc)
        return FiniteSpace(
            tuple(prefix + self.points[i] for i in order),
            tuple(self.labels[i] for i in order),
            tuple(up),
        )

    def __repr__(self):
        rels = []
        for i in range(self.n):
            m = self.up[i] & ~(1 << i)
            while m:
                low = m & -m
                rels.append(f"{self.points[i]}<={self.points[low.bit_length() - 1]}")
                m &= m - 1
        return f"FiniteSpace({','.join(self.points)}; {' '.join(rels)})"


# Derived per-space tables, cached outside the frozen dataclass.


@lru_cache(maxsize=None)
def down_masks(space: FiniteSpace) -> tuple[int, ...]:
    down = [0] * space.n
    for i in range(space.n):
        m = space.up[i]
        while m:
            low = m & -m
            down[low.bit_length() - 1] |= 1 << i
            m &= m - 1
    return tuple(down)


@lru_cache(maxsize=None)
def heights(space: FiniteSpace) -> tuple[int, ...]:
    return tuple(kernels.point_heights(space.up))


@lru_cache(maxsize=None)
def open_masks(space: FiniteSpace) -> tuple[int, ...]:
    return tuple(kernels.all_up_sets(space.up))


@lru_cache(maxsize=None)
def closed_masks(space: FiniteSpace) -> tuple[int, ...]:
    full = space.full_mask
    return tuple(sorted(full & ~m for m in open_masks(space)))


@lru_cache(maxsize=None)
def maximal_mask(space: FiniteSpace) -> int:
    m = 0
    for i in range(space.n):
        if space.up[i] == 1 << i:
            m |= 1 << i
    return m


def closure_mask(space: FiniteSpace, mask: int) -> int:
    return kernels.down_closure(down_masks(space), mask)


def interior_closure_mask(space: FiniteSpace, mask: int) -> int:
    return kernels.up_closure(space.up, mask)


def closure(space: FiniteSpace, pts) -> frozenset:
    """All specializations of a set of points (the topological closure)."""
    return frozenset(space.ids_of(closure_mask(space, space.mask_of(pts))))


def dimension(space: FiniteSpace) -> int:
    """Length of the longest strict specialization chain; -1 for the empty space."""
    if space.n == 0:
        return -1
    return max(heights(space))


@dataclass(frozen=True)
class OpenSubset:
    space: FiniteSpace
    mask: int

    def __post_init__(self):
        if self.mask & ~self.space.full_mask:
            raise ValidationError("open subset mask out of range")
        if not kernels.is_up_set(self.space.up, self.mask):
            raise ValidationError("subset is not generization-closed")

    @property
    def points(self) -> tuple[str, ...]:
        return self.space.ids_of(self.mask)

    @classmethod
    def of(cls, space: FiniteSpace, pts) -> "OpenSubset":
        return cls(space, space.mask_of(pts))


@dataclass(frozen=True)
class IncreasingSequence:
    space: FiniteSpace
    points: tuple[str, ...]

    def __post_init__(self):
        for a, b in zip(self.points, self.points[1:]):
            if a == b or not self.space.leq(a, b):
                raise ValidationError(f"{a!r} must specialize {b!r} strictly")

    @property
    def length(self) -> int:
        return len(self.points) - 1


def is_dense_open(space: FiniteSpace, u: OpenSubset) -> bool:
    """True when the open meets every irreducible component, i.e. contains
    every maximal point."""
    if u.space is not space and u.space != space:
        raise ValidationError("open subset belongs to a different space")
    return maximal_mask(space) & ~u.mask == 0


def has_increasing_sequence(space: FiniteSpace, z: str, d: int) -> bool:
    """Is there a strict chain z = x_0 < x_1 < ... < x_d?"""
    return heights(space)[space.index(z)] >= d


def increasing_sequences_from(space: FiniteSpace, z: str, d: int):
    """All strict chains of length d starting at z (test oracle, small spaces)."""
    out = []

    def grow(chain):
        if len(chain) == d + 1:
            out.append(tuple(space.points[i] for i in chain))
            return
        i = chain[-1]
        m = space.up[i] & ~(1 << i)
        while m:
            low = m & -m
            grow(chain + [low.bit_length() - 1])
            m &= m - 1

    grow([space.index(z)])
    return out


# -- the standard density structure ---------------------------------------


@lru_cache(maxsize=None)
def density_minimum_mask(space: FiniteSpace, d: int) -> int:
    """The smallest member of D_d: the open hull of the points that do not
    start any chain of length d.  D_d is closed under intersection, so this
    minimum generates the whole class by upward closure."""
    if d < 0:
        raise ValidationError("density index must be nonnegative")
    hs = heights(space)
    short = 0
    for i in range(space.n):
        if hs[i] < d:
            short |= 1 << i
    return kernels.up_closure(space.up, short)


def density_is_member(space: FiniteSpace, mask: int, d: int) -> bool:
    return kernels.is_up_set(space.up, mask) and (
        density_minimum_mask(space, d) & ~mask == 0
    )


@lru_cache(maxsize=None)
def density_class_masks(space: FiniteSpace, d: int) -> tuple[int, ...]:
    base = density_minimum_mask(space, d)
    return tuple(m for m in open_masks(space) if base & ~m == 0)


def density_class(space: FiniteSpace, d: int) -> tuple[OpenSubset, ...]:
    """All opens whose complement points each start a chain of length d."""
    return tuple(OpenSubset(space, m) for m in density_class_masks(space, d))


class StandardDensity:
    """The density structure whose d-dense opens have complements of points
    with specialization chains of length d going up."""

    name = "standard"

    def minimum_mask(self, space: FiniteSpace, d: int) -> int:
        return density_minimum_mask(space, d)

    def class_masks(self, space: FiniteSpace, d: int) -> tuple[int, ...]:
        return density_class_masks(space, d)

    def is_member(self, space: FiniteSpace, mask: int, d: int) -> bool:
        return density_is_member(space, mask, d)

    def dimension(self, space: FiniteSpace) -> int:
        return dimension(space)


STANDARD_DENSITY = StandardDensity()


# -- chain surgery ---------------------------------------------------------


def repair_middle(space: FiniteSpace, chain, closed_pts) -> str:
    """Replace the middle of a length-2 chain so it avoids a closed set.

    May fail: a finite poset only guarantees a replacement when no locally
    closed point has dimension >= 2 below it, and on posets every singleton
    is locally closed.  Failure raises NoRepair with a certificate.
    """
    x0, x1, x2 = chain
    IncreasingSequence(space, (x0, x1, x2))
    zmask = space.mask_of(closed_pts)
    if closure_mask(space, zmask) != zmask:
        raise ValidationError("the forbidden set must be specialization-closed")
    i2 = space.index(x2)
    if (zmask >> i2) & 1:
        raise PreconditionViolated("the top of the chain lies in the closed set")
    i0 = space.index(x0)
    if not (zmask >> space.index(x1)) & 1:
        return x1
    between = space.up[i0] & down_masks(space)[i2] & ~(1 << i0) & ~(1 << i2)
    cand = between & ~zmask
    if not cand:
        raise NoRepair((x0, x1, x2), space.ids_of(zmask), x2)
    return space.ids_of(cand)[0]  # smallest identifier


def refine_chain_through_dense(space: FiniteSpace, u: OpenSubset, chain) -> tuple[str, ...]:
    """Rebuild a chain so every point after the first lies in a dense open.

    Fixes the top point first, then repairs downward; propagates repair
    failure as NoRefinement.
    """
    if not is_dense_open(space, u):
        raise PreconditionViolated("the open subset is not dense")
    IncreasingSequence(space, tuple(chain))
    pts = list(chain)
    d = len(pts) - 1
    if d == 0:
        return tuple(pts)
    umask = u.mask
    if not (umask >> space.index(pts[d])) & 1:
        top = space.index(pts[d])
        cand = space.up[top] & umask & ~(1 << top)
        if not cand:
            raise NoRefinement(
                f"no point of the dense open generizes {pts[d]!r}"
            )
        pts[d] = space.ids_of(cand)[0]
    complement = space.ids_of(space.full_mask & ~umask)
    for i in range(d - 1, 0, -1):
        if (umask >> space.index(pts[i])) & 1:
            continue
        try:
            pts[i] = repair_middle(space, (pts[i - 1], pts[i], pts[i + 1]), complement)
        except NoRepair as exc:
            raise NoRefinement(str(exc)) from exc
    return tuple(pts)


def closure_witness(space: FiniteSpace, pts, boundary_point: str) -> str:
    """A point of the set whose closure contains the given point."""
    ymask = space.mask_of(pts)
    i = space.index(boundary_point)
    if not (closure_mask(space, ymask) >> i) & 1:
        raise PreconditionViolated("the point does not lie in the closure of the set")
    if (ymask >> i) & 1:
        return boundary_point
    cand = ymask & space.up[i]
    return space.ids_of(cand)[0]


# -- maps ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpaceMap:
    source: FiniteSpace
    target: FiniteSpace
    graph: tuple[int, ...]  # source index -> target index

    def __post_init__(self):
        if len(self.graph) != self.source.n:
            raise ValidationError("graph must be total on the source")
        for t in self.graph:
            if not 0 <= t < max(self.target.n, 1) and self.source.n:
                raise ValidationError("graph image out of range")
        if self.source.n and self.target.n == 0:
            raise ValidationError("no map from a nonempty space to the empty space")
        if not kernels.is_monotone(self.graph, self.source.up, self.target.up):
            raise ValidationError("map is not monotone for specialization")
        object.__setattr__(self, "_hash", hash((self.source, self.target, self.graph)))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, SpaceMap):
            return NotImplemented
        return (
            self._hash == other._hash
            and self.graph == other.graph
            and self.source == other.source
            and self.target == other.target
        )

    @classmethod
    def from_ids(cls, source, target, mapping) -> "SpaceMap":
        missing = set(source.points) - set(mapping)
        if missing:
            raise ValidationError(f"graph missing points {sorted(missing)}")
        graph = tuple(target.index(mapping[p]) for p in source.points)
        return cls(source, target, graph)

    @classmethod
    def identity(cls, space: FiniteSpace) -> "SpaceMap":
        return cls(space, space, tuple(range(space.n)))

    @classmethod
    def inclusion(cls, sub: FiniteSpace, ambient: FiniteSpace) -> "SpaceMap":
        return cls(sub, ambient, tuple(ambient.index(p) for p in sub.points))

    def __call__(self, pid: str) -> str:
        return self.target.points[self.graph[self.source.index(pid)]]

    def then(self, other: "SpaceMap") -> "SpaceMap":
        """self followed by other."""
        if self.target != other.source:
            raise ValidationError("maps are not composable")
        return SpaceMap(
            self.source, other.target, tuple(other.graph[t] for t in self.graph)
        )

    def mapping(self) -> dict:
        return {p: self.target.points[self.graph[i]] for i, p in enumerate(self.source.points)}

    def image(self) -> int:
        return kernels.image_mask(self.graph, self.source.full_mask)

    def image_of(self, mask: int) -> int:
        return kernels.image_mask(self.graph, mask)

    def preimage_of(self, mask: int) -> int:
        return kernels.preimage_mask(self.graph, mask)

    def label_compatible(self, symbols: SymbolOrder) -> bool:
        return all(
            symbols.leq(self.target.labels[t], self.source.labels[i])
            for i, t in enumerate(self.graph)
        )

    def is_injective(self) -> bool:
        return len(set(self.graph)) == self.source.n

    def is_label_preserving(self) -> bool:
        return all(
            self.target.labels[t] == self.source.labels[i]
            for i, t in enumerate(self.graph)
        )

    def is_embedding(self) -> bool:
        """Injective, order-isomorphic onto its image, label-preserving."""
        if not self.is_injective() or not self.is_label_preserving():
            return False
        for i in range(self.source.n):
            for j in range(self.source.n):
                fwd = (self.source.up[i] >> j) & 1
                bwd = (self.target.up[self.graph[i]] >> self.graph[j]) & 1
                if fwd != bwd:
                    return False
        return True

    def is_open_embedding(self) -> bool:
        return self.is_embedding() and kernels.is_up_set(self.target.up, self.image())

    def is_closed_embedding(self) -> bool:
        return (
            self.is_embedding()
            and closure_mask(self.target, self.image()) == self.image()
        )

    def is_iso(self) -> bool:
        return self.source.n == self.target.n and self.is_embedding()

    def is_etale_like(self) -> bool:
        """Label-preserving local isomorphism of finite spaces."""
        lab_src = tuple(self.source.labels)
        lab_tgt = tuple(self.target.labels)
        return kernels.is_etale_like(
            self.graph, self.source.up, self.target.up, lab_src, lab_tgt
        )

    def is_proper_like(self) -> bool:
        """Lifts specializations, and distinct points with equal image never
        share a generization (the separatedness the closed-diagonal arguments
        need)."""
        return kernels.is_proper_like(
            self.graph,
            self.source.up,
            down_masks(self.source),
            down_masks(self.target),
        )

    def restrict(self, src_mask: int, tgt_mask: int) -> "SpaceMap":
        if self.image_of(src_mask) & ~tgt_mask:
            raise ValidationError("restriction does not land in the target subset")
        sub = self.source.subspace(src_mask)
        tgt = self.target.subspace(tgt_mask)
        return SpaceMap.from_ids(
            sub, tgt, {p: self.target.points[self.graph[self.source.index(p)]] for p in sub.points}
        )

    def __repr__(self):
        pairs = ",".join(f"{p}>{self.target.points[t]}" for p, t in zip(self.source.points, self.graph))
        return f"SpaceMap({pairs})"


def disjoint_union(left: FiniteSpace, right: FiniteSpace, prefixes=("0:", "1:")):
    """Coproduct space plus the two injections (points tagged to stay unique)."""
    lt = left.rename(prefixes[0])
    rt = right.rename(prefixes[1])
    pts = sorted(lt.points + rt.points)
    labels = {p: lt.labels[lt.index(p)] for p in lt.points}
    labels.update({p: rt.labels[rt.index(p)] for p in rt.points})
    pairs = []
    for part in (lt, rt):
        for i in range(part.n):
            m = part.up[i] & ~(1 << i)
            while m:
                low = m & -m
                pairs.append((part.points[i], part.points[low.bit_length() - 1]))
                m &= m - 1
    total = FiniteSpace.build([(p, labels[p]) for p in pts], pairs)
    inj_l = SpaceMap.from_ids(left, total, {p: prefixes[0] + p for p in left.points})
    inj_r = SpaceMap.from_ids(right, total, {p: prefixes[1] + p for p in right.points})
    return total, inj_l, inj_r


def monotone_maps_between(
    source: FiniteSpace, target: FiniteSpace, symbols: SymbolOrder
) -> tuple[SpaceMap, ...]:
    """All monotone, label-compatible maps between two spaces."""
    if source.n == 0:
        return (SpaceMap(source, target, ()),)
    if target.n == 0:
        return ()
    allowed = []
    for i in range(source.n):
        m = 0
        for t in range(target.n):
            if symbols.leq(target.labels[t], source.labels[i]):
                m |= 1 << t
        allowed.append(m)
    graphs = kernels.monotone_maps(source.up, target.up, allowed)
    return tuple(SpaceMap(source, target, g) for g in graphs)


def pushforward_density(f: SpaceMap, u: OpenSubset, v: OpenSubset, d: int) -> OpenSubset:
    """Push a d-dense open forward: W = target minus the closure of the image
    of the complement.  Always satisfies f^{-1}(W) inside V; W is d-dense in
    the target whenever chain refinement works on the source (in particular
    whenever the source has dimension <= 1).
    """
    src, tgt = f.source, f.target
    if u.space != tgt or v.space != src:
        raise ValidationError("subsets must live on the target resp. source of the map")
    pre_u = f.preimage_of(u.mask)
    if maximal_mask(src) & ~pre_u:
        raise PreconditionViolated("the preimage of the open is not dense in the source")
    for t in range(tgt.n):
        if not (u.mask >> t) & 1:
            continue
        fiber = [i for i in range(src.n) if f.graph[i] == t]
        for a in fiber:
            for b in fiber:
                if a != b and (src.up[a] >> b) & 1:
                    raise PreconditionViolated(
                        "a fiber over the open contains a strict specialization"
                    )
    if not density_is_member(src, v.mask, d):
        raise PreconditionViolated("the source open is not d-dense")
    z = src.full_mask & ~v.mask
    w = tgt.full_mask & ~closure_mask(tgt, f.image_of(z))
    return OpenSubset(tgt, w)


# -- serialization ----------------------------------------------------------


def space_to_json(space: FiniteSpace) -> dict:
    pairs = []
    for i in range(space.n):
        m = space.up[i] & ~(1 << i)
        while m:
            low = m & -m
            pairs.append([space.points[i], space.points[low.bit_length() - 1]])
            m &= m - 1
    return {
        "points": [
            {"id": p, "label": space.labels[i]} for i, p in enumerate(space.points)
        ],
        "specializations": sorted(pairs),
    }


def space_from_json(obj: dict) -> FiniteSpace:
    if not isinstance(obj, dict) or "points" not in obj:
        raise ValidationError("space object must have a 'points' list")
    labeled = []
    for entry in obj["points"]:
        if "id" not in entry or "label" not in entry:
            raise ValidationError("each point needs an 'id' and a 'label'")
        labeled.append((entry["id"], entry["label"]))
    return FiniteSpace.build(labeled, obj.get("specializations", ()))


def trivial_symbols_for(*spaces: FiniteSpace) -> SymbolOrder:
    names = set()
    for s in spaces:
        names.update(s.labels)
    return trivial_symbols(names or {"k0"})
