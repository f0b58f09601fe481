"""The three axioms on a square family: completeness, regularity, boundedness.

Completeness: pulling the sieve of any distinguished square back along any
map of the category leaves a sieve that still contains a simple covering.

Regularity: every distinguished square is a pullback, e is a monomorphism,
and for every pair u, v into the Y-corner agreeing on the base, some covering
sieve refines the pair into the diagonal or into pairs through the B-corner
(surjectivity of the self-product comparison on representable sheaves).

Boundedness: every distinguished square admits a refinement over the same
base that is reducing for the density structure in every degree up to
dimension + 1.  Reducing-witness squares are found constructively first (the
shrinking arguments the bounded-ness proofs use) with an exhaustive search
over subspace squares as fallback, so failures are certified.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .category import SiteCategory
from .errors import ValidationError
from .spaces import (
    FiniteSpace,
    SpaceMap,
    StandardDensity,
    closure_mask,
    dimension,
    interior_closure_mask,
)
from .sieves import Sieve, sieve_contains_simple_covering, square_sieve
from .squares import CdStructure, DistinguishedSquare, all_squares, make_square


@dataclass(frozen=True)
class CompletenessReport:
    verdict: object  # True / False / None
    counterexample: tuple | None = None
    squares_checked: int = 0
    base_changes_checked: int = 0


@dataclass(frozen=True)
class RegularityReport:
    verdict: bool
    reason: str = "ok"
    counterexample: tuple | None = None
    squares_checked: int = 0


@dataclass(frozen=True)
class ReducingReport:
    verdict: bool
    degree: int
    minimal_triple: tuple  # (B-min ids, A-min ids, Y-min ids)
    witness: DistinguishedSquare | None = None
    witness_base: tuple = ()


@dataclass(frozen=True)
class BoundednessReport:
    verdict: bool
    counterexample: tuple | None = None
    squares_checked: int = 0
    reports: tuple = field(default_factory=tuple)


# -- completeness ------------------------------------------------------------


def _base_change_covers(C, P, sq, f, sieve_maps) -> bool:
    """Depth-1 fast path: when p embeds, the base change of the square along f
    is a subspace square over the source of f whose legs already lie in the
    pulled sieve."""
    if not sq.p.is_embedding():
        return False
    X2 = f.source
    mA = f.preimage_of(sq.e.image())
    mY = f.preimage_of(sq.p.image())
    A2 = X2.subspace(mA)
    Y2 = X2.subspace(mY)
    B2 = X2.subspace(mA & mY)
    if not (C.contains_object(A2) and C.contains_object(Y2) and C.contains_object(B2)):
        return False
    e2 = C.intern(SpaceMap.inclusion(A2, X2))
    p2 = C.intern(SpaceMap.inclusion(Y2, X2))
    if C.compose(e2, f) not in sieve_maps or C.compose(p2, f) not in sieve_maps:
        return False
    sq2 = make_square(
        e2,
        p2,
        SpaceMap.inclusion(B2, Y2),
        SpaceMap.inclusion(B2, A2),
        sq.tag,
    )
    return P.is_distinguished(sq2, C.symbols)


def is_complete(C: SiteCategory, P: CdStructure, depth=None) -> CompletenessReport:
    squares = 0
    pulls = 0
    inconclusive = False
    for X in C.objects:
        for sq in P.squares_over(C, X):
            squares += 1
            s = square_sieve(C, sq)
            smaps = s.maps
            for f in C.maps_into(X):
                pulls += 1
                if f in smaps:  # the pulled sieve then contains the identity
                    continue
                if _base_change_covers(C, P, sq, f, smaps):
                    continue
                pulled = Sieve(
                    f.source,
                    frozenset(
                        g for g in C.maps_into(f.source) if C.compose(g, f) in smaps
                    ),
                )
                verdict, _ = sieve_contains_simple_covering(C, P, pulled, depth)
                if verdict is False:
                    return CompletenessReport(False, (sq, f), squares, pulls)
                if verdict is None:
                    inconclusive = True
    return CompletenessReport(None if inconclusive else True, None, squares, pulls)


# -- regularity --------------------------------------------------------------


def _b_pair_table(C, sq, T):
    """For maps out of T: composite-with-eB -> [(b, composite-with-pB)]."""
    key = ("bpairs", id(sq), C.index_of(T))
    if key not in C.cache:
        table = {}
        for b in C.maps_between(T, sq.B):
            table.setdefault(C.compose(b, sq.eB), []).append(C.compose(b, sq.pB))
        C.cache[key] = table
    return C.cache[key]


def _pair_refines_locally(C, P, sq, u, v, depth):
    """Covering sieve of the pair's domain whose members all factor through
    the diagonal or through agreeing pairs into the B-corner."""
    U = u.source
    members = []
    for g in C.maps_into(U):
        ug = C.compose(g, u)
        vg = C.compose(g, v)
        if ug == vg:
            members.append(g)
            continue
        table = _b_pair_table(C, sq, g.source)
        lefts = table.get(ug, ())
        rights = table.get(vg, ())
        if any(pb1 == pb2 for pb1 in lefts for pb2 in rights):
            members.append(g)
    verdict, _ = sieve_contains_simple_covering(C, P, Sieve(U, frozenset(members)), depth)
    return verdict is True


def is_regular(C: SiteCategory, P: CdStructure, depth=None) -> RegularityReport:
    from .squares import is_canonical_pullback

    squares = 0
    for X in C.objects:
        for sq in P.squares_over(C, X):
            squares += 1
            if not is_canonical_pullback(sq, C.symbols):
                return RegularityReport(False, "not_pullback", (sq,), squares)
            if not sq.e.is_injective():
                return RegularityReport(False, "e_not_mono", (sq,), squares)
            if sq.p.is_injective():
                continue  # pairs over the base cannot differ
            for U in C.objects:
                groups = {}
                for u in C.maps_between(U, sq.Y):
                    groups.setdefault(C.compose(u, sq.p), []).append(u)
                for _, us in sorted(groups.items(), key=lambda kv: kv[0].graph):
                    for a in range(len(us)):
                        for b in range(a + 1, len(us)):
                            if not _pair_refines_locally(C, P, sq, us[a], us[b], depth):
                                return RegularityReport(
                                    False,
                                    "not_locally_surjective",
                                    (sq, us[a], us[b]),
                                    squares,
                                )
    return RegularityReport(True, "ok", None, squares)


# -- reducing squares --------------------------------------------------------


def _restricted_square(sq: DistinguishedSquare, xm: int, am: int, ym: int):
    """The square cut down to a subset of each corner, with restricted maps;
    None when some map fails to restrict."""
    bm = 0
    for b in range(sq.B.n):
        if (ym >> sq.eB.graph[b]) & 1 and (am >> sq.pB.graph[b]) & 1:
            bm |= 1 << b
    try:
        e2 = sq.e.restrict(am, xm)
        p2 = sq.p.restrict(ym, xm)
        eb2 = sq.eB.restrict(bm, ym)
        pb2 = sq.pB.restrict(bm, am)
        return make_square(e2, p2, eb2, pb2, sq.tag), bm
    except ValidationError:
        return None, bm


def _verify_reducing_witness(sq, structure_name, symbols, density, d, xm, am, ym, bmin, amin, ymin):
    from .squares import classify_square

    if am & ~amin or ym & ~ymin:
        return None
    if not density.is_member(sq.X, xm, d):
        return None
    if sq.e.image_of(am) & ~xm or sq.p.image_of(ym) & ~xm:
        return None
    restricted, bm = _restricted_square(sq, xm, am, ym)
    if restricted is None or bm & ~bmin:
        return None
    if not classify_square(restricted, structure_name, symbols):
        return None
    return restricted


def _upper_style_candidate(sq, density, d, bmin, amin, ymin):
    X, A, Y, B = sq.X, sq.A, sq.Y, sq.B
    removed = sq.e.image_of(A.full_mask & ~amin) | sq.p.image_of(Y.full_mask & ~ymin)
    x0 = X.full_mask & ~closure_mask(X, removed)
    a1 = sq.e.preimage_of(x0)
    y1 = sq.p.preimage_of(x0)
    b1 = 0
    for b in range(B.n):
        if (y1 >> sq.eB.graph[b]) & 1 and (a1 >> sq.pB.graph[b]) & 1:
            b1 |= 1 << b
    bmin1 = bmin & b1
    z = b1 & ~bmin1
    cc = x0 & ~sq.e.image_of(a1)
    q_img = sq.p.image_of(sq.eB.image_of(z))
    xm = x0 & ~(cc & closure_mask(X, q_img))
    am = sq.e.preimage_of(xm)
    part1 = interior_closure_mask(Y, sq.eB.image_of(bmin1))
    part2 = sq.p.preimage_of(xm & ~sq.e.image_of(am))
    ym = (part1 | part2) & y1
    return xm, am & amin, ym & ymin


def _lower_style_candidate(sq, density, d, bmin, amin, ymin):
    X, A, Y, B = sq.X, sq.A, sq.Y, sq.B
    removed = sq.e.image_of(A.full_mask & ~amin) | sq.p.image_of(Y.full_mask & ~ymin)
    x0 = X.full_mask & ~closure_mask(X, removed)
    a1 = sq.e.preimage_of(x0)
    y1 = sq.p.preimage_of(x0)
    b1 = 0
    for b in range(B.n):
        if (y1 >> sq.eB.graph[b]) & 1 and (a1 >> sq.pB.graph[b]) & 1:
            b1 |= 1 << b
    bmin1 = bmin & b1
    xm = x0 & ~sq.p.image_of(sq.eB.image_of(b1 & ~bmin1))
    return xm, sq.e.preimage_of(xm) & amin, sq.p.preimage_of(xm) & ymin


def _additive_style_candidate(sq, density, d, bmin, amin, ymin):
    xm = sq.e.image_of(amin) | sq.p.image_of(ymin)
    return xm, amin, ymin


def _base_change_candidate(sq, density, d, bmin, amin, ymin):
    xm = density.minimum_mask(sq.X, d)
    return xm, sq.e.preimage_of(xm) & amin, sq.p.preimage_of(xm) & ymin


_REDUCING_CACHE: dict = {}


def _candidate_order(name: str):
    upperish = (_upper_style_candidate, _lower_style_candidate)
    lowerish = (_lower_style_candidate, _upper_style_candidate)
    addish = (_additive_style_candidate, _lower_style_candidate, _upper_style_candidate)
    head = {
        "add": addish,
        "p.up": upperish,
        "up": upperish,
        "p.low": lowerish,
        "low": lowerish,
    }.get(name, lowerish)
    rest = tuple(
        c
        for c in (
            _lower_style_candidate,
            _upper_style_candidate,
            _additive_style_candidate,
            _base_change_candidate,
        )
        if c not in head
    )
    return head + rest


def is_reducing(
    sq: DistinguishedSquare,
    density: StandardDensity,
    d: int,
    symbols=None,
    structure_name: str | None = None,
    exhaustive_fallback: bool = True,
) -> ReducingReport:
    """Can the square be shrunk into any prescribed d-dense corners?

    The density classes are closed under intersection, so each has a unique
    minimum and a witness for the minimal triple (B in degree d-1, A and Y in
    degree d) serves every triple.  Certified negative when the exhaustive
    subspace search also fails on the minimal triple.
    """
    if d < 1:
        raise ValidationError("reducing is defined for degrees d >= 1")
    name = structure_name or sq.tag
    if name is None:
        raise ValidationError("square needs a structure tag to check reducing")
    if symbols is None:
        from .spaces import trivial_symbols_for

        symbols = trivial_symbols_for(sq.X, sq.A, sq.Y, sq.B)
    cache_key = (sq.e, sq.p, sq.eB, sq.pB, name, d, exhaustive_fallback)
    hit = _REDUCING_CACHE.get(cache_key)
    if hit is not None:
        return hit

    def done(report):
        _REDUCING_CACHE[cache_key] = report
        return report

    bmin = density.minimum_mask(sq.B, d - 1)
    amin = density.minimum_mask(sq.A, d)
    ymin = density.minimum_mask(sq.Y, d)
    triple = (sq.B.ids_of(bmin), sq.A.ids_of(amin), sq.Y.ids_of(ymin))
    if bmin == sq.B.full_mask and amin == sq.A.full_mask and ymin == sq.Y.full_mask:
        return done(ReducingReport(True, d, triple, sq, sq.X.ids_of(sq.X.full_mask)))
    for candidate in _candidate_order(name):
        xm, am, ym = candidate(sq, density, d, bmin, amin, ymin)
        witness = _verify_reducing_witness(
            sq, name, symbols, density, d, xm, am, ym, bmin, amin, ymin
        )
        if witness is not None:
            return done(ReducingReport(True, d, triple, witness, sq.X.ids_of(xm)))
    if exhaustive_fallback:
        for xm in density.class_masks(sq.X, d):
            a_cap = sq.e.preimage_of(xm) & amin
            y_cap = sq.p.preimage_of(xm) & ymin
            am = a_cap
            while True:
                ym = y_cap
                while True:
                    witness = _verify_reducing_witness(
                        sq, name, symbols, density, d, xm, am, ym, bmin, amin, ymin
                    )
                    if witness is not None:
                        return done(
                            ReducingReport(True, d, triple, witness, sq.X.ids_of(xm))
                        )
                    if ym == 0:
                        break
                    ym = (ym - 1) & y_cap
                if am == 0:
                    break
                am = (am - 1) & a_cap
    return done(ReducingReport(False, d, triple, None, ()))


# -- boundedness -------------------------------------------------------------


def closure_refinement(sq: DistinguishedSquare):
    """Replace the Y-corner by the closure of the part where p is an
    isomorphism (the move that makes lower squares reducing); None when the
    restricted maps do not assemble."""
    outside = sq.X.full_mask & ~sq.e.image()
    y_r = closure_mask(sq.Y, sq.p.preimage_of(outside))
    if y_r == sq.Y.full_mask:
        return None
    restricted, _ = _restricted_square(sq, sq.X.full_mask, sq.A.full_mask, y_r)
    return restricted


def is_bounded(
    C: SiteCategory, P: CdStructure, density: StandardDensity, depth=None
) -> BoundednessReport:
    squares = 0
    for X in C.objects:
        dmax = dimension(X) + 1
        for sq in P.squares_over(C, X):
            squares += 1
            candidates = [sq]
            refined = closure_refinement(sq)
            if refined is not None and P.is_distinguished(refined, C.symbols):
                candidates.append(refined)
            ok = False
            last_failure = None
            for cand in candidates:
                reports = []
                good = True
                for d in range(1, max(dmax, 1) + 1):
                    rep = is_reducing(
                        cand, density, d, C.symbols, structure_name=_tag_for(P, cand, C)
                    )
                    reports.append(rep)
                    if not rep.verdict:
                        good = False
                        last_failure = (sq, cand, rep)
                        break
                if good:
                    ok = True
                    break
            if not ok:
                return BoundednessReport(False, last_failure, squares)
    return BoundednessReport(True, None, squares)


def _tag_for(P: CdStructure, sq: DistinguishedSquare, C: SiteCategory) -> str:
    if sq.tag:
        return sq.tag
    if P.name in ("add", "p.up", "up", "p.low", "low", "p", "p.low+up", "low+p.up", "cdh"):
        return P.name
    raise ValidationError("cannot infer a structure tag for the square")
