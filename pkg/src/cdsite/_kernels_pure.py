"""Pure-Python bitmask kernels for small posets.

A poset on n points (n <= 30) is passed around as a tuple ``up`` where
``up[i]`` is the bitmask of points j with i <= j (including i itself).
Subsets of points are bitmasks.  These functions sit in the innermost loops
of everything the package does; the compiled module mirrors this interface.
"""

from __future__ import annotations

IMPLEMENTATION = "pure"


def up_closure(up, mask):
    """Smallest generization-closed set containing mask."""
    out = 0
    m = mask
    while m:
        low = m & -m
        out |= up[low.bit_length() - 1]
        m &= m - 1
    return out


def down_closure(down, mask):
    """Smallest specialization-closed set containing mask (pass down-masks)."""
    out = 0
    m = mask
    while m:
        low = m & -m
        out |= down[low.bit_length() - 1]
        m &= m - 1
    return out


def is_up_set(up, mask):
    m = mask
    while m:
        low = m & -m
        if up[low.bit_length() - 1] & ~mask:
            return False
        m &= m - 1
    return True


def all_up_sets(up):
    """All generization-closed subsets, as an ascending list of masks."""
    n = len(up)
    out = []
    for mask in range(1 << n):
        if is_up_set(up, mask):
            out.append(mask)
    return out


def point_heights(up):
    """Length (edge count) of the longest strict chain going up from each point."""
    n = len(up)
    heights = [-1] * n
    order = sorted(range(n), key=lambda i: bin(up[i]).count("1"))
    for i in order:  # few points above first, so successors already done
        best = 0
        m = up[i] & ~(1 << i)
        while m:
            low = m & -m
            j = low.bit_length() - 1
            if heights[j] + 1 > best:
                best = heights[j] + 1
            m &= m - 1
        heights[i] = best
    return heights


def monotone_maps(up_src, up_tgt, allowed):
    """All monotone maps, as graph tuples, respecting per-point target masks.

    ``allowed[i]`` restricts where source point i may go (label filtering is
    done by the caller through these masks).  Points are processed along a
    linear extension so only already-assigned predecessors constrain a point.
    """
    n = len(up_src)
    if n == 0:
        return [()]
    order = sorted(range(n), key=lambda i: (-bin(up_src[i]).count("1"), i))
    preds = []  # indices earlier in order that are strictly below the point
    for pos, i in enumerate(order):
        preds.append([j for j in order[:pos] if (up_src[j] >> i) & 1])
    graph = [0] * n
    out = []

    def extend(pos):
        if pos == n:
            out.append(tuple(graph))
            return
        i = order[pos]
        cand = allowed[i]
        for j in preds[pos]:
            cand &= up_tgt[graph[j]]
            if not cand:
                return
        m = cand
        while m:
            low = m & -m
            graph[i] = low.bit_length() - 1
            extend(pos + 1)
            m &= m - 1

    extend(0)
    out.sort()
    return out


def is_monotone(graph, up_src, up_tgt):
    n = len(graph)
    for i in range(n):
        m = up_src[i] & ~(1 << i)
        ti = up_tgt[graph[i]]
        while m:
            low = m & -m
            if not (ti >> graph[low.bit_length() - 1]) & 1:
                return False
            m &= m - 1
    return True


def image_mask(graph, mask):
    out = 0
    m = mask
    while m:
        low = m & -m
        out |= 1 << graph[low.bit_length() - 1]
        m &= m - 1
    return out


def preimage_mask(graph, mask):
    out = 0
    for i, t in enumerate(graph):
        if (mask >> t) & 1:
            out |= 1 << i
    return out


def is_etale_like(graph, up_src, up_tgt, lab_src, lab_tgt):
    """Label-preserving local isomorphism: each point's up-set maps bijectively,
    order-isomorphically onto the up-set of its image."""
    n = len(graph)
    for i in range(n):
        if lab_src[i] != lab_tgt[graph[i]]:
            return False
    for i in range(n):
        src_up = up_src[i]
        tgt_up = up_tgt[graph[i]]
        if bin(src_up).count("1") != bin(tgt_up).count("1"):
            return False
        if image_mask(graph, src_up) != tgt_up:
            return False
        # the inverse of the bijection must be monotone as well
        m1 = src_up
        while m1:
            l1 = m1 & -m1
            a = l1.bit_length() - 1
            m2 = src_up
            while m2:
                l2 = m2 & -m2
                b = l2.bit_length() - 1
                if (up_tgt[graph[a]] >> graph[b]) & 1 and not (up_src[a] >> b) & 1:
                    return False
                m2 &= m2 - 1
            m1 &= m1 - 1
    return True


def lifts_specializations(graph, down_src, down_tgt):
    """Every specialization of the image of a point lifts below that point."""
    n = len(graph)
    for i in range(n):
        if down_tgt[graph[i]] & ~image_mask(graph, down_src[i]):
            return False
    return True


def is_separated_like(graph, up_src):
    """No two distinct points with equal image share a generization."""
    n = len(graph)
    for i in range(n):
        for j in range(i + 1, n):
            if graph[i] == graph[j] and up_src[i] & up_src[j]:
                return False
    return True


def is_proper_like(graph, up_src, down_src, down_tgt):
    return lifts_specializations(graph, down_src, down_tgt) and is_separated_like(
        graph, up_src
    )
