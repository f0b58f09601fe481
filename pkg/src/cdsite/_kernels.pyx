# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled bitmask kernels for small posets (mirror of _kernels_pure)."""

from libc.stdlib cimport free, malloc

IMPLEMENTATION = "cython"

DEF MAXN = 64


cdef int _popcount(unsigned long long x) noexcept:
    cdef int c = 0
    while x:
        x &= x - 1
        c += 1
    return c


cdef int _load(object seq, unsigned long long *buf) except -1:
    cdef int n = len(seq)
    cdef int i
    if n > MAXN:
        raise ValueError("kernel supports at most 64 points")
    for i in range(n):
        buf[i] = <unsigned long long> seq[i]
    return n


def up_closure(up, mask):
    cdef unsigned long long buf[MAXN]
    cdef int n = _load(up, buf)
    cdef unsigned long long out = 0, m = <unsigned long long> mask, low
    cdef int i
    while m:
        low = m & (~m + 1)
        i = _popcount(low - 1)
        out |= buf[i]
        m &= m - 1
    return out


def down_closure(down, mask):
    return up_closure(down, mask)


def is_up_set(up, mask):
    cdef unsigned long long buf[MAXN]
    cdef int n = _load(up, buf)
    cdef unsigned long long m = <unsigned long long> mask, low, full = <unsigned long long> mask
    cdef int i
    while m:
        low = m & (~m + 1)
        i = _popcount(low - 1)
        if buf[i] & ~full:
            return False
        m &= m - 1
    return True


def all_up_sets(up):
    cdef unsigned long long buf[MAXN]
    cdef int n = _load(up, buf)
    cdef unsigned long long mask, m, low
    cdef int i, ok
    out = []
    if n > 24:
        raise ValueError("subset enumeration capped at 24 points")
    for mask in range(<unsigned long long> 1 << n):
        ok = 1
        m = mask
        while m:
            low = m & (~m + 1)
            i = _popcount(low - 1)
            if buf[i] & ~mask:
                ok = 0
                break
            m &= m - 1
        if ok:
            out.append(mask)
    return out


def point_heights(up):
    cdef unsigned long long buf[MAXN]
    cdef int n = _load(up, buf)
    cdef int hs[MAXN]
    cdef int i, j, best, changed
    cdef unsigned long long m, low
    order = sorted(range(n), key=lambda k: _popcount(<unsigned long long> up[k]))
    for i in range(n):
        hs[i] = -1
    for i in order:
        best = 0
        m = buf[i] & ~(<unsigned long long> 1 << i)
        while m:
            low = m & (~m + 1)
            j = _popcount(low - 1)
            if hs[j] + 1 > best:
                best = hs[j] + 1
            m &= m - 1
        hs[i] = best
    return [hs[i] for i in range(n)]


def monotone_maps(up_src, up_tgt, allowed):
    cdef unsigned long long us[MAXN]
    cdef unsigned long long ut[MAXN]
    cdef unsigned long long al[MAXN]
    cdef int n = _load(up_src, us)
    cdef int nt = _load(up_tgt, ut)
    _load(allowed, al)
    cdef int order[MAXN]
    cdef unsigned long long predmask[MAXN]
    cdef int graph[MAXN]
    cdef unsigned long long cand[MAXN]
    cdef unsigned long long stack_m[MAXN]
    cdef int pos, i, j, k
    cdef unsigned long long c, m, low
    if n == 0:
        return [()]
    pyorder = sorted(range(n), key=lambda k: (-_popcount(<unsigned long long> up_src[k]), k))
    for k in range(n):
        order[k] = pyorder[k]
    for k in range(n):
        predmask[k] = 0
        i = order[k]
        for j in range(k):
            if (us[order[j]] >> i) & 1:
                predmask[k] |= <unsigned long long> 1 << j
    out = []
    pos = 0
    # iterative backtracking over candidate masks
    c = al[order[0]]
    stack_m[0] = c
    while pos >= 0:
        if stack_m[pos] == 0:
            pos -= 1
            continue
        low = stack_m[pos] & (~stack_m[pos] + 1)
        stack_m[pos] &= stack_m[pos] - 1
        graph[order[pos]] = _popcount(low - 1)
        if pos == n - 1:
            out.append(tuple([graph[i] for i in range(n)]))
            continue
        pos += 1
        i = order[pos]
        c = al[i]
        m = predmask[pos]
        while m:
            low = m & (~m + 1)
            j = _popcount(low - 1)
            c &= ut[graph[order[j]]]
            if c == 0:
                break
            m &= m - 1
        stack_m[pos] = c
        if c == 0:
            pos -= 1
    out.sort()
    return out


def is_monotone(graph, up_src, up_tgt):
    cdef unsigned long long us[MAXN]
    cdef unsigned long long ut[MAXN]
    cdef long g[MAXN]
    cdef int n = _load(up_src, us)
    _load(up_tgt, ut)
    cdef int i, j
    for i in range(n):
        g[i] = graph[i]
    cdef unsigned long long m, low
    for i in range(n):
        m = us[i] & ~(<unsigned long long> 1 << i)
        while m:
            low = m & (~m + 1)
            j = _popcount(low - 1)
            if not (ut[g[i]] >> g[j]) & 1:
                return False
            m &= m - 1
    return True


def image_mask(graph, mask):
    cdef unsigned long long out = 0, m = <unsigned long long> mask, low
    cdef int i
    while m:
        low = m & (~m + 1)
        i = _popcount(low - 1)
        out |= <unsigned long long> 1 << <int> graph[i]
        m &= m - 1
    return out


def preimage_mask(graph, mask):
    cdef unsigned long long out = 0, mm = <unsigned long long> mask
    cdef int i, n = len(graph)
    for i in range(n):
        if (mm >> <int> graph[i]) & 1:
            out |= <unsigned long long> 1 << i
    return out


def is_etale_like(graph, up_src, up_tgt, lab_src, lab_tgt):
    cdef unsigned long long us[MAXN]
    cdef unsigned long long ut[MAXN]
    cdef long g[MAXN]
    cdef int n = _load(up_src, us)
    _load(up_tgt, ut)
    cdef int i, a, b
    cdef unsigned long long src_up, tgt_up, img, m1, m2, low
    for i in range(n):
        g[i] = graph[i]
        if lab_src[i] != lab_tgt[g[i]]:
            return False
    for i in range(n):
        src_up = us[i]
        tgt_up = ut[g[i]]
        if _popcount(src_up) != _popcount(tgt_up):
            return False
        img = 0
        m1 = src_up
        while m1:
            low = m1 & (~m1 + 1)
            img |= <unsigned long long> 1 << g[_popcount(low - 1)]
            m1 &= m1 - 1
        if img != tgt_up:
            return False
        m1 = src_up
        while m1:
            low = m1 & (~m1 + 1)
            a = _popcount(low - 1)
            m2 = src_up
            while m2:
                b = _popcount((m2 & (~m2 + 1)) - 1)
                if (ut[g[a]] >> g[b]) & 1 and not (us[a] >> b) & 1:
                    return False
                m2 &= m2 - 1
            m1 &= m1 - 1
    return True


def lifts_specializations(graph, down_src, down_tgt):
    cdef unsigned long long ds[MAXN]
    cdef unsigned long long dt[MAXN]
    cdef long g[MAXN]
    cdef int n = _load(down_src, ds)
    _load(down_tgt, dt)
    cdef int i
    cdef unsigned long long img, m, low
    for i in range(n):
        g[i] = graph[i]
    for i in range(n):
        img = 0
        m = ds[i]
        while m:
            low = m & (~m + 1)
            img |= <unsigned long long> 1 << g[_popcount(low - 1)]
            m &= m - 1
        if dt[g[i]] & ~img:
            return False
    return True


def is_separated_like(graph, up_src):
    cdef unsigned long long us[MAXN]
    cdef long g[MAXN]
    cdef int n = _load(up_src, us)
    cdef int i, j
    for i in range(n):
        g[i] = graph[i]
    for i in range(n):
        for j in range(i + 1, n):
            if g[i] == g[j] and (us[i] & us[j]):
                return False
    return True


def is_proper_like(graph, up_src, down_src, down_tgt):
    if not lifts_specializations(graph, down_src, down_tgt):
        return False
    return is_separated_like(graph, up_src)
