# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled relabeling kernels; API-identical to fraisse._pure."""

from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

BACKEND = "speedups"


cdef long _binom(int a, int b):
    cdef long r = 1
    cdef int i
    if b < 0 or b > a:
        return 0
    if b > a - b:
        b = a - b
    for i in range(b):
        r = r * (a - i) // (i + 1)
    return r


cdef class _Enc:
    cdef public int k
    cdef int nsec
    cdef public int keylen
    cdef int* n_
    cdef int* m_
    cdef int* nc_
    cdef int* np_
    cdef int* cyc_len
    cdef int** members
    cdef int** class_of
    cdef int** rpairs
    cdef int** cycle
    cdef int** csize        # class sizes
    cdef long* binom        # (k+1)*(k+1)

    def __cinit__(self, enc):
        cdef int k = enc[0]
        sections = enc[1]
        cdef int i, j, t
        self.k = k
        self.nsec = len(sections)
        self.n_ = <int*>malloc(self.nsec * sizeof(int))
        self.m_ = <int*>malloc(self.nsec * sizeof(int))
        self.nc_ = <int*>malloc(self.nsec * sizeof(int))
        self.np_ = <int*>malloc(self.nsec * sizeof(int))
        self.cyc_len = <int*>malloc(self.nsec * sizeof(int))
        self.members = <int**>malloc(self.nsec * sizeof(int*))
        self.class_of = <int**>malloc(self.nsec * sizeof(int*))
        self.rpairs = <int**>malloc(self.nsec * sizeof(int*))
        self.cycle = <int**>malloc(self.nsec * sizeof(int*))
        self.csize = <int**>malloc(self.nsec * sizeof(int*))
        self.binom = <long*>malloc((k + 1) * (k + 1) * sizeof(long))
        for i in range(k + 1):
            for j in range(k + 1):
                self.binom[i * (k + 1) + j] = _binom(i, j)
        self.keylen = 0
        for i in range(self.nsec):
            n, m, members, class_of, n_classes, rp, cyc = sections[i]
            self.n_[i] = n
            self.m_[i] = m
            self.nc_[i] = n_classes
            self.np_[i] = len(rp) // 2
            self.cyc_len[i] = len(cyc)
            self.members[i] = <int*>malloc(m * n * sizeof(int))
            for t in range(m * n):
                self.members[i][t] = members[t]
            self.class_of[i] = <int*>malloc(m * sizeof(int))
            self.csize[i] = <int*>malloc(n_classes * sizeof(int))
            for t in range(n_classes):
                self.csize[i][t] = 0
            for t in range(m):
                self.class_of[i][t] = class_of[t]
                self.csize[i][class_of[t]] += 1
            self.rpairs[i] = <int*>malloc(max(1, len(rp)) * sizeof(int))
            for t in range(len(rp)):
                self.rpairs[i][t] = rp[t]
            self.cycle[i] = <int*>malloc(max(1, len(cyc)) * sizeof(int))
            for t in range(len(cyc)):
                self.cycle[i][t] = cyc[t]
            self.keylen += 1 + m + n_classes + 1 + 2 * self.np_[i] + 1 + len(cyc)

    def __dealloc__(self):
        cdef int i
        if self.members != NULL:
            for i in range(self.nsec):
                free(self.members[i]); free(self.class_of[i])
                free(self.rpairs[i]); free(self.cycle[i]); free(self.csize[i])
        free(self.members); free(self.class_of); free(self.rpairs)
        free(self.cycle); free(self.csize)
        free(self.n_); free(self.m_); free(self.nc_); free(self.np_)
        free(self.cyc_len); free(self.binom)


cdef void _key_into(_Enc e, int* perm, int* out) nogil:
    cdef int pos = 0
    cdef int s, n, m, nc, t, j, i, v, u, prev, ci, tmp, a, b
    cdef long rank
    cdef int k = e.k
    cdef int img[16]
    cdef int* img_rank
    cdef int* boff
    cdef int* bfill
    cdef int* bucket
    cdef int* order
    cdef int* pa
    cdef int* pb
    for s in range(e.nsec):
        n = e.n_[s]; m = e.m_[s]; nc = e.nc_[s]
        img_rank = <int*>malloc(m * sizeof(int))
        boff = <int*>malloc((nc + 1) * sizeof(int))
        bfill = <int*>malloc(nc * sizeof(int))
        bucket = <int*>malloc(m * sizeof(int))
        order = <int*>malloc(nc * sizeof(int))
        # image ranks
        for t in range(m):
            for j in range(n):
                img[j] = perm[e.members[s][t * n + j]]
            # insertion sort
            for j in range(1, n):
                v = img[j]
                i = j - 1
                while i >= 0 and img[i] > v:
                    img[i + 1] = img[i]
                    i -= 1
                img[i + 1] = v
            rank = 0
            prev = -1
            for j in range(n):
                v = img[j]
                for u in range(prev + 1, v):
                    rank += e.binom[(k - 1 - u) * (k + 1) + (n - 1 - j)]
                prev = v
            img_rank[t] = <int>rank
        # bucket by class
        boff[0] = 0
        for ci in range(nc):
            boff[ci + 1] = boff[ci] + e.csize[s][ci]
            bfill[ci] = boff[ci]
        for t in range(m):
            ci = e.class_of[s][t]
            bucket[bfill[ci]] = img_rank[t]
            bfill[ci] += 1
        # sort each bucket
        for ci in range(nc):
            for j in range(boff[ci] + 1, boff[ci + 1]):
                v = bucket[j]
                i = j - 1
                while i >= boff[ci] and bucket[i] > v:
                    bucket[i + 1] = bucket[i]
                    i -= 1
                bucket[i + 1] = v
        # class order by least member
        for ci in range(nc):
            order[ci] = ci
        for j in range(1, nc):
            v = order[j]
            i = j - 1
            while i >= 0 and bucket[boff[order[i]]] > bucket[boff[v]]:
                order[i + 1] = order[i]
                i -= 1
            order[i + 1] = v
        # emit classes
        out[pos] = nc; pos += 1
        for j in range(nc):
            ci = order[j]
            for i in range(boff[ci], boff[ci + 1]):
                out[pos] = bucket[i]; pos += 1
            out[pos] = -1; pos += 1
        # emit rmap pairs sorted
        t = e.np_[s]
        out[pos] = t; pos += 1
        if t > 0:
            pa = <int*>malloc(t * sizeof(int))
            pb = <int*>malloc(t * sizeof(int))
            for j in range(t):
                pa[j] = bucket[boff[e.rpairs[s][2 * j]]]
                pb[j] = bucket[boff[e.rpairs[s][2 * j + 1]]]
            for j in range(1, t):
                a = pa[j]; b = pb[j]
                i = j - 1
                while i >= 0 and (pa[i] > a or (pa[i] == a and pb[i] > b)):
                    pa[i + 1] = pa[i]; pb[i + 1] = pb[i]
                    i -= 1
                pa[i + 1] = a; pb[i + 1] = b
            for j in range(t):
                out[pos] = pa[j]; pos += 1
                out[pos] = pb[j]; pos += 1
            free(pa); free(pb)
        # emit cycle
        t = e.cyc_len[s]
        if t > 0:
            out[pos] = 1; pos += 1
            # find rotation with least value
            a = 0
            for j in range(1, t):
                if bucket[boff[e.cycle[s][j]]] < bucket[boff[e.cycle[s][a]]]:
                    a = j
            for j in range(t):
                out[pos] = bucket[boff[e.cycle[s][(a + j) % t]]]; pos += 1
        else:
            out[pos] = 0; pos += 1
        free(img_rank); free(boff); free(bfill); free(bucket); free(order)


cdef bint _next_perm(int* p, int k) nogil:
    cdef int i = k - 2, j, tmp
    while i >= 0 and p[i] >= p[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = k - 1
    while p[j] <= p[i]:
        j -= 1
    tmp = p[i]; p[i] = p[j]; p[j] = tmp
    i += 1
    j = k - 1
    while i < j:
        tmp = p[i]; p[i] = p[j]; p[j] = tmp
        i += 1; j -= 1
    return True


def struct_key(enc, perm):
    """Serialization-ordered integer key of the structure relabeled by perm."""
    cdef _Enc e = _Enc(enc)
    cdef int* p = <int*>malloc(e.k * sizeof(int))
    cdef int* out = <int*>malloc(max(1, e.keylen) * sizeof(int))
    cdef int i
    for i in range(e.k):
        p[i] = perm[i]
    _key_into(e, p, out)
    res = tuple(out[i] for i in range(e.keylen))
    free(p); free(out)
    return res


def best_relabeling(enc, perms=None):
    """(perm, key) minimizing struct_key; first minimizer in iteration order."""
    cdef _Enc e = _Enc(enc)
    cdef int k = e.k
    cdef int kl = e.keylen
    cdef int* p = <int*>malloc(max(1, k) * sizeof(int))
    cdef int* cur = <int*>malloc(max(1, kl) * sizeof(int))
    cdef int* best = <int*>malloc(max(1, kl) * sizeof(int))
    cdef int* bestp = <int*>malloc(max(1, k) * sizeof(int))
    cdef int i, cmp_
    cdef bint have = False, better
    if perms is None:
        for i in range(k):
            p[i] = i
        while True:
            _key_into(e, p, cur)
            better = not have
            if have:
                cmp_ = 0
                for i in range(kl):
                    if cur[i] != best[i]:
                        cmp_ = -1 if cur[i] < best[i] else 1
                        break
                better = cmp_ < 0
            if better:
                memcpy(best, cur, kl * sizeof(int))
                memcpy(bestp, p, k * sizeof(int))
                have = True
            if not _next_perm(p, k):
                break
    else:
        for perm in perms:
            for i in range(k):
                p[i] = perm[i]
            _key_into(e, p, cur)
            better = not have
            if have:
                cmp_ = 0
                for i in range(kl):
                    if cur[i] != best[i]:
                        cmp_ = -1 if cur[i] < best[i] else 1
                        break
                better = cmp_ < 0
            if better:
                memcpy(best, cur, kl * sizeof(int))
                memcpy(bestp, p, k * sizeof(int))
                have = True
    if not have:
        free(p); free(cur); free(best); free(bestp)
        return None, None
    rp = tuple(bestp[i] for i in range(k))
    rk = tuple(best[i] for i in range(kl))
    free(p); free(cur); free(best); free(bestp)
    return rp, rk
