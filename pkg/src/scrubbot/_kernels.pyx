# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pixel kernels. Must stay in lock-step with ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef double INF = 1e300

# Moore neighbourhood, clockwise on screen (rows grow downward), starting west.
cdef int DR[8]
cdef int DC[8]
DR[:] = [0, -1, -1, -1, 0, 1, 1, 1]
DC[:] = [-1, -1, 0, 1, 1, 1, 0, -1]


cdef inline cnp.int32_t _find(cnp.int32_t[::1] parent, cnp.int32_t x) noexcept nogil:
    cdef cnp.int32_t root = x, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


cdef inline void _union(cnp.int32_t[::1] parent, cnp.int32_t a, cnp.int32_t b) noexcept nogil:
    a = _find(parent, a)
    b = _find(parent, b)
    if a < b:
        parent[b] = a
    elif b < a:
        parent[a] = b


def label(const cnp.uint8_t[:, ::1] mask, int connectivity=8):
    """Two-pass union-find labelling; labels follow raster order of first pixel."""
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1]
    cdef Py_ssize_t r, c
    cdef cnp.int32_t nxt = 1, cur, nb
    labels_arr = np.zeros((h, w), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] labels = labels_arr
    parent_arr = np.zeros(h * w + 1, dtype=np.int32)
    cdef cnp.int32_t[::1] parent = parent_arr
    cdef bint eight = connectivity == 8
    with nogil:
        for r in range(h):
            for c in range(w):
                if not mask[r, c]:
                    continue
                cur = 0
                if c > 0 and labels[r, c - 1]:
                    cur = labels[r, c - 1]
                if r > 0:
                    nb = labels[r - 1, c]
                    if nb:
                        if cur:
                            _union(parent, cur, nb)
                        else:
                            cur = nb
                    if eight:
                        if c > 0:
                            nb = labels[r - 1, c - 1]
                            if nb:
                                if cur:
                                    _union(parent, cur, nb)
                                else:
                                    cur = nb
                        if c + 1 < w:
                            nb = labels[r - 1, c + 1]
                            if nb:
                                if cur:
                                    _union(parent, cur, nb)
                                else:
                                    cur = nb
                if not cur:
                    cur = nxt
                    parent[nxt] = nxt
                    nxt += 1
                labels[r, c] = cur
    remap_arr = np.zeros(nxt, dtype=np.int32)
    cdef cnp.int32_t[::1] remap = remap_arr
    cdef cnp.int32_t count = 0, root
    with nogil:
        for r in range(h):
            for c in range(w):
                cur = labels[r, c]
                if cur:
                    root = _find(parent, cur)
                    if remap[root] == 0:
                        count += 1
                        remap[root] = count
                    labels[r, c] = remap[root]
    return labels_arr, int(count)


def trace(const cnp.uint8_t[:, ::1] mask, int sr, int sc):
    """Moore boundary trace from (sr, sc), the first pixel in raster order."""
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1]
    cdef int cr = sr, cc = sc, back = 0, k, d, nr, nc, pr, pc, j
    cdef int first_r = -1, first_c = -1
    cdef bint found
    out = [(sr, sc)]
    while True:
        found = False
        for k in range(1, 9):
            d = (back + k) % 8
            nr = cr + DR[d]
            nc = cc + DC[d]
            if 0 <= nr < h and 0 <= nc < w and mask[nr, nc]:
                found = True
                break
        if not found:
            return out
        if cr == sr and cc == sc:
            if first_r < 0:
                first_r, first_c = nr, nc
            elif nr == first_r and nc == first_c:
                return out[:-1]
        d = (back + k - 1) % 8
        pr = cr + DR[d] - nr
        pc = cc + DC[d] - nc
        for j in range(8):
            if DR[j] == pr and DC[j] == pc:
                back = j
                break
        cr, cc = nr, nc
        out.append((cr, cc))


cdef void _dt1d(double* f, double* d, Py_ssize_t n, Py_ssize_t* v, double* z) noexcept nogil:
    cdef Py_ssize_t q, k = -1
    cdef double s
    for q in range(n):
        if f[q] >= INF:
            continue
        while True:
            if k < 0:
                k = 0
                v[0] = q
                z[0] = -INF
                break
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * (q - v[k]))
            if s <= z[k]:
                k -= 1
                continue
            k += 1
            v[k] = q
            z[k] = s
            break
    if k < 0:
        for q in range(n):
            d[q] = INF
        return
    z[k + 1] = INF
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        d[q] = (q - v[k]) * (q - v[k]) + f[v[k]]


def squared_edt(const cnp.uint8_t[:, ::1] sites):
    """Squared Euclidean distance from every pixel to the nearest nonzero site."""
    cdef Py_ssize_t h = sites.shape[0], w = sites.shape[1], r, c, n
    n = h if h > w else w
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    fbuf_arr = np.empty(n, dtype=np.float64)
    dbuf_arr = np.empty(n, dtype=np.float64)
    zbuf_arr = np.empty(n + 1, dtype=np.float64)
    vbuf_arr = np.empty(n, dtype=np.intp)
    cdef double[::1] fbuf = fbuf_arr, dbuf = dbuf_arr, zbuf = zbuf_arr
    cdef Py_ssize_t[::1] vbuf = vbuf_arr
    with nogil:
        for c in range(w):
            for r in range(h):
                fbuf[r] = 0.0 if sites[r, c] else INF
            _dt1d(&fbuf[0], &dbuf[0], h, &vbuf[0], &zbuf[0])
            for r in range(h):
                out[r, c] = dbuf[r]
        for r in range(h):
            for c in range(w):
                fbuf[c] = out[r, c]
            _dt1d(&fbuf[0], &dbuf[0], w, &vbuf[0], &zbuf[0])
            for c in range(w):
                out[r, c] = dbuf[c]
    return out_arr
