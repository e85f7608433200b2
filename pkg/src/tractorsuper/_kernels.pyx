# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled Gaussian-integer kernels (matrix product, row reduction).

Entries stay arbitrary-precision Python ints; the speedup comes from C
loops and typed indexing, not from fixed-width arithmetic.
"""
from math import gcd


def gi_matmul(Py_ssize_t n, Py_ssize_t k, Py_ssize_t m, list ar, list ai, list br, list bi):
    cdef Py_ssize_t i, t, j, row, out, base
    cdef list cr = [0] * (n * m)
    cdef list ci = [0] * (n * m)
    cdef object a, b, x, y
    for i in range(n):
        row = i * k
        out = i * m
        for t in range(k):
            a = ar[row + t]
            b = ai[row + t]
            if not a and not b:
                continue
            base = t * m
            for j in range(m):
                x = br[base + j]
                y = bi[base + j]
                if x or y:
                    cr[out + j] = cr[out + j] + (a * x - b * y)
                    ci[out + j] = ci[out + j] + (a * y + b * x)
    return cr, ci


cdef object _content(list re, list im):
    cdef object g = 0
    cdef object v
    for v in re:
        if v:
            g = gcd(g, v)
            if g == 1:
                return 1
    for v in im:
        if v:
            g = gcd(g, v)
            if g == 1:
                return 1
    return g


def gi_rref(list re_rows, list im_rows, Py_ssize_t ncols, stop=None):
    cdef Py_ssize_t nrows = len(re_rows)
    cdef Py_ssize_t cstop = ncols if stop is None else stop
    cdef Py_ssize_t col, r, sel, j
    cdef Py_ssize_t rank = 0
    cdef list pivots = []
    cdef list pr, pi, xr, xi, nr, ni
    cdef object a, b, c, d, u, v, s, t, g
    for col in range(cstop):
        if rank == nrows:
            break
        sel = -1
        for r in range(rank, nrows):
            if (<list>re_rows[r])[col] or (<list>im_rows[r])[col]:
                sel = r
                break
        if sel < 0:
            continue
        if sel != rank:
            re_rows[sel], re_rows[rank] = re_rows[rank], re_rows[sel]
            im_rows[sel], im_rows[rank] = im_rows[rank], im_rows[sel]
        pr = re_rows[rank]
        pi = im_rows[rank]
        a = pr[col]
        b = pi[col]
        for r in range(nrows):
            if r == rank:
                continue
            xr = re_rows[r]
            xi = im_rows[r]
            c = xr[col]
            d = xi[col]
            if not c and not d:
                continue
            nr = [0] * ncols
            ni = [0] * ncols
            for j in range(ncols):
                u = xr[j]
                v = xi[j]
                s = pr[j]
                t = pi[j]
                nr[j] = (a * u - b * v) - (c * s - d * t)
                ni[j] = (a * v + b * u) - (c * t + d * s)
            g = _content(nr, ni)
            if g > 1:
                nr = [x // g for x in nr]
                ni = [x // g for x in ni]
            re_rows[r] = nr
            im_rows[r] = ni
        pivots.append(col)
        rank += 1
    return pivots
