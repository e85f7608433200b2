"""Pure-Python Gaussian-integer kernels.

Same signatures as the compiled ``_kernels`` module; used when the
extension is not built or when TRACTORSUPER_PURE=1 is set.
Matrices are flat row-major lists of Python ints, one list for the real
parts and one for the imaginary parts.
"""
from math import gcd


def gi_matmul(n, k, m, ar, ai, br, bi):
    """Product of an n x k and a k x m Gaussian-integer matrix."""
    cr = [0] * (n * m)
    ci = [0] * (n * m)
    for i in range(n):
        row = i * k
        out = i * m
        for t in range(k):
            a = ar[row + t]
            b = ai[row + t]
            if a == 0 and b == 0:
                continue
            base = t * m
            for j in range(m):
                x = br[base + j]
                y = bi[base + j]
                if x or y:
                    cr[out + j] += a * x - b * y
                    ci[out + j] += a * y + b * x
    return cr, ci


def _content(re, im):
    g = 0
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


def gi_rref(re_rows, im_rows, ncols, stop=None):
    """Fraction-free reduced row echelon form, in place.

    Pivot choice is the first nonzero entry in each column.  Columns at
    index >= stop (if given) are never used as pivot columns.
    Returns the list of pivot columns; rows[:len(pivots)] are the pivot
    rows, each cleared in every other pivot column.
    """
    if stop is None:
        stop = ncols
    nrows = len(re_rows)
    pivots = []
    rank = 0
    for col in range(stop):
        if rank == nrows:
            break
        sel = -1
        for r in range(rank, nrows):
            if re_rows[r][col] or im_rows[r][col]:
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
            if c == 0 and d == 0:
                continue
            # row_r <- (a+bi) row_r - (c+di) row_piv
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
