"""Exact scalars in Q(i) and dense matrices over them.

Matrices are stored as Gaussian-integer numerators with one shared
positive denominator, kept in lowest terms. That keeps products and row
reduction in Python ints, which the compiled kernels (or the pure-Python
fallback) handle.
"""
from __future__ import annotations

import os
import re as _re
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Optional, Sequence

if os.environ.get("TRACTORSUPER_PURE"):
    from . import _kernels_py as _k
    KERNEL_BACKEND = "python"
else:
    try:
        from . import _kernels as _k  # type: ignore[attr-defined]
        KERNEL_BACKEND = "compiled"
    except ImportError:  # extension not built
        from . import _kernels_py as _k
        KERNEL_BACKEND = "python"


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


class GaussianRational:
    """a + b*i with a, b exact rationals."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    @staticmethod
    def of(x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussianRational(x, 0)
        if isinstance(x, str):
            return parse_scalar(x)
        raise TypeError(f"cannot convert {type(x).__name__} to GaussianRational")

    def __add__(self, o):
        o = _coerce(o)
        if o is None:
            return NotImplemented
        return _mk(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = _coerce(o)
        if o is None:
            return NotImplemented
        return _mk(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        o = _coerce(o)
        if o is None:
            return NotImplemented
        return _mk(o.re - self.re, o.im - self.im)

    def __mul__(self, o):
        o = _coerce(o)
        if o is None:
            return NotImplemented
        a, b, c, d = self.re, self.im, o.re, o.im
        if not b:
            if not d:
                return _mk(a * c, _FZERO)
            return _mk(a * c, a * d)
        if not d:
            return _mk(a * c, b * c)
        return _mk(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = _coerce(o)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(i)")
        return GaussianRational((self.re * o.re + self.im * o.im) / n,
                                (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, o):
        o = _coerce(o)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return _mk(-self.re, -self.im)

    def __pos__(self):
        return self

    def conj(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def is_imaginary(self) -> bool:
        return self.re == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, o):
        o = _coerce(o)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __repr__(self):
        return f"GaussianRational({format_scalar(self)!r})"

    def __str__(self):
        return format_scalar(self)


_FZERO = Fraction(0)


def _mk(re: Fraction, im: Fraction) -> GaussianRational:
    """Constructor without conversion for values that are already Fractions."""
    z = object.__new__(GaussianRational)
    z.re = re
    z.im = im
    return z


def _coerce(x) -> Optional[GaussianRational]:
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x, 0)
    return None


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)


def gr(x) -> GaussianRational:
    return GaussianRational.of(x)


def _fmt_frac(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def format_scalar(z) -> str:
    """'a/b' for real values, 'a/b+c/d*i' otherwise (lowest terms)."""
    z = gr(z)
    if z.im == 0:
        return _fmt_frac(z.re)
    sign = "+" if z.im > 0 else "-"
    return f"{_fmt_frac(z.re)}{sign}{_fmt_frac(abs(z.im))}*i"


_NUM = r"[+-]?\d+(?:/\d+)?"
_SCALAR_RE = _re.compile(
    rf"^\s*(?P<re>{_NUM})?\s*(?:(?P<sign>[+-])?\s*(?P<im>\d+(?:/\d+)?)?\s*\*?\s*i)?\s*$"
)


def parse_scalar(s: str) -> GaussianRational:
    """Inverse of format_scalar; also accepts '3', '-i', '1/2*i', '2-i'."""
    text = s.strip()
    m = _SCALAR_RE.match(text)
    if not m or not text:
        raise ValueError(f"not a Gaussian rational: {s!r}")
    re_part = m.group("re")
    has_i = text.endswith("i")
    if not has_i:
        if re_part is None:
            raise ValueError(f"not a Gaussian rational: {s!r}")
        return GaussianRational(Fraction(re_part), 0)
    im_txt = m.group("im")
    sign = m.group("sign")
    if re_part is not None and sign is None and im_txt is None:
        # forms like "3i" or "-2*i": the captured re part is the coefficient
        return GaussianRational(0, Fraction(re_part))
    if re_part is not None and sign is None:
        raise ValueError(f"not a Gaussian rational: {s!r}")
    coeff = Fraction(im_txt) if im_txt is not None else Fraction(1)
    if sign == "-":
        coeff = -coeff
    return GaussianRational(Fraction(re_part) if re_part else 0, coeff)


# ---------------------------------------------------------------- matrices


def _split(entries: Sequence[GaussianRational]):
    den = 1
    for z in entries:
        den = _lcm(den, z.re.denominator)
        den = _lcm(den, z.im.denominator)
    re = [z.re.numerator * (den // z.re.denominator) for z in entries]
    im = [z.im.numerator * (den // z.im.denominator) for z in entries]
    return re, im, den


class Mat:
    """Dense rows x cols matrix over Q(i); immutable."""

    __slots__ = ("rows", "cols", "_re", "_im", "_den")

    def __init__(self, rows: int, cols: int, entries: Iterable):
        ents = [gr(z) for z in entries]
        if len(ents) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(ents)}")
        re, im, den = _split(ents)
        self._set(rows, cols, re, im, den)

    def _set(self, rows, cols, re, im, den):
        g = den
        for v in re:
            if v:
                g = gcd(g, v)
                if g == 1:
                    break
        if g != 1:
            for v in im:
                if v:
                    g = gcd(g, v)
                    if g == 1:
                        break
        if not any(re) and not any(im):
            den = 1
            g = 1
        if g > 1:
            re = [v // g for v in re]
            im = [v // g for v in im]
            den //= g
        self.rows = rows
        self.cols = cols
        self._re = tuple(re)
        self._im = tuple(im)
        self._den = den

    @classmethod
    def from_parts(cls, rows: int, cols: int, re, im, den: int = 1) -> "Mat":
        """Build from Gaussian-integer numerators and a common denominator."""
        if den <= 0:
            raise ValueError("denominator must be positive")
        m = cls.__new__(cls)
        m._set(rows, cols, list(re), list(im), den)
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Mat":
        return cls.from_parts(rows, cols, [0] * (rows * cols), [0] * (rows * cols), 1)

    @classmethod
    def identity(cls, n: int) -> "Mat":
        re = [0] * (n * n)
        for i in range(n):
            re[i * n + i] = 1
        return cls.from_parts(n, n, re, [0] * (n * n), 1)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "Mat":
        r = len(rows)
        c = len(rows[0]) if r else 0
        flat = []
        for row in rows:
            if len(row) != c:
                raise ValueError("ragged rows")
            flat.extend(row)
        return cls(r, c, flat)

    @classmethod
    def column(cls, entries: Sequence) -> "Mat":
        ents = list(entries)
        return cls(len(ents), 1, ents)

    @classmethod
    def hstack(cls, mats: Sequence["Mat"]) -> "Mat":
        mats = list(mats)
        if not mats:
            raise ValueError("nothing to stack")
        rows = mats[0].rows
        if any(m.rows != rows for m in mats):
            raise ValueError("row count mismatch in hstack")
        den = reduce(_lcm, (m._den for m in mats), 1)
        cols = sum(m.cols for m in mats)
        re = [0] * (rows * cols)
        im = [0] * (rows * cols)
        off = 0
        for m in mats:
            f = den // m._den
            for i in range(rows):
                for j in range(m.cols):
                    re[i * cols + off + j] = m._re[i * m.cols + j] * f
                    im[i * cols + off + j] = m._im[i * m.cols + j] * f
            off += m.cols
        return cls.from_parts(rows, cols, re, im, den)

    @classmethod
    def vstack(cls, mats: Sequence["Mat"]) -> "Mat":
        mats = list(mats)
        if not mats:
            raise ValueError("nothing to stack")
        cols = mats[0].cols
        if any(m.cols != cols for m in mats):
            raise ValueError("column count mismatch in vstack")
        den = reduce(_lcm, (m._den for m in mats), 1)
        re: list = []
        im: list = []
        for m in mats:
            f = den // m._den
            re.extend(v * f for v in m._re)
            im.extend(v * f for v in m._im)
        return cls.from_parts(sum(m.rows for m in mats), cols, re, im, den)

    # -- access
    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def den(self) -> int:
        return self._den

    def int_parts(self):
        """(re numerators, im numerators, common denominator)."""
        return self._re, self._im, self._den

    def __getitem__(self, key) -> GaussianRational:
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(key)
        t = i * self.cols + j
        return GaussianRational(Fraction(self._re[t], self._den), Fraction(self._im[t], self._den))

    @property
    def entries(self) -> tuple:
        d = self._den
        return tuple(GaussianRational(Fraction(a, d), Fraction(b, d)) for a, b in zip(self._re, self._im))

    def to_rows(self) -> list:
        e = self.entries
        return [list(e[i * self.cols:(i + 1) * self.cols]) for i in range(self.rows)]

    def col(self, j: int) -> "Mat":
        re = [self._re[i * self.cols + j] for i in range(self.rows)]
        im = [self._im[i * self.cols + j] for i in range(self.rows)]
        return Mat.from_parts(self.rows, 1, re, im, self._den)

    def row(self, i: int) -> "Mat":
        s = slice(i * self.cols, (i + 1) * self.cols)
        return Mat.from_parts(1, self.cols, self._re[s], self._im[s], self._den)

    def columns(self) -> list:
        return [self.col(j) for j in range(self.cols)]

    def select_rows(self, idx: Sequence[int]) -> "Mat":
        re: list = []
        im: list = []
        for i in idx:
            re.extend(self._re[i * self.cols:(i + 1) * self.cols])
            im.extend(self._im[i * self.cols:(i + 1) * self.cols])
        return Mat.from_parts(len(idx), self.cols, re, im, self._den)

    def select_cols(self, idx: Sequence[int]) -> "Mat":
        re = []
        im = []
        for i in range(self.rows):
            for j in idx:
                re.append(self._re[i * self.cols + j])
                im.append(self._im[i * self.cols + j])
        return Mat.from_parts(self.rows, len(idx), re, im, self._den)

    # -- predicates
    def is_zero(self) -> bool:
        return not any(self._re) and not any(self._im)

    def is_real(self) -> bool:
        return not any(self._im)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def __eq__(self, o):
        if not isinstance(o, Mat):
            return NotImplemented
        return (self.rows == o.rows and self.cols == o.cols and self._den == o._den
                and self._re == o._re and self._im == o._im)

    def __hash__(self):
        return hash((self.rows, self.cols, self._den, self._re, self._im))

    def __repr__(self):
        rows = ["[" + ", ".join(format_scalar(z) for z in r) + "]" for r in self.to_rows()]
        return f"Mat({self.rows}x{self.cols}: " + ", ".join(rows) + ")"

    # -- arithmetic
    def _combine(self, o: "Mat", sign: int) -> "Mat":
        if self.shape != o.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {o.shape}")
        den = _lcm(self._den, o._den)
        f = den // self._den
        g = den // o._den
        re = [a * f + sign * b * g for a, b in zip(self._re, o._re)]
        im = [a * f + sign * b * g for a, b in zip(self._im, o._im)]
        return Mat.from_parts(self.rows, self.cols, re, im, den)

    def __add__(self, o):
        if not isinstance(o, Mat):
            return NotImplemented
        return self._combine(o, 1)

    def __sub__(self, o):
        if not isinstance(o, Mat):
            return NotImplemented
        return self._combine(o, -1)

    def __neg__(self):
        return Mat.from_parts(self.rows, self.cols, [-v for v in self._re], [-v for v in self._im], self._den)

    def scale(self, z) -> "Mat":
        z = gr(z)
        d = _lcm(z.re.denominator, z.im.denominator)
        a = z.re.numerator * (d // z.re.denominator)
        b = z.im.numerator * (d // z.im.denominator)
        re = [a * x - b * y for x, y in zip(self._re, self._im)]
        im = [a * y + b * x for x, y in zip(self._re, self._im)]
        return Mat.from_parts(self.rows, self.cols, re, im, self._den * d)

    def __mul__(self, z):
        if isinstance(z, Mat):
            return NotImplemented
        return self.scale(z)

    __rmul__ = __mul__

    def __matmul__(self, o):
        if not isinstance(o, Mat):
            return NotImplemented
        if self.cols != o.rows:
            raise ValueError(f"cannot multiply {self.shape} by {o.shape}")
        cr, ci = _k.gi_matmul(self.rows, self.cols, o.cols, list(self._re), list(self._im),
                              list(o._re), list(o._im))
        return Mat.from_parts(self.rows, o.cols, cr, ci, self._den * o._den)

    def transpose(self) -> "Mat":
        r, c = self.rows, self.cols
        re = [self._re[i * c + j] for j in range(c) for i in range(r)]
        im = [self._im[i * c + j] for j in range(c) for i in range(r)]
        return Mat.from_parts(c, r, re, im, self._den)

    def conj(self) -> "Mat":
        return Mat.from_parts(self.rows, self.cols, self._re, [-v for v in self._im], self._den)

    def dagger(self) -> "Mat":
        return conj_transpose(self)

    def trace(self) -> GaussianRational:
        if not self.is_square():
            raise ValueError("trace of non-square matrix")
        n = self.cols
        a = sum(self._re[i * n + i] for i in range(n))
        b = sum(self._im[i * n + i] for i in range(n))
        return GaussianRational(Fraction(a, self._den), Fraction(b, self._den))

    def kron(self, o: "Mat") -> "Mat":
        r1, c1, r2, c2 = self.rows, self.cols, o.rows, o.cols
        R = r1 * r2
        C = c1 * c2
        re = [0] * (R * C)
        im = [0] * (R * C)
        for i1 in range(r1):
            for j1 in range(c1):
                a = self._re[i1 * c1 + j1]
                b = self._im[i1 * c1 + j1]
                if not a and not b:
                    continue
                for i2 in range(r2):
                    row = (i1 * r2 + i2) * C + j1 * c2
                    for j2 in range(c2):
                        x = o._re[i2 * c2 + j2]
                        y = o._im[i2 * c2 + j2]
                        if x or y:
                            re[row + j2] = a * x - b * y
                            im[row + j2] = a * y + b * x
        return Mat.from_parts(R, C, re, im, self._den * o._den)

    def commutator(self, o: "Mat") -> "Mat":
        return self @ o - o @ self

    def anticommutator(self, o: "Mat") -> "Mat":
        return self @ o + o @ self

    def flat_coords(self) -> list:
        """Entries as a flat list (row-major), useful for vectors."""
        return list(self.entries)


def vec(entries: Sequence) -> Mat:
    """Column vector."""
    return Mat.column(entries)


def conj_transpose(m: Mat) -> Mat:
    """Hermitian adjoint."""
    return m.transpose().conj()


def kron_all(mats: Sequence[Mat]) -> Mat:
    return reduce(lambda a, b: a.kron(b), mats)


# --------------------------------------------------------- row reduction


def _int_rows(m: Mat):
    c = m.cols
    re_rows = [list(m._re[i * c:(i + 1) * c]) for i in range(m.rows)]
    im_rows = [list(m._im[i * c:(i + 1) * c]) for i in range(m.rows)]
    return re_rows, im_rows


def _drop_zero_rows(re_rows, im_rows):
    keep = [i for i in range(len(re_rows)) if any(re_rows[i]) or any(im_rows[i])]
    return [re_rows[i] for i in keep], [im_rows[i] for i in keep]


def _gq(a: int, b: int) -> GaussianRational:
    return GaussianRational(a, b)


def rref(m: Mat, stop: Optional[int] = None):
    """Reduced row echelon data: (pivot columns, pivot rows as integer lists).

    Row i of the result has the Gaussian integer pivot at column pivots[i];
    divide by it to normalize.
    """
    re_rows, im_rows = _drop_zero_rows(*_int_rows(m))
    piv = _k.gi_rref(re_rows, im_rows, m.cols, stop)
    r = len(piv)
    return piv, re_rows[:r], im_rows[:r], re_rows[r:], im_rows[r:]


def rank(m: Mat) -> int:
    return len(rref(m)[0])


def kernel_basis(m: Mat) -> list:
    """Exact basis of the right null space, one column vector per free column."""
    piv, rr, ri, _, _ = rref(m)
    n = m.cols
    pivset = set(piv)
    basis = []
    for f in range(n):
        if f in pivset:
            continue
        ents = [ZERO] * n
        ents[f] = ONE
        for row, c in enumerate(piv):
            p = _gq(rr[row][c], ri[row][c])
            x = _gq(rr[row][f], ri[row][f])
            if not x.is_zero():
                ents[c] = -(x / p)
        basis.append(vec(ents))
    return basis


def solve(a: Mat, b: Mat) -> Optional[Mat]:
    """Some x with a x = b, or None when the system is inconsistent."""
    if b.cols != 1:
        raise ValueError("right-hand side must be a column vector")
    if a.rows != b.rows:
        raise ValueError(f"dimension mismatch: {a.rows} equations, rhs of length {b.rows}")
    aug = Mat.hstack([a, b])
    piv, rr, ri, zr, zi = rref(aug, stop=a.cols)
    for row_re, row_im in zip(zr, zi):
        if row_re[a.cols] or row_im[a.cols]:
            return None
    ents = [ZERO] * a.cols
    for row, c in enumerate(piv):
        p = _gq(rr[row][c], ri[row][c])
        ents[c] = _gq(rr[row][a.cols], ri[row][a.cols]) / p
    return vec(ents)


def inverse(m: Mat) -> Mat:
    if not m.is_square():
        raise ValueError("inverse of non-square matrix")
    n = m.rows
    aug = Mat.hstack([m, Mat.identity(n)])
    piv, rr, ri, _, _ = rref(aug, stop=n)
    if len(piv) != n:
        raise ZeroDivisionError("matrix is singular")
    ents = [ZERO] * (n * n)
    for row, c in enumerate(piv):
        p = _gq(rr[row][c], ri[row][c])
        for j in range(n):
            x = _gq(rr[row][n + j], ri[row][n + j])
            if x:
                ents[c * n + j] = x / p
    return Mat(n, n, ents)


def independent_subset(vectors: Sequence[Mat]) -> list:
    """Indices of a maximal linearly independent subset, greedy in order."""
    if not vectors:
        return []
    m = Mat.hstack(list(vectors))
    piv = rref(m)[0]
    return piv


def span_basis(vectors: Sequence[Mat]) -> list:
    return [vectors[i] for i in independent_subset(vectors)]


def coordinates(basis: Sequence[Mat], v: Mat) -> Optional[Mat]:
    """Coefficients c with sum c_j basis_j = v, or None if v is outside the span."""
    if not basis:
        return None if not v.is_zero() else vec([])
    return solve(Mat.hstack(list(basis)), v)


def intersect_kernels(mats: Sequence[Mat], n: int) -> list:
    """Basis of the common kernel of several matrices with n columns.

    Reduces one matrix at a time against the running kernel, which keeps
    the systems small when the kernel shrinks quickly.
    """
    basis = [vec([1 if i == j else 0 for i in range(n)]) for j in range(n)]
    B = Mat.identity(n)
    for m in mats:
        if not basis:
            break
        restricted = m @ B
        if restricted.is_zero():
            continue
        ker = kernel_basis(restricted)
        if not ker:
            return []
        B = B @ Mat.hstack(ker)
        basis = B.columns()
    return basis if B.cols else []


def lincomb(coeffs: Sequence, mats: Sequence[Mat]) -> Mat:
    """sum_k coeffs[k] * mats[k], accumulated in one pass."""
    if not mats:
        raise ValueError("empty linear combination")
    rows, cols = mats[0].shape
    size = rows * cols
    terms = []
    den = 1
    for c, m in zip(coeffs, mats):
        if m.shape != (rows, cols):
            raise ValueError("shape mismatch in linear combination")
        c = gr(c)
        if c.is_zero() or m.is_zero():
            continue
        d = _lcm(c.re.denominator, c.im.denominator)
        a = c.re.numerator * (d // c.re.denominator)
        b = c.im.numerator * (d // c.im.denominator)
        terms.append((a, b, d * m._den, m))
        den = _lcm(den, d * m._den)
    re = [0] * size
    im = [0] * size
    for a, b, d, m in terms:
        f = den // d
        a *= f
        b *= f
        mr, mi = m._re, m._im
        for t in range(size):
            x = mr[t]
            y = mi[t]
            if x or y:
                re[t] += a * x - b * y
                im[t] += a * y + b * x
    return Mat.from_parts(rows, cols, re, im, den)


def real_part(m: Mat) -> Mat:
    return Mat.from_parts(m.rows, m.cols, m._re, [0] * len(m._re), m._den)


def imag_part(m: Mat) -> Mat:
    return Mat.from_parts(m.rows, m.cols, m._im, [0] * len(m._im), m._den)


def realify(m: Mat) -> Mat:
    """Stack real over imaginary parts: complex columns seen as real vectors."""
    return Mat.vstack([real_part(m), imag_part(m)])


def left_inverse(K: Mat) -> Mat:
    """A left inverse of a full-column-rank matrix built from pivot rows."""
    rows = independent_subset(conj_transpose(K).columns())
    if len(rows) != K.cols:
        raise ValueError("matrix does not have full column rank")
    inv = inverse(K.select_rows(rows))
    n = K.rows
    d = K.cols
    ents = [ZERO] * (d * n)
    for a in range(d):
        for b, r in enumerate(rows):
            ents[a * n + r] = inv[a, b]
    return Mat(d, n, ents)
