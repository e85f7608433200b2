"""Tractor superalgebras g = g0 + g1: bracket tables, graded Jacobi checks,
orbit types of 2-form squares and the grade set of the odd-odd bracket.

All tables are structure constants on a real basis: g0 is spanned by real
invariant forms, g1 by either a complex invariant spinor basis together with
its multiples by i, or by real spinors fixed by a real structure.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Optional, Sequence

import numpy as np

from .clifford import CliffordRep, Signature, build_rep, form_matrix
from .exactla import (I, ZERO, GaussianRational, Mat, conj_transpose, imag_part, independent_subset,
                      kernel_basis, left_inverse, lincomb, real_part, realify, vec)
from .forms import (MixedForm, basis_indices, form_bracket, metric_matrix, tau, tau_inv)
from .holonomy import HolonomyAlgebra, form_invariants, spinor_invariants
from .spinors import (_grade_hermiticity, build_inner_product, clifford_kernel, real_structure, squaring)


class ClosureError(ArithmeticError):
    """A bracket value left the span of the invariant basis."""


PATTERNS = ("eee", "eeo", "eoo", "ooo")


# ------------------------------------------------------------ coordinates


class RealCoordinates:
    """Real coordinates with respect to a list of complex column vectors."""

    def __init__(self, vectors: Sequence[Mat], length: int):
        self.length = length
        self.dim = len(vectors)
        if vectors:
            self.matrix = Mat.hstack(list(vectors))
            self._real = realify(self.matrix)
            self._left = left_inverse(self._real)
        else:
            self.matrix = Mat.zeros(length, 0) if length else None

    def coords(self, targets: Mat) -> Mat:
        """Coordinates of each column of targets; raises ClosureError if one escapes."""
        if self.dim == 0:
            if not targets.is_zero():
                raise ClosureError("nonzero value in a zero-dimensional space")
            return Mat.zeros(0, targets.cols)
        t = realify(targets)
        c = self._left @ t
        if self._real @ c != t:
            raise ClosureError("bracket value outside the invariant span")
        return c

    def combine(self, coeffs: Sequence) -> Mat:
        if self.dim == 0:
            return Mat.zeros(self.length, 1)
        return self.matrix @ vec(list(coeffs))


class FormCodec:
    """Forms <-> coefficient columns over a fixed blade list."""

    def __init__(self, sig: Signature, grades: Sequence[int]):
        self.sig = sig
        self.keys = [b for k in grades for b in basis_indices(sig.n, k)]
        self.pos = {b: i for i, b in enumerate(self.keys)}

    def encode(self, a: MixedForm) -> Mat:
        ents = [ZERO] * len(self.keys)
        for key, c in a.items():
            if key not in self.pos:
                raise ClosureError(f"grade {len(key)} component outside the even part")
            ents[self.pos[key]] = c
        return vec(ents)

    def decode(self, v: Mat) -> MixedForm:
        return MixedForm(self.sig, {k: c for k, c in zip(self.keys, v.entries) if c})


def real_span(vectors: Sequence[Mat]) -> list:
    """Real basis of the real span of the real and imaginary parts."""
    cands = []
    for v in vectors:
        cands.append(real_part(v))
        cands.append(imag_part(v))
    cands = [c for c in cands if not c.is_zero()]
    return [cands[i] for i in independent_subset(cands)] if cands else []


def complex_as_real_basis(vectors: Sequence[Mat]) -> list:
    out = []
    for v in vectors:
        out.append(v)
        out.append(v.scale(I))
    return out


def real_points(vectors: Sequence[Mat], rs) -> list:
    """Real basis of {v in span_C(vectors) : J v = v} for a real structure J."""
    if not vectors:
        return []
    basis = complex_as_real_basis(vectors)
    cols = [rs.apply(w) - w for w in basis]
    M = realify(Mat.hstack(cols))
    if M.is_zero():
        ker = [vec([1 if i == j else 0 for i in range(len(basis))]) for j in range(len(basis))]
    else:
        ker = kernel_basis(M)
    return [lincomb(list(k.entries), basis) for k in ker]


# ------------------------------------------------------------ profiles


@dataclass(frozen=True)
class BracketProfile:
    kind: str                       # "lorentzian2form" or "general"
    odd_odd_grades: tuple = ()

    def __post_init__(self):
        if self.kind not in ("lorentzian2form", "general"):
            raise ValueError(f"unknown profile {self.kind!r}")


def even_grades(sig: Signature) -> list:
    """Grades of g0 for the general profile.

    For odd dimension the volume form is central in the Clifford algebra, so
    it is never produced by a bracket and acts on spinors by a scalar; it is
    left out. For even dimension it is kept because commutators reach it.
    """
    top = sig.n if sig.n % 2 == 0 else sig.n - 1
    return list(range(1, top + 1))


def determine_Lp(sig: Signature, real_basis: Optional[Sequence[Mat]] = None) -> list:
    """Grades l with psi -> alpha^l_{psi,psi} not identically zero and alpha^l symmetric."""
    rep = build_rep(sig)
    if real_basis is None:
        real_basis = complex_as_real_basis(
            [vec([1 if i == j else 0 for i in range(rep.dim)]) for j in range(rep.dim)])
    out = []
    for l in even_grades(sig):
        tabs = _squaring_tables(rep, real_basis, l)
        symmetric = all(M == M.transpose() for M in tabs.values())
        nontrivial = any(M[a, a] for M in tabs.values() for a in range(M.rows))
        if not nontrivial and symmetric:
            # polarization: the quadratic map vanishes iff the symmetric table does
            nontrivial = any(not M.is_zero() for M in tabs.values())
        if symmetric and nontrivial:
            out.append(l)
    return out


def _squaring_tables(rep: CliffordRep, basis: Sequence[Mat], k: int) -> dict:
    """Blade I -> real matrix T with T[b, a] = coefficient of e_I in alpha^k_{basis_a, basis_b}."""
    sel = _grade_hermiticity(rep, k)
    ip = build_inner_product(rep)
    B = Mat.hstack(list(basis))
    Bd = conj_transpose(B)
    GB = ip.gram
    signs = rep.sig.signs
    out = {}
    for idx in basis_indices(rep.n, k):
        M = Bd @ (GB @ (rep.product(idx) @ B))
        part = real_part(M) if sel == "re" else imag_part(M)
        s = 1
        for i in idx:
            s *= signs[i]
        out[idx] = part if s == 1 else -part
    return out


# ------------------------------------------------------------ superalgebra


@dataclass
class Witness:
    pattern: str
    triple: tuple          # global basis indices
    defect: list           # real coordinates (Fractions) on the whole basis
    element: object        # defect as a form / even element or spinor


@dataclass
class JacobiReport:
    flags: dict
    witnesses: dict = field(default_factory=dict)

    @property
    def eee(self):
        return self.flags["eee"]

    @property
    def eeo(self):
        return self.flags["eeo"]

    @property
    def eoo(self):
        return self.flags["eoo"]

    @property
    def ooo(self):
        return self.flags["ooo"]

    def to_json(self) -> dict:
        from .exactla import format_scalar
        return {
            "flags": dict(self.flags),
            "witnesses": {
                k: {"triple": list(w.triple), "defect": [format_scalar(x) for x in w.defect]}
                for k, w in sorted(self.witnesses.items())
            },
        }


class Superalgebra:
    """Structure constants of g0 + g1 on a real basis.

    even_basis: list of even elements; codec encodes them into complex columns.
    odd_basis: list of spinor columns, real basis of g1.
    ee(a, b) -> even; eo_op(a) -> matrix acting on spinors; oo(p, q) -> even.
    """

    def __init__(self, even_basis, odd_basis, codec, ee: Callable, eo_op: Callable, oo: Callable,
                 oo_batch: Optional[Callable] = None, holonomy=None, profile=None, field="complex",
                 label: str = ""):
        self.holonomy = holonomy
        self.profile = profile
        self.field = field
        self.label = label
        self.g0_basis = list(even_basis)
        self.g1_basis = list(odd_basis)
        self.codec = codec
        self._ee, self._eo_op, self._oo = ee, eo_op, oo
        self.d0, self.d1 = len(self.g0_basis), len(self.g1_basis)
        enc = [codec.encode(x) for x in self.g0_basis]
        self.even_coords = RealCoordinates(enc, len(codec.keys) if hasattr(codec, "keys") else codec.length)
        spin_len = self.g1_basis[0].rows if self.g1_basis else 0
        self.odd_coords = RealCoordinates(self.g1_basis, spin_len)
        self._build_tables(oo_batch)

    # raw brackets on elements -------------------------------------------------

    def bracket_even_even(self, a, b):
        return self._ee(a, b)

    def bracket_even_odd(self, a, psi: Mat) -> Mat:
        return self._eo_op(a) @ psi

    def bracket_odd_odd(self, p: Mat, q: Mat):
        return self._oo(p, q)

    @property
    def dim(self) -> int:
        return self.d0 + self.d1

    def parity(self, i: int) -> int:
        return 0 if i < self.d0 else 1

    def basis_element(self, i: int):
        return self.g0_basis[i] if i < self.d0 else self.g1_basis[i - self.d0]

    def element_from_coords(self, coords: Sequence):
        """Even part and odd part of sum c_i basis_i."""
        c0, c1 = list(coords[:self.d0]), list(coords[self.d0:])
        even = self.codec.decode(self.even_coords.combine(c0)) if self.d0 else None
        odd = self.odd_coords.combine(c1) if self.d1 else None
        return even, odd

    def coords_of(self, even=None, odd=None) -> list:
        out = [Fraction(0)] * self.dim
        if even is not None and self.d0:
            c = self.odd_or_even_coords(self.codec.encode(even), 0)
            out[:self.d0] = c
        if odd is not None and self.d1:
            out[self.d0:] = self.odd_or_even_coords(odd, 1)
        return out

    def odd_or_even_coords(self, v: Mat, parity: int) -> list:
        rc = self.even_coords if parity == 0 else self.odd_coords
        return [z.re for z in rc.coords(v).entries]

    def bracket(self, i, x, j, y):
        """Graded bracket of elements x (parity i) and y (parity j)."""
        if i == 0 and j == 0:
            return self._ee(x, y)
        if i == 0 and j == 1:
            return self._eo_op(x) @ y
        if i == 1 and j == 0:
            return -(self._eo_op(y) @ x)
        return self._oo(x, y)

    # tables ----------------------------------------------------------------------

    def _build_tables(self, oo_batch):
        d0, d1, d = self.d0, self.d1, self.dim
        C = [[[Fraction(0)] * d for _ in range(d)] for _ in range(d)]
        # even-even
        if d0:
            pairs = [(a, b) for a in range(d0) for b in range(a + 1, d0)]
            if pairs:
                vals = Mat.hstack([self.codec.encode(self._ee(self.g0_basis[a], self.g0_basis[b]))
                                   for a, b in pairs])
                co = self.even_coords.coords(vals)
                for col, (a, b) in enumerate(pairs):
                    for c in range(d0):
                        v = co[c, col].re
                        C[a][b][c] = v
                        C[b][a][c] = -v
        # even-odd
        if d0 and d1:
            B = Mat.hstack(self.g1_basis)
            imgs = Mat.hstack([self._eo_op(x) @ B for x in self.g0_basis])
            co = self.odd_coords.coords(imgs)
            for a in range(d0):
                for j in range(d1):
                    col = a * d1 + j
                    for c in range(d1):
                        v = co[c, col].re
                        C[a][d0 + j][d0 + c] = v
                        C[d0 + j][a][d0 + c] = -v
        # odd-odd
        if d1:
            if oo_batch is not None:
                vals = oo_batch(self.g1_basis)  # columns for pairs (a, b), a <= b
            else:
                vals = Mat.hstack([self.codec.encode(self._oo(self.g1_basis[a], self.g1_basis[b]))
                                   for a in range(d1) for b in range(a, d1)])
            co = self.even_coords.coords(vals) if d0 else None
            if d0 == 0 and not vals.is_zero():
                raise ClosureError("odd-odd bracket nonzero but g0 is zero")
            col = 0
            for a in range(d1):
                for b in range(a, d1):
                    for c in range(d0):
                        v = co[c, col].re
                        C[d0 + a][d0 + b][c] = v
                        C[d0 + b][d0 + a][c] = v
                    col += 1
        self.structure = C
        den = 1
        for plane in C:
            for row in plane:
                for v in row:
                    if v:
                        den = den * v.denominator // gcd(den, v.denominator)
        self.denominator = den
        self._int = [[[int(v * den) for v in row] for row in plane] for plane in C]

    def is_abelian_even(self) -> bool:
        return all(not self.structure[a][b][c] for a in range(self.d0) for b in range(self.d0)
                   for c in range(self.d0))

    # Jacobi -------------------------------------------------------------------------

    def _slices(self, pattern: str):
        ev = list(range(self.d0))
        od = list(range(self.d0, self.dim))
        return [ev if ch == "e" else od for ch in pattern]

    def jacobi_check(self) -> JacobiReport:
        d = self.dim
        flags, witnesses = {}, {}
        if d == 0:
            return JacobiReport({p: True for p in PATTERNS})
        big = max((abs(v) for plane in self._int for row in plane for v in row), default=0)
        exact_float = 3 * d * big * big < 2 ** 52
        dtype = np.float64 if exact_float else object
        T = np.array(self._int, dtype=dtype) if d else np.zeros((0, 0, 0))
        for pattern in PATTERNS:
            Sx, Sy, Sz = self._slices(pattern)
            if not (Sx and Sy and Sz):
                flags[pattern] = True
                continue
            sign = -1 if (pattern[0] == "o" and pattern[1] == "o") else 1
            found = None
            for x in Sx:
                Cx = T[x]                                        # (c, w)
                t1 = np.tensordot(T[np.ix_(Sy, Sz)], Cx, axes=([2], [0]))      # y z w
                t2 = np.tensordot(T[x][Sy], T[:, Sz, :], axes=([1], [0]))      # y z w
                t3 = np.tensordot(T[x][Sz], T[Sy], axes=([1], [1]))            # z y w
                J = t1 - t2 - sign * np.transpose(t3, (1, 0, 2))
                nz = np.argwhere(J != 0)
                if len(nz):
                    yi, zi, _ = nz[0]
                    vec_ = J[yi, zi]
                    found = (x, Sy[yi], Sz[zi], vec_)
                    break
            flags[pattern] = found is None
            if found is not None:
                x, y, z, v = found
                den2 = self.denominator * self.denominator
                defect = [Fraction(int(round(t)) if exact_float else int(t), den2) for t in v]
                witnesses[pattern] = Witness(pattern, (x, y, z), defect, self.element_from_coords(defect))
        return JacobiReport(flags, witnesses)

    def direct_defect(self, x: int, y: int, z: int):
        """[X,[Y,Z]] - [[X,Y],Z] - (-1)^{|X||Y|}[Y,[X,Z]] from the raw brackets, as coordinates."""
        px, py, pz = self.parity(x), self.parity(y), self.parity(z)
        X, Y, Z = self.basis_element(x), self.basis_element(y), self.basis_element(z)
        yz = self.bracket(py, Y, pz, Z)
        t1 = self.bracket(px, X, (py + pz) % 2, yz)
        xy = self.bracket(px, X, py, Y)
        t2 = self.bracket((px + py) % 2, xy, pz, Z)
        xz = self.bracket(px, X, pz, Z)
        t3 = self.bracket(py, Y, (px + pz) % 2, xz)
        s = -1 if px and py else 1
        par = (px + py + pz) % 2
        if par == 0:
            c1, c2, c3 = (self.coords_of(even=t) for t in (t1, t2, t3))
        else:
            c1, c2, c3 = (self.coords_of(odd=t) for t in (t1, t2, t3))
        return [a - b - s * c for a, b, c in zip(c1, c2, c3)]


# ------------------------------------------------------------ builders


def g1_real_basis(h: HolonomyAlgebra, field: str) -> list:
    inv = spinor_invariants(h)
    if field == "complex":
        return complex_as_real_basis(inv)
    if field == "real":
        rs = real_structure(build_rep(h.tractor_sig))
        if rs is None:
            raise ValueError(f"no real structure on spinors of {h.tractor_sig}")
        return real_points(inv, rs)
    raise ValueError(f"unknown field {field!r}")


def _real_forms(forms: Sequence[MixedForm], codec: FormCodec) -> list:
    vs = real_span([codec.encode(f) for f in forms])
    return [codec.decode(v) for v in vs]


def build(h: HolonomyAlgebra, profile_kind: str = "lorentzian2form", field: str = "complex",
          odd_odd_grades: Optional[Sequence[int]] = None) -> Superalgebra:
    sig = h.tractor_sig
    rep = build_rep(sig)
    odd = g1_real_basis(h, field)
    if profile_kind == "lorentzian2form":
        if 2 not in (sig.p, sig.q):
            # (n, 2) is the same model with the metric negated
            raise ValueError("the 2-form profile needs tractor signature (2, n) or (n, 2)")
        if _grade_hermiticity(rep, 2) != "im":
            raise ArithmeticError("2-form squaring does not use the imaginary part")
        codec = FormCodec(sig, [2])
        evens = _real_forms(form_invariants(h, 2), codec)
        profile = BracketProfile("lorentzian2form", (2,))
        half = Fraction(1, 2)

        def ee(a, b):
            return tau_inv(tau(a).bracket(tau(b)))

        def eo_op(a):
            return form_matrix(rep, a).scale(half)

        def oo(p, q):
            return squaring(rep, p, q, 2)

        grades = (2,)
    elif profile_kind == "general":
        grades_even = even_grades(sig)
        codec = FormCodec(sig, range(0, sig.n + 1))
        evens = []
        for k in grades_even:
            evens.extend(form_invariants(h, k))
        evens = _real_forms(evens, codec)
        grades = tuple(odd_odd_grades) if odd_odd_grades is not None else tuple(determine_Lp(sig, odd or None))
        profile = BracketProfile("general", grades)

        def ee(a, b):
            return form_bracket(a, b)

        def eo_op(a):
            return form_matrix(rep, a)

        def oo(p, q):
            out = MixedForm.zero(sig)
            for l in grades:
                out = out + squaring(rep, p, q, l)
            return out
    else:
        raise ValueError(f"unknown profile {profile_kind!r}")

    def oo_batch(basis):
        tabs = {}
        for l in grades:
            tabs.update(_squaring_tables(rep, basis, l))
        d1 = len(basis)
        cols = []
        keys = codec.keys
        for a in range(d1):
            for b in range(a, d1):
                cols.append(vec([tabs[k][b, a] if k in tabs else ZERO for k in keys]))
        return Mat.hstack(cols)

    return Superalgebra(evens, odd, codec, ee, eo_op, oo, oo_batch, holonomy=h, profile=profile,
                        field=field, label=h.name)


# ------------------------------------------------------------ orbit types


@dataclass(frozen=True)
class OrbitType:
    kind: str
    kernel_dim: int
    euclidean_complement_dim: Optional[int] = None


def real_clifford_kernel(rep: CliffordRep, chi: Mat) -> list:
    """Real vectors v with v . chi = 0."""
    return clifford_kernel(rep, chi)


def _positive_definite(G: Mat) -> bool:
    n = G.rows
    for k in range(1, n + 1):
        sub = G.select_rows(range(k)).select_cols(range(k))
        if _det(sub) <= 0:
            return False
    return True


def _det(m: Mat) -> Fraction:
    rows = [[z.re for z in r] for r in m.to_rows()]
    n = len(rows)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if rows[r][c]), None)
        if p is None:
            return Fraction(0)
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            det = -det
        det *= rows[c][c]
        for r in range(c + 1, n):
            f = rows[r][c] / rows[c][c]
            if f:
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[c])]
    return det


def classify_orbit_type(rep: CliffordRep, chi: Mat) -> OrbitType:
    if rep.sig.p != 2:
        raise ValueError("orbit types are defined for tractor signature (2, n)")
    if chi.is_zero():
        raise ValueError("orbit type of the zero spinor")
    kd = len(real_clifford_kernel(rep, chi))
    if kd == 2:
        return OrbitType("lightlike_plane", 2)
    if kd == 1:
        return OrbitType("lightlike_timelike", 1)
    if kd > 2:
        raise ArithmeticError(f"unexpected Clifford kernel dimension {kd}")
    A = tau(squaring(rep, chi, chi, 2)).mat
    ker = kernel_basis(A)
    if not ker:
        return OrbitType("kaehler", 0)
    K = Mat.hstack(ker)
    G = K.transpose() @ metric_matrix(rep.sig) @ K
    if not G.is_real() or not _positive_definite(G):
        raise ArithmeticError("kernel of the 2-form is not Euclidean")
    return OrbitType("partial_kaehler", 0, len(ker))


def holonomy_obstruction_predicate(h: HolonomyAlgebra, samples: int = 16, seed: int = 0) -> bool:
    """True iff no invariant spinor is of Kaehler or partial Kaehler type.

    A common real null vector killing all invariant spinors settles it at once.
    Otherwise every basis spinor and seeded random combinations are classified;
    the kernel dimension drops on a dense set, so a generic sample finds the
    minimal value.
    """
    rep = build_rep(h.tractor_sig)
    inv = spinor_invariants(h)
    if not inv:
        return True
    blocks = [realify(Mat.hstack([g @ v for g in rep.gammas])) for v in inv]
    common = kernel_basis(Mat.vstack(blocks))
    if common:
        return True
    rng = random.Random(seed)
    cands = list(inv)
    for _ in range(samples):
        cands.append(lincomb([GaussianRational(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in inv], inv))
    for c in cands:
        if c.is_zero():
            continue
        if classify_orbit_type(rep, c).kind in ("kaehler", "partial_kaehler"):
            return False
    return True
