"""Exterior algebra of R^{p,q} with the Clifford product on forms.

Forms are stored on the basis e_I^flat = e_{i1}^flat ^ ... ^ e_{ik}^flat
where e_i^flat is the metric dual of e_i.  Under the identification with
the Clifford algebra, e_I^flat corresponds to e_{i1} ... e_{ik}.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence

from .clifford import CliffordRep, Signature
from .exactla import ZERO, GaussianRational, Mat, format_scalar, gr, lincomb, parse_scalar, solve, vec


class MixedForm:
    """Element of Lambda^* R^{p,q}: sparse map from increasing index tuples to scalars."""

    __slots__ = ("sig", "_c")

    def __init__(self, sig: Signature, components: Optional[Mapping] = None):
        self.sig = sig
        c = {}
        n = sig.n
        for key, val in (components or {}).items():
            idx = tuple(key)
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise ValueError(f"indices must be strictly increasing: {idx}")
            if idx and (idx[0] < 0 or idx[-1] >= n):
                raise ValueError(f"index out of range for n = {n}: {idx}")
            z = gr(val)
            if not z.is_zero():
                c[idx] = c.get(idx, ZERO) + z
                if c[idx].is_zero():
                    del c[idx]
        self._c = c

    @classmethod
    def _raw(cls, sig, comps: dict) -> "MixedForm":
        f = cls.__new__(cls)
        f.sig = sig
        f._c = {k: v for k, v in comps.items() if not v.is_zero()}
        return f

    @classmethod
    def zero(cls, sig: Signature) -> "MixedForm":
        return cls._raw(sig, {})

    @classmethod
    def scalar(cls, sig: Signature, c=1) -> "MixedForm":
        return cls._raw(sig, {(): gr(c)})

    @classmethod
    def blade(cls, sig: Signature, idx: Sequence[int], c=1) -> "MixedForm":
        """c * e_I^flat for I given in any order (sign from sorting)."""
        s, key = _sort_sign(tuple(idx))
        if s == 0:
            return cls.zero(sig)
        return cls(sig, {key: gr(c) * s})

    @classmethod
    def flat(cls, sig: Signature, v: Sequence) -> "MixedForm":
        """X^flat for X = sum v_i e_i."""
        if len(v) != sig.n:
            raise ValueError("vector length does not match signature")
        return cls(sig, {(i,): c for i, c in enumerate(v)})

    @property
    def components(self) -> dict:
        return dict(self._c)

    def items(self):
        return self._c.items()

    def coeff(self, idx) -> GaussianRational:
        return self._c.get(tuple(idx), ZERO)

    def grades(self) -> list:
        return sorted({len(k) for k in self._c})

    def grade(self) -> int:
        g = self.grades()
        if len(g) > 1:
            raise ValueError(f"mixed-grade form (grades {g})")
        return g[0] if g else 0

    def part(self, k: int) -> "MixedForm":
        return MixedForm._raw(self.sig, {i: v for i, v in self._c.items() if len(i) == k})

    def is_zero(self) -> bool:
        return not self._c

    def is_real(self) -> bool:
        return all(v.is_real() for v in self._c.values())

    def _check(self, o: "MixedForm"):
        if not isinstance(o, MixedForm):
            raise TypeError("expected a MixedForm")
        if o.sig != self.sig:
            raise ValueError(f"signature mismatch {self.sig} vs {o.sig}")

    def __add__(self, o):
        self._check(o)
        c = dict(self._c)
        for k, v in o._c.items():
            c[k] = c.get(k, ZERO) + v
        return MixedForm._raw(self.sig, c)

    def __sub__(self, o):
        return self + (-o)

    def __neg__(self):
        return MixedForm._raw(self.sig, {k: -v for k, v in self._c.items()})

    def scale(self, z) -> "MixedForm":
        z = gr(z)
        return MixedForm._raw(self.sig, {k: v * z for k, v in self._c.items()})

    def __mul__(self, z):
        if isinstance(z, MixedForm):
            return NotImplemented
        return self.scale(z)

    __rmul__ = __mul__

    def __eq__(self, o):
        if not isinstance(o, MixedForm):
            return NotImplemented
        return self.sig == o.sig and self._c == o._c

    def __hash__(self):
        return hash((self.sig, frozenset(self._c.items())))

    def __repr__(self):
        if not self._c:
            return f"MixedForm{self.sig}(0)"
        terms = [f"({format_scalar(v)})e{list(k)}" for k, v in sorted(self._c.items(), key=lambda kv: (len(kv[0]), kv[0]))]
        return f"MixedForm{self.sig}(" + " + ".join(terms) + ")"

    def to_json(self) -> list:
        return [{"indices": list(k), "coeff": format_scalar(v)}
                for k, v in sorted(self._c.items(), key=lambda kv: (len(kv[0]), kv[0]))]

    @classmethod
    def from_json(cls, sig: Signature, data: Iterable[dict]) -> "MixedForm":
        return cls(sig, {tuple(d["indices"]): parse_scalar(d["coeff"]) for d in data})

    def coords(self, k: int) -> list:
        """Coefficients on the grade-k basis in lexicographic order."""
        return [self.coeff(b) for b in basis_indices(self.sig.n, k)]

    def shift(self, sig: Signature, offset: int) -> "MixedForm":
        """Relabel indices i -> i + offset on another signature."""
        return MixedForm(sig, {tuple(i + offset for i in k): v for k, v in self._c.items()})


@lru_cache(maxsize=None)
def basis_indices(n: int, k: int) -> tuple:
    return tuple(combinations(range(n), k))


def basis_forms(sig: Signature, k: int) -> list:
    return [MixedForm._raw(sig, {idx: GaussianRational(1)}) for idx in basis_indices(sig.n, k)]


def from_coords(sig: Signature, k: int, coords: Sequence) -> MixedForm:
    return MixedForm(sig, dict(zip(basis_indices(sig.n, k), coords)))


def _sort_sign(idx: tuple):
    """(sign, sorted) for a wedge of basis covectors in the given order; sign 0 on repeats."""
    if len(set(idx)) != len(idx):
        return 0, ()
    inv = sum(1 for a in range(len(idx)) for b in range(a + 1, len(idx)) if idx[a] > idx[b])
    return (-1 if inv % 2 else 1), tuple(sorted(idx))


def _inversions(a: tuple, b: tuple) -> int:
    return sum(1 for x in a for y in b if x > y)


@lru_cache(maxsize=1 << 18)
def _blade_product(signs: tuple, a: tuple, b: tuple):
    """Clifford product e_a e_b of sorted blades: (coefficient, sorted blade)."""
    s = -1 if _inversions(a, b) % 2 else 1
    common = set(a) & set(b)
    for i in common:
        s *= -signs[i]
    return s, tuple(sorted(set(a) ^ set(b)))


def metric_pair(a: MixedForm, b: MixedForm) -> GaussianRational:
    """Bilinear extension of <e_I, e_J> = delta_IJ prod eps_i."""
    a._check(b)
    signs = a.sig.signs
    total = ZERO
    small, big = (a, b) if len(a._c) <= len(b._c) else (b, a)
    for k, v in small._c.items():
        w = big._c.get(k)
        if w is not None:
            s = 1
            for i in k:
                s *= signs[i]
            total = total + v * w * s
    return total


def wedge(a: MixedForm, b: MixedForm) -> MixedForm:
    a._check(b)
    out: dict = {}
    for ka, va in a._c.items():
        sa = set(ka)
        for kb, vb in b._c.items():
            if sa.intersection(kb):
                continue
            s = -1 if _inversions(ka, kb) % 2 else 1
            key = tuple(sorted(ka + kb))
            out[key] = out.get(key, ZERO) + va * vb * s
    return MixedForm._raw(a.sig, out)


def interior(v: Sequence, a: MixedForm) -> MixedForm:
    """Metric contraction X _| a with e_i _| e_i^flat = eps_i."""
    sig = a.sig
    if len(v) != sig.n:
        raise ValueError("vector length does not match signature")
    vv = [gr(x) for x in v]
    out: dict = {}
    for k, c in a._c.items():
        for pos, i in enumerate(k):
            if vv[i].is_zero():
                continue
            key = k[:pos] + k[pos + 1:]
            s = sig.eps(i) * (-1 if pos % 2 else 1)
            out[key] = out.get(key, ZERO) + c * vv[i] * s
    return MixedForm._raw(sig, out)


def volume(sig: Signature) -> MixedForm:
    return MixedForm._raw(sig, {tuple(range(sig.n)): GaussianRational(1)})


def hodge_star(a: MixedForm) -> MixedForm:
    """a ^ *b = <a, b> vol with vol = e_1 ^ ... ^ e_n in index order."""
    a.grade()
    sig = a.sig
    full = set(range(sig.n))
    out = {}
    for k, c in a._c.items():
        comp = tuple(sorted(full - set(k)))
        s = -1 if _inversions(k, comp) % 2 else 1
        for i in k:
            s *= sig.eps(i)
        out[comp] = c * s
    return MixedForm._raw(sig, out)


def clifford_product(a: MixedForm, b: MixedForm) -> MixedForm:
    a._check(b)
    signs = a.sig.signs
    out: dict = {}
    for ka, va in a._c.items():
        for kb, vb in b._c.items():
            s, key = _blade_product(signs, ka, kb)
            w = va * vb if s > 0 else -(va * vb)
            prev = out.get(key)
            out[key] = w if prev is None else prev + w
    return MixedForm._raw(a.sig, out)


def form_bracket(a: MixedForm, b: MixedForm) -> MixedForm:
    """[a, b] = a.b - b.a in the Clifford algebra of forms."""
    return clifford_product(a, b) - clifford_product(b, a)


# ---------------------------------------------------------- so(p,q)


@dataclass(frozen=True)
class SkewEndo:
    sig: Signature
    mat: Mat

    def __post_init__(self):
        n = self.sig.n
        if self.mat.shape != (n, n):
            raise ValueError(f"endomorphism of shape {self.mat.shape} on {self.sig}")

    def is_skew(self) -> bool:
        g = metric_matrix(self.sig)
        return (g @ self.mat + self.mat.transpose() @ g).is_zero()

    def bracket(self, o: "SkewEndo") -> "SkewEndo":
        return SkewEndo(self.sig, self.mat.commutator(o.mat))

    def __add__(self, o):
        return SkewEndo(self.sig, self.mat + o.mat)

    def __sub__(self, o):
        return SkewEndo(self.sig, self.mat - o.mat)

    def scale(self, z):
        return SkewEndo(self.sig, self.mat.scale(z))


def _diag_entries(sig: Signature) -> list:
    n = sig.n
    out = [0] * (n * n)
    for i in range(n):
        out[i * n + i] = sig.eps(i)
    return out


def metric_matrix(sig: Signature) -> Mat:
    return Mat(sig.n, sig.n, _diag_entries(sig))


def so_element(sig: Signature, k: int, l: int) -> SkewEndo:
    """E_kl = eps_k D_lk - eps_l D_kl (D_ab = matrix unit at (a,b)); E_lk = -E_kl."""
    if k == l:
        raise ValueError("E_kk is not defined")
    n = sig.n
    ents = [0] * (n * n)
    ents[l * n + k] = sig.eps(k)
    ents[k * n + l] = -sig.eps(l)
    return SkewEndo(sig, Mat(n, n, ents))


def so_basis(sig: Signature) -> list:
    return [so_element(sig, k, l) for k, l in basis_indices(sig.n, 2)]


def tau(a: MixedForm) -> SkewEndo:
    """Endomorphism X -> (X _| a)^sharp of a 2-form."""
    if a.grades() not in ([], [2]):
        raise ValueError("tau needs a pure 2-form")
    n = a.sig.n
    mats = [so_element(a.sig, k, l).mat for (k, l) in a._c]
    if not mats:
        return SkewEndo(a.sig, Mat.zeros(n, n))
    return SkewEndo(a.sig, lincomb(list(a._c.values()), mats))


def tau_inv(A: SkewEndo) -> MixedForm:
    if not A.is_skew():
        raise ValueError("endomorphism is not skew for the metric")
    sig = A.sig
    out = {}
    for k, l in basis_indices(sig.n, 2):
        c = A.mat[l, k] * sig.eps(k)
        if c:
            out[(k, l)] = c
    return MixedForm._raw(sig, out)


def derivation_matrix(A: SkewEndo, k: int) -> Mat:
    """Matrix of A acting on Lambda^k as a derivation, lexicographic basis."""
    sig = A.sig
    n = sig.n
    basis = basis_indices(n, k)
    pos = {b: i for i, b in enumerate(basis)}
    N = len(basis)
    rows = A.mat.to_rows()
    cols_nz = [[(r, rows[r][c]) for r in range(n) if rows[r][c]] for c in range(n)]
    ents = [ZERO] * (N * N)
    for j, blade in enumerate(basis):
        for slot, i in enumerate(blade):
            for r, a in cols_nz[i]:
                new = blade[:slot] + (r,) + blade[slot + 1:]
                s, key = _sort_sign(new)
                if s:
                    t = pos[key] * N + j
                    ents[t] = ents[t] + a * s
    return Mat(N, N, ents)


def derivation_action(A: SkewEndo, a: MixedForm) -> MixedForm:
    out = MixedForm.zero(A.sig)
    for k in a.grades():
        v = derivation_matrix(A, k) @ vec(a.coords(k))
        out = out + from_coords(A.sig, k, v.entries)
    return out


@lru_cache(maxsize=None)
def _spin_lift_system(sig: Signature) -> Mat:
    """Linear map c_(i<j) -> coefficients of [sum c_ij e_i e_j, e_m] on e_k, rows (m, k)."""
    n = sig.n
    pairs = basis_indices(n, 2)
    ents = [0] * (n * n * len(pairs))
    for col, (i, j) in enumerate(pairs):
        # [e_i e_j, e_i] = 2 eps_i e_j ; [e_i e_j, e_j] = -2 eps_j e_i
        ents[(i * n + j) * len(pairs) + col] = 2 * sig.eps(i)
        ents[(j * n + i) * len(pairs) + col] = -2 * sig.eps(j)
    return Mat(n * n, len(pairs), ents)


def spin_lift(A: SkewEndo, rep: CliffordRep) -> Mat:
    """Degree-2 Clifford element x with [x, Phi(v)] = Phi(A v) for all v."""
    sig = A.sig
    if rep.sig != sig:
        raise ValueError("representation signature mismatch")
    n = sig.n
    rhs = [A.mat[k, m] for m in range(n) for k in range(n)]
    sol = solve(_spin_lift_system(sig), vec(rhs))
    if sol is None:
        raise ValueError("spin lift system is inconsistent: endomorphism not skew")
    pairs = basis_indices(n, 2)
    return lincomb(list(sol.entries), [rep.product(pr) for pr in pairs])


def spin_lift_form(A: SkewEndo) -> MixedForm:
    """The same lift as a 2-form in the Clifford algebra of forms."""
    sig = A.sig
    n = sig.n
    rhs = [A.mat[k, m] for m in range(n) for k in range(n)]
    sol = solve(_spin_lift_system(sig), vec(rhs))
    if sol is None:
        raise ValueError("spin lift system is inconsistent: endomorphism not skew")
    return from_coords(sig, 2, sol.entries)


# ------------------------------------------------- tractor decomposition


@dataclass(frozen=True)
class TractorDecomp:
    """alpha = fp ^ plus + zero + fm ^ fp ^ mp + fm ^ minus (forms on the base)."""
    plus: MixedForm
    zero: MixedForm
    mp: MixedForm
    minus: MixedForm
    convention: str = "f"


def _null_pair(tsig: Signature, convention: str):
    """Coefficient vectors of the lightlike pair in the tractor basis."""
    N = tsig.n
    fp = [0] * N
    fm = [0] * N
    fp[0], fp[N - 1] = 1, 1
    if convention == "f":
        fm[0], fm[N - 1] = -1, 1
    elif convention == "g":
        fm[0], fm[N - 1] = GaussianRational(-1, 0) / 2, GaussianRational(1, 0) / 2
    else:
        raise ValueError("convention must be 'f' or 'g'")
    return fp, fm


def null_vectors(tsig: Signature, convention: str = "f"):
    """(plus, minus) vectors; f: e_last +- e_0, g: (e_last + e_0, (e_last - e_0)/2)."""
    return _null_pair(tsig, convention)


def decompose(a: MixedForm, convention: str = "f") -> TractorDecomp:
    """Split a tractor form along the lightlike pair (see null_vectors)."""
    tsig = a.sig
    base = tsig.base()
    N = tsig.n
    last = N - 1
    A: dict = {}
    B: dict = {}
    C: dict = {}
    D: dict = {}
    for k, v in a._c.items():
        has0 = bool(k) and k[0] == 0
        hasl = bool(k) and k[-1] == last
        inner = tuple(i - 1 for i in k if i != 0 and i != last)
        if has0 and hasl:
            # e_0 ^ inner ^ e_last = e_0 ^ e_last ^ inner * (-1)^len(inner)
            C[inner] = C.get(inner, ZERO) + v * (-1 if len(inner) % 2 else 1)
        elif has0:
            A[inner] = A.get(inner, ZERO) + v
        elif hasl:
            B[inner] = B.get(inner, ZERO) + v * (-1 if len(inner) % 2 else 1)
        else:
            D[inner] = D.get(inner, ZERO) + v
    fA = MixedForm._raw(base, A)
    fB = MixedForm._raw(base, B)
    fC = MixedForm._raw(base, C)
    half = GaussianRational(1, 0) / 2
    # e_0 = (f+ - f-)/2, e_last = (f+ + f-)/2, e_0 ^ e_last = -(1/2) f- ^ f+
    plus = (fA + fB).scale(half)
    minus = (fB - fA).scale(half)
    mp = fC.scale(-half)
    zero = MixedForm._raw(base, D)
    if convention == "g":
        minus = minus.scale(2)
        mp = mp.scale(2)
    elif convention != "f":
        raise ValueError("convention must be 'f' or 'g'")
    return TractorDecomp(plus, zero, mp, minus, convention)


def embed(a: MixedForm, tsig: Signature) -> MixedForm:
    """Base form viewed on the tractor space (indices shifted by one)."""
    return a.shift(tsig, 1)


def assemble(d: TractorDecomp, tsig: Signature) -> MixedForm:
    fp, fm = _null_pair(tsig, d.convention)
    P = MixedForm.flat(tsig, fp)
    M = MixedForm.flat(tsig, fm)
    return (wedge(P, embed(d.plus, tsig)) + embed(d.zero, tsig)
            + wedge(wedge(M, P), embed(d.mp, tsig)) + wedge(M, embed(d.minus, tsig)))
