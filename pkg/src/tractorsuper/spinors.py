"""Spinor modules: invariant inner product, squaring maps, Clifford kernels,
the splitting of tractor spinors over the base, and real structures."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from typing import Optional, Sequence

from .clifford import CliffordRep, Signature, build_rep, vector_matrix
from .exactla import (I, ONE, ZERO, GaussianRational, Mat, conj_transpose, format_scalar,
                      independent_subset, intersect_kernels, inverse, kernel_basis, kron_all,
                      left_inverse, realify, vec)
from .forms import MixedForm, basis_indices, null_vectors


@dataclass(frozen=True)
class Spinor:
    """Coordinates plus a formal prefactor 2^(-half_powers/2)."""
    coords: Mat
    half_powers: int = 0

    def to_json(self) -> dict:
        return {"coords": [format_scalar(z) for z in self.coords.entries],
                "prefactor_exp": format_scalar(Fraction(-self.half_powers, 2))}


# ------------------------------------------------------------ inner product


@dataclass(frozen=True, eq=False)
class InnerProduct:
    """<u, v> = v^dagger gram u (linear in u, conjugate-linear in v)."""
    rep: CliffordRep
    gram: Mat
    c_p: GaussianRational

    def pair(self, u: Mat, v: Mat) -> GaussianRational:
        return (conj_transpose(v) @ (self.gram @ u))[0, 0]

    def pair_matrix(self, vectors: Sequence[Mat]) -> Mat:
        """Gram matrix G_ab = <v_b, v_a>, i.e. V^dagger gram V."""
        V = Mat.hstack(list(vectors))
        return conj_transpose(V) @ self.gram @ V

    @property
    def parity(self) -> int:
        return self.rep.sig.p % 2


def _is_hermitian(m: Mat) -> bool:
    return conj_transpose(m) == m


def _is_antihermitian(m: Mat) -> bool:
    return conj_transpose(m) == -m


def invariance_holds(ip: InnerProduct) -> bool:
    sgn = -1 if ip.rep.sig.p % 2 else 1
    g = ip.gram
    for X in ip.rep.gammas:
        lhs = g @ X
        rhs = conj_transpose(X) @ g
        if lhs != (rhs if sgn == -1 else -rhs):
            return False
    return True


@lru_cache(maxsize=None)
def build_inner_product(rep: CliffordRep) -> InnerProduct:
    p = rep.sig.p
    base = rep.product(tuple(range(p)))
    for c in (ONE, I):
        g = base.scale(c)
        if _is_hermitian(g):
            ip = InnerProduct(rep, g, c)
            if not invariance_holds(ip):
                raise ArithmeticError(f"spinor inner product on {rep.sig} is not invariant")
            return ip
    raise ArithmeticError(f"no Hermitian choice of the spinor inner product on {rep.sig}")


# ------------------------------------------------------------ u-tilde basis


def u_tilde(rep: CliffordRep, signs: Sequence[int]) -> Spinor:
    """u(eps_m, ..., eps_1) = u(eps_m) x ... x u(eps_1), u(eps) = (1, -i eps)/sqrt(2)."""
    if rep.n % 2:
        raise ValueError("u-tilde basis needs even dimension")
    m = rep.n // 2
    if len(signs) != m:
        raise ValueError(f"need {m} signs")
    factors = [vec([1, GaussianRational(0, -s)]) for s in signs]
    return Spinor(kron_all(factors), m)


def u_basis(rep: CliffordRep) -> dict:
    m = rep.n // 2
    if rep.n % 2:
        raise ValueError("u-tilde basis needs even dimension")
    return {s: u_tilde(rep, s) for s in iproduct((1, -1), repeat=m)}


def u_plus(rep: CliffordRep) -> Mat:
    return u_tilde(rep, (1,) * (rep.n // 2)).coords


def u_minus(rep: CliffordRep) -> Mat:
    return u_tilde(rep, (-1,) * (rep.n // 2)).coords


def normalized_pair(ip: InnerProduct, a: Spinor, b: Spinor) -> GaussianRational:
    """<a, b> with the formal prefactors multiplied back in (rational for even totals)."""
    total = a.half_powers + b.half_powers
    if total % 2:
        raise ValueError("odd total prefactor is irrational")
    return ip.pair(a.coords, b.coords) * Fraction(1, 2 ** (total // 2))


# ------------------------------------------------------------ squaring maps


@dataclass(frozen=True)
class SquaringProfile:
    k: int
    selector: str  # "re" or "im"
    nontrivial: bool


def _select(z: GaussianRational, selector: str) -> Fraction:
    return z.re if selector == "re" else z.im


@lru_cache(maxsize=None)
def _grade_hermiticity(rep: CliffordRep, k: int) -> str:
    ip = build_inner_product(rep)
    kinds = set()
    for idx in basis_indices(rep.n, k):
        h = ip.gram @ rep.product(idx)
        if _is_hermitian(h):
            kinds.add("re")
        elif _is_antihermitian(h):
            kinds.add("im")
        else:
            kinds.add("mixed")
        if len(kinds) > 1 or "mixed" in kinds:
            raise ArithmeticError(f"grade {k} probe values are neither all real nor all imaginary")
    return kinds.pop() if kinds else "re"


def determine_profile(rep: CliffordRep, k: int, real_basis: Optional[Sequence[Mat]] = None) -> SquaringProfile:
    """Selector making alpha^k real; nontrivial flag measured on the given real basis
    (default: the complex module viewed as a real space)."""
    sel = _grade_hermiticity(rep, k)
    if k < 0 or k > rep.n:
        return SquaringProfile(k, sel, False)
    basis = list(real_basis) if real_basis is not None else _complex_as_real(rep.dim)
    ip = build_inner_product(rep)
    nontrivial = False
    for idx in basis_indices(rep.n, k):
        M = ip.gram @ rep.product(idx)
        # quadratic form x -> d(<e_I psi, psi>) on real coordinates, symmetrized
        for a in range(len(basis)):
            Ma = M @ basis[a]
            for b in range(a, len(basis)):
                v = _select((conj_transpose(basis[b]) @ Ma)[0, 0], sel)
                if a != b:
                    w = _select((conj_transpose(basis[a]) @ (M @ basis[b]))[0, 0], sel)
                    v = v + w
                if v != 0:
                    nontrivial = True
                    break
            if nontrivial:
                break
        if nontrivial:
            break
    return SquaringProfile(k, sel, nontrivial)


def _complex_as_real(dim: int) -> list:
    out = []
    for j in range(dim):
        e = [0] * dim
        e[j] = 1
        out.append(vec(e))
        e = [0] * dim
        e[j] = I
        out.append(vec(e))
    return out


def squaring(rep: CliffordRep, chi1: Mat, chi2: Mat, k: int, profile: Optional[SquaringProfile] = None) -> MixedForm:
    """alpha^k_{chi1,chi2} = sum_I eps_I d(<e_I chi1, chi2>) e_I^flat."""
    sel = _grade_hermiticity(rep, k)
    if profile is not None:
        if profile.k != k or profile.selector != sel:
            raise ValueError("squaring profile does not match this grade")
    ip = build_inner_product(rep)
    w = conj_transpose(ip.gram @ chi2)  # row vector: <x, chi2> = w x
    signs = rep.sig.signs
    out = {}
    for idx in basis_indices(rep.n, k):
        z = (w @ (rep.product(idx) @ chi1))[0, 0]
        c = _select(z, sel)
        if c:
            s = 1
            for i in idx:
                s *= signs[i]
            out[idx] = GaussianRational(c * s)
    return MixedForm(rep.sig, out)


def squaring_all(rep: CliffordRep, chi1: Mat, chi2: Mat, grades: Sequence[int]) -> MixedForm:
    out = MixedForm.zero(rep.sig)
    for k in grades:
        out = out + squaring(rep, chi1, chi2, k)
    return out


def clifford_kernel(rep: CliffordRep, chi: Mat) -> list:
    """Basis of the real vectors v with v . chi = 0 (coefficient vectors of length n)."""
    cols = [g @ chi for g in rep.gammas]
    return kernel_basis(realify(Mat.hstack(cols)))


def dirac_current(rep: CliffordRep, chi1: Mat, chi2: Optional[Mat] = None) -> list:
    """Vector dual to alpha^1_{chi1,chi2} (coefficients on e_i)."""
    a = squaring(rep, chi1, chi1 if chi2 is None else chi2, 1)
    return [a.coeff((i,)) for i in range(rep.n)]


# -------------------------------------------------- splitting over the base


@dataclass(frozen=True, eq=False)
class Splitting:
    """Pi: tractor spinors -> base spinors (+) base spinors."""
    tractor: CliffordRep
    base: CliffordRep
    chi: Mat        # dim_base x dim_tractor, exact on Ann(minus)
    pi: Mat         # (2 dim_base) x dim_tractor
    pi_inv: Mat
    chi_sign: int   # base generator B_i corresponds to chi_sign * B_i


@lru_cache(maxsize=None)
def splitting(tsig: Signature) -> Splitting:
    """Decomposition of tractor spinors along the lightlike pair g+ = e_last + e_0,
    g- = (e_last - e_0)/2.  Pi(v) = (chi(g- v), chi(-1/2 g- g+ v))."""
    trep = build_rep(tsig)
    bsig = tsig.base()
    brep = build_rep(bsig)
    gp, gm = null_vectors(tsig, "g")
    Gp = vector_matrix(trep, gp)
    Gm = vector_matrix(trep, gm)
    K = Mat.hstack(kernel_basis(Gm))
    L = left_inverse(K)
    d = K.cols
    db = brep.dim
    if d != db:
        raise ArithmeticError("annihilator dimension does not match the base module")
    R = [L @ trep.gammas[i + 1] @ K for i in range(bsig.n)]
    chi_small = None
    used = 1
    for s in (1, -1):
        # X R_i = s B_i X, row-major vec: (I (x) R_i^T - s B_i (x) I) vec(X) = 0
        eqs = [Mat.identity(db).kron(Ri.transpose()) - brep.gammas[i].scale(s).kron(Mat.identity(d))
               for i, Ri in enumerate(R)]
        ker = intersect_kernels(eqs, db * d)
        if ker:
            chi_small = Mat(db, d, ker[0].entries)
            used = s
            break
    if chi_small is None:
        raise ArithmeticError("no Clifford intertwiner from the annihilator to the base module")
    chi = chi_small @ L
    top = chi @ Gm
    bottom = chi @ Gm @ Gp.scale(GaussianRational(-1, 0) / 2)
    pi = Mat.vstack([top, bottom])
    return Splitting(trep, brep, chi, pi, inverse(pi), used)


def pi_decompose(tsig: Signature, psi: Mat):
    sp = splitting(tsig)
    v = sp.pi @ psi
    db = sp.base.dim
    return v.select_rows(range(db)), v.select_rows(range(db, 2 * db))


def pi_assemble(tsig: Signature, first: Mat, second: Mat) -> Mat:
    sp = splitting(tsig)
    return sp.pi_inv @ Mat.vstack([first, second])


# ------------------------------------------------------------ real structure


@dataclass(frozen=True, eq=False)
class RealStructure:
    """Antilinear involution v -> conj_matrix . conj(v) commuting with Clifford action."""
    rep: CliffordRep
    conj_matrix: Mat

    def apply(self, v: Mat) -> Mat:
        return self.conj_matrix @ v.conj()

    def fixed_basis(self) -> list:
        """Real basis of the fixed set {v : J v = v}."""
        dim = self.rep.dim
        cands = []
        for j in range(dim):
            for z in (ONE, I):
                e = [ZERO] * dim
                e[j] = z
                v = vec(e)
                cands.append(v + self.apply(v))
        return real_independent(cands)


def real_independent(vectors: Sequence[Mat]) -> list:
    """Subset of vectors independent over R (greedy in order)."""
    if not vectors:
        return []
    realified = []
    for v in vectors:
        ents = v.entries
        realified.append(vec([z.re for z in ents] + [z.im for z in ents]))
    idx = independent_subset(realified)
    return [vectors[i] for i in idx]


def _rational_sqrt(x: Fraction) -> Optional[Fraction]:
    from math import isqrt
    if x < 0:
        return None
    a, b = x.numerator, x.denominator
    ra, rb = isqrt(a), isqrt(b)
    if ra * ra == a and rb * rb == b:
        return Fraction(ra, rb)
    return None


def _unit_scale(r: Fraction) -> Optional[GaussianRational]:
    """Some lambda in Q(i) with |lambda|^2 = r, searched over small numerators."""
    s = _rational_sqrt(r)
    if s is not None:
        return GaussianRational(s)
    h = _rational_sqrt(r / 2)
    if h is not None:
        return GaussianRational(h, h)
    for den in range(1, 13):
        for a in range(0, 25):
            rest = r * den * den - a * a
            if rest <= 0:
                continue
            b = _rational_sqrt(rest)
            if b is not None:
                return GaussianRational(Fraction(a, den), b / den)
    return None


@lru_cache(maxsize=None)
def real_structure(rep: CliffordRep) -> Optional[RealStructure]:
    d = rep.dim
    eye = Mat.identity(d)
    # C conj(Phi_i) - Phi_i C = 0, row-major vec(A X B) = (A (x) B^T) vec(X)
    eqs = [eye.kron(g.conj().transpose()) - g.kron(eye) for g in rep.gammas]
    ker = intersect_kernels(eqs, d * d)
    if len(ker) != 1:
        return None
    C0 = Mat(d, d, ker[0].entries)
    sq = C0 @ C0.conj()
    mu = sq[0, 0]
    if sq != eye.scale(mu) or not mu.is_real() or mu.re <= 0:
        return None
    lam = _unit_scale(1 / mu.re)
    if lam is None:
        return None
    C = C0.scale(lam)
    if C @ C.conj() != eye:
        return None
    return RealStructure(rep, C)
