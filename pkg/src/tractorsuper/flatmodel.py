"""Polynomial field calculus on flat R^{p,q} and its tractor counterpart.

Fields are sparse polynomials in the coordinates x_0..x_{n-1} whose
coefficients live in one of the exact vector types of the package
(scalars, column vectors, forms, spinors).  The flat tractor connection is
d + N_X where N_X is induced by the nilpotent endomorphism
A_X v = <v, g+> X - <X, v> g+ of the tractor space, so parallel tractor
objects are exp(-N_x) applied to their value at the origin.  The metric side
(exterior calculus, Dirac operator, Lie derivatives, circ products) never
looks at that construction; the correspondence checks compare the two.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

from .clifford import CliffordRep, Signature, build_rep, form_matrix
from .exactla import ZERO, GaussianRational, Mat, gr, solve, vec
from .forms import (MixedForm, SkewEndo, TractorDecomp, assemble, basis_indices, clifford_product,
                    decompose, derivation_matrix, from_coords, interior, null_vectors, spin_lift,
                    tau, tau_inv, wedge)
from .spinors import splitting, squaring

MAX_DEGREE = 4


class DegreeError(ValueError):
    pass


def _is_zero(v) -> bool:
    return v.is_zero()


def _scale(v, c):
    if isinstance(v, GaussianRational):
        return v * gr(c)
    return v.scale(c)


def _monomial_str(m: tuple) -> str:
    parts = []
    for i, e in enumerate(m):
        if e == 1:
            parts.append(f"x{i}")
        elif e:
            parts.append(f"x{i}^{e}")
    return "*".join(parts) or "1"


class PolyField:
    """Sparse map monomial exponent tuple -> coefficient (no zero coefficients stored)."""

    __slots__ = ("nvars", "terms", "zero")

    def __init__(self, nvars: int, terms: Optional[dict] = None, zero=ZERO):
        self.nvars = nvars
        self.zero = zero
        t = {}
        for m, v in (terms or {}).items():
            m = tuple(m)
            if len(m) != nvars:
                raise ValueError(f"monomial {m} in {nvars} variables")
            if sum(m) > MAX_DEGREE:
                raise DegreeError(f"polynomial degree {sum(m)} exceeds the cap {MAX_DEGREE}")
            if not _is_zero(v):
                t[m] = v
        self.terms = t

    def _new(self, terms: dict, zero=None):
        return type(self)(self.nvars, terms, self.zero if zero is None else zero)

    @classmethod
    def constant(cls, nvars: int, value, zero=None):
        z = zero if zero is not None else _zero_like(value)
        return cls(nvars, {(0,) * nvars: value}, z)

    def __add__(self, o):
        self._check(o)
        t = dict(self.terms)
        for m, v in o.terms.items():
            t[m] = t[m] + v if m in t else v
        return self._new(t)

    def __sub__(self, o):
        return self + (-o)

    def __neg__(self):
        return self._new({m: _scale(v, -1) for m, v in self.terms.items()})

    def scale(self, c):
        return self._new({m: _scale(v, c) for m, v in self.terms.items()})

    def _check(self, o):
        if not isinstance(o, PolyField) or o.nvars != self.nvars:
            raise ValueError("fields live on different coordinate spaces")

    def derivative(self, i: int):
        t = {}
        for m, v in self.terms.items():
            e = m[i]
            if e:
                key = m[:i] + (e - 1,) + m[i + 1:]
                w = _scale(v, e)
                t[key] = t[key] + w if key in t else w
        return self._new(t)

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def at_origin(self):
        return self.terms.get((0,) * self.nvars, self.zero)

    def map(self, f: Callable, zero=None, cls=None):
        cls = cls or type(self)
        z = self.zero if zero is None else zero
        t = {}
        for m, v in self.terms.items():
            t[m] = f(v)
        return cls(self.nvars, t, z)

    def __eq__(self, o):
        return isinstance(o, PolyField) and self.nvars == o.nvars and self.terms == o.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms)))

    def first_difference(self, o) -> Optional[str]:
        """Lowest monomial (in sorted order) where the two fields differ."""
        for m in sorted(set(self.terms) | set(o.terms)):
            a = self.terms.get(m)
            b = o.terms.get(m)
            if a is None or b is None or a != b:
                return _monomial_str(m)
        return None

    def __repr__(self):
        body = " + ".join(f"({v!r})*{_monomial_str(m)}" for m, v in sorted(self.terms.items()))
        return f"{type(self).__name__}({body or '0'})"


class PolyScalar(PolyField):
    def __mul__(self, o):
        if isinstance(o, PolyScalar):
            return bilinear(self, o, lambda a, b: a * b, PolyScalar, ZERO)
        return times(self, o)


class PolyVField(PolyField):
    """Vector field; coefficients are n x 1 column vectors of components on e_i."""

    def components(self) -> list:
        n = self.zero.rows
        return [self.map(lambda v, i=i: v[i, 0], zero=ZERO, cls=PolyScalar) for i in range(n)]

    @staticmethod
    def from_components(comps: Sequence[PolyScalar]) -> "PolyVField":
        n = len(comps)
        nv = comps[0].nvars
        out = PolyVField(nv, {}, Mat.zeros(n, 1))
        for i, c in enumerate(comps):
            unit = vec([1 if j == i else 0 for j in range(n)])
            out = out + c.map(lambda z, u=unit: u.scale(z), zero=out.zero, cls=PolyVField)
        return out


class PolyKForm(PolyField):
    @property
    def sig(self) -> Signature:
        return self.zero.sig

    def grades(self) -> list:
        gs = set()
        for v in self.terms.values():
            gs.update(v.grades())
        return sorted(gs)

    def part(self, k: int) -> "PolyKForm":
        return self.map(lambda v: v.part(k))


class PolySpinorField(PolyField):
    pass


def _zero_like(value):
    if isinstance(value, MixedForm):
        return MixedForm.zero(value.sig)
    if isinstance(value, Mat):
        return Mat.zeros(value.rows, value.cols)
    return ZERO


def bilinear(a: PolyField, b: PolyField, op: Callable, cls, zero) -> PolyField:
    """Pointwise bilinear operation on two fields."""
    a._check(b)
    if a.terms and b.terms:
        if a.degree + b.degree > MAX_DEGREE:
            raise DegreeError(f"product degree {a.degree + b.degree} exceeds the cap {MAX_DEGREE}")
    t: dict = {}
    for ma, va in a.terms.items():
        for mb, vb in b.terms.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            w = op(va, vb)
            t[m] = t[m] + w if m in t else w
    return cls(a.nvars, t, zero)


def times(f: PolyScalar, g: PolyField) -> PolyField:
    """Scalar polynomial times a field of any type."""
    return bilinear(f, g, lambda c, v: _scale(v, c), type(g), g.zero)


def coordinate(n: int, i: int) -> PolyScalar:
    m = [0] * n
    m[i] = 1
    return PolyScalar(n, {tuple(m): GaussianRational(1)})


def constant_scalar(n: int, c) -> PolyScalar:
    return PolyScalar.constant(n, gr(c), ZERO)


def constant_form(a: MixedForm) -> PolyKForm:
    return PolyKForm.constant(a.sig.n, a, MixedForm.zero(a.sig))


def spinor_constant(n: int, s: Mat) -> PolySpinorField:
    return PolySpinorField.constant(n, s, Mat.zeros(s.rows, 1))


def _unit(n: int, i: int) -> list:
    return [1 if j == i else 0 for j in range(n)]


# ------------------------------------------------------------ vector fields


def flat_field(V: PolyVField, sig: Signature) -> PolyKForm:
    return V.map(lambda v: MixedForm.flat(sig, list(v.entries)), zero=MixedForm.zero(sig), cls=PolyKForm)


def sharp_field(a: PolyKForm) -> PolyVField:
    sig = a.sig
    if a.grades() not in ([], [1]):
        raise ValueError("only 1-forms have a dual vector field")
    n = sig.n
    return a.map(lambda f: vec([f.coeff((i,)) for i in range(n)]), zero=Mat.zeros(n, 1), cls=PolyVField)


def minkowski_generators(sig: Signature) -> dict:
    """Translations, rotations, dilation and special conformal fields (1-based names)."""
    n = sig.n
    x = [coordinate(n, i) for i in range(n)]
    zero = constant_scalar(n, 0)
    one = constant_scalar(n, 1)
    low = [x[i].scale(sig.eps(i)) for i in range(n)]
    gxx = zero
    for i in range(n):
        gxx = gxx + (x[i] * x[i]).scale(sig.eps(i))
    out = {}
    for i in range(n):
        out[f"P{i + 1}"] = PolyVField.from_components([one if j == i else zero for j in range(n)])
    for i in range(n):
        for j in range(i + 1, n):
            comps = [zero] * n
            comps[j] = comps[j] + low[i]
            comps[i] = comps[i] - low[j]
            out[f"M{i + 1}{j + 1}"] = PolyVField.from_components(comps)
    out["D"] = PolyVField.from_components(list(x))
    for i in range(n):
        comps = [(low[i] * x[j]).scale(2) for j in range(n)]
        comps[i] = comps[i] - gxx
        out[f"K{i + 1}"] = PolyVField.from_components(comps)
    return out


def vf_bracket(V: PolyVField, W: PolyVField) -> PolyVField:
    Vc = V.components()
    Wc = W.components()
    n = len(Vc)
    out = []
    for j in range(n):
        acc = constant_scalar(V.nvars, 0)
        for i in range(n):
            acc = acc + Vc[i] * Wc[j].derivative(i) - Wc[i] * Vc[j].derivative(i)
        out.append(acc)
    return PolyVField.from_components(out)


def conformal_factor(V: PolyVField, sig: Signature) -> PolyScalar:
    """lambda with L_V g = 2 lambda g; ValueError if V is not conformal."""
    c = V.components()
    n = sig.n
    lam = c[0].derivative(0)
    for i in range(n):
        for j in range(i, n):
            # (L_V g)(e_i, e_j) = eps_j d_i V_j + eps_i d_j V_i
            lg = c[j].derivative(i).scale(sig.eps(j)) + c[i].derivative(j).scale(sig.eps(i))
            want = lam.scale(2 * sig.eps(i)) if i == j else constant_scalar(V.nvars, 0)
            if lg != want:
                raise ValueError("vector field is not conformal")
    return lam


def is_conformal(V: PolyVField, sig: Signature) -> bool:
    try:
        conformal_factor(V, sig)
    except ValueError:
        return False
    return True


# ------------------------------------------------------- exterior calculus


def ext_d(a: PolyKForm) -> PolyKForm:
    """d = sum_i eps_i e_i^flat ^ d_i (coordinate 1-form dx^i = eps_i e_i^flat)."""
    sig = a.sig
    out = a._new({})
    for i in range(sig.n):
        e = MixedForm.blade(sig, (i,), sig.eps(i))
        out = out + a.derivative(i).map(lambda f, e=e: wedge(e, f))
    return out


def codiff(a: PolyKForm) -> PolyKForm:
    """d* = -sum_i eps_i e_i _| d_i."""
    sig = a.sig
    out = a._new({})
    for i in range(sig.n):
        u = _unit(sig.n, i)
        out = out + a.derivative(i).map(lambda f, u=u, s=-sig.eps(i): interior(u, f).scale(s))
    return out


def form_product(a: PolyKForm, b: PolyKForm) -> PolyKForm:
    """Pointwise Clifford product of form fields."""
    return bilinear(a, b, clifford_product, PolyKForm, a.zero)


def field_interior(V: PolyVField, a: PolyKForm) -> PolyKForm:
    sig = a.sig
    out = a._new({})
    for i, c in enumerate(V.components()):
        if c.is_zero():
            continue
        u = _unit(sig.n, i)
        out = out + times(c, a.map(lambda f, u=u: interior(u, f)))
    return out


def laplace_rough(a: PolyKForm) -> PolyKForm:
    """nabla^* nabla = -sum_i eps_i d_i d_i on the flat space."""
    sig = a.sig
    out = a._new({})
    for i in range(sig.n):
        out = out + a.derivative(i).derivative(i).scale(-sig.eps(i))
    return out


def box_operator(a: PolyKForm, k: int) -> PolyKForm:
    """Flat-space value of the operator giving the last slot of a parallel tractor form."""
    n = a.sig.n
    if n != 2 * k:
        return laplace_rough(a).scale(Fraction(1, n - 2 * k))
    return (codiff(ext_d(a)) + ext_d(codiff(a))).scale(Fraction(1, n * (k + 1)))


# ---------------------------------------------------------------- spinors


def position_action(rep: CliffordRep, s: Mat) -> PolySpinorField:
    """x . s for a constant spinor s."""
    n = rep.n
    out = PolySpinorField(n, {}, Mat.zeros(rep.dim, 1))
    for i in range(n):
        out = out + times(coordinate(n, i), spinor_constant(n, rep.gammas[i] @ s))
    return out


def twistor_field(rep: CliffordRep, phi0: Mat, phi1: Mat) -> PolySpinorField:
    """phi(x) = phi0 - (1/n) x . phi1."""
    n = rep.n
    return spinor_constant(n, phi0) - position_action(rep, phi1).scale(Fraction(1, n))


def dirac(rep: CliffordRep, phi: PolySpinorField) -> PolySpinorField:
    """D phi = sum_i eps_i e_i . d_i phi."""
    sig = rep.sig
    out = phi._new({})
    for i in range(sig.n):
        G = rep.gammas[i].scale(sig.eps(i))
        out = out + phi.derivative(i).map(lambda s, G=G: G @ s)
    return out


def twistor_check(rep: CliffordRep, phi: PolySpinorField) -> bool:
    n = rep.n
    D = dirac(rep, phi)
    third = Fraction(1, n)
    for i in range(n):
        G = rep.gammas[i]
        lhs = phi.derivative(i) + D.map(lambda s, G=G: (G @ s).scale(third))
        if not lhs.is_zero():
            return False
    return True


def form_on_spinor(rep: CliffordRep, a: PolyKForm, phi: PolySpinorField) -> PolySpinorField:
    cache: dict = {}

    def op(f, s):
        M = cache.get(f)
        if M is None:
            M = cache[f] = form_matrix(rep, f)
        return M @ s

    return bilinear(a, phi, op, PolySpinorField, phi.zero)


def spin_lie_derivative(rep: CliffordRep, V: PolyVField, phi: PolySpinorField) -> PolySpinorField:
    """V o phi = nabla_V phi + 1/4 tau(nabla V) . phi."""
    sig = rep.sig
    n = sig.n
    lam = conformal_factor(V, sig)
    comps = V.components()
    grad = phi._new({})
    for i, c in enumerate(comps):
        if not c.is_zero():
            grad = grad + times(c, phi.derivative(i))
    tnv = times(lam.scale(n - 2), constant_form(MixedForm.scalar(sig, 1)))
    flatV = flat_field(V, sig)
    for j in range(n):
        sj = MixedForm.blade(sig, (j,), sig.eps(j))
        tnv = tnv + flatV.derivative(j).map(lambda f, sj=sj: clifford_product(f, sj))
    return grad + form_on_spinor(rep, tnv, phi).scale(Fraction(1, 4))


# ------------------------------------------------------ nc-Killing system


def nc_killing_system(a: PolyKForm, k: Optional[int] = None):
    """(a+, a0, a-+, a-) if a solves the flat parallel system with some constant a-, else None."""
    sig = a.sig
    n = sig.n
    gs = a.grades()
    if k is None:
        if len(gs) > 1:
            raise ValueError("nc-Killing check needs a form of pure grade")
        k = gs[0] if gs else 0
    elif gs not in ([], [k]):
        raise ValueError(f"form of grades {gs} is not of grade {k}")
    if k > n:
        return None
    zero = a._new({})
    a0 = ext_d(a).scale(Fraction(1, k + 1))
    amp = codiff(a).scale(Fraction(-1, n - k + 1)) if k >= 1 else zero
    # unknown constant a- of grade k: rows (-e_i ^ c, e_i _| c) for every i
    keys = basis_indices(n, k)
    rows_hi = basis_indices(n, k + 1)
    rows_lo = basis_indices(n, k - 1) if k >= 1 else ()
    cols = []
    for key in keys:
        c = MixedForm.blade(sig, key)
        col = []
        for i in range(n):
            u = _unit(n, i)
            w = wedge(MixedForm.blade(sig, (i,)), c).scale(-1)
            col.extend(w.coeff(r) for r in rows_hi)
            t = interior(u, c)
            col.extend(t.coeff(r) for r in rows_lo)
        cols.append(col)
    rhs = []
    for i in range(n):
        d0 = a0.derivative(i)
        dm = amp.derivative(i)
        if not d0.is_constant() or not dm.is_constant():
            return None
        v0 = d0.at_origin()
        vm = dm.at_origin()
        rhs.extend(v0.coeff(r) for r in rows_hi)
        rhs.extend(vm.coeff(r) for r in rows_lo)
    if not keys:
        return None
    M = Mat(len(rhs), len(keys), [cols[c][r] for r in range(len(rhs)) for c in range(len(keys))])
    sol = solve(M, vec(rhs))
    if sol is None:
        return None
    am = constant_form(from_coords(sig, k, sol.entries))
    # first row: d_i a+ = e_i _| a0 + e_i^flat ^ a-+
    for i in range(n):
        u = _unit(n, i)
        e = MixedForm.blade(sig, (i,))
        rhs_i = a0.map(lambda f, u=u: interior(u, f)) + amp.map(lambda f, e=e: wedge(e, f))
        if a.derivative(i) != rhs_i:
            return None
    return a, a0, amp, am


def nc_killing_check(a: PolyKForm, k: Optional[int] = None) -> bool:
    return nc_killing_system(a, k) is not None


def nc_killing_check_mixed(a: PolyKForm) -> bool:
    """Gradewise check for mixed-degree forms."""
    return all(nc_killing_check(a.part(k), k) for k in a.grades())


def _integrate_gradient(grads: Sequence[PolyField], start):
    """F with d_i F = grads[i] and F(0) = start (radial homotopy); ValueError if not exact."""
    n = len(grads)
    total = PolyField.__new__(type(grads[0]))
    PolyField.__init__(total, n, {(0,) * n: start}, grads[0].zero)
    for i, g in enumerate(grads):
        t = {}
        for m, v in g.terms.items():
            key = m[:i] + (m[i] + 1,) + m[i + 1:]
            w = _scale(v, Fraction(1, sum(m) + 1))
            t[key] = w
        total = total + g._new(t)
    for i, g in enumerate(grads):
        if total.derivative(i) != g:
            raise ValueError("gradient data is not integrable")
    return total


def parallel_tractor_form_field(sig: Signature, initial: TractorDecomp):
    """Solve the flat parallel system for the quadruple (a+, a0, a-+, a-)."""
    n = sig.n
    if initial.convention != "g":
        raise ValueError("initial data must use the g-convention of the lightlike pair")
    am = constant_form(initial.minus)
    integrate = _integrate_gradient
    units = [_unit(n, i) for i in range(n)]
    blades = [MixedForm.blade(sig, (i,)) for i in range(n)]
    amp = integrate([am.map(lambda f, u=u: interior(u, f)) for u in units], initial.mp)
    a0 = integrate([am.map(lambda f, e=e: wedge(e, f)).scale(-1) for e in blades], initial.zero)
    ap = integrate([a0.map(lambda f, u=u: interior(u, f)) + amp.map(lambda f, e=e: wedge(e, f))
                    for u, e in zip(units, blades)], initial.plus)
    return ap, a0, amp, am


# -------------------------------------------------------- circ products


def _grade_of(a: PolyKForm) -> int:
    gs = a.grades()
    if len(gs) > 1:
        raise ValueError("expected a form of pure grade")
    return gs[0] if gs else 0


def _require_nc(a: PolyKForm, what: str):
    if not nc_killing_check(a):
        raise ValueError(f"{what} is not a nc-Killing form")


@dataclass(eq=False)
class NCForm:
    """A pure-grade form field with its exterior derivative and codifferential."""
    plus: PolyKForm
    k: int
    d: PolyKForm
    ds: PolyKForm

    @staticmethod
    def of(a: PolyKForm, k: Optional[int] = None) -> "NCForm":
        if k is None:
            k = _grade_of(a)
        return NCForm(a, k, ext_d(a), codiff(a))


def _circ_ff(a: NCForm, b: NCForm) -> PolyKForm:
    n = a.plus.sig.n
    k, l = a.k, b.k
    out = form_product(a.plus, b.d).scale(Fraction(1, l + 1))
    out = out + form_product(a.plus, b.ds).scale(Fraction(1, n - l + 1))
    out = out + form_product(a.d, b.plus).scale(Fraction((-1) ** (k + 1), k + 1))
    out = out + form_product(a.ds, b.plus).scale(Fraction((-1) ** k, n - k + 1))
    return out


def _circ_fs(rep: CliffordRep, a: NCForm, phi: PolySpinorField, dphi: PolySpinorField) -> PolySpinorField:
    n = rep.n
    k = a.k
    out = form_on_spinor(rep, a.plus, dphi).scale(Fraction(2, n))
    out = out + form_on_spinor(rep, a.ds, phi).scale(Fraction((-1) ** k, n - k + 1))
    out = out + form_on_spinor(rep, a.d, phi).scale(Fraction((-1) ** (k + 1), k + 1))
    return out


def circ_form_form(a: PolyKForm, b: PolyKForm, check: bool = True) -> PolyKForm:
    """a o b = 1/(l+1) a.db + 1/(n-l+1) a.d*b + (-1)^(k+1)/(k+1) da.b + (-1)^k/(n-k+1) d*a.b."""
    if check:
        _require_nc(a, "first factor")
        _require_nc(b, "second factor")
    return _circ_ff(NCForm.of(a), NCForm.of(b))


def circ_bracket_form_form(a: PolyKForm, b: PolyKForm, check: bool = True) -> PolyKForm:
    """Metric counterpart of the commutator bracket: a o b - b o a."""
    if check:
        _require_nc(a, "first factor")
        _require_nc(b, "second factor")
    A, B = NCForm.of(a), NCForm.of(b)
    return _circ_ff(A, B) - _circ_ff(B, A)


def circ_form_spinor(rep: CliffordRep, a: PolyKForm, phi: PolySpinorField, check: bool = True) -> PolySpinorField:
    """a o phi = 2/n a.D phi + (-1)^k/(n-k+1) d*a.phi + (-1)^(k+1)/(k+1) da.phi."""
    if check:
        _require_nc(a, "form")
        if not twistor_check(rep, phi):
            raise ValueError("spinor field is not a twistor spinor")
    return _circ_fs(rep, NCForm.of(a), phi, dirac(rep, phi))


def lie_derivative_form(V: PolyVField, b: PolyKForm, check: bool = True) -> PolyKForm:
    """L_V b - (k+1) lambda_V b with the Cartan formula for L_V."""
    sig = b.sig
    lam = conformal_factor(V, sig)
    if check:
        _require_nc(b, "form")
    k = _grade_of(b)
    L = ext_d(field_interior(V, b)) + field_interior(V, ext_d(b))
    return L - times(lam, b).scale(k + 1)


# ------------------------------------------------------ tractor side


class FlatModel:
    """Flat tractor bundle over R^{p,q} trivialized by the metric splitting."""

    def __init__(self, sig: Signature):
        self.sig = sig
        self.n = sig.n
        self.tsig = sig.tractor()
        self.trep = build_rep(self.tsig)
        self.split = splitting(self.tsig)
        base = self.split.base
        if self.split.chi_sign == 1:
            self.brep = base
        else:
            s = self.split.chi_sign
            self.brep = CliffordRep(base.sig, tuple(g.scale(s) for g in base.gammas), base.tau)
        self.gplus, self.gminus = null_vectors(self.tsig, "g")
        self.endos = [self._endo(i) for i in range(self.n)]
        self._deriv: dict = {}
        self._cache: dict = {}
        self.spin_gens = [spin_lift(A, self.trep) for A in self.endos]

    def _endo(self, i: int) -> SkewEndo:
        """A_X v = <v, g+> X - <X, v> g+ for X = e_i."""
        N = self.tsig.n
        eps = self.tsig.signs
        X = [0] * N
        X[i + 1] = 1
        gp = self.gplus
        rows = [[0] * N for _ in range(N)]
        for r in range(N):
            for c in range(N):
                rows[r][c] = eps[c] * gp[c] * X[r] - eps[c] * X[c] * gp[r]
        return SkewEndo(self.tsig, Mat.from_rows(rows))

    def _derivation(self, i: int, k: int) -> Mat:
        key = (i, k)
        M = self._deriv.get(key)
        if M is None:
            M = self._deriv[key] = derivation_matrix(self.endos[i], k)
        return M

    def connection_form(self, i: int, a: MixedForm) -> MixedForm:
        out = MixedForm.zero(self.tsig)
        for k in a.grades():
            v = self._derivation(i, k) @ vec(a.coords(k))
            out = out + from_coords(self.tsig, k, v.entries)
        return out

    def parallel_form(self, a0: MixedForm) -> PolyKForm:
        """exp(-N_x) a0 as a polynomial field of tractor forms."""
        return self._exp(a0, self.connection_form, PolyKForm, MixedForm.zero(self.tsig))

    def parallel_spinor(self, psi0: Mat) -> PolySpinorField:
        return self._exp(psi0, lambda i, s: self.spin_gens[i] @ s, PolySpinorField,
                         Mat.zeros(self.trep.dim, 1))

    def _exp(self, v0, act, cls, zero):
        n = self.n
        term = cls(n, {(0,) * n: v0}, zero)
        total = term
        m = 0
        while not term.is_zero():
            m += 1
            if m > MAX_DEGREE:
                raise DegreeError("connection is not nilpotent within the degree cap")
            nxt = cls(n, {}, zero)
            for i in range(n):
                shifted = {}
                for mono, v in term.terms.items():
                    w = act(i, v)
                    if not _is_zero(w):
                        key = mono[:i] + (mono[i] + 1,) + mono[i + 1:]
                        shifted[key] = shifted[key] + w if key in shifted else w
                nxt = nxt + cls(n, shifted, zero)
            term = nxt.scale(Fraction(-1, m))
            total = total + term
        return total

    def covariant_derivative_form(self, a: PolyKForm, i: int) -> PolyKForm:
        return a.derivative(i) + a.map(lambda f: self.connection_form(i, f))

    def covariant_derivative_spinor(self, s: PolySpinorField, i: int) -> PolySpinorField:
        G = self.spin_gens[i]
        return s.derivative(i) + s.map(lambda v: G @ v)

    def split_form(self, a: PolyKForm):
        """(a+, a0, a-+, a-) in the g-convention, each a field of base forms."""
        bz = MixedForm.zero(self.sig)
        parts = ({}, {}, {}, {})
        for m, v in a.terms.items():
            d = decompose(v, "g")
            for slot, w in zip(parts, (d.plus, d.zero, d.mp, d.minus)):
                if not w.is_zero():
                    slot[m] = _rebase(w, self.sig)
        return tuple(PolyKForm(self.n, t, bz) for t in parts)

    def split_spinor(self, s: PolySpinorField):
        """(phi, phi') with Pi; phi is the twistor spinor slot."""
        db = self.split.base.dim
        z = Mat.zeros(db, 1)
        first, second = {}, {}
        for m, v in s.terms.items():
            w = self.split.pi @ v
            first[m] = w.select_rows(range(db))
            second[m] = w.select_rows(range(db, 2 * db))
        return PolySpinorField(self.n, first, z), PolySpinorField(self.n, second, z)

    def assemble_initial(self, d: TractorDecomp) -> MixedForm:
        return assemble(d, self.tsig)

    def form_basis(self, grades: Sequence[int]) -> list:
        out = []
        for k in grades:
            for key in basis_indices(self.tsig.n, k):
                out.append(MixedForm.blade(self.tsig, key))
        return out

    def spinor_basis(self) -> list:
        d = self.trep.dim
        return [vec(_unit(d, j)) for j in range(d)]


def _rebase(a: MixedForm, sig: Signature) -> MixedForm:
    if a.sig == sig:
        return a
    return MixedForm(sig, a.components)


@lru_cache(maxsize=None)
def flat_model(sig: Signature) -> FlatModel:
    return FlatModel(sig)


# ------------------------------------------------- correspondence checks


@dataclass
class IdentityResult:
    name: str
    inputs: str
    ok: bool
    first_failure: Optional[str] = None

    def to_json(self) -> dict:
        d = {"identity": self.name, "inputs": self.inputs, "pass": self.ok}
        if self.first_failure is not None:
            d["first_failing_monomial"] = self.first_failure
        return d


def _compare(name: str, inputs: str, lhs: PolyField, rhs: PolyField) -> IdentityResult:
    diff = lhs.first_difference(rhs)
    return IdentityResult(name, inputs, diff is None, diff)


def _label_form(a: MixedForm) -> str:
    return "+".join(f"e{''.join(str(i) for i in k)}" for k, _ in sorted(a.items())) or "0"


def _label_spinor(s: Mat) -> str:
    return "psi[" + ",".join(str(i) for i, z in enumerate(s.entries) if z) + "]"


def _tractor_commutator(a: MixedForm, b: MixedForm) -> MixedForm:
    return clifford_product(a, b) - clifford_product(b, a)


def _endo_bracket(a: MixedForm, b: MixedForm) -> MixedForm:
    return tau_inv(tau(a).bracket(tau(b)))


@dataclass(eq=False)
class ParallelFormData:
    value: MixedForm
    field: PolyKForm
    parts: tuple
    nc: NCForm
    V: Optional[PolyVField]


@dataclass(eq=False)
class ParallelSpinorData:
    value: Mat
    field: PolySpinorField
    phi: PolySpinorField
    dphi: PolySpinorField


def _form_data(model: FlatModel, a0: MixedForm) -> ParallelFormData:
    hit = model._cache.get(("f", a0))
    if hit is None:
        A = model.parallel_form(a0)
        parts = model.split_form(A)
        k = a0.grade() - 1
        plus = parts[0].part(k)
        V = sharp_field(plus) if k == 1 else None
        hit = model._cache[("f", a0)] = ParallelFormData(a0, A, parts, NCForm.of(plus, k), V)
    return hit


def _spinor_data(model: FlatModel, psi0: Mat) -> ParallelSpinorData:
    key = ("s", psi0)
    hit = model._cache.get(key)
    if hit is None:
        S = model.parallel_spinor(psi0)
        phi = model.split_spinor(S)[0]
        hit = model._cache[key] = ParallelSpinorData(psi0, S, phi, dirac(model.brep, phi))
    return hit


def check_cof(model: FlatModel, a0: MixedForm, b0: MixedForm) -> IdentityResult:
    """V of the endomorphism bracket equals [V_b, V_a]."""
    A = _form_data(model, a0)
    B = _form_data(model, b0)
    up = bilinear(A.field, B.field, _endo_bracket, PolyKForm, A.field.zero)
    lhs = sharp_field(model.split_form(up)[0])
    return _compare("cof", f"{_label_form(a0)},{_label_form(b0)}", lhs, vf_bracket(B.V, A.V))


def _up_spinor(model: FlatModel, A: ParallelFormData, S: ParallelSpinorData) -> PolySpinorField:
    return model.split_spinor(form_on_spinor(model.trep, A.field, S.field))[0]


def check_lsd(model: FlatModel, a0: MixedForm, psi0: Mat, outputs: Optional[list] = None) -> list:
    """First slot of alpha.psi equals -2 V o phi; the bracket (half of it) gives -V o phi."""
    A = _form_data(model, a0)
    S = _spinor_data(model, psi0)
    up = _up_spinor(model, A, S)
    rhs = spin_lie_derivative(model.brep, A.V, S.phi)
    if outputs is not None:
        outputs.append(rhs)
    label = f"{_label_form(a0)},{_label_spinor(psi0)}"
    return [_compare("lsd", label, up, rhs.scale(-2)),
            _compare("sld", label, up.scale(Fraction(1, 2)), -rhs)]


def check_cne(model: FlatModel, a0: MixedForm, b0: MixedForm, outputs: Optional[list] = None) -> list:
    """(a.b)_+ and ([a, b])_+ against the circ product and its commutator."""
    A = _form_data(model, a0)
    B = _form_data(model, b0)
    prod = model.split_form(bilinear(A.field, B.field, clifford_product, PolyKForm, A.field.zero))[0]
    comm = model.split_form(bilinear(A.field, B.field, _tractor_commutator, PolyKForm, A.field.zero))[0]
    ab = _circ_ff(A.nc, B.nc)
    ba = _circ_ff(B.nc, A.nc)
    if outputs is not None:
        outputs.append(ab)
    label = f"{_label_form(a0)},{_label_form(b0)}"
    return [_compare("cne_product", label, prod, ab),
            _compare("cne_bracket", label, comm, ab - ba)]


def check_na(model: FlatModel, a0: MixedForm, b0: MixedForm, outputs: Optional[list] = None) -> IdentityResult:
    """1/2 ([b, a])_+ equals L_{V_a} b+ - (k+1) lambda_a b+."""
    A = _form_data(model, a0)
    B = _form_data(model, b0)
    up = model.split_form(bilinear(B.field, A.field, _tractor_commutator, PolyKForm, A.field.zero))[0]
    rhs = lie_derivative_form(A.V, B.nc.plus, check=False)
    if outputs is not None:
        outputs.append((rhs, B.nc.k))
    return _compare("na", f"{_label_form(a0)},{_label_form(b0)}", up.scale(Fraction(1, 2)), rhs)


def check_prr(model: FlatModel, a0: MixedForm, psi0: Mat, outputs: Optional[list] = None) -> IdentityResult:
    """First slot of alpha.psi equals the circ product of a+ and phi."""
    A = _form_data(model, a0)
    S = _spinor_data(model, psi0)
    up = _up_spinor(model, A, S)
    rhs = _circ_fs(model.brep, A.nc, S.phi, S.dphi)
    if outputs is not None:
        outputs.append(rhs)
    return _compare("prr", f"{_label_form(a0)},{_label_spinor(psi0)}", up, rhs)


@dataclass
class SuiteReport:
    sig: Signature
    results: list = field(default_factory=list)
    checker_failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results) and not self.checker_failures

    def summary(self) -> dict:
        out = {}
        for r in self.results:
            s = out.setdefault(r.name, {"checked": 0, "failed": 0})
            s["checked"] += 1
            if not r.ok:
                s["failed"] += 1
        return out

    def to_json(self) -> dict:
        failures = [r.to_json() for r in self.results if not r.ok]
        return {
            "signature": [self.sig.p, self.sig.q],
            "identities": {k: {"checked": v["checked"], "pass": v["failed"] == 0}
                           for k, v in sorted(self.summary().items())},
            "failures": failures[:20],
            "checker_failures": self.checker_failures[:20],
            "pass": self.ok,
        }


def _pairs(items_a: list, items_b: list, sample: Optional[int], rng: random.Random) -> list:
    pairs = [(a, b) for a in items_a for b in items_b]
    if sample is not None and sample < len(pairs):
        pairs = rng.sample(pairs, sample)
    return pairs


IDENTITIES = ("cof", "lsd", "cne", "na", "prr")


def correspondence_suite(sig: Signature, sample: Optional[int] = None, seed: int = 0,
                         identities: Sequence[str] = IDENTITIES,
                         check_outputs: bool = True) -> SuiteReport:
    """Run the tractor/metric correspondence on basis elements.

    sample=None checks every basis pair; otherwise that many seeded pairs per identity.
    Every circ output is also run through its field-equation checker.
    """
    import time
    start = time.perf_counter()
    model = flat_model(sig)
    n = sig.n
    rng = random.Random(seed)
    rep = SuiteReport(sig)
    two = model.form_basis([2])
    all_forms = model.form_basis(range(1, n + 2))
    spinors = model.spinor_basis()
    brep = model.brep

    def spinor_out(name, label, out):
        if check_outputs and not twistor_check(brep, out):
            rep.checker_failures.append(f"{name} {label}")

    if "cof" in identities:
        items = [(a, b) for i, a in enumerate(two) for b in two[i:]]
        if sample is not None and sample < len(items):
            items = rng.sample(items, sample)
        for a, b in items:
            rep.results.append(check_cof(model, a, b))
    if "lsd" in identities:
        for a, s in _pairs(two, spinors, sample, rng):
            outs: list = []
            rep.results.extend(check_lsd(model, a, s, outs))
            spinor_out("lsd", rep.results[-1].inputs, outs[0])
    if "cne" in identities:
        for a, b in _pairs(all_forms, all_forms, sample, rng):
            outs = []
            rep.results.extend(check_cne(model, a, b, outs))
            if check_outputs and not nc_killing_check_mixed(outs[0]):
                rep.checker_failures.append(f"cne {rep.results[-1].inputs}")
    if "na" in identities:
        for a, b in _pairs(two, all_forms, sample, rng):
            outs = []
            rep.results.append(check_na(model, a, b, outs))
            out, k = outs[0]
            if check_outputs and not nc_killing_check(out, k):
                rep.checker_failures.append(f"na {rep.results[-1].inputs}")
    if "prr" in identities:
        for a, s in _pairs(all_forms, spinors, sample, rng):
            outs = []
            rep.results.append(check_prr(model, a, s, outs))
            spinor_out("prr", rep.results[-1].inputs, outs[0])
    rep.seconds = time.perf_counter() - start
    return rep


# ---------------------------------------------------------- generators


def generator_span_check(sig: Signature) -> dict:
    """Dual vector fields of parallel tractor 2-forms versus the conformal generators."""
    model = flat_model(sig)
    gens = minkowski_generators(sig)
    fields = [sharp_field(model.split_form(model.parallel_form(a))[0]) for a in model.form_basis([2])]
    monos = sorted({m for V in list(gens.values()) + fields for m in V.terms})
    n = sig.n

    def coords(V):
        out = []
        for m in monos:
            v = V.terms.get(m)
            out.extend(v.entries if v is not None else [ZERO] * n)
        return out

    from .exactla import rank
    G = Mat.from_rows([coords(V) for V in gens.values()])
    F = Mat.from_rows([coords(V) for V in fields])
    both = Mat.vstack([G, F])
    return {
        "generators": len(gens),
        "rank_generators": rank(G),
        "rank_tractor": rank(F),
        "rank_joint": rank(both),
    }


# ------------------------------------------------------------ constants


def _ratio(a: PolyKForm, b: PolyKForm) -> Optional[GaussianRational]:
    """c with a = c b (None if not proportional); b must be nonzero."""
    for m, v in sorted(b.terms.items()):
        for key, z in sorted(v.items()):
            w = a.terms.get(m)
            c = (w.coeff(key) if w is not None else ZERO) / z
            return c if a == b.scale(c) else None
    return None


def measure_tuffi_constants(sig: Signature, k: int) -> tuple:
    """(c1, c2) with proj+(alpha^{k+1}_psi) = c1 alpha^k_phi, proj-(..) = c2 alpha^k_{D phi}.

    Computed over the basis of parallel spin tractors; ArithmeticError if the ratio
    varies.  Spinors whose squares vanish on both sides are skipped.
    """
    model = flat_model(sig)
    trep = model.trep
    brep = model.brep
    if k < 0 or k > sig.n:
        raise ValueError("grade out of range")
    def square_field(rep, S, grade, zero):
        return bilinear(S, S, lambda u, v: squaring(rep, u, v, grade), PolyKForm, zero)

    c1 = c2 = None
    basis = model.spinor_basis()
    for j in range(len(basis)):
        for sub in ([basis[j]] if j == 0 else [basis[j], basis[0] + basis[j]]):
            S = model.parallel_spinor(sub)
            up = square_field(trep, S, k + 1, MixedForm.zero(model.tsig))
            parts = model.split_form(up)
            phi = model.split_spinor(S)[0]
            bz = MixedForm.zero(sig)
            lo = square_field(brep, phi, k, bz)
            lo2 = square_field(brep, dirac(brep, phi), k, bz)
            for idx, (side, target) in enumerate(((parts[0], lo), (parts[3], lo2))):
                if target.is_zero():
                    if not side.is_zero():
                        raise ArithmeticError("projection is nonzero where the spinor square vanishes")
                    continue
                r = _ratio(side, target)
                if r is None:
                    raise ArithmeticError("projection is not proportional to the spinor square")
                if idx == 0:
                    if c1 is not None and r != c1:
                        raise ArithmeticError(f"ratio varies across spinors: {c1} vs {r}")
                    c1 = r
                else:
                    if c2 is not None and r != c2:
                        raise ArithmeticError(f"ratio varies across spinors: {c2} vs {r}")
                    c2 = r
    return c1, c2
