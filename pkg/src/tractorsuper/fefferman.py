"""Extension of the su(1,m) superalgebra by an extra real even generator.

The invariant spinors W of su(1,m) split into the two eigenlines of the
Kaehler form; the swap map iota and the sign map ell on W feed the
extended brackets, which satisfy all four Jacobi identities.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .clifford import Signature, build_rep, form_matrix
from .exactla import GaussianRational, Mat, kernel_basis, left_inverse, vec
from .forms import MixedForm, metric_pair, tau, tau_inv
from .holonomy import HolonomyAlgebra, form_invariants, spinor_invariants
from .spinors import _unit_scale, build_inner_product, squaring
from .superalgebra import FormCodec, Superalgebra, complex_as_real_basis


@dataclass(frozen=True, eq=False)
class FeffermanData:
    sig: Signature
    W: tuple
    omega0: MixedForm
    psi_plus: Mat
    psi_minus: Mat
    iota: Mat           # 2x2 in the (psi_plus, psi_minus) basis
    ell: Mat
    r_norm: Fraction
    eigenvalue: Fraction   # measured positive eigenvalue of (1/i) omega0 on W
    holonomy: Optional[HolonomyAlgebra] = None

    @property
    def n(self) -> int:
        return self.sig.n - 2

    def coords(self, psi: Mat) -> Mat:
        """Coordinates of a spinor of W in the (psi_plus, psi_minus) basis."""
        B = Mat.hstack([self.psi_plus, self.psi_minus])
        c = left_inverse(B) @ psi
        if B @ c != psi:
            raise ValueError("spinor is not in W")
        return c

    def _apply(self, M: Mat, psi: Mat) -> Mat:
        c = M @ self.coords(psi)
        return self.psi_plus.scale(c[0, 0]) + self.psi_minus.scale(c[1, 0])

    def apply_iota(self, psi: Mat) -> Mat:
        return self._apply(self.iota, psi)

    def apply_ell(self, psi: Mat) -> Mat:
        return self._apply(self.ell, psi)

    def operator(self, M: Mat) -> Mat:
        """Full-size matrix agreeing with M on W."""
        B = Mat.hstack([self.psi_plus, self.psi_minus])
        return B @ M @ left_inverse(B)


def _first_nonzero(v: Mat) -> GaussianRational:
    for z in v.entries:
        if z:
            return z
    raise ValueError("zero vector")


def _positive_phase(v: Mat) -> Mat:
    """Multiply by the conjugate of the first nonzero coordinate."""
    return v.scale(_first_nonzero(v).conj())


def _eigenline(M: Mat, W: Mat, lam) -> Mat:
    """Single eigenvector of M on span(W) for eigenvalue lam."""
    # M W c = lam W c
    ker = kernel_basis(M @ W - W.scale(lam))
    if len(ker) != 1:
        raise ArithmeticError(f"eigenvalue {lam} has multiplicity {len(ker)} on W")
    return W @ ker[0]


def _split_eigenvalue(M: Mat, W: Mat) -> Fraction:
    """d > 0 with (1/i) omega0 having eigenvalues +d, -d on span(W)."""
    R = left_inverse(W) @ M @ W
    if M @ W != W @ R:
        raise ArithmeticError("W is not preserved by omega0")
    tr = R.trace()
    det = R[0, 0] * R[1, 1] - R[0, 1] * R[1, 0]
    if not tr.is_zero() or not det.is_real() or det.re >= 0:
        raise ArithmeticError("omega0 does not split W into opposite eigenlines")
    lam = _unit_scale(-det.re)
    if lam is None or not lam.is_real():
        raise ArithmeticError("eigenvalue of omega0 on W is irrational")
    return abs(lam.re)


def build_fefferman(h: HolonomyAlgebra, scale: Fraction = Fraction(1)) -> FeffermanData:
    sig = h.tractor_sig
    if sig.p != 2:
        raise ValueError("needs tractor signature (2, n)")
    n = sig.n - 2
    if n % 2:
        raise ValueError("odd n is not supported")
    rep = build_rep(sig)
    ip = build_inner_product(rep)
    W = spinor_invariants(h)
    if len(W) != 2:
        raise ValueError(f"invariant spinor space has dimension {len(W)}, expected 2")
    forms2 = form_invariants(h, 2)
    if not forms2:
        raise ValueError("no invariant 2-forms")
    target = Fraction(n, 2) + 1
    # omega0: positive multiple of a square alpha^2_{w,w}
    beta = None
    for w in W + [W[0] + W[1]]:
        beta = squaring(rep, w, w, 2)
        if not beta.is_zero():
            break
    norm = metric_pair(beta, beta)
    if not norm.is_real() or norm.re <= 0:
        raise ArithmeticError("square of an invariant spinor is not a positive 2-form")
    lam = _unit_scale(target / norm.re)
    if lam is None or not lam.is_real() or lam.re <= 0:
        raise ArithmeticError("normalization of the Kaehler form is irrational")
    omega0 = beta.scale(lam.re)
    for w in W + [W[0] + W[1], W[0] - W[1]]:
        sq = squaring(rep, w, w, 2)
        c = _proportionality(sq, omega0)
        if c is None or c < 0:
            raise ArithmeticError("square of an invariant spinor is not a nonnegative multiple of omega0")
    Wm = Mat.hstack(W)
    M = form_matrix(rep, omega0).scale(GaussianRational(0, -1))  # (1/i) omega0
    ev = _split_eigenvalue(M, Wm)
    plus = _positive_phase(_eigenline(M, Wm, ev))
    minus = _positive_phase(_eigenline(M, Wm, -ev))
    plus = plus.scale(scale)
    r = ip.pair(plus, plus)
    rm = ip.pair(minus, minus)
    if not (r.is_real() and rm.is_real() and r.re > 0 and rm.re < 0):
        raise ArithmeticError("eigenlines do not carry norms of opposite sign")
    t = _unit_scale(r.re / (-rm.re))
    if t is None:
        raise ArithmeticError("cannot match the norms of the eigenlines exactly")
    minus = minus.scale(t)
    iota = Mat.from_rows([[0, 1], [1, 0]])
    ell = Mat.from_rows([[1, 0], [0, -1]])
    return FeffermanData(sig, tuple(W), omega0, plus, minus, iota, ell, r.re, ev, h)


def _proportionality(a: MixedForm, b: MixedForm) -> Optional[Fraction]:
    """c with a = c b (c real), or None."""
    if a.is_zero():
        return Fraction(0)
    key = next(iter(b.components))
    c = a.coeff(key) / b.coeff(key)
    if not c.is_real() or a != b.scale(c):
        return None
    return c.re


def check_invariants(fd: FeffermanData) -> dict:
    """Exact checks of the structural identities of the data."""
    rep = build_rep(fd.sig)
    ip = build_inner_product(rep)
    n = fd.n
    out = {}
    out["omega0_norm"] = metric_pair(fd.omega0, fd.omega0) == Fraction(n, 2) + 1
    M = form_matrix(rep, fd.omega0).scale(GaussianRational(0, -1))
    out["eigen_plus"] = M @ fd.psi_plus == fd.psi_plus.scale(fd.eigenvalue)
    out["eigen_minus"] = M @ fd.psi_minus == fd.psi_minus.scale(-fd.eigenvalue)
    out["norms"] = (ip.pair(fd.psi_plus, fd.psi_plus) == fd.r_norm
                    and ip.pair(fd.psi_minus, fd.psi_minus) == -fd.r_norm
                    and ip.pair(fd.psi_plus, fd.psi_minus).is_zero())
    out["iota_swaps"] = fd.apply_iota(fd.psi_plus) == fd.psi_minus
    eye = Mat.identity(2)
    out["involutions"] = fd.iota @ fd.iota == eye and fd.ell @ fd.ell == eye
    out["iota_ell_anticommute"] = fd.iota @ fd.ell == -(fd.ell @ fd.iota)
    basis = [fd.psi_plus, fd.psi_minus]
    anti = iso = True
    for u in basis:
        for v in basis:
            if ip.pair(fd.apply_iota(u), fd.apply_iota(v)) != -ip.pair(u, v):
                anti = False
            if ip.pair(fd.apply_ell(u), fd.apply_ell(v)) != ip.pair(u, v):
                iso = False
    out["iota_anti_isometry"] = anti
    out["ell_isometry"] = iso
    calc = True
    for alpha in diagonal_forms(fd.sig):
        A = form_matrix(rep, alpha)
        for u in basis:
            au = A @ u
            if A @ fd.apply_iota(u) != -fd.apply_iota(au) or A @ fd.apply_ell(u) != fd.apply_ell(au):
                calc = False
    out["clifford_compatibility"] = calc
    return out


def diagonal_forms(sig: Signature) -> list:
    """The blades e_{2i-1}^ e_{2i} spanning the diagonal 2-forms."""
    return [MixedForm.blade(sig, (2 * i, 2 * i + 1)) for i in range(sig.n // 2)]


def extended_brackets(fd: FeffermanData, g0=None, constant: Optional[Fraction] = None) -> Superalgebra:
    """Superalgebra on (g0 + R) + W with the extra even generator.

    constant multiplies Re<psi1, ell psi2> in the odd-odd bracket; it defaults
    to the measured eigenvalue of (1/i) omega0 on W.
    """
    sig = fd.sig
    rep = build_rep(sig)
    ip = build_inner_product(rep)
    if g0 is None:
        g0 = form_invariants_real(fd)
    for a in g0:
        for b in g0:
            if not tau(a).bracket(tau(b)).mat.is_zero():
                raise ValueError("g0 is not abelian")
    fc = FormCodec(sig, [2])
    codec = _PairCodec(fc)
    evens = [(a, Fraction(0)) for a in g0] + [(MixedForm.zero(sig), Fraction(1))]
    iota_full = fd.operator(fd.iota)
    iota_ell_full = fd.operator(fd.iota @ fd.ell)
    minus_i = GaussianRational(0, -1)
    ev = fd.eigenvalue if constant is None else Fraction(constant)

    def ee(x, y):
        return (tau_inv(tau(x[0]).bracket(tau(y[0]))), Fraction(0))

    def eo_op(x):
        alpha, a = x
        return (form_matrix(rep, alpha) @ iota_full).scale(minus_i) + iota_ell_full.scale(a)

    def oo(p, q):
        return (squaring(rep, p, q, 2), ev * ip.pair(p, fd.apply_ell(q)).re)

    odd = complex_as_real_basis([fd.psi_plus, fd.psi_minus])
    return Superalgebra(evens, odd, codec, ee, eo_op, oo, label="fefferman_extended")


def plain_brackets(fd: FeffermanData, g0=None) -> Superalgebra:
    """Same data without the extra generator and without iota (the plain 2-form profile)."""
    sig = fd.sig
    rep = build_rep(sig)
    if g0 is None:
        g0 = form_invariants_real(fd)
    half = Fraction(1, 2)
    return Superalgebra(
        g0, complex_as_real_basis([fd.psi_plus, fd.psi_minus]), FormCodec(sig, [2]),
        lambda a, b: tau_inv(tau(a).bracket(tau(b))),
        lambda a: form_matrix(rep, a).scale(half),
        lambda p, q: squaring(rep, p, q, 2),
        label="fefferman_plain")


def form_invariants_real(fd: FeffermanData) -> list:
    from .superalgebra import real_span
    fc = FormCodec(fd.sig, [2])
    inv = []
    for f in form_invariants(fd.holonomy, 2):
        inv.append(fc.encode(f))
    return [fc.decode(v) for v in real_span(inv)]


class _PairCodec:
    def __init__(self, fc: FormCodec):
        self.fc = fc
        self.keys = list(fc.keys) + ["a"]
        self.length = len(self.keys)

    def encode(self, x) -> Mat:
        v = self.fc.encode(x[0])
        return vec(list(v.entries) + [x[1]])

    def decode(self, v: Mat):
        ents = v.entries
        return (self.fc.decode(vec(ents[:-1])), ents[-1].re)


def verify_lie_superalgebra(alg: Superalgebra):
    return alg.jacobi_check()
