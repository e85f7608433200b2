"""Explicit complex matrix representation of Cl(p,q).

Basis vectors are 0-based positions; the first p are timelike (square
+1 in the Clifford algebra, metric sign -1), the rest spacelike.
Relation: e_i e_j + e_j e_i = -2 eps_i delta_ij.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .exactla import I, ONE, GaussianRational, Mat, kron_all, lincomb

_E = Mat.from_rows([[1, 0], [0, 1]])
_D = Mat.from_rows([[0, -I], [I, 0]])
_U = Mat.from_rows([[I, 0], [0, -I]])
_V = Mat.from_rows([[0, I], [I, 0]])


@dataclass(frozen=True, order=True)
class Signature:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError(f"invalid signature ({self.p},{self.q})")

    @property
    def n(self) -> int:
        return self.p + self.q

    def eps(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return -1 if i < self.p else 1

    @property
    def signs(self) -> tuple:
        return tuple(-1 if i < self.p else 1 for i in range(self.n))

    def tractor(self) -> "Signature":
        """Signature of R^{p+1,q+1}; position 0 is the extra timelike, n+1 the extra spacelike."""
        return Signature(self.p + 1, self.q + 1)

    def base(self) -> "Signature":
        if self.p < 1 or self.q < 1:
            raise ValueError(f"{self} is not a tractor signature")
        return Signature(self.p - 1, self.q - 1)

    def flipped(self) -> "Signature":
        return Signature(self.q, self.p)

    def __str__(self):
        return f"({self.p},{self.q})"

    @staticmethod
    def parse(text: str) -> "Signature":
        parts = text.replace("(", "").replace(")", "").split(",")
        if len(parts) != 2:
            raise ValueError(f"signature must look like P,Q: {text!r}")
        return Signature(int(parts[0]), int(parts[1]))


@dataclass(frozen=True, eq=False)
class CliffordRep:
    sig: Signature
    gammas: tuple
    tau: tuple

    @property
    def dim(self) -> int:
        return self.gammas[0].rows if self.gammas else 1

    @property
    def n(self) -> int:
        return self.sig.n

    def gamma(self, i: int) -> Mat:
        return self.gammas[i]

    def product(self, idx: Sequence[int]) -> Mat:
        """Matrix of e_{i1} e_{i2} ... e_{ik}."""
        return _product(self, tuple(idx))


def _even_gammas(signs: Sequence[int]) -> tuple:
    n = len(signs)
    m = n // 2
    taus = tuple(ONE if s == 1 else I for s in signs)
    gammas = []
    for j in range(1, m + 1):
        lead = [_E] * (m - j)
        tail = [_D] * (j - 1)
        for mid, pos in ((_U, 2 * j - 2), (_V, 2 * j - 1)):
            gammas.append(kron_all(lead + [mid] + tail).scale(taus[pos]))
    return tuple(gammas), taus


@lru_cache(maxsize=None)
def build_rep(sig: Signature) -> CliffordRep:
    """Matrices Phi(e_i) on C^(2^floor(n/2)) satisfying the Clifford relations."""
    n = sig.n
    if n < 1:
        raise ValueError("Clifford representation needs n >= 1")
    signs = sig.signs
    if n % 2 == 0:
        gammas, taus = _even_gammas(signs)
        return CliffordRep(sig, gammas, taus)
    gammas, taus = _even_gammas(signs[:-1]) if n > 1 else ((), ())
    vol = Mat.identity(1)
    if gammas:
        vol = gammas[0]
        for g in gammas[1:]:
            vol = vol @ g
    target = Mat.identity(vol.rows).scale(-signs[-1])
    for c in (ONE, I, GaussianRational(-1), GaussianRational(0, -1)):
        cand = vol.scale(c)
        if cand @ cand == target:
            last = cand
            break
    else:  # pragma: no cover - unreachable for a consistent rep
        raise ArithmeticError("no volume-element extension found")
    return CliffordRep(sig, gammas + (last,), taus + (c,))


@lru_cache(maxsize=65536)
def _product(rep: CliffordRep, idx: tuple) -> Mat:
    if not idx:
        return Mat.identity(rep.dim)
    if len(idx) == 1:
        return rep.gammas[idx[0]]
    return rep.gammas[idx[0]] @ _product(rep, idx[1:])


def check_relations(rep: CliffordRep) -> bool:
    """Exact check of e_i e_j + e_j e_i = -2 eps_i delta_ij Id."""
    n = rep.n
    ident = Mat.identity(rep.dim)
    for i in range(n):
        gi = rep.gammas[i]
        if gi @ gi != ident.scale(-rep.sig.eps(i)):
            return False
        for j in range(i + 1, n):
            gj = rep.gammas[j]
            # anticommutator vanishes iff gi gj = -(gj gi)
            if gi @ gj != -(gj @ gi):
                return False
    return True


def vector_matrix(rep: CliffordRep, v: Sequence) -> Mat:
    if len(v) != rep.n:
        raise ValueError(f"vector of length {len(v)} for n = {rep.n}")
    return lincomb(list(v), list(rep.gammas))


def _check_spinor(rep: CliffordRep, s: Mat):
    if s.rows != rep.dim or s.cols != 1:
        raise ValueError(f"spinor of shape {s.shape} for module of dimension {rep.dim}")


def vector_action(rep: CliffordRep, v: Sequence, s: Mat) -> Mat:
    """(sum_i v_i Phi(e_i)) s."""
    _check_spinor(rep, s)
    return vector_matrix(rep, v) @ s


def form_matrix(rep: CliffordRep, form) -> Mat:
    """Matrix of Clifford multiplication by a mixed form."""
    if form.sig != rep.sig:
        raise ValueError(f"form on {form.sig} acting on module of {rep.sig}")
    if not form.components:
        return Mat.zeros(rep.dim, rep.dim)
    keys = list(form.components)
    return lincomb([form.components[k] for k in keys], [_product(rep, k) for k in keys])


def form_action(rep: CliffordRep, form, s: Mat) -> Mat:
    _check_spinor(rep, s)
    return form_matrix(rep, form) @ s
