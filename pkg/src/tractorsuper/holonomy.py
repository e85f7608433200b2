"""Holonomy algebras as generator lists in so(p+1,q+1) and their invariants."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .clifford import Signature, build_rep, vector_matrix
from .exactla import (ZERO, GaussianRational, Mat, intersect_kernels, inverse, kernel_basis,
                      lincomb, parse_scalar, rank, vec)
from .forms import (MixedForm, SkewEndo, basis_indices, derivation_action, derivation_matrix,
                    from_coords, null_vectors, so_basis, spin_lift, tau)
from .spinors import build_inner_product, real_structure, squaring


@dataclass(frozen=True, eq=False)
class HolonomyAlgebra:
    name: str
    tractor_sig: Signature
    generators: tuple
    params: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.generators)


@dataclass(frozen=True, eq=False)
class InvariantSpaces:
    spinor_basis: tuple
    form_basis: dict


def _check_generators(sig: Signature, gens: Sequence[SkewEndo]):
    for g in gens:
        if not g.is_skew():
            raise ValueError("generator is not skew for the tractor metric")


def _from_coeffs(sig: Signature, coeffs: Sequence) -> SkewEndo:
    basis = so_basis(sig)
    return SkewEndo(sig, lincomb(list(coeffs), [b.mat for b in basis]))


def _span_so(sig: Signature, conditions) -> list:
    """Basis of {A in so(sig) : all linear conditions vanish}.

    conditions maps a SkewEndo to a flat list of scalars; it must be linear.
    """
    basis = so_basis(sig)
    cols = [vec(conditions(b)) for b in basis]
    M = Mat.hstack(cols)
    ker = kernel_basis(M) if not M.is_zero() else [vec([1 if i == j else 0 for i in range(len(basis))])
                                                   for j in range(len(basis))]
    return [_from_coeffs(sig, k.entries) for k in ker]


def kaehler_form(tsig: Signature) -> MixedForm:
    """sum_i eps_{2i} e_{2i-1}^ e_{2i} in 1-based labels, i.e. positions (2i-2, 2i-1)."""
    if tsig.n % 2:
        raise ValueError("Kaehler form needs even dimension")
    return MixedForm(tsig, {(2 * i, 2 * i + 1): tsig.eps(2 * i + 1) for i in range(tsig.n // 2)})


def su_algebra(m: int) -> HolonomyAlgebra:
    """su(1,m) in so(2,2m): commutes with J = tau(omega_0), complex trace zero."""
    if m < 1:
        raise ValueError("su(1,m) needs m >= 1")
    tsig = Signature(2, 2 * m)
    J = tau(kaehler_form(tsig)).mat

    def cond(A: SkewEndo):
        c = A.mat @ J - J @ A.mat
        return list(c.entries) + [(J @ A.mat).trace()]

    gens = _span_so(tsig, cond)
    return HolonomyAlgebra(f"su(1,{m})", tsig, tuple(gens), {"m": m})


def plane_wave_basis(n: int, ordering: int = 0) -> Mat:
    """Columns b1..b5 blocks (1,1,n,1,1) in tractor coordinates of (2, n+2).

    b1 = e_last + e_0, b5 = (e_last - e_0)/2, b2/b4 = lightlike pair inside the base
    built from e_1 and the last base vector, middle block = remaining spacelike vectors.
    ordering=1 swaps the roles of the two lightlike pairs.
    """
    tsig = Signature(2, n + 2)
    N = tsig.n
    half = Fraction(1, 2)

    def col(entries: dict):
        v = [0] * N
        for k, c in entries.items():
            v[k] = c
        return vec(v)

    outer_p = col({N - 1: 1, 0: 1})
    outer_m = col({N - 1: half, 0: -half})
    last_base = N - 2
    inner_p = col({last_base: 1, 1: 1})
    inner_m = col({last_base: half, 1: -half})
    middle = [col({j: 1}) for j in range(2, last_base)]
    if ordering == 1:
        outer_p, inner_p = inner_p, outer_p
        outer_m, inner_m = inner_m, outer_m
    return Mat.hstack([outer_p, inner_p] + middle + [inner_m, outer_m])


def plane_wave(n: int, ordering: int = 0) -> HolonomyAlgebra:
    """Abelian R^{2n+1} holonomy of an indecomposable plane wave (base dim n+2)."""
    if n < 1:
        raise ValueError("plane_wave needs n >= 1")
    tsig = Signature(2, n + 2)
    N = tsig.n
    B = plane_wave_basis(n, ordering)
    Binv = inverse(B)
    gens = []

    def block(u, v, c):
        M = [[0] * N for _ in range(N)]
        for j in range(n):
            M[0][2 + j] = u[j]
            M[1][2 + j] = v[j]
            M[2 + j][N - 2] = -v[j]
            M[2 + j][N - 1] = -u[j]
        M[0][N - 2] = c
        M[1][N - 1] = -c
        return Mat.from_rows(M)

    for j in range(n):
        e = [0] * n
        e[j] = 1
        gens.append(block(e, [0] * n, 0))
    for j in range(n):
        e = [0] * n
        e[j] = 1
        gens.append(block([0] * n, e, 0))
    gens.append(block([0] * n, [0] * n, 1))
    out = tuple(SkewEndo(tsig, B @ g @ Binv) for g in gens)
    _check_generators(tsig, out)
    return HolonomyAlgebra(f"plane_wave({n})", tsig, out, {"n": n, "ordering": ordering})


def _metric_holonomy(base: Signature, h0: str, k: int) -> list:
    """Generators of h0 acting on the last n-k base positions (as base endomorphisms)."""
    n = base.n
    block = list(range(k, n))
    if h0 == "trivial":
        return []
    if h0 == "so":
        return [e for e in so_basis(base) if _support(e) <= set(block)]
    if h0 == "su":
        if len(block) % 2:
            raise ValueError("su needs an even block")
        # complex structure pairing consecutive block positions
        ents = [0] * (n * n)
        for a in range(0, len(block), 2):
            i, j = block[a], block[a + 1]
            ents[j * n + i] = 1
            ents[i * n + j] = -1 * base.eps(j) * base.eps(i)
        J = Mat(n, n, ents)
        sub = [e for e in so_basis(base) if _support(e) <= set(block)]

        def cond(A: SkewEndo):
            c = A.mat @ J - J @ A.mat
            return list(c.entries) + [(J @ A.mat).trace()]

        cols = [vec(cond(b)) for b in sub]
        ker = kernel_basis(Mat.hstack(cols))
        return [SkewEndo(base, lincomb(list(kv.entries), [b.mat for b in sub])) for kv in ker]
    raise ValueError(f"unknown metric holonomy {h0!r}")


def _support(e: SkewEndo) -> set:
    n = e.sig.n
    s = set()
    for i in range(n):
        for j in range(n):
            if e.mat[i, j]:
                s.update((i, j))
    return s


def ricci_flat(base: Signature, h0: str = "trivial", k: int = 0) -> HolonomyAlgebra:
    """hol(M,g) semidirect R^{n-k} in the basis (s+, s_1..s_n, s-)."""
    n = base.n
    if not 0 <= k < n:
        raise ValueError("ricci_flat needs 0 <= k < n")
    tsig = base.tractor()
    N = tsig.n
    half = Fraction(1, 2)
    cols = []
    v = [0] * N
    v[0], v[N - 1] = 1, 1
    cols.append(vec(v))
    for i in range(n):
        v = [0] * N
        v[i + 1] = 1
        cols.append(vec(v))
    v = [0] * N
    v[0], v[N - 1] = -half, half
    cols.append(vec(v))
    B = Mat.hstack(cols)
    Binv = inverse(B)
    gens = []
    for A in _metric_holonomy(base, h0, k):
        M = [[0] * N for _ in range(N)]
        for i in range(n):
            for j in range(n):
                M[1 + i][1 + j] = A.mat[i, j]
        gens.append(Mat.from_rows(M))
    for j in range(k, n):
        M = [[0] * N for _ in range(N)]
        M[0][1 + j] = base.eps(j)   # v^flat
        M[1 + j][N - 1] = -1        # -v
        gens.append(Mat.from_rows(M))
    out = tuple(SkewEndo(tsig, B @ g @ Binv) for g in gens)
    _check_generators(tsig, out)
    return HolonomyAlgebra(f"ricci_flat({h0},{k})", tsig, out, {"h0": h0, "k": k})


def stabilizer(form: MixedForm) -> HolonomyAlgebra:
    """{A in so : A acting as a derivation kills the form}."""
    sig = form.sig
    grades = form.grades()

    def cond(A: SkewEndo):
        out = []
        img = derivation_action(A, form)
        for g in grades:
            out.extend(img.coords(g))
        return out or [ZERO]

    gens = _span_so(sig, cond)
    return HolonomyAlgebra("stabilizer", sig, tuple(gens))


def random_real_spinor(rs, rng: random.Random, bound: int = 3) -> Mat:
    basis = rs.fixed_basis()
    return lincomb([rng.randint(-bound, bound) for _ in basis], basis)


def g2_split(seed: int = 0, attempts: int = 32) -> HolonomyAlgebra:
    """Stabilizer of alpha^3 of a generic real spinor in signature (4,3)."""
    tsig = Signature(4, 3)
    rep = build_rep(tsig)
    rs = real_structure(rep)
    if rs is None:
        raise ArithmeticError("no real structure in signature (4,3)")
    ip = build_inner_product(rep)
    rng = random.Random(seed)
    for attempt in range(attempts):
        psi = random_real_spinor(rs, rng)
        if psi.is_zero() or ip.pair(psi, psi).is_zero():
            continue
        three = squaring(rep, psi, psi, 3)
        stab = stabilizer(three)
        if stab.dim == 14:
            return HolonomyAlgebra("g2_split", tsig, stab.generators,
                                   {"seed": seed}, {"spinor": psi, "three_form": three, "attempt": attempt})
    raise ArithmeticError(f"no generic spinor found in {attempts} attempts")


def load_custom(path: str) -> HolonomyAlgebra:
    with open(path) as fh:
        data = json.load(fh)
    p, q = data["tractor_signature"]
    tsig = Signature(p, q)
    N = tsig.n
    gens = []
    for g in data["generators"]:
        flat = [parse_scalar(x) if isinstance(x, str) else x for x in _flatten(g)]
        if len(flat) != N * N:
            raise ValueError(f"generator has {len(flat)} entries, expected {N * N}")
        gens.append(SkewEndo(tsig, Mat(N, N, flat)))
    _check_generators(tsig, gens)
    return HolonomyAlgebra(data.get("name", "custom"), tsig, tuple(gens), {"file": path})


def _flatten(g):
    if isinstance(g, list) and g and isinstance(g[0], list):
        return [x for row in g for x in row]
    return list(g)


def catalog(name: str, tractor_sig: Optional[Signature] = None, **params) -> HolonomyAlgebra:
    if name == "trivial":
        if tractor_sig is None:
            raise ValueError("trivial holonomy needs a tractor signature")
        return HolonomyAlgebra("trivial", tractor_sig, ())
    if name == "su":
        return su_algebra(int(params["m"]))
    if name == "g2_split":
        return g2_split(int(params.get("seed", 0)))
    if name == "plane_wave":
        return plane_wave(int(params["n"]), int(params.get("ordering", 0)))
    if name == "ricci_flat":
        if tractor_sig is None:
            raise ValueError("ricci_flat needs a signature")
        return ricci_flat(tractor_sig.base(), params.get("h0", "trivial"), int(params.get("k", 0)))
    if name == "custom":
        return load_custom(params["file"])
    raise ValueError(f"unknown holonomy {name!r}")


# ------------------------------------------------------------- invariants


def spinor_invariants(h: HolonomyAlgebra) -> list:
    rep = build_rep(h.tractor_sig)
    if not h.generators:
        return [vec([1 if i == j else 0 for i in range(rep.dim)]) for j in range(rep.dim)]
    return intersect_kernels([spin_lift(g, rep) for g in h.generators], rep.dim)


def form_invariants(h: HolonomyAlgebra, k: int) -> list:
    sig = h.tractor_sig
    basis = basis_indices(sig.n, k)
    if not h.generators:
        return [from_coords(sig, k, [1 if i == j else 0 for i in range(len(basis))]) for j in range(len(basis))]
    ker = intersect_kernels([derivation_matrix(g, k) for g in h.generators], len(basis))
    return [from_coords(sig, k, v.entries) for v in ker]


def invariant_spaces(h: HolonomyAlgebra, grades: Sequence[int]) -> InvariantSpaces:
    return InvariantSpaces(tuple(spinor_invariants(h)), {k: form_invariants(h, k) for k in grades})


def annihilates_spinor(h: HolonomyAlgebra, psi: Mat) -> bool:
    rep = build_rep(h.tractor_sig)
    return all((spin_lift(g, rep) @ psi).is_zero() for g in h.generators)


def annihilates_form(h: HolonomyAlgebra, form: MixedForm) -> bool:
    return all(derivation_action(g, form).is_zero() for g in h.generators)


def contains(big: HolonomyAlgebra, small: HolonomyAlgebra) -> bool:
    """Span containment of generator lists."""
    if not small.generators:
        return True
    A = [vec(g.mat.entries) for g in big.generators]
    r = rank(Mat.hstack(A)) if A else 0
    B = A + [vec(g.mat.entries) for g in small.generators]
    return rank(Mat.hstack(B)) == r


# ------------------------------------------------------------ vector maps


def half_spinor_basis(sig: Signature, sign: int = 1) -> list:
    """Eigenspace of the volume element (even dimension), normalized so vol^2 = lambda^2."""
    rep = build_rep(sig)
    vol = rep.product(tuple(range(sig.n)))
    sq = vol @ vol
    lam2 = sq[0, 0]
    lam = GaussianRational(1) if lam2 == 1 else GaussianRational(0, 1)
    if lam * lam != lam2:
        raise ArithmeticError("unexpected volume element square")
    return kernel_basis(vol - Mat.identity(rep.dim).scale(lam * sign))


def vector_map_check(sig: Signature, subspace: Sequence[Mat]) -> str:
    """surjective / nonzero / zero for the polarized Dirac currents on a real-spanned subspace."""
    rep = build_rep(sig)
    vals = []
    for a in subspace:
        for b in subspace:
            cur = squaring(rep, a, b, 1)
            vals.append(vec([cur.coeff((i,)) for i in range(sig.n)]))
    if not vals:
        return "zero"
    r = rank(Mat.hstack(vals))
    if r == sig.n:
        return "surjective"
    return "nonzero" if r else "zero"


def eplus_annihilation_check(tsig: Signature, spinors: Sequence[Mat]) -> bool:
    rep = build_rep(tsig)
    fp, _ = null_vectors(tsig, "f")
    F = vector_matrix(rep, fp)
    return all((F @ s).is_zero() for s in spinors)
