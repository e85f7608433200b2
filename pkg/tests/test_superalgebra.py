import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tractorsuper.clifford import Signature, build_rep
from tractorsuper.exactla import GaussianRational, Mat, lincomb, rank, vec
from tractorsuper.forms import MixedForm, null_vectors, tau, wedge
from tractorsuper.holonomy import catalog, ricci_flat, su_algebra
from tractorsuper.spinors import build_inner_product, clifford_kernel, squaring, u_plus
from tractorsuper.superalgebra import (build, classify_orbit_type, complex_as_real_basis,
                                       determine_Lp, even_grades, holonomy_obstruction_predicate)


def to_numpy(m: Mat) -> np.ndarray:
    return np.array([[complex(float(z.re), float(z.im)) for z in row] for row in m.to_rows()])


def numpy_orbit(rep, chi: Mat):
    """Float oracle: real Clifford kernel dim, and kernel dim / Gram of the square."""
    g = [to_numpy(x) for x in rep.gammas]
    c = to_numpy(chi)[:, 0]
    M = np.stack([x @ c for x in g], axis=1)
    real = np.vstack([M.real, M.imag])
    kd = real.shape[1] - np.linalg.matrix_rank(real, tol=1e-9)
    G = to_numpy(build_inner_product(rep).gram)
    N = len(g)
    a = np.zeros((N, N))
    for i in range(N):
        for j in range(N):
            if i != j:
                a[i, j] = np.imag(np.conj(g[i] @ g[j] @ c) @ G @ c)
    eta = np.diag([-1.0 if i < rep.sig.p else 1.0 for i in range(N)])
    _, s, vt = np.linalg.svd(a @ eta)
    ker = vt[np.sum(s > 1e-9):].T
    gram = ker.T @ eta @ ker
    return kd, ker.shape[1], gram


@pytest.mark.parametrize("n", [4, 5, 6])
def test_flat_model_dims_and_flags(n):
    h = catalog("trivial", Signature(2, n))
    alg = build(h)
    assert alg.d0 == (n + 2) * (n + 1) // 2
    assert alg.d1 == 2 * 2 ** ((n + 2) // 2)
    rep = alg.jacobi_check()
    assert (rep.eee, rep.eeo, rep.eoo, rep.ooo) == (True, True, True, False)
    w = rep.witnesses["ooo"]
    assert alg.direct_defect(*w.triple) == w.defect
    assert any(w.defect)


def test_flat_model_real_dim3_passes_everything():
    h = catalog("trivial", Signature(3, 2))
    alg = build(h, "lorentzian2form", "real")
    assert (alg.d0, alg.d1) == (10, 4)
    assert all(alg.jacobi_check().flags.values())


def test_su_superalgebra():
    alg = build(su_algebra(2))
    assert alg.d1 == 4          # complex dim 2
    assert alg.is_abelian_even()
    rep = alg.jacobi_check()
    assert rep.eee and rep.eeo and rep.eoo and not rep.ooo
    w = rep.witnesses["ooo"]
    assert alg.direct_defect(*w.triple) == w.defect


def test_direct_defect_agrees_with_tables():
    alg = build(catalog("trivial", Signature(2, 3)))
    rng = random.Random(3)
    d0 = alg.d0
    for _ in range(10):
        x, y = rng.randrange(d0), rng.randrange(d0)
        z = rng.randrange(d0, alg.dim)
        assert not any(alg.direct_defect(x, y, z))


def test_lorentzian_profile_rejects_other_signatures():
    with pytest.raises(ValueError):
        build(catalog("trivial", Signature(3, 3)))


def test_even_grades_drop_central_top_form():
    assert even_grades(Signature(4, 3)) == [1, 2, 3, 4, 5, 6]
    assert even_grades(Signature(2, 4)) == [1, 2, 3, 4, 5, 6]


@pytest.mark.parametrize("sig,grade", [(Signature(2, 3), 2), (Signature(2, 4), 2), (Signature(1, 1), 1)])
def test_determine_lp_contains_expected_grade(sig, grade):
    assert grade in determine_Lp(sig)


def test_determine_lp_g2_real():
    h = catalog("g2_split", seed=0)
    from tractorsuper.superalgebra import g1_real_basis
    L = determine_Lp(h.tractor_sig, g1_real_basis(h, "real"))
    assert 4 in L


# ------------------------------------------------------------ orbit types


@pytest.mark.parametrize("n", [4, 6, 8])
def test_u_plus_is_kaehler(n):
    rep = build_rep(Signature(2, n))
    ot = classify_orbit_type(rep, u_plus(rep))
    assert ot.kind == "kaehler" and ot.kernel_dim == 0
    kd, kerdim, _ = numpy_orbit(rep, u_plus(rep))
    assert (kd, kerdim) == (0, 0)


@pytest.mark.parametrize("n,k", [(4, 1), (6, 1), (6, 2), (8, 2)])
def test_partial_kaehler_product_spinor(n, k):
    rep = build_rep(Signature(2, n))
    up = u_plus(build_rep(Signature(2, 2 * k)))
    rest = 2 ** ((n - 2 * k) // 2)
    chi = vec([1 if i == rest - 1 else 0 for i in range(rest)]).kron(up)
    ot = classify_orbit_type(rep, chi)
    assert ot.kind == "partial_kaehler"
    kd, kerdim, gram = numpy_orbit(rep, chi)
    assert kd == 0 and kerdim == ot.euclidean_complement_dim == 2
    assert np.all(np.linalg.eigvalsh(gram) > 0)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_annihilated_spinor_has_kernel(n):
    sig = Signature(2, n)
    rep = build_rep(sig)
    fplus, _ = null_vectors(sig)
    from tractorsuper.clifford import vector_matrix
    from tractorsuper.exactla import kernel_basis
    ann = kernel_basis(vector_matrix(rep, fplus))
    chi = lincomb([GaussianRational(i + 1, i % 2) for i in range(len(ann))], ann)
    ot = classify_orbit_type(rep, chi)
    assert ot.kernel_dim >= 1
    assert numpy_orbit(rep, chi)[0] == ot.kernel_dim


def _one_form(sig, v: Mat) -> MixedForm:
    out = MixedForm.zero(sig)
    for i, z in enumerate(v.entries):
        out = out + MixedForm.blade(sig, (i,), z)
    return out


def _spinor_pool(rep):
    sig = rep.sig
    from tractorsuper.clifford import vector_matrix
    from tractorsuper.exactla import kernel_basis
    fplus, _ = null_vectors(sig)
    ann = kernel_basis(vector_matrix(rep, fplus))
    basis = [vec([1 if i == j else 0 for i in range(rep.dim)]) for j in range(rep.dim)]
    return ann, basis


@settings(max_examples=25)
@given(st.sampled_from([3, 4, 5]), st.integers(0, 2 ** 16), st.booleans())
def test_kernel_dim_two_iff_lightlike_plane(n, seed, from_annihilated):
    sig = Signature(2, n)
    rep = build_rep(sig)
    ann, basis = _spinor_pool(rep)
    pool = ann if from_annihilated else basis
    rng = random.Random(seed)
    chi = lincomb([GaussianRational(rng.randint(-2, 2), rng.randint(-2, 2)) for _ in pool], pool)
    if chi.is_zero():
        return
    ker = clifford_kernel(rep, chi)
    assert len(ker) in (0, 1, 2)
    alpha = squaring(rep, chi, chi, 2)
    A = tau(alpha).mat
    decomposable = not alpha.is_zero() and wedge(alpha, alpha).is_zero()
    lightlike_plane = False
    if decomposable and rank(A) == 2:
        from tractorsuper.forms import metric_matrix
        img = [c for c in A.columns() if not c.is_zero()]
        eta = metric_matrix(sig)
        lightlike_plane = all((x.transpose() @ eta @ y).is_zero() for x in img for y in img)
    assert (len(ker) == 2) == lightlike_plane
    if len(ker) == 2:
        l1, l2 = (_one_form(sig, v) for v in ker)
        plane = wedge(l1, l2)
        key = next(iter(plane.components))
        c = alpha.coeff(key) / plane.coeff(key)
        assert alpha == plane.scale(c)


def test_orbit_type_requires_two_timelike():
    rep = build_rep(Signature(1, 3))
    with pytest.raises(ValueError):
        classify_orbit_type(rep, vec([1, 0, 0, 0]))


# ------------------------------------------------------------ obstruction predicate


def test_predicate_false_for_su():
    assert holonomy_obstruction_predicate(su_algebra(2)) is False


@pytest.mark.parametrize("base", [Signature(1, 3), Signature(1, 4)])
def test_predicate_true_for_ricci_flat(base):
    h = ricci_flat(base, "trivial", 0)
    assert holonomy_obstruction_predicate(h) is True
    assert build(h).jacobi_check().ooo


def test_complex_as_real_basis_doubles():
    v = vec([1, GaussianRational(0, 1)])
    out = complex_as_real_basis([v])
    assert len(out) == 2 and out[1] == v.scale(GaussianRational(0, 1))


def test_real_field_needs_real_structure():
    with pytest.raises(ValueError):
        build(catalog("trivial", Signature(2, 3)), "lorentzian2form", "real")


def test_jacobi_report_json_shape():
    rep = build(su_algebra(2)).jacobi_check()
    js = rep.to_json()
    assert set(js["flags"]) == {"eee", "eeo", "eoo", "ooo"}
    assert all("/" in x for x in js["witnesses"]["ooo"]["defect"])
