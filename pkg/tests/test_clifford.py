import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from strategies import forms, signatures, spinors, vectors
from tractorsuper.clifford import (Signature, build_rep, check_relations, form_action, form_matrix,
                                   vector_action, vector_matrix)
from tractorsuper.exactla import GaussianRational, Mat, kernel_basis, vec
from tractorsuper.forms import MixedForm, interior, wedge

I = GaussianRational(0, 1)


def to_numpy(m: Mat) -> np.ndarray:
    return np.array([[complex(float(z.re), float(z.im)) for z in row] for row in m.to_rows()])


def kron_formula(sig: Signature) -> list:
    """Independent numpy evaluation of the tensor-product formula for even n."""
    E = np.eye(2)
    D = np.array([[0, -1j], [1j, 0]])
    U = np.array([[1j, 0], [0, -1j]])
    V = np.array([[0, 1j], [1j, 0]])
    m = sig.n // 2
    out = []
    for i in range(sig.n):
        j = i // 2 + 1
        tau = 1 if sig.eps(i) == 1 else 1j
        factors = [E] * (m - j) + [U if i % 2 == 0 else V] + [D] * (j - 1)
        M = np.array([[1.0 + 0j]])
        for f in factors:
            M = np.kron(M, f)
        out.append(tau * M)
    return out


def test_two_dim_euclidean_matrices():
    rep = build_rep(Signature(2, 0))
    assert rep.gamma(0) == Mat.from_rows([[-1, 0], [0, 1]])
    assert rep.gamma(1) == Mat.from_rows([[0, -1], [-1, 0]])
    ident = Mat.identity(2)
    assert rep.gamma(0) @ rep.gamma(0) == ident
    assert rep.gamma(1) @ rep.gamma(1) == ident
    assert rep.gamma(0).anticommutator(rep.gamma(1)).is_zero()


def test_lorentzian_plane_squares():
    rep = build_rep(Signature(1, 1))
    ident = Mat.identity(2)
    assert rep.gamma(0) @ rep.gamma(0) == ident
    assert rep.gamma(1) @ rep.gamma(1) == -ident


@pytest.mark.parametrize("sig", [Signature(2, 4), Signature(0, 6), Signature(3, 3), Signature(2, 6),
                                 Signature(1, 3), Signature(4, 4)])
def test_even_gammas_match_tensor_formula(sig):
    rep = build_rep(sig)
    for mine, ref in zip(rep.gammas, kron_formula(sig)):
        assert np.array_equal(to_numpy(mine), ref)


@pytest.mark.parametrize("sig", [Signature(1, 2), Signature(2, 3), Signature(4, 3), Signature(0, 5)])
def test_odd_generator_is_scaled_volume_element(sig):
    rep = build_rep(sig)
    vol = rep.product(tuple(range(sig.n - 1)))
    candidates = [GaussianRational(1), I, GaussianRational(-1), -I]
    target = Mat.identity(rep.dim).scale(-sig.eps(sig.n - 1))
    first = next(c for c in candidates if vol.scale(c) @ vol.scale(c) == target)
    assert rep.gammas[-1] == vol.scale(first)
    assert check_relations(rep)


@pytest.mark.parametrize("n", range(1, 9))
def test_relations_small(n):
    for p in range(n + 1):
        assert check_relations(build_rep(Signature(p, n - p)))


def test_zero_vector_acts_as_zero():
    rep = build_rep(Signature(1, 3))
    s = vec([1, 2, I, -1])
    assert vector_action(rep, [0, 0, 0, 0], s).is_zero()


@given(signatures(6), st.data())
def test_vector_squares_to_minus_norm(sig, data):
    rep = build_rep(sig)
    s = data.draw(spinors(rep.dim))
    e1 = [1] + [0] * (sig.n - 1)
    assert vector_action(rep, e1, vector_action(rep, e1, s)) == s.scale(-sig.eps(0))


def test_isotropic_square_vanishes():
    sig = Signature(2, 4)
    rep = build_rep(sig)
    v = [1, 0, 0, 0, 0, 1]
    M = vector_matrix(rep, v)
    assert (M @ M).is_zero()
    assert len(kernel_basis(M)) == 2 ** (sig.n // 2 - 1)


@given(signatures(6, 2), st.data())
def test_grade_one_form_equals_vector_action(sig, data):
    rep = build_rep(sig)
    v = data.draw(vectors(sig.n))
    s = data.draw(spinors(rep.dim))
    assert form_action(rep, MixedForm.flat(sig, v), s) == vector_action(rep, v, s)


@given(signatures(6, 2), st.data())
def test_vector_times_form_identities(sig, data):
    rep = build_rep(sig)
    X = data.draw(vectors(sig.n))
    w = data.draw(forms(sig)).part(data.draw(st.integers(0, min(3, sig.n))))
    k = w.grades()[0] if w.grades() else 0
    phi = data.draw(spinors(rep.dim))
    Xf = MixedForm.flat(sig, X)
    lhs = vector_action(rep, X, form_action(rep, w, phi))
    assert lhs == form_action(rep, wedge(Xf, w) - interior(X, w), phi)
    lhs2 = form_action(rep, w, vector_action(rep, X, phi))
    rhs2 = form_action(rep, wedge(Xf, w) + interior(X, w), phi).scale((-1) ** k)
    assert lhs2 == rhs2


def test_form_matrix_examples():
    sig = Signature(2, 0)
    rep = build_rep(sig)
    assert form_matrix(rep, MixedForm.scalar(sig)) == Mat.identity(2)
    assert form_matrix(rep, MixedForm.blade(sig, (0, 1))) == rep.gamma(0) @ rep.gamma(1)


@given(signatures(6, 2), st.data())
def test_form_matrix_agrees_with_action(sig, data):
    rep = build_rep(sig)
    w = data.draw(forms(sig))
    s = data.draw(spinors(rep.dim))
    assert form_matrix(rep, w) @ s == form_action(rep, w, s)
