from fractions import Fraction

import numpy as np
import pytest

from test_clifford import kron_formula, to_numpy
from tractorsuper.clifford import Signature, build_rep
from tractorsuper.exactla import Mat, rank
from tractorsuper.fefferman import (build_fefferman, check_invariants, diagonal_forms, extended_brackets,
                                    form_invariants_real, plain_brackets)
from tractorsuper.forms import metric_pair, tau
from tractorsuper.holonomy import catalog, kaehler_form, su_algebra
from tractorsuper.spinors import u_minus, u_plus

M_VALUES = [2, 3, 4]          # n = 4, 6, 8


@pytest.fixture(scope="module", params=M_VALUES)
def fd(request):
    return build_fefferman(su_algebra(request.param))


def test_structural_identities(fd):
    assert check_invariants(fd) == {k: True for k in check_invariants(fd)}


def test_iota_and_ell_matrices(fd):
    assert fd.iota == Mat.from_rows([[0, 1], [1, 0]])
    assert fd.ell == Mat.from_rows([[1, 0], [0, -1]])
    assert fd.apply_iota(fd.psi_minus) == fd.psi_plus
    assert fd.apply_ell(fd.psi_minus) == -fd.psi_minus


def test_eigenlines_are_u_pm(fd):
    rep = build_rep(fd.sig)
    assert rank(Mat.hstack([fd.psi_plus, u_plus(rep)])) == 1
    assert rank(Mat.hstack([fd.psi_minus, u_minus(rep)])) == 1


def test_omega0_is_kaehler_form(fd):
    assert fd.omega0 == kaehler_form(fd.sig)
    assert metric_pair(fd.omega0, fd.omega0) == Fraction(fd.n, 2) + 1


def test_omega0_norm_n6():
    fd6 = build_fefferman(su_algebra(3))
    assert metric_pair(fd6.omega0, fd6.omega0) == 4


@pytest.mark.parametrize("m", M_VALUES)
def test_eigenvalue_numpy_oracle(m):
    """Float check on the tensor-product matrices: (1/i) omega0 u+ = (m+1) u+."""
    sig = Signature(2, 2 * m)
    g = kron_formula(sig)
    om = sum(sig.eps(2 * i + 1) * g[2 * i] @ g[2 * i + 1] for i in range(m + 1))
    rep = build_rep(sig)
    for u, sign in ((u_plus(rep), 1), (u_minus(rep), -1)):
        v = to_numpy(u)[:, 0]
        assert np.allclose(om @ v / 1j, sign * (m + 1) * v)
    assert build_fefferman(su_algebra(m)).eigenvalue == m + 1


def test_g0_bound_and_abelian(fd):
    g0 = form_invariants_real(fd)
    assert 1 <= len(g0) <= fd.n // 2 + 1
    for a in g0:
        for b in g0:
            assert tau(a).bracket(tau(b)).mat.is_zero()


def test_extended_algebra_is_lie_superalgebra(fd):
    assert all(extended_brackets(fd).jacobi_check().flags.values())


def test_plain_algebra_fails_ooo(fd):
    rep = plain_brackets(fd).jacobi_check()
    assert rep.eee and rep.eeo and rep.eoo and not rep.ooo


def test_literal_constant_fails_ooo(fd):
    rep = extended_brackets(fd, constant=Fraction(fd.n, 2) - 1).jacobi_check()
    assert not rep.ooo


def test_diagonal_forms_count():
    assert len(diagonal_forms(Signature(2, 6))) == 4


def test_rejects_wrong_holonomy():
    with pytest.raises(ValueError):
        build_fefferman(catalog("trivial", Signature(2, 4)))
