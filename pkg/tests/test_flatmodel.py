from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tractorsuper.clifford import Signature, build_rep
from tractorsuper.exactla import GaussianRational, Mat, vec
from tractorsuper.flatmodel import (PolyVField, codiff, conformal_factor, constant_scalar, coordinate,
                                    correspondence_suite, dirac, ext_d, flat_model,
                                    generator_span_check, is_conformal, measure_tuffi_constants,
                                    minkowski_generators, nc_killing_check, spin_lie_derivative,
                                    twistor_check, twistor_field, vf_bracket)


def unit(dim: int, j: int) -> Mat:
    return vec([1 if i == j else 0 for i in range(dim)])


@pytest.mark.parametrize("sig", [Signature(1, 3), Signature(2, 2), Signature(0, 3), Signature(1, 2)])
def test_generator_count(sig):
    n = sig.n
    gens = minkowski_generators(sig)
    assert len(gens) == (n + 2) * (n + 1) // 2
    assert all(is_conformal(V, sig) for V in gens.values())


def test_translation_dilation_bracket():
    sig = Signature(1, 3)
    gens = minkowski_generators(sig)
    for i in range(1, 5):
        assert vf_bracket(gens[f"P{i}"], gens["D"]) == gens[f"P{i}"]


def test_conformal_factors():
    sig = Signature(1, 3)
    gens = minkowski_generators(sig)
    assert conformal_factor(gens["D"], sig) == constant_scalar(4, 1)
    assert conformal_factor(gens["P2"], sig).is_zero()
    assert conformal_factor(gens["M12"], sig).is_zero()
    # lambda of the special conformal field K_i is 2 eps_i x_i
    assert conformal_factor(gens["K1"], sig) == coordinate(4, 0).scale(-2)


def test_non_conformal_field_rejected():
    sig = Signature(0, 2)
    x0 = coordinate(2, 0)
    V = PolyVField.from_components([x0, constant_scalar(2, 0)])
    assert not is_conformal(V, sig)
    with pytest.raises(ValueError):
        conformal_factor(V, sig)


@pytest.mark.parametrize("sig", [Signature(1, 2), Signature(1, 3), Signature(2, 2)])
def test_generators_span_tractor_fields(sig):
    out = generator_span_check(sig)
    assert out["rank_generators"] == out["rank_tractor"] == out["rank_joint"] == out["generators"]


@pytest.mark.parametrize("sig", [Signature(1, 3), Signature(0, 3), Signature(2, 2)])
def test_twistor_field_examples(sig):
    rep = build_rep(sig)
    for j in range(rep.dim):
        phi1 = unit(rep.dim, j)
        phi0 = unit(rep.dim, (j + 1) % rep.dim).scale(GaussianRational(1, 1))
        phi = twistor_field(rep, phi0, phi1)
        assert twistor_check(rep, phi)
        assert dirac(rep, phi) == twistor_field(rep, phi1, Mat.zeros(rep.dim, 1))


def test_non_twistor_rejected():
    sig = Signature(0, 3)
    rep = build_rep(sig)
    phi = twistor_field(rep, unit(rep.dim, 0), unit(rep.dim, 1))
    bent = phi + type(phi)(3, {(1, 0, 0): unit(rep.dim, 0)}, phi.zero)
    assert not twistor_check(rep, bent)


@settings(max_examples=15)
@given(st.sampled_from([Signature(1, 3), Signature(2, 2)]), st.integers(0, 4), st.data())
def test_d_squared_and_codiff_squared_vanish(sig, k, data):
    model = flat_model(sig)
    basis = model.form_basis([k + 1])
    a0 = data.draw(st.sampled_from(basis))
    up = model.split_form(model.parallel_form(a0))[0]
    assert ext_d(ext_d(up)).is_zero()
    assert codiff(codiff(up)).is_zero()


@pytest.mark.parametrize("sig", [Signature(1, 2), Signature(1, 3)])
def test_parallel_forms_give_nc_killing_forms(sig):
    model = flat_model(sig)
    for k in range(1, sig.n + 1):
        for a0 in model.form_basis([k + 1]):
            up = model.split_form(model.parallel_form(a0))[0]
            assert nc_killing_check(up, k)


def test_parallel_forms_are_parallel():
    model = flat_model(Signature(1, 3))
    for a0 in model.form_basis([2, 3]):
        A = model.parallel_form(a0)
        assert A.at_origin() == a0
        for i in range(4):
            assert model.covariant_derivative_form(A, i).is_zero()


def test_parallel_spinors_are_twistor_spinors():
    model = flat_model(Signature(1, 3))
    for s in model.spinor_basis():
        S = model.parallel_spinor(s)
        for i in range(4):
            assert model.covariant_derivative_spinor(S, i).is_zero()
        assert twistor_check(model.brep, model.split_spinor(S)[0])


@pytest.mark.parametrize("name", ["P1", "M12", "D", "K2", "M34"])
def test_spin_lie_derivative_preserves_twistor_spinors(name):
    sig = Signature(1, 3)
    rep = build_rep(sig)
    V = minkowski_generators(sig)[name]
    for j in (0, 2):
        phi = twistor_field(rep, unit(rep.dim, j), unit(rep.dim, 3 - j))
        assert twistor_check(rep, spin_lie_derivative(rep, V, phi))


@pytest.mark.parametrize("sig,sample", [(Signature(1, 2), None), (Signature(0, 3), 6), (Signature(1, 3), 4)])
def test_correspondence_suite_small(sig, sample):
    rep = correspondence_suite(sig, sample=sample, seed=1)
    assert rep.ok, rep.to_json()
    prefixes = {name.split("_")[0] for name in rep.summary()}
    assert {"cof", "lsd", "cne", "na", "prr"} <= prefixes


def test_suite_json_is_deterministic():
    a = correspondence_suite(Signature(1, 2), sample=3, seed=5, identities=("cof", "na")).to_json()
    b = correspondence_suite(Signature(1, 2), sample=3, seed=5, identities=("cof", "na")).to_json()
    assert a == b and a["pass"]


def test_tuffi_constants_frozen():
    # [DERIVED] measured exactly over the spinor basis
    assert measure_tuffi_constants(Signature(1, 2), 1) == (GaussianRational(1), GaussianRational(Fraction(-2, 9)))
    c1, c2 = measure_tuffi_constants(Signature(2, 2), 1)
    assert abs(c1.re) == Fraction(1, 2) and c1.is_real()
    assert c2 == GaussianRational(Fraction(1, 16))
