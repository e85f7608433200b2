import json

import pytest

from tractorsuper.clifford import Signature, build_rep
from tractorsuper.exactla import Mat, format_scalar, kernel_basis, rank
from tractorsuper.forms import MixedForm, derivation_action, hodge_star, so_basis, spin_lift, volume
from tractorsuper.holonomy import (catalog, contains, eplus_annihilation_check, form_invariants,
                                   half_spinor_basis, invariant_spaces, kaehler_form, load_custom,
                                   plane_wave, ricci_flat, spinor_invariants, stabilizer,
                                   su_algebra, vector_map_check)
from tractorsuper.spinors import u_minus, u_plus


def test_su12_dimension():
    h = catalog("su", m=2)
    assert h.tractor_sig == Signature(2, 4)
    assert h.dim == 8
    for g in h.generators:
        assert g.is_skew()


def test_su_kernel_example():
    h = su_algebra(3)
    rep = build_rep(h.tractor_sig)
    stacked = Mat.vstack([spin_lift(g, rep) for g in h.generators])
    assert len(kernel_basis(stacked)) == 2


def test_trivial_catalog_entry():
    h = catalog("trivial", Signature(2, 4))
    assert h.generators == ()
    inv = invariant_spaces(h, [2])
    assert len(inv.spinor_basis) == 8
    assert len(inv.form_basis[2]) == 15


@pytest.mark.parametrize("m", [2, 3, 4])
def test_su_invariant_spinors_are_u_pm(m):
    h = su_algebra(m)
    rep = build_rep(h.tractor_sig)
    inv = spinor_invariants(h)
    assert len(inv) == 2
    span = Mat.hstack(inv)
    assert rank(Mat.hstack([span, u_plus(rep), u_minus(rep)])) == 2


def test_plane_wave_invariants():
    h = plane_wave(2)
    assert h.tractor_sig == Signature(2, 4)
    assert len(spinor_invariants(h)) == 2
    assert eplus_annihilation_check(h.tractor_sig, spinor_invariants(h))


def test_stabilizer_of_volume_is_everything():
    sig = Signature(2, 3)
    assert stabilizer(volume(sig)).dim == len(so_basis(sig))


def test_stabilizer_of_kaehler_form_contains_su():
    for m in (2, 3):
        tsig = Signature(2, 2 * m)
        stab = stabilizer(kaehler_form(tsig))
        assert contains(stab, su_algebra(m))
        assert stab.dim == (m + 1) ** 2


def test_g2_split_stabilizer():
    h = catalog("g2_split", seed=0)
    assert h.dim == 14
    three = h.info["three_form"]
    star = hodge_star(three)
    assert contains(stabilizer(star), h)
    for g in h.generators:
        assert derivation_action(g, star).is_zero()
    inv = spinor_invariants(h)
    assert len(inv) == 1


def test_vector_map_examples():
    sig = Signature(2, 2)
    assert vector_map_check(sig, half_spinor_basis(sig, 1)) == "zero"
    full = [Mat.column([1 if i == j else 0 for i in range(4)]) for j in range(4)]
    assert vector_map_check(sig, full) == "surjective"
    assert vector_map_check(sig, []) == "zero"


@pytest.mark.parametrize("base,k", [(Signature(1, 3), 0), (Signature(1, 3), 2), (Signature(2, 2), 1)])
def test_ricci_flat_invariants_annihilated(base, k):
    h = ricci_flat(base, "trivial", k)
    inv = spinor_invariants(h)
    assert inv and eplus_annihilation_check(h.tractor_sig, inv)


def test_ricci_flat_with_metric_holonomy():
    h = ricci_flat(Signature(1, 5), "su", 2)
    inv = spinor_invariants(h)
    assert inv and eplus_annihilation_check(h.tractor_sig, inv)
    assert len(form_invariants(h, 2)) >= 1


def test_trivial_full_space_not_annihilated():
    tsig = Signature(2, 4)
    full = [Mat.column([1 if i == j else 0 for i in range(8)]) for j in range(8)]
    assert not eplus_annihilation_check(tsig, full)


def test_custom_generators_roundtrip(tmp_path):
    h = su_algebra(2)
    data = {"name": "su12", "tractor_signature": [2, 4],
            "generators": [[[format_scalar(z) for z in row] for row in g.mat.to_rows()] for g in h.generators]}
    path = tmp_path / "gens.json"
    path.write_text(json.dumps(data))
    h2 = load_custom(str(path))
    assert h2.dim == 8 and contains(h2, h) and contains(h, h2)
    assert len(spinor_invariants(h2)) == 2


def test_custom_rejects_non_skew(tmp_path):
    path = tmp_path / "bad.json"
    rows = [[0] * 6 for _ in range(6)]
    rows[0][1] = 1
    path.write_text(json.dumps({"tractor_signature": [2, 4], "generators": [rows]}))
    with pytest.raises(ValueError):
        load_custom(str(path))


def test_form_invariants_of_su_are_kaehler():
    h = su_algebra(2)
    (w,) = form_invariants(h, 2)
    k = kaehler_form(h.tractor_sig)
    key = (0, 1)
    assert w == k.scale(w.coeff(key) / k.coeff(key))
    assert isinstance(w, MixedForm)
