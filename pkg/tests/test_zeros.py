import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gcfdecim import (
    CascadeSpec,
    ConvergenceError,
    DegenerateZeroError,
    SpecError,
    comb_tf,
    displacement_hn,
    displacement_hp,
    gcf3_tf_oracle,
    match_zeros,
    nominal_zeros_hn,
    nominal_zeros_hp,
    root_oracle,
)
from gcfdecim.polyphase import section_hp
from gcfdecim.zeros import stage_polynomial


def _spec(D1, D2=4, q=0.79):
    pp = int(np.log2(D1)) - 1
    return CascadeSpec(pp + 1 + int(np.log2(D2)), pp, q)


def _check_moves(nominal, pred, moved, rel=0.05):
    actual = match_zeros(nominal, moved) - nominal
    scale = np.abs(pred).max()
    live = np.abs(pred) > 1e-9 * scale
    assert np.all(np.abs(actual - pred)[live] <= rel * np.abs(pred[live]))
    # zeros the first-order model pins in place (e.g. z = -1) barely move
    assert np.all(np.abs(actual[~live]) < 1e-6 * scale)


def test_root_oracle_trivial():
    assert np.allclose(root_oracle([1, 1]).zeros, [-1])
    z = np.sort_complex(root_oracle(comb_tf(1, 4)).zeros)
    assert np.allclose(z, np.sort_complex(np.array([-1, 1j, -1j])), atol=1e-14)


def test_root_oracle_zero_roots_and_errors():
    assert np.allclose(np.sort(root_oracle([1.0, -2.0, 0.0]).zeros.real), [0.0, 2.0])
    with pytest.raises(SpecError):
        root_oracle([1.0])
    with pytest.raises(SpecError):
        root_oracle([0.0, 1.0])
    with pytest.raises(ConvergenceError) as info:
        root_oracle(np.poly(np.arange(1, 30)), maxiter=1)
    assert info.value.residuals is not None


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=20).filter(lambda c: abs(c[0]) > 1e-3))
def test_root_oracle_residuals(coeffs):
    r = root_oracle(coeffs)
    assert len(r) == len(coeffs) - 1
    # conjugate-closed set for a real polynomial
    assert np.allclose(np.sort_complex(r.zeros), np.sort_complex(np.conj(r.zeros)), atol=1e-6)


@pytest.mark.parametrize("D1", [2, 4, 8, 16, 32, 64])
def test_hp_count_and_circle(D1):
    z = nominal_zeros_hp(_spec(D1))
    assert len(z) == 3 * D1 - 3
    assert z.circle_error() < 1e-10


def test_hp_collapse_at_zero_rotation():
    z = nominal_zeros_hp(_spec(2, q=0.0))
    assert np.allclose(z.zeros, -1)
    assert z.multiplicities.tolist() == [3, 3, 3]


@pytest.mark.parametrize("D1", [4, 8, 32])
def test_hp_families_are_roots(D1):
    spec = _spec(D1)
    nom = nominal_zeros_hp(spec)
    found = match_zeros(nom, root_oracle(section_hp(spec).raw))
    assert np.max(np.abs(np.angle(found) - nom.angles)) < 1e-8


def test_oracle_on_gcf8():
    spec = _spec(8)
    r = root_oracle(gcf3_tf_oracle(8, spec.alpha))
    assert len(r) == 21 and r.circle_error() < 1e-10


def test_hn_zeros_are_roots():
    spec = _spec(8)
    nom = nominal_zeros_hn(spec)
    assert len(nom) == 3 * (8 + 16)
    assert np.max(np.abs(match_zeros(nom, root_oracle(stage_polynomial(spec))) - nom.zeros)) < 1e-12


def test_zero_delta_gives_zero_displacement():
    spec = _spec(8)
    assert np.all(displacement_hp(spec, 0.0) == 0)
    assert np.all(displacement_hn(spec, 0.0) == 0)


def test_hp_displacement_vs_oracle():
    spec = _spec(8)
    raw = section_hp(spec).raw
    for d in (1e-7, 1e-6):
        _check_moves(nominal_zeros_hp(spec).zeros, displacement_hp(spec, d), root_oracle(raw + d))


def test_hp_displacement_nonuniform():
    spec = _spec(8)
    raw = section_hp(spec).raw
    dh = 1e-7 * np.random.default_rng(7).standard_normal(raw.size)
    _check_moves(nominal_zeros_hp(spec).zeros, displacement_hp(spec, dh), root_oracle(raw + dh))


def test_hp_displacement_error_is_second_order():
    spec = _spec(8)
    raw = section_hp(spec).raw
    nom = nominal_zeros_hp(spec).zeros
    errs = []
    for d in (1e-7, 1e-6, 1e-5):
        dh = np.zeros(raw.size)
        dh[0] = d  # breaks the palindrome so every zero moves
        pred = displacement_hp(spec, dh)
        errs.append(np.max(np.abs(match_zeros(nom, root_oracle(raw + dh)) - nom - pred)))
    slope = np.polyfit([-7, -6, -5], np.log10(errs), 1)[0]
    assert abs(slope - 2) < 0.3


def test_hp_single_tap_error_leaves_circle():
    spec = _spec(8)
    dh = np.zeros(22)
    dh[0] = 1e-4
    moved = root_oracle(section_hp(spec).raw + dh)
    assert moved.circle_error() > 1e-5


def test_hn_displacement_vs_oracle():
    spec = _spec(8)
    for d in (1e-7, 1e-6):
        moved = root_oracle(stage_polynomial(spec, d))
        assert moved.circle_error() < 1e-10
        _check_moves(nominal_zeros_hn(spec).zeros, displacement_hn(spec, d), moved)


def test_hn_per_stage_errors():
    spec = _spec(8, D2=8)
    dr = [1e-7, -2e-7, 3e-7]
    _check_moves(nominal_zeros_hn(spec).zeros, displacement_hn(spec, dr), root_oracle(stage_polynomial(spec, dr)))


@settings(max_examples=30, deadline=None)
@given(r=st.floats(-0.99, 2.99), dr=st.floats(-1e-3, 1e-3))
def test_stage_stays_on_circle(r, dr):
    assert root_oracle([1, r + dr, r + dr, 1]).circle_error() < 1e-10


def test_hn_much_smaller_than_hp():
    for D1 in (8, 16, 32, 64):
        spec = _spec(D1)
        assert np.abs(displacement_hn(spec, 1e-4)).max() < 0.1 * np.abs(displacement_hp(spec, 1e-4)).max()


def test_hp_worst_case_grows_with_d1_on_unit_gain_taps():
    worst = [np.abs(displacement_hp(_spec(D1), 1e-4, normalized=True)).max() for D1 in (8, 16, 32, 64)]
    assert np.all(np.diff(worst) > 0)


def test_degenerate_zero_signalled():
    with pytest.raises(DegenerateZeroError) as info:
        displacement_hp(_spec(8, q=0.0), 1e-6)
    assert info.value.indices


def test_delta_length_checked():
    with pytest.raises(SpecError):
        displacement_hp(_spec(8), np.zeros(3))
    with pytest.raises(SpecError):
        nominal_zeros_hn(CascadeSpec.from_decimation(8))
