import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coupledfwm.coupledmode import (
    ExponentialCoupling,
    FiberCoupling,
    RectCoupling,
    SupermodeProvider,
    TabulatedCoupling,
    beat_length,
    constant_coupling,
    coupled_mode_matrix,
    coupling_eval,
    fiber_coupling,
    field_beat_length,
    mode_power_in_a,
    read_coupling_csv,
    rect_coupling,
    rect_exponential_fit,
    separation_for_kappa,
    supermode_fields,
    supermodes,
)
from coupledfwm.dispersion import DeviceGeometry, FiberParams, wavelength_to_omega
from coupledfwm.errors import DomainError

SMF = FiberParams()


def test_symmetric_pair_splits_by_kappa():
    k = 5.9e6
    sm = supermodes(k, k, 250.0)
    assert sm.psi == 250.0
    assert sm.beta_plus == k + 250.0 and sm.beta_minus == k - 250.0


def test_three_four_five():
    sm = supermodes(1e6 + 300, 1e6 - 300, 400.0)
    assert sm.delta_beta == 300 and sm.psi == 500
    assert sm.beta_plus == pytest.approx(1e6 + 500, abs=0)
    assert sm.beta_minus == pytest.approx(1e6 - 500, abs=0)


def test_decoupled_limit_labels():
    sm = supermodes(2e6, 3e6, 0.0)
    assert sm.psi == 5e5
    assert sm.beta_plus == 3e6 and sm.beta_minus == 2e6


def test_negative_kappa_rejected():
    with pytest.raises(ValueError):
        supermodes(1.0, 1.0, -1.0)


@settings(max_examples=200, deadline=None)
@given(ba=st.floats(1e6, 2e7), db=st.floats(-1e5, 1e5), k=st.floats(0, 1e5))
def test_supermode_invariants(ba, db, k):
    bb = ba - 2 * db
    sm = supermodes(ba, bb, k)
    assert sm.psi**2 - sm.delta_beta**2 - k**2 == pytest.approx(0, abs=1e-12 * sm.psi**2 + 1e-300)
    assert sm.beta_plus >= sm.beta_minus
    ev = np.linalg.eigvalsh(coupled_mode_matrix(ba, bb, k))
    assert ev[1] == pytest.approx(float(sm.beta_plus), rel=1e-14)
    assert ev[0] == pytest.approx(float(sm.beta_minus), rel=1e-14)


def test_fields_symmetric_limit():
    f = supermode_fields(0.0, 100.0)
    s = 1 / math.sqrt(2)
    assert f.even == pytest.approx((s, s), abs=1e-15)
    assert f.odd == pytest.approx((-s, s), abs=1e-15)


def test_fields_closed_form_ratio():
    k = 400.0
    db = 0.75 * k
    psi = 1.25 * k
    f = supermode_fields(db, k)
    # unnormalised ratios c_A/c_B = (δβ ± ψ)/κ
    assert f.even[0] / f.even[1] == pytest.approx((db + psi) / k, rel=1e-14)
    assert f.odd[0] / f.odd[1] == pytest.approx((db - psi) / k, rel=1e-14)
    for v in (f.even, f.odd):
        assert v[0] ** 2 + v[1] ** 2 == pytest.approx(1.0, abs=1e-12)


def test_fields_strong_asymmetry_localises():
    f = supermode_fields(10.0, 1.0)
    assert f.power_in_a("even") >= 0.99
    assert f.power_in_a("odd") <= 0.01


def test_fields_kappa_zero_and_degenerate():
    f = supermode_fields(5.0, 0.0)
    assert f.even == (1.0, 0.0) and f.odd == (0.0, 1.0)
    f = supermode_fields(-5.0, 0.0)
    assert f.even == (0.0, 1.0) and f.odd == (1.0, 0.0)
    f = supermode_fields(0.0, 0.0)
    assert f.degenerate


@settings(max_examples=300, deadline=None)
@given(db=st.floats(-1e6, 1e6), k=st.floats(1e-3, 1e6))
def test_fields_orthonormal(db, k):
    f = supermode_fields(db, k)
    e, o = np.array(f.even), np.array(f.odd)
    assert e @ e == pytest.approx(1, abs=1e-12)
    assert o @ o == pytest.approx(1, abs=1e-12)
    assert abs(e @ o) < 1e-12
    # eigenvector check against the coupled-mode matrix
    m = coupled_mode_matrix(db, -db, k)
    psi = math.hypot(db, k)
    assert np.allclose(m @ e, psi * e, atol=1e-9 * psi)
    assert np.allclose(m @ o, -psi * o, atol=1e-9 * psi)


def test_even_power_localisation_monotone():
    ratios = np.logspace(1, -3, 30)
    p = [supermode_fields(1.0, r).power_in_a("even") for r in ratios]
    assert np.all(np.diff(p) > 0) and p[-1] > 0.999999


def test_beat_lengths():
    assert beat_length(math.pi) == pytest.approx(1.0, rel=1e-15)
    assert beat_length(46e3) == pytest.approx(68.3e-6, rel=1e-3)
    assert beat_length(250.0) == pytest.approx(12.566e-3, rel=1e-4)
    assert field_beat_length(250.0) == pytest.approx(2 * beat_length(250.0))
    assert math.isinf(beat_length(0.0))
    with pytest.raises(ValueError):
        beat_length(-1.0)


# ---- coupling models


def test_fiber_coupling_trends():
    om15, om10 = wavelength_to_omega(1.55), wavelength_to_omega(1.064)
    k = [fiber_coupling(SMF, SMF, d, om15) for d in (10, 15, 20, 40, 80)]
    assert np.all(np.diff(k) < 0) and min(k) > 0
    assert k[-1] < 1e-6 * k[0]
    assert fiber_coupling(SMF, SMF, 20, om15) > fiber_coupling(SMF, SMF, 20, om10)


def test_fiber_coupling_overlap_rejected():
    with pytest.raises(DomainError):
        FiberCoupling(SMF, 7.0)


def test_separation_for_250():
    d = separation_for_kappa(SMF, 250.0, 1.55)
    assert 8.2 < d < 60
    assert fiber_coupling(SMF, SMF, d, wavelength_to_omega(1.55)) == pytest.approx(250.0, rel=1e-10)


def test_exponential_zero_rate_is_constant():
    m = ExponentialCoupling(123.0, 1.4, 0.0)
    om = wavelength_to_omega(np.linspace(0.5, 2.0, 11))
    assert np.all(coupling_eval(m, om) == 123.0)


def test_exponential_reference_value():
    m = ExponentialCoupling(46e3, 1.55, 2.3)
    assert coupling_eval(m, wavelength_to_omega(1.55)) == pytest.approx(46e3, rel=1e-14)


def test_exponential_fit_passes_through_points():
    m = ExponentialCoupling.fit(1.265, 1.1e4, 1.59, 3.0e4)
    assert m.kappa(wavelength_to_omega(1.265)) == pytest.approx(1.1e4, rel=1e-13)
    assert m.kappa(wavelength_to_omega(1.59)) == pytest.approx(3.0e4, rel=1e-13)


def test_tabulated_from_fiber_coupling(tmp_path):
    lam = np.linspace(1.0, 1.9, 64)
    k = fiber_coupling(SMF, SMF, 20.0, wavelength_to_omega(lam))
    t = TabulatedCoupling(lam, k)
    probe = np.linspace(1.01, 1.89, 97)
    ref = fiber_coupling(SMF, SMF, 20.0, wavelength_to_omega(probe))
    assert t.kappa(wavelength_to_omega(probe)) == pytest.approx(ref, rel=1e-6)
    p = tmp_path / "k.csv"
    p.write_text("# kappa table\nwavelength_um,kappa_per_m\n"
                 + "\n".join(f"{float(a)!r},{float(b)!r}" for a, b in zip(lam, k)))
    t2 = read_coupling_csv(p)
    assert t2.kappa(wavelength_to_omega(probe)) == pytest.approx(t.kappa(wavelength_to_omega(probe)), rel=1e-14)


def test_tabulated_coupling_validation():
    with pytest.raises(ValueError):
        TabulatedCoupling([1, 2, 3], [1, 1, 1])
    with pytest.raises(ValueError):
        TabulatedCoupling(np.linspace(1, 2, 10), -np.ones(10))
    t = TabulatedCoupling(np.linspace(1, 2, 10), np.zeros(10))
    assert t.kappa(wavelength_to_omega(1.5)) == 0.0
    with pytest.raises(DomainError):
        t.kappa(wavelength_to_omega(2.5))


def test_rect_coupling_trends():
    g = DeviceGeometry()
    om = wavelength_to_omega(np.array([1.3, 1.45, 1.59]))
    k = rect_coupling(g, om)
    assert np.all(k > 0) and np.all(np.diff(k) > 0)
    far = DeviceGeometry(separation_um=1.2)
    assert rect_coupling(far, om[1]) < k[1]
    fit = rect_exponential_fit(g, 1.265, 1.59)
    rc = RectCoupling(g)
    for lam in (1.265, 1.59):
        assert fit.kappa(wavelength_to_omega(lam)) == pytest.approx(rc.kappa(wavelength_to_omega(lam)), rel=1e-12)


def test_supermode_provider_matches_supermodes(si_guides):
    a, b = si_guides
    cpl = constant_coupling(2e4)
    om = wavelength_to_omega(np.linspace(1.3, 1.6, 5))
    odd = SupermodeProvider(a, b, cpl, "odd")
    ref = supermodes(a.beta(om), b.beta(om), 2e4).beta_minus
    assert odd.beta(om) == pytest.approx(ref, rel=1e-15)
    with pytest.raises(ValueError):
        SupermodeProvider(a, b, cpl, "plus")


def test_table1_odd_mode_lives_in_guide_a(si_guides, table1):
    a, b = si_guides
    p = mode_power_in_a(a, b, RectCoupling(table1), wavelength_to_omega(1.342), "odd")
    assert p > 0.9
