import numpy as np
import pytest
from scipy.integrate import quad

from atomwalk.lattice import DetectorId, WalkParams, detectors
from atomwalk.observables import (
    PatternMatrix,
    TwoPhotonStatistics,
    gamma_density,
    g_tau,
    linear_envelope,
    linear_g_tau,
    linear_pattern,
    linear_total_probability,
    local_maximum,
    opposite_side_mass,
    ordered_g,
    ordered_g_curve,
    relative_l1,
    same_detector_mass,
    total_probability,
)
from atomwalk.single_photon import detector_probabilities


@pytest.fixture(scope="module")
def stats2():
    # broad pulse keeps quadrature cheap
    return TwoPhotonStatistics(WalkParams(kappa=0.2, delta=0.7, steps=2))


def test_ordered_g_matches_quadrature(stats2):
    c = stats2.corr
    d1, d2 = DetectorId(-2, "L"), DetectorId(0, "R")
    amp = c.detector_pair_amplitude(d1, d2)
    for tau in (0.0, 0.8, 3.0):
        num, _ = quad(lambda t: gamma_density(amp, t, tau), 0, np.inf, limit=400)
        assert ordered_g(amp, tau) == pytest.approx(num, rel=1e-7)
        assert stats2.ordered_g(d1, d2, tau) == pytest.approx(num, rel=1e-7)


def test_curves_agree_with_pointwise(stats2):
    c = stats2.corr
    d1, d2 = DetectorId(0, "L"), DetectorId(2, "R")
    a12 = c.detector_pair_amplitude(d1, d2)
    a21 = c.detector_pair_amplitude(d2, d1)
    curve = stats2.g_curve(d1, d2)
    generic = ordered_g_curve(a12) + ordered_g_curve(a21)
    for tau in (0.0, 0.5, 2.0, 7.0):
        ref = g_tau(a12, a21, tau)
        assert curve(tau).real == pytest.approx(ref, rel=1e-10)
        assert generic(tau).real == pytest.approx(ref, rel=1e-10)
        assert stats2.g(d1, d2, tau) == pytest.approx(ref, rel=1e-10)


def test_total_probability_equals_integrated_pattern(stats2):
    # G(d, d) holds both time orders of the same event, so it counts half
    total = 0.0
    ds = stats2.detectors
    for i, a in enumerate(ds):
        total += stats2.g_curve(a, a).integrate().real / 2
        for b in ds[i + 1 :]:
            total += stats2.g_curve(a, b).integrate().real
    assert total == pytest.approx(stats2.total_probability(), abs=1e-12)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_amplitude_scaling_is_quartic(stats2):
    amp = stats2.corr.detector_pair_amplitude(DetectorId(2, "R"), DetectorId(2, "R"))
    c = 0.3 + 0.4j
    scaled = amp.scaled(c).scaled(c)
    assert ordered_g(scaled, 0.6) == pytest.approx(abs(c) ** 4 * ordered_g(amp, 0.6), rel=1e-12)


def test_pattern_nonnegative_and_symmetric(stats2):
    for tau in (0.0, 0.7, 4.0):
        pm = stats2.pattern(tau)
        assert pm.values.min() >= 0
        np.testing.assert_array_equal(pm.values, pm.values.T)
        np.testing.assert_allclose(pm.mirrored(), pm.values, rtol=1e-10, atol=0)
        mx = stats2.pattern(tau, "max")
        assert mx.values.max() == pytest.approx(1.0)
        assert mx.normalization == "max"


@pytest.mark.parametrize("delta", [1.0, 0.0])
def test_large_delay_factorizes_into_single_photon_products(delta):
    # long after the first click the second photon is uncorrelated
    p = WalkParams(delta=delta, steps=3)
    P = detector_probabilities(p)
    v = np.array([P[d] for d in detectors(3)])
    ref = 2 * np.outer(v, v) * linear_envelope(p, 30.0)
    assert relative_l1(TwoPhotonStatistics(p).pattern(30.0).values, ref) < 1e-3


def test_linear_reference_properties():
    p = WalkParams(delta=1.0, steps=4)
    assert linear_total_probability(p) == pytest.approx(1.0, abs=1e-12)
    a = linear_pattern(p, 0.0, "max").values
    for tau in (0.7, 5.0, 40.0):
        np.testing.assert_allclose(linear_pattern(p, tau, "max").values, a, atol=1e-12)
    d1, d2 = DetectorId(-4, "L"), DetectorId(2, "R")
    pm = linear_pattern(p, 1.3)
    assert linear_g_tau(d1, d2, p, 1.3) == pytest.approx(pm[d1, d2])


def test_linear_resonant_pattern_concentrated_at_center():
    pm = linear_pattern(WalkParams(delta=0.0, steps=9), 0.0)
    central = sum(v for d1, d2, v in pm.rows() if abs(d1.x) <= 1 and abs(d2.x) <= 1)
    assert central == pytest.approx(pm.values.sum())


def test_feature_helpers():
    v = np.array([[1.0, 0.0, 2.0], [0.0, 5.0, 0.0], [3.0, 0.0, 1.0]])
    assert local_maximum(v, 1, 1)
    assert not local_maximum(v, 0, 0)
    pm = PatternMatrix(1, 0.0, np.arange(16.0).reshape(4, 4))
    assert same_detector_mass(pm) == 0 + 5 + 10 + 15
    # detectors -1L, -1R, +1L, +1R: opposite pairs are the off-diagonal 2x2 blocks
    assert opposite_side_mass(pm) == (2 + 3 + 6 + 7) + (8 + 9 + 12 + 13)
    assert relative_l1(np.ones(3), np.ones(3)) == 0


def test_total_probability_wrapper():
    assert total_probability(WalkParams(steps=1)) == pytest.approx(1.0, abs=1e-12)
