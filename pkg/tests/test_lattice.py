import pytest

from atomwalk.lattice import (
    DetectorId,
    InvalidDetector,
    Site,
    WalkParams,
    WaveguideId,
    detector_expansion,
    detector_waveguide,
    detectors,
    in_light_cone,
    predecessors,
    sites,
    source_coefficient,
)


@pytest.mark.parametrize("N", [1, 2, 5, 9])
def test_site_and_detector_counts(N):
    assert len(sites(N)) == N * (N + 3) // 2
    assert len(detectors(N)) == 2 * N + 2


def test_nine_step_board_sizes():
    n = len(sites(9))
    assert n == 54
    assert n * (n + 1) // 2 == 1485


def test_invalid_sites_rejected():
    for n, x in [(0, 0), (2, 1), (1, 3), (3, -5)]:
        with pytest.raises(ValueError):
            Site(n, x)


def test_predecessors_lie_on_backward_rays():
    s = Site(4, 0)
    expected = {Site(3, -1), Site(3, 1), Site(2, -2), Site(2, 2)}
    assert set(predecessors(s)) == expected
    for q in predecessors(Site(6, 2)):
        assert abs(q.x - 2) == 6 - q.n


def test_first_step_has_no_predecessors():
    assert predecessors(Site(1, 1)) == ()
    assert source_coefficient(Site(1, 1)) == source_coefficient(Site(1, -1)) > 0
    assert source_coefficient(Site(2, 0)) == 0


def test_detector_waveguides():
    N = 3
    assert detector_waveguide(DetectorId(3, "R"), N) == WaveguideId(0, "+")
    assert detector_waveguide(DetectorId(-3, "L"), N) == WaveguideId(0, "-")
    w, chain = detector_expansion(DetectorId(3, "R"), N)
    assert w > 0 and chain == (Site(1, 1), Site(2, 2), Site(3, 3))
    w, chain = detector_expansion(DetectorId(1, "L"), N)
    assert w == 0 and chain == (Site(2, 2), Site(3, 1))


def test_each_site_feeds_exactly_two_detectors():
    N = 4
    count = {s: 0 for s in sites(N)}
    for d in detectors(N):
        for s in detector_expansion(d, N)[1]:
            count[s] += 1
    assert set(count.values()) == {2}


def test_detector_parsing_and_mirror():
    d = DetectorId.parse("-5,l")
    assert d == DetectorId(-5, "L")
    assert str(d) == "-5,L"
    assert d.mirror() == DetectorId(5, "R")
    with pytest.raises(InvalidDetector):
        DetectorId.parse("5,X")
    with pytest.raises(InvalidDetector):
        DetectorId.parse("nonsense")
    with pytest.raises(InvalidDetector):
        detector_waveguide(DetectorId(2, "R"), 3)


def test_light_cone():
    assert in_light_cone(Site(1, 1), Site(3, -1))
    assert not in_light_cone(Site(2, 2), Site(3, -1))


def test_params_validation():
    assert WalkParams().mu == complex(0.002, 1.0)
    for bad in ({"kappa": 0}, {"gamma": -1}, {"steps": 0}, {"delta": float("nan")}):
        with pytest.raises(ValueError):
            WalkParams(**bad)
