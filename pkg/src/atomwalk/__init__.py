"""Two-photon statistics of a Galton board built from single-atom beamsplitters."""

from .lattice import DetectorId, Site, WalkParams, detectors, sites
from .observables import (
    PatternMatrix,
    TwoPhotonStatistics,
    linear_pattern,
    pattern_matrix,
    total_probability,
)
from .single_photon import detector_probabilities, linear_probabilities
from .two_photon import WalkCorrelators

__version__ = "0.1.0"

__all__ = [
    "DetectorId",
    "PatternMatrix",
    "Site",
    "TwoPhotonStatistics",
    "WalkCorrelators",
    "WalkParams",
    "detector_probabilities",
    "detectors",
    "linear_pattern",
    "linear_probabilities",
    "pattern_matrix",
    "sites",
    "total_probability",
    "__version__",
]
