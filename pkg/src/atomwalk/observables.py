"""Measurable two-photon statistics: Gamma(t, tau), G(tau) and pattern matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .lattice import DetectorId, WalkParams, detectors
from .polyexp import NumericPolyExp, quadratic_curve
from .single_photon import linear_walk_amplitudes
from .two_photon import BilinearCorrelation, WalkCorrelators

Normalization = Literal["raw", "max"]


@dataclass
class PatternMatrix:
    """G(tau) over all ordered detector pairs at a fixed delay."""

    N: int
    tau: float
    values: np.ndarray
    normalization: str = "raw"

    @property
    def detectors(self) -> tuple[DetectorId, ...]:
        return detectors(self.N)

    def index(self, det: DetectorId) -> int:
        return self.detectors.index(det)

    def __getitem__(self, pair: tuple[DetectorId, DetectorId]) -> float:
        return float(self.values[self.index(pair[0]), self.index(pair[1])])

    def normalized(self) -> "PatternMatrix":
        top = float(self.values.max())
        vals = self.values / top if top > 0 else self.values.copy()
        return PatternMatrix(self.N, self.tau, vals, "max")

    def mirrored(self) -> np.ndarray:
        """Values re-indexed under x -> -x, L <-> R on both detectors."""
        perm = [self.index(d.mirror()) for d in self.detectors]
        return self.values[np.ix_(perm, perm)]

    def rows(self):
        for i, d1 in enumerate(self.detectors):
            for j, d2 in enumerate(self.detectors):
                yield d1, d2, float(self.values[i, j])


def gamma_density(amp: BilinearCorrelation, t: float, tau: float) -> float:
    """Time-ordered density ``|<vac| b2(t+tau) b1(t) |init_2>|^2``."""
    return float(abs(amp(t, tau)) ** 2)


def ordered_g(amp: BilinearCorrelation, tau: float) -> float:
    """``int_0^inf dt Gamma(t, tau)`` for one time ordering, closed form."""
    fs = [f for f, _ in amp.terms]
    gs = np.array([g(tau) for _, g in amp.terms])
    m = np.array([[(fk * fl.conj()).integrate() for fl in fs] for fk in fs])
    return float(np.real(gs @ m @ gs.conj()))


def ordered_g_curve(amp: BilinearCorrelation) -> NumericPolyExp:
    out = NumericPolyExp()
    for fk, gk in amp.terms:
        for fl, gl in amp.terms:
            w = (fk * fl.conj()).integrate()
            out = out + (gk * gl.conj()) * w
    return out


def g_tau(amp12: BilinearCorrelation, amp21: BilinearCorrelation, tau: float) -> float:
    """G(tau) from both time orderings of one detector pair."""
    return ordered_g(amp12, tau) + ordered_g(amp21, tau)


class TwoPhotonStatistics:
    """Fast observables on top of :class:`WalkCorrelators`.

    ``int dt |amp(t, tau)|^2`` is ``o(tau)^T M o(tau)^*`` with ``M`` the Gram
    matrix of the earlier detector's ``in`` functions and ``o`` the later
    detector's ``out`` functions, so every quantity is analytic in tau.
    """

    def __init__(self, params: WalkParams | WalkCorrelators):
        self.corr = params if isinstance(params, WalkCorrelators) else WalkCorrelators(params)
        self.params = self.corr.params
        self.N = self.params.steps
        self.detectors = detectors(self.N)

    def _ordered_matrix(self, tau: float) -> np.ndarray:
        """``g[i, j] = int dt Gamma_{first=i, second=j}(t, tau)``."""
        outs = {d: p(tau) for d, p in self.corr.packed_out.items()}
        n = len(self.detectors)
        g = np.empty((n, n))
        for i, d1 in enumerate(self.detectors):
            m = self.corr.in_gram[d1]
            for j, d2 in enumerate(self.detectors):
                o = outs[d2]
                g[i, j] = np.real(o @ m @ o.conj())
        return g

    def ordered_g(self, first: DetectorId, second: DetectorId, tau: float) -> float:
        o = self.corr.packed_out[second](tau)
        return float(np.real(o @ self.corr.in_gram[first] @ o.conj()))

    def g(self, det1: DetectorId, det2: DetectorId, tau: float) -> float:
        return self.ordered_g(det1, det2, tau) + self.ordered_g(det2, det1, tau)

    def g_curve(self, det1: DetectorId, det2: DetectorId) -> NumericPolyExp:
        """G(tau) for the pair as an explicit polynomial-exponential in tau."""
        scale = self.params.gamma
        c12 = quadratic_curve(self.corr.in_gram[det1], self.corr.packed_out[det2], scale)
        c21 = quadratic_curve(self.corr.in_gram[det2], self.corr.packed_out[det1], scale)
        return c12 + c21

    def pattern(self, tau: float, normalization: Normalization = "raw") -> PatternMatrix:
        g = self._ordered_matrix(tau)
        pm = PatternMatrix(self.N, float(tau), g + g.T)
        return pm.normalized() if normalization == "max" else pm

    def total_probability(self) -> float:
        m = sum(self.corr.in_gram.values())
        q = sum(self.corr.out_gram.values())
        return float(np.real(np.sum(m * q)))


def pattern_matrix(params: WalkParams, tau: float, normalization: Normalization = "raw") -> PatternMatrix:
    return TwoPhotonStatistics(params).pattern(tau, normalization)


def total_probability(params: WalkParams) -> float:
    return TwoPhotonStatistics(params).total_probability()


# -- linear reference walk ---------------------------------------------------
def linear_envelope(params: WalkParams, tau) -> np.ndarray:
    """Pair-independent tau dependence ``2 kappa exp(-2 kappa tau)`` of the linear G."""
    return 2 * params.kappa * np.exp(-2 * params.kappa * np.asarray(tau, dtype=float))


def linear_weights(params: WalkParams) -> np.ndarray:
    """``2 |alpha_1|^2 |alpha_2|^2`` over ordered detector pairs."""
    amps = linear_walk_amplitudes(params)
    p = np.array([abs(amps[d]) ** 2 for d in detectors(params.steps)])
    return 2 * np.outer(p, p)


def linear_g_tau(det1: DetectorId, det2: DetectorId, params: WalkParams, tau) -> np.ndarray:
    """G(tau) of two independent photons on the linear board.

    The ordered density is ``2 |a1 a2|^2 phi(t)^2 phi(t+tau)^2`` with
    ``phi^2 = 2 kappa exp(-2 kappa t)``; integrating over t and adding both
    orderings gives ``weight * 2 kappa exp(-2 kappa tau)``.
    """
    ds = detectors(params.steps)
    w = linear_weights(params)[ds.index(det1), ds.index(det2)]
    return w * linear_envelope(params, tau)


def linear_pattern(params: WalkParams, tau: float, normalization: Normalization = "raw") -> PatternMatrix:
    vals = linear_weights(params) * float(linear_envelope(params, tau))
    pm = PatternMatrix(params.steps, float(tau), vals)
    return pm.normalized() if normalization == "max" else pm


def linear_total_probability(params: WalkParams) -> float:
    # each ordered pair: int dtau (weight / 2) * 2 kappa e^{-2 kappa tau}
    return float(np.sum(linear_weights(params)) / 2)


def relative_l1(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(a - b).sum() / np.abs(b).sum())


def same_detector_mass(pm: PatternMatrix) -> float:
    return float(np.trace(pm.values))


def opposite_side_mass(pm: PatternMatrix) -> float:
    """Mass on pairs whose detectors sit on opposite sides (x1 * x2 < 0)."""
    xs = np.array([d.x for d in pm.detectors])
    mask = np.outer(xs, xs) < 0
    return float(pm.values[mask].sum())


def local_maximum(values: np.ndarray, i: int, j: int) -> bool:
    """Entry strictly exceeds its (up to 8) matrix neighbours."""
    n, m = values.shape
    v = values[i, j]
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            a, b = i + di, j + dj
            if 0 <= a < n and 0 <= b < m and values[a, b] >= v:
                return False
    return True


def tau_grid(tau_max: float = 10.0, points: int = 500) -> np.ndarray:
    return np.linspace(0.0, tau_max, points)


__all__ = [
    "PatternMatrix",
    "TwoPhotonStatistics",
    "gamma_density",
    "g_tau",
    "linear_g_tau",
    "linear_pattern",
    "ordered_g",
    "ordered_g_curve",
    "pattern_matrix",
    "total_probability",
]
