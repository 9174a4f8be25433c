"""Single-excitation correlators of the atom Galton board.

Conventions (rotating frame, atomic frequency removed):

* ``A[s](t) = <vac| -i a_s(t) |init_1>`` for the exponential one-photon pulse,
* ``D[src][dst](t) = <vac| a_dst(t) a_src^dag(0) |vac>``,
* a detector field is ``w * b_in + sqrt(gamma) * sum_chain (-i a_s)``.
"""

from __future__ import annotations

import math

import numpy as np

from .lattice import (
    SOURCE_WEIGHT,
    DetectorId,
    Site,
    WalkParams,
    detector_expansion,
    detectors,
    in_light_cone,
    predecessors,
    sites,
    source_coefficient,
)
from .polyexp import ExpBasis, PolyExp, pe_sum, solve_decay_ode

ATOM = (1, 0)  # lattice key of exp(-gamma t)
PULSE = (0, 1)  # lattice key of exp(-(kappa + i delta) t)


def basis_for(params: WalkParams) -> ExpBasis:
    return ExpBasis(float(params.gamma), params.mu)


def boundary_amplitude(params: WalkParams) -> PolyExp:
    """``<vac| b_in(t) |init_1>`` on the source-fed waveguide."""
    return PolyExp.monomial(basis_for(params), PULSE, math.sqrt(2 * params.kappa))


def compute_atomic_amplitudes(params: WalkParams) -> dict[Site, PolyExp]:
    basis = basis_for(params)
    g = params.gamma
    drive = boundary_amplitude(params).scale(-math.sqrt(g))
    amps: dict[Site, PolyExp] = {}
    for s in sites(params.steps):
        parts = [amps[p].scale(-g) for p in predecessors(s)]
        w = source_coefficient(s)
        if w:
            parts.append(drive.scale(w))
        amps[s] = solve_decay_ode(ATOM, pe_sum(parts, basis))
    return amps


def compute_propagators(src: Site, params: WalkParams) -> dict[Site, PolyExp]:
    """Atom-to-atom propagators from ``src``; absent sites are outside the light cone."""
    basis = basis_for(params)
    g = params.gamma
    out = {src: PolyExp.monomial(basis, ATOM)}
    for s in sites(params.steps):
        if s.n <= src.n or not in_light_cone(src, s):
            continue
        parts = [out[p].scale(-g) for p in predecessors(s) if p in out]
        out[s] = solve_decay_ode(ATOM, pe_sum(parts, basis))
    return out


def detector_wavefunction_single(
    det: DetectorId, amps: dict[Site, PolyExp], params: WalkParams
) -> PolyExp:
    w, chain = detector_expansion(det, params.steps)
    sg = math.sqrt(params.gamma)
    parts = [amps[s].scale(sg) for s in chain]
    if w:
        parts.append(boundary_amplitude(params).scale(w))
    return pe_sum(parts, basis_for(params))


def detector_probabilities(params: WalkParams) -> dict[DetectorId, float]:
    """``int_0^inf |psi_det|^2 dt`` for every detector."""
    amps = compute_atomic_amplitudes(params)
    out = {}
    for det in detectors(params.steps):
        f = detector_wavefunction_single(det, amps, params).to_numeric()
        out[det] = (f * f.conj()).integrate().real
    return out


def linear_coefficients(params: WalkParams) -> tuple[complex, complex]:
    """Monochromatic (transmission, reflection) of one atom at detuning ``delta``."""
    dk = params.delta
    den = 1j * params.gamma + dk
    return dk / den, -1j * params.gamma / den


def linear_walk_amplitudes(params: WalkParams) -> dict[DetectorId, complex]:
    """Detector amplitudes of one photon on the equivalent linear board."""
    t, r = linear_coefficients(params)
    N = params.steps
    # amplitudes moving right / left into step n, indexed by site x
    right = {1: complex(SOURCE_WEIGHT)}
    left = {-1: complex(SOURCE_WEIGHT)}
    for n in range(1, N + 1):
        out_r: dict[int, complex] = {}
        out_l: dict[int, complex] = {}
        for x in range(-n, n + 1, 2):
            u = right.get(x, 0j)
            v = left.get(x, 0j)
            out_r[x] = t * u + r * v
            out_l[x] = r * u + t * v
        if n == N:
            res = {}
            for x in range(-N, N + 1, 2):
                res[DetectorId(x, "L")] = out_l[x]
                res[DetectorId(x, "R")] = out_r[x]
            return res
        right = {x + 1: a for x, a in out_r.items()}
        left = {x - 1: a for x, a in out_l.items()}
    raise AssertionError("unreachable")


def linear_probabilities(params: WalkParams) -> np.ndarray:
    amps = linear_walk_amplitudes(params)
    return np.array([abs(amps[d]) ** 2 for d in detectors(params.steps)])
