"""Two-excitation correlators and the two-photon detection amplitude.

Equal-time functions (rotating frame, ``init_2`` the normalized two-photon
pulse):

* ``bb(t) = <vac| b_in(t) b_in(t) |init_2>``,
* ``C[s](t) = <vac| (-i a_s(t)) b_in(t) |init_2>``,
* ``E[{s, s'}](t) = <vac| (-i a_s(t)) (-i a_s'(t)) |init_2>``, zero on the
  diagonal (two-level atoms).

Unequal-time amplitudes ``<vac| O2(t + tau) O1(t) |init_2>`` are resolved by
inserting the one-excitation identity at time ``t``.  The intermediate states
are the incoming pulse shape on the source waveguide (``PULSE_STATE``) and one
excited atom per site, which gives

    amp(t, tau) = sum_k out_k(tau) * in_k(t)

with ``in_k`` built from equal-time functions and ``out_k`` from
single-excitation propagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .lattice import (
    DetectorId,
    Site,
    WalkParams,
    detector_expansion,
    detectors,
    predecessors,
    sites,
    source_coefficient,
)
from .polyexp import NumericPolyExp, Packed, PolyExp, gram, pack, pe_sum, solve_decay_ode
from .single_photon import (
    PULSE,
    basis_for,
    boundary_amplitude,
    compute_atomic_amplitudes,
    compute_propagators,
    detector_wavefunction_single,
)

PAIR_RATE = (2, 0)


class _Boundary:
    """Operator descriptor for the input field on the source-fed waveguide."""

    def __repr__(self) -> str:
        return "BOUNDARY"


BOUNDARY = _Boundary()
PULSE_STATE = "pulse"
Operator = Union[_Boundary, Site]


def pair_key(s: Site, t: Site) -> tuple[Site, Site]:
    return (s, t) if s <= t else (t, s)


def compute_bb(params: WalkParams) -> PolyExp:
    return PolyExp.monomial(basis_for(params), (0, 2), 2 * math.sqrt(2) * params.kappa)


def compute_C(amps: dict[Site, PolyExp], params: WalkParams) -> dict[Site, PolyExp]:
    # b_in(t)|init_2> = sqrt(2) * <pulse at t> * |init_1>
    factor = boundary_amplitude(params).scale(math.sqrt(2))
    return {s: a * factor for s, a in amps.items()}


def compute_E(
    C: dict[Site, PolyExp], params: WalkParams
) -> dict[tuple[Site, Site], PolyExp]:
    """Solve the pair hierarchy in order of increasing ``n + n'``."""
    basis = basis_for(params)
    g = params.gamma
    sg = math.sqrt(g)
    ss = sites(params.steps)
    zero = PolyExp.zero(basis)
    E: dict[tuple[Site, Site], PolyExp] = {}
    pairs = [(a, b) for i, a in enumerate(ss) for b in ss[i:]]
    pairs.sort(key=lambda p: (p[0].n + p[1].n, p))
    for s, t in pairs:
        if s == t:
            E[(s, t)] = zero
            continue
        parts = []
        for p in predecessors(s):
            if p != t:
                parts.append(E[pair_key(p, t)].scale(-g))
        for p in predecessors(t):
            if p != s:
                parts.append(E[pair_key(s, p)].scale(-g))
        ws, wt = source_coefficient(s), source_coefficient(t)
        if ws:
            parts.append(C[t].scale(-sg * ws))
        if wt:
            parts.append(C[s].scale(-sg * wt))
        E[(s, t)] = solve_decay_ode(PAIR_RATE, pe_sum(parts, basis))
    return E


@dataclass
class BilinearCorrelation:
    """``value(t, tau) = sum_k f_k(t) g_k(tau)``."""

    terms: list[tuple[NumericPolyExp, NumericPolyExp]] = field(default_factory=list)

    def __call__(self, t, tau):
        return sum((f(t) * g(tau) for f, g in self.terms), 0j)

    def __add__(self, other: "BilinearCorrelation") -> "BilinearCorrelation":
        return BilinearCorrelation(self.terms + other.terms)

    def scaled(self, c: complex) -> "BilinearCorrelation":
        return BilinearCorrelation([(f * c, g) for f, g in self.terms])


class WalkCorrelators:
    """All closed-form correlators of one parameter set, built lazily."""

    def __init__(self, params: WalkParams):
        self.params = params
        self.basis = basis_for(params)
        self.N = params.steps
        self.sites = sites(self.N)
        self.detectors = detectors(self.N)

    @cached_property
    def amps(self) -> dict[Site, PolyExp]:
        return compute_atomic_amplitudes(self.params)

    @cached_property
    def propagators(self) -> dict[Site, dict[Site, PolyExp]]:
        return {s: compute_propagators(s, self.params) for s in self.sites}

    @cached_property
    def bb(self) -> PolyExp:
        return compute_bb(self.params)

    @cached_property
    def C(self) -> dict[Site, PolyExp]:
        return compute_C(self.amps, self.params)

    @cached_property
    def E(self) -> dict[tuple[Site, Site], PolyExp]:
        return compute_E(self.C, self.params)

    def e(self, s: Site, t: Site) -> PolyExp:
        return self.E[pair_key(s, t)]

    def D(self, src: Site, dst: Site) -> PolyExp:
        return self.propagators[src].get(dst) or PolyExp.zero(self.basis)

    @property
    def pulse_state_norm(self) -> float:
        # overlap factor of the incoming pulse shape with |init_1>
        return math.sqrt(2 * self.params.kappa)

    # -- projector insertion ---------------------------------------------
    def projector_decompose(self, later: Operator, earlier: Operator) -> BilinearCorrelation:
        """``<vac| later(t + tau) earlier(t) |init_2>`` as a bilinear sum.

        Atom operators are ``-i a_s``; the boundary is the bare input field.
        """
        mu_tau = PolyExp.monomial(self.basis, PULSE).to_numeric()
        if isinstance(later, _Boundary):
            # the input field at a later time only sees the incoming pulse
            f = self.bb if isinstance(earlier, _Boundary) else self.C[earlier]
            return BilinearCorrelation([(f.to_numeric(), mu_tau)])
        terms = []
        eq_time = self.bb if isinstance(earlier, _Boundary) else self.C[earlier]
        terms.append(
            (eq_time.to_numeric(), self.amps[later].scale(1 / self.pulse_state_norm).to_numeric())
        )
        for s2 in self.sites:
            d = self.D(s2, later)
            if d.is_zero():
                continue
            f = self.C[s2] if isinstance(earlier, _Boundary) else self.e(s2, earlier)
            if f.is_zero():
                continue
            terms.append((f.to_numeric(), d.to_numeric()))
        return BilinearCorrelation(terms)

    # -- factorized detector amplitude ------------------------------------
    def intermediates(self) -> list:
        return [PULSE_STATE, *self.sites]

    def in_functions(self, det: DetectorId) -> list[PolyExp]:
        """``in_k(t)`` for the earlier detection at ``det``."""
        w, chain = detector_expansion(det, self.N)
        sg = math.sqrt(self.params.gamma)
        first = [self.bb.scale(w)] if w else []
        first += [self.C[s].scale(sg) for s in chain]
        out = [pe_sum(first, self.basis)]
        for s2 in self.sites:
            parts = [self.C[s2].scale(w)] if w else []
            parts += [self.e(s2, s).scale(sg) for s in chain if s != s2]
            out.append(pe_sum(parts, self.basis))
        return out

    def out_functions(self, det: DetectorId) -> list[PolyExp]:
        """``out_k(tau)`` for the later detection at ``det``."""
        _, chain = detector_expansion(det, self.N)
        sg = math.sqrt(self.params.gamma)
        psi = detector_wavefunction_single(det, self.amps, self.params)
        out = [psi.scale(1 / self.pulse_state_norm)]
        for s2 in self.sites:
            out.append(pe_sum([self.D(s2, s).scale(sg) for s in chain], self.basis))
        return out

    def detector_pair_amplitude(self, det1: DetectorId, det2: DetectorId) -> BilinearCorrelation:
        """``<vac| b_det2(t + tau) b_det1(t) |init_2>`` (det1 fires first)."""
        return BilinearCorrelation(
            [
                (f.to_numeric(), g.to_numeric())
                for f, g in zip(self.in_functions(det1), self.out_functions(det2))
                if not (f.is_zero() or g.is_zero())
            ]
        )

    def detector_pair_amplitude_expanded(
        self, det1: DetectorId, det2: DetectorId
    ) -> BilinearCorrelation:
        """Same amplitude assembled term by term from :meth:`projector_decompose`."""
        sg = math.sqrt(self.params.gamma)

        def ops(det):
            w, chain = detector_expansion(det, self.N)
            return ([(w, BOUNDARY)] if w else []) + [(sg, s) for s in chain]

        total = BilinearCorrelation()
        for w2, o2 in ops(det2):
            for w1, o1 in ops(det1):
                total = total + self.projector_decompose(o2, o1).scaled(w1 * w2)
        return total

    # -- packed families for fast observables ------------------------------
    @cached_property
    def packed_in(self) -> dict[DetectorId, Packed]:
        return {
            d: pack([f.to_numeric() for f in self.in_functions(d)], self.params.gamma)
            for d in self.detectors
        }

    @cached_property
    def packed_out(self) -> dict[DetectorId, Packed]:
        return {
            d: pack([f.to_numeric() for f in self.out_functions(d)], self.params.gamma)
            for d in self.detectors
        }

    @cached_property
    def in_gram(self) -> dict[DetectorId, np.ndarray]:
        """``M[d][k, l] = int_0^inf in_k(t) conj(in_l(t)) dt``.

        The in-functions mix ``exp(-gamma t)`` and ``exp(-2 gamma t)`` parts
        whose polynomial coefficients are large and nearly cancel, so the
        moment sum loses digits at large N.  The equal-time state
        ``z = (bb, C, E)`` obeys ``z' = L z`` with ``L`` lower triangular, hence
        ``S = int z z^H`` solves ``L S + S L^H = -z(0) z(0)^H`` and every Gram
        matrix is ``R_d S R_d^H``.
        """
        S = self.state_gram
        return {d: (r := self.in_rows(d)) @ S @ r.conj().T for d in self.detectors}

    def in_gram_moments(self) -> dict[DetectorId, np.ndarray]:
        """Same Gram matrices from the polynomial-exponential moments."""
        return {d: gram(p, p) for d, p in self.packed_in.items()}

    # -- equal-time state as a linear system -----------------------------
    @cached_property
    def state_index(self) -> dict:
        """Positions of ``bb`` (key ``None``), ``C[s]`` (key ``s``) and ``E`` (pair keys)."""
        idx: dict = {None: 0}
        for s in self.sites:
            idx[s] = len(idx)
        pairs = [(a, b) for i, a in enumerate(self.sites) for b in self.sites[i + 1 :]]
        pairs.sort(key=lambda q: (q[0].n + q[1].n, q))
        for q in pairs:
            idx[q] = len(idx)
        return idx

    def state_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """``(L, z0)`` with ``z' = L z`` reproducing ``bb``, ``C`` and ``E``."""
        p = self.params
        g, sg = p.gamma, math.sqrt(p.gamma)
        idx = self.state_index
        L = np.zeros((len(idx), len(idx)), dtype=complex)
        L[0, 0] = -2 * p.mu
        for s in self.sites:
            i = idx[s]
            L[i, i] = -(g + p.mu)
            for q in predecessors(s):
                L[i, idx[q]] = -g
            L[i, 0] = -sg * source_coefficient(s)
        for key, i in idx.items():
            if not isinstance(key, tuple):
                continue
            s, u = key
            L[i, i] = -2 * g
            for q in predecessors(s):
                if q != u:
                    L[i, idx[pair_key(q, u)]] -= g
            for q in predecessors(u):
                if q != s:
                    L[i, idx[pair_key(s, q)]] -= g
            L[i, idx[u]] -= sg * source_coefficient(s)
            L[i, idx[s]] -= sg * source_coefficient(u)
        z0 = np.zeros(len(idx), dtype=complex)
        z0[0] = self.bb(0.0)
        return L, z0

    @cached_property
    def state_gram(self) -> np.ndarray:
        L, z0 = self.state_matrix()
        return solve_continuous_lyapunov(L, -np.outer(z0, z0.conj()))

    def in_rows(self, det: DetectorId) -> np.ndarray:
        """Rows ``R`` with ``in_k(t) = (R z(t))_k``, matching :meth:`in_functions`."""
        w, chain = detector_expansion(det, self.N)
        sg = math.sqrt(self.params.gamma)
        idx = self.state_index
        r = np.zeros((len(self.sites) + 1, len(idx)), dtype=complex)
        r[0, 0] = w
        for s in chain:
            r[0, idx[s]] += sg
        for k, s2 in enumerate(self.sites, start=1):
            r[k, idx[s2]] += w
            for s in chain:
                if s != s2:
                    r[k, idx[pair_key(s2, s)]] += sg
        return r

    def state_vector(self, t) -> np.ndarray:
        """``z(t)`` evaluated from the closed-form functions."""
        out = np.empty(len(self.state_index), dtype=complex)
        for key, i in self.state_index.items():
            f = self.bb if key is None else self.C[key] if isinstance(key, Site) else self.E[key]
            out[i] = f(t)
        return out

    @cached_property
    def out_gram(self) -> dict[DetectorId, np.ndarray]:
        return {d: gram(p, p) for d, p in self.packed_out.items()}
