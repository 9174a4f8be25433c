"""Fixed-step RK4 integration of the correlation hierarchy.

This is an independent numerical route to the same equations the closed-form
modules solve.  It shares only the lattice bookkeeping: drives, couplings and
the projected restart used for unequal-time amplitudes are written out here
directly on dense arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import WalkParams, detector_expansion, detectors, predecessors, sites, source_coefficient


def rk4(f, y0: np.ndarray, t0: float, dt: float, n_steps: int, sample_every: int = 1):
    """Classical RK4; returns sample times and states every ``sample_every`` steps."""
    y = np.array(y0, dtype=complex)
    t = t0
    ts = [t]
    ys = [y.copy()]
    for k in range(1, n_steps + 1):
        k1 = f(t, y)
        k2 = f(t + dt / 2, y + dt / 2 * k1)
        k3 = f(t + dt / 2, y + dt / 2 * k2)
        k4 = f(t + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + k * dt
        if k % sample_every == 0:
            ts.append(t)
            ys.append(y.copy())
    return np.array(ts), np.array(ys)


@dataclass
class HierarchyModel:
    """Dense-array form of the lattice couplings for one parameter set."""

    params: WalkParams

    def __post_init__(self):
        p = self.params
        self.sites = sites(p.steps)
        self.n = len(self.sites)
        idx = {s: i for i, s in enumerate(self.sites)}
        # K = I + (predecessor adjacency): d(-i a)/dt = -gamma K (-i a) - drive
        K = np.eye(self.n)
        for s in self.sites:
            for q in predecessors(s):
                K[idx[s], idx[q]] = 1.0
        self.K = K
        self.src = np.array([source_coefficient(s) for s in self.sites])
        self.dets = detectors(p.steps)
        H = np.zeros((len(self.dets), self.n))
        w = np.zeros(len(self.dets))
        for j, d in enumerate(self.dets):
            w[j], chain = detector_expansion(d, p.steps)
            for s in chain:
                H[j, idx[s]] = math.sqrt(p.gamma)
        self.H = H
        self.w = w
        self.index = idx

    # incoming pulse on the source waveguide and its two-photon counterpart
    def pulse(self, t) -> complex:
        p = self.params
        return math.sqrt(2 * p.kappa) * np.exp(-complex(p.kappa, p.delta) * t)

    def pulse_pair(self, t) -> complex:
        p = self.params
        return 2 * math.sqrt(2) * p.kappa * np.exp(-2 * complex(p.kappa, p.delta) * t)

    def rhs_equal_time(self, t: float, y: np.ndarray) -> np.ndarray:
        """State ``[A (n), C (n), E (n*n)]``; E diagonal is pinned to zero."""
        g = self.params.gamma
        n = self.n
        sg = math.sqrt(g)
        A = y[:n]
        C = y[n : 2 * n]
        E = y[2 * n :].reshape(n, n)
        dA = -g * self.K @ A - sg * self.src * self.pulse(t)
        mu = complex(self.params.kappa, self.params.delta)
        dC = -mu * C - g * self.K @ C - sg * self.src * self.pulse_pair(t)
        dE = -g * (self.K @ E + E @ self.K.T)
        dE -= sg * (np.outer(self.src, C) + np.outer(C, self.src))
        np.fill_diagonal(dE, 0.0)
        return np.concatenate([dA, dC, dE.ravel()])


def rk4_integrate(params: WalkParams, t_max: float = 10.0, dt: float = 1e-3, sample_dt: float | None = None):
    """Integrate A, C and E on ``[0, t_max]``.

    Returns ``(model, times, A[t, s], C[t, s], E[t, s, s'])``.
    """
    model = HierarchyModel(params)
    n = model.n
    steps = int(round(t_max / dt))
    every = max(1, int(round((sample_dt or dt) / dt)))
    y0 = np.zeros(2 * n + n * n, dtype=complex)
    ts, ys = rk4(model.rhs_equal_time, y0, 0.0, dt, steps, every)
    return model, ts, ys[:, :n], ys[:, n : 2 * n], ys[:, 2 * n :].reshape(len(ts), n, n)


def rk4_propagators(params: WalkParams, t_max: float = 10.0, dt: float = 1e-3, sample_dt: float | None = None):
    """``D[t, dst, src]`` with every atom as a source, integrated together."""
    model = HierarchyModel(params)
    n = model.n
    g = params.gamma
    steps = int(round(t_max / dt))
    every = max(1, int(round((sample_dt or dt) / dt)))

    def f(t, y):
        return (-g * model.K @ y.reshape(n, n)).ravel()

    ts, ys = rk4(f, np.eye(n, dtype=complex).ravel(), 0.0, dt, steps, every)
    return model, ts, ys.reshape(len(ts), n, n)


def rk4_detector_amplitudes(
    params: WalkParams,
    t_samples,
    tau_samples,
    dt: float = 1e-3,
    trajectory=None,
):
    """``amp[i, k, d1, d2] = <vac| b_d2(t_i + tau_k) b_d1(t_i) |init_2>``.

    Equal-time values at each ``t_i`` seed a restart in tau of the
    one-excitation equations, driven by the free incoming pulse.
    ``trajectory`` may pass in an :func:`rk4_integrate` result on the same
    ``dt`` reaching ``max(t_samples)``.
    """
    t_samples = np.asarray(t_samples, dtype=float)
    tau_samples = np.asarray(tau_samples, dtype=float)
    g = params.gamma
    sg = math.sqrt(g)
    mu = complex(params.kappa, params.delta)

    t_max = float(t_samples.max())
    steps_t = int(round(t_max / dt))
    if trajectory is None:
        trajectory = rk4_integrate(params, t_max=max(t_max, dt), dt=dt)
    model, ts, A, C, E = trajectory
    rows = [int(round(t / dt)) for t in t_samples]
    if steps_t == 0:
        rows = [0] * len(t_samples)
    n = model.n
    nd = len(model.dets)
    H = model.H
    w = model.w

    # X[i, s', d1] = <(-i a_s'(t_i + tau)) b_d1(t_i)>, beta[i, d1] = <b_in(t_i + tau) b_d1(t_i)> at tau = 0
    X0 = np.empty((len(rows), n, nd), dtype=complex)
    beta0 = np.empty((len(rows), nd), dtype=complex)
    for i, r in enumerate(rows):
        X0[i] = np.outer(C[r], w) + E[r] @ H.T
        beta0[i] = w * model.pulse_pair(ts[r]) + H @ C[r]

    def f(tau, x):
        X = x.reshape(len(rows), n, nd)
        drive = np.exp(-mu * tau) * np.einsum("s,id->isd", model.src, beta0)
        dX = -g * np.einsum("ab,ibd->iad", model.K, X) - sg * drive
        return dX.ravel()

    tau_max = float(tau_samples.max())
    steps_tau = int(round(tau_max / dt))
    cols = [int(round(tau / dt)) for tau in tau_samples]
    taus, xs = rk4(f, X0.ravel(), 0.0, dt, max(steps_tau, 1), 1)
    out = np.empty((len(rows), len(cols), nd, nd), dtype=complex)
    for k, c in enumerate(cols):
        X = xs[c].reshape(len(rows), n, nd)
        beta = beta0 * np.exp(-mu * taus[c])
        # b_d2 = w_d2 b_in + sum_chain sqrt(gamma) (-i a)
        out[:, k] = beta[:, :, None] * w[None, None, :] + np.einsum("es,isd->ide", H, X)
    return model, out


def compare_with_symbolic(
    params: WalkParams,
    t_samples=(0.5, 1.0, 2.0, 5.0, 10.0),
    tau_samples=(0.0, 0.5, 1.0, 2.0, 5.0),
    dt: float = 1e-3,
) -> dict[str, float]:
    """Max absolute deviation per correlator class between RK4 and closed form."""
    from .two_photon import WalkCorrelators

    corr = WalkCorrelators(params)
    t_samples = np.asarray(t_samples, dtype=float)
    trajectory = rk4_integrate(params, t_max=max(float(t_samples.max()), dt), dt=dt)
    model, ts, A, C, E = trajectory
    rows = [int(round(t / dt)) for t in t_samples]
    tt = ts[rows]
    report = {}
    report["A"] = max(float(np.max(np.abs(A[rows, i] - corr.amps[s](tt)))) for i, s in enumerate(model.sites))
    report["C"] = max(float(np.max(np.abs(C[rows, i] - corr.C[s](tt)))) for i, s in enumerate(model.sites))
    report["E"] = max(
        float(np.max(np.abs(E[rows, i, j] - corr.e(s, q)(tt))))
        for i, s in enumerate(model.sites)
        for j, q in enumerate(model.sites)
    )
    _, pts, D = rk4_propagators(params, t_max=float(t_samples.max()), dt=dt)
    report["D"] = max(
        float(np.max(np.abs(D[rows, j, i] - corr.D(s, q)(tt))))
        for i, s in enumerate(model.sites)
        for j, q in enumerate(model.sites)
    )
    _, amp = rk4_detector_amplitudes(params, t_samples, tau_samples, dt=dt, trajectory=trajectory)
    worst = 0.0
    for a, d1 in enumerate(model.dets):
        for b, d2 in enumerate(model.dets):
            bil = corr.detector_pair_amplitude(d1, d2)
            for i, t in enumerate(t_samples):
                vals = np.array([bil(t, tau) for tau in tau_samples])
                worst = max(worst, float(np.max(np.abs(amp[i, :, a, b] - vals))))
    report["detector_amplitude"] = worst
    return report
