import ast
import math
from pathlib import Path

import numpy as np
import pytest

import atomwalk.oracle as oracle
from atomwalk.lattice import Site, WalkParams
from atomwalk.oracle import compare_with_symbolic, rk4_integrate, rk4_propagators


def closed_form_first_atom(p, t):
    drive = math.sqrt(p.gamma / 2) * math.sqrt(2 * p.kappa)
    return -drive * (np.exp(-p.mu * t) - np.exp(-p.gamma * t)) / (p.gamma - p.mu)


def test_oracle_imports_only_lattice():
    tree = ast.parse(Path(oracle.__file__).read_text())
    top_level = {
        node.module
        for node in tree.body
        if isinstance(node, ast.ImportFrom) and node.level == 1
    }
    assert top_level == {"lattice"}


def test_first_atom_trajectory_at_fine_step():
    p = WalkParams(delta=1.0, steps=1)
    model, ts, A, C, E = rk4_integrate(p, t_max=10.0, dt=1e-4, sample_dt=0.01)
    i = model.index[Site(1, 1)]
    assert np.max(np.abs(A[:, i] - closed_form_first_atom(p, ts))) < 1e-10


def test_pair_diagonal_pinned():
    _, _, _, _, E = rk4_integrate(WalkParams(steps=2), t_max=3.0, dt=1e-2)
    assert np.all(np.diagonal(E, axis1=1, axis2=2) == 0)


def test_rk4_fourth_order():
    p = WalkParams(delta=1.0, steps=1)
    errs = []
    for dt in (0.2, 0.1):
        model, ts, A, _, _ = rk4_integrate(p, t_max=4.0, dt=dt)
        i = model.index[Site(1, 1)]
        errs.append(np.max(np.abs(A[:, i] - closed_form_first_atom(p, ts))))
    assert 12 < errs[0] / errs[1] < 20


def test_propagator_identity_start():
    _, ts, D = rk4_propagators(WalkParams(steps=2), t_max=1.0, dt=1e-2)
    np.testing.assert_allclose(D[0], np.eye(D.shape[1]))
    np.testing.assert_allclose(D[-1].diagonal(), np.exp(-1.0), rtol=1e-9)


def test_excitation_decays_after_drive():
    # observation only: atomic excitation settles to the slowly decaying pulse
    p = WalkParams(kappa=0.5, delta=1.0, steps=2)
    _, ts, A, _, _ = rk4_integrate(p, t_max=30.0, dt=1e-2)
    total = np.sum(np.abs(A) ** 2, axis=1)
    assert total[-1] < 1e-10 * total.max()


@pytest.mark.parametrize("delta", [1.0, 0.0])
def test_single_step_agreement(delta):
    report = compare_with_symbolic(WalkParams(delta=delta, steps=1), dt=1e-3)
    assert set(report) == {"A", "C", "E", "D", "detector_amplitude"}
    assert max(report.values()) < 1e-8
