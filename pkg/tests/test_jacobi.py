"""Real-time spreading samples, two-route agreement, Pade continuation, pole finding."""

import math

import numpy as np
import pytest

from grauert.catalog import catalog
from grauert.errors import ConjugatePointError, PadeDegeneracyError
from grauert.flow import PhasePoint
from grauert.jacobi import (
    continue_f_to_i,
    f_by_jacobi_transport,
    f_samples,
    first_f_singularity,
    j_tensor_from_f,
    pade_eval,
    pade_fit,
    pade_poles,
)
from grauert.lagrangian import distribution_at, j_tensor_from_frame


def test_f_samples_match_sphere_closed_form():
    sph = catalog("round_sphere", radius=1.0)
    z = PhasePoint("a", [math.pi / 2, 0.0], [0.3, 0.7])
    taus = np.linspace(-1.0, 1.0, 9)
    fs = f_samples(sph, z, taus)
    for i, tau in enumerate(taus):
        ref = sph.oracle.f_matrix("a", z.q, z.p, tau) if tau != 0 else np.zeros((2, 2))
        assert np.max(np.abs(fs[i] - ref)) < 1e-9


def test_jacobi_transport_route_agrees():
    # no jacobian inversion on this route; still the same spreading matrix
    cases = [
        (catalog("round_sphere"), PhasePoint("a", [1.2, 0.4], [0.5, 0.6])),
        (catalog("surface_of_revolution"), PhasePoint("main", [0.4, -0.2], [0.7, 0.5])),
        (catalog("flat_space", dim=2), PhasePoint("main", [0.0, 0.0], [1.0, 2.0])),
    ]
    for model, z in cases:
        for tau in (0.45, -0.8):
            direct = f_samples(model, z, [tau])[0]
            seeded = f_by_jacobi_transport(model, z, tau)
            assert np.max(np.abs(direct - seeded)) < 1e-8


def test_flat_f_linear():
    flat = catalog("flat_space", dim=2)
    z = PhasePoint("main", [1.0, -1.0], [0.3, 0.4])
    taus = [0.5, 1.5, -2.0]
    fs = f_samples(flat, z, taus)
    for tau, f in zip(taus, fs):
        assert np.max(np.abs(f - tau * np.eye(2))) < 1e-11


def test_pade_recovers_tangent():
    xs = np.cos(np.pi * np.arange(21) / 20)
    ys = np.tan(1.2 * xs)
    p, q = pade_fit(xs, ys, 8, 8)
    # continuation off the sample interval, against exact values
    assert abs(pade_eval(p, q, 1.2) - math.tan(1.44)) < 1e-9
    assert abs(pade_eval(p, q, 1j) - 1j * math.tanh(1.2)) < 1e-10
    poles = pade_poles(q)
    nearest = poles[np.argmin(np.abs(poles - np.pi / 2.4))]
    assert abs(nearest - np.pi / 2.4) < 1e-8


def test_pade_degeneracies():
    xs = np.linspace(-1, 1, 21)
    # identically zero data fits as the zero function, no complaint
    p0, q0 = pade_fit(xs, np.zeros(21), 8, 8)
    assert abs(pade_eval(p0, q0, 0.7 + 0.2j)) < 1e-12
    with pytest.raises(PadeDegeneracyError):
        pade_fit(xs[:5], np.tan(xs[:5]), 8, 8)
    # a kink cannot be reproduced by a low-degree rational function
    with pytest.raises(PadeDegeneracyError):
        pade_fit(xs, np.abs(xs), 2, 2)
    p, q = pade_fit(xs, 1.0 / (1.0 + xs**2), 2, 2)
    with pytest.raises(PadeDegeneracyError):
        pade_eval(p, q, 1j)  # the fitted denominator really vanishes there


def test_continue_f_to_i_sphere():
    for rho in (0.3, 0.8, 1.2):
        sph = catalog("round_sphere")
        z = PhasePoint("a", [math.pi / 2, 0.0], [0.0, rho])
        window = 0.75 * (math.pi / 2) / rho
        f_i, diag = continue_f_to_i(sph, z, window=min(window, 2.0))
        ref = sph.oracle.f_matrix_at_i("a", z.q, z.p)
        assert np.max(np.abs(f_i - ref)) < 1e-7
        # fitted poles recover the first conjugate time for the tan entry
        poles = diag["poles"][(1, 1)]
        real_poles = poles[np.abs(poles.imag) < 1e-3 * np.abs(poles.real)]
        nearest = real_poles[np.argmin(np.abs(real_poles - math.pi / (2 * rho)))]
        assert abs(nearest.real - math.pi / (2 * rho)) < 1e-3


def test_j_cross_route():
    sph = catalog("round_sphere")
    z = PhasePoint("a", [1.3, -0.4], [0.28, 0.45])
    f_i, _ = continue_f_to_i(sph, z, window=1.5)
    J_pade = j_tensor_from_f(sph, z, f_i)
    J_direct = j_tensor_from_frame(distribution_at(sph, z, 1j))
    assert np.max(np.abs(J_pade - J_direct)) < 1e-6


def test_first_singularity_sphere():
    sph = catalog("round_sphere")
    for rho in (1.0, 0.7):
        z = PhasePoint("a", [math.pi / 2, 0.0], [0.0, rho])
        t = first_f_singularity(sph, z, tau_max=3.0)
        assert t is not None
        assert abs(t - math.pi / (2 * rho)) < 1e-3


def test_first_singularity_none_on_flat():
    torus = catalog("flat_torus")
    z = PhasePoint("main", [0.1, 0.2], [0.9, 0.3])
    assert first_f_singularity(torus, z, tau_max=1.0) is None
    # zero section: frames are constant
    sph = catalog("round_sphere")
    z0 = PhasePoint("a", [1.0, 0.0], [0.0, 0.0])
    assert first_f_singularity(sph, z0, tau_max=0.5) is None


def test_sample_on_pole_raises():
    sph = catalog("round_sphere")
    z = PhasePoint("a", [math.pi / 2, 0.0], [0.0, 1.0])
    with pytest.raises(ConjugatePointError):
        f_samples(sph, z, [math.pi / 2])
