"""Shifted-vertical frames: spreading matrices, J tensors, positivity, symmetries."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grauert.catalog import catalog
from grauert.errors import DegenerateFrameError, PositivityError, TransversalityError
from grauert.flow import PhasePoint
from grauert.lagrangian import (
    LagrangianFrame,
    distribution_at,
    f_matrix_from_frame,
    j_tensor_from_frame,
    lifted_frames,
    orthonormal_tangent_basis,
    positivity_check,
    principal_angles,
    symplectic_form_matrix,
    vertical_frame,
)

J0 = np.block([[np.zeros((2, 2)), -np.eye(2)], [np.eye(2), np.zeros((2, 2))]]).astype(complex)
OMEGA4 = symplectic_form_matrix(2)


def sphere_point(ptheta=0.3, pphi=0.7):
    return PhasePoint("a", [math.pi / 2, 0.0], [ptheta, pphi])


def test_flat_frame_is_constant_graph():
    flat = catalog("flat_space", dim=2)
    z = PhasePoint("main", [0.5, -1.0], [0.8, 0.2])
    fr = distribution_at(flat, z, 1j)
    expected = np.vstack([1j * np.eye(2), np.eye(2)])
    assert np.max(np.abs(fr.columns - expected)) < 1e-12
    assert fr.lagrangian_residual() < 1e-12
    J = j_tensor_from_frame(fr)
    assert np.max(np.abs(J - J0)) < 1e-12
    mn, H = positivity_check(fr)
    assert abs(mn - 2.0) < 1e-12
    assert np.max(np.abs(H - 2.0 * np.eye(2))) < 1e-12
    for sig in (0.5, 0.25j, 0.4 + 0.3j):
        f = f_matrix_from_frame(flat, distribution_at(flat, z, sig))
        assert np.max(np.abs(f - sig * np.eye(2))) < 1e-11


def test_sphere_f_matrix_matches_closed_form():
    for a in (1.0, 1.7):
        sph = catalog("round_sphere", radius=a)
        z = sphere_point(0.3, 0.7)
        for sig in (0.4, 0.9, 1j, 0.3 + 0.5j):
            fr = distribution_at(sph, z, sig)
            f = f_matrix_from_frame(sph, fr)
            f_ref = sph.oracle.f_matrix("a", z.q, z.p, sig)
            assert np.max(np.abs(f - f_ref)) < 1e-9
            assert abs(f[0, 1]) < 1e-9 and abs(f[1, 0]) < 1e-9


def test_sphere_f_at_i_hyperbolic_tangent():
    sph = catalog("round_sphere", radius=1.0)
    z = sphere_point(0.0, 0.9)
    fr = distribution_at(sph, z, 1j)
    f = f_matrix_from_frame(sph, fr)
    assert abs(f[0, 0] - 1j) < 1e-10
    assert abs(f[1, 1] - 1j * math.tanh(0.9) / 0.9) < 1e-10
    assert f[1, 1].imag > 0
    mn, _ = positivity_check(fr)
    assert mn > 0


def test_j_tensor_properties_at_i():
    cases = [
        (catalog("round_sphere", radius=1.0), sphere_point(0.4, 0.5)),
        (catalog("round_sphere", radius=2.0), PhasePoint("a", [1.1, 0.8], [0.2, -0.6])),
        (catalog("surface_of_revolution"), PhasePoint("main", [0.5, -0.9], [0.45, 0.3])),
    ]
    for model, z in cases:
        fr = distribution_at(model, z, 1j)
        J = j_tensor_from_frame(fr)
        assert np.max(np.abs(J.imag)) < 1e-9
        assert np.max(np.abs(J @ J + np.eye(4))) < 1e-9
        assert np.max(np.abs(J.T @ OMEGA4 @ J - OMEGA4)) < 1e-9
        G = OMEGA4 @ J
        assert np.max(np.abs(G - G.T)) < 1e-9
        assert np.linalg.eigvalsh(G.real).min() > 0
        # frame columns are +i eigenvectors
        assert np.max(np.abs(J @ fr.columns - 1j * fr.columns)) < 1e-8


def test_involution_flips_j():
    sph = catalog("round_sphere")
    z = sphere_point(0.35, 0.55)
    z_flip = PhasePoint(z.chart_id, z.q, -z.p)
    S = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
    J = j_tensor_from_frame(distribution_at(sph, z, 1j))
    J_flip = j_tensor_from_frame(distribution_at(sph, z_flip, 1j))
    assert np.max(np.abs(S @ J_flip @ S + J)) < 1e-9


def test_fiber_scaling_moves_time():
    cases = [
        (catalog("round_sphere"), sphere_point(0.2, 0.45), 2.0, 1j),
        (catalog("round_sphere"), sphere_point(0.2, 0.45), 0.5, 1j),
        (catalog("surface_of_revolution"), PhasePoint("main", [0.2, 0.6], [0.32, 0.24]), 1.6, 0.5j),
    ]
    for model, z, c, sig in cases:
        zc = PhasePoint(z.chart_id, z.q, c * z.p)
        F_left = distribution_at(model, zc, sig).columns
        Lam = np.diag([1.0, 1.0, c, c]).astype(complex)
        F_right = Lam @ distribution_at(model, z, c * sig).columns
        ang = principal_angles(F_left, F_right)
        assert np.max(ang) < 1e-8


def test_real_sigma_frame_not_transverse_to_conjugate():
    sph = catalog("round_sphere")
    fr = distribution_at(sph, sphere_point(), 0.6)
    with pytest.raises(TransversalityError):
        j_tensor_from_frame(fr)


def test_conjugate_degeneracy_detected():
    sph = catalog("round_sphere", radius=1.0)
    z = sphere_point(0.0, 1.0)  # speed 1, first spreading pole at pi/2
    fr = distribution_at(sph, z, math.pi / 2)
    with pytest.raises(DegenerateFrameError):
        f_matrix_from_frame(sph, fr)


def test_positivity_check_rejects_conjugate_graph():
    bad = LagrangianFrame(
        chart_id="main",
        q=np.zeros(2),
        p=np.zeros(2),
        sigma=1j,
        columns=np.vstack([-1j * np.eye(2), np.eye(2)]),
        backward_chart="main",
    )
    mn, _ = positivity_check(bad)
    assert abs(mn + 2.0) < 1e-12
    with pytest.raises(PositivityError):
        positivity_check(bad, raise_on_fail=True)


def test_orthonormal_basis_and_lifts():
    sph = catalog("round_sphere", radius=1.3)
    q = np.array([1.0, 0.4], dtype=complex)
    p = np.array([0.5, -0.2], dtype=complex)
    V = orthonormal_tangent_basis(sph, "a", q, p)
    from grauert.geometry import metric_matrix

    g = metric_matrix(sph, "a", q)
    gram = V.T @ g @ V
    assert np.max(np.abs(gram - np.eye(2))) < 1e-12
    Xi, Eta = lifted_frames(sph, "a", q, p, V)
    # lifted frames are jointly symplectic: omega(xi_j, eta_k) = delta_jk after g-pairing
    M = np.hstack([Xi, Eta])
    pairing = M.T @ OMEGA4 @ M
    assert np.max(np.abs(pairing[:2, :2])) < 1e-12  # horizontal span is Lagrangian
    assert np.max(np.abs(pairing[2:, 2:])) < 1e-12  # vertical span is Lagrangian


def test_principal_angles_reference_cases():
    A = np.vstack([np.eye(2), np.zeros((2, 2))])
    B = np.vstack([np.zeros((2, 2)), np.eye(2)])
    assert np.max(np.abs(principal_angles(A, A))) < 1e-12
    assert np.max(np.abs(principal_angles(A, B) - math.pi / 2)) < 1e-12


@settings(max_examples=12, deadline=None)
@given(
    pt=st.floats(-0.7, 0.7),
    pp=st.floats(0.2, 0.8),
    tau=st.floats(0.15, 0.8),
)
def test_sphere_f_diagonal_in_adapted_basis(pt, pp, tau):
    sph = catalog("round_sphere")
    z = sphere_point(pt, pp)
    fr = distribution_at(sph, z, tau * 1j)
    f = f_matrix_from_frame(sph, fr)
    f_ref = sph.oracle.f_matrix("a", z.q, z.p, tau * 1j)
    assert np.max(np.abs(f - f_ref)) < 1e-8
    assert fr.lagrangian_residual() < 1e-10
