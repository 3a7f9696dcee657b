import math

import numpy as np
import pytest
from scipy.linalg import expm

from bellsim.oracle_fock import (
    CutoffError,
    FockVector,
    KERR_PHASE,
    apply_beam_splitter,
    apply_displacement,
    apply_kerr,
    coherent_state,
    corr_physical_oracle,
    default_cutoff,
    fidelity,
    fock_state,
    hermite_functions,
    joint_pdf_fock,
    joint_pdf_grid,
    physical_rotation,
    required_cutoff,
    split_squeezed_vacuum,
    squeeze_matrix,
    squeezed_vacuum_fock,
    two_mode,
    two_mode_squeezed_fock,
    vacuum,
)


def dense_squeeze_oracle(r, cutoff):
    """Independent oracle: dense matrix exponential of the squeeze generator."""
    n = cutoff + 1
    a = np.diag(np.sqrt(np.arange(1.0, n)), k=1)
    vec = np.zeros(n)
    vec[0] = 1.0
    return expm(0.5 * r * (a.T @ a.T - a @ a)) @ vec


class TestSqueezedVacuum:
    def test_zero_squeezing_is_vacuum(self):
        state = squeezed_vacuum_fock(0.0, 20)
        assert state.amps[0] == 1.0
        assert np.all(state.amps[1:] == 0.0)

    def test_odd_amplitudes_exactly_zero(self):
        state = squeezed_vacuum_fock(1.0, 62)
        assert np.all(state.amps[1::2] == 0.0)

    def test_amplitudes_match_dense_exponential_oracle(self):
        # the dense oracle misrepresents the top of its own ladder, so give
        # it headroom and compare the bulk
        state = squeezed_vacuum_fock(0.8, 80)
        oracle = dense_squeeze_oracle(0.8, 80)
        assert np.max(np.abs(state.amps[:41] - oracle[:41])) < 1e-10

    def test_mean_photon_number(self):
        state = squeezed_vacuum_fock(1.0, 80)
        n_mean = float(np.sum(np.arange(81) * np.abs(state.amps) ** 2))
        assert n_mean == pytest.approx(math.sinh(1.0) ** 2, rel=1e-6)

    def test_negative_squeezing_flips_amplitude_signs(self):
        plus = squeezed_vacuum_fock(0.6, 30)
        minus = squeezed_vacuum_fock(-0.6, 30)
        assert minus.amps[2] == pytest.approx(-plus.amps[2])
        assert minus.amps[4] == pytest.approx(plus.amps[4])

    def test_insufficient_cutoff_raises(self):
        with pytest.raises(CutoffError):
            squeezed_vacuum_fock(1.5, 30)

    def test_required_cutoff_controls_deficit(self):
        n = required_cutoff(1.5, 1e-8)
        state = squeezed_vacuum_fock(1.5, n)
        assert 1.0 - state.norm() ** 2 <= 1e-8


class TestBeamSplitter:
    def test_vacuum_invariant(self):
        state = two_mode(vacuum(5), vacuum(5))
        out = apply_beam_splitter(state, math.pi / 2.0)
        assert np.max(np.abs(out.amps - state.amps)) < 1e-14

    def test_single_photon_balanced_split(self):
        state = two_mode(fock_state(1, 4), fock_state(0, 4))
        out = apply_beam_splitter(state, math.pi / 2.0)
        assert out.amps[1, 0] == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)
        assert out.amps[0, 1] == pytest.approx(-1.0 / math.sqrt(2.0), abs=1e-12)

    def test_two_photon_interference_vs_dense_oracle(self):
        state = two_mode(fock_state(1, 4), fock_state(1, 4))
        out = apply_beam_splitter(state, math.pi / 2.0)
        # dense oracle on the full two-mode space
        n = 5
        a = np.kron(np.diag(np.sqrt(np.arange(1.0, n)), k=1), np.eye(n))
        b = np.kron(np.eye(n), np.diag(np.sqrt(np.arange(1.0, n)), k=1))
        gen = 0.25 * math.pi * (a.T @ b - a @ b.T)
        dense = (expm(gen) @ state.amps.reshape(-1)).reshape(n, n)
        assert np.max(np.abs(out.amps - dense)) < 1e-10
        # photon bunching: (|2,0> - |0,2>)/sqrt(2)
        assert out.amps[2, 0] == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-12)
        assert out.amps[0, 2] == pytest.approx(-1.0 / math.sqrt(2.0), abs=1e-12)
        assert abs(out.amps[1, 1]) < 1e-12

    def test_composition(self):
        state = two_mode(fock_state(2, 20), fock_state(1, 20))
        seq = apply_beam_splitter(apply_beam_splitter(state, 0.7), 0.5)
        direct = apply_beam_splitter(state, 1.2)
        assert np.max(np.abs(seq.amps - direct.amps)) < 1e-8

    def test_norm_preserved(self):
        state = two_mode(squeezed_vacuum_fock(0.8, 40), vacuum(40))
        out = apply_beam_splitter(state, -math.pi / 2.0)
        assert out.norm() == pytest.approx(state.norm(), abs=1e-12)


class TestKerr:
    def test_vacuum_component_invariant(self):
        state = two_mode(coherent_state(1.0, 30), vacuum(30))
        out = apply_kerr(state, "a")
        assert out.amps[0, 0] == pytest.approx(state.amps[0, 0], abs=1e-14)

    def test_single_photon_phase(self):
        out = apply_kerr(fock_state(1, 4), "a", KERR_PHASE)
        assert out.amps[1] == pytest.approx(-1j, abs=1e-14)

    def test_coherent_state_becomes_balanced_cat(self):
        beta, cutoff = 2.0, 40
        out = apply_kerr(coherent_state(beta, cutoff), "a")
        cat = FockVector(
            (np.exp(-1j * math.pi / 4.0) * coherent_state(beta, cutoff).amps
             + np.exp(1j * math.pi / 4.0) * coherent_state(-beta, cutoff).amps) / math.sqrt(2.0))
        assert fidelity(out, cat) >= 1.0 - 1e-8


class TestDisplacement:
    def test_displaced_vacuum_is_coherent(self):
        out = apply_displacement(two_mode(vacuum(40), vacuum(40)), "a", 1.5 + 0.5j)
        target = coherent_state(1.5 + 0.5j, 40)
        overlap = abs(np.vdot(target.amps, out.amps[:, 0])) ** 2
        assert overlap >= 1.0 - 1e-8

    def test_round_trip(self):
        state = two_mode(coherent_state(0.3, 40), vacuum(40))
        back = apply_displacement(apply_displacement(state, "a", 0.9j), "a", -0.9j)
        assert np.max(np.abs(back.amps - state.amps)) < 1e-8

    def test_norm_preserved(self):
        state = two_mode(coherent_state(1.0, 40), vacuum(40))
        out = apply_displacement(state, "a", 1.0 + 1.0j)
        assert out.norm() == pytest.approx(1.0, abs=1e-10)

    def test_edge_population_raises(self):
        with pytest.raises(CutoffError):
            apply_displacement(two_mode(vacuum(6), vacuum(6)), "a", 3.0)


class TestPhysicalRotation:
    def test_zero_angle_is_parity(self):
        beta, cutoff = 1.5, 40
        state = two_mode(coherent_state(beta, cutoff), vacuum(cutoff))
        out = physical_rotation(state, "a", 0.0, 1.0)
        flipped = two_mode(coherent_state(-beta, cutoff), vacuum(cutoff))
        overlap = abs(np.vdot(flipped.amps, out.amps)) ** 2
        assert overlap >= 1.0 - 1e-10

    def test_four_component_superposition(self):
        # Kerr-displace-Kerr on |beta> equals the four-component cat
        # (1/2)[e^{iu b}(-i|b+iu> + |-b-iu>) + e^{-iu b}(|-b+iu> + i|b-iu>)]
        beta, u, cutoff = 2.0, 0.3, 60
        state = physical_rotation(two_mode(coherent_state(beta, cutoff), vacuum(cutoff)), "a", u, 1.0)
        one_mode = FockVector(state.amps[:, 0])
        target = FockVector(0.5 * (
            np.exp(1j * u * beta) * (-1j * coherent_state(beta + 1j * u, cutoff).amps
                                     + coherent_state(-beta - 1j * u, cutoff).amps)
            + np.exp(-1j * u * beta) * (coherent_state(-beta + 1j * u, cutoff).amps
                                        + 1j * coherent_state(beta - 1j * u, cutoff).amps)))
        assert fidelity(one_mode, target) >= 0.999

    def test_unitary(self):
        state = split_squeezed_vacuum(1.0, 62)
        out = physical_rotation(state, "b", 0.2, 1.0)
        assert out.norm() == pytest.approx(state.norm(), abs=1e-10)


class TestJointPdf:
    def test_vacuum_density(self):
        state = two_mode(vacuum(10), vacuum(10))
        assert joint_pdf_fock(state, 0.3, -0.8) == pytest.approx(
            math.exp(-0.3 ** 2 - 0.8 ** 2) / math.pi, abs=1e-12)

    def test_single_photon_density(self):
        state = two_mode(fock_state(1, 10), fock_state(0, 10))
        x, y = 0.7, -0.2
        assert joint_pdf_fock(state, x, y) == pytest.approx(
            2.0 * x * x / math.pi * math.exp(-x * x - y * y), abs=1e-12)

    def test_total_integral_one(self):
        state = physical_rotation(split_squeezed_vacuum(1.0, 62), "a", 0.15, 1.0)
        axis = np.linspace(-14.0, 14.0, 561)
        pdf = joint_pdf_grid(state, axis, axis)
        h = axis[1] - axis[0]
        assert float(pdf.sum()) * h * h == pytest.approx(1.0, abs=1e-6)

    def test_hermite_orthonormality(self):
        xs = np.linspace(-12, 12, 4001)
        psi = hermite_functions(xs, 12)
        gram = psi.T @ psi * (xs[1] - xs[0])
        assert np.max(np.abs(gram - np.eye(13))) < 1e-8


class TestSplitResource:
    def test_positive_quadrature_covariance(self):
        r = 1.0
        state = split_squeezed_vacuum(r, 62)
        axis = np.linspace(-12, 12, 481)
        pdf = joint_pdf_grid(state, axis, axis)
        h = axis[1] - axis[0]
        cov = float((axis[:, None] * axis[None, :] * pdf).sum()) * h * h
        assert cov == pytest.approx((math.exp(2.0 * r) - 1.0) / 4.0, rel=1e-6)

    def test_two_mode_squeeze_identity(self):
        # splitting an x-squeezed mode = local squeezers on a two-mode
        # squeezed vacuum of half the strength; the cutoff must satisfy the
        # 1e-8 norm invariant or the fidelity shortfall is just the input's
        # truncation deficit
        r = 1.0
        cutoff = required_cutoff(r)
        lhs = apply_beam_splitter(
            two_mode(squeezed_vacuum_fock(-r, cutoff), vacuum(cutoff)), math.pi / 2.0)
        local = squeeze_matrix(-r / 2.0, cutoff)
        tm = two_mode_squeezed_fock(r / 2.0, cutoff)
        rhs = FockVector(local @ tm.amps @ local.T)
        assert fidelity(lhs, rhs) >= 1.0 - 1e-6


class TestCorrPhysicalOracle:
    def test_orthant_anchor(self):
        for r in (0.5, 1.0):
            assert corr_physical_oracle(0.0, 0.0, r, 1.0, grid_points=401) == pytest.approx(
                2.0 / math.pi * math.asin(math.tanh(r)), abs=2e-3)

    def test_displacement_rescaling_invariance(self):
        base = corr_physical_oracle(0.1, -0.05, 1.0, 1.0, grid_points=401)
        scaled = corr_physical_oracle(0.2, -0.1, 1.0, 2.0, grid_points=401)
        assert scaled == pytest.approx(base, abs=1e-6)

    def test_matches_exact_closed_amplitude(self):
        from bellsim.physical import corr_physical_exact
        value = corr_physical_oracle(0.1, -0.05, 1.0, 1.0, grid_points=401)
        assert value == pytest.approx(
            corr_physical_exact(0.1, -0.05, 1.0, 1.0, grid_points=401), abs=2e-4)

    def test_default_cutoff_covers_tail(self):
        assert default_cutoff(1.0) >= required_cutoff(1.0)
        assert default_cutoff(1.5) >= 160
