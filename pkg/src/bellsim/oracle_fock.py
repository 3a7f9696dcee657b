"""Truncated photon-number-basis simulation of the physical-rotation path.

State preparation (single-mode squeezed vacuum split on a 50:50 beam
splitter), the Kerr + displacement + Kerr local rotation, and joint
homodyne statistics are all evaluated exactly in a truncated Fock space.
The beam splitter conserves total photon number, so it is applied
block-exactly; Kerr is a diagonal phase; the displacement is the matrix
exponential of the truncated generator (exactly unitary, with the top of
the ladder monitored for population leakage).

Joint densities built here are nonnegative and normalized by construction,
which is what lets this module adjudicate the closed-form surface of
:mod:`bellsim.physical` at small squeezing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import expm

from .model import ORACLE_MIN_SQUEEZING
from .quadrature import (
    GridPdf,
    grid_pdf_from_values,
    sign_correlation,
    smooth_inefficiency,
    symmetric_axis,
)

# Accumulated phase of one Kerr application. The rotation construction needs
# each Kerr pass to turn a coherent state into a balanced two-component cat,
# which happens exactly at this value.
KERR_PHASE = math.pi / 2.0

TRUNCATION_TOL = 1e-8

Mode = Literal["a", "b"]


class CutoffError(RuntimeError):
    """The Fock-space cutoff is too small for the requested state."""


@dataclass(frozen=True)
class FockVector:
    """Pure state on a truncated photon-number lattice.

    ``amps`` is complex with one axis per mode: shape (N+1,) for a single
    mode or (N+1, N+1) for two modes, indexed by photon number.
    """

    amps: np.ndarray

    @property
    def cutoff(self) -> int:
        return self.amps.shape[0] - 1

    @property
    def n_modes(self) -> int:
        return self.amps.ndim

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def normalized(self) -> "FockVector":
        return FockVector(self.amps / self.norm())


def vacuum(cutoff: int) -> FockVector:
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[0] = 1.0
    return FockVector(amps)


def fock_state(n: int, cutoff: int) -> FockVector:
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return FockVector(amps)


def coherent_state(beta: complex, cutoff: int) -> FockVector:
    """Number-basis expansion of |beta> (normalized within the cutoff)."""
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[0] = math.exp(-0.5 * abs(beta) ** 2)
    for n in range(cutoff):
        amps[n + 1] = amps[n] * beta / math.sqrt(n + 1)
    return FockVector(amps)


def two_mode(state_a: FockVector, state_b: FockVector) -> FockVector:
    if state_a.n_modes != 1 or state_b.n_modes != 1:
        raise ValueError("two_mode expects single-mode factors")
    return FockVector(np.outer(state_a.amps, state_b.amps))


def squeezed_vacuum_fock(r: float, cutoff: int, truncation_tol: float = TRUNCATION_TOL) -> FockVector:
    """Single-mode squeezed vacuum exp[(r/2)(adag^2 - a^2)] |0>.

    Negative r squeezes the conjugate quadrature (generator sign flipped).
    Amplitudes live on even photon numbers only; odd entries are exactly 0.
    """
    if cutoff < 4.0 * math.sinh(r) ** 2 + 10:
        raise CutoffError(f"cutoff {cutoff} below 4 sinh(r)^2 + 10 for r={r}")
    lam = math.tanh(r)
    amps = np.zeros(cutoff + 1, dtype=complex)
    c = 1.0 / math.sqrt(math.cosh(r))
    amps[0] = c
    k = 0
    while 2 * (k + 1) <= cutoff:
        c *= lam * math.sqrt((2.0 * k + 1.0) / (2.0 * k + 2.0))
        amps[2 * (k + 1)] = c
        k += 1
    state = FockVector(amps)
    deficit = 1.0 - state.norm() ** 2
    if deficit > truncation_tol:
        raise CutoffError(f"norm deficit {deficit:.3e} exceeds {truncation_tol:.1e} at cutoff {cutoff}")
    return state


def two_mode_squeezed_fock(r: float, cutoff: int) -> FockVector:
    """Two-mode squeezed vacuum exp[r(adag bdag - a b)] |0,0>."""
    amps = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    lam = math.tanh(r)
    c = 1.0 / math.cosh(r)
    for n in range(cutoff + 1):
        amps[n, n] = c
        c *= lam
    return FockVector(amps)


def squeeze_matrix(r: float, cutoff: int) -> np.ndarray:
    """Matrix of exp[(r/2)(adag^2 - a^2)] on the truncated single-mode space."""
    n = cutoff + 1
    a = np.diag(np.sqrt(np.arange(1.0, n)), k=1)
    adag = a.T
    return expm(0.5 * r * (adag @ adag - a @ a))


def apply_single_mode(state: FockVector, mode: Mode, matrix: np.ndarray) -> FockVector:
    """Apply a single-mode operator matrix to one mode of a two-mode state."""
    if state.n_modes != 2:
        raise ValueError("expected a two-mode state")
    if mode == "a":
        return FockVector(matrix @ state.amps)
    return FockVector(state.amps @ matrix.T)


def apply_beam_splitter(state: FockVector, mixing: float) -> FockVector:
    """Exact beam splitter exp[(mixing/2)(adag b - a bdag)] on a two-mode state.

    Total photon number is conserved, so the unitary is applied block by
    block along anti-diagonals; the norm is preserved exactly. 50:50 mixing
    corresponds to mixing = pi/2.
    """
    if state.n_modes != 2:
        raise ValueError("beam splitter acts on a two-mode state")
    n = state.cutoff
    out = np.zeros_like(state.amps)
    for total in range(2 * n + 1):
        k_min = max(0, total - n)
        k_max = min(total, n)
        ks = np.arange(k_min, k_max + 1)
        if ks.size == 1:
            out[k_min, total - k_min] = state.amps[k_min, total - k_min]
            continue
        up = np.sqrt((ks[:-1] + 1.0) * (total - ks[:-1]))  # <k+1| adag b |k>
        gen = np.zeros((ks.size, ks.size))
        gen[np.arange(1, ks.size), np.arange(ks.size - 1)] = up
        block = expm(0.5 * mixing * (gen - gen.T))
        out[ks, total - ks] = block @ state.amps[ks, total - ks]
    return FockVector(out)


def apply_kerr(state: FockVector, mode: Mode, phase: float = KERR_PHASE) -> FockVector:
    """Kerr evolution: each amplitude picks up exp(-i phase n^2) on one mode."""
    n = np.arange(state.amps.shape[0], dtype=float)
    phases = np.exp(-1j * phase * n * n)
    if state.n_modes == 1:
        return FockVector(state.amps * phases)
    if mode == "a":
        return FockVector(state.amps * phases[:, None])
    return FockVector(state.amps * phases[None, :])


def displacement_matrix(amp: complex, cutoff: int) -> np.ndarray:
    """Matrix of exp(amp adag - conj(amp) a) on the truncated space.

    The truncated generator is anti-Hermitian, so the matrix is exactly
    unitary; it only misrepresents states with population near the top of
    the ladder, which callers monitor separately.
    """
    n = cutoff + 1
    a = np.diag(np.sqrt(np.arange(1.0, n)), k=1)
    return expm(amp * a.T - np.conj(amp) * a)


def _check_top_population(state: FockVector, tol: float = 1e-6) -> None:
    amps = state.amps
    top = np.sum(np.abs(amps[-1]) ** 2) if amps.ndim == 1 else (
        np.sum(np.abs(amps[-1, :]) ** 2) + np.sum(np.abs(amps[:, -1]) ** 2))
    if top > tol:
        raise CutoffError(f"population {top:.3e} at the truncation edge; increase the cutoff")


def apply_displacement(state: FockVector, mode: Mode, amp: complex) -> FockVector:
    mat = displacement_matrix(amp, state.cutoff)
    if state.n_modes == 1:
        out = FockVector(mat @ state.amps)
    else:
        out = apply_single_mode(state, mode, mat)
    _check_top_population(out)
    return out


def physical_rotation(state: FockVector, mode: Mode, theta: float, d: float) -> FockVector:
    """Kerr, displacement by i theta/d, Kerr on the selected mode."""
    if d <= 0:
        raise ValueError("displacement scale d must be positive")
    out = apply_kerr(state, mode)
    out = apply_displacement(out, mode, 1j * theta / d)
    return apply_kerr(out, mode)


def hermite_functions(x: np.ndarray, n_max: int) -> np.ndarray:
    """Oscillator eigenfunctions psi_0..psi_n_max at the given points.

    Normalized recurrence (stable for all n and x used here); vacuum
    variance 1/2, i.e. psi_0(x) = pi^(-1/4) exp(-x^2/2).
    """
    x = np.asarray(x, dtype=float)
    psi = np.zeros((x.size, n_max + 1))
    psi[:, 0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_max >= 1:
        psi[:, 1] = math.sqrt(2.0) * x * psi[:, 0]
    for n in range(2, n_max + 1):
        psi[:, n] = (math.sqrt(2.0 / n) * x * psi[:, n - 1]
                     - math.sqrt((n - 1.0) / n) * psi[:, n - 2])
    return psi


def joint_pdf_fock(state: FockVector, x: float, y: float) -> float:
    """Joint homodyne density |<x, y | state>|^2 at one point."""
    grid = joint_pdf_grid(state, np.array([x]), np.array([y]))
    return float(grid[0, 0])


def joint_pdf_grid(state: FockVector, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Joint homodyne density of a two-mode state on a grid of quadrature values."""
    if state.n_modes != 2:
        raise ValueError("joint density needs a two-mode state")
    psi_x = hermite_functions(np.asarray(xs, dtype=float), state.cutoff)
    psi_y = hermite_functions(np.asarray(ys, dtype=float), state.cutoff)
    amp = psi_x @ state.amps @ psi_y.T
    return np.abs(amp) ** 2


def fidelity(state_a: FockVector, state_b: FockVector) -> float:
    """|<a|b>|^2 of two normalized states (normalization enforced here)."""
    overlap = np.vdot(state_a.amps, state_b.amps)
    return float(abs(overlap) ** 2 / (state_a.norm() ** 2 * state_b.norm() ** 2))


def required_cutoff(r: float, tol: float = TRUNCATION_TOL) -> int:
    """Smallest even cutoff keeping the squeezed-vacuum truncation deficit below tol.

    The photon-number tail of the squeezed vacuum is nearly geometric with
    ratio tanh(r)^2, so mean-photon-based heuristics underestimate it.
    """
    lam = abs(math.tanh(r))
    c2 = 1.0 / math.cosh(r)
    total = c2
    k = 0
    while True:
        c2 *= lam * lam * (2.0 * k + 1.0) / (2.0 * k + 2.0)
        total += c2
        k += 1
        if 1.0 - total < 0.5 * tol or k > 5000:
            return 2 * k


def default_cutoff(r: float, max_displacement: float = 0.0) -> int:
    """Cutoff rule: enough levels for the squeezed resource plus displacement."""
    heuristic = int(math.ceil(4.0 * math.sinh(r) ** 2 + 6.0 * max_displacement ** 2 + 20.0))
    return max(heuristic, required_cutoff(r))


def split_squeezed_vacuum(r: float, cutoff: int) -> FockVector:
    """Squeezed vacuum in mode A split on a 50:50 beam splitter.

    The mixing sign is chosen so the two output quadratures are positively
    correlated, matching the coherent-superposition form of the resource.
    """
    state = two_mode(squeezed_vacuum_fock(r, cutoff), vacuum(cutoff))
    return apply_beam_splitter(state, -math.pi / 2.0)


def prepared_pdf_grid(theta_a: float, theta_b: float, r: float, d: float,
                      cutoff: int | None = None,
                      grid_points: int = 801,
                      extent: float | None = None) -> GridPdf:
    """Grid density of the fully prepared and rotated state."""
    if r < ORACLE_MIN_SQUEEZING:
        raise ValueError(f"oracle paths require r >= {ORACLE_MIN_SQUEEZING}, got {r}")
    max_disp = max(abs(theta_a), abs(theta_b)) / d
    n = cutoff if cutoff is not None else default_cutoff(r, max_disp)
    state = split_squeezed_vacuum(r, n)
    state = physical_rotation(state, "a", theta_a, d)
    state = physical_rotation(state, "b", theta_b, d)
    if extent is None:
        extent = 8.0 * math.sqrt((math.exp(2.0 * r) + 1.0) / 4.0 + max_disp ** 2 + 0.5)
    axis = symmetric_axis(extent, grid_points)
    values = joint_pdf_grid(state, axis, axis)
    return grid_pdf_from_values(axis, axis, values)


def corr_physical_oracle(theta_a: float, theta_b: float, r: float, d: float,
                         eta: float = 1.0,
                         cutoff: int | None = None,
                         grid_points: int = 801,
                         extent: float | None = None) -> float:
    """Brute-force sign correlation for the physical rotations."""
    pdf = prepared_pdf_grid(theta_a, theta_b, r, d, cutoff, grid_points, extent)
    if eta < 1.0:
        pdf = smooth_inefficiency(pdf, eta)
    return sign_correlation(pdf)
