"""Brute-force ground truth for the idealized-rotation path.

The resource is represented exactly as a Gaussian-weighted line of two-mode
coherent states |a/sqrt(2), a/sqrt(2)> over real a, the idealized rotation
is applied component by component, and the joint homodyne density is
obtained by direct quadrature over the weight variable. Nothing here
depends on the closed-form correlation expressions, so this module can
adjudicate them.

The idealized rotation is defined on a +/- pair of coherent states, which
leaves its action on the rest of the coherent family ambiguous. Two
readings were tested during development:

* linear extension: one linear operator sin(2 theta) Id + cos(2 theta) P
  (P the parity map |g> -> |-g>), i.e. the first defining line applied to
  every component with its signed amplitude;
* representative pairing: the first line for components with Re >= 0, the
  second for their partners.

Only the linear extension reproduces the structural facts of this model
(zero correlation whenever cos 4 theta = 0 for either party, a correlation
depending on both angles separately rather than only on their difference,
and the thermal closed form in its pure limit), so it is used throughout.
"""

from __future__ import annotations

import math

import numpy as np

from .model import ORACLE_MIN_SQUEEZING, FeasibilityError
from .quadrature import (
    GridPdf,
    QuadTolerance,
    grid_pdf_from_values,
    integrate_real_line,
    sign_correlation,
    smooth_inefficiency,
    symmetric_axis,
)

DEFAULT_GRID_POINTS = 801
EXTENT_SIGMAS = 8.0
# The Gaussian weight over the coherent amplitude is truncated at this many
# of its standard deviations; the discarded tail is below 1e-15.
WEIGHT_SIGMAS = 6.0


def _require_oracle_squeezing(r: float) -> None:
    if r < ORACLE_MIN_SQUEEZING:
        raise ValueError(
            f"oracle paths require r >= {ORACLE_MIN_SQUEEZING} (the +/- coherent pair "
            f"basis degenerates as r -> 0), got {r}")


def weight_std(r: float) -> float:
    """Standard deviation of the Gaussian weight over the coherent amplitude."""
    t = math.tanh(r)
    return math.sqrt(t / (1.0 - t))


def _weight(alpha: float | np.ndarray, r: float) -> float | np.ndarray:
    t = math.tanh(r)
    return np.exp(-(1.0 - t) * np.square(alpha) / (2.0 * t))


def _rotated_overlap(x: np.ndarray | float, alpha: np.ndarray | float, theta: float) -> np.ndarray | float:
    """<x| R(theta) |alpha/sqrt(2)> up to a constant factor, real alpha.

    R(theta) = sin(2 theta) Id + cos(2 theta) Parity, and
    <x | a/sqrt(2)> = pi^(-1/4) exp(-(x - a)^2 / 2) for real a.
    """
    gp = np.exp(-0.5 * np.square(np.subtract(x, alpha)))
    gm = np.exp(-0.5 * np.square(np.add(x, alpha)))
    return math.sin(2.0 * theta) * gp + math.cos(2.0 * theta) * gm


def amplitude_ideal(x: float, y: float, theta_a: float, theta_b: float, r: float,
                    tol: QuadTolerance | None = None) -> float:
    """Unnormalized joint homodyne amplitude at one (x, y) point.

    Real by construction: the resource weight, the rotation coefficients,
    and the quadrature overlaps of real-amplitude coherent states are all
    real. Evaluated by adaptive quadrature over the coherent amplitude.
    """
    _require_oracle_squeezing(r)
    tol = tol or QuadTolerance()

    def integrand(a: float) -> float:
        return float(_weight(a, r)
                     * _rotated_overlap(x, a, theta_a)
                     * _rotated_overlap(y, a, theta_b))

    return integrate_real_line(integrand, tol)


def _alpha_rule(r: float, n_nodes: int | None) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [-L, L], L = WEIGHT_SIGMAS * std."""
    upper = WEIGHT_SIGMAS * weight_std(r)
    if n_nodes is None:
        # Node spacing must resolve the width-one coherent overlaps.
        n_nodes = max(256, int(math.ceil(10.0 * upper)))
    nodes, weights = np.polynomial.legendre.leggauss(n_nodes)
    return upper * nodes, upper * weights


def joint_pdf_ideal_grid(theta_a: float, theta_b: float, r: float,
                         grid_points: int = DEFAULT_GRID_POINTS,
                         extent: float | None = None,
                         n_alpha: int | None = None) -> GridPdf:
    """Normalized joint homodyne density of the rotated resource on a grid."""
    _require_oracle_squeezing(r)
    if extent is None:
        extent = EXTENT_SIGMAS * math.sqrt((math.exp(2.0 * r) + 1.0) / 4.0)
    axis = symmetric_axis(extent, grid_points)
    nodes, weights = _alpha_rule(r, n_alpha)
    wg = weights * _weight(nodes, r)
    fa = _rotated_overlap(axis[:, None], nodes[None, :], theta_a)
    fb = _rotated_overlap(axis[:, None], nodes[None, :], theta_b)
    amp = (fa * wg) @ fb.T
    return grid_pdf_from_values(axis, axis, amp * amp)


def corr_ideal_oracle(theta_a: float, theta_b: float, r: float, eta: float = 1.0,
                      grid_points: int = DEFAULT_GRID_POINTS,
                      extent: float | None = None,
                      n_alpha: int | None = None) -> float:
    """Brute-force sign correlation for ideal rotations."""
    pdf = joint_pdf_ideal_grid(theta_a, theta_b, r, grid_points, extent, n_alpha)
    if eta < 1.0:
        pdf = smooth_inefficiency(pdf, eta)
    return sign_correlation(pdf)


def thermal_weight_stds(r: float, v: float) -> tuple[float, float]:
    """Standard deviations (real part, imaginary part) of the thermal
    coherent-amplitude weight. Only defined where the weight exists as a
    proper function, i.e. V e^(-2r) > 1."""
    return (
        math.sqrt((v * math.exp(-2.0 * r) - 1.0) / 4.0),
        math.sqrt((v * math.exp(2.0 * r) - 1.0) / 4.0),
    )


def _rotated_overlap_complex(x: np.ndarray, beta: complex, theta: float) -> np.ndarray:
    """<x| R(theta) |beta> for complex beta, same linear extension."""
    def overlap(b: complex) -> np.ndarray:
        br, bi = b.real, b.imag
        return np.exp(
            1j * math.sqrt(2.0) * bi * x
            - 0.5 * np.square(x - math.sqrt(2.0) * br)
            - 1j * br * bi)

    return math.sin(2.0 * theta) * overlap(beta) + math.cos(2.0 * theta) * overlap(-beta)


def corr_thermal_oracle(theta_a: float, theta_b: float, r: float, v: float,
                        center: float = 0.0,
                        grid_points: int = DEFAULT_GRID_POINTS,
                        n_alpha: int = 48) -> float:
    """Brute-force sign correlation for the split squeezed thermal resource.

    The resource is a proper mixture of two-mode coherent states over the
    complex amplitude plane only where V e^(-2r) > 1; outside that region a
    :class:`FeasibilityError` is raised rather than extrapolating.
    """
    _require_oracle_squeezing(r)
    if v * math.exp(-2.0 * r) <= 1.0 + 1e-6:
        raise FeasibilityError(
            f"thermal coherent-mixture weight exists only for V e^(-2r) > 1, "
            f"got V={v}, r={r}")

    sig_r, sig_i = thermal_weight_stds(r, v)
    gl_nodes, gl_weights = np.polynomial.legendre.leggauss(n_alpha)
    ar = center + WEIGHT_SIGMAS * sig_r * gl_nodes
    wr = WEIGHT_SIGMAS * sig_r * gl_weights * np.exp(
        -2.0 * np.square(ar - center) / (v * math.exp(-2.0 * r) - 1.0))
    ai = WEIGHT_SIGMAS * sig_i * gl_nodes
    wi = WEIGHT_SIGMAS * sig_i * gl_weights * np.exp(
        -2.0 * np.square(ai) / (v * math.exp(2.0 * r) - 1.0))

    extent = abs(center) + WEIGHT_SIGMAS * sig_r + 8.0
    axis = symmetric_axis(extent, grid_points)

    # Mixture components factorize over the modes, so the joint density is a
    # weighted product of per-mode intensity columns.
    cols_a = np.empty((axis.size, ar.size * ai.size))
    cols_b = np.empty_like(cols_a)
    weights = np.empty(ar.size * ai.size)
    k = 0
    for a_r, w_r in zip(ar, wr):
        for a_i, w_i in zip(ai, wi):
            beta = complex(a_r, a_i) / math.sqrt(2.0)
            cols_a[:, k] = np.abs(_rotated_overlap_complex(axis, beta, theta_a)) ** 2
            cols_b[:, k] = np.abs(_rotated_overlap_complex(axis, beta, theta_b)) ** 2
            weights[k] = w_r * w_i
            k += 1
    density = (cols_a * weights) @ cols_b.T
    pdf = grid_pdf_from_values(axis, axis, density)
    return sign_correlation(pdf)
