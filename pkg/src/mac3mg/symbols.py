"""Fourier symbols of the staggered Stokes operator and its relaxations.

Block symbols are complex matrices over the field ordering ``(u, v, p)``.
Frequency arguments are pairs or arrays of pairs ``(..., 2)``; every symbol
routine broadcasts, returning ``(..., 3, 3)`` so that whole sampling sweeps
run through one batched LAPACK call.

Frequencies live on the torus ``[-pi, pi)^2``.  Under coarsening by three a
frequency is low when both components lie in ``[-pi/3, pi/3)``; everything
else is high.  The difference stencils sit on half-step staggered offsets, so
their scalar symbols are evaluated at ``theta/2``; the resulting matrix
symbols are 2*pi-periodic only up to a per-field sign flip, which cancels in
every spectral quantity computed here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import stencils

SCHEMES = ("qdr", "qbsr", "qibsr", "quzawa")
FIELDS = ("u", "v", "p")
LOW_EDGE = np.pi / 3.0

_MASS = stencils.mass_q()


@dataclass(frozen=True)
class RelaxParams:
    """Relaxation scheme tag and its parameters.

    ``omega`` is the outer damping factor and ``alpha`` the mass scaling of
    the approximate momentum block.  ``sigma`` is required by ``quzawa`` and
    ``omega_j`` (the weight of the single Jacobi sweep on the approximate
    Schur complement) by ``qibsr``.
    """

    scheme: str
    omega: float
    alpha: float
    sigma: float | None = None
    omega_j: float | None = None

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}, expected one of {SCHEMES}")
        if self.omega < 0.0:
            raise ValueError("omega must be nonnegative")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.scheme == "quzawa":
            if self.sigma is None or self.sigma <= 0.0:
                raise ValueError("quzawa requires sigma > 0")
        if self.scheme == "qibsr":
            if self.omega_j is None or not 0.0 < self.omega_j < 2.0:
                raise ValueError("qibsr requires omega_j in (0, 2)")


def reference_params(scheme: str, purpose: str = "lfa") -> RelaxParams:
    """Parameter sets used for the published tables.

    ``purpose="lfa"`` returns the analytically optimal smoothing parameters;
    ``purpose="measured"`` returns the values used in the Dirichlet runs
    (damped distributive relaxation, inexact Schur sweep with weight 0.9).
    """
    if purpose not in ("lfa", "measured"):
        raise ValueError("purpose must be 'lfa' or 'measured'")
    if scheme == "qdr":
        if purpose == "measured":
            return RelaxParams("qdr", omega=0.7 * 36.0 / 47.0, alpha=0.7)
        return RelaxParams("qdr", omega=36.0 / 47.0, alpha=1.0)
    if scheme == "qbsr":
        return RelaxParams("qbsr", omega=36.0 / 47.0, alpha=1.0)
    if scheme == "qibsr":
        return RelaxParams("qibsr", omega=1.0, alpha=47.0 / 36.0, omega_j=0.9)
    if scheme == "quzawa":
        return RelaxParams("quzawa", omega=1.0, alpha=47.0 / 36.0, sigma=15.0 / 32.0)
    raise ValueError(f"unknown scheme {scheme!r}")


class AuxSymbols(NamedTuple):
    m: np.ndarray
    m_s: np.ndarray
    m_r: np.ndarray


def canonicalize(theta):
    """Wrap frequencies into ``[-pi, pi)^2`` componentwise."""
    theta = np.asarray(theta, dtype=float)
    return (theta + np.pi) % (2.0 * np.pi) - np.pi


def is_low(theta):
    """True where both components lie in ``[-pi/3, pi/3)``."""
    theta = canonicalize(theta)
    return np.logical_and(
        np.logical_and(theta[..., 0] >= -LOW_EDGE, theta[..., 0] < LOW_EDGE),
        np.logical_and(theta[..., 1] >= -LOW_EDGE, theta[..., 1] < LOW_EDGE),
    )


def is_high(theta):
    return np.logical_not(is_low(theta))


def _offset_lattice(n: int) -> np.ndarray:
    """All ``n^2`` frequencies ``2 pi (k + 1/2) / n`` canonicalized, shape (n*n, 2)."""
    if n < 9 or n % 3 != 0:
        raise ValueError("sampling resolution must be a multiple of 3, at least 9")
    vals = canonicalize(2.0 * np.pi * (np.arange(n) + 0.5) / n)
    t1, t2 = np.meshgrid(vals, vals, indexing="ij")
    return np.stack([t1.ravel(), t2.ravel()], axis=-1)


def high_freq_samples(n: int = 81) -> np.ndarray:
    """Offset sampling of the high-frequency region, shape (count, 2).

    The half-step offset keeps every sample away from the singular frequency
    ``theta = 0`` and from the exact resonances of the smoother symbols.
    """
    grid = _offset_lattice(n)
    return grid[is_high(grid)]


def low_freq_samples(n: int = 81) -> np.ndarray:
    """Offset sampling of the low-frequency region ``[-pi/3, pi/3)^2``."""
    grid = _offset_lattice(n)
    return grid[is_low(grid)]


def mass_dimless(theta):
    """Dimensionless velocity mass symbol ``(4 + 2cos t1 + 2cos t2 + cos t1 cos t2)/9``."""
    return np.real(_MASS.symbol(np.asarray(theta, dtype=float), 1.0))


def aux(theta) -> AuxSymbols:
    """Scalar helper symbols (m, m_s, m_r).

    ``m = sin^2(t1/2) + sin^2(t2/2)`` drives the scalar Laplacian symbol
    ``4m/h^2``; ``m_s`` is the reciprocal dimensionless mass symbol and
    ``m_r = 4m/m_s`` the dimensionless mass-preconditioned Schur symbol.
    """
    theta = np.asarray(theta, dtype=float)
    m = np.sin(theta[..., 0] / 2.0) ** 2 + np.sin(theta[..., 1] / 2.0) ** 2
    q = mass_dimless(theta)
    m_s = 1.0 / q
    return AuxSymbols(m=m, m_s=m_s, m_r=4.0 * m * q)


def _halves(theta):
    theta = np.asarray(theta, dtype=float)
    return np.sin(theta[..., 0] / 2.0), np.sin(theta[..., 1] / 2.0)


def stokes_symbol(theta, h: float = 1.0) -> np.ndarray:
    """Block symbol of the MAC Stokes operator, shape ``(..., 3, 3)``.

    Diagonal momentum entries ``4m/h^2``, gradient column ``2i sin(t_k/2)/h``
    and its negative adjoint row; the (p, p) entry is zero.
    """
    theta = np.asarray(theta, dtype=float)
    s1, s2 = _halves(theta)
    m = s1**2 + s2**2
    out = np.zeros(theta.shape[:-1] + (3, 3), dtype=complex)
    out[..., 0, 0] = 4.0 * m / h**2
    out[..., 1, 1] = 4.0 * m / h**2
    out[..., 0, 2] = 2.0j * s1 / h
    out[..., 1, 2] = 2.0j * s2 / h
    out[..., 2, 0] = -2.0j * s1 / h
    out[..., 2, 1] = -2.0j * s2 / h
    return out


def dist_p_symbol(theta, h: float = 1.0) -> np.ndarray:
    """Symbol of the distributive transformation (gradient column, cell Laplacian)."""
    theta = np.asarray(theta, dtype=float)
    s1, s2 = _halves(theta)
    m = s1**2 + s2**2
    out = np.zeros(theta.shape[:-1] + (3, 3), dtype=complex)
    out[..., 0, 0] = 1.0
    out[..., 1, 1] = 1.0
    out[..., 0, 2] = 2.0j * s1 / h
    out[..., 1, 2] = 2.0j * s2 / h
    out[..., 2, 2] = -4.0 * m / h**2
    return out


def dist_k_symbol(theta, h: float = 1.0) -> np.ndarray:
    """Symbol of the distributed operator: block lower triangular with
    scalar Laplacians on the diagonal.  Equals ``stokes @ dist_p`` exactly."""
    theta = np.asarray(theta, dtype=float)
    s1, s2 = _halves(theta)
    m = s1**2 + s2**2
    out = np.zeros(theta.shape[:-1] + (3, 3), dtype=complex)
    out[..., 0, 0] = 4.0 * m / h**2
    out[..., 1, 1] = 4.0 * m / h**2
    out[..., 2, 0] = -2.0j * s1 / h
    out[..., 2, 1] = -2.0j * s2 / h
    out[..., 2, 2] = 4.0 * m / h**2
    return out


def schur_jacobi_weight() -> float:
    """Self-coefficient of the mass-preconditioned Schur stencil (exactly 4/3).

    The stencil coefficient at offset zero equals the lattice average of the
    symbol ``m_r`` over any lattice finer than the stencil degree; an 8x8
    lattice is exact here.
    """
    k = 2.0 * np.pi * np.arange(8) / 8.0
    t1, t2 = np.meshgrid(k, k, indexing="ij")
    grid = np.stack([t1.ravel(), t2.ravel()], axis=-1)
    return float(np.mean(aux(grid).m_r))


def _mass_block(theta, h, alpha):
    """Common (u, u) and (v, v) entry ``alpha * m_s / h^2`` of the M symbols."""
    return alpha / (mass_dimless(theta) * h**2)


def smoother_symbol(params: RelaxParams, theta, h: float = 1.0) -> np.ndarray:
    """Block symbol of the smoother matrix M for the given scheme.

    For ``qibsr`` this is the inverse of the inexact solve map (the scheme is
    defined through its inverse action); it is singular exactly where the
    inexact map is.
    """
    theta = np.asarray(theta, dtype=float)
    s1, s2 = _halves(theta)
    diag = _mass_block(theta, h, params.alpha)
    out = np.zeros(theta.shape[:-1] + (3, 3), dtype=complex)
    if params.scheme == "qdr":
        out[..., 0, 0] = diag
        out[..., 1, 1] = diag
        out[..., 2, 2] = diag
        out[..., 2, 0] = -2.0j * s1 / h
        out[..., 2, 1] = -2.0j * s2 / h
        return out
    if params.scheme == "qbsr":
        out[..., 0, 0] = diag
        out[..., 1, 1] = diag
        out[..., 0, 2] = 2.0j * s1 / h
        out[..., 1, 2] = 2.0j * s2 / h
        out[..., 2, 0] = -2.0j * s1 / h
        out[..., 2, 1] = -2.0j * s2 / h
        return out
    if params.scheme == "quzawa":
        out[..., 0, 0] = diag
        out[..., 1, 1] = diag
        out[..., 2, 0] = -2.0j * s1 / h
        out[..., 2, 1] = -2.0j * s2 / h
        out[..., 2, 2] = -1.0 / params.sigma
        return out
    if params.scheme == "qibsr":
        return np.linalg.inv(_ibsr_inverse_symbol(params, theta, h))
    raise ValueError(f"unknown scheme {params.scheme!r}")


def _ibsr_inverse_symbol(params: RelaxParams, theta, h: float) -> np.ndarray:
    """Symbol of the inexact block solve: exact Schur inverse replaced by one
    weighted Jacobi sweep with the translation-invariant diagonal 4/3."""
    theta = np.asarray(theta, dtype=float)
    s1, s2 = _halves(theta)
    q = mass_dimless(theta) * h**2  # velocity mass symbol
    wj = params.omega_j / schur_jacobi_weight()
    a = params.alpha

    out = np.zeros(theta.shape[:-1] + (3, 3), dtype=complex)
    # pressure row: delta_p = (wj/d) * (B C^{-1} r_u - alpha r_p)
    dp0 = np.asarray(wj * (-2.0j * s1 / h) * q, dtype=complex)
    dp1 = np.asarray(wj * (-2.0j * s2 / h) * q, dtype=complex)
    dp2 = np.broadcast_to(np.asarray(-wj * a, dtype=complex), dp0.shape)
    # velocity rows: delta_u = (1/alpha) C^{-1} (r_u - B^T delta_p)
    gu = 2.0j * s1 / h
    gv = 2.0j * s2 / h
    out[..., 0, 0] = (q / a) * (1.0 - gu * dp0)
    out[..., 0, 1] = (q / a) * (-gu * dp1)
    out[..., 0, 2] = (q / a) * (-gu * dp2)
    out[..., 1, 0] = (q / a) * (-gv * dp0)
    out[..., 1, 1] = (q / a) * (1.0 - gv * dp1)
    out[..., 1, 2] = (q / a) * (-gv * dp2)
    out[..., 2, 0] = dp0
    out[..., 2, 1] = dp1
    out[..., 2, 2] = dp2
    return out


def relax_error_symbol(params: RelaxParams, theta, h: float = 1.0) -> np.ndarray:
    """Error propagation symbol ``S = I - omega * (solve step) @ L``.

    Raises ``numpy.linalg.LinAlgError`` where the smoother symbol is singular
    (only at frequencies congruent to zero); the offset samplers never hit
    those, callers probing arbitrary frequencies must guard themselves.
    """
    theta = np.asarray(theta, dtype=float)
    ell = stokes_symbol(theta, h)
    eye = np.eye(3, dtype=complex)
    if params.scheme == "qdr":
        step = dist_p_symbol(theta, h) @ np.linalg.solve(
            smoother_symbol(params, theta, h), ell
        )
    elif params.scheme == "qbsr":
        step = np.linalg.solve(smoother_symbol(params, theta, h), ell)
    elif params.scheme == "quzawa":
        step = np.linalg.solve(smoother_symbol(params, theta, h), ell)
    elif params.scheme == "qibsr":
        step = _ibsr_inverse_symbol(params, theta, h) @ ell
    else:
        raise ValueError(f"unknown scheme {params.scheme!r}")
    return eye - params.omega * step


def spectral_radius(mat: np.ndarray) -> float:
    """Largest eigenvalue magnitude of a dense matrix (LAPACK QR iteration)."""
    return float(np.abs(np.linalg.eigvals(mat)).max())


def smoothing_factor(params: RelaxParams, n: int = 81, h: float = 1.0) -> float:
    """Max spectral radius of the relaxation error symbol over sampled highs."""
    s = relax_error_symbol(params, high_freq_samples(n), h)
    return float(np.abs(np.linalg.eigvals(s)).max())
