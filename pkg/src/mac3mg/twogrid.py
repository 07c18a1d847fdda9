"""Two-grid Fourier analysis for coarsening by three on staggered grids.

A low base frequency ``theta`` in ``[-pi/3, pi/3)^2`` couples with the eight
shifted harmonics ``theta + (2 pi / 3)(i, j)``, ``i, j in {-1, 0, 1}``; all
nine land in ``[-pi, pi)^2`` without rewrapping.  The two-grid error operator
acts on nine 3-field harmonic blocks, a 27x27 matrix per base frequency with
harmonic-major, field-minor ordering.

Because coarse unknowns coincide with every third staggered fine unknown, one
coarse Fourier mode restricted to the fine grid picks up a sign per harmonic
and field: ``(-1)^j`` for u, ``(-1)^i`` for v and ``(-1)^(i+j)`` for p.  The
transfer symbols consist of these signs times the scalar stencil symbol, with
the 1/9 aliasing factor attached to prolongation.  The coarse operator is the
direct rediscretization on the triple mesh, not a Galerkin product.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import stencils, symbols
from .symbols import RelaxParams

logger = logging.getLogger(__name__)

# lexicographic shift order; the base frequency sits at the (0, 0) slot
HARMONIC_SHIFTS = tuple((i, j) for i in (-1, 0, 1) for j in (-1, 0, 1))
BASE_INDEX = HARMONIC_SHIFTS.index((0, 0))

# per-field sign of the coinciding-point phase for each harmonic shift
FIELD_PHASES = np.array(
    [[(-1.0) ** j, (-1.0) ** i, (-1.0) ** (i + j)] for i, j in HARMONIC_SHIFTS]
)

_DET_FLOOR = 1e-13


@dataclass(frozen=True)
class TransferPair:
    """Prolongation/restriction tags; prolongation is always the 25-point one."""

    restrict: str
    prolong: str = "p25"

    def __post_init__(self) -> None:
        if self.prolong != "p25":
            raise ValueError("only the 25-point prolongation is supported")
        if self.restrict not in stencils.RESTRICTIONS:
            raise ValueError(
                f"unknown restriction {self.restrict!r}, "
                f"expected one of {tuple(stencils.RESTRICTIONS)}"
            )


@dataclass(frozen=True)
class HarmonicSet:
    """Base frequency with its nine aliasing harmonics (shape (9, 2))."""

    base: tuple[float, float]
    freqs: np.ndarray

    @property
    def shifts(self) -> tuple[tuple[int, int], ...]:
        return HARMONIC_SHIFTS


def harmonics(theta) -> HarmonicSet:
    base = np.asarray(theta, dtype=float)
    if not bool(np.all(symbols.is_low(base))):
        raise ValueError("harmonics are defined for low base frequencies only")
    return HarmonicSet(base=(float(base[0]), float(base[1])), freqs=_harmonic_freqs(base))


def _harmonic_freqs(thetas) -> np.ndarray:
    """Harmonic frequencies, shape (..., 9, 2); no rewrapping is needed."""
    thetas = np.asarray(thetas, dtype=float)
    shifts = (2.0 * np.pi / 3.0) * np.asarray(HARMONIC_SHIFTS, dtype=float)
    return thetas[..., None, :] + shifts


def expanded_fine_symbol(symbol_fn, hset: HarmonicSet, h: float = 1.0) -> np.ndarray:
    """27x27 block-diagonal expansion of a 3x3 symbol over the harmonics."""
    blocks = symbol_fn(hset.freqs, h)
    return _expand(blocks[None])[0]


def _expand(blocks: np.ndarray) -> np.ndarray:
    """(ns, 9, 3, 3) per-harmonic blocks -> (ns, 27, 27) block diagonal."""
    ns = blocks.shape[0]
    out = np.zeros((ns, 27, 27), dtype=complex)
    for a in range(9):
        out[:, 3 * a : 3 * a + 3, 3 * a : 3 * a + 3] = blocks[:, a]
    return out


def coarse_symbol(theta, h: float) -> np.ndarray:
    """Direct rediscretization on the coarse grid: Stokes symbol at (3 theta, 3h)."""
    theta = np.asarray(theta, dtype=float)
    return symbols.stokes_symbol(3.0 * theta, 3.0 * h)


def transfer_symbols(pair: TransferPair, hset: HarmonicSet, h: float = 1.0):
    """Harmonic-expanded transfer symbols: (27x3 prolongation, 3x27 restriction)."""
    p, r = _transfer_mats(pair, hset.freqs[None])
    return p[0], r[0]


def _transfer_mats(pair: TransferPair, freqs: np.ndarray):
    """Batched transfers for freqs (ns, 9, 2) -> (ns, 27, 3), (ns, 3, 27).

    Both stencils are even-symmetric so their symbols are real; the harmonic
    phase signs multiply in.  Prolongation carries the 1/9 aliasing factor.
    """
    ns = freqs.shape[0]
    p_sym = np.real(stencils.p25().symbol(freqs, 1.0))  # (ns, 9)
    r_sym = np.real(stencils.RESTRICTIONS[pair.restrict]().symbol(freqs, 1.0))
    prolong = np.zeros((ns, 27, 3), dtype=complex)
    restrict = np.zeros((ns, 3, 27), dtype=complex)
    for a in range(9):
        for f in range(3):
            phase = FIELD_PHASES[a, f]
            prolong[:, 3 * a + f, f] = (1.0 / 9.0) * p_sym[:, a] * phase
            restrict[:, f, 3 * a + f] = r_sym[:, a] * phase
    return prolong, restrict


def _error_symbols(
    thetas: np.ndarray,
    params: RelaxParams,
    pair: TransferPair,
    h: float,
):
    """Coarse-grid correction and smoother symbols for a batch of low bases.

    Returns ``(cgc, smo, kept)`` with shapes (ns, 27, 27): bases whose coarse
    symbol is singular are dropped (cannot happen for offset sampling).
    """
    thetas = np.asarray(thetas, dtype=float).reshape(-1, 2)
    ch = coarse_symbol(thetas, h)
    det = np.abs(np.linalg.det(ch))
    kept = det > _DET_FLOOR * np.abs(ch).max()
    if not np.all(kept):
        logger.warning("excluded %d singular coarse samples", int((~kept).sum()))
        thetas = thetas[kept]
        ch = ch[kept]

    freqs = _harmonic_freqs(thetas)
    ell = _expand(symbols.stokes_symbol(freqs, h))
    smo = _expand(symbols.relax_error_symbol(params, freqs, h))
    prolong, restrict = _transfer_mats(pair, freqs)

    coarse_residual = restrict @ ell
    correction = prolong @ np.linalg.solve(ch, coarse_residual)
    cgc = np.eye(27, dtype=complex)[None] - correction
    return cgc, smo, kept


def two_grid_symbol(
    theta,
    nu1: int,
    nu2: int,
    params: RelaxParams,
    pair: TransferPair,
    h: float = 1.0,
) -> np.ndarray:
    """27x27 two-grid error symbol ``S^nu2 (I - P Lc^-1 R L) S^nu1``."""
    base = np.asarray(theta, dtype=float)
    if not bool(np.all(symbols.is_low(base))):
        raise ValueError("two-grid symbol requires a low base frequency")
    cgc, smo, kept = _error_symbols(base.reshape(1, 2), params, pair, h)
    if not kept.all():
        raise np.linalg.LinAlgError("coarse symbol is singular at this base frequency")
    e = np.linalg.matrix_power(smo[0], nu2) @ cgc[0] @ np.linalg.matrix_power(smo[0], nu1)
    return e


def two_grid_factor_table(
    params: RelaxParams,
    pair: TransferPair,
    nus: tuple[int, ...] = (1, 2, 3, 4),
    n: int = 81,
    h: float = 1.0 / 81.0,
) -> dict[int, float]:
    """Sampled two-grid factors ``rho(nu)`` for several smoothing counts.

    One sweep over the offset low-frequency samples; smoothing is applied as
    pre-relaxation only (the factor depends on nu1 + nu2 only).
    """
    thetas = symbols.low_freq_samples(n)
    cgc, smo, _ = _error_symbols(thetas, params, pair, h)
    out: dict[int, float] = {}
    power = np.broadcast_to(np.eye(27, dtype=complex), smo.shape).copy()
    last = 0
    for nu in sorted(nus):
        for _ in range(nu - last):
            power = smo @ power
        last = nu
        e = cgc @ power
        out[nu] = float(np.abs(np.linalg.eigvals(e)).max())
    return out


def two_grid_convergence_factor(
    nu1: int,
    nu2: int,
    params: RelaxParams,
    pair: TransferPair,
    n: int = 81,
    h: float = 1.0 / 81.0,
) -> float:
    """Max spectral radius of the two-grid symbol over offset low samples."""
    thetas = symbols.low_freq_samples(n)
    cgc, smo, _ = _error_symbols(thetas, params, pair, h)
    e = (
        np.linalg.matrix_power(smo, nu2)
        @ cgc
        @ np.linalg.matrix_power(smo, nu1)
    )
    return float(np.abs(np.linalg.eigvals(e)).max())


def periodic_lattice_factor(
    params: RelaxParams,
    pair: TransferPair,
    nu1: int,
    nu2: int,
    n: int,
    h: float | None = None,
) -> float:
    """Exact error contraction factor of the two-grid cycle on an n x n
    periodic grid, by frequency-space evaluation over the discrete lattice.

    Low lattice bases are ``2 pi k / n`` with ``|k| < n/6``.  The zero base
    needs care: the constant modes are fixed points removed by the gauge
    projection, and the coarse correction vanishes on that family, so its
    contribution is the relaxation factor over the eight nonzero harmonics.
    """
    if h is None:
        h = 1.0 / n
    m = n // 3
    kmax = (m - 1) // 2  # n/3 is odd for sizes 3 * 3**k
    ks = np.arange(-kmax, kmax + 1)
    t1, t2 = np.meshgrid(2.0 * np.pi * ks / n, 2.0 * np.pi * ks / n, indexing="ij")
    bases = np.stack([t1.ravel(), t2.ravel()], axis=-1)
    nonzero = np.abs(bases).max(axis=-1) > 1e-14

    cgc, smo, _ = _error_symbols(bases[nonzero], params, pair, h)
    e = (
        np.linalg.matrix_power(smo, nu2)
        @ cgc
        @ np.linalg.matrix_power(smo, nu1)
    )
    rho = float(np.abs(np.linalg.eigvals(e)).max())

    # zero-base family: pure relaxation on the nonzero harmonics
    zero_freqs = _harmonic_freqs(np.zeros(2))
    keep = [a for a in range(9) if a != BASE_INDEX]
    s = symbols.relax_error_symbol(params, zero_freqs[keep], h)
    s = np.linalg.matrix_power(s, nu1 + nu2)
    rho_zero = float(np.abs(np.linalg.eigvals(s)).max())
    return max(rho, rho_zero)
