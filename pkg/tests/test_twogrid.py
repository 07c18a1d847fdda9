"""Two-grid harmonic analysis for coarsening by three."""

import numpy as np
import pytest

from mac3mg import symbols, twogrid
from mac3mg.symbols import reference_params
from mac3mg.twogrid import TransferPair


def test_transfer_pair_validation():
    TransferPair("r1")
    TransferPair("p25t")
    with pytest.raises(ValueError):
        TransferPair("p25_r1")
    with pytest.raises(ValueError):
        TransferPair("r1", prolong="p9")


def test_harmonics_require_low_base():
    hs = twogrid.harmonics((0.1, -0.2))
    assert hs.freqs.shape == (9, 2)
    with pytest.raises(ValueError):
        twogrid.harmonics((np.pi / 2, 0.0))


def test_harmonics_alias_on_the_coarse_grid():
    # all nine harmonics map to the same coarse frequency 3 theta (mod 2 pi)
    # and exactly one of them (the base) is low
    base = np.array([0.21, -0.77]) / 3.0
    hs = twogrid.harmonics(base)
    coarse = 3.0 * hs.freqs
    base3 = 3.0 * base
    wrapped = symbols.canonicalize(coarse)
    for a in range(9):
        assert np.allclose(wrapped[a], symbols.canonicalize(base3), atol=1e-12)
    low_flags = symbols.is_low(hs.freqs)
    assert low_flags.sum() == 1
    assert low_flags[twogrid.BASE_INDEX]
    # harmonics are pairwise distinct
    flat = {tuple(np.round(f, 12)) for f in hs.freqs}
    assert len(flat) == 9


def test_field_phase_table():
    for a, (i, j) in enumerate(twogrid.HARMONIC_SHIFTS):
        assert twogrid.FIELD_PHASES[a, 0] == (-1.0) ** j  # u offset (0, 1/2)
        assert twogrid.FIELD_PHASES[a, 1] == (-1.0) ** i  # v offset (1/2, 0)
        assert twogrid.FIELD_PHASES[a, 2] == (-1.0) ** (i + j)  # p offset


def test_expanded_fine_symbol_is_block_diagonal():
    hs = twogrid.harmonics((0.2, 0.1))
    big = twogrid.expanded_fine_symbol(symbols.stokes_symbol, hs, h=0.5)
    assert big.shape == (27, 27)
    for a in range(9):
        blk = big[3 * a : 3 * a + 3, 3 * a : 3 * a + 3]
        assert np.abs(blk - symbols.stokes_symbol(hs.freqs[a], 0.5)).max() < 1e-13
    mask = np.ones((27, 27), dtype=bool)
    for a in range(9):
        mask[3 * a : 3 * a + 3, 3 * a : 3 * a + 3] = False
    assert np.abs(big[mask]).max() == 0.0


def test_transfer_symbols_sparsity_and_scaling():
    hs = twogrid.harmonics((0.01, 0.02))
    pair = TransferPair("p25t")
    prolong, restrict = twogrid.transfer_symbols(pair, hs)
    assert prolong.shape == (27, 3) and restrict.shape == (3, 27)
    for f in range(3):
        rows = np.flatnonzero(np.abs(prolong[:, f]) > 0)
        assert set(rows) <= {3 * a + f for a in range(9)}
        cols = np.flatnonzero(np.abs(restrict[f, :]) > 0)
        assert set(cols) <= {3 * a + f for a in range(9)}
    # near theta = 0 the base-harmonic weights approach 1 for both transfers
    b = twogrid.BASE_INDEX
    for f in range(3):
        assert abs(prolong[3 * b + f, f] - 1.0) < 1e-3
        assert abs(restrict[f, 3 * b + f] - 1.0) < 1e-3


def test_two_grid_symbol_requires_low_base():
    p = reference_params("qdr")
    with pytest.raises(ValueError):
        twogrid.two_grid_symbol((np.pi / 2, 0.0), 1, 0, p, TransferPair("p25t"))


def test_two_grid_symbol_singular_at_zero_base():
    p = reference_params("qdr")
    with pytest.raises(np.linalg.LinAlgError):
        twogrid.two_grid_symbol((0.0, 0.0), 1, 0, p, TransferPair("p25t"))


def test_pre_post_smoothing_split_is_spectrally_equivalent():
    # S^a C S^b is similar to C S^(a+b): identical eigenvalues
    p = reference_params("qbsr")
    pair = TransferPair("r9b")
    theta = (0.31, -0.12)
    h = 1.0 / 27.0
    variants = [(2, 0), (1, 1), (0, 2)]
    spectra = []
    for nu1, nu2 in variants:
        e = twogrid.two_grid_symbol(theta, nu1, nu2, p, pair, h)
        spectra.append(np.sort_complex(np.round(np.linalg.eigvals(e), 10)))
    assert np.abs(spectra[0] - spectra[1]).max() < 1e-8
    assert np.abs(spectra[1] - spectra[2]).max() < 1e-8


def test_factor_table_matches_single_factor_calls():
    p = reference_params("qdr")
    pair = TransferPair("p25t")
    table = twogrid.two_grid_factor_table(p, pair, nus=(1, 2), n=27, h=1.0 / 27.0)
    for nu in (1, 2):
        single = twogrid.two_grid_convergence_factor(nu, 0, p, pair, n=27, h=1.0 / 27.0)
        assert abs(table[nu] - single) < 1e-12


def test_factor_table_handles_unsorted_nus():
    p = reference_params("quzawa")
    pair = TransferPair("r9")
    a = twogrid.two_grid_factor_table(p, pair, nus=(3, 1), n=27, h=1.0 / 27.0)
    b = twogrid.two_grid_factor_table(p, pair, nus=(1, 3), n=27, h=1.0 / 27.0)
    assert set(a) == {1, 3}
    for nu in (1, 3):
        assert abs(a[nu] - b[nu]) < 1e-14


def test_factors_decrease_with_more_smoothing():
    pair = TransferPair("p25t")
    for scheme in symbols.SCHEMES:
        table = twogrid.two_grid_factor_table(
            reference_params(scheme), pair, nus=(1, 2, 3, 4), n=27, h=1.0 / 27.0
        )
        vals = [table[nu] for nu in (1, 2, 3, 4)]
        assert all(b < a + 1e-12 for a, b in zip(vals, vals[1:])), scheme
        assert all(0.0 < v < 1.0 for v in vals), scheme


def test_smoke_cells_against_published_factors():
    # coarse sampling (n = 27) reproduces a spread of published two-grid
    # factors within 0.03; the full 48-cell sweep runs in the acceptance tests
    cells = [
        ("qdr", "p25t", 1, 0.387),
        ("qdr", "r9", 4, 0.126),
        ("qbsr", "r9b", 2, 0.149),
        ("quzawa", "p25t", 2, 0.361),
        ("quzawa", "r1", 1, 0.642),
    ]
    for scheme, restrict, nu, published in cells:
        got = twogrid.two_grid_convergence_factor(
            nu, 0, reference_params(scheme), TransferPair(restrict), n=27, h=1.0 / 27.0
        )
        assert abs(got - published) < 0.03, (scheme, restrict, nu, got)


def test_periodic_lattice_factor_zero_base_family():
    # on a lattice the zero base contributes pure relaxation on its eight
    # nonzero harmonics; the returned factor can never drop below that
    p = reference_params("qdr")
    pair = TransferPair("p25t")
    n = 9
    rho = twogrid.periodic_lattice_factor(p, pair, 1, 0, n)
    zero_freqs = twogrid._harmonic_freqs(np.zeros(2))
    keep = [a for a in range(9) if a != twogrid.BASE_INDEX]
    s = symbols.relax_error_symbol(p, zero_freqs[keep], 1.0 / n)
    rho_zero = float(np.abs(np.linalg.eigvals(s)).max())
    assert rho >= rho_zero - 1e-14
    assert 0.0 < rho < 1.0
