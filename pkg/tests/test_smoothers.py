"""Relaxation sweeps: per-mode consistency with the symbols, fixed points,
gauge preservation, and the Schur helper."""

import numpy as np
import pytest

from mac3mg import grid, smoothers, symbols
from mac3mg.smoothers import SchurOperator, Smoother
from mac3mg.symbols import RelaxParams, reference_params


def lattice_thetas(n, count, seed):
    """Random nonzero lattice frequencies 2 pi k / n."""
    rng = np.random.default_rng(seed)
    ks = [(k1, k2) for k1 in range(n) for k2 in range(n) if (k1, k2) != (0, 0)]
    idx = rng.choice(len(ks), size=count, replace=False)
    return [ks[i] for i in idx]


def probe_mode_matrix(scheme_params, n, theta):
    """3x3 matrix action of one sweep on a single staggered Fourier mode."""
    sysm = grid.build_system(n, "periodic")
    sm = Smoother(sysm, scheme_params)
    cols = []
    for coeffs in np.eye(3):
        st = grid.fourier_state(n, theta, coeffs.astype(complex))
        sm.sweep(st, None)
        cols.append(grid.mode_coefficients(st, theta))
    return np.stack(cols, axis=1)


@pytest.mark.parametrize("scheme", symbols.SCHEMES)
def test_sweep_matches_error_symbol_per_mode(scheme):
    # with zero right-hand side the state is the error, so one sweep acts on
    # a staggered Fourier mode exactly as the 3x3 error symbol
    n = 27
    params = reference_params(scheme)
    for k1, k2 in lattice_thetas(n, 20, seed=hash(scheme) % 1000):
        theta = (2 * np.pi * k1 / n, 2 * np.pi * k2 / n)
        got = probe_mode_matrix(params, n, theta)
        want = symbols.relax_error_symbol(params, np.array(theta), h=1.0 / n)
        assert np.abs(got - want).max() < 1e-12, (k1, k2)


@pytest.mark.parametrize("scheme", symbols.SCHEMES)
@pytest.mark.parametrize("bc", grid.BCS)
def test_exact_solution_is_a_fixed_point(scheme, bc):
    n = 9
    sysm = grid.build_system(n, bc)
    sol = grid.random_state(n, bc, seed=3)
    rhs = sysm.apply(sol)
    params = reference_params(scheme)
    st = sol.copy()
    Smoother(sysm, params).sweep(st, rhs)
    diff = st.copy()
    diff.add_scaled(sol, -1.0)
    assert diff.norm() < 1e-11 * max(1.0, sol.norm())


@pytest.mark.parametrize("scheme", symbols.SCHEMES)
def test_sweep_preserves_gauge_on_periodic_grids(scheme):
    n = 9
    sysm = grid.build_system(n, "periodic")
    st = grid.random_state(n, "periodic", seed=11)
    Smoother(sysm, reference_params(scheme)).sweep(st, None)
    assert abs(st.p.mean()) < 1e-13
    assert abs(st.u.mean()) < 1e-13
    assert abs(st.v.mean()) < 1e-13


def test_sweep_is_linear():
    n = 9
    sysm = grid.build_system(n, "dirichlet")
    params = reference_params("qdr")
    a = grid.random_state(n, "dirichlet", seed=5)
    b = grid.random_state(n, "dirichlet", seed=6)
    combo = a.copy()
    combo.add_scaled(b, 2.5)
    sm = Smoother(sysm, params)
    for st in (a, b, combo):
        sm.sweep(st, None)
    expect = a.flat() + 2.5 * b.flat()
    assert np.abs(combo.flat() - expect).max() < 1e-12


@pytest.mark.parametrize("bc", grid.BCS)
def test_schur_operator_solve(bc):
    n = 9
    op = SchurOperator(n, bc)
    assert np.all(op.diag > 0.0)
    rng = np.random.default_rng(7)
    x = rng.standard_normal((n, n))
    x -= x.mean()
    g = op.apply(x)
    assert abs(g.mean()) < 1e-12  # range of S is mean-zero
    y = op.solve(g)
    assert abs(y.mean()) < 1e-12
    assert np.abs(y - x).max() < 1e-9
    # residual form as well, and complex right-hand sides
    gz = g + 1j * op.apply(np.roll(x, 1, axis=0) - np.roll(x, 1, axis=0).mean())
    yz = op.solve(gz)
    assert np.abs(op.apply(yz) - gz).max() < 1e-9


def test_schur_diagonal_is_constant_on_periodic_grids():
    n = 9
    op = SchurOperator(n, "periodic")
    assert np.abs(op.diag - op.diag[0]).max() < 1e-14
    # dimensionless self-weight 4/3 (h factors cancel in B Q B^T)
    assert abs(op.diag[0] - 4.0 / 3.0) < 1e-13


def test_relax_wrappers_check_scheme():
    n = 9
    sysm = grid.build_system(n, "dirichlet")
    st = grid.random_state(n, "dirichlet", seed=1)
    with pytest.raises(ValueError):
        smoothers.relax_qdr(sysm, st, None, reference_params("qbsr"))
    with pytest.raises(ValueError):
        smoothers.relax_uzawa(sysm, st, None, reference_params("qdr"))
    out = smoothers.relax_qdr(sysm, st, None, reference_params("qdr"))
    # wrapper copies: the input state must be untouched
    assert out is not st
    ref = grid.random_state(n, "dirichlet", seed=1)
    assert np.array_equal(st.flat(), ref.flat())


@pytest.mark.parametrize("scheme", symbols.SCHEMES)
def test_wrappers_match_inplace_sweep(scheme):
    wrappers = {
        "qdr": smoothers.relax_qdr,
        "qbsr": smoothers.relax_qbsr_exact,
        "qibsr": smoothers.relax_qibsr,
        "quzawa": smoothers.relax_uzawa,
    }
    n = 9
    sysm = grid.build_system(n, "dirichlet")
    params = reference_params(scheme)
    st = grid.random_state(n, "dirichlet", seed=2)
    rhs = grid.random_state(n, "dirichlet", seed=3)
    out = wrappers[scheme](sysm, st, rhs, params)
    manual = st.copy()
    Smoother(sysm, params).sweep(manual, rhs)
    assert np.array_equal(out.flat(), manual.flat())


def test_per_mode_damping_on_the_lattice():
    # at the reference parameters every nonzero lattice mode is damped in the
    # spectral sense (single sweeps are non-normal and may grow transiently,
    # so the per-mode radius is the meaningful quantity) and the high modes
    # are damped at least at the advertised smoothing rate
    n = 27
    ks = [(k1, k2) for k1 in range(n) for k2 in range(n) if (k1, k2) != (0, 0)]
    thetas = np.array([[2 * np.pi * k1 / n, 2 * np.pi * k2 / n] for k1, k2 in ks])
    high = symbols.is_high(thetas)
    mu = {"qdr": 17.0 / 47.0, "qbsr": 17.0 / 47.0,
          "qibsr": 0.45, "quzawa": np.sqrt(17.0 / 47.0)}
    for scheme in symbols.SCHEMES:
        S = symbols.relax_error_symbol(reference_params(scheme), thetas, h=1.0 / n)
        rho = np.abs(np.linalg.eigvals(S)).max(axis=1)
        assert rho.max() < 1.0, scheme
        assert rho[high].max() <= mu[scheme] + 1e-6, scheme
