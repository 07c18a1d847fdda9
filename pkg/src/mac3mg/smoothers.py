"""One-sweep relaxation schemes for the staggered Stokes system.

Four schemes share the pattern ``x <- x + omega * delta`` where ``delta``
comes from an approximate solve of ``M delta = r`` with the full residual
``r = rhs - L x``:

* ``qdr``     distributive relaxation: triangular mass solve, then the
              distribution ``(du, dp) = (du' + grad dp', -A_p dp')``.
* ``qbsr``    exact block solve: pressure Schur system solved directly.
* ``qibsr``   inexact block solve: one weighted Jacobi sweep on the Schur
              system, using the assembled Schur diagonal.
* ``quzawa``  mass-scaled velocity update, sigma-scaled pressure update.

The inverse momentum approximation is everywhere ``C^-1 = diag(Q, Q)``, a
stencil multiplication, so only ``qbsr`` performs a linear solve.  All sweeps
are whole-field (Jacobi-type) updates and accept complex fields, which the
per-mode Fourier consistency tests rely on.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import assemble, grid
from .symbols import RelaxParams


def _solve_maybe_complex(lu, rhs: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(rhs):
        return lu.solve(rhs.real) + 1j * lu.solve(rhs.imag)
    return lu.solve(rhs)


class SchurOperator:
    """Assembled pressure Schur complement ``B diag(Q, Q) B^T`` for one level.

    The matrix is symmetric positive semi-definite with the constant pressure
    in its kernel.  ``solve`` factorizes the matrix augmented with the
    constant-mode constraint, returning the mean-zero solution of consistent
    systems (equivalently the pseudoinverse applied to the right-hand side).
    """

    def __init__(self, n: int, bc: str):
        self.n = n
        self.bc = bc
        self.mat = assemble.assemble_schur(n, bc)
        self.diag = self.mat.diagonal().copy()
        if (self.diag <= 0.0).any():
            raise ValueError("Schur diagonal must be positive")
        m = self.mat.shape[0]
        self._c = np.full((m, 1), 1.0 / np.sqrt(m))
        self._lu = None

    def apply(self, p: np.ndarray) -> np.ndarray:
        return (self.mat @ p.ravel()).reshape(p.shape)

    def solve(self, g: np.ndarray) -> np.ndarray:
        """Mean-zero solution of ``S x = g`` (g is consistent up to roundoff)."""
        if self._lu is None:
            aug = sp.bmat([[self.mat, self._c], [self._c.T, None]], format="csc")
            self._lu = spla.splu(aug)
        rhs = np.concatenate([g.ravel(), np.zeros(1, g.dtype)])
        return _solve_maybe_complex(self._lu, rhs)[:-1].reshape(g.shape)


class Smoother:
    """Bound relaxation sweep: a system, a scheme, and its parameters.

    Schur-related pieces are built lazily so the cheap schemes never pay for
    an assembly.
    """

    def __init__(self, system: grid.SaddleSystem, params: RelaxParams):
        self.system = system
        self.params = params
        self._schur: SchurOperator | None = None

    def schur(self) -> SchurOperator:
        if self._schur is None:
            self._schur = SchurOperator(self.system.n, self.system.bc)
        return self._schur

    def sweep(self, state: grid.StaggeredState, rhs: grid.StaggeredState | None) -> None:
        """Apply one relaxation sweep in place."""
        sysm = self.system
        p = self.params
        r = sysm.residual(state, rhs)
        if p.scheme == "qdr":
            du = sysm.apply_q(r.u, "u") / p.alpha
            dv = sysm.apply_q(r.v, "v") / p.alpha
            dp_hat = sysm.apply_qp(r.p - sysm.neg_div(du, dv)) / p.alpha
            gx, gy = sysm.grad(dp_hat)
            delta = grid.StaggeredState(state.n, state.bc,
                                        du + gx, dv + gy, -sysm.apply_ap(dp_hat))
        elif p.scheme == "qbsr":
            qu = sysm.apply_q(r.u, "u")
            qv = sysm.apply_q(r.v, "v")
            dp = self.schur().solve(sysm.neg_div(qu, qv) - p.alpha * r.p)
            gx, gy = sysm.grad(dp)
            delta = grid.StaggeredState(
                state.n, state.bc,
                sysm.apply_q(r.u - gx, "u") / p.alpha,
                sysm.apply_q(r.v - gy, "v") / p.alpha,
                dp,
            )
        elif p.scheme == "qibsr":
            qu = sysm.apply_q(r.u, "u")
            qv = sysm.apply_q(r.v, "v")
            g = sysm.neg_div(qu, qv) - p.alpha * r.p
            dp = p.omega_j * g / self.schur().diag.reshape(g.shape)
            gx, gy = sysm.grad(dp)
            delta = grid.StaggeredState(
                state.n, state.bc,
                sysm.apply_q(r.u - gx, "u") / p.alpha,
                sysm.apply_q(r.v - gy, "v") / p.alpha,
                dp,
            )
        elif p.scheme == "quzawa":
            du = sysm.apply_q(r.u, "u") / p.alpha
            dv = sysm.apply_q(r.v, "v") / p.alpha
            delta = grid.StaggeredState(state.n, state.bc,
                                        du, dv, -p.sigma * (r.p - sysm.neg_div(du, dv)))
        else:
            raise ValueError(f"unknown scheme {p.scheme!r}")
        state.add_scaled(delta, p.omega)


def _relax(scheme: str, system, state, rhs, params: RelaxParams) -> grid.StaggeredState:
    if params.scheme != scheme:
        raise ValueError(f"params are for {params.scheme!r}, expected {scheme!r}")
    out = state.copy()
    Smoother(system, params).sweep(out, rhs)
    return out


def relax_qdr(system, state, rhs, params: RelaxParams) -> grid.StaggeredState:
    """Distributive relaxation sweep (returns the updated state)."""
    return _relax("qdr", system, state, rhs, params)


def relax_qbsr_exact(system, state, rhs, params: RelaxParams) -> grid.StaggeredState:
    return _relax("qbsr", system, state, rhs, params)


def relax_qibsr(system, state, rhs, params: RelaxParams) -> grid.StaggeredState:
    return _relax("qibsr", system, state, rhs, params)


def relax_uzawa(system, state, rhs, params: RelaxParams) -> grid.StaggeredState:
    return _relax("quzawa", system, state, rhs, params)
