"""Multigrid with coarsening by three for the MAC Stokes discretization.

Subpackages split along the two halves of the problem: the Fourier-analysis
side (``stencils``, ``symbols``, ``twogrid``, ``analytic``) predicts smoothing
and two-grid convergence factors, and the grid side (``grid``, ``assemble``,
``smoothers``, ``multigrid``) measures them.  ``cli`` reproduces the tables.
"""

from .symbols import RelaxParams, reference_params

__all__ = ["RelaxParams", "reference_params"]
