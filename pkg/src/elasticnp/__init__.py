"""Boundary-integral spectral toolkit for the elastic Neumann-Poincare operator.

Modules
-------
params_kernels   Lame constants, Kelvin matrix, pointwise kernels
geometry         curves and surfaces with quadrature data
operators        dense discretizations of S, K, K^div and friends
spectra          symmetric pencils, clustering, field decomposition
sphere_analytic  exact rational oracle for the unit ball
planar           Cauchy transform and 2D-specific identities
potentials_bvp   off-boundary potentials, Dirichlet solves, energies
cli              command-line front end
"""
__version__ = "0.1.0"
