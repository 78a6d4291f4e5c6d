"""Steady thin vortex rings with a vortex-sheet interface and surface tension.

Spectral boundary-integral solver for the two-phase axisymmetric Euler
equations in the thin-ring regime: given a density ratio rho and a surface
tension law sigma(eps), it computes the cross-section shape, the ring speed W,
the flux constant gamma and the Bernoulli constant nu, and compares them
against the thin-ring asymptotics (generalized Kelvin-Hicks law).
"""

__version__ = "0.1.0"
