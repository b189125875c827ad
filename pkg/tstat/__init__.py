"""
Leading Term and Convergence Rate for Student's t Statistic

This package computes the leading term L_n and the truncated-moment rate
functional delta_n in the central limit theorem for Student's t statistic,
and checks the approximation and rate claims numerically by quadrature,
exact enumeration and Monte Carlo simulation.
"""

__version__ = '1.0.0'
