"""Gaussian special functions, quadrature and root finding."""
