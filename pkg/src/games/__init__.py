"""Davie-Reeds constants, one-dimensional strip games and Hermite projection game values."""
