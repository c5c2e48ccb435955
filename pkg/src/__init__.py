"""
Grothendieck lower-bound laboratory

Numerical reproduction of the Davie-Reeds lower bound on the Grothendieck
constant and of its improvement through the perturbed game Pi_1 - lam* I - eps Pi_3.
"""

__version__ = "1.0.0"
__author__ = "glab maintainers"
