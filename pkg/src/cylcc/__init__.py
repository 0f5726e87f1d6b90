"""Desk-scale calculus for cylindrical contact homology.

Subpackages cover the computable pieces of the theory: spectra of the
model asymptotic operators, Conley-Zehnder/Fredholm index arithmetic,
the rational chain complex and its identities, evaluation-map geometry
on spheres, the linear gluing neck, and the orientation sign calculus.
"""

__version__ = "0.1.0"
