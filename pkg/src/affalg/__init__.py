"""Affine Lie algebroids in coordinates: axioms, exterior calculus, lifts and Lagrangian dynamics."""
__version__ = "0.1.0"
