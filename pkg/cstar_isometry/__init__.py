"""Numerical toolkit for surjective isometries between invertible groups of
finite-dimensional C*-algebras."""
