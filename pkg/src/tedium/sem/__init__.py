"""Spectral-element fast-diagonalization solvers.

Q^k spectral-element discretizations on rectangular domains, inverted with
per-direction eigen decompositions and mode contractions, plus a
preconditioned conjugate gradient for variable potentials and a BDF2
Cahn-Hilliard stepper.
"""
