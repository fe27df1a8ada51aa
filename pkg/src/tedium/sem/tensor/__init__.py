"""Nodal grids and mode contractions."""
