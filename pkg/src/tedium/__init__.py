"""Tedium spectral-element package."""
