"""Multilevel spectral graph coarsening."""
