"""Corpus statistics: clustering, PCA and nested regressions."""
