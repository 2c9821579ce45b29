"""Structural and link-prediction entropy estimators."""
