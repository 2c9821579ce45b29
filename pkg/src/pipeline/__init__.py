"""Multiscale entropy trajectories of single graphs and corpora."""
