#!/usr/bin/env python
"""msent - Main entry point.

Measures the multiscale structural complexity of undirected networks:
spectral coarsening to several scales, compression entropy and
link-prediction entropy normalized against random baselines, and
clustering/regression analytics over whole corpora.
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
