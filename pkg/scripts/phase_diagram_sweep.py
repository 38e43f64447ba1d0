#!/usr/bin/env python3
"""Resumable desk-scale phase-diagram sweep over (alpha, h) with the
laminar-to-puff overlay curve and the fixed-h lifetime slice."""
import sys

from ucml.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "artifacts/phase_diagram"

main(["phase-diagram", "--alpha", "0.0:3.0:0.1", "--h", "2.02:3.0:0.07",
      "--n", "20", "--max-time", "20000", "--seed", "5",
      "--out", OUT, "--resume"])
