#!/usr/bin/env python3
"""Mean puff lifetime versus tau_s at two couplings, with the
straight-line fits of ln(tau) on tau_s.

The h grids stay on the puff side of the puff-slug boundary for each
alpha; below that the structures expand and lifetimes diverge.
"""
import sys

from ucml.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "artifacts/lifetime_scaling"

main(["lifetime-scaling", "--alpha", "0.5",
      "--h", "2.07,2.08,2.1,2.14,2.18,2.22,2.26,2.3",
      "--n", "2000", "--max-time", "1000000", "--seed", "7",
      "--out", f"{OUT}/alpha05"])
main(["lifetime-scaling", "--alpha", "0.8",
      "--h", "2.12,2.14,2.18,2.22,2.26,2.3",
      "--n", "2000", "--max-time", "1000000", "--seed", "7",
      "--out", f"{OUT}/alpha08"])
