#!/usr/bin/env python3
"""Re-fit the four constants of the leading-edge velocity formula from
measured v_l on a grid of distances below the saddle-node point."""
import sys

from ucml.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "artifacts/intermittency_fit.json"

main(["fit-intermittency", "--h", "2.1", "--n", "400", "--seed", "123",
      "--delta-alpha", "0.01,0.02,0.03,0.05,0.07,0.1,0.13,0.17,0.22,0.26,0.3",
      "--out", OUT])
