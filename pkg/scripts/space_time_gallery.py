#!/usr/bin/env python3
"""Export the three reference space-time fields (decaying puff, long
puff, growing slug) as CSVs for external plotting."""
import sys

from ucml.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "artifacts/space_time"

CASES = [
    ("puff_narrow", "0.5", "2.05", "20000"),
    ("puff_decaying", "0.8", "2.1", "20000"),
    ("slug", "2.8", "2.1", "2000"),
]

for name, alpha, h, max_time in CASES:
    main(["simulate", "--alpha", alpha, "--h", h, "--max-time", max_time,
          "--seed", "1", "--out", f"{OUT}/{name}.csv"])
