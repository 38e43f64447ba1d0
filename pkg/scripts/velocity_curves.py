#!/usr/bin/env python3
"""Measure the leading- and trailing-edge velocity curves (v_l over
alpha below the saddle-node point, v_t over h) at publication scale."""
import sys

from ucml.cli import main

OUT = sys.argv[1] if len(sys.argv) > 1 else "artifacts/velocities"

main(["velocities", "--n", "400", "--seed", "11", "--out", OUT])
