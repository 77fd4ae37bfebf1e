"""Run the bundled hand-written comparison protocol and look at its views.

The listing shares each party's two input bits, evaluates a less-than
circuit with OT-based AND gates, and reveals the result to both parties.
"""
from importlib.resources import files

import numpy as np

from mpcprobe import TestConfig, extract_views, parse_program, prepare, run_batch, test_program

source = files("mpcprobe").joinpath("data/two_bit_less_than.cho").read_text()
program, analysis = prepare(parse_program(source))
print(f"parties {analysis.parties}; {len(program.body)} statements after macro expansion")
print(f"random bits per party: {analysis.random_widths}")

trace = run_batch(program, runs=8, rng=np.random.default_rng(0))
table = extract_views(trace, "P1")
print(f"\nP1's view, 8 runs: L (P2's inputs) | I (own inputs, output) | R (randomness, messages)")
for L, I, R in zip(table.L, table.I, table.R):
    print("  ", "".join(map(str, L)), "|", "".join(map(str, I)), "|", "".join(map(str, R)))

report = test_program(program, "P1", TestConfig(iters=30, trainN=512, testN=128))
print(f"\np = {report.p_value:.4g}, verdict: {report.verdict}")
