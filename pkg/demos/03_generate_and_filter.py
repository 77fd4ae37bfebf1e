"""Generate random choreographies and keep those a cheap test cannot fault.

Kept programs are then retested with more training data.  Some that looked
fine at low power turn out to leak, which is the point of the escalation.
"""
from dataclasses import replace

from mpcprobe import GenConfig, TestConfig, filter_stream, format_program, test_program

cfg = GenConfig(parties=2, secret_bits=3, random_bits=8, output_bits=2, body_len=40,
                op_weights={"compute": 4, "send": 1, "oblivious": 1, "flip": 4}, seed=5)
result = filter_stream(cfg, keep=5, max_attempts=1000)
print(f"kept {len(result.programs)} programs out of {result.attempts} candidates")

print("\nfirst kept program:")
print(format_program(result.programs[0]))

print("seed         trainN=128   trainN=1024")
for seed, program in zip(result.seeds, result.programs):
    verdicts = []
    for trainN in (128, 1024):
        report = test_program(program, "P1", TestConfig(16, trainN, 32, seed=seed + 1))
        verdicts.append(report.verdict)
    print(f"{seed:<12} {verdicts[0]:<12} {verdicts[1]}")
