"""Inject faults of increasing strength and watch the p-value fall.

A biased sharing coin is the AND of ``b`` fair flips, so with b = 1 the
protocol is untouched and with larger b the honest party's shares are
mostly its plain inputs.
"""
from mpcprobe import CompileOptions, MutationSpec, TestConfig, gen_less_than, mutate
from mpcprobe import test_program

circuit = gen_less_than(4)
cfg = TestConfig(iters=40, trainN=512, testN=128, seed=3)

print("kind               framework  b   p-value     verdict")
for kind, framework in (("biased_sharing", "gmw"), ("biased_and", "gmw"),
                        ("accidental_secret", "beaver")):
    for b in (1, 2, 4):
        spec = MutationSpec(kind, bias=b)
        program = mutate(circuit, CompileOptions(framework), spec)
        report = test_program(program, spec.corrupt, cfg)
        print(f"{kind:<18} {framework:<10} {b}   {report.p_value:<10.3g}  {report.verdict}")
