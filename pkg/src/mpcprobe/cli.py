"""Command-line entry point.

Exit codes: 0 success or MAYBE_SECURE, 3 INSECURE, 1 usage error,
2 runtime or data error.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .circuits import builtin, parse_bristol
from .compile import CompileOptions, compile_circuit
from .errors import MpcProbeError
from .indep_test import INSECURE, ProgramSource, TableSource, TestConfig, run_test
from .mutate import MutationSpec, mutate_program
from .protogen import GenConfig, candidate_seed, filter_stream, generate, manifest_line
from .runtime import extract_views, prepare, run_batch
from .syntax import format_program, parse_program
from .views import CsvStreamSource, emit_csv, parse_csv

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_INSECURE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _corrupt(value):
    return tuple(q.strip() for q in value.split(",") if q.strip())


def _load_program(path):
    return parse_program(Path(path).read_text())


def _test_config(a):
    return TestConfig(a.iters, a.train, a.test, a.alpha, a.seed)


def _report(a, report):
    if not a.timing:
        report = replace(report, wall_seconds=None)
    d = report.to_dict()
    _write(a.json, json.dumps(d, indent=2) + "\n")
    if a.json not in (None, "-"):
        print(f"p = {report.p_value:.6g}  verdict: {report.verdict.replace('_', ' ')}")
    return EXIT_INSECURE if report.verdict == INSECURE else EXIT_OK


# -- subcommands ------------------------------------------------------------

def cmd_parse(a):
    program, analysis = prepare(_load_program(a.file))
    if a.format:
        sys.stdout.write(format_program(program))
        return EXIT_OK
    print(f"parties: {', '.join(analysis.parties) or '(none)'}")
    print(f"statements: {len(program.body)}  messages: {len(analysis.messages)}")
    for label, widths in (("secret", analysis.secret_widths), ("random", analysis.random_widths),
                          ("output", analysis.output_widths)):
        print(f"{label} bits: " + ", ".join(f"{q}={widths.get(q, 0)}" for q in analysis.parties))
    return EXIT_OK


def _compile(a):
    if a.builtin:
        circuit = builtin(a.builtin)
    else:
        circuit = parse_bristol(Path(a.circuit).read_text())
    spec = MutationSpec.parse(a.mutate) if a.mutate else None
    return compile_circuit(circuit, CompileOptions(a.framework, spec))


def cmd_compile(a):
    _write(a.output, format_program(_compile(a)))
    return EXIT_OK


def _run_table(program, runs, corrupt, seed):
    program, analysis = prepare(program)
    trace = run_batch(program, runs=runs, rng=np.random.default_rng(seed), analysis=analysis)
    return extract_views(trace, corrupt)


def cmd_run(a):
    table = _run_table(_load_program(a.file), a.runs, _corrupt(a.corrupt), a.seed)
    buf = io.StringIO()
    emit_csv(table, buf)
    _write(a.csv, buf.getvalue())
    return EXIT_OK


def cmd_gen(a):
    raw = json.loads(Path(a.config).read_text()) if a.config else {}
    cfg = GenConfig.from_dict(raw)
    if a.seed is not None:
        cfg = replace(cfg, seed=a.seed)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = []
    if a.filter:
        res = filter_stream(cfg, keep=a.keep, corrupt=a.corrupt, max_attempts=a.max_attempts)
        verdicts = {e["seed"]: e for e in res.log}
        items = list(zip(res.seeds, res.programs))
        print(f"kept {len(items)} of {res.attempts} candidates (attrition {res.attrition})",
              file=sys.stderr)
    else:
        seeds = [candidate_seed(cfg.seed, k) for k in range(a.keep)]
        items = [(s, generate(replace(cfg, seed=s))) for s in seeds]
        verdicts = {}
    for k, (seed, program) in enumerate(items):
        path = out / f"{k:04d}.cho"
        path.write_text(format_program(program))
        entry = verdicts.get(seed, {})
        lines.append(manifest_line(seed, cfg, entry.get("verdict"), path.name,
                                   entry.get("pValue")))
    (out / "manifest.jsonl").write_text("".join(line + "\n" for line in lines))
    return EXIT_OK


def cmd_test(a):
    cfg = _test_config(a)
    if a.csv:
        with open(a.csv) as fh:
            return _report(a, run_test(CsvStreamSource(fh), cfg))
    program = _load_program(a.cho)
    if a.mutate:
        spec = MutationSpec.parse(a.mutate)
        program = mutate_program(prepare(program)[0], spec, _corrupt(a.corrupt)[0])
    return _report(a, run_test(ProgramSource(program, _corrupt(a.corrupt), a.seed), cfg))


def cmd_pipeline(a):
    program = parse_program(format_program(_compile(a)))
    cfg = _test_config(a)
    runs = cfg.iters * (cfg.trainN + cfg.testN)
    table = _run_table(program, runs, _corrupt(a.corrupt), a.seed)
    if a.csv:
        with open(a.csv, "w") as fh:
            emit_csv(table, fh)
    return _report(a, run_test(TableSource(table), cfg))


# -- argument parsing -------------------------------------------------------

def _add_test_args(p):
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--train", type=int, default=1024, help="training rows per iteration")
    p.add_argument("--test", type=int, default=256, help="testing rows per iteration")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", default="-", help="report path (default: stdout)")
    p.add_argument("--timing", action="store_true",
                   help="record wall time in the report (makes it non-reproducible)")


def _add_circuit_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--circuit", help="Bristol-fashion circuit file")
    src.add_argument("--builtin", help="adder:N, lt:N or btgen:N")
    p.add_argument("--framework", choices=("gmw", "beaver"), default="gmw")
    p.add_argument("--mutate", help="e.g. kind=biased_sharing,b=3,sites=all")


def build_parser():
    parser = _Parser(prog="mpcprobe", description="Property-based testing of passive MPC "
                     "security on choreographic protocols.")
    parser.add_argument("--manifest", help="write a JSON run manifest here")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="parse, expand and validate a .cho file")
    p.add_argument("file")
    p.add_argument("--format", action="store_true", help="print the expanded program")
    p.set_defaults(func=cmd_parse, inputs=("file",))

    p = sub.add_parser("run", help="execute a program and write the view table as CSV")
    p.add_argument("file")
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--corrupt", required=True, help="comma-separated corrupt parties")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default="-")
    p.set_defaults(func=cmd_run, inputs=("file",), outputs=("csv",))

    p = sub.add_parser("compile", help="compile a circuit to a .cho program")
    _add_circuit_args(p)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_compile, inputs=("circuit",), outputs=("output",))

    p = sub.add_parser("gen", help="generate random programs")
    p.add_argument("--config", help="JSON generator config")
    p.add_argument("--keep", type=int, default=1)
    p.add_argument("--out", default="generated")
    p.add_argument("--seed", type=int)
    p.add_argument("--filter", action="store_true",
                   help="keep only programs that pass a low-power test")
    p.add_argument("--corrupt", default="P1")
    p.add_argument("--max-attempts", type=int)
    p.set_defaults(func=cmd_gen, inputs=("config",), outputs=("out",))

    p = sub.add_parser("test", help="run the insecurity test")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--csv", help="view table CSV (rows are consumed in order)")
    src.add_argument("--cho", help="program to execute in-process")
    p.add_argument("--corrupt", help="corrupt parties (required with --cho)")
    p.add_argument("--mutate", help="accidental_secret spec applied to the program")
    _add_test_args(p)
    p.set_defaults(func=cmd_test, inputs=("csv", "cho"), outputs=("json",))

    p = sub.add_parser("pipeline", help="compile, run and test in one go")
    _add_circuit_args(p)
    p.add_argument("--corrupt", default="P1")
    p.add_argument("--csv", help="also keep the generated view table")
    _add_test_args(p)
    p.set_defaults(func=cmd_pipeline, inputs=("circuit",), outputs=("csv", "json"))
    return parser


def _manifest(a, argv, code, wall):
    files = {}
    for name in getattr(a, "inputs", ()):
        path = getattr(a, name, None)
        if path and os.path.isfile(path):
            files[path] = _sha256(path)
    config = {k: v for k, v in vars(a).items()
              if k not in ("func", "inputs", "outputs", "manifest")}
    return {"subcommand": a.command, "argv": list(argv), "config": config,
            "seed": getattr(a, "seed", None), "inputs": files,
            "outputs": [getattr(a, k) for k in getattr(a, "outputs", ())
                        if getattr(a, k, None) not in (None, "-")],
            "exitCode": code, "wallSeconds": wall}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        a = build_parser().parse_args(argv)
        if a.command == "test" and a.cho and not a.corrupt:
            raise UsageError("mpcprobe test: --cho needs --corrupt")
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    start = time.perf_counter()
    try:
        code = a.func(a)
    except (MpcProbeError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_RUNTIME
    if a.manifest:
        wall = time.perf_counter() - start
        Path(a.manifest).write_text(json.dumps(_manifest(a, argv, code, wall), indent=2) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
