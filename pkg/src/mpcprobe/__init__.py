"""Grey-box property-based testing of passive security for two-party protocols.

Protocols are written as choreographies (``.cho``), executed in bit-sliced
batches, and tested by comparing how well decision trees predict the
honest inputs from the corrupt parties' real and ideal views.
"""
from .circuits import Circuit, Gate, builtin, gen_adder, gen_beaver_triple_gen, gen_less_than
from .circuits import parse_bristol
from .compile import CompileOptions, compile_beaver, compile_circuit, compile_gmw
from .errors import MpcProbeError
from .indep_test import (INSECURE, MAYBE_SECURE, ProgramSource, ScorePair, TableSource,
                         TestConfig, TestReport, run_test, test_program)
from .macros import expand_macros
from .mutate import MutationSpec, mutate, mutate_program
from .protogen import GenConfig, UsageLedger, filter_stream, generate
from .runtime import TapeSet, Trace, extract_views, prepare, run_batch
from .stats import NEGLIGIBLE_P, wilcoxon_less
from .syntax import Program, format_program, parse_program
from .tree import DTree, Forest, fit_forest, score, train_tree
from .validate import validate
from .views import CsvStreamSource, ViewTable, emit_csv, parse_csv

import types as _types

__all__ = [name for name, obj in dict(globals()).items()
           if not name.startswith("_") and not isinstance(obj, _types.ModuleType)]
