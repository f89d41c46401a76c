"""Testbed sweeps, the near-tight family and the command-line interface."""

from .testbed import (InstanceOutcome, SweepRow, TestbedSpec, evaluate_instance, generate_instances,
                      run_sweep, run_table1, run_table2, run_tightness, tightness_instance)

__all__ = [
    "InstanceOutcome", "SweepRow", "TestbedSpec", "evaluate_instance", "generate_instances",
    "run_sweep", "run_table1", "run_table2", "run_tightness", "tightness_instance",
]
