"""Statements of experimental results and the quantum explanations that fit them."""

from .cycle import iterate_cycle, run_cycle
from .domains import Assignment, Detector, DetectorDomain, Knob, KnobDomain
from .explanations import (
    Factorization,
    canonical_explanations,
    explain_all_in_measurement,
    explain_all_in_state,
    explain_sqrt,
    verify_explains,
)
from .measures import ParamProbMeasure, d_uniform, induced_partition, marginalize, metdev_ppm
from .qkd import bb84_build, bb84_insecure_alternative
from .quantum import Explanation, helstrom_error, helstrom_povm, metdev_density, trace_distance, trace_rule

__all__ = [
    "Assignment",
    "Detector",
    "DetectorDomain",
    "Explanation",
    "Factorization",
    "Knob",
    "KnobDomain",
    "ParamProbMeasure",
    "bb84_build",
    "bb84_insecure_alternative",
    "canonical_explanations",
    "d_uniform",
    "explain_all_in_measurement",
    "explain_all_in_state",
    "explain_sqrt",
    "helstrom_error",
    "helstrom_povm",
    "induced_partition",
    "iterate_cycle",
    "marginalize",
    "metdev_density",
    "metdev_ppm",
    "run_cycle",
    "trace_distance",
    "trace_rule",
    "verify_explains",
]
