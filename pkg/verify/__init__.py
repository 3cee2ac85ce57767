"""Property checks, sweeps, alpha fits, counterexample reproduction and search for the MQMI quantities."""

from .alpha import fit_alpha, minimal_alpha
from .checks import (
    CHECKS,
    check_additivity,
    check_coarsening_monotone,
    check_complete_monogamy,
    check_discorrelated,
    check_entropy_bound,
    check_nonnegative,
    check_pair_monotone,
    check_ssa,
    check_symmetric,
    check_triangle,
)
from .registry import CASES, reproduce_counterexample
from .report import COUNTEREXAMPLE, FAIL, PASS, CheckReport, SweepConfig, VerificationError, Witness, write_json
from .search import SEARCH_TARGETS, search
from .sweep import run_sweep
from .table import TableReport, build_table

__all__ = [
    "CASES",
    "CHECKS",
    "COUNTEREXAMPLE",
    "CheckReport",
    "FAIL",
    "PASS",
    "SEARCH_TARGETS",
    "SweepConfig",
    "TableReport",
    "VerificationError",
    "Witness",
    "build_table",
    "check_additivity",
    "check_coarsening_monotone",
    "check_complete_monogamy",
    "check_discorrelated",
    "check_entropy_bound",
    "check_nonnegative",
    "check_pair_monotone",
    "check_ssa",
    "check_symmetric",
    "check_triangle",
    "fit_alpha",
    "minimal_alpha",
    "reproduce_counterexample",
    "run_sweep",
    "search",
    "write_json",
]
