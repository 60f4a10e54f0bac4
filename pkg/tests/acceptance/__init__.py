"""
Acceptance Package - end-to-end acceptance criteria of the plate solver.

Run with ``python scripts/run_acceptance.py``; pytest does not collect it.
"""

from .cases import (
    AcceptanceCase,
    ACCEPTANCE_CASES,
    ACCEPTANCE_CONFIG,
    get_cases_by_phase,
    get_case_by_id,
)
from .runner import CaseResult, AcceptanceRunner, gradient_error, jacobian_error, random_state
from .analyzer import AcceptanceAnalyzer, PhaseReport, FailureAnalysis, analyze_results

__all__ = [
    # Cases
    "AcceptanceCase",
    "ACCEPTANCE_CASES",
    "ACCEPTANCE_CONFIG",
    "get_cases_by_phase",
    "get_case_by_id",
    # Runner
    "CaseResult",
    "AcceptanceRunner",
    "gradient_error",
    "jacobian_error",
    "random_state",
    # Analyzer
    "AcceptanceAnalyzer",
    "PhaseReport",
    "FailureAnalysis",
    "analyze_results",
]
