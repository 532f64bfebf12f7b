"""Diagnostics for planned codes and achievability reports."""

import math
from typing import Any, Dict, List

from .asymptotics import PROVENANCE_GAUSSIAN, ChannelConstants, CodePlan
from .coding import AchievabilityReport

LARGE_KEY_FRACTION = 0.5
APPROXIMATE_METHODS = ("berry-esseen", "hoeffding")


def diagnose_plan(plan: CodePlan, constants: ChannelConstants) -> Dict[str, Any]:
    """Check a plan for inconsistencies and flag values worth a second look."""
    diagnosis: Dict[str, Any] = {
        "n": plan.n,
        "metric": plan.metric,
        "ell_n": plan.ell_n,
        "log_m_n": plan.log_m_n,
        "log_k_n": plan.log_k_n,
        "provenance": plan.provenance,
        "issues": [],
        "warnings": [],
    }
    issues: List[str] = diagnosis["issues"]
    warnings: List[str] = diagnosis["warnings"]

    if not 1 <= plan.ell_n <= plan.n:
        issues.append(f"ell_n={plan.ell_n} outside [1, n={plan.n}]")
    if plan.ell_n > plan.n // 4:
        warnings.append(f"ell_n={plan.ell_n} exceeds n/4; PPM bounds are outside their regime")
    if not math.isfinite(plan.log_m_n):
        issues.append("log M is not finite")
    elif plan.log_m_n <= 0:
        issues.append(f"log M = {plan.log_m_n:.6g} <= 0: no message fits")
    if plan.log_k_n < 0:
        issues.append(f"log K = {plan.log_k_n:.6g} < 0")
    if plan.log_m_n > plan.ell_n * constants.d_p:
        warnings.append("log M exceeds ell_n D_P (eps > 1/2)")
    if plan.log_m_n > 0 and plan.log_k_n > LARGE_KEY_FRACTION * plan.log_m_n:
        warnings.append(f"key is {plan.log_k_n / plan.log_m_n:.2f} of the message length")
    if plan.provenance == PROVENANCE_GAUSSIAN:
        warnings.append("Gaussian plan: Berry-Esseen term dropped from the Q^-1 argument")

    return diagnosis


def diagnose_certificate(report: AchievabilityReport) -> Dict[str, Any]:
    """Summarize which achievability conditions fail and by how much."""
    diagnosis: Dict[str, Any] = {
        "n": report.n,
        "metric": report.metric,
        "passed": report.passed,
        "issues": [],
        "warnings": [],
    }
    for condition in report.conditions:
        if condition.passed:
            if condition.method in APPROXIMATE_METHODS:
                diagnosis["warnings"].append(
                    f"{condition.name} passes via {condition.method}, not exactly"
                )
            continue
        message = f"{condition.name}: slack {condition.slack:.6g}"
        if condition.required:
            diagnosis["issues"].append(message)
        else:
            diagnosis["warnings"].append(message + " (informational)")
    return diagnosis


def summarize_diagnosis(diagnosis: Dict[str, Any]) -> str:
    """One-line "issues; warnings" text for a CSV cell."""
    parts = list(diagnosis.get("issues", [])) + list(diagnosis.get("warnings", []))
    return "; ".join(parts)


def print_diagnosis(diagnosis: Dict[str, Any]) -> None:
    """Print diagnosis in a readable format."""
    print("\n" + "=" * 60)
    print("DIAGNOSIS REPORT")
    print("=" * 60)
    for key in ("n", "metric", "ell_n", "log_m_n", "log_k_n", "provenance", "passed"):
        if key in diagnosis:
            print(f"{key}: {diagnosis[key]}")
    if diagnosis.get("issues"):
        print(f"\n[ISSUES] ({len(diagnosis['issues'])}):")
        for issue in diagnosis["issues"]:
            print(f"  - {issue}")
    if diagnosis.get("warnings"):
        print(f"\n[WARNINGS] ({len(diagnosis['warnings'])}):")
        for warning in diagnosis["warnings"]:
            print(f"  - {warning}")
    print("\n" + "=" * 60)
