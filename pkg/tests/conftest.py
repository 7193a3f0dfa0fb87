"""Shared fixtures plus the acceptance summary.

Tests in test_acceptance.py each stand for one hard requirement; the
terminal summary prints one PASS/FAIL line per criterion so a glance at
the end of a run answers "is the package acceptable" without scrolling.
"""

from __future__ import annotations

import pytest

from sandpiper.config import AppConfig
from sandpiper.service import Service

_ACCEPTANCE_LABELS = {
    "test_kappa_exactness": "kappa exactness on the worked fixture",
    "test_metric_oracle_equivalence": "metric equivalence vs brute-force oracle",
    "test_orchestrator_retry_loop": "orchestrator retry loop call counts",
    "test_validation_gate_fuzz": "validation gate keeps the store clean",
    "test_deid_soundness": "de-identification soundness",
    "test_ingestion_round_trip": "ingestion round trip fidelity",
    "test_end_to_end_offline": "offline end-to-end pipeline",
    "test_api_contract": "REST contract and privilege boundary",
}

_acceptance_results: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].split("[")[0]
    if name in _ACCEPTANCE_LABELS:
        _acceptance_results[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, label in _ACCEPTANCE_LABELS.items():
        outcome = _acceptance_results.get(name)
        if outcome is None:
            continue
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[acceptance] {label}: {status}")


@pytest.fixture()
def service():
    """In-memory service with privileged export enabled."""
    return Service(AppConfig(db_path=":memory:", maskmap_token="let-me-in"))
