import numpy as np
import pytest

from wfcred.datagen import GeneratorConfig, generate_dataset, records_to_arrays
from wfcred.reference import fixture_path


@pytest.fixture(scope="session")
def stream_2000():
    """The zero-noise benchmark stream: seed 42, 2000 records, reference weights."""
    records = generate_dataset(GeneratorConfig(count=2000, seed=42))
    X, y = records_to_arrays(records)
    return records, X, y


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def reference_files():
    return {
        "workflow": str(fixture_path("reference_workflow.xml")),
        "history": str(fixture_path("reference_history.csv")),
        "matrix": str(fixture_path("reference_matrix.csv")),
        "perfect_workflow": str(fixture_path("perfect_workflow.xml")),
        "perfect_history": str(fixture_path("perfect_history.csv")),
    }


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    Call with ``(label, failures)``; the line is echoed in the terminal
    summary and the test then asserts that ``failures`` is empty.
    """

    def record(label, failures, detail=""):
        status = "FAIL" if failures else "PASS"
        line = f"{status} {label}"
        if detail:
            line += f" [{detail}]"
        if failures:
            line += " :: " + "; ".join(failures)
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert not failures, "; ".join(failures)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
