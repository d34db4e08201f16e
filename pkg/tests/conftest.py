from pathlib import Path

import pytest

from backchase import Schema, RelationSchema, SmoSpec
from backchase import storage

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def join_case():
    """Two-table join with one partnerless row on the left."""
    return {
        "source": storage.load_instance(FIXTURES / "join_dangling_source.json"),
        "script": storage.load_script(FIXTURES / "join_dangling_script.json"),
    }


@pytest.fixture
def merge_column_case():
    """Column merge whose sums collide for two rows."""
    return {
        "source": storage.load_instance(
            FIXTURES / "merge_column_duplicates_source.json"),
        "script": storage.load_script(
            FIXTURES / "merge_column_duplicates_script.json"),
    }


@pytest.fixture
def merge_table_case():
    """Union of two tables sharing one row."""
    return {
        "source": storage.load_instance(
            FIXTURES / "merge_table_overlap_source.json"),
        "script": storage.load_script(
            FIXTURES / "merge_table_overlap_script.json"),
    }


def pytest_runtest_logreport(report):
    """Emit the acceptance banner lines past output capture."""
    if report.when != "call":
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    try:
        from test_acceptance import CRITERIA
    except ImportError:
        return
    if name in CRITERIA:
        number, label = CRITERIA[name]
        status = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE {number} {label}: {status}")
