import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from napspmv import Topology, example_fixture, partition_contiguous


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    lines = {}
    for outcome, word in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid and "test_criterion" in nodeid:
                name = nodeid.split("::")[-1]
                # a FAIL (from call or setup) must not be overwritten
                if lines.get(name) != "FAIL":
                    lines[name] = word
    if lines:
        terminalreporter.section("acceptance criteria")
        for name in sorted(lines):
            terminalreporter.write_line(f"{lines[name]}  {name}")


@pytest.fixture
def example():
    """The 6x6 worked example: (matrix, partition, topology)."""
    return example_fixture()


@pytest.fixture
def example_matrix(example):
    return example[0]


@pytest.fixture
def example_partition(example):
    return example[1]


@pytest.fixture
def example_topology(example):
    return example[2]


def random_case(n, nnz_per_row, seed):
    """Deterministic random matrix for cross-checking tests."""
    from napspmv import generate_random

    return generate_random(n, nnz_per_row, seed)


@pytest.fixture
def ones6():
    return np.ones(6)
