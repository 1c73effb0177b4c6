"""Built-in worked example: a 6x6 matrix on 3 nodes of 2 processes.

Six ranks own one row each, so every rank/column interaction is visible by
eye. The sparsity pattern exercises every communication class at least
once: on-process diagonals, an on-node neighbor, and off-node columns with
overlapping demand across nodes. Values encode their position
(value of entry (i, j) is 10*i + j + 1) so misrouted data is immediately
visible in results, not just in index checks.
"""

from __future__ import annotations

import numpy as np

from .partition import Partition, partition_contiguous
from .sparse import CsrMatrix
from .topology import Topology

EXAMPLE_ROWS: dict[int, list[int]] = {
    0: [0, 1, 3, 5],
    1: [1, 4],
    2: [2, 3],
    3: [0, 1, 2, 3],
    4: [0, 2, 4],
    5: [0, 5],
}


def example_matrix() -> CsrMatrix:
    cols: list[int] = []
    offsets = [0]
    vals: list[float] = []
    for i in range(6):
        row = EXAMPLE_ROWS[i]
        cols.extend(row)
        vals.extend(10.0 * i + j + 1.0 for j in row)
        offsets.append(len(cols))
    return CsrMatrix(
        6,
        6,
        np.array(offsets, dtype=np.int64),
        np.array(cols, dtype=np.int64),
        np.array(vals),
    )


def example_fixture() -> tuple[CsrMatrix, Partition, Topology]:
    """The matrix, its one-row-per-rank partition, and the 3x2 topology."""
    topo = Topology(num_nodes=3, ppn=2)
    return example_matrix(), partition_contiguous(6, topo.num_procs), topo


FIXTURES = {"example1": example_fixture}


def fixture_names() -> list[str]:
    return sorted(FIXTURES)


def get_fixture(name: str) -> tuple[CsrMatrix, Partition, Topology]:
    if name not in FIXTURES:
        raise ValueError(
            f"unknown fixture {name!r}; available: {', '.join(fixture_names())}"
        )
    return FIXTURES[name]()
