"""Split one rank's rows into locality blocks for overlapped multiply.

Each stored nonzero of a rank's rows is classed by the owner of its column:
the rank itself (on_process), another rank on the same node (on_node), or a
rank on a different node (off_node). Standard mode folds the last two into
a single off_process class.

Every block is a CSR over the rank's rows (ascending global order) with
columns re-indexed: the on_process block indexes straight into the rank's
local vector slice, the other blocks index into their own col_map, the
sorted distinct global columns the block references. Receive buffers are
assembled in that same ascending-global order, so block x buffer multiplies
line up without further permutation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .partition import Partition
from .sparse import CsrMatrix
from .topology import Topology

STANDARD = "standard"
NODE_AWARE = "node_aware"


@dataclass
class LocalBlocks:
    """Locality-split CSR blocks for a single rank."""

    rank: int
    mode: str
    owned_rows: np.ndarray
    on_process: CsrMatrix
    # standard mode
    off_process: CsrMatrix | None = None
    off_process_cols: np.ndarray | None = None
    # node_aware mode
    on_node: CsrMatrix | None = None
    on_node_cols: np.ndarray | None = None
    off_node: CsrMatrix | None = None
    off_node_cols: np.ndarray | None = None

    @property
    def nnz(self) -> int:
        total = self.on_process.nnz
        for block in (self.off_process, self.on_node, self.off_node):
            if block is not None:
                total += block.nnz
        return total


def split_blocks(
    a: CsrMatrix,
    part: Partition,
    topo: Topology,
    rank: int,
    mode: str = NODE_AWARE,
) -> LocalBlocks:
    """Build the locality blocks of `rank`'s rows of `a` under `part`/`topo`."""
    if mode not in (STANDARD, NODE_AWARE):
        raise ValueError(f"mode must be {STANDARD!r} or {NODE_AWARE!r}, got {mode!r}")
    if part.nrows != a.nrows:
        raise ValueError(
            f"partition covers {part.nrows} rows but the matrix has {a.nrows}"
        )
    if a.nrows != a.ncols:
        raise ValueError("distributed multiply expects a square matrix")
    if part.num_procs != topo.num_procs:
        raise ValueError(
            f"partition has {part.num_procs} ranks but topology has {topo.num_procs}"
        )
    topo._check_rank(rank)

    owned = part.owned_rows(rank)
    starts = a.row_offsets[owned]
    counts = a.row_offsets[owned + 1] - starts
    total = int(counts.sum())
    local_rows = np.repeat(np.arange(owned.size, dtype=np.int64), counts)
    # storage positions of the owned rows' entries, in (row, stored-col) order
    span_begin = np.cumsum(counts) - counts
    gather = (
        np.arange(total, dtype=np.int64)
        - np.repeat(span_begin, counts)
        + np.repeat(starts, counts)
    )
    cols = a.col_indices[gather]
    vals = a.values[gather]

    col_owner = part.owner[cols] if cols.size else np.empty(0, dtype=np.int64)
    on_proc_mask = col_owner == rank
    same_node_mask = (col_owner // topo.ppn) == topo.node_of(rank)

    def sub_block(mask: np.ndarray, col_space: str) -> tuple[CsrMatrix, np.ndarray]:
        sub_cols = cols[mask]
        sub_vals = vals[mask]
        sub_rows = local_rows[mask]
        row_offsets = np.zeros(owned.size + 1, dtype=np.int64)
        np.add.at(row_offsets, sub_rows + 1, 1)
        np.cumsum(row_offsets, out=row_offsets)
        if col_space == "local_vector":
            col_map = owned
            new_cols = part.local_index(rank, sub_cols) if sub_cols.size else sub_cols
            ncols = owned.size
        else:
            col_map = np.unique(sub_cols)
            new_cols = np.searchsorted(col_map, sub_cols)
            ncols = col_map.size
        return CsrMatrix(owned.size, ncols, row_offsets, new_cols, sub_vals), col_map

    on_process, _ = sub_block(on_proc_mask, "local_vector")
    blocks = LocalBlocks(rank=rank, mode=mode, owned_rows=owned, on_process=on_process)
    if mode == STANDARD:
        blocks.off_process, blocks.off_process_cols = sub_block(~on_proc_mask, "buffer")
    else:
        blocks.on_node, blocks.on_node_cols = sub_block(
            same_node_mask & ~on_proc_mask, "buffer"
        )
        blocks.off_node, blocks.off_node_cols = sub_block(~same_node_mask, "buffer")
    return blocks
