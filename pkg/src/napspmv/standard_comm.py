"""Reference halo-exchange pattern: every owner sends straight to every user.

For each stored nonzero A(i, j) whose row and column live on different
ranks, the column's owner must ship vector entry j to the row's owner
before the off-process part of the multiply. Messages are deduplicated per
ordered rank pair (an index is sent once per pair no matter how many rows
reference it) but not across destinations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .partition import Partition
from .sparse import CsrMatrix
from .stats import PHASE_STANDARD, MessageStats
from .topology import Topology


@dataclass
class StandardPattern:
    """Send/receive lists per rank; transpose-consistent by construction.

    sends[r] is an ascending-destination list of (dest, indices) pairs,
    indices ascending global vector entries owned by r. recvs mirrors it.
    """

    num_procs: int
    sends: list[list[tuple[int, np.ndarray]]] = field(default_factory=list)
    recvs: list[list[tuple[int, np.ndarray]]] = field(default_factory=list)

    def message_count(self) -> int:
        return sum(len(lst) for lst in self.sends)

    def value_count(self) -> int:
        return sum(idx.size for lst in self.sends for _, idx in lst)

    def dest_ranks(self, rank: int) -> list[int]:
        return [dest for dest, _ in self.sends[rank]]


def build_standard_pattern(a: CsrMatrix, part: Partition) -> StandardPattern:
    """Compile the rank-to-rank exchange for w = A v under `part`."""
    if part.nrows != a.nrows:
        raise ValueError(
            f"partition covers {part.nrows} rows but the matrix has {a.nrows}"
        )
    if a.nrows != a.ncols:
        raise ValueError("distributed multiply expects a square matrix")
    n_procs = part.num_procs

    row_owner = part.owner[a.row_ids()]
    col_owner = part.owner[a.col_indices]
    off = row_owner != col_owner
    src = col_owner[off]
    dst = row_owner[off]
    idx = a.col_indices[off]

    pattern = StandardPattern(
        num_procs=n_procs,
        sends=[[] for _ in range(n_procs)],
        recvs=[[] for _ in range(n_procs)],
    )
    if src.size == 0:
        return pattern

    order = np.lexsort((idx, dst, src))
    src, dst, idx = src[order], dst[order], idx[order]
    keep = np.empty(src.size, dtype=bool)
    keep[0] = True
    keep[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1]) | (idx[1:] != idx[:-1])
    src, dst, idx = src[keep], dst[keep], idx[keep]

    pair_change = np.empty(src.size, dtype=bool)
    pair_change[0] = True
    pair_change[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
    bounds = np.append(np.flatnonzero(pair_change), src.size)
    for b, e in zip(bounds[:-1], bounds[1:]):
        pattern.sends[src[b]].append((int(dst[b]), idx[b:e]))

    # sends are visited in ascending src, so each recv list lands src-sorted
    for s in range(n_procs):
        for dest, indices in pattern.sends[s]:
            pattern.recvs[dest].append((s, indices))
    return pattern


def standard_message_stats(pattern: StandardPattern, topo: Topology) -> MessageStats:
    """One record per (src, dst) message, classified intra/inter node."""
    if topo.num_procs != pattern.num_procs:
        raise ValueError(
            f"pattern has {pattern.num_procs} ranks but topology has {topo.num_procs}"
        )
    stats = MessageStats(topo)
    for src in range(pattern.num_procs):
        for dest, indices in pattern.sends[src]:
            stats.add(PHASE_STANDARD, src, dest, indices.size)
    return stats
