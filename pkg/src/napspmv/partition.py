"""Row partitions: which rank owns each global row (and vector entry).

A partition is a total assignment of the n global rows to ranks. The
matching vector distribution is implied: rank r holds the entries for its
owned rows, stored in ascending global order.
"""

from __future__ import annotations

import numpy as np


class Partition:
    """Total row-to-rank assignment over `num_procs` ranks."""

    def __init__(self, owner: np.ndarray, num_procs: int, kind: str):
        self.owner = np.ascontiguousarray(owner, dtype=np.int64)
        self.num_procs = int(num_procs)
        self.kind = kind
        if self.owner.ndim != 1:
            raise ValueError("owner must be one-dimensional")
        if self.num_procs < 1:
            raise ValueError(f"num_procs must be >= 1, got {num_procs}")
        if self.owner.size and (
            self.owner.min() < 0 or self.owner.max() >= self.num_procs
        ):
            raise ValueError(f"owning rank outside [0, {self.num_procs})")
        self._owned: list[np.ndarray] | None = None

    @property
    def nrows(self) -> int:
        return self.owner.size

    def owned_rows(self, rank: int) -> np.ndarray:
        """Global rows owned by `rank`, ascending."""
        if not 0 <= rank < self.num_procs:
            raise ValueError(f"rank {rank} out of range [0, {self.num_procs})")
        if self._owned is None:
            order = np.argsort(self.owner, kind="stable")
            counts = np.bincount(self.owner, minlength=self.num_procs)
            bounds = np.concatenate([[0], np.cumsum(counts)])
            self._owned = [
                np.sort(order[bounds[r] : bounds[r + 1]])
                for r in range(self.num_procs)
            ]
        return self._owned[rank]

    def row_counts(self) -> np.ndarray:
        return np.bincount(self.owner, minlength=self.num_procs)

    def local_index(self, rank: int, global_rows: np.ndarray) -> np.ndarray:
        """Positions of `global_rows` within rank's ascending owned list."""
        owned = self.owned_rows(rank)
        pos = np.searchsorted(owned, global_rows)
        if np.any(pos >= owned.size) or np.any(owned[pos] != global_rows):
            raise ValueError(f"some rows are not owned by rank {rank}")
        return pos


def partition_contiguous(nrows: int, num_procs: int) -> Partition:
    """Contiguous blocks; the first (nrows mod num_procs) ranks get one extra row."""
    _check_sizes(nrows, num_procs)
    base, extra = divmod(nrows, num_procs)
    counts = np.full(num_procs, base, dtype=np.int64)
    counts[:extra] += 1
    owner = np.repeat(np.arange(num_procs, dtype=np.int64), counts)
    return Partition(owner, num_procs, "contiguous")


def partition_strided(nrows: int, num_procs: int) -> Partition:
    """Round-robin rows: row i belongs to rank i mod num_procs."""
    _check_sizes(nrows, num_procs)
    owner = np.arange(nrows, dtype=np.int64) % num_procs
    return Partition(owner, num_procs, "strided")


def partition_from_file(text: str, nrows: int, num_procs: int) -> Partition:
    """Explicit assignment: one owning rank per line, one line per row.

    Unlike the generated partitions, ranks owning zero rows are legal here.
    """
    if nrows < 1:
        raise ValueError(f"nrows must be >= 1, got {nrows}")
    if num_procs < 1:
        raise ValueError(f"num_procs must be >= 1, got {num_procs}")
    entries = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(entries) != nrows:
        raise ValueError(
            f"partition file has {len(entries)} entries but the matrix has {nrows} rows"
        )
    owner = np.empty(nrows, dtype=np.int64)
    for i, tok in enumerate(entries):
        try:
            r = int(tok)
        except ValueError:
            raise ValueError(f"line {i + 1}: non-integer rank {tok!r}") from None
        if not 0 <= r < num_procs:
            raise ValueError(f"line {i + 1}: rank {r} outside [0, {num_procs})")
        owner[i] = r
    return Partition(owner, num_procs, "file")


def _check_sizes(nrows: int, num_procs: int) -> None:
    if num_procs < 1:
        raise ValueError(f"num_procs must be >= 1, got {num_procs}")
    if nrows < num_procs:
        raise ValueError(
            f"nrows={nrows} < num_procs={num_procs}: every rank must own a row"
        )
