"""Machine topology: ranks laid out SMP-style across symmetric nodes.

Rank r lives at local process (r mod ppn) on node (r // ppn), so ranks on
the same node are consecutive. Only full nodes are representable.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Topology:
    """A cluster of `num_nodes` identical nodes with `ppn` processes each."""

    num_nodes: int
    ppn: int

    def __post_init__(self) -> None:
        if self.num_nodes < 1:
            raise ValueError(f"num_nodes must be >= 1, got {self.num_nodes}")
        if self.ppn < 1:
            raise ValueError(f"ppn must be >= 1, got {self.ppn}")

    @property
    def num_procs(self) -> int:
        return self.num_nodes * self.ppn

    def node_of(self, rank: int) -> int:
        self._check_rank(rank)
        return rank // self.ppn

    def local_proc_of(self, rank: int) -> int:
        self._check_rank(rank)
        return rank % self.ppn

    def rank_of(self, local_proc: int, node: int) -> int:
        if not 0 <= node < self.num_nodes:
            raise ValueError(f"node {node} out of range [0, {self.num_nodes})")
        if not 0 <= local_proc < self.ppn:
            raise ValueError(f"local proc {local_proc} out of range [0, {self.ppn})")
        return node * self.ppn + local_proc

    def ranks_on_node(self, node: int) -> range:
        if not 0 <= node < self.num_nodes:
            raise ValueError(f"node {node} out of range [0, {self.num_nodes})")
        return range(node * self.ppn, (node + 1) * self.ppn)

    def same_node(self, rank_a: int, rank_b: int) -> bool:
        return self.node_of(rank_a) == self.node_of(rank_b)

    def _check_rank(self, rank: int) -> None:
        if not 0 <= rank < self.num_procs:
            raise ValueError(f"rank {rank} out of range [0, {self.num_procs})")


def topology_for(num_procs: int, ppn: int) -> Topology:
    """Build the topology covering `num_procs` ranks at `ppn` per node.

    Rejects rank counts that would leave a partial node.
    """
    if num_procs < 1:
        raise ValueError(f"num_procs must be >= 1, got {num_procs}")
    if ppn < 1:
        raise ValueError(f"ppn must be >= 1, got {ppn}")
    if num_procs % ppn != 0:
        raise ValueError(
            f"num_procs={num_procs} is not a whole number of nodes at ppn={ppn}"
        )
    return Topology(num_nodes=num_procs // ppn, ppn=ppn)
