"""Node-aware exchange: aggregate duplicate traffic before it crosses nodes.

The reference halo exchange ships a vector entry once per (owner rank,
user rank) pair, so an entry needed by many ranks of a remote node crosses
the network many times. Here the unit of inter-node traffic is the ordered
node pair instead: for each pair (src node, dst node) the distinct global
indices any rank of the destination node needs from the source node are
collected once (the pair data), and exactly one process on each side is
responsible for shipping that set. Everything else moves over the much
cheaper intra-node fabric in three local phases:

  fully_local    owners hand owned entries to co-resident ranks whose rows
                 reference them (no inter-node involvement at all)
  local_initial  owners stage owned entries to their node's designated
                 senders, gathering each outgoing pair payload in one place
  local_dist     designated receivers fan received entries out to the
                 co-resident ranks whose rows reference them

Responsibility for a pair is assigned per node by payload size: destination
nodes sorted by descending pair-data size (node id breaks ties) go
round-robin to local processes 0, 1, ... for sends, and to processes
ppn-1, ppn-2, ... for receives, so the heaviest send and the heaviest
receive of a node land on different processes. A node with fewer pairs
than processes leaves the surplus processes idle; payloads are never
split. A process's own entries in a payload it sends or receives move by
buffer copy, not by message.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .partition import Partition
from .sparse import CsrMatrix
from .stats import (
    PHASE_FULLY_LOCAL,
    PHASE_INTER_NODE,
    PHASE_LOCAL_DIST,
    PHASE_LOCAL_INITIAL,
    MessageStats,
)
from .topology import Topology

FULLY_LOCAL = "fully_local"
LOCAL_INITIAL = "local_initial"
LOCAL_DIST = "local_dist"
LOCALITIES = (FULLY_LOCAL, LOCAL_INITIAL, LOCAL_DIST)


@dataclass
class NodePattern:
    """Node-pair view of the exchange: who needs what from whom, deduplicated."""

    num_nodes: int
    dest_nodes: list[list[int]]
    pair_indices: dict[tuple[int, int], np.ndarray]

    def pair(self, src_node: int, dst_node: int) -> np.ndarray:
        return self.pair_indices.get((src_node, dst_node), _EMPTY)

    def total_values(self) -> int:
        return sum(idx.size for idx in self.pair_indices.values())


_EMPTY = np.empty(0, dtype=np.int64)


@dataclass
class NodeProcessMap:
    """Which local process handles each node pair, on both sides."""

    topo: Topology
    send_assign: list[list[int]]  # rank -> sorted dest nodes it ships to
    recv_assign: list[list[int]]  # rank -> sorted src nodes it receives from

    def __post_init__(self) -> None:
        n = self.topo.num_procs
        if len(self.send_assign) != n or len(self.recv_assign) != n:
            raise ValueError("assignment lists must have one entry per rank")
        self._send_rank: dict[tuple[int, int], int] = {}
        self._recv_rank: dict[tuple[int, int], int] = {}
        for rank in range(n):
            node = self.topo.node_of(rank)
            for dst_node in self.send_assign[rank]:
                key = (node, dst_node)
                if key in self._send_rank:
                    raise ValueError(f"duplicate send responsibility for pair {key}")
                self._send_rank[key] = rank
            for src_node in self.recv_assign[rank]:
                key = (src_node, node)
                if key in self._recv_rank:
                    raise ValueError(f"duplicate recv responsibility for pair {key}")
                self._recv_rank[key] = rank

    def sender_of(self, src_node: int, dst_node: int) -> int:
        return self._send_rank[(src_node, dst_node)]

    def receiver_of(self, src_node: int, dst_node: int) -> int:
        return self._recv_rank[(src_node, dst_node)]


@dataclass
class InterProcPattern:
    """Rank-to-rank inter-node messages, one per node pair, full pair data."""

    num_procs: int
    sends: list[list[tuple[int, np.ndarray]]]
    recvs: list[list[tuple[int, np.ndarray]]]

    def message_count(self) -> int:
        return sum(len(lst) for lst in self.sends)

    def value_count(self) -> int:
        return sum(idx.size for lst in self.sends for _, idx in lst)


@dataclass
class LocalPattern:
    """Intra-node messages for one of the three local phases."""

    locality: str
    num_procs: int
    sends: list[list[tuple[int, np.ndarray]]]

    def message_count(self) -> int:
        return sum(len(lst) for lst in self.sends)

    def value_count(self) -> int:
        return sum(idx.size for lst in self.sends for _, idx in lst)


def build_node_pattern(a: CsrMatrix, part: Partition, topo: Topology) -> NodePattern:
    """Collect, per ordered node pair, the distinct indices that must cross."""
    _check_inputs(a, part, topo)
    row_node = part.owner[a.row_ids()] // topo.ppn
    col_node = part.owner[a.col_indices] // topo.ppn
    off = row_node != col_node
    src = col_node[off]
    dst = row_node[off]
    idx = a.col_indices[off]

    dest_nodes: list[list[int]] = [[] for _ in range(topo.num_nodes)]
    pair_indices: dict[tuple[int, int], np.ndarray] = {}
    if src.size:
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
            n, m = int(src[b]), int(dst[b])
            dest_nodes[n].append(m)
            pair_indices[(n, m)] = idx[b:e]
    return NodePattern(
        num_nodes=topo.num_nodes, dest_nodes=dest_nodes, pair_indices=pair_indices
    )


def assign_nodes_to_procs(node_pattern: NodePattern, topo: Topology) -> NodeProcessMap:
    """Deterministic pair-responsibility assignment (see module docstring)."""
    if node_pattern.num_nodes != topo.num_nodes:
        raise ValueError(
            f"pattern has {node_pattern.num_nodes} nodes but topology has {topo.num_nodes}"
        )
    send_assign: list[list[int]] = [[] for _ in range(topo.num_procs)]
    recv_assign: list[list[int]] = [[] for _ in range(topo.num_procs)]
    src_nodes: list[list[int]] = [[] for _ in range(topo.num_nodes)]
    for n in range(topo.num_nodes):
        for m in node_pattern.dest_nodes[n]:
            src_nodes[m].append(n)

    for node in range(topo.num_nodes):
        sends = sorted(
            node_pattern.dest_nodes[node],
            key=lambda m: (-node_pattern.pair(node, m).size, m),
        )
        proc = 0
        for m in sends:
            send_assign[topo.rank_of(proc, node)].append(m)
            proc = (proc + 1) % topo.ppn
        recvs = sorted(
            src_nodes[node],
            key=lambda n: (-node_pattern.pair(n, node).size, n),
        )
        proc = topo.ppn - 1
        for n in recvs:
            recv_assign[topo.rank_of(proc, node)].append(n)
            proc = (proc - 1) % topo.ppn
    for rank in range(topo.num_procs):
        send_assign[rank].sort()
        recv_assign[rank].sort()
    return NodeProcessMap(topo=topo, send_assign=send_assign, recv_assign=recv_assign)


def build_inter_proc_pattern(
    node_pattern: NodePattern, proc_map: NodeProcessMap, topo: Topology
) -> InterProcPattern:
    """Resolve node pairs to concrete rank-to-rank messages with payloads."""
    sends: list[list[tuple[int, np.ndarray]]] = [[] for _ in range(topo.num_procs)]
    recvs: list[list[tuple[int, np.ndarray]]] = [[] for _ in range(topo.num_procs)]
    for n in range(topo.num_nodes):
        for m in node_pattern.dest_nodes[n]:
            payload = node_pattern.pair(n, m)
            src = proc_map.sender_of(n, m)
            dst = proc_map.receiver_of(n, m)
            sends[src].append((dst, payload))
            recvs[dst].append((src, payload))
    for rank in range(topo.num_procs):
        sends[rank].sort(key=lambda item: item[0])
        recvs[rank].sort(key=lambda item: item[0])
    return InterProcPattern(num_procs=topo.num_procs, sends=sends, recvs=recvs)


def build_local_pattern(
    a: CsrMatrix,
    part: Partition,
    topo: Topology,
    inter: InterProcPattern,
    locality: str,
) -> LocalPattern:
    """Compile one of the three intra-node phases against `inter`."""
    _check_inputs(a, part, topo)
    if locality not in LOCALITIES:
        raise ValueError(f"locality must be one of {LOCALITIES}, got {locality!r}")
    sends: list[list[tuple[int, np.ndarray]]] = [[] for _ in range(topo.num_procs)]

    if locality == FULLY_LOCAL:
        src, dst, idx = _triples(a, part)
        same_node = (src // topo.ppn) == (dst // topo.ppn)
        _group_into(sends, src[same_node], dst[same_node], idx[same_node])

    elif locality == LOCAL_INITIAL:
        for rank in range(topo.num_procs):
            if not inter.sends[rank]:
                continue
            staged = _union([idx for _, idx in inter.sends[rank]])
            owners = part.owner[staged]
            if np.any(owners // topo.ppn != topo.node_of(rank)):
                raise ValueError(
                    f"rank {rank} would stage entries not owned by its node"
                )
            for owner in np.unique(owners):
                if owner == rank:
                    continue  # own entries are buffer copies, not messages
                sends[int(owner)].append((rank, staged[owners == owner]))

    else:  # LOCAL_DIST
        needer, col = _off_node_needs(a, part, topo)
        if col.size:
            src_node = part.owner[col] // topo.ppn
            dst_node = needer // topo.ppn
            # rank that receives each (src node, dst node) payload
            recv_rank = np.full((topo.num_nodes, topo.num_nodes), -1, dtype=np.int64)
            for rank in range(topo.num_procs):
                for s, _ in inter.recvs[rank]:
                    recv_rank[topo.node_of(s), topo.node_of(rank)] = rank
            q = recv_rank[src_node, dst_node]
            if np.any(q < 0):
                raise ValueError("an off-node entry has no designated receiver")
            fan_out = q != needer  # receiver's own entries are buffer copies
            _group_into(sends, q[fan_out], needer[fan_out], col[fan_out])

    for rank in range(topo.num_procs):
        sends[rank].sort(key=lambda item: item[0])
    return LocalPattern(locality=locality, num_procs=topo.num_procs, sends=sends)


@dataclass
class NodeAwareCompilation:
    """All compiled pieces of the node-aware exchange for one problem."""

    node_pattern: NodePattern
    proc_map: NodeProcessMap
    inter: InterProcPattern
    fully_local: LocalPattern
    local_initial: LocalPattern
    local_dist: LocalPattern

    def message_stats(self, topo: Topology) -> MessageStats:
        return nap_message_stats(
            self.inter, self.fully_local, self.local_initial, self.local_dist, topo
        )


def compile_node_aware(
    a: CsrMatrix,
    part: Partition,
    topo: Topology,
    proc_map: NodeProcessMap | None = None,
) -> NodeAwareCompilation:
    """Compile the full node-aware exchange; `proc_map` overrides the rule."""
    node_pattern = build_node_pattern(a, part, topo)
    if proc_map is None:
        proc_map = assign_nodes_to_procs(node_pattern, topo)
    inter = build_inter_proc_pattern(node_pattern, proc_map, topo)
    return NodeAwareCompilation(
        node_pattern=node_pattern,
        proc_map=proc_map,
        inter=inter,
        fully_local=build_local_pattern(a, part, topo, inter, FULLY_LOCAL),
        local_initial=build_local_pattern(a, part, topo, inter, LOCAL_INITIAL),
        local_dist=build_local_pattern(a, part, topo, inter, LOCAL_DIST),
    )


def nap_message_stats(
    inter: InterProcPattern,
    fully_local: LocalPattern,
    local_initial: LocalPattern,
    local_dist: LocalPattern,
    topo: Topology,
) -> MessageStats:
    """Message records for all four phases, in executor phase order."""
    stats = MessageStats(topo)
    for phase, sends in (
        (PHASE_FULLY_LOCAL, fully_local.sends),
        (PHASE_LOCAL_INITIAL, local_initial.sends),
        (PHASE_INTER_NODE, inter.sends),
        (PHASE_LOCAL_DIST, local_dist.sends),
    ):
        for src in range(topo.num_procs):
            for dest, indices in sends[src]:
                stats.add(phase, src, dest, indices.size)
    return stats


def _check_inputs(a: CsrMatrix, part: Partition, topo: Topology) -> None:
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


def _triples(a: CsrMatrix, part: Partition) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deduplicated (col owner, row owner, col) triples of off-process entries."""
    row_owner = part.owner[a.row_ids()]
    col_owner = part.owner[a.col_indices]
    off = row_owner != col_owner
    src, dst, idx = col_owner[off], row_owner[off], a.col_indices[off]
    if src.size == 0:
        return src, dst, idx
    order = np.lexsort((idx, dst, src))
    src, dst, idx = src[order], dst[order], idx[order]
    keep = np.empty(src.size, dtype=bool)
    keep[0] = True
    keep[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1]) | (idx[1:] != idx[:-1])
    return src[keep], dst[keep], idx[keep]


def _off_node_needs(
    a: CsrMatrix, part: Partition, topo: Topology
) -> tuple[np.ndarray, np.ndarray]:
    """Deduplicated (row owner, col) pairs where the column lives off-node."""
    row_owner = part.owner[a.row_ids()]
    col_node = part.owner[a.col_indices] // topo.ppn
    off = (row_owner // topo.ppn) != col_node
    needer, col = row_owner[off], a.col_indices[off]
    if needer.size == 0:
        return needer, col
    order = np.lexsort((col, needer))
    needer, col = needer[order], col[order]
    keep = np.empty(needer.size, dtype=bool)
    keep[0] = True
    keep[1:] = (needer[1:] != needer[:-1]) | (col[1:] != col[:-1])
    return needer[keep], col[keep]


def _group_into(
    sends: list[list[tuple[int, np.ndarray]]],
    src: np.ndarray,
    dst: np.ndarray,
    idx: np.ndarray,
) -> None:
    """Group (src, dst, idx) triples into per-source (dest, indices) lists."""
    if src.size == 0:
        return
    order = np.lexsort((idx, dst, src))
    src, dst, idx = src[order], dst[order], idx[order]
    pair_change = np.empty(src.size, dtype=bool)
    pair_change[0] = True
    pair_change[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
    bounds = np.append(np.flatnonzero(pair_change), src.size)
    for b, e in zip(bounds[:-1], bounds[1:]):
        sends[int(src[b])].append((int(dst[b]), idx[b:e]))


def _union(arrays: list[np.ndarray]) -> np.ndarray:
    return np.unique(np.concatenate(arrays)) if arrays else _EMPTY
