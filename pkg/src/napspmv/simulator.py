"""Deterministic simulated-cluster executor for the distributed multiplies.

Ranks are plain loop iterations, visited in ascending order inside every
phase; messages go through per-phase mailboxes with exactly-once delivery
and a barrier between posting and draining a phase. Nonblocking
send/receive/waitall therefore become post / drain operations, and two
runs of the same problem produce bit-identical results and identical
message records. The executor cross-checks the compiled patterns while it
runs: delivered traffic must match the pattern, assembled buffers must
match the blocks' column maps, and no global index may cross a given
ordered node pair twice.
"""

from __future__ import annotations

import numpy as np

from .blocks import NODE_AWARE, STANDARD, LocalBlocks, split_blocks
from .node_comm import LocalPattern, NodeAwareCompilation, compile_node_aware
from .partition import Partition
from .sparse import CsrMatrix, DenseVector, spmv_accumulate
from .standard_comm import StandardPattern, build_standard_pattern
from .stats import (
    PHASE_FULLY_LOCAL,
    PHASE_INTER_NODE,
    PHASE_LOCAL_DIST,
    PHASE_LOCAL_INITIAL,
    PHASE_STANDARD,
    MessageStats,
)
from .topology import Topology


class SimulationError(RuntimeError):
    """A phase-discipline or pattern/traffic invariant was violated."""


class SimCluster:
    """Phase-barriered mailboxes with exactly-once delivery."""

    def __init__(self, topo: Topology):
        self.topo = topo
        self.stats = MessageStats(topo)
        self._boxes: dict[str, dict[int, list[tuple[int, np.ndarray, np.ndarray]]]] = {}
        self._sealed: set[str] = set()
        self._delivered: set[tuple[str, int]] = set()

    def post(
        self, phase: str, src: int, dst: int, indices: np.ndarray, values: np.ndarray
    ) -> None:
        if phase in self._sealed:
            raise SimulationError(f"post to phase {phase!r} after its barrier")
        if src == dst:
            raise SimulationError(f"rank {src} posting a message to itself")
        if indices.size != values.size:
            raise SimulationError("payload indices/values length mismatch")
        if indices.size == 0:
            raise SimulationError("empty message posted")
        if np.any(np.diff(indices) <= 0):
            raise SimulationError("payload indices must be ascending and distinct")
        self.stats.add(phase, src, dst, indices.size)
        self._boxes.setdefault(phase, {}).setdefault(dst, []).append(
            (src, indices, values)
        )

    def deliver(self, phase: str, dst: int) -> list[tuple[int, np.ndarray, np.ndarray]]:
        """Drain dst's mailbox for `phase`; first drain seals the phase."""
        self._sealed.add(phase)
        key = (phase, dst)
        if key in self._delivered:
            raise SimulationError(f"double delivery of phase {phase!r} at rank {dst}")
        self._delivered.add(key)
        msgs = self._boxes.get(phase, {}).get(dst, [])
        return sorted(msgs, key=lambda m: m[0])


def _as_array(v: np.ndarray | DenseVector) -> np.ndarray:
    if isinstance(v, DenseVector):
        if v.global_offset != 0:
            raise ValueError("expected a full vector (global_offset 0)")
        return v.entries
    return np.ascontiguousarray(v, dtype=np.float64)


def run_serial_spmv(a: CsrMatrix, v: np.ndarray | DenseVector) -> np.ndarray:
    """Single-rank reference multiply with the canonical accumulation order."""
    x = _as_array(v)
    if a.ncols != x.shape[0]:
        raise ValueError(f"matrix has {a.ncols} columns but vector has {x.shape[0]}")
    w = np.zeros(a.nrows)
    spmv_accumulate(a, x, w)
    return w


def infinity_relative_error(w: np.ndarray, ref: np.ndarray) -> float:
    """max |w - ref| / max(1, max |ref|)."""
    if w.shape != ref.shape:
        raise ValueError("shape mismatch")
    scale = max(1.0, float(np.max(np.abs(ref))) if ref.size else 0.0)
    diff = float(np.max(np.abs(w - ref))) if ref.size else 0.0
    return diff / scale


def _sorted_buffer(
    parts: list[tuple[np.ndarray, np.ndarray]], expect_cols: np.ndarray, what: str
) -> np.ndarray:
    """Merge (indices, values) parts, sort by global index, check the map."""
    if parts:
        idx = np.concatenate([p[0] for p in parts])
        val = np.concatenate([p[1] for p in parts])
    else:
        idx = np.empty(0, dtype=np.int64)
        val = np.empty(0)
    order = np.argsort(idx, kind="stable")
    idx, val = idx[order], val[order]
    if idx.size != expect_cols.size or not np.array_equal(idx, expect_cols):
        raise SimulationError(f"{what} buffer does not match the block column map")
    return val


def run_standard_spmv(
    a: CsrMatrix,
    v: np.ndarray | DenseVector,
    part: Partition,
    topo: Topology,
    pattern: StandardPattern | None = None,
) -> tuple[np.ndarray, MessageStats]:
    """Simulate the reference algorithm; returns (w, message stats)."""
    x = _as_array(v)
    if a.ncols != x.shape[0]:
        raise ValueError(f"matrix has {a.ncols} columns but vector has {x.shape[0]}")
    if pattern is None:
        pattern = build_standard_pattern(a, part)
    blocks = [
        split_blocks(a, part, topo, rank, STANDARD) for rank in range(topo.num_procs)
    ]
    cluster = SimCluster(topo)

    for rank in range(topo.num_procs):
        for dest, idx in pattern.sends[rank]:
            cluster.post(PHASE_STANDARD, rank, dest, idx, x[idx])

    w = np.zeros(a.nrows)
    for rank in range(topo.num_procs):
        msgs = cluster.deliver(PHASE_STANDARD, rank)
        expected = pattern.recvs[rank]
        got = [(src, idx) for src, idx, _ in msgs]
        if len(got) != len(expected) or any(
            gs != es or not np.array_equal(gi, ei)
            for (gs, gi), (es, ei) in zip(got, expected)
        ):
            raise SimulationError(f"rank {rank}: received traffic deviates from pattern")
        b = blocks[rank]
        x_local = x[b.owned_rows]
        buffer = _sorted_buffer(
            [(idx, val) for _, idx, val in msgs], b.off_process_cols, "off_process"
        )
        w_local = np.zeros(b.owned_rows.size)
        spmv_accumulate(b.on_process, x_local, w_local)
        spmv_accumulate(b.off_process, buffer, w_local)
        w[b.owned_rows] = w_local
    return w, cluster.stats


def run_local_comm(
    pattern: LocalPattern,
    v: np.ndarray | DenseVector,
    topo: Topology,
) -> tuple[list[tuple[np.ndarray, np.ndarray]], MessageStats]:
    """Execute one intra-node pattern against a full vector, standalone.

    Returns, per rank, the received (indices, values) sorted by global
    index, plus the message stats. Senders draw values from the vector
    entries they own under the pattern (indices are global).
    """
    x = _as_array(v)
    phase = {
        "fully_local": PHASE_FULLY_LOCAL,
        "local_initial": PHASE_LOCAL_INITIAL,
        "local_dist": PHASE_LOCAL_DIST,
    }[pattern.locality]
    cluster = SimCluster(topo)
    for rank in range(topo.num_procs):
        for dest, idx in pattern.sends[rank]:
            if not topo.same_node(rank, dest):
                raise SimulationError(
                    f"local pattern routes {rank}->{dest} across nodes"
                )
            cluster.post(phase, rank, dest, idx, x[idx])
    received = []
    for rank in range(topo.num_procs):
        msgs = cluster.deliver(phase, rank)
        parts = [(idx, val) for _, idx, val in msgs]
        if parts:
            idx = np.concatenate([p[0] for p in parts])
            val = np.concatenate([p[1] for p in parts])
            order = np.argsort(idx, kind="stable")
            received.append((idx[order], val[order]))
        else:
            received.append((np.empty(0, dtype=np.int64), np.empty(0)))
    return received, cluster.stats


def run_napspmv(
    a: CsrMatrix,
    v: np.ndarray | DenseVector,
    part: Partition,
    topo: Topology,
    compilation: NodeAwareCompilation | None = None,
) -> tuple[np.ndarray, MessageStats]:
    """Simulate the node-aware algorithm; returns (w, message stats).

    Phases run in order: fully-local exchange, initial staging, inter-node
    post, on-process and on-node multiplies, inter-node drain, local
    distribution, off-node multiply.
    """
    x = _as_array(v)
    if a.ncols != x.shape[0]:
        raise ValueError(f"matrix has {a.ncols} columns but vector has {x.shape[0]}")
    if compilation is None:
        compilation = compile_node_aware(a, part, topo)
    comp = compilation
    blocks = [
        split_blocks(a, part, topo, rank, NODE_AWARE) for rank in range(topo.num_procs)
    ]
    cluster = SimCluster(topo)
    n_procs = topo.num_procs

    # fully-local exchange: owners to co-resident users
    for rank in range(n_procs):
        for dest, idx in comp.fully_local.sends[rank]:
            cluster.post(PHASE_FULLY_LOCAL, rank, dest, idx, x[idx])
    on_node_buffers: list[np.ndarray] = []
    for rank in range(n_procs):
        msgs = cluster.deliver(PHASE_FULLY_LOCAL, rank)
        on_node_buffers.append(
            _sorted_buffer(
                [(idx, val) for _, idx, val in msgs],
                blocks[rank].on_node_cols,
                "on_node",
            )
        )

    # initial staging: owners to their node's designated senders
    for rank in range(n_procs):
        for dest, idx in comp.local_initial.sends[rank]:
            cluster.post(PHASE_LOCAL_INITIAL, rank, dest, idx, x[idx])
    staging: list[tuple[np.ndarray, np.ndarray]] = []
    for rank in range(n_procs):
        need = (
            np.unique(np.concatenate([idx for _, idx in comp.inter.sends[rank]]))
            if comp.inter.sends[rank]
            else np.empty(0, dtype=np.int64)
        )
        own = need[part.owner[need] == rank] if need.size else need
        parts = [(own, x[own])] if own.size else []  # buffer copy of own entries
        parts += [(idx, val) for _, idx, val in cluster.deliver(PHASE_LOCAL_INITIAL, rank)]
        staging.append((need, _sorted_buffer(parts, need, "staging")))

    # inter-node messages drawn from the staging buffers
    pair_seen: dict[tuple[int, int], list[np.ndarray]] = {}
    for rank in range(n_procs):
        need, staged = staging[rank]
        for dest, idx in comp.inter.sends[rank]:
            if topo.same_node(rank, dest):
                raise SimulationError(f"inter pattern routes {rank}->{dest} on-node")
            vals = staged[np.searchsorted(need, idx)]
            cluster.post(PHASE_INTER_NODE, rank, dest, idx, vals)
            pair_seen.setdefault(
                (topo.node_of(rank), topo.node_of(dest)), []
            ).append(idx)
    for pair, chunks in pair_seen.items():
        joined = np.concatenate(chunks)
        if np.unique(joined).size != joined.size:
            raise SimulationError(f"duplicate index crossed node pair {pair}")

    # overlapped compute: on-process and on-node parts
    w = np.zeros(a.nrows)
    w_locals: list[np.ndarray] = []
    for rank in range(n_procs):
        b = blocks[rank]
        w_local = np.zeros(b.owned_rows.size)
        spmv_accumulate(b.on_process, x[b.owned_rows], w_local)
        spmv_accumulate(b.on_node, on_node_buffers[rank], w_local)
        w_locals.append(w_local)

    # drain inter-node traffic (the waitall)
    inter_recv: list[tuple[np.ndarray, np.ndarray]] = []
    for rank in range(n_procs):
        msgs = cluster.deliver(PHASE_INTER_NODE, rank)
        expected = comp.inter.recvs[rank]
        got = [(src, idx) for src, idx, _ in msgs]
        if len(got) != len(expected) or any(
            gs != es or not np.array_equal(gi, ei)
            for (gs, gi), (es, ei) in zip(got, expected)
        ):
            raise SimulationError(f"rank {rank}: inter-node traffic deviates from pattern")
        parts = [(idx, val) for _, idx, val in msgs]
        if parts:
            idx = np.concatenate([p[0] for p in parts])
            val = np.concatenate([p[1] for p in parts])
            order = np.argsort(idx, kind="stable")
            inter_recv.append((idx[order], val[order]))
        else:
            inter_recv.append((np.empty(0, dtype=np.int64), np.empty(0)))

    # local distribution: receivers fan entries out to co-resident users
    for rank in range(n_procs):
        got_idx, got_val = inter_recv[rank]
        for dest, idx in comp.local_dist.sends[rank]:
            pos = np.searchsorted(got_idx, idx)
            if np.any(pos >= got_idx.size) or not np.array_equal(got_idx[pos], idx):
                raise SimulationError(
                    f"rank {rank} asked to distribute entries it never received"
                )
            cluster.post(PHASE_LOCAL_DIST, rank, dest, idx, got_val[pos])
    for rank in range(n_procs):
        b = blocks[rank]
        msgs = cluster.deliver(PHASE_LOCAL_DIST, rank)
        parts = [(idx, val) for _, idx, val in msgs]
        got_idx, got_val = inter_recv[rank]
        if got_idx.size:
            keep = np.isin(got_idx, b.off_node_cols)  # own buffer copies
            if np.any(keep):
                parts.append((got_idx[keep], got_val[keep]))
        buffer = _sorted_buffer(parts, b.off_node_cols, "off_node")
        spmv_accumulate(b.off_node, buffer, w_locals[rank])
        w[b.owned_rows] = w_locals[rank]
    return w, cluster.stats
