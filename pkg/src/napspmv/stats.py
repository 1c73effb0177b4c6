"""Per-message accounting shared by the pattern compilers and the executor.

Every message is one record: communication phase, source and destination
rank, payload size in vector values and in bytes (8 bytes per value), and
whether it stays inside a node or crosses between nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .topology import Topology

BYTES_PER_VALUE = 8

INTRA = "intra"
INTER = "inter"

# phase names, in executor order
PHASE_STANDARD = "standard"
PHASE_FULLY_LOCAL = "fully_local"
PHASE_LOCAL_INITIAL = "local_initial"
PHASE_INTER_NODE = "inter_node"
PHASE_LOCAL_DIST = "local_dist"


@dataclass(frozen=True)
class MessageRecord:
    phase: str
    src: int
    dst: int
    value_count: int
    byte_count: int
    msg_class: str


@dataclass
class MessageStats:
    """Accumulated message records with aggregation helpers."""

    topo: Topology
    records: list[MessageRecord] = field(default_factory=list)

    def add(self, phase: str, src: int, dst: int, value_count: int) -> MessageRecord:
        cls = INTRA if self.topo.same_node(src, dst) else INTER
        rec = MessageRecord(
            phase=phase,
            src=src,
            dst=dst,
            value_count=int(value_count),
            byte_count=int(value_count) * BYTES_PER_VALUE,
            msg_class=cls,
        )
        self.records.append(rec)
        return rec

    def totals(self, phase: str | None = None, msg_class: str | None = None) -> dict:
        msgs = values = 0
        for rec in self.records:
            if phase is not None and rec.phase != phase:
                continue
            if msg_class is not None and rec.msg_class != msg_class:
                continue
            msgs += 1
            values += rec.value_count
        return {
            "messages": msgs,
            "values": values,
            "bytes": values * BYTES_PER_VALUE,
        }

    def phases(self) -> list[str]:
        seen: list[str] = []
        for rec in self.records:
            if rec.phase not in seen:
                seen.append(rec.phase)
        return seen

    def per_rank_sent_max(self, msg_class: str | None = None) -> dict:
        """Max over ranks of messages/bytes that a single rank sends."""
        msgs = [0] * self.topo.num_procs
        bytes_ = [0] * self.topo.num_procs
        for rec in self.records:
            if msg_class is not None and rec.msg_class != msg_class:
                continue
            msgs[rec.src] += 1
            bytes_[rec.src] += rec.byte_count
        return {"messages": max(msgs, default=0), "bytes": max(bytes_, default=0)}

    def summary(self) -> dict:
        """Deterministic nested summary used in run reports."""
        out: dict = {"phases": {}, "total": {}, "per_rank_sent_max": {}}
        for phase in self.phases():
            out["phases"][phase] = {
                INTRA: self.totals(phase=phase, msg_class=INTRA),
                INTER: self.totals(phase=phase, msg_class=INTER),
            }
        out["total"] = {
            INTRA: self.totals(msg_class=INTRA),
            INTER: self.totals(msg_class=INTER),
            "all": self.totals(),
        }
        out["per_rank_sent_max"] = {
            INTRA: self.per_rank_sent_max(INTRA),
            INTER: self.per_rank_sent_max(INTER),
        }
        return out
