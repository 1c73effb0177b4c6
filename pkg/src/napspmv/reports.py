"""Assemble verification reports, pattern dumps, and scaling sweeps.

Everything here returns plain dicts or CSV text built in a deterministic
order, so repeated runs with the same inputs serialize byte-identically.
"""

from __future__ import annotations

import json

import numpy as np

from .cost_model import CostModelParams, ModelDomainError, model_stats
from .node_comm import compile_node_aware
from .partition import Partition, partition_contiguous
from .sparse import CsrMatrix, generate_random
from .standard_comm import build_standard_pattern
from .stats import INTER, INTRA, MessageStats
from .simulator import run_napspmv, run_serial_spmv, run_standard_spmv
from .topology import Topology

TOLERANCE = 1e-12

# desk-scale ceilings for a single simulated run
MAX_NODES = 64
MAX_PPN = 16
MAX_ROWS = 1_000_000

SWEEP_COLUMNS = [
    "n_procs",
    "nodes",
    "ppn",
    "nnz_per_row",
    "seed",
    "algorithm",
    "inter_msgs_max",
    "inter_bytes_max",
    "intra_msgs_max",
    "intra_bytes_max",
    "modeled_seconds",
    "verified",
]


def to_json(obj) -> str:
    """Canonical JSON used for every report; stable bytes for stable input."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def check_desk_scale(nrows: int, topo: Topology) -> None:
    if topo.num_nodes > MAX_NODES:
        raise ValueError(f"num_nodes {topo.num_nodes} exceeds the ceiling {MAX_NODES}")
    if topo.ppn > MAX_PPN:
        raise ValueError(f"ppn {topo.ppn} exceeds the ceiling {MAX_PPN}")
    if nrows > MAX_ROWS:
        raise ValueError(f"nrows {nrows} exceeds the ceiling {MAX_ROWS}")


def input_vector(nrows: int, seed: int) -> np.ndarray:
    """Deterministic uniform [0, 1) multiply input, decoupled from the
    matrix generator's stream."""
    return np.random.default_rng([seed, 1]).random(nrows)


def _modeled_or_error(stats: MessageStats, params: CostModelParams) -> dict:
    try:
        return model_stats(stats, params).to_dict()
    except ModelDomainError as exc:
        return {"error": str(exc)}


def _ratio(standard: int | float, node_aware: int | float):
    """standard / node_aware; the literal string "inf" when the latter is 0."""
    if node_aware == 0:
        return "inf" if standard > 0 else 1.0
    return standard / node_aware


def verify_report(
    a: CsrMatrix,
    part: Partition,
    topo: Topology,
    params: CostModelParams,
    seed: int,
    matrix_desc: str,
) -> dict:
    """Run both executors against the serial reference and report."""
    check_desk_scale(a.nrows, topo)
    v = input_vector(a.nrows, seed)
    ref = run_serial_spmv(a, v)

    w_std, stats_std = run_standard_spmv(a, v, part, topo)
    w_nap, stats_nap = run_napspmv(a, v, part, topo)

    def algo_entry(w: np.ndarray, stats: MessageStats) -> dict:
        err = float(np.max(np.abs(w - ref))) if w.size else 0.0
        scale = max(1.0, float(np.max(np.abs(ref))) if ref.size else 0.0)
        rel = err / scale
        return {
            "verified": bool(rel <= TOLERANCE),
            "max_abs_error": err,
            "max_rel_error": rel,
            "messages": stats.summary(),
            "modeled": _modeled_or_error(stats, params),
        }

    std_entry = algo_entry(w_std, stats_std)
    nap_entry = algo_entry(w_nap, stats_nap)

    std_inter = stats_std.totals(msg_class=INTER)
    nap_inter = stats_nap.totals(msg_class=INTER)
    std_model = std_entry["modeled"]
    nap_model = nap_entry["modeled"]
    speedup = None
    if "error" not in std_model and "error" not in nap_model:
        speedup = _ratio(std_model["total"], nap_model["total"])

    return {
        "matrix": {
            "source": matrix_desc,
            "rows": a.nrows,
            "cols": a.ncols,
            "nnz": a.nnz,
        },
        "topology": {
            "nodes": topo.num_nodes,
            "ppn": topo.ppn,
            "num_procs": topo.num_procs,
        },
        "partition": part.kind,
        "seed": seed,
        "tolerance": TOLERANCE,
        "algorithms": {"standard": std_entry, "node_aware": nap_entry},
        "comparison": {
            "inter_messages": {
                "standard": std_inter["messages"],
                "node_aware": nap_inter["messages"],
                "reduction": _ratio(std_inter["messages"], nap_inter["messages"]),
            },
            "inter_bytes": {
                "standard": std_inter["bytes"],
                "node_aware": nap_inter["bytes"],
                "reduction": _ratio(std_inter["bytes"], nap_inter["bytes"]),
            },
            "modeled_speedup": speedup,
        },
        "verified": bool(std_entry["verified"] and nap_entry["verified"]),
    }


def _send_list_json(sends: list[list[tuple[int, np.ndarray]]]) -> dict:
    return {
        str(rank): [
            {"dest": int(dest), "indices": [int(i) for i in idx]}
            for dest, idx in sends[rank]
        ]
        for rank in range(len(sends))
    }


def standard_pattern_dump(a: CsrMatrix, part: Partition) -> dict:
    pattern = build_standard_pattern(a, part)
    return _send_list_json(pattern.sends)


def node_aware_pattern_dump(a: CsrMatrix, part: Partition, topo: Topology) -> dict:
    comp = compile_node_aware(a, part, topo)
    np_ = comp.node_pattern
    return {
        "node_sends": {
            str(n): [int(m) for m in np_.dest_nodes[n]] for n in range(np_.num_nodes)
        },
        "node_indices": {
            str(n): [
                {"dest": int(m), "indices": [int(i) for i in np_.pair(n, m)]}
                for m in np_.dest_nodes[n]
            ]
            for n in range(np_.num_nodes)
        },
        "send_map": {
            str(r): [int(m) for m in comp.proc_map.send_assign[r]]
            for r in range(topo.num_procs)
        },
        "recv_map": {
            str(r): [int(m) for m in comp.proc_map.recv_assign[r]]
            for r in range(topo.num_procs)
        },
        "inter_proc": _send_list_json(comp.inter.sends),
        "local_initial": _send_list_json(comp.local_initial.sends),
        "local_dist": _send_list_json(comp.local_dist.sends),
        "fully_local": _send_list_json(comp.fully_local.sends),
    }


def sweep_csv(
    kind: str,
    base_rows: int,
    nnz_per_row: list[int],
    topologies: list[tuple[int, int]],
    seeds: list[int],
    params: CostModelParams,
) -> str:
    """Scaling sweep over topology points; one CSV row per algorithm run.

    Weak scaling keeps `base_rows` rows per process; strong scaling keeps
    the global size fixed at `base_rows`. A failing cell (e.g. a size
    below the process count) yields a verified=false row and the sweep
    continues.
    """
    if kind not in ("weak", "strong"):
        raise ValueError(f"sweep kind must be 'weak' or 'strong', got {kind!r}")
    if base_rows < 1:
        raise ValueError(f"base_rows must be >= 1, got {base_rows}")
    lines = [",".join(SWEEP_COLUMNS)]
    for nodes, ppn in topologies:
        topo = Topology(num_nodes=nodes, ppn=ppn)
        nrows = base_rows * topo.num_procs if kind == "weak" else base_rows
        for nnz in nnz_per_row:
            for seed in seeds:
                lines.extend(_sweep_cell(nrows, nnz, seed, topo, params))
    return "\n".join(lines) + "\n"


def _sweep_cell(
    nrows: int, nnz: int, seed: int, topo: Topology, params: CostModelParams
) -> list[str]:
    rows: list[str] = []

    def emit(algorithm: str, stats: MessageStats | None, verified: bool) -> None:
        if stats is None:
            inter = intra = {"messages": 0, "bytes": 0}
            modeled = float("nan")
        else:
            inter = stats.per_rank_sent_max(INTER)
            intra = stats.per_rank_sent_max(INTRA)
            try:
                modeled = model_stats(stats, params).total
            except ModelDomainError:
                modeled = float("nan")
        rows.append(
            ",".join(
                [
                    str(topo.num_procs),
                    str(topo.num_nodes),
                    str(topo.ppn),
                    str(nnz),
                    str(seed),
                    algorithm,
                    str(inter["messages"]),
                    str(inter["bytes"]),
                    str(intra["messages"]),
                    str(intra["bytes"]),
                    repr(modeled),
                    "true" if verified else "false",
                ]
            )
        )

    try:
        check_desk_scale(nrows, topo)
        a = generate_random(nrows, nnz, seed)
        part = partition_contiguous(nrows, topo.num_procs)
        v = input_vector(nrows, seed)
        ref = run_serial_spmv(a, v)
        scale = max(1.0, float(np.max(np.abs(ref))))
    except (ValueError, MemoryError):
        emit("standard", None, False)
        emit("node_aware", None, False)
        return rows

    for algorithm, runner in (
        ("standard", run_standard_spmv),
        ("node_aware", run_napspmv),
    ):
        try:
            w, stats = runner(a, v, part, topo)
            rel = float(np.max(np.abs(w - ref))) / scale
            emit(algorithm, stats, rel <= TOLERANCE)
        except (ValueError, MemoryError):
            emit(algorithm, None, False)
    return rows
