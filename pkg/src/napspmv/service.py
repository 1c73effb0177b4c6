"""Request/response models and handlers for the verification service.

The handlers are plain functions over pydantic models; the HTTP app and
the CLI both call them, so a command line run and a POSTed request go
through identical code and produce identical bytes. Matrix and partition
inputs travel inline as text (Matrix Market content, one-rank-per-line
assignments), which keeps the service stateless.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from .cost_model import CostModelParams, default_params, params_from_dict
from .fixtures import fixture_names, get_fixture
from .partition import (
    Partition,
    partition_contiguous,
    partition_from_file,
    partition_strided,
)
from .reports import (
    node_aware_pattern_dump,
    standard_pattern_dump,
    sweep_csv,
    verify_report,
)
from .sparse import CsrMatrix, generate_random, parse_matrix_market
from .topology import Topology


class TopologySpec(BaseModel):
    nodes: int = 1
    ppn: int = 1


class MatrixSpec(BaseModel):
    """One of: inline Matrix Market text, a seeded random matrix, a fixture."""

    kind: Literal["mtx", "random", "fixture"]
    text: Optional[str] = None
    rows: Optional[int] = None
    nnz_per_row: Optional[int] = None
    name: Optional[str] = None


class PartitionSpec(BaseModel):
    kind: Literal["contiguous", "strided", "file"] = "contiguous"
    text: Optional[str] = None  # file contents for kind="file"


class VerifyRequest(BaseModel):
    matrix: MatrixSpec
    topology: TopologySpec = TopologySpec()
    partition: PartitionSpec = PartitionSpec()
    seed: int = 0
    model_params: Optional[dict] = None


class VerifyResponse(BaseModel):
    verified: bool
    report: dict


class PatternRequest(BaseModel):
    matrix: MatrixSpec
    topology: TopologySpec = TopologySpec()
    partition: PartitionSpec = PartitionSpec()
    seed: int = 0
    algorithm: Literal["standard", "node_aware"] = "standard"


class PatternResponse(BaseModel):
    algorithm: str
    pattern: dict


class SweepRequest(BaseModel):
    kind: Literal["weak", "strong"] = "weak"
    base_rows: int = 1000
    nnz_per_row: list[int] = Field(default_factory=lambda: [25, 50, 100])
    topologies: list[TopologySpec] = Field(
        default_factory=lambda: [
            TopologySpec(nodes=n, ppn=p)
            for n in (2, 4, 8, 16)
            for p in (2, 4, 8, 16)
        ]
    )
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    model_params: Optional[dict] = None


class SweepResponse(BaseModel):
    csv: str


class FixturesResponse(BaseModel):
    fixtures: list[str]


def resolve_matrix(spec: MatrixSpec, seed: int) -> tuple[CsrMatrix, str, Optional[tuple[Partition, Topology]]]:
    """Build the matrix; fixtures also carry their canonical layout."""
    if spec.kind == "mtx":
        if spec.text is None:
            raise ValueError("matrix kind 'mtx' requires inline text")
        return parse_matrix_market(spec.text), "mtx", None
    if spec.kind == "random":
        if spec.rows is None or spec.nnz_per_row is None:
            raise ValueError("matrix kind 'random' requires rows and nnz_per_row")
        a = generate_random(spec.rows, spec.nnz_per_row, seed)
        return a, f"random {spec.rows}x{spec.nnz_per_row} seed {seed}", None
    if spec.name is None:
        raise ValueError("matrix kind 'fixture' requires a name")
    a, part, topo = get_fixture(spec.name)
    return a, f"fixture {spec.name}", (part, topo)


def resolve_partition(
    spec: PartitionSpec, nrows: int, num_procs: int
) -> Partition:
    if spec.kind == "contiguous":
        return partition_contiguous(nrows, num_procs)
    if spec.kind == "strided":
        return partition_strided(nrows, num_procs)
    if spec.text is None:
        raise ValueError("partition kind 'file' requires inline text")
    return partition_from_file(spec.text, nrows, num_procs)


def resolve_params(model_params: Optional[dict]) -> CostModelParams:
    return default_params() if model_params is None else params_from_dict(model_params)


def _layout(
    matrix: MatrixSpec,
    topology: TopologySpec,
    partition: PartitionSpec,
    seed: int,
) -> tuple[CsrMatrix, Partition, Topology, str]:
    a, desc, fixture_layout = resolve_matrix(matrix, seed)
    if fixture_layout is not None:
        part, topo = fixture_layout
        return a, part, topo, desc
    topo = Topology(num_nodes=topology.nodes, ppn=topology.ppn)
    part = resolve_partition(partition, a.nrows, topo.num_procs)
    return a, part, topo, desc


def handle_verify(req: VerifyRequest) -> VerifyResponse:
    a, part, topo, desc = _layout(req.matrix, req.topology, req.partition, req.seed)
    params = resolve_params(req.model_params)
    report = verify_report(a, part, topo, params, req.seed, desc)
    return VerifyResponse(verified=report["verified"], report=report)


def handle_pattern(req: PatternRequest) -> PatternResponse:
    a, part, topo, _ = _layout(req.matrix, req.topology, req.partition, req.seed)
    if req.algorithm == "standard":
        pattern = standard_pattern_dump(a, part)
    else:
        pattern = node_aware_pattern_dump(a, part, topo)
    return PatternResponse(algorithm=req.algorithm, pattern=pattern)


def handle_sweep(req: SweepRequest) -> SweepResponse:
    params = resolve_params(req.model_params)
    csv = sweep_csv(
        kind=req.kind,
        base_rows=req.base_rows,
        nnz_per_row=req.nnz_per_row,
        topologies=[(t.nodes, t.ppn) for t in req.topologies],
        seeds=req.seeds,
        params=params,
    )
    return SweepResponse(csv=csv)


def handle_fixtures() -> FixturesResponse:
    return FixturesResponse(fixtures=fixture_names())
