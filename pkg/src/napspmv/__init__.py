"""Node-aware parallel sparse matrix-vector multiply, simulated and modeled.

The package compiles communication patterns for w = A v under a row
partition on a nodes-of-processes topology, executes them on a
deterministic simulated cluster with exact message accounting, and prices
the traffic with calibrated latency/bandwidth models. A FastAPI service
and a CLI expose verification runs, pattern dumps, and scaling sweeps.
"""

from .blocks import NODE_AWARE, STANDARD, LocalBlocks, split_blocks
from .cost_model import (
    EAGER,
    RENDEZVOUS,
    SHORT,
    CostModelParams,
    ModelDomainError,
    ModeledCost,
    ProtocolParams,
    default_params,
    load_params,
    model_intra,
    model_max_rate,
    model_postal,
    model_stats,
    params_from_dict,
    params_to_dict,
    select_protocol,
)
from .fixtures import example_fixture, example_matrix, fixture_names, get_fixture
from .node_comm import (
    FULLY_LOCAL,
    LOCAL_DIST,
    LOCAL_INITIAL,
    InterProcPattern,
    LocalPattern,
    NodeAwareCompilation,
    NodePattern,
    NodeProcessMap,
    assign_nodes_to_procs,
    build_inter_proc_pattern,
    build_local_pattern,
    build_node_pattern,
    compile_node_aware,
    nap_message_stats,
)
from .partition import (
    Partition,
    partition_contiguous,
    partition_from_file,
    partition_strided,
)
from .reports import (
    TOLERANCE,
    check_desk_scale,
    input_vector,
    node_aware_pattern_dump,
    standard_pattern_dump,
    sweep_csv,
    to_json,
    verify_report,
)
from .simulator import (
    SimCluster,
    SimulationError,
    infinity_relative_error,
    run_local_comm,
    run_napspmv,
    run_serial_spmv,
    run_standard_spmv,
)
from .sparse import (
    CsrMatrix,
    DenseVector,
    MatrixMarketError,
    csr_from_coo,
    generate_random,
    parse_matrix_market,
    serialize_matrix_market,
    spmv_accumulate,
)
from .standard_comm import (
    StandardPattern,
    build_standard_pattern,
    standard_message_stats,
)
from .stats import (
    BYTES_PER_VALUE,
    INTER,
    INTRA,
    PHASE_FULLY_LOCAL,
    PHASE_INTER_NODE,
    PHASE_LOCAL_DIST,
    PHASE_LOCAL_INITIAL,
    PHASE_STANDARD,
    MessageRecord,
    MessageStats,
)
from .topology import Topology, topology_for

__version__ = "0.1.0"
