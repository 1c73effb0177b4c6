"""Command line client for the verification service.

All subcommands build the same request models the HTTP API accepts and, by
default, run the handlers in-process; --server posts them to a running
instance instead. Outputs are canonical JSON or CSV, written to stdout or
--out. Exit status: 0 success (and verification passed), 1 verification
failure, 2 usage or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import service
from .reports import to_json
from .sparse import MatrixMarketError


def _add_matrix_flags(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--mtx", metavar="PATH", help="Matrix Market file")
    group.add_argument(
        "--random",
        metavar="ROWSxNNZ",
        help="seeded random matrix, e.g. 1000x25",
    )
    group.add_argument("--fixture", metavar="NAME", help="built-in example matrix")
    p.add_argument("--seed", type=int, default=0, help="seed for matrix and vector")
    p.add_argument("--nodes", type=int, default=1, help="number of nodes")
    p.add_argument("--ppn", type=int, default=1, help="processes per node")
    p.add_argument(
        "--partition",
        default="contiguous",
        metavar="KIND",
        help="contiguous, strided, or file:<path>",
    )


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="PATH", help="write the output here instead of stdout")
    p.add_argument("--server", metavar="URL", help="POST to a running service instead")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="napspmv",
        description="Verify and benchmark node-aware sparse matrix-vector multiply.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser(
        "verify", help="run both distributed algorithms against the serial reference"
    )
    _add_matrix_flags(p_verify)
    p_verify.add_argument("--model-params", metavar="PATH", help="cost parameter JSON")
    _add_common_flags(p_verify)

    p_pattern = sub.add_parser("pattern-dump", help="serialize a compiled pattern as JSON")
    _add_matrix_flags(p_pattern)
    p_pattern.add_argument(
        "--algorithm",
        choices=["standard", "node_aware"],
        default="standard",
        help="which pattern to dump",
    )
    _add_common_flags(p_pattern)

    p_sweep = sub.add_parser("sweep", help="scaling sweep over topology points (CSV)")
    p_sweep.add_argument("--kind", choices=["weak", "strong"], default="weak")
    p_sweep.add_argument(
        "--base-rows",
        type=int,
        default=1000,
        help="rows per process (weak) or total rows (strong)",
    )
    p_sweep.add_argument(
        "--nnz", default="25,50,100", metavar="LIST", help="entries per row, comma-separated"
    )
    p_sweep.add_argument(
        "--topos",
        default=None,
        metavar="LIST",
        help="topology points like 2x2,4x4 (default: {2,4,8,16} nodes x {2,4,8,16} ppn)",
    )
    p_sweep.add_argument(
        "--seeds", default="0,1,2,3,4", metavar="LIST", help="seeds, comma-separated"
    )
    p_sweep.add_argument("--model-params", metavar="PATH", help="cost parameter JSON")
    _add_common_flags(p_sweep)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    return parser


def _matrix_spec(args: argparse.Namespace) -> service.MatrixSpec:
    if args.mtx is not None:
        with open(args.mtx, encoding="utf-8") as fh:
            return service.MatrixSpec(kind="mtx", text=fh.read())
    if args.random is not None:
        try:
            rows_s, nnz_s = args.random.lower().split("x")
            rows, nnz = int(rows_s), int(nnz_s)
        except ValueError:
            raise ValueError(
                f"--random expects ROWSxNNZ (e.g. 1000x25), got {args.random!r}"
            ) from None
        return service.MatrixSpec(kind="random", rows=rows, nnz_per_row=nnz)
    return service.MatrixSpec(kind="fixture", name=args.fixture)


def _partition_spec(args: argparse.Namespace) -> service.PartitionSpec:
    kind = args.partition
    if kind in ("contiguous", "strided"):
        return service.PartitionSpec(kind=kind)
    if kind.startswith("file:"):
        path = kind[len("file:") :]
        with open(path, encoding="utf-8") as fh:
            return service.PartitionSpec(kind="file", text=fh.read())
    raise ValueError(
        f"--partition expects contiguous, strided, or file:<path>, got {kind!r}"
    )


def _model_params(args: argparse.Namespace):
    path = getattr(args, "model_params", None)
    if path is None:
        return None
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _post(server: str, route: str, payload: dict) -> dict:
    import httpx

    resp = httpx.post(server.rstrip("/") + route, json=payload, timeout=600.0)
    if resp.status_code != 200:
        raise ValueError(f"server returned {resp.status_code}: {resp.text}")
    return resp.json()


def _cmd_verify(args: argparse.Namespace) -> int:
    req = service.VerifyRequest(
        matrix=_matrix_spec(args),
        topology=service.TopologySpec(nodes=args.nodes, ppn=args.ppn),
        partition=_partition_spec(args),
        seed=args.seed,
        model_params=_model_params(args),
    )
    if args.server:
        data = _post(args.server, "/verify", req.model_dump())
        verified, report = data["verified"], data["report"]
    else:
        resp = service.handle_verify(req)
        verified, report = resp.verified, resp.report
    _emit(to_json(report), args.out)
    return 0 if verified else 1


def _cmd_pattern(args: argparse.Namespace) -> int:
    req = service.PatternRequest(
        matrix=_matrix_spec(args),
        topology=service.TopologySpec(nodes=args.nodes, ppn=args.ppn),
        partition=_partition_spec(args),
        seed=args.seed,
        algorithm=args.algorithm,
    )
    if args.server:
        pattern = _post(args.server, "/pattern", req.model_dump())["pattern"]
    else:
        pattern = service.handle_pattern(req).pattern
    _emit(to_json(pattern), args.out)
    return 0


def _parse_ints(text: str, what: str) -> list[int]:
    if not text.strip():
        return []
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError:
        raise ValueError(f"{what} expects comma-separated integers, got {text!r}") from None


def _parse_topos(text: str | None) -> list[service.TopologySpec]:
    if text is None:
        return [
            service.TopologySpec(nodes=n, ppn=p)
            for n in (2, 4, 8, 16)
            for p in (2, 4, 8, 16)
        ]
    if not text.strip():
        return []
    out = []
    for tok in text.split(","):
        try:
            nodes_s, ppn_s = tok.lower().split("x")
            out.append(service.TopologySpec(nodes=int(nodes_s), ppn=int(ppn_s)))
        except ValueError:
            raise ValueError(
                f"--topos expects entries like 4x4, got {tok!r}"
            ) from None
    return out


def _cmd_sweep(args: argparse.Namespace) -> int:
    req = service.SweepRequest(
        kind=args.kind,
        base_rows=args.base_rows,
        nnz_per_row=_parse_ints(args.nnz, "--nnz"),
        topologies=_parse_topos(args.topos),
        seeds=_parse_ints(args.seeds, "--seeds"),
        model_params=_model_params(args),
    )
    if args.server:
        csv = _post(args.server, "/sweep", req.model_dump())["csv"]
    else:
        csv = service.handle_sweep(req).csv
    _emit(csv, args.out)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "verify": _cmd_verify,
        "pattern-dump": _cmd_pattern,
        "sweep": _cmd_sweep,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (MatrixMarketError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"napspmv: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
