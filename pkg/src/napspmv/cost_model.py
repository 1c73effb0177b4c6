"""Calibrated communication timing: postal, max-rate, and intra-node models.

Message latency and bandwidth depend on the MPI protocol, which is picked
per message from its byte size: short messages ride the low-latency path,
mid-sized ones are sent eagerly, large ones rendezvous. Each protocol has
measured parameters:

  postal      T = alpha + s / b_max
  max-rate    T = alpha + ppn * s / min(b_n, b_max + (ppn - 1) * b_inj)
  intra-node  T = alpha_l + s / b_max_l

The max-rate form charges for injection-bandwidth sharing when ppn
processes of one node send together; b_n caps at the NIC limit and may be
infinite, which drops the cap. A non-positive denominator (e.g. the short
protocol's negative fitted b_max at ppn = 1) is outside the model's
domain and raises ModelDomainError rather than returning a nonsense time.

Aggregating a message-stats object: for each phase and class, every
message is charged to its sending rank (intra-node model for intra
messages, max-rate for inter ones), the phase/class part is the maximum
over ranks of their summed charges, and totals are sums of parts. Byte
thresholds and all parameters come from a JSON parameter file; infinite
b_n is serialized as the string "inf".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

from .stats import INTER, INTRA, MessageStats

SHORT = "short"
EAGER = "eager"
RENDEZVOUS = "rendezvous"
PROTOCOLS = (SHORT, EAGER, RENDEZVOUS)


class ModelDomainError(ValueError):
    """The requested evaluation point lies outside the model's domain."""


@dataclass(frozen=True)
class ProtocolParams:
    """Measured parameters of one protocol (seconds and bytes/second)."""

    alpha: float      # inter-node latency
    b_inj: float      # per-process injection bandwidth share
    b_max: float      # peak single-process bandwidth (fits may go negative)
    b_n: float        # NIC bandwidth cap; may be math.inf
    alpha_l: float    # intra-node latency
    b_max_l: float    # intra-node bandwidth


@dataclass(frozen=True)
class CostModelParams:
    short: ProtocolParams
    eager: ProtocolParams
    rendezvous: ProtocolParams
    short_max: int = 128    # largest byte size sent as short
    eager_max: int = 8192   # largest byte size sent eagerly

    def protocol(self, name: str) -> ProtocolParams:
        if name not in PROTOCOLS:
            raise ValueError(f"unknown protocol {name!r}")
        return getattr(self, name)


def select_protocol(nbytes: int, params: CostModelParams) -> str:
    if nbytes < 0:
        raise ValueError(f"negative message size {nbytes}")
    if nbytes <= params.short_max:
        return SHORT
    if nbytes <= params.eager_max:
        return EAGER
    return RENDEZVOUS


def model_postal(nbytes: int, protocol: str, params: CostModelParams) -> float:
    """Latency plus bytes over peak bandwidth, single sender."""
    p = params.protocol(protocol)
    if nbytes < 0:
        raise ValueError(f"negative message size {nbytes}")
    if nbytes == 0:
        return p.alpha
    if p.b_max <= 0:
        raise ModelDomainError(
            f"postal model undefined for {protocol}: b_max = {p.b_max} <= 0"
        )
    return p.alpha + nbytes / p.b_max


def model_max_rate(
    nbytes: int, ppn: int, protocol: str, params: CostModelParams
) -> float:
    """Inter-node time when ppn co-resident processes share the NIC."""
    p = params.protocol(protocol)
    if nbytes < 0:
        raise ValueError(f"negative message size {nbytes}")
    if ppn < 1:
        raise ValueError(f"ppn must be >= 1, got {ppn}")
    shared = p.b_max + (ppn - 1) * p.b_inj
    denom = shared if math.isinf(p.b_n) else min(p.b_n, shared)
    if denom <= 0:
        raise ModelDomainError(
            f"max-rate model undefined for {protocol} at ppn={ppn}: "
            f"effective bandwidth {denom} <= 0"
        )
    return p.alpha + ppn * nbytes / denom


def model_intra(nbytes: int, protocol: str, params: CostModelParams) -> float:
    """Time over the intra-node fabric."""
    p = params.protocol(protocol)
    if nbytes < 0:
        raise ValueError(f"negative message size {nbytes}")
    if nbytes == 0:
        return p.alpha_l
    if p.b_max_l <= 0:
        raise ModelDomainError(
            f"intra model undefined for {protocol}: b_max_l = {p.b_max_l} <= 0"
        )
    return p.alpha_l + nbytes / p.b_max_l


@dataclass
class ModeledCost:
    """Per-phase/class modeled seconds; totals are sums of parts."""

    phases: dict[str, dict[str, float]]  # phase -> {intra, inter, total}
    total: float

    def to_dict(self) -> dict:
        return {
            "phases": {
                phase: {k: parts[k] for k in (INTRA, INTER, "total")}
                for phase, parts in self.phases.items()
            },
            "total": self.total,
        }


def model_stats(stats: MessageStats, params: CostModelParams) -> ModeledCost:
    """Charge every recorded message and reduce to per-phase critical ranks.

    Each message is charged to its sender: intra-class with the intra-node
    model, inter-class with the max-rate model at the topology's ppn, the
    protocol chosen per message from its byte size. The (phase, class)
    part is the max over ranks of their summed charges; the phase total is
    the sum of its class parts and the grand total the sum of phase totals.
    """
    ppn = stats.topo.ppn
    charges: dict[tuple[str, str], dict[int, float]] = {}
    for rec in stats.records:
        protocol = select_protocol(rec.byte_count, params)
        if rec.msg_class == INTRA:
            t = model_intra(rec.byte_count, protocol, params)
        else:
            t = model_max_rate(rec.byte_count, ppn, protocol, params)
        per_rank = charges.setdefault((rec.phase, rec.msg_class), {})
        per_rank[rec.src] = per_rank.get(rec.src, 0.0) + t

    phases: dict[str, dict[str, float]] = {}
    for phase in stats.phases():
        intra_part = max(charges.get((phase, INTRA), {}).values(), default=0.0)
        inter_part = max(charges.get((phase, INTER), {}).values(), default=0.0)
        phases[phase] = {
            INTRA: intra_part,
            INTER: inter_part,
            "total": intra_part + inter_part,
        }
    return ModeledCost(
        phases=phases, total=sum(p["total"] for p in phases.values())
    )


def params_from_dict(d: dict) -> CostModelParams:
    def protocol(name: str) -> ProtocolParams:
        if name not in d:
            raise ValueError(f"parameter file missing protocol {name!r}")
        entry = d[name]
        fields = {}
        for key in ("alpha", "b_inj", "b_max", "b_n", "alpha_l", "b_max_l"):
            if key not in entry:
                raise ValueError(f"protocol {name!r} missing field {key!r}")
            raw = entry[key]
            if isinstance(raw, str):
                if raw.lower() != "inf":
                    raise ValueError(f"{name}.{key}: bad value {raw!r}")
                fields[key] = math.inf
            else:
                fields[key] = float(raw)
        return ProtocolParams(**fields)

    thresholds = d.get("thresholds", {})
    return CostModelParams(
        short=protocol(SHORT),
        eager=protocol(EAGER),
        rendezvous=protocol(RENDEZVOUS),
        short_max=int(thresholds.get("short_max", 128)),
        eager_max=int(thresholds.get("eager_max", 8192)),
    )


def params_to_dict(params: CostModelParams) -> dict:
    out: dict = {}
    for name in PROTOCOLS:
        p = params.protocol(name)
        out[name] = {
            key: ("inf" if math.isinf(v) else v)
            for key, v in (
                ("alpha", p.alpha),
                ("b_inj", p.b_inj),
                ("b_max", p.b_max),
                ("b_n", p.b_n),
                ("alpha_l", p.alpha_l),
                ("b_max_l", p.b_max_l),
            )
        }
    out["thresholds"] = {"short_max": params.short_max, "eager_max": params.eager_max}
    return out


def load_params(text: str) -> CostModelParams:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"parameter file is not valid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise ValueError("parameter file must hold a JSON object")
    return params_from_dict(d)


def default_params() -> CostModelParams:
    """The bundled measured parameter set."""
    text = resources.files("napspmv").joinpath("data/default_params.json").read_text()
    return load_params(text)
