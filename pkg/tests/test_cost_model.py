import json
import math

import numpy as np
import pytest

from napspmv import (
    EAGER,
    RENDEZVOUS,
    SHORT,
    CostModelParams,
    MessageStats,
    ModelDomainError,
    ProtocolParams,
    Topology,
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

REL = 1e-12


def close(got, want):
    assert got == pytest.approx(want, rel=REL)


@pytest.fixture(scope="module")
def params():
    return default_params()


class TestProtocolSelection:
    def test_thresholds(self, params):
        assert select_protocol(0, params) == SHORT
        assert select_protocol(64, params) == SHORT
        assert select_protocol(128, params) == SHORT
        assert select_protocol(129, params) == EAGER
        assert select_protocol(4096, params) == EAGER
        assert select_protocol(8192, params) == EAGER
        assert select_protocol(8193, params) == RENDEZVOUS
        assert select_protocol(1_000_000, params) == RENDEZVOUS

    def test_negative_size_rejected(self, params):
        with pytest.raises(ValueError):
            select_protocol(-1, params)


class TestPointValues:
    def test_rendezvous_max_rate_ppn16(self, params):
        got = model_max_rate(65536, 16, RENDEZVOUS, params)
        close(got, 2.0e-5 + 1048576 / 5.5e9)

    def test_short_intra_zero_bytes(self, params):
        assert model_intra(0, SHORT, params) == 1.3e-6

    def test_postal_rendezvous_megabyte(self, params):
        close(model_postal(1_000_000, RENDEZVOUS, params), 2.0e-5 + 1_000_000 / 6.1e8)

    def test_postal_eager_threshold(self, params):
        close(model_postal(8192, EAGER, params), 1.1e-5 + 8192 / 6.2e7)

    def test_intra_rendezvous_megabyte(self, params):
        close(model_intra(1_000_000, RENDEZVOUS, params), 4.2e-6 + 1_000_000 / 3.1e9)

    def test_intra_eager_threshold(self, params):
        close(model_intra(8192, EAGER, params), 1.6e-6 + 8192 / 7.4e8)

    def test_rendezvous_max_rate_ppn1_is_postal(self, params):
        # ppn = 1 shares nothing: min(b_n, b_max) = b_max here
        got = model_max_rate(4_000_000, 1, RENDEZVOUS, params)
        close(got, model_postal(4_000_000, RENDEZVOUS, params))


class TestDomainErrors:
    def test_short_max_rate_ppn1_out_of_domain(self, params):
        # the short fit's peak bandwidth is negative; one process alone
        # cannot be charged with it
        with pytest.raises(ModelDomainError):
            model_max_rate(64, 1, SHORT, params)
        with pytest.raises(ModelDomainError):
            model_max_rate(0, 1, SHORT, params)

    def test_short_max_rate_recovers_at_higher_ppn(self, params):
        # with enough sharing processes the effective bandwidth is positive
        got = model_max_rate(64, 16, SHORT, params)
        denom = -1.8e7 + 15 * 6.3e8
        close(got, 4.0e-6 + 16 * 64 / denom)

    def test_postal_with_nonpositive_bandwidth(self, params):
        with pytest.raises(ModelDomainError):
            model_postal(64, SHORT, params)  # b_max < 0
        assert model_postal(0, SHORT, params) == 4.0e-6  # latency-only is fine

    def test_bad_arguments(self, params):
        with pytest.raises(ValueError):
            model_postal(-1, EAGER, params)
        with pytest.raises(ValueError):
            model_max_rate(10, 0, EAGER, params)
        with pytest.raises(ValueError):
            params.protocol("bulk")


class TestMonotonicity:
    def test_postal_increases_with_size(self, params):
        sizes = [8192 + 1, 10**4, 10**5, 10**6, 10**7]
        times = [model_postal(s, RENDEZVOUS, params) for s in sizes]
        assert all(a < b for a, b in zip(times, times[1:]))

    def test_max_rate_increases_with_ppn(self, params):
        # fixed bytes per process: more senders, more time (b_n binds)
        times = [model_max_rate(65536, p, RENDEZVOUS, params) for p in (2, 4, 8, 16)]
        assert all(a < b for a, b in zip(times, times[1:]))

    def test_intra_cheaper_than_inter_at_scale(self, params):
        s = 65536
        assert model_intra(s, RENDEZVOUS, params) < model_max_rate(
            s, 16, RENDEZVOUS, params
        )


class TestInfinityHandling:
    def test_infinite_nic_cap_drops_the_min(self):
        p = ProtocolParams(
            alpha=1e-6, b_inj=1e9, b_max=2e9, b_n=math.inf, alpha_l=1e-6, b_max_l=1e9
        )
        params = CostModelParams(short=p, eager=p, rendezvous=p)
        got = model_max_rate(1000, 4, EAGER, params)
        close(got, 1e-6 + 4 * 1000 / (2e9 + 3 * 1e9))

    def test_default_short_and_eager_have_infinite_cap(self, params):
        assert math.isinf(params.short.b_n)
        assert math.isinf(params.eager.b_n)
        assert params.rendezvous.b_n == 5.5e9


class TestSerialization:
    def test_round_trip_preserves_infinity(self, params):
        text = json.dumps(params_to_dict(params))
        again = load_params(text)
        assert again == params

    def test_inf_written_as_string(self, params):
        d = params_to_dict(params)
        assert d["short"]["b_n"] == "inf"
        assert d["rendezvous"]["b_n"] == 5.5e9
        assert d["thresholds"] == {"short_max": 128, "eager_max": 8192}

    def test_missing_protocol_rejected(self):
        with pytest.raises(ValueError):
            params_from_dict({"short": {}})

    def test_missing_field_rejected(self, params):
        d = params_to_dict(params)
        del d["eager"]["b_inj"]
        with pytest.raises(ValueError):
            params_from_dict(d)

    def test_bad_string_value_rejected(self, params):
        d = params_to_dict(params)
        d["short"]["alpha"] = "fast"
        with pytest.raises(ValueError):
            params_from_dict(d)

    def test_invalid_json_rejected(self):
        with pytest.raises(ValueError):
            load_params("{not json")
        with pytest.raises(ValueError):
            load_params("[1, 2]")


class TestModelStats:
    def test_single_message_phase(self, params):
        topo = Topology(2, 2)
        stats = MessageStats(topo)
        stats.add("inter_node", 0, 2, 100)  # 800 bytes: eager, inter
        cost = model_stats(stats, params)
        want = model_max_rate(800, 2, EAGER, params)
        close(cost.phases["inter_node"]["inter"], want)
        assert cost.phases["inter_node"]["intra"] == 0.0
        close(cost.total, want)

    def test_per_rank_max_not_sum(self, params):
        topo = Topology(2, 2)
        stats = MessageStats(topo)
        # two senders in one phase: the part is the slower rank, not the sum
        stats.add("inter_node", 0, 2, 100)
        stats.add("inter_node", 1, 3, 300)
        cost = model_stats(stats, params)
        t0 = model_max_rate(800, 2, EAGER, params)
        t1 = model_max_rate(2400, 2, EAGER, params)
        close(cost.phases["inter_node"]["inter"], max(t0, t1))

    def test_same_rank_charges_accumulate(self, params):
        topo = Topology(2, 2)
        stats = MessageStats(topo)
        stats.add("inter_node", 0, 2, 100)
        stats.add("inter_node", 0, 3, 100)
        cost = model_stats(stats, params)
        close(
            cost.phases["inter_node"]["inter"],
            2 * model_max_rate(800, 2, EAGER, params),
        )

    def test_intra_and_inter_parts_add_within_phase(self, params):
        topo = Topology(2, 2)
        stats = MessageStats(topo)
        stats.add("standard", 0, 1, 100)  # intra
        stats.add("standard", 0, 2, 100)  # inter
        cost = model_stats(stats, params)
        ti = model_intra(800, EAGER, params)
        tx = model_max_rate(800, 2, EAGER, params)
        close(cost.phases["standard"]["total"], ti + tx)
        close(cost.total, ti + tx)

    def test_phase_totals_add_across_phases(self, params):
        topo = Topology(2, 2)
        stats = MessageStats(topo)
        stats.add("local_initial", 0, 1, 50)
        stats.add("inter_node", 0, 2, 50)
        cost = model_stats(stats, params)
        close(
            cost.total,
            cost.phases["local_initial"]["total"] + cost.phases["inter_node"]["total"],
        )

    def test_protocol_chosen_per_message(self, params):
        topo = Topology(2, 1)
        stats = MessageStats(topo)
        stats.add("inter_node", 0, 1, 8)      # 64 bytes: short
        stats.add("inter_node", 1, 0, 4096)   # 32768 bytes: rendezvous
        with pytest.raises(ModelDomainError):
            # short inter at ppn = 1 is out of the short fit's domain
            model_stats(stats, params)

    def test_to_dict_shape(self, params):
        topo = Topology(2, 2)
        stats = MessageStats(topo)
        stats.add("inter_node", 0, 2, 100)
        d = model_stats(stats, params).to_dict()
        assert set(d) == {"phases", "total"}
        assert set(d["phases"]["inter_node"]) == {"intra", "inter", "total"}

    def test_example_modeled_cost_positive(self, example, params):
        from napspmv import compile_node_aware

        a, part, topo = example
        stats = compile_node_aware(a, part, topo).message_stats(topo)
        cost = model_stats(stats, params)
        assert cost.total > 0.0
        assert set(cost.phases) == {
            "fully_local",
            "local_initial",
            "inter_node",
            "local_dist",
        }
