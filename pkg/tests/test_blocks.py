import numpy as np
import pytest

from napspmv import (
    NODE_AWARE,
    STANDARD,
    Topology,
    partition_contiguous,
    partition_strided,
    split_blocks,
    spmv_accumulate,
)

from conftest import random_case
from reference_tables import (
    RANK3_OFF_NODE_COLS,
    RANK3_ON_NODE_COLS,
    RANK3_ON_PROCESS_COLS,
)


class TestExampleSplit:
    def test_rank3_three_way_split(self, example):
        a, part, topo = example
        b = split_blocks(a, part, topo, rank=3, mode=NODE_AWARE)
        assert list(b.owned_rows) == [3]
        # row 3 references columns 0..3; 3 is its own, 2 sits on its node,
        # 0 and 1 live on node 0
        assert list(np.asarray(b.on_process.col_indices)) == [0]  # local slot of col 3
        assert list(b.on_node_cols) == RANK3_ON_NODE_COLS
        assert list(b.off_node_cols) == RANK3_OFF_NODE_COLS
        assert b.on_process.nnz == len(RANK3_ON_PROCESS_COLS)
        assert b.on_node.nnz == 1
        assert b.off_node.nnz == 2
        assert list(b.on_node.values) == [33.0]
        assert list(b.off_node.values) == [31.0, 32.0]

    def test_rank3_standard_split(self, example):
        a, part, topo = example
        b = split_blocks(a, part, topo, rank=3, mode=STANDARD)
        assert list(b.off_process_cols) == [0, 1, 2]
        assert b.off_process.nnz == 3
        assert b.on_node is None and b.off_node is None

    def test_nnz_conserved_across_all_ranks(self, example):
        a, part, topo = example
        for mode in (STANDARD, NODE_AWARE):
            total = sum(
                split_blocks(a, part, topo, r, mode).nnz for r in range(6)
            )
            assert total == a.nnz

    def test_rank0_owns_diagonal_block(self, example):
        a, part, topo = example
        b = split_blocks(a, part, topo, rank=0, mode=NODE_AWARE)
        # row 0: col 0 on-process, col 1 on-node, cols 3 and 5 off-node
        assert b.on_process.nnz == 1
        assert list(b.on_node_cols) == [1]
        assert list(b.off_node_cols) == [3, 5]


class TestSplitGeneric:
    @pytest.mark.parametrize("make_part", [partition_contiguous, partition_strided])
    def test_blocks_reassemble_the_rows(self, make_part):
        a = random_case(60, 8, seed=4)
        topo = Topology(num_nodes=3, ppn=2)
        part = make_part(60, topo.num_procs)
        x = np.random.default_rng(5).random(60)
        expect = np.zeros(60)
        spmv_accumulate(a, x, expect)
        got = np.zeros(60)
        for r in range(topo.num_procs):
            b = split_blocks(a, part, topo, r, NODE_AWARE)
            y = np.zeros(b.owned_rows.size)
            spmv_accumulate(b.on_process, x[b.owned_rows], y)
            spmv_accumulate(b.on_node, x[b.on_node_cols], y)
            spmv_accumulate(b.off_node, x[b.off_node_cols], y)
            got[b.owned_rows] = y
        assert np.allclose(got, expect, rtol=1e-13, atol=0)

    def test_standard_off_process_is_union_of_node_classes(self):
        a = random_case(40, 6, seed=9)
        topo = Topology(num_nodes=2, ppn=2)
        part = partition_strided(40, topo.num_procs)
        for r in range(4):
            std = split_blocks(a, part, topo, r, STANDARD)
            nap = split_blocks(a, part, topo, r, NODE_AWARE)
            merged = np.union1d(nap.on_node_cols, nap.off_node_cols)
            assert np.array_equal(std.off_process_cols, merged)
            assert std.off_process.nnz == nap.on_node.nnz + nap.off_node.nnz

    def test_col_maps_sorted_distinct_and_foreign(self):
        a = random_case(50, 10, seed=13)
        topo = Topology(num_nodes=2, ppn=4)
        part = partition_contiguous(50, topo.num_procs)
        for r in range(topo.num_procs):
            b = split_blocks(a, part, topo, r, NODE_AWARE)
            for cols_map, pred in (
                (b.on_node_cols, lambda o: o != r and o // 4 == topo.node_of(r)),
                (b.off_node_cols, lambda o: o // 4 != topo.node_of(r)),
            ):
                assert np.all(np.diff(cols_map) > 0) if cols_map.size > 1 else True
                for c in cols_map:
                    assert pred(int(part.owner[c]))

    def test_single_node_has_empty_off_node(self):
        a = random_case(20, 4, seed=1)
        topo = Topology(num_nodes=1, ppn=4)
        part = partition_contiguous(20, 4)
        for r in range(4):
            b = split_blocks(a, part, topo, r, NODE_AWARE)
            assert b.off_node.nnz == 0
            assert b.off_node_cols.size == 0

    def test_empty_rank_from_explicit_partition(self):
        from napspmv import partition_from_file

        text = "\n".join(["0"] * 5 + ["2"] * 5) + "\n"
        part = partition_from_file(text, nrows=10, num_procs=4)
        a = random_case(10, 3, seed=2)
        topo = Topology(num_nodes=2, ppn=2)
        b = split_blocks(a, part, topo, rank=1, mode=NODE_AWARE)
        assert b.owned_rows.size == 0
        assert b.nnz == 0

    def test_mode_validated(self, example):
        a, part, topo = example
        with pytest.raises(ValueError):
            split_blocks(a, part, topo, 0, mode="other")

    def test_shape_mismatches_rejected(self, example):
        a, part, topo = example
        with pytest.raises(ValueError):
            split_blocks(a, partition_contiguous(6, 3), topo, 0)
        with pytest.raises(ValueError):
            split_blocks(a, part, Topology(num_nodes=2, ppn=2), 0)
