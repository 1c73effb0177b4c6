import numpy as np
import pytest

from napspmv import (
    Partition,
    partition_contiguous,
    partition_from_file,
    partition_strided,
)


class TestContiguous:
    def test_even_split(self):
        p = partition_contiguous(8, 4)
        assert list(p.owner) == [0, 0, 1, 1, 2, 2, 3, 3]
        assert p.kind == "contiguous"

    def test_remainder_goes_to_leading_ranks(self):
        p = partition_contiguous(10, 4)
        # 10 = 4*2 + 2: ranks 0 and 1 get 3 rows, ranks 2 and 3 get 2
        assert list(p.row_counts()) == [3, 3, 2, 2]
        assert list(p.owned_rows(0)) == [0, 1, 2]
        assert list(p.owned_rows(2)) == [6, 7]

    def test_single_rank(self):
        p = partition_contiguous(5, 1)
        assert list(p.owned_rows(0)) == [0, 1, 2, 3, 4]

    def test_rejects_more_ranks_than_rows(self):
        with pytest.raises(ValueError):
            partition_contiguous(3, 4)


class TestStrided:
    def test_round_robin(self):
        p = partition_strided(7, 3)
        assert list(p.owner) == [0, 1, 2, 0, 1, 2, 0]
        assert list(p.owned_rows(0)) == [0, 3, 6]
        assert list(p.owned_rows(2)) == [2, 5]

    def test_rejects_more_ranks_than_rows(self):
        with pytest.raises(ValueError):
            partition_strided(2, 3)


class TestFromFile:
    def test_parses_one_rank_per_line(self):
        p = partition_from_file("1\n0\n1\n", nrows=3, num_procs=2)
        assert list(p.owner) == [1, 0, 1]
        assert p.kind == "file"

    def test_blank_lines_skipped(self):
        p = partition_from_file("0\n\n1\n\n", nrows=2, num_procs=2)
        assert list(p.owner) == [0, 1]

    def test_empty_ranks_are_legal_here(self):
        p = partition_from_file("0\n0\n2\n", nrows=3, num_procs=3)
        assert list(p.owned_rows(1)) == []
        assert list(p.row_counts()) == [2, 0, 1]

    def test_wrong_row_count_rejected(self):
        with pytest.raises(ValueError):
            partition_from_file("0\n1\n", nrows=3, num_procs=2)

    def test_error_lines(self):
        with pytest.raises(ValueError, match="line 2"):
            partition_from_file("0\nxyz\n1\n", nrows=3, num_procs=2)
        with pytest.raises(ValueError, match="line 3"):
            partition_from_file("0\n1\n5\n", nrows=3, num_procs=2)


class TestPartitionCore:
    def test_local_index_matches_owned_order(self):
        p = partition_strided(9, 3)
        # rank 1 owns rows 1, 4, 7 in that ascending order
        got = p.local_index(1, np.array([7, 1, 4]))
        assert list(got) == [2, 0, 1]

    def test_local_index_rejects_foreign_rows(self):
        p = partition_contiguous(6, 2)
        with pytest.raises(ValueError):
            p.local_index(0, np.array([5]))
        with pytest.raises(ValueError):
            p.local_index(1, np.array([0]))

    def test_rejects_owner_out_of_range(self):
        with pytest.raises(ValueError):
            Partition(np.array([0, 3]), num_procs=3, kind="file")
        with pytest.raises(ValueError):
            Partition(np.array([-1]), num_procs=2, kind="file")

    def test_counts_sum_to_nrows(self):
        p = partition_contiguous(17, 5)
        assert int(p.row_counts().sum()) == 17
        assert sum(p.owned_rows(r).size for r in range(5)) == 17
