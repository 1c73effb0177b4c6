"""Sparse matrices in canonical CSR form plus the serial multiply kernel.

Canonical CSR here means: within every row the stored column indices are
strictly increasing, so a (row, col) pair is stored at most once. All
construction paths (COO conversion, Matrix Market parsing, random
generation) produce canonical storage; the constructor rejects anything
else. Values are float64, indices int64.

The multiply kernel accumulates row by row in ascending row order and,
within a row, in stored (ascending column) order. That fixed order is the
determinism contract the distributed executors compare against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MatrixMarketError(ValueError):
    """Malformed Matrix Market input. `line` is the 1-based offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CsrMatrix:
    """Compressed sparse row matrix with canonical (strictly sorted) rows."""

    def __init__(
        self,
        nrows: int,
        ncols: int,
        row_offsets: np.ndarray,
        col_indices: np.ndarray,
        values: np.ndarray,
    ):
        if nrows < 0 or ncols < 0:
            raise ValueError(f"negative shape ({nrows}, {ncols})")
        self.nrows = int(nrows)
        self.ncols = int(ncols)
        self.row_offsets = np.ascontiguousarray(row_offsets, dtype=np.int64)
        self.col_indices = np.ascontiguousarray(col_indices, dtype=np.int64)
        self.values = np.ascontiguousarray(values, dtype=np.float64)
        self._row_ids: np.ndarray | None = None
        self._validate()

    def _validate(self) -> None:
        off = self.row_offsets
        if off.shape != (self.nrows + 1,):
            raise ValueError(
                f"row_offsets length {off.shape[0]} != nrows+1 = {self.nrows + 1}"
            )
        if self.nrows >= 0 and (off.size == 0 or off[0] != 0):
            raise ValueError("row_offsets must start at 0")
        if np.any(np.diff(off) < 0):
            raise ValueError("row_offsets must be nondecreasing")
        nnz = int(off[-1])
        if self.col_indices.shape != (nnz,) or self.values.shape != (nnz,):
            raise ValueError(
                f"col_indices/values lengths ({self.col_indices.shape[0]}, "
                f"{self.values.shape[0]}) != nnz = {nnz}"
            )
        if nnz:
            if self.col_indices.min() < 0 or self.col_indices.max() >= self.ncols:
                raise ValueError("column index out of range")
            # strictly increasing within each row <=> increasing except at row starts
            interior = np.ones(nnz, dtype=bool)
            starts = off[1:-1]
            interior[starts[starts < nnz]] = False  # first entry of each later row
            interior[0] = False
            if np.any(np.diff(self.col_indices)[interior[1:]] <= 0):
                raise ValueError("columns must be strictly increasing within each row")

    @property
    def nnz(self) -> int:
        return int(self.row_offsets[-1])

    def row_ids(self) -> np.ndarray:
        """Row index of every stored entry, in storage order (cached)."""
        if self._row_ids is None:
            self._row_ids = np.repeat(
                np.arange(self.nrows, dtype=np.int64), np.diff(self.row_offsets)
            )
        return self._row_ids

    def row_cols(self, i: int) -> np.ndarray:
        s, e = self.row_offsets[i], self.row_offsets[i + 1]
        return self.col_indices[s:e]

    def row_values(self, i: int) -> np.ndarray:
        s, e = self.row_offsets[i], self.row_offsets[i + 1]
        return self.values[s:e]

    def equals(self, other: "CsrMatrix") -> bool:
        return (
            self.nrows == other.nrows
            and self.ncols == other.ncols
            and np.array_equal(self.row_offsets, other.row_offsets)
            and np.array_equal(self.col_indices, other.col_indices)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return f"CsrMatrix({self.nrows}x{self.ncols}, nnz={self.nnz})"


@dataclass
class DenseVector:
    """A dense vector, possibly a contiguous slice of a larger global one.

    `global_offset` is the global index of entries[0]; 0 for a full vector.
    """

    entries: np.ndarray
    global_offset: int = 0

    def __post_init__(self) -> None:
        self.entries = np.ascontiguousarray(self.entries, dtype=np.float64)
        if self.global_offset < 0:
            raise ValueError(f"negative global_offset {self.global_offset}")


def csr_from_coo(
    nrows: int,
    ncols: int,
    rows: np.ndarray,
    cols: np.ndarray,
    vals: np.ndarray,
) -> CsrMatrix:
    """Build canonical CSR from triplets; duplicate (row, col) pairs are summed."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if not (rows.shape == cols.shape == vals.shape):
        raise ValueError("rows/cols/vals length mismatch")
    if rows.size:
        if rows.min() < 0 or rows.max() >= nrows:
            raise ValueError("row index out of range")
        if cols.min() < 0 or cols.max() >= ncols:
            raise ValueError("column index out of range")
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if rows.size:
        new_group = np.empty(rows.size, dtype=bool)
        new_group[0] = True
        new_group[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(new_group)
        vals = np.add.reduceat(vals, starts)
        rows, cols = rows[starts], cols[starts]
    row_offsets = np.zeros(nrows + 1, dtype=np.int64)
    np.add.at(row_offsets, rows + 1, 1)
    np.cumsum(row_offsets, out=row_offsets)
    return CsrMatrix(nrows, ncols, row_offsets, cols, vals)


def spmv_accumulate(a: CsrMatrix, x: np.ndarray, y: np.ndarray) -> None:
    """y += A @ x with the fixed row-major, stored-order accumulation.

    `x` is indexed by the matrix's stored column ids (global or local,
    whatever space the matrix was built in); `y` has one slot per row.
    """
    if x.shape[0] < (int(a.col_indices.max()) + 1 if a.nnz else 0):
        raise ValueError("x shorter than the largest referenced column")
    if y.shape[0] != a.nrows:
        raise ValueError(f"y length {y.shape[0]} != nrows {a.nrows}")
    if a.nnz == 0:
        return
    products = a.values * x[a.col_indices]
    # bincount adds weights in input order: ascending rows, stored column order
    y += np.bincount(a.row_ids(), weights=products, minlength=a.nrows)


def generate_random(nrows: int, nnz_per_row: int, seed: int) -> CsrMatrix:
    """Uniform random square matrix with a fixed number of entries per row.

    Every row holds exactly `nnz_per_row` distinct columns drawn uniformly
    without replacement; values are uniform on [0, 1). Identical arguments
    reproduce the identical matrix.
    """
    if nrows < 1:
        raise ValueError(f"nrows must be >= 1, got {nrows}")
    if not 1 <= nnz_per_row <= nrows:
        raise ValueError(
            f"nnz_per_row must be in [1, {nrows}], got {nnz_per_row}"
        )
    rng = np.random.default_rng(seed)
    k = nnz_per_row
    cols = np.empty(nrows * k, dtype=np.int64)
    if k == nrows:
        cols = np.tile(np.arange(nrows, dtype=np.int64), nrows)
    else:
        for i in range(nrows):
            # Oversampled rejection: collect > k distinct candidates, then keep a
            # uniform k-subset. Column-exchangeable, hence uniform over k-subsets.
            have = np.empty(0, dtype=np.int64)
            while have.size < k:
                draw = rng.integers(0, nrows, size=2 * (k - have.size) + 8)
                have = np.unique(np.concatenate([have, draw]))
            if have.size > k:
                have = np.sort(rng.choice(have, size=k, replace=False))
            cols[i * k : (i + 1) * k] = have
    row_offsets = np.arange(0, (nrows + 1) * k, k, dtype=np.int64)
    values = rng.random(nrows * k)
    return CsrMatrix(nrows, nrows, row_offsets, cols, values)


_MM_FIELDS = {"real", "integer", "pattern"}
_MM_SYMMETRIES = {"general", "symmetric"}


def parse_matrix_market(text: str) -> CsrMatrix:
    """Parse Matrix Market coordinate input into canonical CSR.

    Accepts real/integer/pattern fields and general/symmetric storage;
    symmetric input is expanded (off-diagonal entries mirrored). Indices
    are 1-based; duplicates are summed. Raises MatrixMarketError with the
    offending 1-based line number on malformed input.
    """
    lines = text.splitlines()
    if not lines:
        raise MatrixMarketError("empty input")
    header = lines[0].strip().split()
    if len(header) != 5 or header[0] != "%%MatrixMarket":
        raise MatrixMarketError(
            "header must be '%%MatrixMarket matrix coordinate <field> <symmetry>'",
            line=1,
        )
    _, obj, fmt, fld, sym = (tok.lower() for tok in header)
    if obj != "matrix":
        raise MatrixMarketError(f"unsupported object {obj!r}", line=1)
    if fmt != "coordinate":
        raise MatrixMarketError(f"unsupported format {fmt!r} (coordinate only)", line=1)
    if fld not in _MM_FIELDS:
        raise MatrixMarketError(
            f"unsupported field {fld!r} (real, integer or pattern)", line=1
        )
    if sym not in _MM_SYMMETRIES:
        raise MatrixMarketError(
            f"unsupported symmetry {sym!r} (general or symmetric)", line=1
        )
    is_pattern = fld == "pattern"

    size_line = None
    body_start = 0
    for idx in range(1, len(lines)):
        stripped = lines[idx].strip()
        if not stripped or stripped.startswith("%"):
            continue
        size_line = idx
        body_start = idx + 1
        break
    if size_line is None:
        raise MatrixMarketError("missing size line", line=len(lines))
    parts = lines[size_line].split()
    if len(parts) != 3:
        raise MatrixMarketError(
            "size line must be '<nrows> <ncols> <nnz>'", line=size_line + 1
        )
    try:
        nrows, ncols, declared = (int(p) for p in parts)
    except ValueError:
        raise MatrixMarketError("non-integer size line", line=size_line + 1) from None
    if nrows < 0 or ncols < 0 or declared < 0:
        raise MatrixMarketError("negative size", line=size_line + 1)

    want = 2 if is_pattern else 3
    rows = np.empty(declared, dtype=np.int64)
    cols = np.empty(declared, dtype=np.int64)
    vals = np.ones(declared, dtype=np.float64)
    seen = 0
    for idx in range(body_start, len(lines)):
        stripped = lines[idx].strip()
        if not stripped or stripped.startswith("%"):
            continue
        if seen >= declared:
            raise MatrixMarketError(
                f"more than the declared {declared} entries", line=idx + 1
            )
        parts = stripped.split()
        if len(parts) != want:
            raise MatrixMarketError(
                f"expected {want} fields per entry, got {len(parts)}", line=idx + 1
            )
        try:
            i, j = int(parts[0]), int(parts[1])
            v = float(parts[2]) if not is_pattern else 1.0
        except ValueError:
            raise MatrixMarketError(f"non-numeric entry {stripped!r}", line=idx + 1) from None
        if not 1 <= i <= nrows or not 1 <= j <= ncols:
            raise MatrixMarketError(
                f"entry ({i}, {j}) outside {nrows}x{ncols}", line=idx + 1
            )
        rows[seen], cols[seen], vals[seen] = i - 1, j - 1, v
        seen += 1
    if seen != declared:
        raise MatrixMarketError(
            f"declared {declared} entries but found {seen}", line=len(lines)
        )

    if sym == "symmetric":
        if nrows != ncols:
            raise MatrixMarketError("symmetric matrix must be square", line=size_line + 1)
        off_diag = rows != cols
        mirror_rows, mirror_cols, mirror_vals = cols[off_diag], rows[off_diag], vals[off_diag]
        rows = np.concatenate([rows, mirror_rows])
        cols = np.concatenate([cols, mirror_cols])
        vals = np.concatenate([vals, mirror_vals])
    return csr_from_coo(nrows, ncols, rows, cols, vals)


def serialize_matrix_market(a: CsrMatrix) -> str:
    """Write canonical CSR as Matrix Market coordinate real general (1-based).

    Values are written with repr round-trip precision, so
    parse(serialize(a)) reproduces the CSR arrays exactly.
    """
    out = [
        "%%MatrixMarket matrix coordinate real general",
        f"{a.nrows} {a.ncols} {a.nnz}",
    ]
    row_ids = a.row_ids()
    for k in range(a.nnz):
        out.append(f"{row_ids[k] + 1} {a.col_indices[k] + 1} {float(a.values[k])!r}")
    return "\n".join(out) + "\n"
