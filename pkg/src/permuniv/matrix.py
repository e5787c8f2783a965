"""Zero-one matrices, interval minors and the uniform-to-matrix coupling.

Indexing follows the (row, column) = (y, x) convention, 1-based.  Each row
is stored as a Python int used as a bitset: bit ``x - 1`` holds column
``x``.  Row scans therefore reduce to shifts and lowest-set-bit lookups.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import (
    BadDivisibility,
    BadPartition,
    EmptyTrialSet,
    MatrixFormatError,
    OutOfBounds,
    TooLarge,
)
from .perm import Permutation, permutation_from_uniforms
from .rng import make_rng
from .stats import wilson_interval

MINOR_GUARD = 12

Interval = tuple[int, int]  # inclusive, 1-based


@dataclass(frozen=True)
class ZeroOneMatrix:
    rows: int
    cols: int
    bits: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0 or len(self.bits) != self.rows:
            raise MatrixFormatError("row count does not match bit rows")
        limit = 1 << self.cols
        if any(b < 0 or b >= limit for b in self.bits):
            raise MatrixFormatError("row has bits beyond the column count")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "ZeroOneMatrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        bits = []
        for r in rows:
            if len(r) != ncols:
                raise MatrixFormatError("ragged rows")
            b = 0
            for x, v in enumerate(r):
                if v not in (0, 1, True, False):
                    raise MatrixFormatError(f"entry {v!r} is not 0/1")
                if v:
                    b |= 1 << x
            bits.append(b)
        return cls(len(rows), ncols, tuple(bits))

    @classmethod
    def from_array(cls, arr) -> "ZeroOneMatrix":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise MatrixFormatError("expected a 2-d array")
        if not np.isin(arr, (0, 1)).all():
            raise MatrixFormatError("entries must be 0/1")
        weights = [1 << x for x in range(arr.shape[1])]
        bits = tuple(sum(w for w, v in zip(weights, row) if v) for row in arr.tolist())
        return cls(arr.shape[0], arr.shape[1], bits)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ZeroOneMatrix":
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def ones(cls, rows: int, cols: int) -> "ZeroOneMatrix":
        return cls(rows, cols, ((1 << cols) - 1,) * rows)

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator) -> "ZeroOneMatrix":
        """Entrywise independent fair bits."""
        return cls.from_array(rng.integers(0, 2, size=(rows, cols)))

    def get(self, y: int, x: int) -> int:
        self._check(y, x)
        return (self.bits[y - 1] >> (x - 1)) & 1

    def _check(self, y: int, x: int) -> None:
        if not (1 <= y <= self.rows and 1 <= x <= self.cols):
            raise OutOfBounds(f"({y}, {x}) outside {self.rows}x{self.cols}")

    def next_one(self, y: int, x: int) -> Optional[int]:
        """Column of the first one in row ``y`` at or right of column ``x``."""
        v = self.bits[y - 1] >> (x - 1)
        if v == 0:
            return None
        return x + (v & -v).bit_length() - 1

    def to_lists(self) -> list[list[int]]:
        return [[(b >> x) & 1 for x in range(self.cols)] for b in self.bits]

    def to_array(self) -> np.ndarray:
        return np.array(self.to_lists(), dtype=np.uint8).reshape(self.rows, self.cols)

    def ones_positions(self) -> list[tuple[int, int]]:
        return [(y, x) for y in range(1, self.rows + 1) for x in range(1, self.cols + 1)
                if (self.bits[y - 1] >> (x - 1)) & 1]

    def transpose(self) -> "ZeroOneMatrix":
        return ZeroOneMatrix.from_rows([list(c) for c in zip(*self.to_lists())]) \
            if self.rows else ZeroOneMatrix(self.cols, 0, (0,) * self.cols)

    def dominates(self, other: "ZeroOneMatrix") -> bool:
        """True when ``self`` has a one wherever ``other`` does."""
        return (self.rows, self.cols) == (other.rows, other.cols) and all(
            b & a == a for a, b in zip(other.bits, self.bits))

    def with_one(self, y: int, x: int) -> "ZeroOneMatrix":
        self._check(y, x)
        bits = list(self.bits)
        bits[y - 1] |= 1 << (x - 1)
        return ZeroOneMatrix(self.rows, self.cols, tuple(bits))

    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols}"]
        lines += ["".join(str(v) for v in row) for row in self.to_lists()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ZeroOneMatrix":
        lines = [ln.strip() for ln in text.strip().splitlines()]
        try:
            rows, cols = (int(t) for t in lines[0].split())
        except (IndexError, ValueError) as exc:
            raise MatrixFormatError("first line must be 'rows cols'") from exc
        body = lines[1:]
        if len(body) != rows or any(len(ln) != cols or set(ln) - {"0", "1"} for ln in body):
            raise MatrixFormatError("body does not match declared shape")
        return cls.from_rows([[int(ch) for ch in ln] for ln in body])

    def __str__(self) -> str:
        return "\n".join("".join(str(v) for v in row) for row in self.to_lists())


def read_matrix(path: str | Path) -> ZeroOneMatrix:
    return ZeroOneMatrix.from_text(Path(path).read_text())


def write_matrix(M: ZeroOneMatrix, path: str | Path) -> None:
    Path(path).write_text(M.to_text())


def permutation_matrix(sigma: Permutation) -> ZeroOneMatrix:
    """Ones at (sigma(x), x): rows are values, columns are positions."""
    bits = [0] * sigma.n
    for x, v in enumerate(sigma.values):
        bits[v - 1] |= 1 << x
    return ZeroOneMatrix(sigma.n, sigma.n, tuple(bits))


def _check_partition(parts: Sequence[Interval], size: int) -> None:
    expect = 1
    for a, b in parts:
        if a != expect or b < a:
            raise BadPartition(f"intervals {list(parts)} do not tile 1..{size}")
        expect = b + 1
    if expect != size + 1:
        raise BadPartition(f"intervals {list(parts)} do not tile 1..{size}")


def contract_rows(M: ZeroOneMatrix, parts: Sequence[Interval]) -> ZeroOneMatrix:
    _check_partition(parts, M.rows)
    bits = []
    for a, b in parts:
        acc = 0
        for y in range(a, b + 1):
            acc |= M.bits[y - 1]
        bits.append(acc)
    return ZeroOneMatrix(len(parts), M.cols, tuple(bits))


def contract_cols(M: ZeroOneMatrix, parts: Sequence[Interval]) -> ZeroOneMatrix:
    _check_partition(parts, M.cols)
    masks = [((1 << b) - 1) ^ ((1 << (a - 1)) - 1) for a, b in parts]
    bits = tuple(sum(1 << i for i, m in enumerate(masks) if row & m) for row in M.bits)
    return ZeroOneMatrix(M.rows, len(parts), bits)


def contract_blocks(M: ZeroOneMatrix, row_parts: Sequence[Interval],
                    col_parts: Sequence[Interval]) -> ZeroOneMatrix:
    """Block form: an entry is zero iff its block of ``M`` is all zero."""
    return contract_cols(contract_rows(M, row_parts), col_parts)


def contract_adjacent(M: ZeroOneMatrix, axis: str, i: int) -> ZeroOneMatrix:
    """One elementary contraction: OR row (or column) ``i`` with ``i + 1``."""
    size = M.rows if axis == "row" else M.cols
    if not 1 <= i < size:
        raise BadPartition(f"cannot contract {axis} {i} of {size}")
    parts = [(j, j) for j in range(1, i)] + [(i, i + 1)] + [(j, j) for j in range(i + 2, size + 1)]
    return contract_rows(M, parts) if axis == "row" else contract_cols(M, parts)


def interval_partitions(size: int, count: int) -> Iterable[list[Interval]]:
    """All ways to cut 1..size into ``count`` consecutive nonempty intervals."""
    if count < 1 or count > size:
        return
    for cuts in itertools.combinations(range(1, size), count - 1):
        bounds = (0,) + cuts + (size,)
        yield [(bounds[i] + 1, bounds[i + 1]) for i in range(count)]


def is_interval_minor(P: ZeroOneMatrix, M: ZeroOneMatrix) -> bool:
    """Exhaustive interval-minor test over all pairs of interval partitions."""
    if M.rows > MINOR_GUARD or M.cols > MINOR_GUARD:
        raise TooLarge(f"{M.rows}x{M.cols} exceeds the exhaustive guard {MINOR_GUARD}")
    if P.rows > M.rows or P.cols > M.cols:
        return False
    if P.rows == 0 or P.cols == 0:
        return True
    col_options = []
    for parts in interval_partitions(M.cols, P.cols):
        col_options.append([((1 << b) - 1) ^ ((1 << (a - 1)) - 1) for a, b in parts])
    need = [[x for x in range(P.cols) if (P.bits[y] >> x) & 1] for y in range(P.rows)]
    for row_parts in interval_partitions(M.rows, P.rows):
        ors = []
        for a, b in row_parts:
            acc = 0
            for y in range(a, b + 1):
                acc |= M.bits[y - 1]
            ors.append(acc)
        for masks in col_options:
            if all(ors[y] & masks[x] for y in range(P.rows) for x in need[y]):
                return True
    return False


def greedy_fixed_rows(M: ZeroOneMatrix, rows: Sequence[int]) -> Optional[list[int]]:
    """Leftmost columns c_1 < ... < c_k with M(rows[j], c_j) = 1, if any."""
    cols, x = [], 1
    for y in rows:
        if x > M.cols:
            return None
        c = M.next_one(y, x)
        if c is None:
            return None
        cols.append(c)
        x = c + 1
    return cols


def matrix_contains_permutation(M: ZeroOneMatrix, pi: Permutation) -> Optional[list[tuple[int, int]]]:
    """Positions of a copy of ``P_pi`` in ``M`` as ``[(row, col), ...]``, or None.

    A copy is k ones with strictly increasing columns whose rows are ordered
    exactly as the values of ``pi``.  For a fixed choice of rows the
    leftmost greedy placement is optimal, so it suffices to try every
    k-subset of rows.
    """
    k = pi.n
    if k == 0:
        return []
    if k > M.rows or k > M.cols:
        return None
    for subset in itertools.combinations(range(1, M.rows + 1), k):
        rows = [subset[v - 1] for v in pi.values]
        cols = greedy_fixed_rows(M, rows)
        if cols is not None:
            return list(zip(rows, cols))
    return None


def is_copy(M: ZeroOneMatrix, pi: Permutation, positions: Sequence[tuple[int, int]]) -> bool:
    """Re-verify a claimed copy of ``pi`` in ``M``."""
    if len(positions) != pi.n:
        return False
    for j, (y, x) in enumerate(positions):
        if not (1 <= y <= M.rows and 1 <= x <= M.cols) or not M.get(y, x):
            return False
        if j and positions[j - 1][1] >= x:
            return False
    for i in range(pi.n):
        for j in range(pi.n):
            if (positions[i][0] < positions[j][0]) != (pi.values[i] < pi.values[j]):
                return False
    return True


@dataclass(frozen=True)
class CoupledSample:
    """A permutation and the reduced matrix built from the same uniforms.

    ``sigma`` is the rank vector of the uniforms (``sigma(j)`` is the rank of
    ``U_j``); with that orientation the band/block rule for ``mu`` gives an
    interval minor of ``P_sigma``: row bands group ranks, column blocks
    group indices ``j``.
    """

    k: int
    sigma: Permutation
    mu: ZeroOneMatrix
    uniforms: tuple[float, ...] = field(repr=False)

    @property
    def m(self) -> int:
        return self.mu.cols


def coupled_from_uniforms(k: int, u: Sequence[float]) -> CoupledSample:
    n = len(u)
    if k < 1 or n == 0 or n % (4 * k):
        raise BadDivisibility(f"n={n} is not a positive multiple of 4k={4 * k}")
    m = n // (4 * k)
    bits = [0] * (2 * k)
    for j, uj in enumerate(u):
        band = min(int(uj * 2 * k), 2 * k - 1)
        bits[band] |= 1 << (j // (4 * k))
    sigma = permutation_from_uniforms(u).inverse()
    return CoupledSample(k, sigma, ZeroOneMatrix(2 * k, m, tuple(bits)), tuple(u))


def build_coupled_matrix(k: int, n: int, seed: int) -> CoupledSample:
    if k < 1 or n < 1 or n % (4 * k):
        raise BadDivisibility(f"n={n} is not a positive multiple of 4k={4 * k}")
    u = make_rng(seed).random(n)
    return coupled_from_uniforms(k, [float(v) for v in u])


def coupling_certificate(sample: CoupledSample) -> Optional[tuple[list[Interval], list[Interval]]]:
    """Row and column partitions of ``P_sigma`` whose contraction dominates ``mu``.

    Columns are cut into the index blocks J_x.  Row intervals (rank ranges)
    are chosen greedily: each band takes the shortest nonempty run of ranks
    that meets every block the band needs.  Shortest-first is optimal since
    later bands only benefit from starting earlier.  Returns None if no such
    row partition exists.
    """
    k, mu, sigma = sample.k, sample.mu, sample.sigma
    n, rows = sigma.n, mu.rows
    block_of_rank = [0] * (n + 1)
    for j, rank in enumerate(sigma.values):
        block_of_rank[rank] = j // (4 * k)
    parts: list[Interval] = []
    start = 1
    for y in range(rows):
        need = mu.bits[y]
        end = start - 1
        got = 0
        while end < n and (end < start or got & need != need):
            end += 1
            got |= 1 << block_of_rank[end]
        if got & need != need or end < start:
            return None
        if y == rows - 1:
            end = n
        elif n - end < rows - 1 - y:
            return None
        parts.append((start, end))
        start = end + 1
    col_parts = [(4 * k * x + 1, 4 * k * (x + 1)) for x in range(mu.cols)]
    return parts, col_parts


def verify_certificate(P: ZeroOneMatrix, M: ZeroOneMatrix, row_parts: Sequence[Interval],
                       col_parts: Sequence[Interval]) -> bool:
    """True when contracting ``M`` by the given partitions dominates ``P``."""
    return contract_blocks(M, row_parts, col_parts).dominates(P)


@dataclass
class EntryFrequencyTable:
    k: int
    n: int
    trials: int
    counts: np.ndarray  # (2k, m) number of trials with a one at (y, x)

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.trials

    def intervals(self, confidence: float = 0.99) -> list[list[tuple[float, float]]]:
        return [[wilson_interval(int(c), self.trials, confidence) for c in row]
                for row in self.counts]

    def min_upper(self, confidence: float = 0.99) -> float:
        return min(hi for row in self.intervals(confidence) for _, hi in row)


def estimate_entry_lower_bound(k: int, n: int, trials: int, seed: int) -> EntryFrequencyTable:
    """Empirical frequency that each entry of the coupled matrix is one."""
    if trials < 1:
        raise EmptyTrialSet("need at least one trial")
    if k < 1 or n % (4 * k):
        raise BadDivisibility(f"n={n} is not a positive multiple of 4k={4 * k}")
    m = n // (4 * k)
    rng = make_rng(seed)
    counts = np.zeros((2 * k, m), dtype=np.int64)
    # vectorised band/block rule over chunks of trials
    chunk = max(1, min(trials, 2_000_000 // max(n, 1)))
    done = 0
    while done < trials:
        t = min(chunk, trials - done)
        u = rng.random((t, m, 4 * k))
        bands = np.minimum((u * 2 * k).astype(np.int64), 2 * k - 1)
        hit = np.zeros((t, 2 * k, m), dtype=bool)
        ti, xi, _ = np.indices(bands.shape)
        hit[ti, bands, xi] = True
        counts += hit.sum(axis=0)
        done += t
    return EntryFrequencyTable(k, n, trials, counts)
