"""Greedy thread scanning over zero-one matrices, run lengths and run events."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import Infeasible, OutOfBounds, RowRangeExceeded
from .matrix import ZeroOneMatrix
from .perm import Permutation

Position = tuple[int, int]


def run_length(M: ZeroOneMatrix, y: int, x: int) -> int:
    """Number of consecutive zeros starting at (y, x) going right.

    Zero when M(y, x) = 1; truncated at the right edge.
    """
    if not (1 <= y <= M.rows and 1 <= x <= M.cols):
        raise OutOfBounds(f"({y}, {x}) outside {M.rows}x{M.cols}")
    c = M.next_one(y, x)
    return (M.cols + 1 - x) if c is None else c - x


def negative_binomial_tail(ell: int, r: int) -> float:
    """Exact Pr(G_1 + ... + G_ell >= r) for i.i.d. Geom(1/2) failure counts.

    Equals the chance of fewer than ``ell`` heads in ``r + ell - 1`` fair
    flips.  The sum is done on exact integers, so the only rounding is the
    final (correctly rounded) division.
    """
    if ell < 1:
        raise ValueError("ell must be at least 1")
    if r <= 0:
        return 1.0
    flips = r + ell - 1
    num = sum(math.comb(flips, j) for j in range(ell))
    return num / (1 << flips)


@dataclass
class ThreadTrace:
    t: int
    exposed: list[Position]
    success: bool
    witness: Optional[list[Position]]
    pretended: int = 0
    pretended_at: list[Position] = field(default_factory=list)
    # per pattern element: (row, first column read, last column read)
    segments: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def exposed_count(self) -> int:
        return len(self.exposed)

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "success": self.success,
            "witness": [list(p) for p in self.witness] if self.witness is not None else None,
            "exposed_count": self.exposed_count,
            "pretended": self.pretended,
        }


def scan_thread(M: ZeroOneMatrix, pi: Permutation, t: int, cap: Optional[int] = None) -> ThreadTrace:
    """Scan along thread ``t`` for ``pi``: element j is sought in row pi(j) + t.

    Each row is read left to right from the column after the previous hit.
    With ``cap`` set, reading ``cap`` zeros in a row makes the scan treat the
    last of them as a one and move on to the next element.
    """
    k = pi.n
    if t < 0 or t + k > M.rows:
        raise RowRangeExceeded(f"thread {t} needs rows {t + 1}..{t + k} of {M.rows}")
    if cap is not None and cap < 1:
        raise ValueError("cap must be positive")
    exposed: list[Position] = []
    witness: list[Position] = []
    pretended_at: list[Position] = []
    segments: list[tuple[int, int, int]] = []
    x = 1
    for v in pi.values:
        y = v + t
        if x > M.cols:
            return ThreadTrace(t, exposed, False, None, len(pretended_at), pretended_at, segments)
        hit = M.next_one(y, x)
        run = (M.cols + 1 - x) if hit is None else hit - x
        if cap is not None and run >= cap:
            stop = x + cap - 1
            pretended_at.append((y, stop))
        elif hit is not None:
            stop = hit
        else:
            exposed.extend((y, c) for c in range(x, M.cols + 1))
            segments.append((y, x, M.cols))
            return ThreadTrace(t, exposed, False, None, len(pretended_at), pretended_at, segments)
        exposed.extend((y, c) for c in range(x, stop + 1))
        segments.append((y, x, stop))
        witness.append((y, stop))
        x = stop + 1
    return ThreadTrace(t, exposed, True, witness, len(pretended_at), pretended_at, segments)


@dataclass
class Overlap:
    i: int
    j: int
    size: int
    rows: list[int]

    def to_dict(self) -> dict:
        return {"i": self.i, "j": self.j, "size": self.size, "rows": self.rows}


@dataclass
class ScanReport:
    traces: list[ThreadTrace]
    overlaps: list[Overlap]

    @property
    def any_success(self) -> bool:
        return any(tr.success for tr in self.traces)

    def to_dict(self) -> dict:
        return {
            "traces": [tr.to_dict() for tr in self.traces],
            "overlaps": [ov.to_dict() for ov in self.overlaps],
            "any_success": self.any_success,
        }


def multi_thread_scan(M: ZeroOneMatrix, pi: Permutation, threads: Sequence[int],
                      cap: Optional[int] = None) -> ScanReport:
    """Run one thread per offset on the same matrix; tabulate shared entries.

    ``Overlap.rows`` lists the rows containing entries exposed by both
    threads, which is the quantity bounded by the shift statistic of ``pi``.
    """
    threads = list(threads)
    if any(b <= a for a, b in zip(threads, threads[1:])):
        raise ValueError("thread offsets must be strictly increasing")
    traces = [scan_thread(M, pi, t, cap) for t in threads]
    sets = [set(tr.exposed) for tr in traces]
    overlaps = []
    for i in range(len(traces)):
        for j in range(i + 1, len(traces)):
            common = sets[i] & sets[j]
            overlaps.append(Overlap(i, j, len(common), sorted({y for y, _ in common})))
    return ScanReport(traces, overlaps)


def choose_threads(forbidden: Iterable[int], count: int, max_t: int) -> list[int]:
    """Greedy smallest-first offsets in [1, max_t] avoiding forbidden differences."""
    if count < 1:
        raise ValueError("count must be positive")
    bad = set(forbidden)
    chosen: list[int] = []
    for t in range(1, max_t + 1):
        if all(t - s not in bad for s in chosen):
            chosen.append(t)
            if len(chosen) == count:
                return chosen
    raise Infeasible(f"only {len(chosen)} of {count} offsets available up to {max_t}")


def row_runs(M: ZeroOneMatrix, y: int) -> list[int]:
    """run_length at every column of row ``y`` (index 0 is column 1)."""
    out = [0] * M.cols
    run = 0
    b = M.bits[y - 1]
    for x in range(M.cols, 0, -1):
        run = 0 if (b >> (x - 1)) & 1 else run + 1
        out[x - 1] = run
    return out


def check_event_A(M: ZeroOneMatrix, threshold: int) -> tuple[bool, list[Position]]:
    """No zero run longer than ``threshold`` anywhere; lists every violation."""
    violations = []
    for y in range(1, M.rows + 1):
        for x, r in enumerate(row_runs(M, y), start=1):
            if r > threshold:
                violations.append((y, x))
    return not violations, violations


def check_event_A_prime(M: ZeroOneMatrix, threshold: int,
                        max_exception_rows: int) -> tuple[bool, list[int]]:
    """At most ``max_exception_rows`` rows contain a zero run longer than ``threshold``."""
    offending = [y for y in range(1, M.rows + 1) if max(row_runs(M, y), default=0) > threshold]
    return len(offending) <= max_exception_rows, offending


def sum_runs_at_placement(M: ZeroOneMatrix, placement: Sequence[Position], t: int = 0) -> int:
    """Sum of run lengths at (row + t, column) over a placement in distinct rows."""
    rows = [y for y, _ in placement]
    if len(set(rows)) != len(rows):
        raise ValueError("placement rows must be distinct")
    return sum(run_length(M, y + t, x) for y, x in placement)


def verify_trace(M: ZeroOneMatrix, pi: Permutation, trace: ThreadTrace) -> bool:
    """Re-check the structural invariants of a trace against its matrix."""
    cols = [x for _, x in trace.exposed]
    if len(set(cols)) != len(cols) or len(cols) > M.cols:
        return False
    if trace.success:
        w = trace.witness
        if w is None or len(w) != pi.n:
            return False
        if any(y != v + trace.t for (y, _), v in zip(w, pi.values)):
            return False
        if any(a[1] >= b[1] for a, b in zip(w, w[1:])):
            return False
        pretend = set(trace.pretended_at)
        if any(not M.get(y, x) for y, x in w if (y, x) not in pretend):
            return False
    return True
