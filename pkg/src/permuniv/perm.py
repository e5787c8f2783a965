"""Permutations, pattern containment and longest increasing subsequences."""

from __future__ import annotations

import itertools
import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .errors import DuplicateUniform, KTooLarge, NotABijection, PatternTooLong
from .rng import make_rng

UNIVERSALITY_CAP = 8


@dataclass(frozen=True)
class Permutation:
    """A bijection of {1..n} in one-line notation: ``values[i] == sigma(i+1)``."""

    values: tuple[int, ...]

    def __post_init__(self):
        n = len(self.values)
        seen = [False] * (n + 1)
        for v in self.values:
            if not isinstance(v, int) or v < 1 or v > n or seen[v]:
                raise NotABijection(f"not a permutation of 1..{n}: {list(self.values)}")
            seen[v] = True

    @property
    def n(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def __call__(self, i: int) -> int:
        """Value at 1-based position ``i``."""
        return self.values[i - 1]

    def __iter__(self) -> Iterator[int]:
        return iter(self.values)

    def __str__(self) -> str:
        return format_permutation(self)

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for pos, v in enumerate(self.values, start=1):
            inv[v - 1] = pos
        return Permutation(tuple(inv))

    def positions(self) -> list[int]:
        """``positions()[v]`` is the 1-based position of value ``v`` (index 0 unused)."""
        pos = [0] * (self.n + 1)
        for i, v in enumerate(self.values, start=1):
            pos[v] = i
        return pos


def make_permutation(values: Sequence[int]) -> Permutation:
    return Permutation(tuple(int(v) for v in values))


def identity(n: int) -> Permutation:
    return Permutation(tuple(range(1, n + 1)))


def reverse_identity(n: int) -> Permutation:
    return Permutation(tuple(range(n, 0, -1)))


def all_permutations(n: int) -> Iterator[Permutation]:
    for p in itertools.permutations(range(1, n + 1)):
        yield Permutation(p)


def format_permutation(sigma: Permutation) -> str:
    return ",".join(str(v) for v in sigma.values)


def parse_permutation(text: str) -> Permutation:
    text = text.strip()
    if not text:
        return Permutation(())
    # "2,5,3,1,4", "2 5 3 1 4", or compact "25314" when every value is one digit
    tokens = text.replace(",", " ").split()
    if len(tokens) == 1 and len(text) > 1 and text.isdigit():
        tokens = list(text)
    try:
        vals = [int(tok) for tok in tokens]
    except ValueError as exc:
        raise NotABijection(f"cannot parse permutation {text!r}") from exc
    return make_permutation(vals)


def _order_neighbours(pattern: Sequence[int]) -> tuple[list[int], list[int]]:
    # For each j, the earlier index whose value is the closest below / above pattern[j].
    below, above = [], []
    for j, v in enumerate(pattern):
        lo_i, hi_i = -1, -1
        for i in range(j):
            w = pattern[i]
            if w < v and (lo_i < 0 or w > pattern[lo_i]):
                lo_i = i
            elif w > v and (hi_i < 0 or w < pattern[hi_i]):
                hi_i = i
        below.append(lo_i)
        above.append(hi_i)
    return below, above


def contains_pattern(sigma: Permutation, pi: Permutation) -> Optional[tuple[int, ...]]:
    """Return the lexicographically least occurrence of ``pi`` in ``sigma``.

    The occurrence is given as 1-based positions ``x_1 < ... < x_k``;
    ``None`` means ``sigma`` avoids ``pi``.  Search is exhaustive
    backtracking over positions, pruned by the value window imposed by
    the already placed entries.
    """
    n, k = sigma.n, pi.n
    if k > n:
        raise PatternTooLong(f"pattern of length {k} cannot occur in length {n}")
    if k == 0:
        return ()
    s = sigma.values
    below, above = _order_neighbours(pi.values)
    chosen = [0] * k  # 0-based positions

    def place(j: int, start: int) -> bool:
        lo = s[chosen[below[j]]] if below[j] >= 0 else 0
        hi = s[chosen[above[j]]] if above[j] >= 0 else n + 1
        for x in range(start, n - (k - j) + 1):
            v = s[x]
            if lo < v < hi:
                chosen[j] = x
                if j + 1 == k or place(j + 1, x + 1):
                    return True
        return False

    if place(0, 0):
        return tuple(x + 1 for x in chosen)
    return None


def lis(seq: Sequence[int] | Permutation) -> int:
    """Length of the longest strictly increasing subsequence (patience sorting)."""
    tails: list[int] = []
    for v in seq:
        i = bisect_left(tails, v)
        if i == len(tails):
            tails.append(v)
        else:
            tails[i] = v
    return len(tails)


def lis_indices(seq: Sequence[int]) -> list[int]:
    """0-based indices of one longest strictly increasing subsequence.

    Among maximum-length subsequences this returns the one found by
    following predecessor links from the earliest-completed pile top, which
    favours small indices.
    """
    tails_val: list[int] = []
    tails_idx: list[int] = []
    prev = [-1] * len(seq)
    first_end: list[int] = []  # first index that reached each length
    for i, v in enumerate(seq):
        j = bisect_left(tails_val, v)
        prev[i] = tails_idx[j - 1] if j > 0 else -1
        if j == len(tails_val):
            tails_val.append(v)
            tails_idx.append(i)
            first_end.append(i)
        else:
            tails_val[j] = v
            tails_idx[j] = i
    if not tails_val:
        return []
    out = []
    i = first_end[-1]
    while i >= 0:
        out.append(i)
        i = prev[i]
    out.reverse()
    return out


def is_k_universal(
    sigma: Permutation, k: int, cap: int = UNIVERSALITY_CAP
) -> tuple[bool, list[Permutation]]:
    """Check whether ``sigma`` contains every pattern of length ``k``.

    Returns the verdict and the complete list of missing patterns.
    """
    if k > cap:
        raise KTooLarge(f"k={k} exceeds the enumeration cap {cap}")
    if k > sigma.n:
        raise PatternTooLong(f"k={k} exceeds permutation length {sigma.n}")
    missing = [pi for pi in all_permutations(k) if contains_pattern(sigma, pi) is None]
    return not missing, missing


def random_permutation(n: int, seed: int) -> Permutation:
    rng = make_rng(seed)
    return Permutation(tuple(int(v) + 1 for v in rng.permutation(n)))


def permutation_from_uniforms(u: Sequence[float]) -> Permutation:
    """The sigma with ``u[sigma(1)] < ... < u[sigma(n)]`` (1-based)."""
    if len(set(u)) != len(u):
        raise DuplicateUniform("uniform values must be distinct")
    order = sorted(range(len(u)), key=lambda i: u[i])
    return Permutation(tuple(i + 1 for i in order))


def min_length_lower_bound(k: int) -> int:
    """Smallest n with C(n, k) >= k!, by bisection on exact integers."""
    if k < 1:
        raise ValueError("k must be positive")
    target = math.factorial(k)
    lo, hi = k, max(k, k * k)
    while math.comb(hi, k) < target:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if math.comb(mid, k) >= target:
            hi = mid
        else:
            lo = mid + 1
    return lo
