"""Shift statistics of permutations and partial maps.

For a map ``phi`` and a shift ``delta`` the partner map sends a position
``i`` to the position holding ``phi(i) + delta``.  The longest increasing
run of partner values is the longest ``delta``-shift: ordered position
lists ``b_1 < ... < b_L`` and ``a_1 < ... < a_L`` with
``phi(a_i) = phi(b_i) + delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

from .errors import DeltaOutOfRange, NoShift, NotInjective
from .perm import Permutation, lis, lis_indices


@dataclass(frozen=True)
class PartialMap:
    """An injection from a subset of {1..k} into {1..k}."""

    k: int
    domain: tuple[int, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.domain) != len(self.values):
            raise ValueError("domain and values differ in length")
        if any(b <= a for a, b in zip(self.domain, self.domain[1:])):
            raise ValueError("domain must be strictly increasing")
        if any(not 1 <= x <= self.k for x in self.domain + self.values):
            raise ValueError(f"entries must lie in 1..{self.k}")
        if len(set(self.values)) != len(self.values):
            raise NotInjective("values repeat")

    @classmethod
    def from_dict(cls, k: int, mapping: Mapping[int, int]) -> "PartialMap":
        dom = tuple(sorted(mapping))
        return cls(k, dom, tuple(mapping[x] for x in dom))

    @classmethod
    def from_permutation(cls, pi: Permutation) -> "PartialMap":
        return cls(pi.n, tuple(range(1, pi.n + 1)), pi.values)

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.domain, self.values))

    def __call__(self, x: int) -> int:
        return self.as_dict()[x]

    def __len__(self) -> int:
        return len(self.domain)

    def restrict(self, subset: Iterable[int]) -> "PartialMap":
        keep = set(subset)
        d = self.as_dict()
        missing = keep - d.keys()
        if missing:
            raise ValueError(f"{sorted(missing)} not in the domain")
        return PartialMap.from_dict(self.k, {x: d[x] for x in keep})

    def __str__(self) -> str:
        return format_partial_map(self)


def format_partial_map(phi: PartialMap) -> str:
    return ",".join(f"{x}:{v}" for x, v in zip(phi.domain, phi.values))


def parse_partial_map(text: str, k: int) -> PartialMap:
    mapping = {}
    for tok in filter(None, (t.strip() for t in text.split(","))):
        x, v = tok.split(":")
        if int(x) in mapping:
            raise ValueError(f"position {x} listed twice")
        mapping[int(x)] = int(v)
    return PartialMap.from_dict(k, mapping)


MapLike = Union[PartialMap, Permutation]


def as_partial_map(phi: MapLike) -> PartialMap:
    return PartialMap.from_permutation(phi) if isinstance(phi, Permutation) else phi


def restrict_permutation(pi: Permutation, subset: Iterable[int]) -> PartialMap:
    return PartialMap.from_permutation(pi).restrict(subset)


def _check_delta(delta: int, k: int) -> None:
    if not 1 <= delta <= k:
        raise DeltaOutOfRange(f"delta={delta} outside 1..{k}")


def shift_partner_map(phi: MapLike, delta: int) -> dict[int, int]:
    """Partial function i -> position of value phi(i) + delta, keys ascending."""
    phi = as_partial_map(phi)
    _check_delta(delta, phi.k)
    where = {v: x for x, v in zip(phi.domain, phi.values)}
    return {x: where[v + delta] for x, v in zip(phi.domain, phi.values) if v + delta in where}


def _partner_sequence(phi: PartialMap, delta: int, X: Optional[set[int]]) -> list[tuple[int, int]]:
    g = shift_partner_map(phi, delta)
    return [(b, a) for b, a in g.items() if X is None or a in X]


def l_delta(phi: MapLike, delta: int) -> int:
    """Length of the longest delta-shift inside ``phi``."""
    phi = as_partial_map(phi)
    return lis([a for _, a in _partner_sequence(phi, delta, None)])


def l_delta_restricted(pi: MapLike, X: Iterable[int], delta: int) -> int:
    """Longest delta-shift whose upper side lies in ``X`` (lower side unrestricted)."""
    phi = as_partial_map(pi)
    return lis([a for _, a in _partner_sequence(phi, delta, set(X))])


def all_l_delta(pi: Permutation) -> list[int]:
    """``[L_1, ..., L_k]`` for a full permutation, without the PartialMap detour."""
    k = pi.n
    pos = pi.positions()
    vals = pi.values
    out = []
    for delta in range(1, k + 1):
        top = k - delta
        out.append(lis([pos[v + delta] for v in vals if v <= top]))
    return out


def all_l_delta_restricted(pi: Permutation, X: Iterable[int]) -> list[int]:
    k = pi.n
    pos = pi.positions()
    inX = [False] * (k + 1)
    for x in X:
        inX[x] = True
    out = []
    for delta in range(1, k + 1):
        top = k - delta
        out.append(lis([a for v in pi.values if v <= top and inX[a := pos[v + delta]]]))
    return out


@dataclass(frozen=True)
class ShiftWitness:
    delta: int
    pairs: tuple[tuple[int, int], ...]  # (b, a) with phi(a) = phi(b) + delta

    @property
    def lower(self) -> tuple[int, ...]:
        return tuple(b for b, _ in self.pairs)

    @property
    def upper(self) -> tuple[int, ...]:
        return tuple(a for _, a in self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def truncated(self, length: int) -> "ShiftWitness":
        """Keep the first ``length`` pairs (any prefix is again a shift)."""
        return ShiftWitness(self.delta, self.pairs[:length])

    def restricted(self, keep: set[int]) -> "ShiftWitness":
        return ShiftWitness(self.delta, tuple(p for p in self.pairs if p[0] in keep and p[1] in keep))


def verify_shift_witness(phi: MapLike, w: ShiftWitness) -> bool:
    phi = as_partial_map(phi)
    d = phi.as_dict()
    for j, (b, a) in enumerate(w.pairs):
        if b not in d or a not in d or d[a] != d[b] + w.delta:
            return False
        if j and (w.pairs[j - 1][0] >= b or w.pairs[j - 1][1] >= a):
            return False
    return True


def shift_witness(phi: MapLike, delta: int, X: Optional[Iterable[int]] = None) -> ShiftWitness:
    """A longest delta-shift (upper side in ``X`` when given)."""
    phi = as_partial_map(phi)
    seq = _partner_sequence(phi, delta, None if X is None else set(X))
    idx = lis_indices([a for _, a in seq])
    if not idx:
        raise NoShift(f"no {delta}-shift")
    return ShiftWitness(delta, tuple(seq[i] for i in idx))


def _as_fraction(alpha) -> Fraction:
    if isinstance(alpha, float):
        return Fraction(repr(alpha))
    return Fraction(alpha)


def meets(L: int, alpha, k: int) -> bool:
    """Exact test of ``L >= alpha * k``."""
    return L >= _as_fraction(alpha) * k


def is_quasirandom_set(pi: MapLike, X: Iterable[int], alpha, q: int) -> tuple[bool, list[int]]:
    """(verdict, bad shifts): fewer than ``q`` shifts reach ``alpha*k`` with upper side in X."""
    X = set(X)
    phi = as_partial_map(pi)
    if not X:
        return True, []
    if isinstance(pi, Permutation):
        ls = all_l_delta_restricted(pi, X)
    else:
        ls = [l_delta_restricted(phi, X, d) for d in range(1, phi.k + 1)]
    bad = [d for d, L in enumerate(ls, start=1) if meets(L, alpha, phi.k)]
    return len(bad) < q, bad


def is_quasirandom_map(phi: MapLike, alpha, q: int) -> tuple[bool, list[int]]:
    """(verdict, bad shifts): fewer than ``q`` shifts of ``phi`` itself reach ``alpha*k``."""
    if isinstance(phi, Permutation):
        ls = all_l_delta(phi)
        k = phi.n
    else:
        if not phi.domain:
            return True, []
        k = phi.k
        ls = [l_delta(phi, d) for d in range(1, k + 1)]
    bad = [d for d, L in enumerate(ls, start=1) if meets(L, alpha, k)]
    return len(bad) < q, bad


def max_l_delta(pi: Permutation) -> tuple[int, int]:
    """(max L, smallest delta attaining it); (0, 0) for k <= 1."""
    ls = all_l_delta(pi)
    if not ls:
        return 0, 0
    best = max(ls)
    return best, ls.index(best) + 1


def in_Q_k(pi: Permutation) -> bool:
    """All shifts satisfy L^2 <= 9k (integer form of L <= 3 sqrt k)."""
    return all(L * L <= 9 * pi.n for L in all_l_delta(pi))


@dataclass(frozen=True)
class LBound:
    k: int
    L: int
    log_exact: float       # log(k * C(k, L) / L!)
    log_simplified: float  # log(k * (e^2 k / L^2)^L)

    @property
    def exact(self) -> float:
        return math.exp(self.log_exact) if self.log_exact < 700 else math.inf

    @property
    def simplified(self) -> float:
        return math.exp(self.log_simplified) if self.log_simplified < 700 else math.inf


def random_L_bound(k: int, L: int) -> LBound:
    """Union bound on Pr(max_delta L_delta >= L) for a uniform permutation of length k."""
    if not 1 <= L <= k:
        raise ValueError("need 1 <= L <= k")
    log_exact = math.log(k) + math.log(math.comb(k, L)) - math.lgamma(L + 1)
    log_simpl = math.log(k) + L * (2 + math.log(k) - 2 * math.log(L))
    return LBound(k, L, log_exact, log_simpl)


def ldelta_rows(pi: Permutation) -> list[dict]:
    """Long-format survey rows: one per delta, with the permutation's maximum."""
    ls = all_l_delta(pi)
    top = max(ls, default=0)
    return [{"k": pi.n, "delta": d, "L_delta": L, "max_L": top} for d, L in enumerate(ls, start=1)]
