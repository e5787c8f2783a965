"""Shift-systems, their forest encoding, and the structure/quasirandom split."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import (
    BadParameters,
    DisconnectedRepresentative,
    InternalInvariant,
    InvalidSystem,
    IterationLimit,
    LoopEdge,
    NotInjective,
    PreconditionViolated,
    ValueOutOfRange,
    VertexOutsideX,
)
from .perm import Permutation
from .quasirandom import (
    MapLike,
    PartialMap,
    ShiftWitness,
    _as_fraction,
    as_partial_map,
    is_quasirandom_map,
    is_quasirandom_set,
    l_delta,
    meets,
    restrict_permutation,
    shift_witness,
    verify_shift_witness,
)

Edge = tuple[int, int, int]  # (system index, upper vertex a, lower vertex b)


class UnionFind:
    def __init__(self, items: Iterable[int]):
        self.parent = {x: x for x in items}
        self.count = len(self.parent)

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.count -= 1
        return True


@dataclass
class ShiftGraph:
    """Simple graph on X whose edges join the paired positions of each shift."""

    vertices: tuple[int, ...]
    edges: list[Edge]  # first tag wins when several shifts share an edge
    adjacency: dict[int, list[tuple[int, Edge]]] = field(repr=False)

    @property
    def components(self) -> list[list[int]]:
        uf = UnionFind(self.vertices)
        for _, a, b in self.edges:
            uf.union(a, b)
        groups: dict[int, list[int]] = {}
        for v in self.vertices:
            groups.setdefault(uf.find(v), []).append(v)
        return sorted(groups.values(), key=lambda c: c[0])

    @property
    def component_count(self) -> int:
        uf = UnionFind(self.vertices)
        for _, a, b in self.edges:
            uf.union(a, b)
        return uf.count

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])


def build_shift_graph(X: Iterable[int], witnesses: Sequence[ShiftWitness]) -> ShiftGraph:
    verts = tuple(sorted(set(X)))
    vset = set(verts)
    adjacency: dict[int, list[tuple[int, Edge]]] = {v: [] for v in verts}
    seen: set[tuple[int, int]] = set()
    edges: list[Edge] = []
    for i, w in enumerate(witnesses):
        for b, a in w.pairs:
            if a == b:
                raise LoopEdge(f"pair ({b}, {a}) in shift {i} is a loop")
            if a not in vset or b not in vset:
                raise VertexOutsideX(f"pair ({b}, {a}) leaves the vertex set")
            key = (min(a, b), max(a, b))
            if key in seen:
                continue
            seen.add(key)
            e = (i, a, b)
            edges.append(e)
            adjacency[a].append((b, e))
            adjacency[b].append((a, e))
    for v in verts:
        adjacency[v].sort()
    return ShiftGraph(verts, edges, adjacency)


@dataclass(frozen=True)
class ShiftSystem:
    witnesses: tuple[ShiftWitness, ...]
    b: int

    @property
    def q(self) -> int:
        return len(self.witnesses)

    @property
    def deltas(self) -> tuple[int, ...]:
        return tuple(w.delta for w in self.witnesses)


def verify_shift_system(phi: MapLike, system: ShiftSystem) -> tuple[bool, int]:
    """(valid, component count) of the system's union graph over dom(phi)."""
    phi = as_partial_map(phi)
    if not all(verify_shift_witness(phi, w) for w in system.witnesses):
        return False, -1
    try:
        count = build_shift_graph(phi.domain, system.witnesses).component_count
    except (LoopEdge, VertexOutsideX):
        return False, -1
    return count <= system.b, count


def budget_ok(q: int, b: int, k: int) -> tuple[bool, float, float]:
    """Compare (b+q) log k + k (log q + 1) with 10 k log log k, natural logs."""
    if q < 1 or b < 1:
        raise BadParameters("q and b must be at least 1")
    lhs = (b + q) * math.log(k) + k * (math.log(q) + 1)
    rhs = 10 * k * math.log(math.log(k)) if k > 1 else -math.inf
    return lhs <= rhs, lhs, rhs


def _bits_for(count: int) -> int:
    """Bits to name one of ``count`` alternatives."""
    return (count - 1).bit_length() if count > 1 else 0


@dataclass(frozen=True)
class Encoding:
    """Data that pins down a structured map.

    ``forest_edges`` lists ``(i, a, b)`` meaning ``phi(a) = phi(b) + deltas[i]``;
    together they form a spanning forest of the system's union graph.
    ``representatives`` maps the minimum vertex of each component to its value.
    """

    k: int
    q: int
    b: int
    X: tuple[int, ...]
    deltas: tuple[int, ...]
    forest_edges: tuple[Edge, ...]
    representatives: dict[int, int]

    def forest_sides(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """Per shift, the sorted upper and lower endpoint sets of its forest edges."""
        out = []
        for i in range(self.q):
            es = [e for e in self.forest_edges if e[0] == i]
            out.append((tuple(sorted(a for _, a, _ in es)), tuple(sorted(b for _, _, b in es))))
        return out

    @property
    def bit_size(self) -> int:
        """Length of the packed form: see ``pack_encoding``."""
        return len(pack_encoding(self))


def encode_structured(phi: MapLike, system: ShiftSystem) -> Encoding:
    """Spanning forest (breadth-first from each component's minimum vertex) plus one value per component."""
    phi = as_partial_map(phi)
    ok, _ = verify_shift_system(phi, system)
    if not ok:
        raise InvalidSystem("shift-system does not verify against the map")
    graph = build_shift_graph(phi.domain, system.witnesses)
    values = phi.as_dict()
    seen: set[int] = set()
    forest: list[Edge] = []
    reps: dict[int, int] = {}
    for root in graph.vertices:
        if root in seen:
            continue
        seen.add(root)
        reps[root] = values[root]
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w, e in graph.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    forest.append(e)
                    queue.append(w)
    return Encoding(phi.k, system.q, system.b, graph.vertices, system.deltas,
                    tuple(forest), reps)


def decode_structured(enc: Encoding) -> PartialMap:
    """Rebuild the map by walking the forest outward from each representative."""
    adjacency: dict[int, list[tuple[int, int]]] = {v: [] for v in enc.X}
    for i, a, b in enc.forest_edges:
        if a not in adjacency or b not in adjacency:
            raise VertexOutsideX(f"forest edge ({a}, {b}) leaves X")
        d = enc.deltas[i]
        adjacency[b].append((a, d))   # a sits d above b
        adjacency[a].append((b, -d))
    values: dict[int, int] = {}
    for rep in sorted(enc.representatives):
        if rep in values:
            raise DisconnectedRepresentative(f"{rep} shares a component with another representative")
        values[rep] = enc.representatives[rep]
        queue = deque([rep])
        while queue:
            u = queue.popleft()
            for w, d in adjacency[u]:
                if w in values:
                    if values[w] != values[u] + d:
                        raise DisconnectedRepresentative(f"inconsistent value reaching {w}")
                    continue
                values[w] = values[u] + d
                queue.append(w)
    if set(values) != set(enc.X):
        raise DisconnectedRepresentative("some component has no representative")
    for x, v in values.items():
        if not 1 <= v <= enc.k:
            raise ValueOutOfRange(f"decoded value {v} at {x} outside 1..{enc.k}")
    if len(set(values.values())) != len(values):
        raise NotInjective("decoded map is not injective")
    return PartialMap.from_dict(enc.k, values)


# Packed layout (all fields fixed-width given k, which the reader knows):
#   X as a k-bit mask; q and b in bits_for(k+1) each;
#   per shift: delta (bits_for(k)), forest-edge count L (bits_for(|X|+1)),
#              then the upper and lower endpoint sets as ranks among the
#              C(|X|, L) subsets of X (combinatorial number system);
#   the representative values, one per component in increasing vertex order.
# Positional pairing of the two sorted endpoint sets recovers the edges.

def _subset_rank(items: Sequence[int], universe: Sequence[int]) -> int:
    index = {v: i for i, v in enumerate(universe)}
    return sum(math.comb(index[v], j + 1) for j, v in enumerate(sorted(items, key=index.get)))


def _subset_unrank(rank: int, size: int, universe: Sequence[int]) -> list[int]:
    out = []
    for j in range(size, 0, -1):
        c = j - 1
        while math.comb(c + 1, j) <= rank:
            c += 1
        rank -= math.comb(c, j)
        out.append(universe[c])
    return sorted(out)


def pack_encoding(enc: Encoding) -> str:
    k, X = enc.k, enc.X
    w_k, w_count, w_len = _bits_for(k), _bits_for(k + 1), _bits_for(len(X) + 1)
    parts = [''.join('1' if v in set(X) else '0' for v in range(1, k + 1))]
    parts.append(format(enc.q, f"0{w_count}b") if w_count else "")
    parts.append(format(enc.b, f"0{w_count}b") if w_count else "")
    for d, (A, B) in zip(enc.deltas, enc.forest_sides()):
        L = len(A)
        w_rank = _bits_for(math.comb(len(X), L))
        parts.append(format(d - 1, f"0{w_k}b") if w_k else "")
        parts.append(format(L, f"0{w_len}b") if w_len else "")
        for side in (A, B):
            parts.append(format(_subset_rank(side, X), f"0{w_rank}b") if w_rank else "")
    for rep in sorted(enc.representatives):
        parts.append(format(enc.representatives[rep] - 1, f"0{w_k}b") if w_k else "")
    return "".join(parts)


def unpack_encoding(bits: str, k: int) -> Encoding:
    pos = 0

    def take(width: int) -> int:
        nonlocal pos
        chunk = bits[pos:pos + width]
        pos += width
        return int(chunk, 2) if width else 0

    X = tuple(v for v in range(1, k + 1) if bits[v - 1] == "1")
    pos = k
    w_k, w_count, w_len = _bits_for(k), _bits_for(k + 1), _bits_for(len(X) + 1)
    q, b = take(w_count), take(w_count)
    deltas, edges = [], []
    for i in range(q):
        deltas.append(take(w_k) + 1)
        L = take(w_len)
        w_rank = _bits_for(math.comb(len(X), L))
        A = _subset_unrank(take(w_rank), L, X)
        B = _subset_unrank(take(w_rank), L, X)
        edges += [(i, a, bb) for a, bb in zip(A, B)]
    uf = UnionFind(X)
    for _, a, bb in edges:
        uf.union(a, bb)
    roots = sorted({uf.find(v) for v in X})
    reps = {r: take(w_k) + 1 for r in roots}
    if pos != len(bits):
        raise ValueError("trailing bits in encoding")
    return Encoding(k, q, b, X, tuple(deltas), tuple(edges), reps)


def encoding_bound(enc: Encoding) -> int:
    """(b + q) ceil(log2 k) + |X| (ceil(log2 q) + 2) + k."""
    lg = lambda v: math.ceil(math.log2(v)) if v > 1 else 0  # noqa: E731
    return (enc.b + enc.q) * lg(enc.k) + len(enc.X) * (lg(enc.q) + 2) + enc.k


def _ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def extract_structured_part(phi: MapLike, alpha, q: int) -> tuple[tuple[int, ...], ShiftSystem]:
    """Pull a structured piece out of a map that is not (alpha, q)-quasirandom.

    Takes the ``q`` smallest shifts reaching ``alpha*k``, cuts each witness to
    exactly ``ceil(alpha*k)`` pairs and keeps the largest nontrivial
    components of their union graph, at most ``ceil(|X| / (2q))`` of them.
    """
    phi = as_partial_map(phi)
    k = phi.k
    ok, bad = is_quasirandom_map(phi, alpha, q)
    if ok:
        raise PreconditionViolated("map is (alpha, q)-quasirandom; nothing to extract")
    a = _as_fraction(alpha)
    length = _ceil_frac(a * k)
    witnesses = [shift_witness(phi, d).truncated(length) for d in bad[:q]]
    graph = build_shift_graph(phi.domain, witnesses)
    comps = [c for c in graph.components if len(c) > 1]
    comps.sort(key=lambda c: (-len(c), c[0]))
    take = -(-len(phi.domain) // (2 * q))
    chosen = comps[:take]
    Y = tuple(sorted(v for c in chosen for v in c))
    keep = set(Y)
    system = ShiftSystem(tuple(w.restricted(keep) for w in witnesses), len(chosen))
    if 2 * len(Y) < a * k:
        raise InternalInvariant(f"|Y|={len(Y)} below alpha*k/2")
    if len(chosen) > k // q:
        raise InternalInvariant(f"{len(chosen)} components exceed k/q")
    if not verify_shift_system(phi.restrict(Y), system)[0]:
        raise InternalInvariant("extracted shift-system does not verify")
    return Y, system


@dataclass
class Iteration:
    case: int
    Y: tuple[int, ...]
    delta: Optional[int] = None
    components_before: Optional[int] = None
    components_after: Optional[int] = None

    def to_dict(self) -> dict:
        d = {"case": self.case, "Y": list(self.Y)}
        if self.delta is not None:
            d["delta"] = self.delta
        return d


@dataclass
class Decomposition:
    k: int
    alpha: Fraction
    q: int
    Q: tuple[int, ...]
    Z: tuple[int, ...]
    system: ShiftSystem
    iterations: list[Iteration]

    @property
    def q_final(self) -> int:
        return self.system.q

    @property
    def b_final(self) -> int:
        return self.system.b

    @property
    def budget(self) -> Optional[tuple[bool, float, float]]:
        if self.q_final < 1 or self.b_final < 1:
            return None
        return budget_ok(self.q_final, self.b_final, self.k)

    def encoding(self, pi: Permutation) -> Optional[Encoding]:
        if not self.Z:
            return None
        return encode_structured(restrict_permutation(pi, self.Z), self.system)

    def to_dict(self, pi: Optional[Permutation] = None) -> dict:
        budget = self.budget
        enc = self.encoding(pi) if pi is not None else None
        return {
            "Q": list(self.Q),
            "Z": list(self.Z),
            "iterations": [it.to_dict() for it in self.iterations],
            "q_final": self.q_final,
            "b_final": self.b_final,
            "budget": None if budget is None else
            {"lhs": budget[1], "rhs": budget[2], "ok": budget[0]},
            "encoding_bits": None if enc is None else enc.bit_size,
        }


def decompose(pi: Permutation, alpha=Fraction(1, 10), q: int = 5,
              max_iter: Optional[int] = None) -> Decomposition:
    """Split [k] into a quasirandom part Q and a structured part Z.

    Each round stops if the remaining set is (2*alpha, q)-quasirandom in
    ``pi``; otherwise it either extracts a structured piece of ``pi``
    restricted to the remaining set (when that restriction is not
    (alpha, q)-quasirandom) or peels off the upper endpoints of a long
    shift whose lower endpoints already left the remaining set.
    """
    a = _as_fraction(alpha)
    if not 0 < a <= Fraction(1, 2) or q < 1:
        raise BadParameters("need 0 < alpha <= 1/2 and q >= 1")
    k = pi.n
    if max_iter is None:
        max_iter = _ceil_frac(2 / a)
    X = set(range(1, k + 1))
    Z: list[int] = []
    witnesses: list[ShiftWitness] = []
    iterations: list[Iteration] = []
    increments = 0
    while True:
        done, bad_set = is_quasirandom_set(pi, X, 2 * a, q)
        if done:
            break
        if len(iterations) >= max_iter:
            raise IterationLimit(f"no quasirandom remainder after {max_iter} rounds")
        phi = restrict_permutation(pi, X)
        map_ok, _ = is_quasirandom_map(phi, a, q)
        if not map_ok:
            Y, sub = extract_structured_part(phi, a, q)
            witnesses.extend(sub.witnesses)
            increments += q
            iterations.append(Iteration(2, Y))
        else:
            delta = next((d for d in bad_set if not meets(l_delta(phi, d), a, k)), None)
            if delta is None:
                raise InternalInvariant("no usable shift for the peeling step")
            w = shift_witness(pi, delta, X).truncated(_ceil_frac(2 * a * k))
            new_pairs = tuple((b, up) for b, up in w.pairs if b not in X)
            Y = tuple(sorted(up for _, up in new_pairs))
            if not len(Y) > a * k:
                raise InternalInvariant(f"peeled |Y|={len(Y)} not above alpha*k")
            before = build_shift_graph(Z, witnesses).component_count
            witnesses.append(ShiftWitness(delta, new_pairs))
            after = build_shift_graph(Z + list(Y), witnesses).component_count
            if after != before:
                raise InternalInvariant("peeling step changed the component count")
            increments += 1
            iterations.append(Iteration(3, Y, delta, before, after))
        X -= set(Y)
        Z.extend(Y)
        Z.sort()

    Zt = tuple(Z)
    count = build_shift_graph(Zt, witnesses).component_count if Zt else 0
    system = ShiftSystem(tuple(witnesses), count)
    result = Decomposition(k, a, q, tuple(sorted(X)), Zt, system, iterations)
    _check_decomposition(pi, result, increments)
    return result


def _check_decomposition(pi: Permutation, d: Decomposition, increments: int) -> None:
    k = pi.n
    if set(d.Q) & set(d.Z) or set(d.Q) | set(d.Z) != set(range(1, k + 1)):
        raise InternalInvariant("Q and Z do not partition [k]")
    if not is_quasirandom_set(pi, d.Q, 2 * d.alpha, d.q)[0]:
        raise InternalInvariant("Q is not quasirandom")
    if d.Z and not verify_shift_system(restrict_permutation(pi, d.Z), d.system)[0]:
        raise InternalInvariant("accumulated shift-system does not verify on Z")
    if d.q_final > increments:
        raise InternalInvariant("q_final exceeds the per-case increments")
    for it in d.iterations:
        if it.case == 2 and 2 * len(it.Y) < d.alpha * k:
            raise InternalInvariant("extracted piece too small")
        if it.case == 3 and not len(it.Y) > d.alpha * k:
            raise InternalInvariant("peeled piece too small")
