"""Slow, obviously-correct reference implementations used only by the tests."""

from itertools import combinations

from permuniv.perm import Permutation


def order_type(values):
    s = sorted(values)
    return tuple(s.index(v) + 1 for v in values)


def brute_contains(sigma: Permutation, pi: Permutation) -> bool:
    target = tuple(pi.values)
    return any(order_type([sigma.values[i] for i in idx]) == target
               for idx in combinations(range(sigma.n), pi.n))


def brute_universal_count(n: int, k: int) -> int:
    from itertools import permutations
    patterns = set(permutations(range(1, k + 1)))
    count = 0
    for vals in permutations(range(1, n + 1)):
        seen = {order_type([vals[i] for i in idx]) for idx in combinations(range(n), k)}
        count += patterns <= seen
    return count


def brute_l_delta(phi: dict, delta: int, upper_in=None) -> int:
    """Longest list of pairs (b_i, a_i), both sides increasing, phi(a_i) = phi(b_i) + delta.

    Every subset B of the domain is tried as the lower side; the upper side
    is then forced, so this searches every pair-list.
    """
    where = {v: x for x, v in phi.items()}
    dom = sorted(phi)
    best = 0
    for size in range(1, len(dom) + 1):
        for B in combinations(dom, size):
            A = [where.get(phi[b] + delta) for b in B]
            if None in A:
                continue
            if upper_in is not None and any(a not in upper_in for a in A):
                continue
            if all(x < y for x, y in zip(A, A[1:])):
                best = max(best, size)
    return best


def brute_matrix_contains(M, pi: Permutation) -> bool:
    grid = M.to_lists()
    k = pi.n
    for rows in combinations(range(M.rows), k):
        for cols in combinations(range(M.cols), k):
            if all(grid[rows[pi.values[j] - 1]][cols[j]] for j in range(k)):
                return True
    return False


def brute_scan(M, pi: Permutation, t: int, cap=None):
    """List-based re-implementation of the greedy thread scan.

    Returns (success, witness, exposed).
    """
    grid = M.to_lists()
    col = 0
    witness, exposed = [], []
    for v in pi.values:
        y = v + t
        zeros = 0
        while True:
            if col >= M.cols:
                return False, None, exposed
            exposed.append((y, col + 1))
            if grid[y - 1][col] == 1:
                break
            zeros += 1
            if cap is not None and zeros == cap:
                break
            col += 1
        witness.append((y, col + 1))
        col += 1
    return True, witness, exposed


def no_long_run_probability(width: int, threshold: int) -> float:
    """Exact Pr(no run of more than ``threshold`` zeros) in ``width`` fair bits."""
    # state: current trailing zero run length
    dist = [1.0] + [0.0] * threshold
    for _ in range(width):
        new = [0.0] * (threshold + 1)
        new[0] = sum(dist) / 2
        for r in range(threshold):
            new[r + 1] += dist[r] / 2
        dist = new
    return sum(dist)


def brute_thread_window(M, pi: Permutation, t: int) -> bool:
    """Some columns c_1 < ... < c_k have M(pi(j) + t, c_j) = 1 for every j."""
    grid = M.to_lists()
    return any(all(grid[pi.values[j] + t - 1][c] for j, c in enumerate(cols))
               for cols in combinations(range(M.cols), pi.n))
