"""Independent brute-force oracles used to cross-check the library.

Nothing here may call into qchlab's algorithms: reachability is recomputed by
Warshall's method, complete futures by explicit maximal-chain enumeration, and
span dimensions by numpy rank computations on enumerated words.
"""

from __future__ import annotations

import itertools

import numpy as np


def warshall_reach(n: int, edges: list[tuple[int, int]]) -> list[list[bool]]:
    """Strict reachability (paths of length >= 1) as a boolean matrix."""
    reach = [[False] * n for _ in range(n)]
    for u, v in edges:
        reach[u][v] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                row_i, row_k = reach[i], reach[k]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    return reach


def maximal_chains_from(n: int, edges: list[tuple[int, int]], x: int) -> list[frozenset[int]]:
    """Vertex sets of all maximal chains starting at x.

    A chain walks any strict order relations; it is maximal when nothing can be
    appended after its last element and nothing inserted between consecutive
    elements.
    """
    reach = warshall_reach(n, edges)
    chains: list[frozenset[int]] = []

    def insertable(u: int, v: int) -> bool:
        return any(reach[u][w] and reach[w][v] for w in range(n))

    def walk(chain: list[int]) -> None:
        last = chain[-1]
        successors = [v for v in range(n) if reach[last][v]]
        if not successors:
            if all(
                not insertable(chain[i], chain[i + 1]) for i in range(len(chain) - 1)
            ):
                chains.append(frozenset(chain))
            return
        for v in successors:
            chain.append(v)
            walk(chain)
            chain.pop()

    walk([x])
    return chains


def oracle_complete_future(
    n: int, edges: list[tuple[int, int]], members: set[int], x: int
) -> bool:
    """True iff every maximal chain from x meets ``members`` strictly after x."""
    for chain in maximal_chains_from(n, edges, x):
        if not (chain - {x}) & members:
            return False
    return True


def enumerate_dags(n: int):
    """All DAGs on n labeled vertices, as edge lists.

    Every DAG assigns each unordered vertex pair one of: no edge, forward edge,
    backward edge; cyclic orientations are filtered out by Warshall closure.
    """
    pairs = list(itertools.combinations(range(n), 2))
    for assignment in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (u, v), kind in zip(pairs, assignment):
            if kind == 1:
                edges.append((u, v))
            elif kind == 2:
                edges.append((v, u))
        reach = warshall_reach(n, edges)
        if any(reach[i][i] for i in range(n)):
            continue
        yield edges


def word_span_dim(generators: list[np.ndarray], max_len: int) -> int:
    """Dimension of the span of all words of length <= max_len over the
    generators, tracked by numpy rank updates (independent of the package's
    Gram-Schmidt machinery)."""
    d = generators[0].shape[0]

    basis_vecs: list[np.ndarray] = []

    def try_add(m: np.ndarray) -> bool:
        v = m.reshape(d * d)
        if np.linalg.norm(v) < 1e-12:
            return False
        if basis_vecs:
            stack = np.stack(basis_vecs)
            coeffs, *_ = np.linalg.lstsq(stack.T, v, rcond=None)
            if np.linalg.norm(stack.T @ coeffs - v) < 1e-9 * max(1.0, np.linalg.norm(v)):
                return False
        basis_vecs.append(v)
        return True

    frontier = []
    for g in generators:
        if try_add(g):
            frontier.append(g)
    for _ in range(max_len - 1):
        new_frontier = []
        for w in frontier:
            for g in generators:
                prod = w @ g
                if try_add(prod):
                    new_frontier.append(prod)
        if not new_frontier:
            break
        frontier = new_frontier
    return len(basis_vecs)
