"""Directed graphs with per-vertex dimensions and their causal-order combinatorics.

A graph is a finite set of (vertex id, dimension) pairs plus identified directed
edges, at most one per ordered vertex pair.  ``x`` precedes ``y`` when a directed
path of length >= 1 leads from ``x`` to ``y``; unrelated distinct vertices are
spacelike.  Completeness checks ("does this antichain block every maximal
future-directed path?") are defined on acyclic graphs only and walk maximal
chains of the causal order, i.e. paths along the transitive reduction that end
at sinks; the starting vertex itself does not count as an intersection.

All functions are pure; graphs are immutable and cache their derived
combinatorics internally, so repeated queries are cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import (
    CyclicGraphError,
    DimensionError,
    InputFormatError,
    NotAcausalError,
    PathBudgetError,
    UnknownVertexError,
)

PRECEDES = "precedes"
SUCCEEDS = "succeeds"
SPACELIKE = "spacelike"
EQUAL = "equal"

PATH_BUDGET = 10**6


@dataclass(frozen=True)
class CausalGraph:
    """Finite directed graph; ``vertices`` is an ordered (id, dim) tuple and
    ``edges`` an (edge_id, source, target) tuple."""

    vertices: tuple[tuple[str, int], ...]
    edges: tuple[tuple[str, str, str], ...]

    def __post_init__(self):
        ids = [v for v, _ in self.vertices]
        if len(set(ids)) != len(ids):
            raise InputFormatError("duplicate vertex ids")
        for v, d in self.vertices:
            if d < 1:
                raise DimensionError(f"vertex {v!r} has non-positive dimension {d}")
        known = set(ids)
        eids = [e for e, _, _ in self.edges]
        if len(set(eids)) != len(eids):
            raise InputFormatError("duplicate edge ids")
        seen_pairs = set()
        for e, s, t in self.edges:
            if s not in known:
                raise UnknownVertexError(f"edge {e!r} has unknown source {s!r}")
            if t not in known:
                raise UnknownVertexError(f"edge {e!r} has unknown target {t!r}")
            if (s, t) in seen_pairs:
                raise InputFormatError(f"more than one edge for ordered pair ({s!r}, {t!r})")
            seen_pairs.add((s, t))

    # -- basic accessors ----------------------------------------------------

    @cached_property
    def _index(self) -> dict[str, int]:
        return {v: i for i, (v, _) in enumerate(self.vertices)}

    @property
    def vertex_ids(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.vertices)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    def dim(self, vertex: str) -> int:
        return self.vertices[self._idx(vertex)][1]

    def dims(self, vertex_ids: Iterable[str]) -> list[tuple[str, int]]:
        """Sorted (id, dim) pairs — the tensor factor order used everywhere."""
        return [(v, self.dim(v)) for v in sorted(vertex_ids)]

    def total_dim(self) -> int:
        return sum(d for _, d in self.vertices)

    def has_edge(self, source: str, target: str) -> bool:
        return (source, target) in self._edge_by_pair

    def edge_id(self, source: str, target: str) -> str | None:
        return self._edge_by_pair.get((source, target))

    def edge_endpoints(self, edge_id: str) -> tuple[str, str]:
        for e, s, t in self.edges:
            if e == edge_id:
                return s, t
        raise InputFormatError(f"unknown edge id {edge_id!r}")

    def _idx(self, vertex: str) -> int:
        try:
            return self._index[vertex]
        except KeyError:
            raise UnknownVertexError(f"unknown vertex {vertex!r}") from None

    @cached_property
    def _edge_by_pair(self) -> dict[tuple[str, str], str]:
        return {(s, t): e for e, s, t in self.edges}

    @cached_property
    def _succ(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.vertices]
        for _, s, t in self.edges:
            out[self._index[s]].append(self._index[t])
        return tuple(tuple(sorted(set(a))) for a in out)

    @cached_property
    def _pred(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.vertices]
        for _, s, t in self.edges:
            out[self._index[t]].append(self._index[s])
        return tuple(tuple(sorted(set(a))) for a in out)

    @cached_property
    def _reach(self) -> tuple[int, ...]:
        """Strict forward reachability bitmasks (paths of length >= 1)."""
        n = self.num_vertices
        masks = [0] * n
        for start in range(n):
            seen = 0
            stack = list(self._succ[start])
            while stack:
                v = stack.pop()
                bit = 1 << v
                if seen & bit:
                    continue
                seen |= bit
                stack.extend(self._succ[v])
            masks[start] = seen
        return tuple(masks)

    @cached_property
    def _reach_rev(self) -> tuple[int, ...]:
        """Strict backward reachability bitmasks."""
        n = self.num_vertices
        masks = [0] * n
        for j in range(n):
            for i in range(n):
                if (self._reach[i] >> j) & 1:
                    masks[j] |= 1 << i
        return tuple(masks)

    @cached_property
    def is_acyclic(self) -> bool:
        return all(not (self._reach[i] >> i) & 1 for i in range(self.num_vertices))

    def _require_dag(self, operation: str) -> None:
        if not self.is_acyclic:
            raise CyclicGraphError(f"{operation} requires an acyclic graph")

    @cached_property
    def _covering_succ(self) -> tuple[tuple[int, ...], ...]:
        """Successors along the transitive reduction (DAG only): edge (u, v) is
        kept unless some strict path u -> w -> v of length >= 2 exists."""
        self._require_dag("transitive reduction")
        n = self.num_vertices
        out: list[list[int]] = [[] for _ in range(n)]
        for _, s, t in self.edges:
            u, v = self._index[s], self._index[t]
            redundant = False
            mid = self._reach[u] & ~(1 << v)
            w = 0
            while mid:
                if mid & 1 and (self._reach[w] >> v) & 1:
                    redundant = True
                    break
                mid >>= 1
                w += 1
            if not redundant:
                out[u].append(v)
        return tuple(tuple(sorted(set(a))) for a in out)

    @cached_property
    def _future_tail_masks(self) -> tuple[tuple[int, ...], ...]:
        return self._tail_masks(self._covering_succ)

    @cached_property
    def _past_tail_masks(self) -> tuple[tuple[int, ...], ...]:
        cov_pred: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for u, succs in enumerate(self._covering_succ):
            for v in succs:
                cov_pred[v].append(u)
        return self._tail_masks(tuple(tuple(sorted(a)) for a in cov_pred))

    def _tail_masks(self, adjacency: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
        """For each vertex: vertex-set bitmasks of the maximal chains leaving it,
        with the start vertex excluded.  Duplicate masks are collapsed."""
        n = self.num_vertices
        full: list[tuple[int, ...] | None] = [None] * n
        budget = PATH_BUDGET

        def masks_from(v: int) -> tuple[int, ...]:
            nonlocal budget
            if full[v] is not None:
                return full[v]
            bit = 1 << v
            if not adjacency[v]:
                result: tuple[int, ...] = (bit,)
            else:
                acc = set()
                for s in adjacency[v]:
                    for m in masks_from(s):
                        acc.add(bit | m)
                budget -= len(acc)
                if budget < 0:
                    raise PathBudgetError(
                        f"more than {PATH_BUDGET} maximal paths enumerated"
                    )
                result = tuple(sorted(acc))
            full[v] = result
            return result

        tails: list[tuple[int, ...]] = []
        for v in range(n):
            if not adjacency[v]:
                tails.append((0,))
            else:
                acc = set()
                for s in adjacency[v]:
                    acc.update(masks_from(s))
                tails.append(tuple(sorted(acc)))
        return tuple(tails)

    def _member_mask(self, members: Iterable[str]) -> int:
        mask = 0
        for v in members:
            mask |= 1 << self._idx(v)
        return mask


@dataclass(frozen=True)
class AcausalSet:
    """Nonempty set of pairwise spacelike vertices, validated on construction."""

    members: tuple[str, ...]  # sorted

    @staticmethod
    def of(graph: CausalGraph, members: Iterable[str]) -> "AcausalSet":
        ids = sorted(set(members))
        if not ids:
            raise NotAcausalError("acausal set must be nonempty")
        if not is_acausal(graph, ids):
            raise NotAcausalError(f"set {ids!r} contains causally related vertices")
        return AcausalSet(members=tuple(ids))

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)


def causal_relation(graph: CausalGraph, x: str, y: str) -> str:
    """One of 'precedes', 'succeeds', 'spacelike', 'equal'.  On cyclic graphs a
    vertex pair on a common cycle precedes in both query orders."""
    i, j = graph._idx(x), graph._idx(y)
    if i == j:
        return EQUAL
    if (graph._reach[i] >> j) & 1:
        return PRECEDES
    if (graph._reach[j] >> i) & 1:
        return SUCCEEDS
    return SPACELIKE


def is_acausal(graph: CausalGraph, members: Iterable[str]) -> bool:
    ids = sorted(set(members))
    if not ids:
        raise NotAcausalError("acausal set must be nonempty")
    idx = [graph._idx(v) for v in ids]
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            i, j = idx[a], idx[b]
            if (graph._reach[i] >> j) & 1 or (graph._reach[j] >> i) & 1:
                return False
    return True


def _as_member_ids(s: AcausalSet | Iterable[str]) -> list[str]:
    if isinstance(s, AcausalSet):
        return list(s.members)
    return sorted(set(s))


def is_complete_future(graph: CausalGraph, s: AcausalSet | Iterable[str], x: str) -> bool:
    """True iff every maximal future-directed chain from ``x`` meets ``s``
    strictly after ``x``.  Requires a DAG and an acausal ``s``."""
    graph._require_dag("complete-future check")
    members = _as_member_ids(s)
    if not is_acausal(graph, members):
        raise NotAcausalError(f"set {members!r} is not acausal")
    i = graph._idx(x)
    s_mask = graph._member_mask(members)
    return all(s_mask & tail for tail in graph._future_tail_masks[i])


def is_complete_past(graph: CausalGraph, s: AcausalSet | Iterable[str], x: str) -> bool:
    """Mirror of :func:`is_complete_future` along past-directed chains."""
    graph._require_dag("complete-past check")
    members = _as_member_ids(s)
    if not is_acausal(graph, members):
        raise NotAcausalError(f"set {members!r} is not acausal")
    i = graph._idx(x)
    s_mask = graph._member_mask(members)
    return all(s_mask & tail for tail in graph._past_tail_masks[i])


def is_complete_pair(
    graph: CausalGraph,
    xi: AcausalSet | Iterable[str],
    zeta: AcausalSet | Iterable[str],
) -> bool:
    """True iff ``xi`` is a complete past of every member of ``zeta`` and
    ``zeta`` a complete future of every member of ``xi``."""
    xi_ids = _as_member_ids(xi)
    zeta_ids = _as_member_ids(zeta)
    return all(is_complete_future(graph, zeta_ids, x) for x in xi_ids) and all(
        is_complete_past(graph, xi_ids, y) for y in zeta_ids
    )


def interval(graph: CausalGraph, x: str, y: str) -> set[str]:
    """The order interval {z : x <= z <= y} including endpoints; empty when x, y
    are unrelated.  Doubles as the local-finiteness witness (always finite)."""
    i, j = graph._idx(x), graph._idx(y)
    if i == j:
        return {x}
    if not (graph._reach[i] >> j) & 1:
        return set()
    between = graph._reach[i] & graph._reach_rev[j]
    out = {x, y}
    for k in range(graph.num_vertices):
        if (between >> k) & 1:
            out.add(graph.vertex_ids[k])
    return out


def detect_ctc(graph: CausalGraph) -> list[list[str]]:
    """All elementary directed cycles (closed timelike curves), canonicalized so
    the lexicographically smallest vertex starts each cycle; empty for DAGs."""
    n = graph.num_vertices
    order = sorted(range(n), key=lambda i: graph.vertex_ids[i])
    rank = {v: r for r, v in enumerate(order)}
    cycles: list[list[str]] = []
    budget = PATH_BUDGET

    def walk(start: int, v: int, path: list[int], on_path: set[int]) -> None:
        nonlocal budget
        for w in sorted(graph._succ[v], key=lambda i: graph.vertex_ids[i]):
            budget -= 1
            if budget < 0:
                raise PathBudgetError(f"cycle enumeration exceeded {PATH_BUDGET} steps")
            if w == start:
                cycles.append([graph.vertex_ids[u] for u in path])
            elif rank[w] > rank[start] and w not in on_path:
                path.append(w)
                on_path.add(w)
                walk(start, w, path, on_path)
                on_path.discard(w)
                path.pop()

    for start in order:
        walk(start, start, [start], {start})
    cycles.sort(key=lambda c: (len(c), c))
    return cycles


def reverse(graph: CausalGraph) -> CausalGraph:
    """Edge-reversed copy (same ids and dimensions)."""
    return CausalGraph(
        vertices=graph.vertices,
        edges=tuple((e, t, s) for e, s, t in graph.edges),
    )


def maximal_future_paths(graph: CausalGraph, x: str) -> list[tuple[str, ...]]:
    """Explicit maximal future-directed chains from ``x`` (start included),
    enumerated along the transitive reduction.  Intended for small graphs and
    diagnostics; completeness checks use the cached bitmask route."""
    graph._require_dag("path enumeration")
    i = graph._idx(x)
    budget = PATH_BUDGET
    out: list[tuple[str, ...]] = []

    def walk(v: int, path: list[int]) -> None:
        nonlocal budget
        budget -= 1
        if budget < 0:
            raise PathBudgetError(f"more than {PATH_BUDGET} maximal paths enumerated")
        succs = graph._covering_succ[v]
        if not succs:
            out.append(tuple(graph.vertex_ids[u] for u in path))
            return
        for s in succs:
            path.append(s)
            walk(s, path)
            path.pop()

    walk(i, [i])
    out.sort()
    return out


# ---------------------------------------------------------------------------
# JSON wire format.
# ---------------------------------------------------------------------------


def graph_to_json(graph: CausalGraph) -> dict:
    return {
        "vertices": [{"id": v, "dim": int(d)} for v, d in graph.vertices],
        "edges": [
            {"id": e, "source": s, "target": t} for e, s, t in graph.edges
        ],
    }


def graph_from_json(obj: dict) -> CausalGraph:
    try:
        vertices = tuple((str(v["id"]), int(v["dim"])) for v in obj["vertices"])
        edges = tuple(
            (str(e["id"]), str(e["source"]), str(e["target"]))
            for e in obj.get("edges", [])
        )
    except (KeyError, TypeError) as exc:
        raise InputFormatError(f"malformed graph object: {exc}") from exc
    return CausalGraph(vertices=vertices, edges=edges)


def tensor_dim(graph: CausalGraph, members: Iterable[str]) -> int:
    return math.prod(d for _, d in graph.dims(members))
