"""Quantum-causal-history instances and numerical verification of their axioms.

An instance bundles an acyclic graph, one quantum operation per edge, declared
complete pairs (each carrying the unitary that evolves the joint system across
the pair), and optionally explicitly supplied future homomorphisms.  The three
axiom checkers — extension, spacelike commutativity, composition — verify the
declared structure numerically and report per-check residuals; they never
solve for missing maps.

Conventions: multi-vertex spaces are tensor products ordered by ascending
vertex id.  Map equality is always measured as Frobenius distance between Choi
matrices.  Reductions use ``channel`` mode (dropped input factors filled with
1/d), which is the normalization that keeps quantum operations trace
preserving; the dual statements of the extension axiom are checked in this
equivalent form (dualizing both sides preserves Choi distances exactly).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import causal, channel as ch, matkernel as mk
from .causal import CausalGraph
from .channel import KrausChannel, Superoperator
from .errors import (
    CyclicGraphError,
    DimensionError,
    InputFormatError,
    InvalidInstanceError,
    MissingEdgeError,
    NotAcausalError,
    NotUnitaryError,
    PathBudgetError,
    UnknownVertexError,
)
from .report import DEFAULT_TOLERANCES, Report, Tolerances

EXHAUSTIVE_VERTEX_LIMIT = 12


@dataclass(frozen=True)
class CompletePair:
    """An antichain pair xi ⪯ zeta with the unitary carrying H(xi) to H(zeta)."""

    xi: tuple[str, ...]
    zeta: tuple[str, ...]
    unitary: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", tuple(sorted(set(self.xi))))
        object.__setattr__(self, "zeta", tuple(sorted(set(self.zeta))))

    def label(self) -> str:
        return "{%s}=>{%s}" % (",".join(self.xi), ",".join(self.zeta))


@dataclass(frozen=True)
class DeclaredFuture:
    """An explicitly supplied homomorphism into the algebra of a complete future."""

    vertex: str
    zeta: tuple[str, ...]
    phi_f: KrausChannel

    def __post_init__(self):
        object.__setattr__(self, "zeta", tuple(sorted(set(self.zeta))))


@dataclass(frozen=True)
class QCHInstance:
    """Graph + edge channels + complete pairs.  Construction checks only
    structural coherence; semantic requirements live in :func:`validate_qch`."""

    graph: CausalGraph
    edge_maps: Mapping[str, KrausChannel]
    complete_pairs: tuple[CompletePair, ...] = ()
    declared_futures: tuple[DeclaredFuture, ...] = ()

    def __post_init__(self):
        known_edges = {e for e, _, _ in self.graph.edges}
        for eid in self.edge_maps:
            if eid not in known_edges:
                raise InputFormatError(f"edge map for unknown edge {eid!r}")
        missing = sorted(known_edges - set(self.edge_maps))
        if missing:
            raise InputFormatError(f"edges without maps: {missing!r}")
        for pair in self.complete_pairs:
            for v in pair.xi + pair.zeta:
                self.graph.dim(v)  # raises UnknownVertexError
        for df in self.declared_futures:
            self.graph.dim(df.vertex)
            for v in df.zeta:
                self.graph.dim(v)

    def edge_map_between(self, x: str, y: str) -> KrausChannel | None:
        eid = self.graph.edge_id(x, y)
        return None if eid is None else self.edge_maps[eid]


def tensor_dim(graph: CausalGraph, members: Iterable[str]) -> int:
    return math.prod(d for _, d in graph.dims(members))


# ---------------------------------------------------------------------------
# Pair-derived maps.
# ---------------------------------------------------------------------------


def _check_pair_unitary(q: QCHInstance, pair: CompletePair, tol: float = 1e-10) -> float:
    u = mk.as_matrix(pair.unitary)
    d_xi = tensor_dim(q.graph, pair.xi)
    d_zeta = tensor_dim(q.graph, pair.zeta)
    if u.shape != (d_zeta, d_xi):
        raise DimensionError(
            f"pair {pair.label()} unitary shape {u.shape} does not match "
            f"dims {d_xi}->{d_zeta}"
        )
    if d_xi != d_zeta:
        raise DimensionError(
            f"pair {pair.label()} joins spaces of different dimension "
            f"({d_xi} vs {d_zeta})"
        )
    return mk.frobenius_norm(mk.adjoint(u) @ u - mk.identity(d_xi))


def pair_channel(q: QCHInstance, pair: CompletePair) -> KrausChannel:
    """The unitary map of a complete pair as a single-Kraus channel."""
    if _check_pair_unitary(q, pair) >= 1e-10:
        raise NotUnitaryError(f"pair {pair.label()} does not carry a unitary")
    return ch.make_channel([mk.as_matrix(pair.unitary)])


def _future_channel(q: QCHInstance, pair: CompletePair, x: str) -> KrausChannel:
    """Phi_F(x, zeta): rho -> U iota_x(rho) U†, a unital *-homomorphism."""
    xi_facs = q.graph.dims(pair.xi)
    u = mk.as_matrix(pair.unitary)
    isos = ch.embedding_isometries(xi_facs, {x})
    return KrausChannel(
        in_dim=q.graph.dim(x),
        out_dim=tensor_dim(q.graph, pair.zeta),
        kraus=tuple(u @ v for v in isos),
    )


def _past_channel(q: QCHInstance, pair: CompletePair, y: str) -> KrausChannel:
    """Phi_P(xi, y): rho -> Tr_{zeta minus y}( U rho U† ), trace preserving."""
    zeta_facs = q.graph.dims(pair.zeta)
    u = mk.as_matrix(pair.unitary)
    isos = ch.embedding_isometries(zeta_facs, {y})
    return KrausChannel(
        in_dim=tensor_dim(q.graph, pair.xi),
        out_dim=q.graph.dim(y),
        kraus=tuple(mk.adjoint(v) @ u for v in isos),
    )


@dataclass
class PairMaps:
    future: dict[str, KrausChannel]
    past: dict[str, KrausChannel]


def synthesize_pair_maps(q: QCHInstance, pair_index: int) -> PairMaps:
    """Phi_F(x, zeta) for every x in xi and Phi_P(xi, y) for every y in zeta,
    derived from the pair's unitary.  Raises E_NOT_UNITARY on a bad unitary."""
    pair = q.complete_pairs[pair_index]
    defect = _check_pair_unitary(q, pair)
    if defect >= 1e-10:
        raise NotUnitaryError(
            f"pair {pair.label()}: ||U†U - I|| = {defect:.3e} exceeds 1e-10"
        )
    return PairMaps(
        future={x: _future_channel(q, pair, x) for x in pair.xi},
        past={y: _past_channel(q, pair, y) for y in pair.zeta},
    )


# ---------------------------------------------------------------------------
# Star-homomorphism test.
# ---------------------------------------------------------------------------


def _map_images(psi: KrausChannel | Superoperator, dim: int) -> list[list[np.ndarray]]:
    if isinstance(psi, KrausChannel):
        if psi.in_dim != dim:
            raise DimensionError(f"map input dim {psi.in_dim} != domain dim {dim}")
        return [
            [ch.apply(psi, mk.matrix_unit(dim, i, j)) for j in range(dim)]
            for i in range(dim)
        ]
    if psi.in_dim != dim:
        raise DimensionError(f"map input dim {psi.in_dim} != domain dim {dim}")
    c4 = psi.choi.reshape(dim, psi.out_dim, dim, psi.out_dim)
    return [[np.array(c4[i, :, j, :]) for j in range(dim)] for i in range(dim)]


def star_homomorphism_residual(psi: KrausChannel | Superoperator, dim: int) -> float:
    """Worst violation of multiplicativity Psi(E_ij)Psi(E_kl) = delta_jk Psi(E_il)
    and adjoint preservation Psi(E_ij)† = Psi(E_ji) over all matrix units."""
    images = _map_images(psi, dim)
    worst = 0.0
    for i in range(dim):
        for j in range(dim):
            worst = max(
                worst,
                mk.frobenius_norm(mk.adjoint(images[i][j]) - images[j][i]),
            )
            for k in range(dim):
                for l in range(dim):
                    expected = images[i][l] if j == k else 0.0
                    worst = max(
                        worst,
                        mk.frobenius_norm(images[i][j] @ images[k][l] - expected),
                    )
    return worst


def is_star_homomorphism(
    psi: KrausChannel | Superoperator, dim: int, tol: float = 1e-8
) -> bool:
    return star_homomorphism_residual(psi, dim) < tol


# ---------------------------------------------------------------------------
# Instance validation.
# ---------------------------------------------------------------------------


def validate_qch(q: QCHInstance, tols: Tolerances = DEFAULT_TOLERANCES) -> Report:
    """Framework conditions per edge (domain/range dims, CP, TP) and per pair
    (acausality, completeness, unitarity); E_CTC on cyclic graphs."""
    if not q.graph.is_acyclic:
        raise CyclicGraphError(
            f"instance graph has closed timelike curves: {causal.detect_ctc(q.graph)}"
        )
    report = Report(title="validate")
    for eid, s, t in q.graph.edges:
        phi = q.edge_maps[eid]
        dims_ok = phi.in_dim == q.graph.dim(s) and phi.out_dim == q.graph.dim(t)
        report.add_bool(f"edge:{eid}:dims", dims_ok, code=None if dims_ok else "E_DOMAIN")
        if not dims_ok:
            continue
        report.add(f"edge:{eid}:cp", ch.cp_residual(phi), tols.psd)
        report.add(f"edge:{eid}:tp", ch.tp_residual(phi), tols.eq)
    for idx, pair in enumerate(q.complete_pairs):
        label = f"pair{idx}:{pair.label()}"
        try:
            xi_ok = causal.is_acausal(q.graph, pair.xi)
            zeta_ok = causal.is_acausal(q.graph, pair.zeta)
        except UnknownVertexError:
            report.add_bool(f"{label}:vertices", False, code="E_VERTEX")
            continue
        report.add_bool(f"{label}:acausal", xi_ok and zeta_ok, code=None if xi_ok and zeta_ok else "E_NOT_ACAUSAL")
        if not (xi_ok and zeta_ok):
            continue
        complete = causal.is_complete_pair(q.graph, pair.xi, pair.zeta)
        report.add_bool(f"{label}:complete", complete)
        try:
            defect = _check_pair_unitary(q, pair)
        except DimensionError:
            report.add_bool(f"{label}:unitary-dims", False, code="E_DIM")
            continue
        report.add(f"{label}:unitary", defect, tols.eq, code=None if defect <= tols.eq else "E_NOT_UNITARY")
    for k, df in enumerate(q.declared_futures):
        label = f"future{k}:{df.vertex}->{{{','.join(df.zeta)}}}"
        zeta_ok = causal.is_acausal(q.graph, df.zeta)
        report.add_bool(f"{label}:acausal", zeta_ok, code=None if zeta_ok else "E_NOT_ACAUSAL")
        if not zeta_ok:
            continue
        report.add_bool(
            f"{label}:complete",
            causal.is_complete_future(q.graph, df.zeta, df.vertex),
        )
        dims_ok = df.phi_f.in_dim == q.graph.dim(df.vertex) and df.phi_f.out_dim == tensor_dim(
            q.graph, df.zeta
        )
        report.add_bool(f"{label}:dims", dims_ok, code=None if dims_ok else "E_DIM")
    return report


def _require_valid(q: QCHInstance, tols: Tolerances) -> None:
    rep = validate_qch(q, tols)
    if not rep.passed:
        names = ", ".join(c.name for c in rep.failures())
        raise InvalidInstanceError(f"instance fails validation: {names}")


# ---------------------------------------------------------------------------
# Resolution of future/past maps available for axiom checks.
# ---------------------------------------------------------------------------


@dataclass
class _FutureEntry:
    vertex: str
    zeta: tuple[str, ...]
    phi_f: KrausChannel  # homomorphism form (unital embedding fill)
    phi_f_channel: KrausChannel  # trace-preserving form (1/d-normalized fill)
    source: str


def _normalize_hom(phi: KrausChannel) -> KrausChannel:
    """Scale a unital homomorphism into a larger algebra down to its
    trace-preserving (channel-mode) form; composition (axiom iii) composes
    this with the past quantum operation."""
    if phi.in_dim == phi.out_dim:
        return phi
    scale = math.sqrt(phi.in_dim / phi.out_dim)
    return KrausChannel(
        in_dim=phi.in_dim,
        out_dim=phi.out_dim,
        kraus=tuple(scale * a for a in phi.kraus),
    )


@dataclass
class _PastEntry:
    vertex: str
    xi: tuple[str, ...]
    phi_p: KrausChannel
    source: str


def _resolved_futures(q: QCHInstance, exhaustive: bool) -> list[_FutureEntry]:
    out: list[_FutureEntry] = []
    for idx, pair in enumerate(q.complete_pairs):
        for x in pair.xi:
            hom = _future_channel(q, pair, x)
            out.append(_FutureEntry(x, pair.zeta, hom, _normalize_hom(hom), f"pair{idx}"))
    for k, df in enumerate(q.declared_futures):
        out.append(
            _FutureEntry(df.vertex, df.zeta, df.phi_f, _normalize_hom(df.phi_f), f"declared{k}")
        )
    if exhaustive:
        for eid, s, t in q.graph.edges:
            if causal.is_complete_future(q.graph, [t], s):
                # The edge map is already the quantum operation; for a
                # singleton future the two forms coincide.
                phi = q.edge_maps[eid]
                out.append(_FutureEntry(s, (t,), phi, phi, f"edge:{eid}"))
    return out


def _resolved_pasts(q: QCHInstance, exhaustive: bool) -> list[_PastEntry]:
    out: list[_PastEntry] = []
    for idx, pair in enumerate(q.complete_pairs):
        for y in pair.zeta:
            out.append(_PastEntry(y, pair.xi, _past_channel(q, pair, y), f"pair{idx}"))
    if exhaustive:
        for eid, s, t in q.graph.edges:
            if causal.is_complete_past(q.graph, [s], t):
                out.append(_PastEntry(t, (s,), q.edge_maps[eid], f"edge:{eid}"))
    return out


def _acausal_subsets(q: QCHInstance) -> list[tuple[str, ...]]:
    ids = sorted(q.graph.vertex_ids)
    subsets: list[tuple[str, ...]] = []
    for r in range(1, len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            if causal.is_acausal(q.graph, combo):
                subsets.append(combo)
    return subsets


def _check_exhaustive_limit(q: QCHInstance) -> None:
    if q.graph.num_vertices > EXHAUSTIVE_VERTEX_LIMIT:
        raise PathBudgetError(
            f"exhaustive mode supports at most {EXHAUSTIVE_VERTEX_LIMIT} vertices, "
            f"got {q.graph.num_vertices}"
        )


# ---------------------------------------------------------------------------
# Axiom (i): Extension.
# ---------------------------------------------------------------------------


def check_extension(
    q: QCHInstance,
    tols: Tolerances = DEFAULT_TOLERANCES,
    exhaustive: bool = False,
) -> Report:
    """For every resolvable complete future of a vertex: the future map is a
    *-homomorphism with trace-preserving dual whose reductions match the edge
    maps; mirrored for complete pasts (quantum operation with homomorphic dual,
    reductions matching edge maps in the dual-equivalent channel-mode form)."""
    _require_valid(q, tols)
    report = Report(title="extension")
    futures = _resolved_futures(q, exhaustive)
    pasts = _resolved_pasts(q, exhaustive)

    for entry in futures:
        y, zeta = entry.vertex, entry.zeta
        label = f"ext:F[{entry.source}]:{y}->{{{','.join(zeta)}}}"
        report.add(
            f"{label}:hom",
            star_homomorphism_residual(entry.phi_f, q.graph.dim(y)),
            tols.derived,
        )
        report.add(f"{label}:dual-tp", ch.unital_residual(entry.phi_f), tols.derived)
        zeta_facs = q.graph.dims(zeta)
        for z in zeta:
            edge_map = q.edge_map_between(y, z)
            if edge_map is None:
                if causal.causal_relation(q.graph, y, z) == causal.PRECEDES:
                    raise MissingEdgeError(
                        f"extension check needs edge ({y!r}, {z!r}) but none is present"
                    )
                continue
            reduced = ch.reduce_map(
                ch.dual(entry.phi_f),
                in_factors=zeta_facs,
                out_factors=[(y, q.graph.dim(y))],
                keep_in=z,
                keep_out=y,
                mode="channel",
                tol=tols.psd,
            )
            report.add(
                f"{label}:reduce[{z}]",
                ch.choi_distance(reduced, ch.dual(edge_map)),
                tols.derived,
            )

    for entry in pasts:
        y, xi = entry.vertex, entry.xi
        label = f"ext:P[{entry.source}]:{{{','.join(xi)}}}->{y}"
        report.add(f"{label}:cp", ch.cp_residual(entry.phi_p), tols.psd)
        report.add(f"{label}:tp", ch.tp_residual(entry.phi_p), tols.derived)
        report.add(
            f"{label}:dual-hom",
            star_homomorphism_residual(ch.dual(entry.phi_p), q.graph.dim(y)),
            tols.derived,
        )
        xi_facs = q.graph.dims(xi)
        for x in xi:
            edge_map = q.edge_map_between(x, y)
            if edge_map is None:
                if causal.causal_relation(q.graph, x, y) == causal.PRECEDES:
                    raise MissingEdgeError(
                        f"extension check needs edge ({x!r}, {y!r}) but none is present"
                    )
                continue
            reduced = ch.reduce_map(
                entry.phi_p,
                in_factors=xi_facs,
                out_factors=[(y, q.graph.dim(y))],
                keep_in=x,
                keep_out=y,
                mode="channel",
                tol=tols.psd,
            )
            report.add(
                f"{label}:reduce[{x}]",
                ch.choi_distance(reduced, edge_map),
                tols.derived,
            )

    if exhaustive:
        _check_exhaustive_limit(q)
        covered_f = {(e.vertex, e.zeta) for e in futures}
        covered_p = {(e.vertex, e.xi) for e in pasts}
        uncovered_f = []
        uncovered_p = []
        for y in sorted(q.graph.vertex_ids):
            for subset in _acausal_subsets(q):
                if y in subset:
                    continue
                if (y, subset) not in covered_f and causal.is_complete_future(
                    q.graph, subset, y
                ):
                    uncovered_f.append([y, list(subset)])
                if (y, subset) not in covered_p and causal.is_complete_past(
                    q.graph, subset, y
                ):
                    uncovered_p.append([y, list(subset)])
        report.data["uncovered_futures"] = uncovered_f
        report.data["uncovered_pasts"] = uncovered_p
    report.data["checked_futures"] = len(futures)
    report.data["checked_pasts"] = len(pasts)
    return report


# ---------------------------------------------------------------------------
# Axiom (ii): Spacelike commutativity.
# ---------------------------------------------------------------------------


def _commutator_residual(a_images: list[list[np.ndarray]], b_images: list[list[np.ndarray]]) -> float:
    worst = 0.0
    for row_a in a_images:
        for ma in row_a:
            for row_b in b_images:
                for mb in row_b:
                    worst = max(worst, mk.frobenius_norm(ma @ mb - mb @ ma))
    return worst


def check_spacelike_commutativity(
    q: QCHInstance,
    tols: Tolerances = DEFAULT_TOLERANCES,
    exhaustive: bool = False,
) -> Report:
    """Images of future maps of spacelike vertices sharing a complete future
    must commute; mirrored for duals of past maps sharing a complete past."""
    _require_valid(q, tols)
    report = Report(title="spacelike")
    futures = _resolved_futures(q, exhaustive)
    pasts = _resolved_pasts(q, exhaustive)

    by_zeta: dict[tuple[str, ...], list[_FutureEntry]] = {}
    for entry in futures:
        by_zeta.setdefault(entry.zeta, []).append(entry)
    for zeta, entries in sorted(by_zeta.items()):
        for a, b in itertools.combinations(entries, 2):
            if a.vertex == b.vertex:
                continue
            if causal.causal_relation(q.graph, a.vertex, b.vertex) != causal.SPACELIKE:
                continue
            images_a = _map_images(a.phi_f, q.graph.dim(a.vertex))
            images_b = _map_images(b.phi_f, q.graph.dim(b.vertex))
            report.add(
                f"sl:F:{a.vertex}~{b.vertex}->{{{','.join(zeta)}}}",
                _commutator_residual(images_a, images_b),
                tols.derived,
            )

    by_xi: dict[tuple[str, ...], list[_PastEntry]] = {}
    for entry in pasts:
        by_xi.setdefault(entry.xi, []).append(entry)
    for xi, entries in sorted(by_xi.items()):
        for a, b in itertools.combinations(entries, 2):
            if a.vertex == b.vertex:
                continue
            if causal.causal_relation(q.graph, a.vertex, b.vertex) != causal.SPACELIKE:
                continue
            images_a = _map_images(ch.dual(a.phi_p), q.graph.dim(a.vertex))
            images_b = _map_images(ch.dual(b.phi_p), q.graph.dim(b.vertex))
            report.add(
                f"sl:P:{a.vertex}~{b.vertex}<-{{{','.join(xi)}}}",
                _commutator_residual(images_a, images_b),
                tols.derived,
            )
    report.data["checked_pairs"] = len(report.checks)
    return report


# ---------------------------------------------------------------------------
# Axiom (iii): Composition.
# ---------------------------------------------------------------------------


def check_composition(
    q: QCHInstance,
    tols: Tolerances = DEFAULT_TOLERANCES,
    exhaustive: bool = False,
) -> Report:
    """Where a set is simultaneously a resolvable complete future of x and
    complete past of y, the edge map from x to y must equal the composite
    Phi_P ∘ Phi_F (Choi distance).  Related pairs whose connecting edge is not
    part of the instance cannot be checked; they are recorded under
    ``unrepresented_pairs`` (the composite would define the missing map)."""
    _require_valid(q, tols)
    report = Report(title="composition")
    futures = _resolved_futures(q, exhaustive)
    pasts = _resolved_pasts(q, exhaustive)
    unrepresented: list[list[str]] = []
    for fe in futures:
        for pe in pasts:
            if fe.zeta != pe.xi:
                continue
            x, y = fe.vertex, pe.vertex
            if x == y or causal.causal_relation(q.graph, x, y) != causal.PRECEDES:
                continue
            edge_map = q.edge_map_between(x, y)
            if edge_map is None:
                entry = [x, y, ",".join(fe.zeta)]
                if entry not in unrepresented:
                    unrepresented.append(entry)
                continue
            composite = ch.compose(pe.phi_p, fe.phi_f_channel)
            report.add(
                f"comp:{x}->{{{','.join(fe.zeta)}}}->{y}",
                ch.choi_distance(edge_map, composite),
                tols.derived,
            )
    report.data["unrepresented_pairs"] = unrepresented
    report.data["checked_triples"] = len(report.checks)
    return report


# ---------------------------------------------------------------------------
# Complete-pair reduction witness.
# ---------------------------------------------------------------------------


def verify_complete_pair_reductions(
    q: QCHInstance,
    pair_index: int,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> Report:
    """For every present edge (x, y) across the pair, the channel-mode
    reduction of the pair unitary map to that edge must equal the edge map —
    the per-instance witness of the uniqueness of the pair map."""
    pair = q.complete_pairs[pair_index]
    report = Report(title=f"pair-reductions:{pair.label()}")
    u_channel = pair_channel(q, pair)
    xi_facs = q.graph.dims(pair.xi)
    zeta_facs = q.graph.dims(pair.zeta)
    for x in pair.xi:
        for y in pair.zeta:
            edge_map = q.edge_map_between(x, y)
            if edge_map is None:
                if causal.causal_relation(q.graph, x, y) == causal.PRECEDES:
                    raise MissingEdgeError(
                        f"pair {pair.label()} reduction needs edge ({x!r}, {y!r})"
                    )
                continue
            reduced = ch.reduce_map(
                u_channel,
                in_factors=xi_facs,
                out_factors=zeta_facs,
                keep_in=x,
                keep_out=y,
                mode="channel",
                tol=tols.psd,
            )
            report.add(
                f"pair{pair_index}:reduce:{x}->{y}",
                ch.choi_distance(reduced, edge_map),
                tols.derived,
            )
    return report


# ---------------------------------------------------------------------------
# JSON wire format.
# ---------------------------------------------------------------------------


def instance_to_json(q: QCHInstance) -> dict:
    return {
        "graph": causal.graph_to_json(q.graph),
        "edge_maps": {eid: ch.channel_to_json(phi) for eid, phi in q.edge_maps.items()},
        "complete_pairs": [
            {
                "xi": list(p.xi),
                "zeta": list(p.zeta),
                "unitary": mk.matrix_to_json(p.unitary),
            }
            for p in q.complete_pairs
        ],
        "declared_futures": [
            {
                "vertex": df.vertex,
                "zeta": list(df.zeta),
                "map": ch.channel_to_json(df.phi_f),
            }
            for df in q.declared_futures
        ],
    }


def instance_from_json(obj: dict) -> QCHInstance:
    try:
        graph = causal.graph_from_json(obj["graph"])
        edge_maps = {
            str(eid): ch.channel_from_json(spec)
            for eid, spec in obj.get("edge_maps", {}).items()
        }
        pairs = tuple(
            CompletePair(
                xi=tuple(str(v) for v in p["xi"]),
                zeta=tuple(str(v) for v in p["zeta"]),
                unitary=mk.matrix_from_json(p["unitary"]),
            )
            for p in obj.get("complete_pairs", [])
        )
        futures = tuple(
            DeclaredFuture(
                vertex=str(d["vertex"]),
                zeta=tuple(str(v) for v in d["zeta"]),
                phi_f=ch.channel_from_json(d["map"]),
            )
            for d in obj.get("declared_futures", [])
        )
    except (KeyError, TypeError) as exc:
        raise InputFormatError(f"malformed QCH instance: {exc}") from exc
    return QCHInstance(
        graph=graph,
        edge_maps=edge_maps,
        complete_pairs=pairs,
        declared_futures=futures,
    )
