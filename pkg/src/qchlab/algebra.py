"""Partial-isometry families on graphs, and the operator algebras generated by
vertex projections together with edge Kraus operators.

Operators live on the direct sum of the vertex spaces (blocks ordered by the
graph's vertex list, total dimension D).  The generated algebra is computed as
the span closure of the generators under products and adjoints — in finite
dimensions that closure is the full generated C*-algebra — and decomposed into
its block (Wedderburn) structure via the center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import channel as ch, matkernel as mk
from .causal import CausalGraph, graph_from_json, graph_to_json
from .channel import KrausChannel
from .errors import (
    CKRelationsError,
    DegenerateSplitError,
    DimensionError,
    InputFormatError,
)
from .report import DEFAULT_TOLERANCES, Report, Tolerances

BLOCK_SPLIT_RETRIES = 5
EIGENVALUE_CLUSTER_TOL = 1e-8


def block_offsets(graph: CausalGraph) -> dict[str, int]:
    """Start coordinate of each vertex block inside the direct sum."""
    offsets = {}
    acc = 0
    for v, d in graph.vertices:
        offsets[v] = acc
        acc += d
    return offsets


def canonical_projections(graph: CausalGraph) -> dict[str, np.ndarray]:
    """The coordinate-block projection P_x for each vertex."""
    total = graph.total_dim()
    offsets = block_offsets(graph)
    out = {}
    for v, d in graph.vertices:
        p = mk.zeros(total)
        o = offsets[v]
        p[o : o + d, o : o + d] = mk.identity(d)
        out[v] = p
    return out


@dataclass(frozen=True)
class CKFamily:
    """Vertex projections and edge partial isometries on the direct sum space.

    The projections are required to be the coordinate-block projections (the
    direct-sum model); construction rejects anything else.
    """

    graph: CausalGraph
    projections: Mapping[str, np.ndarray]
    isometries: Mapping[str, np.ndarray]

    def __post_init__(self):
        total = self.graph.total_dim()
        canonical = canonical_projections(self.graph)
        for v, _ in self.graph.vertices:
            if v not in self.projections:
                raise InputFormatError(f"missing projection for vertex {v!r}")
            p = mk.as_matrix(self.projections[v])
            if p.shape != (total, total):
                raise DimensionError(
                    f"projection for {v!r} has shape {p.shape}, expected {total}x{total}"
                )
            if mk.frobenius_norm(p - canonical[v]) >= 1e-10:
                raise CKRelationsError(
                    f"projection for {v!r} is not the coordinate-block projection"
                )
        for e, _, _ in self.graph.edges:
            if e not in self.isometries:
                raise InputFormatError(f"missing isometry for edge {e!r}")
            s = mk.as_matrix(self.isometries[e])
            if s.shape != (total, total):
                raise DimensionError(
                    f"isometry for {e!r} has shape {s.shape}, expected {total}x{total}"
                )

    @property
    def total_dim(self) -> int:
        return self.graph.total_dim()


def ck_family_with_canonical_projections(
    graph: CausalGraph, isometries: Mapping[str, np.ndarray]
) -> CKFamily:
    return CKFamily(
        graph=graph,
        projections=canonical_projections(graph),
        isometries=dict(isometries),
    )


def check_ck_family(
    family: CKFamily,
    tol: float = 1e-10,
    orthogonal_ranges: bool = False,
) -> Report:
    """The graph-algebra relations, per edge: the initial projection of S_e is
    the source-vertex projection, and the range projection sits under the
    target-vertex projection.  With ``orthogonal_ranges`` the summed range
    projections at each vertex must stay dominated as well (equivalently the
    ranges are mutually orthogonal)."""
    report = Report(title="ck-relations")
    for e, s, t in family.graph.edges:
        se = mk.as_matrix(family.isometries[e])
        ps = mk.as_matrix(family.projections[s])
        pt = mk.as_matrix(family.projections[t])
        range_proj = se @ mk.adjoint(se)
        report.add(f"ck:{e}:initial", mk.frobenius_norm(mk.adjoint(se) @ se - ps), tol)
        report.add(
            f"ck:{e}:range-support",
            mk.frobenius_norm(pt @ range_proj - range_proj),
            tol,
        )
        report.add(f"ck:{e}:range-dominated", mk.psd_defect(pt - range_proj), tol)
    if orthogonal_ranges:
        for v, _ in family.graph.vertices:
            incoming = [
                mk.as_matrix(family.isometries[e])
                for e, _, t in family.graph.edges
                if t == v
            ]
            if len(incoming) < 2:
                continue
            total = sum(se @ mk.adjoint(se) for se in incoming)
            report.add(
                f"ck:{v}:orthogonal-ranges",
                mk.psd_defect(mk.as_matrix(family.projections[v]) - total),
                tol,
            )
    return report


def ck_to_channels(family: CKFamily, tol: float = 1e-10) -> dict[str, KrausChannel]:
    """Convert a passing family into one single-Kraus channel per edge by
    compressing each isometry to its source/target blocks."""
    report = check_ck_family(family, tol)
    if not report.passed:
        names = ", ".join(c.name for c in report.failures())
        raise CKRelationsError(f"family violates the graph relations: {names}")
    offsets = block_offsets(family.graph)
    out = {}
    for e, s, t in family.graph.edges:
        se = mk.as_matrix(family.isometries[e])
        ds, dt = family.graph.dim(s), family.graph.dim(t)
        block = se[
            offsets[t] : offsets[t] + dt,
            offsets[s] : offsets[s] + ds,
        ]
        out[e] = KrausChannel(in_dim=ds, out_dim=dt, kraus=(block.copy(),))
    return out


# ---------------------------------------------------------------------------
# Generated algebras.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratedAlgebra:
    ambient_dim: int
    generators: tuple[np.ndarray, ...]
    span: mk.MatrixSubspace
    iterations: int

    @property
    def dim(self) -> int:
        return self.span.dim


def embedded_generators(
    graph: CausalGraph, channels: Mapping[str, KrausChannel]
) -> list[np.ndarray]:
    """Vertex projections plus every edge Kraus operator (and adjoint) regarded
    as D x D operators supported on the (target, source) block."""
    total = graph.total_dim()
    offsets = block_offsets(graph)
    gens: list[np.ndarray] = [p for _, p in sorted(canonical_projections(graph).items())]
    for eid in sorted(channels):
        phi = channels[eid]
        endpoints = graph.edge_endpoints(eid)
        s, t = endpoints
        ds, dt = graph.dim(s), graph.dim(t)
        if (phi.in_dim, phi.out_dim) != (ds, dt):
            raise DimensionError(
                f"channel on edge {eid!r} has dims {phi.in_dim}->{phi.out_dim}, "
                f"graph demands {ds}->{dt}"
            )
        for a in phi.kraus:
            big = mk.zeros(total)
            big[offsets[t] : offsets[t] + dt, offsets[s] : offsets[s] + ds] = a
            gens.append(big)
            gens.append(mk.adjoint(big))
    return gens


def generate_algebra(
    graph: CausalGraph, channels: Mapping[str, KrausChannel]
) -> GeneratedAlgebra:
    """Span closure of the generators under products: iterate
    S_{k+1} = span(S_k ∪ S_k·S_k) until the dimension stabilizes.  The seed is
    adjoint-closed, so every iterate is; stabilization is guaranteed within
    D^2 rounds."""
    gens = embedded_generators(graph, channels)
    total = graph.total_dim()
    span = mk.span_basis(gens)
    iterations = 0
    for _ in range(total * total + 1):
        iterations += 1
        basis = list(span.basis)
        products = [a @ b for a in basis for b in basis]
        grown = mk.span_basis(basis + products)
        if grown.dim == span.dim:
            span = grown
            break
        span = grown
    return GeneratedAlgebra(
        ambient_dim=total,
        generators=tuple(gens),
        span=span,
        iterations=iterations,
    )


def closure_residuals(algebra: GeneratedAlgebra) -> tuple[float, float]:
    """(product-closure, adjoint-closure) residuals over all basis pairs."""
    worst_prod = 0.0
    worst_adj = 0.0
    basis = algebra.span.basis
    for a in basis:
        worst_adj = max(worst_adj, algebra.span.residual(mk.adjoint(a)))
        for b in basis:
            worst_prod = max(worst_prod, algebra.span.residual(a @ b))
    return worst_prod, worst_adj


def commutant(span: mk.MatrixSubspace) -> mk.MatrixSubspace:
    """All D x D matrices commuting with every basis element, computed as the
    kernel of the stacked Sylvester constraints XB = BX."""
    d = span.ambient_dim
    if d == 0:
        return mk.span_basis([])
    n = d * d
    normal = mk.zeros(n)
    eye = mk.identity(d)
    for b in span.basis:
        c = mk.tensor(eye, b.T) - mk.tensor(b, eye)
        normal += mk.adjoint(c) @ c
    w, v = mk.hermitian_eig(normal)
    cutoff = 1e-10 * max(1.0, float(w[-1]))
    kernel = [v[:, k].reshape(d, d) for k in range(n) if w[k] < cutoff]
    return mk.span_basis(kernel)


def center(span: mk.MatrixSubspace) -> mk.MatrixSubspace:
    """span ∩ commutant, solved in the coordinates of the span basis."""
    basis = span.basis
    dim = len(basis)
    if dim == 0:
        return mk.span_basis([])
    d = span.ambient_dim
    rows = []
    for b in basis:
        block = np.stack([(a @ b - b @ a).reshape(d * d) for a in basis], axis=1)
        rows.append(block)
    constraints = np.vstack(rows)
    normal = mk.adjoint(constraints) @ constraints
    w, v = mk.hermitian_eig(normal)
    cutoff = 1e-10 * max(1.0, float(w[-1]))
    stacked = np.stack([b.reshape(d * d) for b in basis])
    members = []
    for k in range(dim):
        if w[k] < cutoff:
            members.append((v[:, k] @ stacked).reshape(d, d))
    return mk.span_basis(members)


def block_decomposition(
    algebra: GeneratedAlgebra,
    seed: int = 0,
    tol: float = 1e-8,
) -> list[tuple[int, int]]:
    """Wedderburn shape [(n_k, m_k), ...] meaning ⊕_k M_{n_k} ⊗ 1_{m_k}.

    The minimal central projections are the spectral projections of a random
    self-adjoint central element; eigenvalue collisions within 1e-8 force a
    retry with fresh randomness (up to 5 draws), after which E_DEGENERATE is
    raised.  Validates n_k, m_k integrality and sum n_k^2 = dim."""
    span = algebra.span
    if span.dim == 0:
        return []
    z_space = center(span)
    expected_blocks = z_space.dim
    rng = np.random.default_rng(seed)
    last_problem = "no draws attempted"
    for _ in range(BLOCK_SPLIT_RETRIES):
        coeffs = rng.standard_normal(z_space.dim) + 1j * rng.standard_normal(z_space.dim)
        z = mk.zeros(span.ambient_dim)
        for g, b in zip(coeffs, z_space.basis):
            z += g * b
        z = z + mk.adjoint(z)
        w, v = mk.hermitian_eig(z)
        clusters: list[list[int]] = [[0]]
        for k in range(1, len(w)):
            if w[k] - w[clusters[-1][-1]] < EIGENVALUE_CLUSTER_TOL:
                clusters[-1].append(k)
            else:
                clusters.append([k])
        blocks: list[tuple[int, int]] = []
        ok = True
        found = 0
        for idxs in clusters:
            p = v[:, idxs] @ mk.adjoint(v[:, idxs])
            if span.residual(p) >= tol:
                # Not a projection of the algebra: either the support complement
                # (fine) or a collision of central values (retry below).
                continue
            found += 1
            corner = mk.span_basis([p @ b @ p for b in span.basis])
            n = round(math.sqrt(corner.dim))
            rank = round(float(np.trace(p).real))
            if n < 1 or n * n != corner.dim or rank % n != 0:
                ok = False
                last_problem = f"corner dim {corner.dim} / rank {rank} not a square block"
                break
            blocks.append((n, rank // n))
        if ok and found != expected_blocks:
            ok = False
            last_problem = (
                f"recovered {found} central projections, center dimension is "
                f"{expected_blocks}"
            )
        if ok and sum(n * n for n, _ in blocks) != span.dim:
            ok = False
            last_problem = "sum of n_k^2 does not match the algebra dimension"
        if ok:
            blocks.sort(key=lambda nm: (-nm[0], -nm[1]))
            return blocks
    raise DegenerateSplitError(
        f"central splitting failed after {BLOCK_SPLIT_RETRIES} draws: {last_problem}"
    )


# ---------------------------------------------------------------------------
# Representation independence and filtration witnesses.
# ---------------------------------------------------------------------------


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary: Gram-Schmidt applied to a complex Gaussian."""
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    cols: list[np.ndarray] = []
    for k in range(n):
        v = g[:, k].astype(np.complex128)
        for _ in range(2):
            for b in cols:
                v = v - (b.conj() @ v) * b
        v = v / np.linalg.norm(v)
        cols.append(v)
    return np.stack(cols, axis=1)


def mix_kraus(phi: KrausChannel, u: np.ndarray) -> KrausChannel:
    """Replace {A_j} by {sum_j u_ij A_j}; ``u`` may be larger than the family,
    in which case the family is zero-padded first."""
    m = u.shape[0]
    if u.shape != (m, m) or m < len(phi.kraus):
        raise DimensionError(
            f"mixing matrix shape {u.shape} unusable for {len(phi.kraus)} operators"
        )
    padded = list(phi.kraus) + [
        mk.zeros(phi.out_dim, phi.in_dim) for _ in range(m - len(phi.kraus))
    ]
    mixed = tuple(
        sum(u[i, j] * padded[j] for j in range(m)) for i in range(m)
    )
    return KrausChannel(in_dim=phi.in_dim, out_dim=phi.out_dim, kraus=mixed)


def kraus_choice_invariance(
    graph: CausalGraph,
    channels: Mapping[str, KrausChannel],
    trials: int = 50,
    seed: int = 0,
    tol: float = 1e-8,
) -> Report:
    """Regenerate the algebra after Haar-random remixing of every edge's Kraus
    family (zero-padding by one operator on alternating trials) and check the
    span is unchanged: equal dimension plus mutual containment."""
    report = Report(title="kraus-invariance")
    base = generate_algebra(graph, channels)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for trial in range(trials):
        mixed: dict[str, KrausChannel] = {}
        for eid in sorted(channels):
            phi = channels[eid]
            m = len(phi.kraus) + (trial % 2)
            mixed[eid] = mix_kraus(phi, haar_unitary(rng, m))
        alt = generate_algebra(graph, mixed)
        report.add_bool(f"trial{trial}:dim", alt.dim == base.dim)
        residual = max(
            mk.containment_residual(base.span, alt.span),
            mk.containment_residual(alt.span, base.span),
        )
        worst = max(worst, residual)
        report.add(f"trial{trial}:containment", residual, tol)
    report.data["trials"] = trials
    report.data["worst_residual"] = worst
    report.data["dim"] = base.dim
    return report


def af_filtration_check(
    graph: CausalGraph,
    channels: Mapping[str, KrausChannel],
    tol: float = 1e-8,
) -> Report:
    """Generator filtration: adding edges one by one (id order) on the fixed
    direct-sum space must give nested finite-dimensional subalgebras with
    dimensions bounded by D^2."""
    report = Report(title="af-filtration")
    total = graph.total_dim()
    edge_ids = sorted(channels)
    dims: list[int] = []
    previous: GeneratedAlgebra | None = None
    for j in range(len(edge_ids) + 1):
        subset = {eid: channels[eid] for eid in edge_ids[:j]}
        algebra = generate_algebra(graph, subset)
        dims.append(algebra.dim)
        label = f"prefix{j}"
        report.add_bool(f"{label}:dim-bound", algebra.dim <= total * total)
        if previous is not None:
            report.add(
                f"{label}:contains-previous",
                mk.containment_residual(previous.span, algebra.span),
                tol,
            )
            report.add_bool(f"{label}:monotone", algebra.dim >= previous.dim)
        previous = algebra
    report.data["dims"] = dims
    return report


# ---------------------------------------------------------------------------
# JSON wire formats.
# ---------------------------------------------------------------------------


def ck_family_to_json(family: CKFamily) -> dict:
    return {
        "graph": graph_to_json(family.graph),
        "projections": {
            v: mk.matrix_to_json(mk.as_matrix(p)) for v, p in family.projections.items()
        },
        "isometries": {
            e: mk.matrix_to_json(mk.as_matrix(s)) for e, s in family.isometries.items()
        },
    }


def ck_family_from_json(obj: dict) -> CKFamily:
    try:
        graph = graph_from_json(obj["graph"])
        projections = {
            str(v): mk.matrix_from_json(p) for v, p in obj["projections"].items()
        }
        isometries = {
            str(e): mk.matrix_from_json(s) for e, s in obj["isometries"].items()
        }
    except (KeyError, TypeError) as exc:
        raise InputFormatError(f"malformed CK family: {exc}") from exc
    return CKFamily(graph=graph, projections=projections, isometries=isometries)


def algebra_input_to_json(graph: CausalGraph, channels: Mapping[str, KrausChannel]) -> dict:
    return {
        "graph": graph_to_json(graph),
        "channels": {eid: ch.channel_to_json(phi) for eid, phi in channels.items()},
    }


def algebra_input_from_json(obj: dict) -> tuple[CausalGraph, dict[str, KrausChannel]]:
    try:
        graph = graph_from_json(obj["graph"])
        channels = {
            str(eid): ch.channel_from_json(spec)
            for eid, spec in obj.get("channels", {}).items()
        }
    except (KeyError, TypeError) as exc:
        raise InputFormatError(f"malformed algebra input: {exc}") from exc
    for eid in channels:
        graph.edge_endpoints(eid)  # raises on unknown ids
    return graph, channels
