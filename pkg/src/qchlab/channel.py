"""Completely positive maps between vertex spaces, given by Kraus families.

A map ``rho -> sum_i A_i rho A_i†`` is stored as its ordered list of Kraus
operators (each ``out_dim x in_dim``).  The Choi matrix used throughout is
``C = sum_ij E_ij ⊗ Phi(E_ij)`` with the input factor first, so two channels
are equal as maps iff their Choi matrices coincide.  Canonical Kraus form:
spectral factors of the Choi matrix, eigenvalues descending, the first nonzero
entry of each operator rotated to be real positive.

Multi-vertex state spaces are tensor products with factors ordered by ascending
vertex id; ``embed`` and ``reduce_map`` implement the unital embeddings
``rho -> rho ⊗ 1`` and their compressions between such products.  ``channel``
mode replaces the identity fill by the normalized ``1/d`` so that reductions of
trace-preserving maps stay trace preserving; ``raw`` mode keeps the literal
unnormalized embedding.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import matkernel as mk
from .errors import (
    DimensionError,
    InputFormatError,
    NotCompletelyPositiveError,
    NotHermitianError,
    NotUnitaryError,
)

DEFAULT_PSD_TOL = 1e-9


@dataclass(frozen=True)
class KrausChannel:
    """A CP map given by a nonempty family of out_dim x in_dim Kraus operators."""

    in_dim: int
    out_dim: int
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        if self.in_dim < 1 or self.out_dim < 1:
            raise DimensionError(f"channel dims must be positive, got {self.in_dim}->{self.out_dim}")
        if not self.kraus:
            raise DimensionError("a channel needs at least one Kraus operator")
        for a in self.kraus:
            if a.shape != (self.out_dim, self.in_dim):
                raise DimensionError(
                    f"Kraus operator shape {a.shape} does not match "
                    f"({self.out_dim}, {self.in_dim})"
                )

    def __len__(self) -> int:
        return len(self.kraus)


def make_channel(kraus: Sequence[np.ndarray]) -> KrausChannel:
    """Build a channel from operators, inferring dims from the first one."""
    mats = tuple(mk.as_matrix(a) for a in kraus)
    if not mats:
        raise DimensionError("a channel needs at least one Kraus operator")
    out_dim, in_dim = mats[0].shape
    return KrausChannel(in_dim=in_dim, out_dim=out_dim, kraus=mats)


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel(in_dim=dim, out_dim=dim, kraus=(mk.identity(dim),))


def unitary_channel(u: np.ndarray, tol: float = 1e-10) -> KrausChannel:
    """Conjugation by a unitary; rejects non-unitary input."""
    u = mk.as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise DimensionError(f"unitary must be square, got {u.shape}")
    defect = mk.frobenius_norm(mk.adjoint(u) @ u - mk.identity(u.shape[0]))
    if defect >= tol:
        raise NotUnitaryError(f"matrix is not unitary: ||U†U - I|| = {defect:.3e}")
    return make_channel([u])


@dataclass(frozen=True)
class Superoperator:
    """A linear map pinned down by its Choi matrix (input factor first)."""

    in_dim: int
    out_dim: int
    choi: np.ndarray

    def __post_init__(self):
        n = self.in_dim * self.out_dim
        if self.choi.shape != (n, n):
            raise DimensionError(
                f"Choi matrix shape {self.choi.shape} does not match dims "
                f"{self.in_dim}->{self.out_dim}"
            )


def apply(phi: KrausChannel, rho: np.ndarray) -> np.ndarray:
    """Operator-sum action sum_i A_i rho A_i†."""
    rho = mk.as_matrix(rho)
    if rho.shape != (phi.in_dim, phi.in_dim):
        raise DimensionError(
            f"state shape {rho.shape} does not match channel input dim {phi.in_dim}"
        )
    out = mk.zeros(phi.out_dim)
    for a in phi.kraus:
        out += a @ rho @ mk.adjoint(a)
    return out


def tp_residual(phi: KrausChannel) -> float:
    """||sum A_i† A_i - I_in||_F, zero exactly for trace-preserving maps."""
    acc = mk.zeros(phi.in_dim)
    for a in phi.kraus:
        acc += mk.adjoint(a) @ a
    return mk.frobenius_norm(acc - mk.identity(phi.in_dim))


def is_trace_preserving(phi: KrausChannel, tol: float = 1e-10) -> bool:
    return tp_residual(phi) < tol


def unital_residual(phi: KrausChannel) -> float:
    """||sum A_i A_i† - I_out||_F."""
    acc = mk.zeros(phi.out_dim)
    for a in phi.kraus:
        acc += a @ mk.adjoint(a)
    return mk.frobenius_norm(acc - mk.identity(phi.out_dim))


def is_unital(phi: KrausChannel, tol: float = 1e-10) -> bool:
    return unital_residual(phi) < tol


def dual(phi: KrausChannel) -> KrausChannel:
    """Adjoint with respect to the trace pairing: the Kraus family {A_i†}."""
    return KrausChannel(
        in_dim=phi.out_dim,
        out_dim=phi.in_dim,
        kraus=tuple(mk.adjoint(a) for a in phi.kraus),
    )


def choi(phi: KrausChannel) -> Superoperator:
    """Choi matrix sum_ij E_ij ⊗ Phi(E_ij) = sum_a vec(A_a) vec(A_a)† with
    vec(A)[(i, k)] = A[k, i]."""
    n = phi.in_dim * phi.out_dim
    c = mk.zeros(n)
    for a in phi.kraus:
        v = a.T.reshape(n)
        c += np.outer(v, v.conj())
    return Superoperator(in_dim=phi.in_dim, out_dim=phi.out_dim, choi=c)


def choi_matrix(phi: KrausChannel | Superoperator) -> np.ndarray:
    if isinstance(phi, Superoperator):
        return phi.choi
    return choi(phi).choi


def choi_distance(a: KrausChannel | Superoperator, b: KrausChannel | Superoperator) -> float:
    """Frobenius distance between Choi matrices — the map-equality metric."""
    ca, cb = choi_matrix(a), choi_matrix(b)
    if ca.shape != cb.shape:
        raise DimensionError(f"Choi shapes differ: {ca.shape} vs {cb.shape}")
    return mk.frobenius_norm(ca - cb)


def cp_residual(s: Superoperator | KrausChannel) -> float:
    """How far the Choi matrix is from PSD: max(0, -lambda_min) of its Hermitian part."""
    return mk.psd_defect(choi_matrix(s))


def is_completely_positive(s: Superoperator, tol: float = DEFAULT_PSD_TOL) -> bool:
    """Choi criterion: CP iff the Choi matrix is PSD (non-Hermitian Choi counts
    as not CP rather than raising)."""
    try:
        return mk.is_psd(s.choi, tol)
    except NotHermitianError:
        return False


def kraus_from_choi(s: Superoperator, tol: float = DEFAULT_PSD_TOL) -> KrausChannel:
    """Canonical Kraus family from a PSD Choi matrix.

    Spectral eigenpairs with eigenvalue > tol are kept, ordered by descending
    eigenvalue; sqrt(lambda) v reshapes to an out_dim x in_dim operator whose
    first nonzero entry is rotated real positive.  Raises E_NOT_CP when the
    Choi matrix is not PSD within tol.  A numerically zero Choi matrix yields
    the single zero operator.
    """
    c = s.choi
    if not is_completely_positive(s, tol):
        raise NotCompletelyPositiveError(
            f"Choi matrix is not PSD within tol={tol:g} (defect {mk.psd_defect(c):.3e})"
        )
    w, v = mk.hermitian_eig(c)
    ops: list[np.ndarray] = []
    for k in range(len(w) - 1, -1, -1):  # descending eigenvalues
        lam = float(w[k])
        if lam <= tol:
            break
        a = math.sqrt(lam) * v[:, k].reshape(s.in_dim, s.out_dim).T
        ops.append(_fix_phase(a))
    if not ops:
        ops.append(mk.zeros(s.out_dim, s.in_dim))
    return KrausChannel(in_dim=s.in_dim, out_dim=s.out_dim, kraus=tuple(ops))


def _fix_phase(a: np.ndarray) -> np.ndarray:
    flat = a.reshape(-1)
    cutoff = 1e-9 * float(np.max(np.abs(flat)), )
    for z in flat:
        if abs(z) > cutoff:
            return a * (z.conjugate() / abs(z))
    return a


def canonicalize(phi: KrausChannel, tol: float = DEFAULT_PSD_TOL) -> KrausChannel:
    """Reproducible normal form: Kraus operators from the spectral Choi factorization."""
    return kraus_from_choi(choi(phi), tol)


def compose(phi2: KrausChannel, phi1: KrausChannel) -> KrausChannel:
    """phi2 ∘ phi1 with Kraus family {B_j A_i}; canonicalized through the Choi
    matrix when the pairwise count exceeds the in*out dimension bound."""
    if phi1.out_dim != phi2.in_dim:
        raise DimensionError(
            f"cannot compose: inner dims {phi1.out_dim} vs {phi2.in_dim}"
        )
    ops = tuple(b @ a for a in phi1.kraus for b in phi2.kraus)
    out = KrausChannel(in_dim=phi1.in_dim, out_dim=phi2.out_dim, kraus=ops)
    if len(ops) > phi1.in_dim * phi2.out_dim:
        out = canonicalize(out)
    return out


def _vec_stack(phi: KrausChannel, count: int) -> np.ndarray:
    """Columns vec(A_i), zero-padded to ``count`` columns."""
    n = phi.in_dim * phi.out_dim
    v = np.zeros((n, count), dtype=np.complex128)
    for i, a in enumerate(phi.kraus):
        v[:, i] = a.T.reshape(n)
    return v


def _complete_orthonormal(cols: list[np.ndarray], m: int) -> np.ndarray:
    """Extend orthonormal columns to an m x m unitary, Gram-Schmidt against
    identity candidates (deterministic)."""
    basis = [c.copy() for c in cols]
    for k in range(m):
        if len(basis) == m:
            break
        v = np.zeros(m, dtype=np.complex128)
        v[k] = 1.0
        for _ in range(2):
            for b in basis:
                v = v - (b.conj() @ v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            basis.append(v / norm)
    if len(basis) != m:
        raise NotUnitaryError("failed to complete an orthonormal basis")
    return np.stack(basis, axis=1)


def kraus_equivalence(
    phi: KrausChannel, phi_alt: KrausChannel, tol: float = 1e-10
) -> np.ndarray | None:
    """Scalar unitary U with A_i = sum_j U[i, j] A'_j, when the two families
    represent the same map (Choi distance < tol); None otherwise.

    Families are zero-padded to a common length; U is recovered by aligning the
    two factorizations of the common Choi matrix (unitary Procrustes on the
    stacked vec columns, solved with the in-house Hermitian eigensolver).
    """
    if (phi.in_dim, phi.out_dim) != (phi_alt.in_dim, phi_alt.out_dim):
        raise DimensionError("kraus_equivalence needs channels with identical dims")
    if choi_distance(phi, phi_alt) >= tol:
        return None
    m = max(len(phi.kraus), len(phi_alt.kraus))
    v1 = _vec_stack(phi, m)
    v2 = _vec_stack(phi_alt, m)
    # Want unitary W minimizing ||v2 W - v1||: W = P R† from the SVD of M = v2† v1.
    mmat = mk.adjoint(v2) @ v1
    w_eig, r = mk.hermitian_eig(mk.adjoint(mmat) @ mmat)
    sigma = np.sqrt(np.clip(w_eig, 0.0, None))
    sigma_max = float(sigma[-1]) if len(sigma) else 0.0
    cutoff = 1e-10 * max(1.0, sigma_max)
    p_cols: list[np.ndarray] = []
    r_cols: list[np.ndarray] = []
    for k in range(len(sigma) - 1, -1, -1):  # descending singular values
        if sigma[k] <= cutoff:
            continue
        p = (mmat @ r[:, k]) / sigma[k]
        for b in p_cols:  # re-orthonormalize against earlier columns
            p = p - (b.conj() @ p) * b
        norm = np.linalg.norm(p)
        if norm < 0.5:
            continue
        p_cols.append(p / norm)
        r_cols.append(r[:, k])
    p_full = _complete_orthonormal(p_cols, m)
    r_full = _complete_orthonormal(r_cols, m)
    w = p_full @ mk.adjoint(r_full)
    return w.T


# ---------------------------------------------------------------------------
# Tensor-factor embeddings and reductions.
# ---------------------------------------------------------------------------


def _sorted_factors(factors: Sequence[tuple[str, int]]) -> list[tuple[str, int]]:
    out = sorted(factors)
    if len({v for v, _ in out}) != len(out):
        raise InputFormatError("duplicate factor ids")
    return out


def embed(rho: np.ndarray, x: str, factors: Sequence[tuple[str, int]] | Mapping[str, int]) -> np.ndarray:
    """Unital embedding iota_x(rho) = 1 ⊗ ... ⊗ rho ⊗ ... ⊗ 1 on the tensor
    product over ``factors``, ordered by ascending id."""
    if isinstance(factors, Mapping):
        factors = list(factors.items())
    facs = _sorted_factors(factors)
    dims = {v: d for v, d in facs}
    if x not in dims:
        raise DimensionError(f"vertex {x!r} is not a tensor factor")
    rho = mk.as_matrix(rho)
    if rho.shape != (dims[x], dims[x]):
        raise DimensionError(
            f"state shape {rho.shape} does not match factor dim {dims[x]}"
        )
    return mk.tensor_all([rho if v == x else mk.identity(d) for v, d in facs])


def embedding_isometries(
    factors: Sequence[tuple[str, int]], keep: Iterable[str]
) -> list[np.ndarray]:
    """Isometries V_k : H(kept) -> H(all factors), one per basis multi-index of
    the dropped factors, with sum_k V_k rho V_k† = iota(rho) and
    sum_k V_k† M V_k the partial trace onto the kept factors."""
    facs = _sorted_factors(factors)
    keep_set = set(keep)
    unknown = keep_set - {v for v, _ in facs}
    if unknown:
        raise DimensionError(f"unknown factor ids {sorted(unknown)!r}")
    dims = [d for _, d in facs]
    kept_pos = [i for i, (v, _) in enumerate(facs) if v in keep_set]
    dropped_pos = [i for i, (v, _) in enumerate(facs) if v not in keep_set]
    total = math.prod(dims)
    kept_dims = [dims[p] for p in kept_pos]
    kept_total = math.prod(kept_dims) if kept_dims else 1
    strides = [0] * len(dims)
    acc = 1
    for i in range(len(dims) - 1, -1, -1):
        strides[i] = acc
        acc *= dims[i]
    isos = []
    for drop_idx in itertools.product(*[range(dims[p]) for p in dropped_pos]):
        v = np.zeros((total, kept_total), dtype=np.complex128)
        base = sum(strides[p] * val for p, val in zip(dropped_pos, drop_idx))
        for col, kept_idx in enumerate(
            itertools.product(*[range(dims[p]) for p in kept_pos])
        ):
            row = base + sum(strides[p] * val for p, val in zip(kept_pos, kept_idx))
            v[row, col] = 1.0
        isos.append(v)
    return isos


def _fill_embed(
    m: np.ndarray,
    factors: Sequence[tuple[str, int]],
    keep: Iterable[str],
    normalized: bool,
) -> np.ndarray:
    """Embed a matrix on the kept factors into the full product, filling the
    dropped factors with 1 (raw) or 1/d (normalized)."""
    facs = _sorted_factors(factors)
    keep_set = set(keep)
    dims = [d for _, d in facs]
    kept_pos = [i for i, (v, _) in enumerate(facs) if v in keep_set]
    dropped_pos = [i for i, (v, _) in enumerate(facs) if v not in keep_set]
    fill = mk.tensor_all(
        [
            mk.identity(dims[p]) / (dims[p] if normalized else 1)
            for p in dropped_pos
        ]
    )
    block = mk.tensor(m, fill)
    # block factors are [kept..., dropped...]; permute back to natural order.
    src_order = kept_pos + dropped_pos
    perm = [src_order.index(p) for p in range(len(dims))]
    block_dims = [dims[p] for p in src_order]
    return mk.permute_factors(block, block_dims, perm)


def reduce_map(
    psi: KrausChannel,
    in_factors: Sequence[tuple[str, int]],
    out_factors: Sequence[tuple[str, int]],
    keep_in: str | Iterable[str],
    keep_out: str | Iterable[str],
    mode: str = "channel",
    tol: float = DEFAULT_PSD_TOL,
) -> KrausChannel:
    """Compression of a map between tensor products to selected factors.

    ``raw`` mode is the literal unital-embedding reduction
    ``rho -> Tr_dropped-out( psi(rho ⊗ 1) )``; ``channel`` mode fills the
    dropped input factors with ``1/d`` instead, so the reduction of a
    trace-preserving map is trace preserving.  The result is assembled as a
    Choi matrix and returned in canonical Kraus form (E_NOT_CP if the assembled
    Choi matrix is not PSD, which for CP input signals numerical corruption).
    """
    if mode not in ("channel", "raw"):
        raise InputFormatError(f"unknown reduction mode {mode!r}")
    in_facs = _sorted_factors(in_factors)
    out_facs = _sorted_factors(out_factors)
    keep_in_ids = {keep_in} if isinstance(keep_in, str) else set(keep_in)
    keep_out_ids = {keep_out} if isinstance(keep_out, str) else set(keep_out)
    if not keep_in_ids <= {v for v, _ in in_facs}:
        raise DimensionError(f"keep_in ids {sorted(keep_in_ids)} not among input factors")
    if not keep_out_ids <= {v for v, _ in out_facs}:
        raise DimensionError(f"keep_out ids {sorted(keep_out_ids)} not among output factors")
    d_in_full = math.prod(d for _, d in in_facs)
    d_out_full = math.prod(d for _, d in out_facs)
    if (psi.in_dim, psi.out_dim) != (d_in_full, d_out_full):
        raise DimensionError(
            f"map dims {psi.in_dim}->{psi.out_dim} do not match factor products "
            f"{d_in_full}->{d_out_full}"
        )
    d_kept_in = math.prod(d for v, d in in_facs if v in keep_in_ids)
    d_kept_out = math.prod(d for v, d in out_facs if v in keep_out_ids)
    out_dims = [d for _, d in out_facs]
    keep_out_positions = [i for i, (v, _) in enumerate(out_facs) if v in keep_out_ids]
    n = d_kept_in * d_kept_out
    c = mk.zeros(n)
    for i in range(d_kept_in):
        for j in range(d_kept_in):
            e_ij = mk.matrix_unit(d_kept_in, i, j)
            full = _fill_embed(e_ij, in_facs, keep_in_ids, normalized=(mode == "channel"))
            image = apply(psi, full)
            reduced = mk.partial_trace(image, out_dims, keep_out_positions)
            c[
                i * d_kept_out : (i + 1) * d_kept_out,
                j * d_kept_out : (j + 1) * d_kept_out,
            ] = reduced
    return kraus_from_choi(
        Superoperator(in_dim=d_kept_in, out_dim=d_kept_out, choi=c), tol
    )


# ---------------------------------------------------------------------------
# JSON wire format: {"in_dim": n, "out_dim": m, "kraus": [matrix, ...]}.
# ---------------------------------------------------------------------------


def channel_to_json(phi: KrausChannel) -> dict:
    return {
        "in_dim": int(phi.in_dim),
        "out_dim": int(phi.out_dim),
        "kraus": [mk.matrix_to_json(a) for a in phi.kraus],
    }


def channel_from_json(obj: dict) -> KrausChannel:
    try:
        in_dim = int(obj["in_dim"])
        out_dim = int(obj["out_dim"])
        kraus = tuple(mk.matrix_from_json(a) for a in obj["kraus"])
    except (KeyError, TypeError) as exc:
        raise InputFormatError(f"malformed channel object: {exc}") from exc
    return KrausChannel(in_dim=in_dim, out_dim=out_dim, kraus=kraus)
