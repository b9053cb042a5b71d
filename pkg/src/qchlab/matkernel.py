"""Dense complex linear algebra kernel.

Everything downstream (channels, generated algebras, axiom checks) runs on plain
``numpy.ndarray`` matrices with ``complex128`` entries.  This module owns the
pieces that the rest of the package is not allowed to outsource: the cyclic
Jacobi Hermitian eigensolver, tensor/partial-trace index bookkeeping, and
orthonormal matrix subspaces under the Frobenius inner product.

Conventions:
  * matrices are row-major, indices zero-based;
  * ``tensor`` follows the Kronecker convention
    ``(i*rowsB + k, j*colsB + l) -> A[i, j] * B[k, l]``;
  * matrix equality means Frobenius distance below an absolute tolerance,
    1e-10 unless stated otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceError, DimensionError, NotHermitianError

DEFAULT_EQ_TOL = 1e-10
SPAN_DROP_TOL = 1e-10
CONTAINS_TOL = 1e-8
JACOBI_REL_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def as_matrix(data) -> np.ndarray:
    """Coerce to a 2-D complex128 array (copying only when needed)."""
    m = np.asarray(data, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={m.ndim}")
    return m


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def zeros(rows: int, cols: int | None = None) -> np.ndarray:
    return np.zeros((rows, cols if cols is not None else rows), dtype=np.complex128)


def matrix_unit(n: int, i: int, j: int, m: int | None = None) -> np.ndarray:
    """E_ij inside an n x m (default square) matrix."""
    e = zeros(n, m)
    e[i, j] = 1.0
    return e


def adjoint(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def frobenius_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m))


def frobenius_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product trace(a† b), conjugate-linear in the first slot."""
    return complex(np.vdot(a, b))


def matrices_equal(a: np.ndarray, b: np.ndarray, tol: float = DEFAULT_EQ_TOL) -> bool:
    if a.shape != b.shape:
        return False
    return frobenius_norm(a - b) < tol


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the row-major index convention."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def tensor_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Left-to-right Kronecker chain; empty input gives the 1x1 identity."""
    out = identity(1)
    for m in mats:
        out = tensor(out, m)
    return out


def permute_factors(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of a square matrix on ``⊗_i C^dims[i]``.

    ``perm[p] = s`` places source factor ``s`` at output position ``p``.
    """
    k = len(dims)
    if sorted(perm) != list(range(k)):
        raise DimensionError(f"invalid factor permutation {perm!r}")
    total = math.prod(dims)
    if m.shape != (total, total):
        raise DimensionError(f"matrix shape {m.shape} does not match factors {tuple(dims)}")
    t = m.reshape(tuple(dims) + tuple(dims))
    axes = list(perm) + [k + p for p in perm]
    return t.transpose(axes).reshape(total, total)


def partial_trace(m: np.ndarray, factor_dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every tensor factor not listed in ``keep``.

    Kept factors stay in their original relative order.  ``keep`` may be empty,
    in which case the result is the 1x1 matrix [[trace(m)]].
    """
    dims = [int(d) for d in factor_dims]
    total = math.prod(dims)
    m = as_matrix(m)
    if m.shape != (total, total):
        raise DimensionError(
            f"matrix shape {m.shape} does not match factor dims {tuple(dims)}"
        )
    keep_set = set(int(i) for i in keep)
    if not all(0 <= i < len(dims) for i in keep_set):
        raise DimensionError(f"keep indices {sorted(keep_set)} out of range for {len(dims)} factors")
    k = len(dims)
    t = m.reshape(tuple(dims) + tuple(dims))
    # Trace dropped factors pairwise, highest index first so positions stay valid.
    dropped = sorted((i for i in range(k) if i not in keep_set), reverse=True)
    n_left = k
    for i in dropped:
        t = np.trace(t, axis1=i, axis2=i + n_left)
        n_left -= 1
    kept_dim = math.prod(dims[i] for i in sorted(keep_set)) if keep_set else 1
    return np.asarray(t, dtype=np.complex128).reshape(kept_dim, kept_dim)


def is_hermitian(m: np.ndarray, tol: float = DEFAULT_EQ_TOL) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    return frobenius_norm(m - adjoint(m)) <= tol * max(1.0, frobenius_norm(m))


def hermitian_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix by the cyclic Jacobi method.

    Returns ``(w, v)`` with eigenvalues ``w`` ascending and orthonormal
    eigenvector columns ``v`` such that ``m @ v ≈ v @ diag(w)``.  Convergence:
    off-diagonal Frobenius norm below ``1e-12 * ||m||_F``.  Deterministic —
    identical input bits give identical output bits.
    """
    a = as_matrix(m).copy()
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"eigensolver needs a square matrix, got {a.shape}")
    # Work on the Hermitian part; callers check Hermiticity at their own tolerance.
    a = 0.5 * (a + adjoint(a))
    v = identity(n)
    norm = frobenius_norm(a)
    if n == 1 or norm == 0.0:
        return np.real(np.diag(a)).copy(), v
    threshold = JACOBI_REL_TOL * norm
    for _ in range(JACOBI_MAX_SWEEPS):
        strict = a.copy()
        np.fill_diagonal(strict, 0.0)
        off = frobenius_norm(strict)
        if off < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= threshold / n:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = (t * c) * (apq / r)  # complex phase of the pivot
                # Rotate columns: new_p = c*col_p - conj(s)*col_q, new_q = s*col_p + c*col_q.
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - np.conj(s) * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = np.conj(s) * row_p + c * row_q
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - np.conj(s) * vq
                v[:, q] = s * vp + c * vq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    else:
        raise ConvergenceError(
            f"Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps (n={n})"
        )
    w = np.real(np.diag(a)).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def min_eigenvalue(m: np.ndarray) -> float:
    w, _ = hermitian_eig(m)
    return float(w[0])


def is_psd(m: np.ndarray, tol: float = 1e-9) -> bool:
    """Positive semidefiniteness: min eigenvalue >= -tol.

    Raises NotHermitianError when ``m`` is not Hermitian within ``tol``.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"PSD test needs a square matrix, got {m.shape}")
    if frobenius_norm(m - adjoint(m)) > tol * max(1.0, frobenius_norm(m)):
        raise NotHermitianError(
            f"matrix is not Hermitian within tol={tol:g} "
            f"(defect {frobenius_norm(m - adjoint(m)):.3e})"
        )
    return min_eigenvalue(m) >= -tol


def psd_defect(m: np.ndarray) -> float:
    """How far below zero the spectrum dips: max(0, -lambda_min) of the Hermitian part."""
    return max(0.0, -min_eigenvalue(0.5 * (m + adjoint(m))))


@dataclass(frozen=True)
class MatrixSubspace:
    """A linear subspace of D x D matrices with an orthonormal Frobenius basis."""

    ambient_dim: int
    basis: tuple[np.ndarray, ...]
    _stack: np.ndarray = field(repr=False, compare=False, default=None)  # (dim, D*D) vecs

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return len(self.basis)

    def _vecs(self) -> np.ndarray:
        if self._stack is not None:
            return self._stack
        d = self.ambient_dim
        stack = (
            np.stack([b.reshape(d * d) for b in self.basis])
            if self.basis
            else np.zeros((0, d * d), dtype=np.complex128)
        )
        object.__setattr__(self, "_stack", stack)
        return stack

    def project(self, m: np.ndarray) -> np.ndarray:
        d = self.ambient_dim
        if m.shape != (d, d):
            raise DimensionError(f"expected a {d}x{d} matrix, got {m.shape}")
        if not self.basis:
            return zeros(d)
        v = m.reshape(d * d)
        coeffs = self._vecs().conj() @ v
        return (coeffs @ self._vecs()).reshape(d, d)

    def residual(self, m: np.ndarray) -> float:
        """Frobenius norm of the component of ``m`` orthogonal to the subspace."""
        return frobenius_norm(m - self.project(m))

    def contains(self, m: np.ndarray, tol: float = CONTAINS_TOL) -> bool:
        return self.residual(m) < tol * max(1.0, frobenius_norm(m))

    def gram(self) -> np.ndarray:
        vecs = self._vecs()
        return vecs.conj() @ vecs.T


def span_basis(mats: Sequence[np.ndarray], drop_tol: float = SPAN_DROP_TOL) -> MatrixSubspace:
    """Orthonormal basis of the complex span, via modified Gram-Schmidt.

    Candidates whose residual norm after projection falls below ``drop_tol``
    are discarded.  A second orthogonalization pass keeps the Gram matrix at
    identity to ~1e-14 even for nearly dependent inputs.  Empty input yields
    the zero subspace (ambient dimension 0).
    """
    mats = [as_matrix(m) for m in mats]
    if not mats:
        return MatrixSubspace(ambient_dim=0, basis=())
    d = mats[0].shape[0]
    for m in mats:
        if m.shape != (d, d):
            raise DimensionError(f"span_basis needs same-shape square matrices, got {m.shape}")
    basis_vecs: list[np.ndarray] = []
    stack = np.zeros((0, d * d), dtype=np.complex128)
    for m in mats:
        v = m.reshape(d * d).copy()
        for _ in range(2):  # two MGS passes for orthogonality to working precision
            if len(basis_vecs):
                v = v - (stack.conj() @ v) @ stack
        norm = np.linalg.norm(v)
        if norm < drop_tol:
            continue
        v = v / norm
        basis_vecs.append(v)
        stack = np.vstack([stack, v[None, :]])
    basis = tuple(v.reshape(d, d) for v in basis_vecs)
    return MatrixSubspace(ambient_dim=d, basis=basis, _stack=stack)


def subspace_contains(s: MatrixSubspace, m: np.ndarray, tol: float = CONTAINS_TOL) -> bool:
    """True iff the projection residual is below ``tol * max(1, ||m||_F)``."""
    return s.contains(m, tol)


def containment_residual(inner: MatrixSubspace, outer: MatrixSubspace) -> float:
    """Worst projection residual of inner basis elements against the outer subspace."""
    if not inner.basis:
        return 0.0
    return max(outer.residual(b) for b in inner.basis)


# ---------------------------------------------------------------------------
# JSON wire format: {"rows": n, "cols": m, "data": [[re, im], ...]} row-major.
# ---------------------------------------------------------------------------


def matrix_to_json(m: np.ndarray) -> dict:
    m = as_matrix(m)
    rows, cols = m.shape
    flat = m.reshape(rows * cols)
    return {
        "rows": int(rows),
        "cols": int(cols),
        "data": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows = int(obj["rows"])
        cols = int(obj["cols"])
        data = obj["data"]
    except (KeyError, TypeError) as exc:
        raise DimensionError(f"malformed matrix object: {exc}") from exc
    if rows <= 0 or cols <= 0:
        raise DimensionError(f"matrix dims must be positive, got {rows}x{cols}")
    if len(data) != rows * cols:
        raise DimensionError(
            f"matrix data length {len(data)} does not match {rows}x{cols}"
        )
    flat = np.array([complex(re, im) for re, im in data], dtype=np.complex128)
    return flat.reshape(rows, cols)
