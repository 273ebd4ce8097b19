"""Dense complex linear algebra for small multipartite systems.

Conventions used throughout the package:

- Matrices are 2-D ``numpy`` arrays of ``complex128`` in row-major order.
- Tensor products are Kronecker products with the *left* factor outermost,
  i.e. ``tensor(a, b)`` indexes basis states as ``|i_a, i_b> -> i_a * dim_b
  + i_b``.  All factor bookkeeping (partial traces, embeddings,
  permutations) follows this convention.
- Hermiticity and positivity are checked with a max-entry tolerance of
  1e-9; eigenvalues above -1e-9 count as nonnegative and are clipped to 0
  before taking square roots.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, InternalError, ValidationError

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9


def dagger(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def basis_vector(dim: int, index: int) -> np.ndarray:
    """Computational basis vector |index> of the given dimension."""
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    """Rank-one projector |v><v| (the vector is not normalized here)."""
    v = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the left factor's indices outermost."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def tensor_all(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of several factors, left to right."""
    out = np.asarray(ops[0], dtype=complex)
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out all tensor factors not listed in ``keep``.

    ``dims`` lists the factor dimensions of the square matrix ``m`` in
    tensor order; ``keep`` is a set of factor indices.  Kept factors retain
    their original relative order.  The trace of the result equals the
    trace of the input.
    """
    m = np.asarray(m, dtype=complex)
    dims = [int(d) for d in dims]
    n = len(dims)
    side = int(np.prod(dims))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError("partial_trace requires a square matrix")
    if m.shape[0] != side:
        raise DimensionError(
            f"partial_trace dims mismatch: product of dims {dims} is {side}, "
            f"matrix side is {m.shape[0]}"
        )
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} factors")
    arr = m.reshape(dims + dims)
    row_subs = list(range(n))
    col_subs = [n + i if i in keep else i for i in range(n)]
    out_subs = [i for i in keep] + [n + i for i in keep]
    kept_dim = int(np.prod([dims[i] for i in keep])) if keep else 1
    out = np.einsum(arr, row_subs + col_subs, out_subs)
    return out.reshape(kept_dim, kept_dim)


def hermitian_eig(m: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix.

    Returns ``(w, v)`` with real eigenvalues ``w`` in ascending order and
    unitary ``v`` whose columns are the eigenvectors, so that
    ``m = v @ diag(w) @ v.conj().T``.  Raises if the input deviates from
    Hermiticity by more than ``tol`` in max-entry norm.
    """
    m = np.asarray(m, dtype=complex)
    dev = float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0
    if dev > tol:
        raise ValidationError(
            f"matrix is not Hermitian within {tol:g} (max deviation {dev:.3e})"
        )
    w, v = np.linalg.eigh((m + dagger(m)) / 2.0)
    return w, v


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values; for Hermitian input the sum of |eigenvalues|."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError("trace_norm requires a square matrix")
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def psd_sqrt(m: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Positive square root of a PSD matrix (eigenvalues clipped at 0)."""
    w, v = hermitian_eig(m)
    if w.size and w.min() < -tol:
        raise ValidationError(
            f"matrix is not positive semidefinite within {tol:g} "
            f"(min eigenvalue {w.min():.3e})"
        )
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dagger(v)


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Uhlmann fidelity F(rho, sigma) = tr sqrt(sqrt(rho) sigma sqrt(rho)).

    Both arguments must be positive semidefinite (density operators in all
    intended uses); for pure states this reduces to |<a|b>|.
    """
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionError("fidelity requires operators of equal dimension")
    root = psd_sqrt(rho)
    inner = root @ sigma @ root
    w, _ = hermitian_eig(inner, tol=1e-7)
    if w.size and w.min() < -1e-7:
        raise ValidationError(
            f"matrix is not positive semidefinite within 1e-07 "
            f"(min eigenvalue {w.min():.3e})"
        )
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def complete_isometry(v: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Extend an isometry to a unitary whose first columns equal it.

    ``v`` must have orthonormal columns (``v.conj().T @ v = I`` within
    ``tol``).  The remaining columns are built by Gram-Schmidt against the
    standard basis, with one re-orthogonalization pass; given the fixed
    candidate order the result is deterministic.
    """
    v = np.asarray(v, dtype=complex)
    if v.ndim != 2 or v.shape[0] < v.shape[1]:
        raise ValidationError("isometry must have at least as many rows as columns")
    rows, cols = v.shape
    gram_dev = float(np.max(np.abs(dagger(v) @ v - np.eye(cols)))) if cols else 0.0
    if gram_dev > tol:
        raise ValidationError(
            f"columns are not orthonormal within {tol:g} (max deviation {gram_dev:.3e})"
        )
    basis = [v[:, j].copy() for j in range(cols)]
    for i in range(rows):
        if len(basis) == rows:
            break
        w = np.zeros(rows, dtype=complex)
        w[i] = 1.0
        for _ in range(2):  # Gram-Schmidt plus one re-orthogonalization pass
            for b in basis:
                w = w - b * np.vdot(b, w)
        norm = float(np.linalg.norm(w))
        if norm > 1e-6:
            basis.append(w / norm)
    if len(basis) != rows:  # pragma: no cover - cannot happen for valid input
        raise InternalError(
            f"isometry completion produced {len(basis)} of {rows} orthonormal columns"
        )
    return np.column_stack(basis)


def embed_factors(op: np.ndarray, positions: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Place an operator acting on a subset of tensor slots into the full space.

    ``dims`` are the dimensions of all tensor slots; ``op`` acts on the
    slots listed in ``positions`` *in that order* and is extended by the
    identity elsewhere.  Slots need not be adjacent.
    """
    dims = [int(d) for d in dims]
    positions = [int(p) for p in positions]
    n = len(dims)
    op = np.asarray(op, dtype=complex)
    sub = int(np.prod([dims[p] for p in positions])) if positions else 1
    if op.shape != (sub, sub):
        raise DimensionError(
            f"operator shape {op.shape} does not match slots {positions} of dims {dims}"
        )
    rest = [i for i in range(n) if i not in positions]
    full = np.kron(op, np.eye(int(np.prod([dims[i] for i in rest])) if rest else 1))
    order = positions + rest
    shaped = full.reshape([dims[i] for i in order] * 2)
    inv = np.argsort(order)
    axes = list(inv) + [n + i for i in inv]
    side = int(np.prod(dims))
    return shaped.transpose(axes).reshape(side, side)


def permute_vector_factors(vec: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor slots of a vector: new slot ``j`` is old slot ``order[j]``."""
    dims = [int(d) for d in dims]
    vec = np.asarray(vec, dtype=complex).reshape(dims)
    return vec.transpose(list(order)).reshape(-1)


def permutation_operator(dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Unitary relabeling basis |i_0,...> to slot order ``order`` (new <- old)."""
    dims = [int(d) for d in dims]
    side = int(np.prod(dims))
    eye = np.eye(side, dtype=complex)
    cols = [permute_vector_factors(eye[:, k], dims, order) for k in range(side)]
    return np.column_stack(cols)


def max_abs(m: np.ndarray) -> float:
    """Largest absolute entry (0 for empty input)."""
    return float(np.max(np.abs(m))) if np.asarray(m).size else 0.0
