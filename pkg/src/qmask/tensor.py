"""Dense linear algebra over multipartite tensor spaces.

Subsystems and basis states are indexed from zero. A multipartite space is
described by a tuple of local dimensions ``dims``; vectors and operators on it
are plain complex numpy arrays of side ``prod(dims)`` in the usual
lexicographic (row-major) ordering of basis labels.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

__all__ = [
    "DimensionError",
    "SchmidtResult",
    "as_dims",
    "kron",
    "kron_all",
    "permute_to_front",
    "permuted_dims",
    "permutation_matrix",
    "partial_trace",
    "partial_trace_vector",
    "schmidt_decompose",
    "random_pure_state",
    "random_isometry",
    "random_unitary",
    "random_density",
    "basis_vector",
    "is_isometry",
    "isometry_error",
]

DEFAULT_SVD_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when array shapes disagree with declared subsystem dimensions."""


def as_dims(dims: Sequence[int]) -> tuple[int, ...]:
    out = tuple(int(d) for d in dims)
    if not out:
        raise DimensionError("dims must name at least one subsystem")
    if any(d < 1 for d in out):
        raise DimensionError(f"subsystem dimensions must be positive, got {out}")
    return out


def _check_index(j: int, n: int) -> None:
    if not 0 <= j < n:
        raise DimensionError(f"subsystem index {j} out of range for {n} subsystems")


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product of two matrices (or vectors)."""
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(*ops: np.ndarray) -> np.ndarray:
    return reduce(np.kron, ops)


def basis_vector(dim: int, index: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def _front_order(n: int, j: int) -> list[int]:
    return [j] + [k for k in range(n) if k != j]


def permute_to_front(v: np.ndarray, dims: Sequence[int], j: int) -> np.ndarray:
    """Move tensor factor ``j`` of ``v`` to the first position.

    Maps ``|h_0 ... h_j ... h_{n-1}>`` to ``|h_j h_0 ... h_{j-1} h_{j+1} ...>``
    and extends linearly. Extra trailing axes of ``v`` (e.g. several columns
    stacked as a matrix) are carried along untouched.
    """
    dims = as_dims(dims)
    v = np.asarray(v)
    n = len(dims)
    _check_index(j, n)
    total = int(np.prod(dims))
    if v.shape[0] != total:
        raise DimensionError(f"vector of length {v.shape[0]} does not match dims {dims}")
    tail = v.shape[1:]
    t = v.reshape(dims + tail)
    order = _front_order(n, j) + list(range(n, n + len(tail)))
    return np.ascontiguousarray(t.transpose(order)).reshape((total,) + tail)


def permuted_dims(dims: Sequence[int], j: int) -> tuple[int, ...]:
    dims = as_dims(dims)
    _check_index(j, len(dims))
    return tuple(dims[k] for k in _front_order(len(dims), j))


def permutation_matrix(dims: Sequence[int], j: int) -> np.ndarray:
    """Dense unitary matrix of :func:`permute_to_front`."""
    total = int(np.prod(as_dims(dims)))
    return permute_to_front(np.eye(total, dtype=complex), dims, j)


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: int) -> np.ndarray:
    """Reduced operator on subsystem ``keep``, tracing out every other factor."""
    dims = as_dims(dims)
    rho = np.asarray(rho)
    n = len(dims)
    _check_index(keep, n)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionError(f"operator of shape {rho.shape} does not match dims {dims}")
    dk = dims[keep]
    t = rho.reshape(dims + dims)
    # bring keep to front on both row and column axes, then flatten the rest
    row = _front_order(n, keep)
    col = [n + k for k in row]
    t = t.transpose(row + col).reshape(dk, total // dk, dk, total // dk)
    return np.einsum("arbr->ab", t)


def partial_trace_vector(v: np.ndarray, dims: Sequence[int], keep: int, w: np.ndarray | None = None) -> np.ndarray:
    """``partial_trace(|v><w|)`` computed without forming the outer product."""
    dims = as_dims(dims)
    w = v if w is None else w
    dk = dims[keep]
    a = permute_to_front(v, dims, keep).reshape(dk, -1)
    b = permute_to_front(w, dims, keep).reshape(dk, -1)
    return a @ b.conj().T


@dataclass(frozen=True)
class SchmidtResult:
    coefficients: np.ndarray
    left_vectors: np.ndarray  # columns
    right_vectors: np.ndarray  # columns
    rank: int

    def reconstruct(self) -> np.ndarray:
        left, right = self.left_vectors, self.right_vectors
        return np.einsum("i,ai,bi->ab", self.coefficients, left, right).reshape(-1)


def schmidt_decompose(v: np.ndarray, left_dim: int, right_dim: int, tol: float = DEFAULT_SVD_TOL) -> SchmidtResult:
    """Schmidt decomposition of ``v`` across a ``left_dim | right_dim`` cut.

    Returns all ``min(left_dim, right_dim)`` singular values in non-increasing
    order; ``rank`` counts those above ``tol``.
    """
    v = np.asarray(v)
    if v.ndim != 1 or v.shape[0] != left_dim * right_dim:
        raise DimensionError(f"vector of shape {v.shape} does not factor as {left_dim} x {right_dim}")
    u, s, vh = np.linalg.svd(v.reshape(left_dim, right_dim), full_matrices=False)
    return SchmidtResult(
        coefficients=s,
        left_vectors=u,
        right_vectors=vh.T,
        rank=int(np.sum(s > tol)),
    )


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_pure_state(dim: int, seed=None) -> np.ndarray:
    """Haar-random unit vector; deterministic for an integer seed."""
    if dim < 1:
        raise DimensionError("dim must be positive")
    v = _complex_gaussian(_rng(seed), dim)
    return v / np.linalg.norm(v)


def random_isometry(rows: int, cols: int, seed=None) -> np.ndarray:
    """Haar-random isometry (orthonormal columns) via QR with phase fix."""
    if cols > rows:
        raise DimensionError(f"no isometry from C^{cols} into C^{rows}")
    q, r = np.linalg.qr(_complex_gaussian(_rng(seed), (rows, cols)))
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_unitary(dim: int, seed=None) -> np.ndarray:
    return random_isometry(dim, dim, seed)


def random_density(dim: int, seed=None, rank: int | None = None) -> np.ndarray:
    rng = _rng(seed)
    g = _complex_gaussian(rng, (dim, rank or dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def isometry_error(s: np.ndarray) -> float:
    s = np.asarray(s)
    return float(np.linalg.norm(s.conj().T @ s - np.eye(s.shape[1])))


def is_isometry(s: np.ndarray, tol: float = 1e-10) -> bool:
    return isometry_error(s) <= tol
