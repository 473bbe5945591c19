"""One-erasure channels, Knill-Laflamme recovery and round-trip fidelity."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import KLViolated
from .tensor import (
    DimensionError,
    as_dims,
    permute_to_front,
    permuted_dims,
    random_pure_state,
)

COMPLETENESS_TOL = 1e-10
OVERLAP_TOL = 1e-10


def _move_front_inverse(t: np.ndarray, dims: tuple[int, ...], j: int) -> np.ndarray:
    """Inverse of ``permute_to_front`` on the leading axis."""
    n = len(dims)
    pd = permuted_dims(dims, j)
    tail = t.shape[1:]
    x = t.reshape(pd + tail)
    # axis 0 holds factor j; factors < j sit at 1..j, factors > j stay put
    order = list(range(1, j + 1)) + [0] + list(range(j + 1, n)) + list(range(n, n + len(tail)))
    return np.ascontiguousarray(x.transpose(order)).reshape(t.shape)


@dataclass(frozen=True, eq=False)
class ErasureOperator:
    """``A`` acting on subsystem ``j`` and the identity everywhere else."""

    dims: tuple[int, ...]
    j: int
    local: np.ndarray

    def __post_init__(self):
        dims = as_dims(self.dims)
        local = np.asarray(self.local, dtype=complex)
        if not 0 <= self.j < len(dims):
            raise DimensionError(f"subsystem index {self.j} out of range")
        if local.shape != (dims[self.j], dims[self.j]):
            raise DimensionError(f"local operator must be {dims[self.j]}x{dims[self.j]}, got {local.shape}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "local", local)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def apply(self, vecs: np.ndarray) -> np.ndarray:
        """Apply to a vector or to the columns of a matrix without densifying."""
        vecs = np.asarray(vecs)
        t = permute_to_front(vecs, self.dims, self.j)
        dj = self.dims[self.j]
        t = t.reshape((dj, -1) + vecs.shape[1:])
        t = np.tensordot(self.local, t, axes=(1, 0)).reshape(vecs.shape)
        return _move_front_inverse(t, self.dims, self.j)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense global operator; memory grows as ``prod(dims)**2``."""
        return self.apply(np.eye(self.size, dtype=complex))

    def adjoint(self) -> "ErasureOperator":
        return ErasureOperator(self.dims, self.j, self.local.conj().T)


def erasure_operator_basis(dims: Sequence[int], j: int) -> list[ErasureOperator]:
    """The ``d_j**2`` matrix units ``|i><k|`` on subsystem ``j``, in row-major ``(i, k)`` order."""
    dims = as_dims(dims)
    if not 0 <= j < len(dims):
        raise DimensionError(f"subsystem index {j} out of range")
    dj = dims[j]
    out = []
    for i in range(dj):
        for k in range(dj):
            unit = np.zeros((dj, dj), dtype=complex)
            unit[i, k] = 1
            out.append(ErasureOperator(dims, j, unit))
    return out


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus: tuple[np.ndarray, ...]
    dims: tuple[int, ...]
    j: int | None = None
    name: str = "custom"

    def __post_init__(self):
        dims = as_dims(self.dims)
        size = int(np.prod(dims))
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        for i, k in enumerate(ops):
            if k.shape != (size, size):
                raise DimensionError(f"Kraus operator {i} has shape {k.shape}, expected {(size, size)}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "kraus", ops)
        err = self.completeness_error()
        if err > COMPLETENESS_TOL:
            raise ValueError(f"Kraus operators are not trace preserving (|sum E^dag E - I|_F = {err:.3e})")

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def completeness_error(self) -> float:
        total = sum(k.conj().T @ k for k in self.kraus)
        return float(np.linalg.norm(total - np.eye(self.size)))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def apply_pure(self, v: np.ndarray) -> np.ndarray:
        """Unnormalized output branches ``E_k |v>`` as rows."""
        return np.stack([k @ v for k in self.kraus])

    def then(self, other: "KrausChannel") -> "KrausChannel":
        """Channel applying ``self`` first and ``other`` second."""
        ops = tuple(b @ a for b in other.kraus for a in self.kraus)
        return KrausChannel(ops, self.dims, None, f"{self.name}+{other.name}")


def identity_channel(dims: Sequence[int]) -> KrausChannel:
    dims = as_dims(dims)
    return KrausChannel((np.eye(int(np.prod(dims)), dtype=complex),), dims, None, "identity")


def reset_channel(dims: Sequence[int], j: int) -> KrausChannel:
    """Reset subsystem ``j`` to ``|0>``: Kraus operators ``|0><k|`` on ``j``."""
    dims = as_dims(dims)
    dj = dims[j]
    ops = []
    for k in range(dj):
        unit = np.zeros((dj, dj), dtype=complex)
        unit[0, k] = 1
        ops.append(ErasureOperator(dims, j, unit).matrix)
    return KrausChannel(tuple(ops), dims, j, "reset")


def depolarize_channel(dims: Sequence[int], j: int) -> KrausChannel:
    """Replace subsystem ``j`` by the maximally mixed state."""
    dims = as_dims(dims)
    dj = dims[j]
    ops = tuple(e.matrix / np.sqrt(dj) for e in erasure_operator_basis(dims, j))
    return KrausChannel(ops, dims, j, "depolarize")


def is_one_erasure(ch: KrausChannel, j: int, tol: float = 1e-10) -> bool:
    """True iff every Kraus operator factors as ``A ⊗ I`` with ``A`` on subsystem ``j``."""
    dims = ch.dims
    if not 0 <= j < len(dims):
        raise DimensionError(f"subsystem index {j} out of range")
    dj = dims[j]
    rest = ch.size // dj
    for k in ch.kraus:
        # conjugate by the front permutation on both sides
        t = permute_to_front(k, dims, j)
        t = permute_to_front(t.T, dims, j).T
        t = t.reshape(dj, rest, dj, rest)
        a = np.einsum("arbr->ab", t) / rest
        if np.linalg.norm(t - np.einsum("ab,rs->arbs", a, np.eye(rest))) > tol:
            return False
    return True


@dataclass(frozen=True, eq=False)
class CodeSubspace:
    """Subspace spanned by the orthonormal columns of ``basis``."""

    dims: tuple[int, ...]
    basis: np.ndarray

    def __post_init__(self):
        dims = as_dims(self.dims)
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim != 2 or basis.shape[0] != int(np.prod(dims)):
            raise DimensionError(f"basis of shape {basis.shape} does not live in dims {dims}")
        if basis.shape[1] == 0:
            raise ValueError("code subspace must be non-zero")
        err = np.linalg.norm(basis.conj().T @ basis - np.eye(basis.shape[1]))
        if err > 1e-10:
            raise ValueError(f"code basis is not orthonormal (deviation {err:.3e})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def from_masker(cls, s) -> "CodeSubspace":
        return cls(s.dims, s.matrix)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def random_state(self, seed=None) -> np.ndarray:
        return self.basis @ random_pure_state(self.dim, seed)


@dataclass(frozen=True, eq=False)
class RecoveryMap:
    kraus: tuple[np.ndarray, ...]
    code: CodeSubspace
    corrected: int

    def completeness_error(self) -> float:
        total = sum(r.conj().T @ r for r in self.kraus)
        return float(np.linalg.norm(total - np.eye(total.shape[0])))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(r @ rho @ r.conj().T for r in self.kraus)


def identity_recovery(code: CodeSubspace) -> RecoveryMap:
    size = code.basis.shape[0]
    return RecoveryMap((np.eye(size, dtype=complex),), code, 1)


def kl_recovery(code: CodeSubspace, ch: KrausChannel, tol: float = 1e-8) -> RecoveryMap:
    """Recovery channel for ``ch`` on ``code`` from the Knill-Laflamme conditions.

    The overlap matrix ``lam[k, l] = <c|E_k^dag E_l|c>`` (constant over code
    basis states ``c``) is diagonalized; each nonzero eigen-direction gives
    an error ``F_m`` mapping the code onto a subspace orthogonal to the
    others, undone by ``R_m = P F_m^dag / sqrt(d_m)``. Whatever those
    subspaces miss is sent to the first code basis state.
    """
    c = code.basis
    kdim = code.dim
    if ch.size != c.shape[0]:
        raise DimensionError("channel and code live in different spaces")
    images = np.stack([e @ c for e in ch.kraus])  # (m, N, K)
    m = len(images)
    # overlaps[k, l] = C^dag E_k^dag E_l C
    overlaps = np.einsum("kna,lnb->klab", images.conj(), images)
    lam = np.trace(overlaps, axis1=2, axis2=3) / kdim
    dev = overlaps - lam[:, :, None, None] * np.eye(kdim)
    worst = float(np.max(np.linalg.norm(dev, axis=(2, 3)))) if m else 0.0
    if worst > tol:
        raise KLViolated(f"Knill-Laflamme conditions fail: worst deviation {worst:.3e} > {tol:g}")
    lam = (lam + lam.conj().T) / 2
    evals, evecs = np.linalg.eigh(lam)
    kraus = []
    proj_sum = np.zeros((c.shape[0], c.shape[0]), dtype=complex)
    for idx in np.argsort(evals)[::-1]:
        d_m = evals[idx]
        if d_m <= OVERLAP_TOL:
            continue
        f_code = np.tensordot(evecs[:, idx], images, axes=(0, 0)) / np.sqrt(d_m)  # F_m C / sqrt(d_m)
        kraus.append(c @ f_code.conj().T)
        proj_sum += f_code @ f_code.conj().T
    corrected = len(kraus)
    rest = np.eye(c.shape[0]) - proj_sum
    w, v = np.linalg.eigh((rest + rest.conj().T) / 2)
    anchor = c[:, 0]
    for val, vec in zip(w, v.T):
        if val > 0.5:
            kraus.append(np.outer(anchor, vec.conj()))
    return RecoveryMap(tuple(kraus), code, corrected)


@dataclass(frozen=True)
class FidelityStats:
    worst: float
    mean: float
    samples: int
    values: np.ndarray | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {"worst": self.worst, "mean": self.mean, "samples": self.samples}


def roundtrip_fidelity(
    code: CodeSubspace,
    ch: KrausChannel,
    rec: RecoveryMap,
    samples: int = 100,
    seed: int = 0,
) -> FidelityStats:
    """Worst and mean ``<v|R(E(|v><v|))|v>`` over seeded random code states."""
    rng = np.random.default_rng(seed)
    fids = np.empty(samples)
    rec_ops = np.stack(rec.kraus)
    for t in range(samples):
        v = code.random_state(rng)
        branches = ch.apply_pure(v)  # (m, N)
        # amplitudes <v| R_r E_k |v> = (R_r^dag v)^dag (E_k v)
        pulled = np.einsum("rnm,n->rm", rec_ops.conj(), v)
        amps = pulled.conj() @ branches.T
        fids[t] = float(np.sum(np.abs(amps) ** 2))
    return FidelityStats(float(fids.min()), float(fids.mean()), samples, fids)
