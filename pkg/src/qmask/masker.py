"""Masker isometries built from orthogonal Latin squares and their extensions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidMols, NotIsometric
from .mols import MolsPair, mols_pair, verify_mols
from .tensor import (
    DimensionError,
    as_dims,
    basis_vector,
    isometry_error,
    kron_all,
    partial_trace,
)

ISOMETRY_TOL = 1e-10

PROVENANCES = ("latin", "embedded", "extended", "dilation-restricted", "user")


@dataclass(frozen=True, eq=False)
class Masker:
    """An isometry from C^K into the multipartite space ``dims``.

    ``matrix`` has shape ``(prod(dims), input_dim)``; column ``i`` is the
    image of basis state ``|i>``.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]
    provenance: str = "user"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dims = as_dims(self.dims)
        if m.ndim != 2 or m.shape[0] != int(np.prod(dims)):
            raise DimensionError(f"matrix of shape {m.shape} does not map into dims {dims}")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        err = isometry_error(m)
        if err > ISOMETRY_TOL:
            raise NotIsometric(f"masker matrix is not an isometry (|S^dag S - I|_F = {err:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def input_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def n(self) -> int:
        return len(self.dims)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi)
        if psi.shape[0] != self.input_dim:
            raise DimensionError(f"state of length {psi.shape[0]} does not match input dimension {self.input_dim}")
        return self.matrix @ psi

    def marginals(self, psi: np.ndarray) -> list[np.ndarray]:
        out = self.apply(psi)
        rho = np.outer(out, out.conj())
        return [partial_trace(rho, self.dims, j) for j in range(self.n)]


def latin_masker(d: int, pair: MolsPair | None = None) -> Masker:
    """Masker of C^d into (C^d)^{⊗3} from an orthogonal pair (V, W).

    Column ``j`` is ``d**-0.5 * sum_k |k>|V[j,k]>|W[j,k]>``. Without an explicit
    pair, :func:`qmask.mols.mols_pair` supplies one.
    """
    if pair is None:
        pair = mols_pair(d)
    if pair.order != d:
        raise InvalidMols(f"pair has order {pair.order}, expected {d}")
    ok, why = verify_mols(pair)
    if not ok:
        raise InvalidMols(why)
    v, w = pair.first.cells, pair.second.cells
    s = np.zeros((d**3, d), dtype=complex)
    k = np.arange(d)
    for j in range(d):
        s[k * d * d + v[j] * d + w[j], j] = 1 / np.sqrt(d)
    return Masker(s, (d, d, d), "latin", {"d": d})


def embed_iso(k: int, m: int) -> np.ndarray:
    """Canonical embedding C^k -> C^m, ``|x> -> |x> ⊕ 0``."""
    if k > m:
        raise DimensionError(f"cannot embed C^{k} into C^{m}")
    return np.eye(m, k, dtype=complex)


def tilde_masker(d: int, pair: MolsPair | None = None) -> Masker:
    """Masker of C^d into (C^{d+1})^{⊗3}.

    For d != 5 this is ``S_{d+1} J`` with J the embedding C^d -> C^{d+1}; for
    d = 5, where no order-6 pair exists, it is ``(J ⊗ J ⊗ J) S_5``. ``pair``
    overrides the order-(d+1) squares (order 5 squares for d = 5).
    """
    if d < 2:
        raise ValueError(f"d must be at least 2, got {d}")
    if d == 5:
        base = latin_masker(5, pair)
        j = embed_iso(5, 6)
        mat = kron_all(j, j, j) @ base.matrix
    else:
        base = latin_masker(d + 1, pair)
        mat = base.matrix @ embed_iso(d, d + 1)
    return Masker(mat, (d + 1,) * 3, "embedded", {"d": d})


def _check_isometry(name: str, a: np.ndarray) -> None:
    err = isometry_error(a)
    if err > ISOMETRY_TOL:
        raise NotIsometric(f"{name} is not an isometry (|A^dag A - I|_F = {err:.3e})")


def dimension_extension(
    base: Masker,
    targets: Sequence[int],
    u: np.ndarray | None = None,
    v: Sequence[np.ndarray | None] | None = None,
) -> Masker:
    """Compose ``(V_1 ⊗ V_2 ⊗ V_3) S U`` into larger local spaces ``targets``.

    ``u`` is a unitary on the input space; each ``v[k]`` an isometry from
    ``base.dims[k]`` into ``targets[k]``. Missing factors default to the
    identity and the canonical embedding respectively.
    """
    targets = as_dims(targets)
    if base.n != 3 or len(targets) != 3:
        raise DimensionError("dimension extension needs a tripartite base and three targets")
    k_in = base.input_dim
    u = np.eye(k_in, dtype=complex) if u is None else np.asarray(u, dtype=complex)
    if u.shape != (k_in, k_in):
        raise DimensionError(f"u must be {k_in}x{k_in}, got {u.shape}")
    _check_isometry("u", u)
    v = list(v) if v is not None else [None, None, None]
    if len(v) != 3:
        raise DimensionError("expected three local isometries")
    factors = []
    for k, (vk, dk, tk) in enumerate(zip(v, base.dims, targets)):
        vk = embed_iso(dk, tk) if vk is None else np.asarray(vk, dtype=complex)
        if vk.shape != (tk, dk):
            raise DimensionError(f"v[{k}] must be {tk}x{dk}, got {vk.shape}")
        _check_isometry(f"v[{k}]", vk)
        factors.append(vk)
    mat = kron_all(*factors) @ base.matrix @ u
    return Masker(mat, targets, "extended", {"base": base.provenance})


def participant_extension(base: Masker, ancillas: Sequence[np.ndarray]) -> Masker:
    """Append fixed pure ancillas: ``|psi> -> S|psi> ⊗ |e_1> ⊗ ...``."""
    if not ancillas:
        return base
    vecs = []
    for i, e in enumerate(ancillas):
        e = np.asarray(e, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(e) - 1) > 1e-12:
            raise ValueError(f"ancilla {i} is not normalized")
        vecs.append(e)
    tail = kron_all(*vecs)
    mat = np.kron(base.matrix, tail[:, None])
    dims = base.dims + tuple(len(e) for e in vecs)
    return Masker(mat, dims, "extended", {"base": base.provenance, "ancillas": len(vecs)})


def _complete_basis(a: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``ran(a)``, seeded."""
    n, k = a.shape
    if k == n:
        return np.zeros((n, 0), dtype=complex)
    g = rng.standard_normal((n, n - k)) + 1j * rng.standard_normal((n, n - k))
    # two rounds of projection keep the result orthogonal to working precision
    for _ in range(2):
        g = g - a @ (a.conj().T @ g)
    q, _ = np.linalg.qr(g)
    q = q - a @ (a.conj().T @ q)
    q, _ = np.linalg.qr(q)
    return q


def unitary_dilation(
    s: Masker,
    j_embed: np.ndarray | None = None,
    b: np.ndarray | None = None,
    seed: int = 0,
) -> np.ndarray:
    """Unitary ``U`` on the full space with ``U (J|psi> ⊗ |b>) = S|psi>``.

    ``J`` maps the input space into the first subsystem (default: canonical
    embedding) and ``b`` is a unit vector on the remaining subsystems
    (default: ``|0...0>``). The block on the orthogonal complements is
    matched column by column after seeded basis completion.
    """
    d1 = s.dims[0]
    k_in = s.input_dim
    if k_in > d1:
        raise DimensionError(f"input dimension {k_in} exceeds first subsystem dimension {d1}")
    j_embed = embed_iso(k_in, d1) if j_embed is None else np.asarray(j_embed, dtype=complex)
    if j_embed.shape != (d1, k_in):
        raise DimensionError(f"J must be {d1}x{k_in}, got {j_embed.shape}")
    _check_isometry("J", j_embed)
    rest = int(np.prod(s.dims[1:]))
    b = basis_vector(rest, 0) if b is None else np.asarray(b, dtype=complex).reshape(-1)
    if b.shape != (rest,):
        raise DimensionError(f"ancilla must have length {rest}")
    if abs(np.linalg.norm(b) - 1) > 1e-12:
        raise ValueError("ancilla state is not normalized")
    domain = np.kron(j_embed, b[:, None])
    rng = np.random.default_rng(seed)
    domain_c = _complete_basis(domain, rng)
    range_c = _complete_basis(s.matrix, rng)
    left = np.hstack([s.matrix, range_c])
    right = np.hstack([domain, domain_c])
    return left @ right.conj().T


def mask_density(s: Masker, sigma: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """``S sigma S^dag`` for a density operator ``sigma`` on the input space."""
    sigma = np.asarray(sigma, dtype=complex)
    k = s.input_dim
    if sigma.shape != (k, k):
        raise DimensionError(f"density operator must be {k}x{k}, got {sigma.shape}")
    if np.linalg.norm(sigma - sigma.conj().T) > tol:
        raise ValueError("density operator is not Hermitian")
    if abs(np.trace(sigma) - 1) > tol:
        raise ValueError(f"density operator has trace {np.trace(sigma).real:.6g}, expected 1")
    if np.linalg.eigvalsh(sigma).min() < -tol:
        raise ValueError("density operator is not positive semidefinite")
    return s.matrix @ sigma @ s.matrix.conj().T


def product_encoder(k: int, dims: Sequence[int]) -> Masker:
    """``|i> -> |i>|0>...|0>``, the canonical non-masking isometry."""
    dims = as_dims(dims)
    if k > dims[0]:
        raise DimensionError("input dimension exceeds first subsystem")
    rest = int(np.prod(dims[1:]))
    return Masker(np.kron(embed_iso(k, dims[0]), basis_vector(rest, 0)[:, None]), dims, "user", {"name": "product"})
