"""Masking and one-erasure correction checks for a given operator.

Every check returns a report carrying the worst observed deviation next to
the verdict, so callers can see how close a failing or passing case was.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .erasure import CodeSubspace, erasure_operator_basis
from .errors import CoefficientMismatch, DisagreementAtTolerance
from .masker import Masker
from .tensor import (
    DimensionError,
    partial_trace_vector,
    permute_to_front,
    random_pure_state,
    schmidt_decompose,
)

DEFAULT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class StateSet:
    """Normalized pure states of the input space, stored as rows."""

    states: np.ndarray
    label: str = ""

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=complex))
        norms = np.linalg.norm(states, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1) > 1e-12)
        if bad.size:
            raise ValueError(f"state {bad[0]} is not normalized (norm {norms[bad[0]]:.15g})")
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return self.states.shape[0]

    def __iter__(self):
        return iter(self.states)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @classmethod
    def computational_basis(cls, k: int) -> "StateSet":
        return cls(np.eye(k, dtype=complex), "basis")

    @classmethod
    def random(cls, k: int, count: int, seed=None) -> "StateSet":
        rng = np.random.default_rng(seed)
        return cls(np.stack([random_pure_state(k, rng) for _ in range(count)]), f"random[{count}]")

    @classmethod
    def polarization(cls, psi1: np.ndarray, psi2: np.ndarray) -> "StateSet":
        """``{psi1, psi2, (psi1 + psi2)/sqrt2, (psi1 - i psi2)/sqrt2}`` for orthonormal psi1, psi2."""
        psi1 = np.asarray(psi1, dtype=complex)
        psi2 = np.asarray(psi2, dtype=complex)
        if abs(np.vdot(psi1, psi2)) > 1e-10:
            raise ValueError("polarization set needs orthogonal states")
        r = 1 / np.sqrt(2)
        return cls(np.stack([psi1, psi2, r * (psi1 + psi2), r * (psi1 - 1j * psi2)]), "polarization")


@dataclass(frozen=True, eq=False)
class MaskingReport:
    marginals: list[np.ndarray]
    deviations: np.ndarray  # worst per subsystem
    tol: float
    samples: int
    deterministic: bool = False
    pairwise: np.ndarray | None = None  # all-pairs worst per subsystem, diagnostic only

    @property
    def worst(self) -> float:
        return float(np.max(self.deviations))

    @property
    def verdict(self) -> bool:
        return bool(np.all(self.deviations <= self.tol))

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict,
            "worst_deviation": self.worst,
            "tol": self.tol,
            "samples": self.samples,
            "deterministic": self.deterministic,
            "subsystems": [
                {"j": j, "deviation": float(dev), "marginal": m}
                for j, (dev, m) in enumerate(zip(self.deviations, self.marginals))
            ],
        }
        if self.pairwise is not None:
            out["pairwise_deviation"] = [float(x) for x in self.pairwise]
        return out


@dataclass(frozen=True, eq=False)
class KLReport:
    j: int
    deviations: np.ndarray  # d_j x d_j, entry (i, k) for the unit |i><k|
    lambdas: np.ndarray
    tol: float

    @property
    def worst(self) -> float:
        return float(np.max(self.deviations))

    @property
    def verdict(self) -> bool:
        return bool(self.worst <= self.tol)

    def to_dict(self) -> dict:
        return {
            "j": self.j,
            "verdict": self.verdict,
            "worst_deviation": self.worst,
            "tol": self.tol,
            "deviations": self.deviations.tolist(),
            "lambdas": self.lambdas,
        }


def _check_states(s: Masker, q: StateSet) -> None:
    if q.dim != s.input_dim:
        raise DimensionError(f"states have dimension {q.dim}, masker input dimension is {s.input_dim}")


def marginal_report(s: Masker, q: StateSet, tol: float = DEFAULT_TOL) -> MaskingReport:
    """Compare every image marginal with the marginal of the first state's image."""
    if len(q) == 0:
        raise ValueError("state set is empty")
    _check_states(s, q)
    images = s.matrix @ q.states.T  # columns
    devs, pair_devs, refs = [], [], []
    for j in range(s.n):
        margs = np.stack([partial_trace_vector(images[:, t], s.dims, j) for t in range(len(q))])
        ref = margs[0]
        refs.append(ref)
        devs.append(np.max(np.linalg.norm(margs - ref, axis=(1, 2))))
        diff = margs[:, None] - margs[None, :]
        pair_devs.append(np.max(np.linalg.norm(diff, axis=(2, 3))))
    return MaskingReport(refs, np.array(devs), tol, len(q), False, np.array(pair_devs))


def cross_marginals(s: Masker, j: int) -> np.ndarray:
    """``M[i, k] = tr_{not j}[S|i><k|S^dag]`` for all input basis pairs, shape (K, K, d_j, d_j)."""
    dj = s.dims[j]
    a = permute_to_front(s.matrix, s.dims, j).reshape(dj, -1, s.input_dim)
    return np.einsum("ari,brk->ikab", a, a.conj())


def universal_masking_check(s: Masker, tol: float = DEFAULT_TOL) -> MaskingReport:
    """Finite test for masking every pure state of the input space.

    Passes iff for every subsystem the cross marginals ``M[i, k]`` vanish for
    i != k and the diagonal ones coincide; deviations are measured from the
    mean diagonal marginal.
    """
    devs, refs = [], []
    k = s.input_dim
    for j in range(s.n):
        m = cross_marginals(s, j)
        mean = np.einsum("iiab->ab", m) / k
        target = np.einsum("ik,ab->ikab", np.eye(k), mean)
        devs.append(np.max(np.linalg.norm(m - target, axis=(2, 3))))
        refs.append(mean)
    return MaskingReport(refs, np.array(devs), tol, k * k, True)


def cross_term(s: Masker, psi1: np.ndarray, psi2: np.ndarray, j: int) -> np.ndarray:
    """``tr_{not j}[S|psi1><psi2|S^dag]``."""
    return partial_trace_vector(s.apply(psi1), s.dims, j, s.apply(psi2))


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    j: int
    coefficients: np.ndarray  # shared, above tolerance, non-increasing
    rank: int
    marginal_eigenvalues: np.ndarray  # non-increasing
    marginal_eigenvectors: np.ndarray  # columns, matching eigenvalues
    right_factors: list[np.ndarray] = field(default_factory=list)  # (rest, rank) per state


def schmidt_form(s: Masker, q: StateSet, j: int, tol: float = DEFAULT_TOL) -> SchmidtForm:
    """Shared Schmidt coefficients of ``T_j S|psi>`` across the ``j | rest`` cut.

    Raises :class:`CoefficientMismatch` when two images disagree in their
    coefficients, or when the coefficients are not the square roots of the
    marginal spectrum. Only basis-invariant data of the left frame is
    returned (the marginal's eigen-decomposition), since degenerate
    coefficients leave the left vectors undetermined.
    """
    if len(q) == 0:
        raise ValueError("state set is empty")
    _check_states(s, q)
    dj = s.dims[j]
    rest = int(np.prod(s.dims)) // dj
    ref = None
    rights = []
    for t, psi in enumerate(q):
        res = schmidt_decompose(permute_to_front(s.apply(psi), s.dims, j), dj, rest, tol)
        if ref is None:
            ref = res.coefficients
        elif np.max(np.abs(res.coefficients - ref)) > tol:
            raise CoefficientMismatch(f"state {t} has Schmidt coefficients {res.coefficients}, state 0 has {ref}")
        rights.append(res.right_vectors)
    first = s.apply(q.states[0])
    rho = partial_trace_vector(first, s.dims, j)
    evals, evecs = np.linalg.eigh(rho)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    sq = np.sqrt(np.clip(evals, 0, None))
    if np.max(np.abs(sq[: ref.size] - ref)) > tol:
        raise CoefficientMismatch("Schmidt coefficients are not the square roots of the marginal spectrum")
    rank = int(np.sum(ref > tol))
    return SchmidtForm(j, ref[:rank], rank, evals, evecs, [r[:, :rank] for r in rights])


def kl_check(code: CodeSubspace, j: int, tol: float = DEFAULT_TOL) -> KLReport:
    """One-erasure Knill-Laflamme test on subsystem ``j``.

    For each matrix unit ``E`` on subsystem ``j`` the compressed operator
    ``C^dag E C`` must be a multiple ``lambda_E`` of the identity; the
    deviation ``|C^dag E C - lambda_E I|_F`` equals ``|PEP - lambda_E P|_F``.
    """
    c = code.basis
    k = code.dim
    dj = code.dims[j]
    devs = np.zeros((dj, dj))
    lams = np.zeros((dj, dj), dtype=complex)
    for idx, e in enumerate(erasure_operator_basis(code.dims, j)):
        x = c.conj().T @ e.apply(c)
        lam = np.trace(x) / k
        devs.flat[idx] = np.linalg.norm(x - lam * np.eye(k))
        lams.flat[idx] = lam
    return KLReport(j, devs, lams, tol)


@dataclass(frozen=True, eq=False)
class EquivalenceReport:
    masking: MaskingReport
    kl: list[KLReport]

    @property
    def masking_verdict(self) -> bool:
        return self.masking.verdict

    @property
    def kl_verdict(self) -> bool:
        return all(r.verdict for r in self.kl)

    @property
    def agree(self) -> bool:
        return self.masking_verdict == self.kl_verdict

    def to_dict(self) -> dict:
        return {
            "masking_verdict": self.masking_verdict,
            "kl_verdict": self.kl_verdict,
            "agree": self.agree,
            "masking": self.masking.to_dict(),
            "kl": [r.to_dict() for r in self.kl],
        }


def equivalence_report(s: Masker, tol: float = DEFAULT_TOL, strict: bool = True) -> EquivalenceReport:
    """Run the masking test and the per-subsystem erasure test side by side.

    With ``strict`` a disagreement raises :class:`DisagreementAtTolerance`;
    the two verdicts can only differ through tolerance effects.
    """
    rep = EquivalenceReport(
        universal_masking_check(s, tol),
        [kl_check(CodeSubspace.from_masker(s), j, tol) for j in range(s.n)],
    )
    if strict and not rep.agree:
        raise DisagreementAtTolerance(
            f"masking verdict {rep.masking_verdict} but erasure verdict {rep.kl_verdict} at tol {tol:g}", rep
        )
    return rep


def random_orthonormal_pair(k: int, seed=None) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    a = random_pure_state(k, rng)
    b = random_pure_state(k, rng)
    b = b - np.vdot(a, b) * a
    return a, b / np.linalg.norm(b)
