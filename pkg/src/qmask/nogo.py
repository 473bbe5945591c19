"""Numerical search for universal maskers over the manifold of isometries.

The masking defect ``D(S)`` is zero exactly on universal maskers. Minimizing
it from many random starts gives numerical evidence about whether a masker
exists for given dimensions; a positive floor is evidence, never a proof.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import NotIsometric
from .tensor import DimensionError, as_dims, isometry_error, permute_to_front, random_isometry

ISOMETRY_TOL = 1e-8
STOP_DEFECT = 1e-12
STOP_GRAD = 1e-10
ARMIJO = 1e-4


@dataclass(frozen=True)
class MaskProblem:
    input_dim: int
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = as_dims(self.dims)
        object.__setattr__(self, "dims", dims)
        if self.input_dim < 1 or self.input_dim > self.size:
            raise DimensionError(f"cannot embed C^{self.input_dim} isometrically into dims {dims}")

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def to_dict(self) -> dict:
        return {"input_dim": self.input_dim, "dims": list(self.dims)}


def _residuals(s: np.ndarray, dims: tuple[int, ...], j: int) -> tuple[np.ndarray, np.ndarray]:
    """Front-permuted tensor ``A[a, r, i]`` and residual ``N[i, k, a, b] = M(i,k) - delta_ik mean``."""
    k = s.shape[1]
    dj = dims[j]
    a = permute_to_front(s, dims, j).reshape(dj, -1, k)
    m = np.einsum("ari,brk->ikab", a, a.conj())
    mean = np.einsum("iiab->ab", m) / k
    idx = np.arange(k)
    m[idx, idx] -= mean
    return a, m


def _defect(s: np.ndarray, dims: tuple[int, ...]) -> float:
    return float(sum(np.sum(np.abs(_residuals(s, dims, j)[1]) ** 2) for j in range(len(dims))))


def _check_problem(s: np.ndarray, problem: MaskProblem) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    if s.shape != (problem.size, problem.input_dim):
        raise DimensionError(f"matrix of shape {s.shape} does not fit problem {problem.to_dict()}")
    return s


def masking_defect(s: np.ndarray, problem: MaskProblem) -> float:
    """``sum_j sum_{i,k} |tr_{not j}[S|i><k|S^dag] - delta_ik rho_j|_F^2``.

    ``rho_j`` is the mean of the diagonal terms. ``s`` must be an isometry.
    """
    s = _check_problem(s, problem)
    err = isometry_error(s)
    if err > ISOMETRY_TOL:
        raise NotIsometric(f"input is not an isometry (|S^dag S - I|_F = {err:.3e})")
    return _defect(s, problem.dims)


def defect_and_gradient(s: np.ndarray, problem: MaskProblem) -> tuple[float, np.ndarray]:
    """Defect and its Euclidean gradient ``dD/dRe S + i dD/dIm S``.

    The mean-marginal term drops out of the gradient because the diagonal
    residuals sum to zero.
    """
    s = _check_problem(s, problem)
    dims = problem.dims
    total = 0.0
    grad = np.zeros_like(s)
    for j in range(len(dims)):
        a, res = _residuals(s, dims, j)
        total += float(np.sum(np.abs(res) ** 2))
        g = 4 * np.einsum("ikab,brk->ari", res, a)
        # undo the front permutation of subsystem j
        n = len(dims)
        pd = (dims[j],) + tuple(d for t, d in enumerate(dims) if t != j)
        order = list(range(1, j + 1)) + [0] + list(range(j + 1, n)) + [n]
        g = g.reshape(pd + (s.shape[1],)).transpose(order).reshape(s.shape)
        grad += g
    return total, grad


def riemannian_gradient(s: np.ndarray, egrad: np.ndarray) -> np.ndarray:
    """Project a Euclidean gradient onto the tangent space of the isometries at ``s``."""
    x = s.conj().T @ egrad
    return egrad - s @ ((x + x.conj().T) / 2)


def polar_retract(a: np.ndarray) -> np.ndarray:
    """Unitary polar factor of ``a``: the closest isometry in Frobenius norm."""
    return scipy.linalg.polar(a)[0]


@dataclass
class RestartSummary:
    index: int
    initial_defect: float
    final_defect: float
    iterations: int
    grad_norm: float
    reason: str
    trajectory: list[float] = field(default_factory=list, repr=False)

    def to_dict(self, with_trajectory: bool = False) -> dict:
        out = {
            "index": self.index,
            "initial_defect": self.initial_defect,
            "final_defect": self.final_defect,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "termination": self.reason,
        }
        if with_trajectory:
            out["trajectory"] = self.trajectory
        return out


@dataclass
class SearchResult:
    problem: MaskProblem
    best_defect: float
    best_isometry: np.ndarray
    restarts: list[RestartSummary]
    seed: int
    max_iters: int

    @property
    def best_restart(self) -> int:
        return int(np.argmin([r.final_defect for r in self.restarts]))

    def to_dict(self, with_trajectory: bool = False) -> dict:
        return {
            "kind": "evidence",
            "problem": self.problem.to_dict(),
            "best_defect": self.best_defect,
            "best_restart": self.best_restart,
            "restarts": [r.to_dict(with_trajectory) for r in self.restarts],
            "seed": self.seed,
            "max_iters": self.max_iters,
        }


def restart_seeds(seed: int, restarts: int) -> list[np.random.SeedSequence]:
    """Independent per-restart streams: ``SeedSequence(seed).spawn(restarts)``.

    Restart ``r`` always receives the same stream, so serial and parallel
    runs agree.
    """
    return np.random.SeedSequence(seed).spawn(restarts)


def descend(s: np.ndarray, problem: MaskProblem, max_iters: int, index: int = 0) -> tuple[np.ndarray, RestartSummary]:
    """Riemannian gradient descent with polar retraction.

    Trial steps use the Barzilai-Borwein length and are halved until the
    Armijo condition holds.
    """
    f, eg = defect_and_gradient(s, problem)
    g = riemannian_gradient(s, eg)
    gn2 = float(np.vdot(g, g).real)
    traj = [f]
    initial = f
    step = 1.0
    reason = "max_iters"
    it = 0
    for it in range(1, max_iters + 1):
        if f < STOP_DEFECT:
            reason, it = "defect", it - 1
            break
        if gn2 < STOP_GRAD**2:
            reason, it = "gradient", it - 1
            break
        t = step
        while True:
            s_new = polar_retract(s - t * g)
            f_new = _defect(s_new, problem.dims)
            if f_new <= f - ARMIJO * t * gn2 or t < 1e-16:
                break
            t *= 0.5
        if t < 1e-16 and f_new > f:
            reason = "stalled"
            break
        f_new, eg_new = defect_and_gradient(s_new, problem)
        g_new = riemannian_gradient(s_new, eg_new)
        # BB1 step with vector-transport approximated by projection
        sk = s_new - s
        yk = g_new - riemannian_gradient(s_new, g)
        sy = float(np.vdot(sk, yk).real)
        step = float(np.vdot(sk, sk).real) / sy if sy > 0 else 2 * t
        step = min(max(step, 1e-8), 1e4)
        s, f, g = s_new, f_new, g_new
        gn2 = float(np.vdot(g, g).real)
        traj.append(f)
    else:
        if f < STOP_DEFECT:
            reason = "defect"
        elif gn2 < STOP_GRAD**2:
            reason = "gradient"
    return s, RestartSummary(index, initial, f, it, float(np.sqrt(gn2)), reason, traj)


def optimize_defect(problem: MaskProblem, restarts: int = 10, max_iters: int = 2000, seed: int = 0) -> SearchResult:
    """Multi-start minimization of the masking defect; deterministic per arguments."""
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    best_s, best_f = None, np.inf
    summaries = []
    for r, ss in enumerate(restart_seeds(seed, restarts)):
        s0 = random_isometry(problem.size, problem.input_dim, np.random.default_rng(ss))
        s, summary = descend(s0, problem, max_iters, r)
        summaries.append(summary)
        if summary.final_defect < best_f:
            best_f, best_s = summary.final_defect, s
    return SearchResult(problem, float(best_f), best_s, summaries, seed, max_iters)


def probe_open_question(restarts: int = 5, max_iters: int = 2000, seed: int = 0) -> SearchResult:
    """Search for a masker of C^6 into (C^6)^{⊗3}; the result is a numeric record only."""
    return optimize_defect(MaskProblem(6, (6, 6, 6)), restarts, max_iters, seed)
