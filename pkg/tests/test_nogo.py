import numpy as np
import pytest

from conftest import brute_partial_trace
from qmask.errors import NotIsometric
from qmask.masker import Masker, latin_masker, tilde_masker
from qmask.nogo import (
    MaskProblem,
    defect_and_gradient,
    masking_defect,
    optimize_defect,
    polar_retract,
    probe_open_question,
    riemannian_gradient,
)
from qmask.tensor import DimensionError, kron_all, random_isometry, random_unitary
from qmask.verifier import equivalence_report, universal_masking_check


def brute_defect(s, dims):
    """Every M_j(i,k) from a dense operator and an explicit partial trace."""
    k = s.shape[1]
    total = 0.0
    for j in range(len(dims)):
        m = [[brute_partial_trace(np.outer(s[:, i], s[:, l].conj()), dims, j) for l in range(k)] for i in range(k)]
        mean = sum(m[i][i] for i in range(k)) / k
        for i in range(k):
            for l in range(k):
                target = mean if i == l else 0
                total += np.linalg.norm(m[i][l] - target) ** 2
    return total


def test_latin_defect_vanishes(s3):
    assert masking_defect(s3.matrix, MaskProblem(3, (3, 3, 3))) <= 1e-20


def test_product_encoder_defect_matches_brute_force(product2):
    p = MaskProblem(2, (2, 2, 2))
    oracle = brute_defect(product2.matrix, (2, 2, 2))
    assert oracle == pytest.approx(3.0, abs=1e-14)
    assert masking_defect(product2.matrix, p) == pytest.approx(oracle, abs=1e-14)


def test_defect_matches_brute_force_on_random(rng):
    for dims in [(2, 2, 2), (2, 3), (3, 2, 2)]:
        size = int(np.prod(dims))
        s = random_isometry(size, 2, rng)
        assert masking_defect(s, MaskProblem(2, dims)) == pytest.approx(brute_defect(s, dims), rel=1e-12)


def test_defect_local_unitary_invariance(rng):
    p = MaskProblem(2, (2, 3, 2))
    for _ in range(10):
        s = random_isometry(12, 2, rng)
        u = kron_all(random_unitary(2, rng), random_unitary(3, rng), random_unitary(2, rng))
        assert abs(masking_defect(u @ s, p) - masking_defect(s, p)) <= 1e-10


def test_defect_input_unitary_invariance(rng):
    p = MaskProblem(3, (3, 3, 3))
    for _ in range(10):
        s = random_isometry(27, 3, rng)
        assert abs(masking_defect(s @ random_unitary(3, rng), p) - masking_defect(s, p)) <= 1e-10


def test_defect_errors(rng):
    p = MaskProblem(2, (2, 2, 2))
    with pytest.raises(NotIsometric):
        masking_defect(2 * random_isometry(8, 2, rng), p)
    with pytest.raises(DimensionError):
        masking_defect(random_isometry(9, 2, rng), p)
    with pytest.raises(DimensionError):
        MaskProblem(9, (2, 2))
    with pytest.raises(ValueError):
        optimize_defect(p, restarts=0)


def test_gradient_matches_central_differences(rng):
    p = MaskProblem(2, (2, 3, 2))
    h = 1e-6
    for _ in range(20):
        s = random_isometry(12, 2, rng)
        d = rng.standard_normal(s.shape) + 1j * rng.standard_normal(s.shape)
        _, g = defect_and_gradient(s, p)
        analytic = float(np.real(np.vdot(g, d)))
        # defect extended off the manifold, as differentiated analytically
        f = lambda x: defect_and_gradient(x, p)[0]  # noqa: E731
        fd = (f(s + h * d) - f(s - h * d)) / (2 * h)
        assert abs(analytic - fd) <= 1e-5 * max(abs(fd), 1e-8)


def test_riemannian_gradient_is_tangent(rng):
    p = MaskProblem(2, (2, 2, 2))
    s = random_isometry(8, 2, rng)
    _, g = defect_and_gradient(s, p)
    r = riemannian_gradient(s, g)
    x = s.conj().T @ r
    assert np.linalg.norm(x + x.conj().T) <= 1e-12
    assert np.linalg.norm(polar_retract(s + 0.3 * r).conj().T @ polar_retract(s + 0.3 * r) - np.eye(2)) <= 1e-12


def test_zero_defect_iff_universal_masker(rng):
    corpus = [latin_masker(d) for d in (3, 4, 5)] + [tilde_masker(d) for d in (2, 3, 5)]
    corpus += [Masker(random_isometry(8, 2, rng), (2, 2, 2)) for _ in range(25)]
    corpus += [Masker(random_isometry(27, 3, rng), (3, 3, 3)) for _ in range(25)]
    for s in corpus:
        zero = masking_defect(s.matrix, MaskProblem(s.input_dim, s.dims)) <= 1e-12
        assert zero == universal_masking_check(s, 1e-8).verdict


def test_search_finds_masker_for_three_qutrits():
    res = optimize_defect(MaskProblem(3, (3, 3, 3)), restarts=5, max_iters=2000, seed=0)
    assert res.best_defect <= 1e-8
    assert res.best_defect == min(r.final_defect for r in res.restarts)
    assert equivalence_report(Masker(res.best_isometry, (3, 3, 3))).masking_verdict


def test_search_is_deterministic():
    p = MaskProblem(2, (2, 2, 2))
    a = optimize_defect(p, restarts=3, max_iters=50, seed=7)
    b = optimize_defect(p, restarts=3, max_iters=50, seed=7)
    assert a.to_dict(True) == b.to_dict(True)
    assert np.array_equal(a.best_isometry, b.best_isometry)
    c = optimize_defect(p, restarts=3, max_iters=50, seed=8)
    assert c.restarts[0].initial_defect != a.restarts[0].initial_defect


def test_search_report_is_evidence():
    res = optimize_defect(MaskProblem(2, (4, 4)), restarts=2, max_iters=20, seed=0)
    d = res.to_dict()
    assert d["kind"] == "evidence"
    assert all(r["termination"] in ("defect", "gradient", "max_iters", "stalled") for r in d["restarts"])
    assert res.best_defect > 0.5


def test_probe_is_finite_and_deterministic():
    a = probe_open_question(restarts=1, max_iters=30, seed=3)
    b = probe_open_question(restarts=1, max_iters=30, seed=3)
    assert np.isfinite(a.best_defect) and a.best_defect >= 0
    assert a.best_defect == b.best_defect
    assert a.problem == MaskProblem(6, (6, 6, 6))
    if a.best_defect < 1e-10:
        assert equivalence_report(Masker(a.best_isometry, (6, 6, 6))).agree
