import numpy as np
import pytest

from qmask.erasure import (
    CodeSubspace,
    KrausChannel,
    depolarize_channel,
    identity_channel,
    identity_recovery,
    is_one_erasure,
    kl_recovery,
    reset_channel,
    roundtrip_fidelity,
)
from qmask.errors import KLViolated
from qmask.masker import latin_masker
from qmask.tensor import basis_vector, kron_all, partial_trace, permutation_matrix, random_density, random_pure_state


def test_reset_channel_on_product_state(rng):
    a, b, c = (random_pure_state(d, rng) for d in (2, 3, 2))
    ch = reset_channel((2, 3, 2), 1)
    rho = np.outer(kron_all(a, b, c), kron_all(a, b, c).conj())
    out = ch.apply(rho)
    zero = basis_vector(3, 0)
    expected = kron_all(np.outer(a, a.conj()), np.outer(zero, zero), np.outer(c, c.conj()))
    assert np.allclose(out, expected, atol=1e-14)


@pytest.mark.parametrize("build", [reset_channel, depolarize_channel])
def test_completeness(build):
    for dims in [(2, 2, 2), (3, 3, 3), (2, 3, 4)]:
        for j in range(3):
            assert build(dims, j).completeness_error() <= 1e-12


def test_channel_marginals(rng):
    dims = (2, 3, 2)
    for j in range(3):
        rho = random_density(12, rng)
        out = reset_channel(dims, j).apply(rho)
        target = np.zeros((dims[j], dims[j]))
        target[0, 0] = 1
        assert np.allclose(partial_trace(out, dims, j), target, atol=1e-14)
        out = depolarize_channel(dims, j).apply(rho)
        assert np.allclose(partial_trace(out, dims, j), np.eye(dims[j]) / dims[j], atol=1e-14)


def test_depolarize_commutes_with_reset_on_disjoint_subsystems(rng):
    dims = (2, 3, 2)
    dep, res = depolarize_channel(dims, 0), reset_channel(dims, 2)
    for _ in range(5):
        rho = random_density(12, rng)
        assert np.allclose(res.apply(dep.apply(rho)), dep.apply(res.apply(rho)), atol=1e-14)
    assert np.allclose(dep.then(res).apply(rho), res.then(dep).apply(rho), atol=1e-14)


def test_channels_preserve_trace_and_positivity(rng):
    dims = (3, 3, 3)
    chans = [reset_channel(dims, 0), depolarize_channel(dims, 2)]
    for _ in range(100):
        rho = random_density(27, rng)
        for ch in chans:
            out = ch.apply(rho)
            assert abs(np.trace(out) - 1) <= 1e-10
            assert np.linalg.eigvalsh(out).min() >= -1e-10


def test_is_one_erasure():
    dims = (2, 3, 2)
    ch = reset_channel(dims, 1)
    assert is_one_erasure(ch, 1)
    assert not is_one_erasure(ch, 0)
    assert not is_one_erasure(ch, 2)
    ident = identity_channel(dims)
    assert all(is_one_erasure(ident, j) for j in range(3))
    for dims in [(2, 2, 2), (3, 3, 3), (2, 4, 3)]:
        for j in range(3):
            assert is_one_erasure(reset_channel(dims, j), j)
            assert is_one_erasure(depolarize_channel(dims, j), j)


def test_is_one_erasure_factor_oracle():
    # oracle: a Kraus operator K of reset on subsystem 1 is not T_0^dag (A ⊗ I) T_0 for the
    # least-squares A, which is the partial trace of T_0 K T_0^dag over the rest, divided by rest
    dims = (2, 3, 2)
    k = reset_channel(dims, 1).kraus[1]
    t = permutation_matrix(dims, 0)
    conj = t @ k @ t.conj().T
    a = np.einsum("arbr->ab", conj.reshape(2, 6, 2, 6)) / 6
    assert np.linalg.norm(conj - np.kron(a, np.eye(6))) > 0.5


def test_channel_validation():
    with pytest.raises(ValueError):
        KrausChannel((2 * np.eye(4),), (2, 2))


def test_kl_recovery_masker_reset(rng):
    s = latin_masker(3)
    code = CodeSubspace.from_masker(s)
    ch = reset_channel((3, 3, 3), 0)
    rec = kl_recovery(code, ch)
    assert rec.completeness_error() <= 1e-10
    for _ in range(100):
        v = code.random_state(rng)
        rho = np.outer(v, v.conj())
        assert np.linalg.norm(rec.apply(ch.apply(rho)) - rho) <= 1e-9


def test_kl_recovery_identity_channel(rng):
    code = CodeSubspace.from_masker(latin_masker(3))
    ch = identity_channel((3, 3, 3))
    rec = kl_recovery(code, ch)
    assert rec.completeness_error() <= 1e-10
    v = code.random_state(rng)
    rho = np.outer(v, v.conj())
    assert np.linalg.norm(rec.apply(rho) - rho) <= 1e-12


def test_kl_recovery_rejects_repetition_code():
    basis = np.stack([basis_vector(8, 0), basis_vector(8, 7)], axis=1)
    code = CodeSubspace((2, 2, 2), basis)
    with pytest.raises(KLViolated):
        kl_recovery(code, reset_channel((2, 2, 2), 0))


def test_roundtrip_fidelity():
    s = latin_masker(3)
    code = CodeSubspace.from_masker(s)
    ch = depolarize_channel((3, 3, 3), 1)
    stats = roundtrip_fidelity(code, ch, kl_recovery(code, ch), 100, 0)
    assert stats.worst >= 1 - 1e-9
    ident = roundtrip_fidelity(code, identity_channel((3, 3, 3)), identity_recovery(code), 20, 0)
    assert abs(ident.worst - 1) <= 1e-14 and abs(ident.mean - 1) <= 1e-14
    lost = roundtrip_fidelity(code, reset_channel((3, 3, 3), 0), identity_recovery(code), 50, 0)
    assert lost.mean < 1 - 1e-3
    assert roundtrip_fidelity(code, ch, kl_recovery(code, ch), 10, 5).values.tolist() == \
        roundtrip_fidelity(code, ch, kl_recovery(code, ch), 10, 5).values.tolist()


def test_roundtrip_dense_matches_branch_formula(rng):
    code = CodeSubspace.from_masker(latin_masker(3))
    ch = reset_channel((3, 3, 3), 2)
    rec = kl_recovery(code, ch)
    stats = roundtrip_fidelity(code, ch, rec, 5, 11)
    gen = np.random.default_rng(11)
    for f in stats.values:
        v = code.random_state(gen)
        dense = np.vdot(v, rec.apply(ch.apply(np.outer(v, v.conj()))) @ v).real
        assert dense == pytest.approx(f, abs=1e-12)


def test_code_subspace_validation():
    with pytest.raises(ValueError):
        CodeSubspace((2, 2), np.ones((4, 1)))
    with pytest.raises(ValueError):
        CodeSubspace((2, 2), np.zeros((4, 0)))
