import numpy as np
import pytest

from qmask.masker import latin_masker, product_encoder
from qmask.mols import literature_order3_pair


@pytest.fixture(scope="session")
def literature_pair():
    return literature_order3_pair()


@pytest.fixture(scope="session")
def s3(literature_pair):
    return latin_masker(3, literature_pair)


@pytest.fixture(scope="session")
def product2():
    """|i> -> |i>|0>|0> from C^2 into (C^2)^3."""
    return product_encoder(2, (2, 2, 2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def brute_partial_trace(rho, dims, keep):
    """Sum over explicit multi-indices; independent of the library's reshapes."""
    import itertools

    dims = tuple(dims)
    dk = dims[keep]
    out = np.zeros((dk, dk), dtype=complex)
    idx = list(itertools.product(*[range(d) for d in dims]))
    flat = {t: i for i, t in enumerate(idx)}
    for t in idx:
        for u in idx:
            if all(t[m] == u[m] for m in range(len(dims)) if m != keep):
                out[t[keep], u[keep]] += rho[flat[t], flat[u]]
    return out


ACCEPTANCE: dict[int, str] = {}


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
