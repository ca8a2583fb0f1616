import random

import numpy as np
import pytest

from idemq import kernels
from idemq.fields import GF
from idemq.sparsela import SparseMatrix, rank_rows


def _set_backend(monkeypatch, name):
    monkeypatch.setenv("IDEMQ_BACKEND", name)
    kernels.reset_backend()


@pytest.fixture(autouse=True)
def _restore_backend():
    yield
    kernels.reset_backend()


def test_backend_resolution(monkeypatch):
    _set_backend(monkeypatch, "numpy")
    assert kernels.backend() == "numpy"
    _set_backend(monkeypatch, "python")
    assert kernels.backend() == "python"
    _set_backend(monkeypatch, "bogus")
    with pytest.raises(ValueError):
        kernels.backend()


def test_auto_picks_compiled_lane(monkeypatch):
    monkeypatch.delenv("IDEMQ_BACKEND", raising=False)
    kernels.reset_backend()
    assert kernels.backend() in ("numba", "numpy")


def test_dense_rref_known_matrix(monkeypatch):
    data = np.array([[1, 2, 3], [2, 4, 6], [0, 1, 1]], dtype=np.int64)
    want_pivots = [0, 1]
    for name in ("numpy",) + (("numba",) if kernels.HAS_NUMBA else ()):
        _set_backend(monkeypatch, name)
        rank, pivots = kernels.rref_mod_p_dense(data.copy(), 7)
        assert rank == 2
        assert list(pivots) == want_pivots


def test_backends_agree_on_random_ranks(monkeypatch):
    rng = random.Random(5)
    names = ["python", "numpy"] + (["numba"] if kernels.HAS_NUMBA else [])
    F = GF(7)
    for _ in range(25):
        nrows = rng.randint(1, 8)
        ncols = rng.randint(1, 8)
        data = [[rng.randint(0, 6) for _ in range(ncols)] for _ in range(nrows)]
        ranks = set()
        for name in names:
            _set_backend(monkeypatch, name)
            ranks.add(SparseMatrix.from_dense(data, F).rank())
        assert len(ranks) == 1


def test_large_prime_rejected_by_dense_kernel():
    a = np.zeros((1, 1), dtype=np.int64)
    with pytest.raises(ValueError):
        kernels.rref_mod_p_dense(a, (1 << 31) + 11)


def test_sparse_fallback_above_entry_limit(monkeypatch):
    # force the python path and check it matches the dense result
    F = GF(32003)
    data = [[1, 2, 3], [4, 5, 6], [7, 8, 10]]
    _set_backend(monkeypatch, "python")
    r_sparse = rank_rows(
        [{j: v for j, v in enumerate(row)} for row in data], 3, F
    )
    _set_backend(monkeypatch, "numpy")
    r_dense = rank_rows(
        [{j: v for j, v in enumerate(row)} for row in data], 3, F
    )
    assert r_sparse == r_dense == 3
