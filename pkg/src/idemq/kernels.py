"""Dense mod-p elimination kernels.

Rank over F_p on a dense int64 matrix is the one hot loop worth compiling;
everything exact over Q stays in sparse Python (big integers do not fit a
jitted kernel). Three interchangeable implementations:

  numba   - @njit row-reduction (default when numba imports)
  numpy   - vectorised row-reduction
  python  - pure-Python rows-of-dicts (in sparsela; also the only Q path)

selected by IDEMQ_BACKEND=auto|numba|numpy|python. Results are identical;
the env flag only moves work between implementations.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - depends on install
    HAS_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore
        def wrap(f):
            return f

        return wrap


# p*p must fit in int64 with slack: (p-1)^2 + (p-1) < 2^63 holds for p < 2^31
MAX_DENSE_PRIME = 1 << 31
# dense matrices beyond this entry count stay on the sparse python path
DENSE_ENTRY_LIMIT = 4_000_000

_VALID = ("auto", "numba", "numpy", "python")
_backend_cache: str | None = None


def backend() -> str:
    """Resolve IDEMQ_BACKEND to a concrete implementation name."""
    global _backend_cache
    if _backend_cache is not None:
        return _backend_cache
    want = os.environ.get("IDEMQ_BACKEND", "auto").strip().lower()
    if want not in _VALID:
        raise ValueError(f"IDEMQ_BACKEND must be one of {_VALID}, got {want!r}")
    if want == "auto":
        want = "numba" if HAS_NUMBA else "numpy"
    if want == "numba" and not HAS_NUMBA:
        raise RuntimeError("IDEMQ_BACKEND=numba but numba is not importable")
    _backend_cache = want
    return want


def reset_backend() -> None:
    """Forget the cached IDEMQ_BACKEND resolution (tests, benchmarks)."""
    global _backend_cache
    _backend_cache = None


# ---------- numba kernel ----------


@njit(cache=False)
def _inv_mod(a: int, p: int) -> int:
    # extended euclid; a != 0 mod p
    t, new_t = 0, 1
    r, new_r = p, a
    while new_r != 0:
        q = r // new_r
        t, new_t = new_t, t - q * new_t
        r, new_r = new_r, r - q * new_r
    if t < 0:
        t += p
    return t


@njit(cache=False)
def _rref_mod_p_nb(a: np.ndarray, p: int, pivots: np.ndarray) -> int:
    nrows, ncols = a.shape
    rank = 0
    for c in range(ncols):
        if rank == nrows:
            break
        piv = -1
        for r in range(rank, nrows):
            if a[r, c] != 0:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for j in range(c, ncols):
                t = a[rank, j]
                a[rank, j] = a[piv, j]
                a[piv, j] = t
        inv = _inv_mod(a[rank, c], p)
        if inv != 1:
            for j in range(c, ncols):
                a[rank, j] = (a[rank, j] * inv) % p
        for r in range(nrows):
            if r != rank and a[r, c] != 0:
                f = a[r, c]
                for j in range(c, ncols):
                    a[r, j] = (a[r, j] - f * a[rank, j]) % p
        pivots[rank] = c
        rank += 1
    return rank


# ---------- numpy kernel ----------


def _rref_mod_p_np(a: np.ndarray, p: int, pivots: np.ndarray) -> int:
    nrows, ncols = a.shape
    rank = 0
    for c in range(ncols):
        if rank == nrows:
            break
        nz = np.nonzero(a[rank:, c])[0]
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        v = int(a[rank, c])
        if v != 1:
            a[rank] = (a[rank] * pow(v, -1, p)) % p
        hit = np.nonzero(a[:, c])[0]
        hit = hit[hit != rank]
        if hit.size:
            a[hit] = (a[hit] - np.outer(a[hit, c], a[rank])) % p
        pivots[rank] = c
        rank += 1
    return rank


def rref_mod_p_dense(a: np.ndarray, p: int) -> tuple[int, np.ndarray]:
    """In-place RREF of int64 matrix ``a`` mod p. Returns (rank, pivot cols)."""
    if p >= MAX_DENSE_PRIME:
        raise ValueError("prime too large for the dense int64 kernel")
    pivots = np.full(min(a.shape), -1, dtype=np.int64)
    if backend() == "numba":
        rank = _rref_mod_p_nb(a, p, pivots)
    else:
        rank = _rref_mod_p_np(a, p, pivots)
    return int(rank), pivots[:rank]


def rank_mod_p_dense(a: np.ndarray, p: int) -> int:
    rank, _ = rref_mod_p_dense(a, p)
    return rank
