"""Sparse exact linear algebra over Q and F_p.

Matrices are rows-of-dicts: row i is {col: coeff} with exact scalars.
Rank-only queries (the bulk of the homology work) take a fraction-free
fast path: over Q rows are cleared to integers and reduced by
cross-multiplication; over F_p small matrices are densified and handed to
the compiled kernels, large ones reduced sparsely.

Kernel bases and solving go through an augmented column echelon: column j
is inserted as col_j + e_j in bookkeeping coordinates, so kernel vectors
and solution coefficients fall out of the tail without re-tracking row
operations.
"""

from __future__ import annotations

import heapq
from fractions import Fraction
from math import gcd
from typing import Optional

import numpy as np

from .kernels import DENSE_ENTRY_LIMIT, MAX_DENSE_PRIME, backend, rank_mod_p_dense

Vec = dict  # {col: scalar}, zero entries absent


# ---------- vector helpers ----------


def vec_clean(vec: Vec, field) -> Vec:
    return {c: v for c, v in vec.items() if not field.is_zero(v)}


def vec_scale(vec: Vec, a, field) -> Vec:
    if field.is_zero(a):
        return {}
    return {c: field.normalize(field.mul(a, v)) for c, v in vec.items()}


def vec_add_scaled(dst: Vec, a, src: Vec, field) -> None:
    """dst += a * src, in place."""
    if field.is_zero(a):
        return
    for c, v in src.items():
        nv = field.normalize(field.add(dst.get(c, field.zero), field.mul(a, v)))
        if field.is_zero(nv):
            dst.pop(c, None)
        else:
            dst[c] = nv


# ---------- full RREF echelon (kernel / solve / membership) ----------


def _is_unit(v, field) -> bool:
    if field.char == 0:
        return v == 1 or v == -1
    return True


class Echelon:
    """Streaming reduced row echelon form.

    Stored rows are mutually reduced: each pivot column occurs in exactly
    one row, with coefficient 1, so reduce() is a single pass. Pivot choice
    prefers columns below ``prefer_below`` (used to keep bookkeeping
    coordinates out of the pivots), then unit coefficients, then the lowest
    column index; everything is deterministic.
    """

    def __init__(self, field, prefer_below: Optional[int] = None):
        self.field = field
        self.prefer_below = prefer_below
        self.rows: dict[int, Vec] = {}  # pivot col -> row, row[pivot] == 1

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, vec: Vec) -> Vec:
        """Residual of vec modulo the stored row span."""
        F = self.field
        rows = self.rows
        res = vec_clean(vec, F)
        # subtracting a stored row only introduces non-pivot columns, so a
        # snapshot of the pivot hits is enough
        for c in [c for c in res if c in rows]:
            a = res.pop(c)
            row = rows[c]
            for j, v in row.items():
                if j == c:
                    continue
                nv = F.normalize(F.sub(res.get(j, F.zero), F.mul(a, v)))
                if F.is_zero(nv):
                    res.pop(j, None)
                else:
                    res[j] = nv
        return res

    def contains(self, vec: Vec) -> bool:
        return not self.reduce(vec)

    def insert(self, vec: Vec) -> Optional[int]:
        """Add vec to the span. Returns the new pivot column, or None if
        vec was already in the span."""
        F = self.field
        res = self.reduce(vec)
        if not res:
            return None
        cand = list(res)
        if self.prefer_below is not None:
            below = [c for c in cand if c < self.prefer_below]
            if below:
                cand = below
        pick = min(cand, key=lambda c: (not _is_unit(res[c], F), c))
        a = res[pick]
        if a != F.one:
            inv = F.inv(a)
            res = {c: F.normalize(F.mul(inv, v)) for c, v in res.items()}
        for prow in self.rows.values():
            b = prow.pop(pick, None)
            if b is not None:
                for j, v in res.items():
                    if j == pick:
                        continue
                    nv = F.normalize(F.sub(prow.get(j, F.zero), F.mul(b, v)))
                    if F.is_zero(nv):
                        prow.pop(j, None)
                    else:
                        prow[j] = nv
        self.rows[pick] = res
        return pick


# ---------- fraction-free rank over Q ----------


def _clear_row_to_int(row: Vec) -> Vec:
    den = 1
    for v in row.values():
        if isinstance(v, Fraction):
            den = den * v.denominator // gcd(den, v.denominator)
    if den == 1:
        out = {c: int(v) for c, v in row.items() if v}
    else:
        out = {}
        for c, v in row.items():
            w = int(v * den)
            if w:
                out[c] = w
    g = 0
    for v in out.values():
        g = gcd(g, v)
    if g > 1:
        out = {c: v // g for c, v in out.items()}
    return out

# gcd-normalize a working row once entries pass this many bits
_GROWTH_BITS = 512


def _rank_int_rows(rows: list[Vec]) -> int:
    """REF rank of integer rows by cross-multiplication. No divisions."""
    piv: dict[int, Vec] = {}
    for row in rows:
        res = {c: v for c, v in row.items() if v}
        heap = list(res)
        heapq.heapify(heap)
        newpiv = -1
        while heap:
            c = heapq.heappop(heap)
            a = res.get(c, 0)
            if a == 0:
                continue
            pr = piv.get(c)
            if pr is None:
                newpiv = c
                break
            b = pr[c]
            g = gcd(a, b)
            ma, mb = a // g, b // g
            if mb != 1:
                for j in res:
                    res[j] *= mb
            del res[c]
            for j, v in pr.items():
                if j == c:
                    continue
                nv = res.get(j, 0) - ma * v
                if nv:
                    if j not in res:
                        heapq.heappush(heap, j)
                    res[j] = nv
                else:
                    res.pop(j, None)
            if res and max(v.bit_length() for v in res.values()) > _GROWTH_BITS:
                g = 0
                for v in res.values():
                    g = gcd(g, v)
                if g > 1:
                    for j in res:
                        res[j] //= g
        if newpiv >= 0:
            piv[newpiv] = res
    return len(piv)


# ---------- sparse rank mod p ----------


def _rank_modp_rows(rows: list[Vec], p: int) -> int:
    piv: dict[int, Vec] = {}
    for row in rows:
        res = {c: v % p for c, v in row.items() if v % p}
        heap = list(res)
        heapq.heapify(heap)
        newpiv = -1
        while heap:
            c = heapq.heappop(heap)
            a = res.get(c, 0)
            if a == 0:
                continue
            pr = piv.get(c)
            if pr is None:
                newpiv = c
                break
            del res[c]
            for j, v in pr.items():  # pr normalized: pr[c] == 1
                if j == c:
                    continue
                nv = (res.get(j, 0) - a * v) % p
                if nv:
                    if j not in res:
                        heapq.heappush(heap, j)
                    res[j] = nv
                else:
                    res.pop(j, None)
        if newpiv >= 0:
            a = res[newpiv]
            if a != 1:
                inv = pow(a, -1, p)
                res = {j: (inv * v) % p for j, v in res.items()}
            piv[newpiv] = res
    return len(piv)


# ---------- rank dispatch ----------


def rank_rows(rows: list[Vec], ncols: int, field) -> int:
    if not rows or ncols == 0:
        return 0
    if field.char == 0:
        return _rank_int_rows([_clear_row_to_int(r) for r in rows])
    p = field.p
    if (
        backend() != "python"
        and p < MAX_DENSE_PRIME
        and len(rows) * ncols <= DENSE_ENTRY_LIMIT
    ):
        a = np.zeros((len(rows), ncols), dtype=np.int64)
        for i, row in enumerate(rows):
            for j, v in row.items():
                a[i, j] = v % p
        return rank_mod_p_dense(a, p)
    return _rank_modp_rows(rows, p)


# ---------- kernel and solve via augmented column echelon ----------


def _augmented_column_echelon(rows: list[Vec], ncols: int, field) -> tuple[Echelon, int]:
    nr = len(rows)
    cols: list[Vec] = [dict() for _ in range(ncols)]
    for i, row in enumerate(rows):
        for j, v in row.items():
            if not field.is_zero(v):
                cols[j][i] = v
    ech = Echelon(field, prefer_below=nr)
    for j in range(ncols):
        vec = dict(cols[j])
        vec[nr + j] = field.one
        ech.insert(vec)
    return ech, nr


def kernel_rows(rows: list[Vec], ncols: int, field) -> list[Vec]:
    """Basis of {x : A x = 0}, A the nrows x ncols matrix given by rows."""
    ech, nr = _augmented_column_echelon(rows, ncols, field)
    out = []
    for c in sorted(ech.rows):
        if c >= nr:
            row = ech.rows[c]
            out.append({j - nr: v for j, v in row.items()})
    return out


def solve_rows(rows: list[Vec], ncols: int, rhs: Vec, field) -> Optional[Vec]:
    """One x with A x = rhs, or None. rhs is {row index: value}."""
    ech, nr = _augmented_column_echelon(rows, ncols, field)
    res = ech.reduce(rhs)
    if any(c < nr for c in res):
        return None
    return {c - nr: field.neg(v) for c, v in res.items()}


# ---------- matrix wrapper ----------


class SparseMatrix:
    """nrows x ncols matrix over an exact field."""

    __slots__ = ("nrows", "ncols", "field", "rows")

    def __init__(self, nrows: int, ncols: int, field, rows: Optional[list[Vec]] = None):
        self.nrows = nrows
        self.ncols = ncols
        self.field = field
        self.rows = rows if rows is not None else [dict() for _ in range(nrows)]

    @classmethod
    def from_dense(cls, data: list[list], field) -> "SparseMatrix":
        nrows = len(data)
        ncols = len(data[0]) if nrows else 0
        m = cls(nrows, ncols, field)
        for i, drow in enumerate(data):
            for j, v in enumerate(drow):
                v = field.from_int(v) if isinstance(v, int) else v
                if not field.is_zero(v):
                    m.rows[i][j] = v
        return m

    def set(self, i: int, j: int, v) -> None:
        if self.field.is_zero(v):
            self.rows[i].pop(j, None)
        else:
            self.rows[i][j] = v

    def add_at(self, i: int, j: int, v) -> None:
        F = self.field
        nv = F.normalize(F.add(self.rows[i].get(j, F.zero), v))
        self.set(i, j, nv)

    def to_dense(self) -> list[list]:
        z = self.field.zero
        return [
            [row.get(j, z) for j in range(self.ncols)]
            for row in self.rows
        ]

    def transpose(self) -> "SparseMatrix":
        t = SparseMatrix(self.ncols, self.nrows, self.field)
        for i, row in enumerate(self.rows):
            for j, v in row.items():
                t.rows[j][i] = v
        return t

    def mul_vec(self, x: Vec) -> Vec:
        F = self.field
        out: Vec = {}
        for i, row in enumerate(self.rows):
            s = F.zero
            for j, v in row.items():
                xj = x.get(j)
                if xj is not None:
                    s = F.add(s, F.mul(v, xj))
            s = F.normalize(s)
            if not F.is_zero(s):
                out[i] = s
        return out

    def rank(self) -> int:
        return rank_rows(self.rows, self.ncols, self.field)

    def kernel_basis(self) -> list[Vec]:
        return kernel_rows(self.rows, self.ncols, self.field)

    def solve(self, rhs: Vec) -> Optional[Vec]:
        return solve_rows(self.rows, self.ncols, rhs, self.field)

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def __repr__(self) -> str:
        return f"<SparseMatrix {self.nrows}x{self.ncols} over {self.field!r}, nnz={self.nnz()}>"


def rank_kernel(m: SparseMatrix) -> tuple[int, list[Vec]]:
    """Rank and kernel basis in one call (kernel dim + rank = ncols)."""
    ker = m.kernel_basis()
    return m.ncols - len(ker), ker


def matmul(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    """a . b (apply b first)."""
    if a.ncols != b.nrows:
        raise ValueError(f"matmul shape mismatch: {a.ncols} vs {b.nrows}")
    F = a.field
    out = SparseMatrix(a.nrows, b.ncols, F)
    for i, arow in enumerate(a.rows):
        acc: Vec = out.rows[i]
        for k, av in arow.items():
            for j, bv in b.rows[k].items():
                nv = F.normalize(F.add(acc.get(j, F.zero), F.mul(av, bv)))
                if F.is_zero(nv):
                    acc.pop(j, None)
                else:
                    acc[j] = nv
    return out
