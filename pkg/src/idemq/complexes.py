"""Free chain complexes over level rings, weight strand by weight strand.

A FreeComplex is a bounded complex of free modules with weight-homogeneous
differentials. All homology is computed on weight strands: fixing a weight
w cuts every degree down to a finite K-vector space (generator j paired
with a module monomial m, weight(j) + weight(m) = w) and the differential
to an exact scalar matrix. Truncating generators above a weight bound is
exact on the strands that remain.

Strand providers select the module structure: RingStrands reads homology
over R itself, QuotientStrands over R/J (monomials in J dropped both from
bases and from products), so Tor against a monomial quotient and reduction
mod the maximal ideal are the same code path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Optional

from .rings import Elem, Exponents, LevelRing
from .sparsela import Echelon, SparseMatrix, Vec, kernel_rows, solve_rows

# ---------- generators and complexes ----------


class GenInfo(NamedTuple):
    weight: Fraction
    tag: str


@dataclass
class FreeComplex:
    """Bounded complex of free modules with weight-graded generators.

    diff[d] maps degree d to degree d-1; entry (i, j) is the coefficient
    (a ring element) of generator i of degree d-1 in the boundary of
    generator j of degree d.
    """

    ring: LevelRing
    gens: dict[int, list[GenInfo]] = field(default_factory=dict)
    diff: dict[int, dict[tuple[int, int], Elem]] = field(default_factory=dict)
    # augmentation of the degree-0 part, one target element per generator;
    # aug_quotient lists monomial generators of the ideal cut out of the
    # target (empty tuple = the target is R itself)
    aug: Optional[list[Elem]] = None
    aug_quotient: tuple[Exponents, ...] = ()

    @property
    def field(self):
        return self.ring.field

    @property
    def lo(self) -> int:
        ds = [d for d, g in self.gens.items() if g]
        return min(ds) if ds else 0

    @property
    def hi(self) -> int:
        ds = [d for d, g in self.gens.items() if g]
        return max(ds) if ds else 0

    def gens_at(self, d: int) -> list[GenInfo]:
        return self.gens.get(d, [])

    def rank(self, d: int) -> int:
        return len(self.gens.get(d, []))

    def diff_at(self, d: int) -> dict[tuple[int, int], Elem]:
        return self.diff.get(d, {})

    def total_rank(self) -> int:
        return sum(len(g) for g in self.gens.values())

    def __repr__(self) -> str:
        ranks = {d: len(g) for d, g in sorted(self.gens.items()) if g}
        return f"<FreeComplex ranks={ranks} over {self.ring!r}>"


def unit_complex(ring: LevelRing) -> FreeComplex:
    """R sitting in degree 0."""
    return FreeComplex(
        ring=ring,
        gens={0: [GenInfo(Fraction(0), "1")]},
        diff={},
        aug=[ring.one()],
        aug_quotient=(),
    )


def check_complex(x: FreeComplex) -> None:
    """Assert dd = 0 and weight homogeneity of every entry."""
    ring = x.ring
    for d, entries in x.diff.items():
        below = x.gens.get(d - 1, [])
        here = x.gens.get(d, [])
        for (i, j), elem in entries.items():
            if not elem:
                raise AssertionError(f"stored zero entry at d={d} ({i},{j})")
            w = ring.elem_weight(elem)
            if w != here[j].weight - below[i].weight:
                raise AssertionError(
                    f"entry ({i},{j}) at d={d} has weight {w}, "
                    f"want {here[j].weight - below[i].weight}"
                )
    for d in sorted(x.diff):
        if d - 1 not in x.diff:
            continue
        # compose columns of diff[d] with diff[d-1]
        lower = x.diff[d - 1]
        by_col_lower: dict[int, list[tuple[int, Elem]]] = {}
        for (i, j), elem in lower.items():
            by_col_lower.setdefault(j, []).append((i, elem))
        acc: dict[tuple[int, int], Elem] = {}
        for (i, j), elem in x.diff[d].items():
            for (i2, elem2) in by_col_lower.get(i, []):
                prod = ring.elem_mul(elem2, elem)
                if not prod:
                    continue
                key = (i2, j)
                acc[key] = ring.elem_add(acc.get(key, {}), prod)
        for key, elem in acc.items():
            if elem:
                raise AssertionError(f"dd != 0 at degree {d}, entry {key}: {elem}")
    if x.aug is not None and 1 in x.diff:
        # augmentation composes to zero with the first differential
        q = QuotientStrands(x.ring, x.aug_quotient)
        for j in range(x.rank(1)):
            acc: Elem = {}
            for (i, jj), elem in x.diff[1].items():
                if jj == j:
                    acc = ring.elem_add(acc, ring.elem_mul(x.aug[i], elem))
            acc = {e: v for e, v in acc.items() if not q.is_zero(e)}
            if acc:
                raise AssertionError(f"aug . d != 0 on generator {j}")


# ---------- strand providers ----------


class RingStrands:
    """Module structure R: all nonzero ring monomials."""

    def __init__(self, ring: LevelRing):
        self.ring = ring

    def is_zero(self, e: Exponents) -> bool:
        return self.ring.mono_is_zero(e)

    def basis(self, w: Fraction) -> list[Exponents]:
        if w < 0:
            return []
        return self.ring.basis(w)


class QuotientStrands:
    """Module structure R/J for a monomial ideal J (given by exponent
    generators at the ring's level)."""

    def __init__(self, ring: LevelRing, ideal_exps: tuple[Exponents, ...]):
        self.ring = ring
        self.ideal_exps = tuple(ideal_exps)

    def is_zero(self, e: Exponents) -> bool:
        if self.ring.mono_is_zero(e):
            return True
        for t in self.ideal_exps:
            if all(a >= b for a, b in zip(e, t)):
                return True
        return False

    def basis(self, w: Fraction) -> list[Exponents]:
        if w < 0:
            return []
        return [e for e in self.ring.basis(w) if not self.is_zero(e)]


def k_strands(ring: LevelRing) -> QuotientStrands:
    """Residue field K = R modulo every variable."""
    gens = []
    for i in range(ring.nvars):
        e = [0] * ring.nvars
        e[i] = 1
        gens.append(tuple(e))
    return QuotientStrands(ring, tuple(gens))


class IdealStrands:
    """A monomial ideal as a submodule of R: monomials divisible by some
    generator. Products of a surviving monomial with a ring monomial stay
    in the ideal, so is_zero only ever drops genuine zeroes there."""

    def __init__(self, ring: LevelRing, ideal_exps: tuple[Exponents, ...]):
        self.ring = ring
        self.ideal_exps = tuple(ideal_exps)

    def _inside(self, e: Exponents) -> bool:
        for t in self.ideal_exps:
            if all(a >= b for a, b in zip(e, t)):
                return True
        return False

    def is_zero(self, e: Exponents) -> bool:
        return self.ring.mono_is_zero(e) or not self._inside(e)

    def basis(self, w: Fraction) -> list[Exponents]:
        if w <= 0:
            return []
        return [e for e in self.ring.basis(w) if self._inside(e)]


# ---------- strand bases and matrices ----------


class StrandBasis(NamedTuple):
    pairs: list[tuple[int, Exponents]]  # (generator index, module monomial)
    index: dict  # pair -> position


def strand_basis(x: FreeComplex, d: int, w: Fraction, provider) -> StrandBasis:
    pairs = []
    for j, g in enumerate(x.gens_at(d)):
        rem = w - g.weight
        for m in provider.basis(rem):
            pairs.append((j, m))
    return StrandBasis(pairs, {p: k for k, p in enumerate(pairs)})


def strand_matrix(
    x: FreeComplex,
    d: int,
    w: Fraction,
    provider,
    src: Optional[StrandBasis] = None,
    dst: Optional[StrandBasis] = None,
) -> SparseMatrix:
    """Matrix of diff[d] on the weight-w strand (rows: degree d-1)."""
    ring = x.ring
    F = x.field
    if src is None:
        src = strand_basis(x, d, w, provider)
    if dst is None:
        dst = strand_basis(x, d - 1, w, provider)
    by_col: dict[int, list[tuple[int, Elem]]] = {}
    for (i, j), elem in x.diff_at(d).items():
        by_col.setdefault(j, []).append((i, elem))
    m = SparseMatrix(len(dst.pairs), len(src.pairs), F)
    for c, (j, mono) in enumerate(src.pairs):
        for (i, elem) in by_col.get(j, []):
            for e, coeff in elem.items():
                ee = ring.mul_mono(e, mono)
                if provider.is_zero(ee):
                    continue
                r = dst.index.get((i, ee))
                if r is None:
                    continue
                m.add_at(r, c, coeff)
    return m


def strand_weights(x: FreeComplex, d: int, wmax: Fraction, provider) -> list[Fraction]:
    """Weights w <= wmax where the degree-d strand can be nonzero."""
    ws = set()
    ring_ws = list(provider.ring.basis_upto(wmax).keys())
    for g in x.gens_at(d):
        for rw in ring_ws:
            w = g.weight + rw
            if w <= wmax:
                ws.add(w)
    return sorted(ws)


# ---------- homology ----------


def homology_dim(x: FreeComplex, d: int, w: Fraction, provider) -> int:
    sb = strand_basis(x, d, w, provider)
    if not sb.pairs:
        return 0
    out = strand_matrix(x, d, w, provider, src=sb)
    inc = strand_matrix(x, d + 1, w, provider, dst=sb)
    return len(sb.pairs) - out.rank() - inc.rank()


class HomologyData(NamedTuple):
    dim: int
    basis: StrandBasis
    reps: list[Vec]  # cycles spanning homology, as strand vectors
    boundaries: Echelon
    coords_ech: Echelon  # augmented: reps over boundaries with bookkeeping tail

    def coords(self, vec: Vec, fieldobj) -> Vec:
        """Coordinates of a cycle in the homology basis."""
        n = len(self.basis.pairs)
        res = self.coords_ech.reduce(self.boundaries.reduce(vec))
        if any(c < n for c in res):
            raise ValueError("vector is not a cycle modulo boundaries")
        return {c - n: fieldobj.neg(v) for c, v in res.items()}


def homology_data(x: FreeComplex, d: int, w: Fraction, provider) -> HomologyData:
    F = x.field
    sb = strand_basis(x, d, w, provider)
    n = len(sb.pairs)
    bnd = Echelon(F)
    if n:
        inc = strand_matrix(x, d + 1, w, provider, dst=sb)
        for col in inc.transpose().rows:
            bnd.insert(col)
    out = strand_matrix(x, d, w, provider, src=sb)
    cycles = kernel_rows(out.rows, n, F)
    spanned = Echelon(F)
    for row in bnd.rows.values():
        spanned.insert(dict(row))
    reps = []
    for z in cycles:
        if spanned.insert(z) is not None:
            reps.append(z)
    coords = Echelon(F, prefer_below=n)
    for k, z in enumerate(reps):
        v = dict(bnd.reduce(z))
        v[n + k] = F.one
        coords.insert(v)
    return HomologyData(len(reps), sb, reps, bnd, coords)


# ---------- chain maps ----------


@dataclass
class ChainMap:
    """Chain map src -> dst; entries live in the target ring. ring_map
    pushes source monomials into the target ring (None = same ring)."""

    src: FreeComplex
    dst: FreeComplex
    entries: dict[int, dict[tuple[int, int], Elem]] = field(default_factory=dict)
    ring_map: Optional[Callable[[Exponents], Exponents]] = None

    def entries_at(self, d: int) -> dict[tuple[int, int], Elem]:
        return self.entries.get(d, {})

    def push_exp(self, e: Exponents) -> Exponents:
        return e if self.ring_map is None else self.ring_map(e)

    def column(self, d: int, j: int) -> dict[int, Elem]:
        out: dict[int, Elem] = {}
        for (i, jj), elem in self.entries_at(d).items():
            if jj == j:
                out[i] = elem
        return out


def identity_map(x: FreeComplex) -> ChainMap:
    ent: dict[int, dict[tuple[int, int], Elem]] = {}
    one = x.ring.one()
    for d, gl in x.gens.items():
        if gl:
            ent[d] = {(j, j): dict(one) for j in range(len(gl))}
    return ChainMap(src=x, dst=x, entries=ent)


def compose_maps(g: ChainMap, f: ChainMap) -> ChainMap:
    """g after f. f: A -> B, g: B -> C."""
    if g.src is not f.dst:
        raise ValueError("compose_maps: middle complexes differ")
    ring = g.dst.ring
    ent: dict[int, dict[tuple[int, int], Elem]] = {}
    for d, fd in f.entries.items():
        gd = g.entries_at(d)
        by_col_g: dict[int, list[tuple[int, Elem]]] = {}
        for (i, j), elem in gd.items():
            by_col_g.setdefault(j, []).append((i, elem))
        acc: dict[tuple[int, int], Elem] = {}
        for (i, j), elem in fd.items():
            pushed = {g.push_exp(e): v for e, v in elem.items()}
            for (i2, elem2) in by_col_g.get(i, []):
                prod = ring.elem_mul(elem2, ring.reduce_elem(pushed))
                if not prod:
                    continue
                key = (i2, j)
                s = ring.elem_add(acc.get(key, {}), prod)
                if s:
                    acc[key] = s
                else:
                    acc.pop(key, None)
        if acc:
            ent[d] = acc
    rm = None
    if f.ring_map or g.ring_map:
        fm, gm = f.ring_map, g.ring_map
        if fm and gm:
            rm = lambda e: gm(fm(e))  # noqa: E731
        else:
            rm = fm or gm
    return ChainMap(src=f.src, dst=g.dst, entries=ent, ring_map=rm)


def check_chain_map(f: ChainMap) -> None:
    """Assert d . f = f . d degreewise."""
    ring = f.dst.ring

    def col_to_elem_map(cols: dict[int, Elem]) -> dict[int, Elem]:
        return cols

    for d in sorted(set(f.entries) | set(f.src.diff)):
        # f then d on one side, d then f on the other, per source generator
        for j in range(f.src.rank(d)):
            lhs: dict[int, Elem] = {}
            for i, elem in f.column(d, j).items():
                for (i2, delem) in _col_items(f.dst.diff_at(d), i):
                    acc = ring.elem_mul(delem, elem)
                    if acc:
                        lhs[i2] = ring.elem_add(lhs.get(i2, {}), acc)
            rhs: dict[int, Elem] = {}
            for i, selem in _col_items(f.src.diff_at(d), j):
                pushed = ring.reduce_elem(
                    {f.push_exp(e): v for e, v in selem.items()}
                )
                for i2, felem in f.column(d - 1, i).items():
                    acc = ring.elem_mul(felem, pushed)
                    if acc:
                        rhs[i2] = ring.elem_add(rhs.get(i2, {}), acc)
            keys = set(lhs) | set(rhs)
            for k in keys:
                dl = ring.elem_add(lhs.get(k, {}), ring.elem_neg(rhs.get(k, {})))
                if dl:
                    raise AssertionError(
                        f"not a chain map at degree {d}, source gen {j}, row {k}"
                    )


def _col_items(entries: dict[tuple[int, int], Elem], j: int):
    for (i, jj), elem in entries.items():
        if jj == j:
            yield i, elem


# ---------- strand action of a chain map ----------


def push_strand_vec(
    f: ChainMap,
    d: int,
    vec: Vec,
    src_sb: StrandBasis,
    dst_sb: StrandBasis,
    provider,
) -> Vec:
    """Image of a strand vector under f (weights preserved)."""
    ring = f.dst.ring
    F = f.dst.field
    by_col: dict[int, list[tuple[int, Elem]]] = {}
    for (i, j), elem in f.entries_at(d).items():
        by_col.setdefault(j, []).append((i, elem))
    out: Vec = {}
    for pos, c in vec.items():
        j, mono = src_sb.pairs[pos]
        pm = f.push_exp(mono)
        for (i, elem) in by_col.get(j, []):
            for e, coeff in elem.items():
                ee = ring.mul_mono(e, pm)
                if provider.is_zero(ee):
                    continue
                r = dst_sb.index.get((i, ee))
                if r is None:
                    continue
                nv = F.normalize(F.add(out.get(r, F.zero), F.mul(c, coeff)))
                if F.is_zero(nv):
                    out.pop(r, None)
                else:
                    out[r] = nv
    return out


def homology_map_matrix(
    f: ChainMap, d: int, src_h: HomologyData, dst_h: HomologyData, provider
) -> SparseMatrix:
    """Matrix of H_d(f) on the chosen homology bases (one weight strand)."""
    F = f.dst.field
    m = SparseMatrix(dst_h.dim, src_h.dim, F)
    for k, rep in enumerate(src_h.reps):
        img = push_strand_vec(f, d, rep, src_h.basis, dst_h.basis, provider)
        for r, v in dst_h.coords(img, F).items():
            m.set(r, k, v)
    return m


# ---------- tensor products ----------


class TensorInfo(NamedTuple):
    prov: dict  # (d, idx) -> (p, i, q, j)
    rev: dict  # (p, i, q, j) -> idx


def tensor_complexes(
    a: FreeComplex,
    b: FreeComplex,
    dmax: Optional[int] = None,
    wmax: Optional[Fraction] = None,
) -> tuple[FreeComplex, TensorInfo]:
    """a (x) b with Koszul signs, truncated above dmax / wmax.

    Weight truncation is exact for strands of weight <= wmax since the
    differential preserves weight; degree truncation is exact below dmax.
    """
    if a.ring is not b.ring:
        raise ValueError("tensor factors live over different rings")
    ring = a.ring
    gens: dict[int, list[GenInfo]] = {}
    prov: dict = {}
    rev: dict = {}
    top = a.hi + b.hi if dmax is None else min(a.hi + b.hi, dmax)
    for d in range(a.lo + b.lo, top + 1):
        gl: list[GenInfo] = []
        for p in range(a.lo, a.hi + 1):
            q = d - p
            if q < b.lo or q > b.hi:
                continue
            for i, ga in enumerate(a.gens_at(p)):
                for j, gb in enumerate(b.gens_at(q)):
                    w = ga.weight + gb.weight
                    if wmax is not None and w > wmax:
                        continue
                    idx = len(gl)
                    gl.append(GenInfo(w, f"{ga.tag}*{gb.tag}"))
                    prov[(d, idx)] = (p, i, q, j)
                    rev[(p, i, q, j)] = idx
        gens[d] = gl
    diff: dict[int, dict[tuple[int, int], Elem]] = {}
    for d, gl in gens.items():
        if d - 1 not in gens:
            continue
        ent: dict[tuple[int, int], Elem] = {}
        for idx in range(len(gl)):
            p, i, q, j = prov[(d, idx)]
            for (i2, elem) in _col_items(a.diff_at(p), i):
                tgt = rev.get((p - 1, i2, q, j))
                if tgt is not None:
                    ent[(tgt, idx)] = elem
            sign = -1 if p % 2 else 1
            for (j2, elem) in _col_items(b.diff_at(q), j):
                tgt = rev.get((p, i, q - 1, j2))
                if tgt is not None:
                    ent[(tgt, idx)] = (
                        elem if sign == 1 else ring.elem_scale(ring.field.from_int(-1), elem)
                    )
        if ent:
            diff[d] = ent
    aug = None
    if (
        a.aug is not None
        and b.aug is not None
        and not a.aug_quotient
        and not b.aug_quotient
        and 0 in gens
    ):
        # both augment into R, so the product augments by multiplication
        aug = []
        for idx in range(len(gens[0])):
            p, i, q, j = prov[(0, idx)]
            aug.append(ring.elem_mul(a.aug[i], b.aug[j]))
    return (
        FreeComplex(ring=ring, gens=gens, diff=diff, aug=aug),
        TensorInfo(prov, rev),
    )


def tensor_maps(
    f: ChainMap,
    g: ChainMap,
    src: FreeComplex,
    src_info: TensorInfo,
    dst: FreeComplex,
    dst_info: TensorInfo,
) -> ChainMap:
    """f (x) g on given tensor models; f and g must be degree-0 maps
    sharing a ring map, so no Koszul signs arise."""
    if f.ring_map is not None and g.ring_map is not None and f.ring_map is not g.ring_map:
        raise ValueError("tensor_maps: factors carry different ring maps")
    ring = dst.ring
    ent: dict[int, dict[tuple[int, int], Elem]] = {}
    for (d, idx), (p, i, q, j) in src_info.prov.items():
        fcol = f.column(p, i)
        gcol = g.column(q, j)
        for i2, ea in fcol.items():
            for j2, eb in gcol.items():
                tgt = dst_info.rev.get((p, i2, q, j2))
                if tgt is None:
                    continue
                prod = ring.elem_mul(ea, eb)
                if not prod:
                    continue
                dent = ent.setdefault(d, {})
                key = (tgt, idx)
                s = ring.elem_add(dent.get(key, {}), prod)
                if s:
                    dent[key] = s
                else:
                    dent.pop(key, None)
    return ChainMap(
        src=src, dst=dst, entries=ent, ring_map=f.ring_map or g.ring_map
    )


# ---------- cones ----------


def cone(f: ChainMap) -> tuple[FreeComplex, dict]:
    """Mapping cone of f: X -> Y (same ring): C_d = Y_d + X_{d-1},
    d(y, x) = (dy + fx, -dx). Returns the cone and an index record
    {('Y', d, i): idx, ('X', d-1, i): idx} into its generators."""
    if f.ring_map is not None:
        raise ValueError("cone needs a same-ring chain map")
    x, y = f.src, f.dst
    ring = y.ring
    gens: dict[int, list[GenInfo]] = {}
    where: dict = {}
    lo = min(y.lo, x.lo + 1)
    hi = max(y.hi, x.hi + 1)
    for d in range(lo, hi + 1):
        gl: list[GenInfo] = []
        for i, g in enumerate(y.gens_at(d)):
            where[("Y", d, i)] = len(gl)
            gl.append(GenInfo(g.weight, f"c({g.tag})"))
        for i, g in enumerate(x.gens_at(d - 1)):
            where[("X", d - 1, i)] = len(gl)
            gl.append(GenInfo(g.weight, f"s({g.tag})"))
        gens[d] = gl
    diff: dict[int, dict[tuple[int, int], Elem]] = {}
    neg1 = ring.field.from_int(-1)
    for d in range(lo, hi + 1):
        ent: dict[tuple[int, int], Elem] = {}
        for (i, j), elem in y.diff_at(d).items():
            ent[(where[("Y", d - 1, i)], where[("Y", d, j)])] = elem
        for (i, j), elem in f.entries_at(d - 1).items():
            ent[(where[("Y", d - 1, i)], where[("X", d - 1, j)])] = elem
        for (i, j), elem in x.diff_at(d - 1).items():
            ent[(where[("X", d - 2, i)], where[("X", d - 1, j)])] = ring.elem_scale(
                neg1, elem
            )
        if ent:
            diff[d] = ent
    return FreeComplex(ring=ring, gens=gens, diff=diff), where


def cone_map(
    fx: ChainMap,
    fy: ChainMap,
    src_cone: FreeComplex,
    src_where: dict,
    dst_cone: FreeComplex,
    dst_where: dict,
) -> ChainMap:
    """Induced map on cones from a strictly commuting square: fx on the
    shifted part, fy on the target part. Both must share a ring map."""
    if fx.ring_map is not None and fy.ring_map is not None and fx.ring_map is not fy.ring_map:
        raise ValueError("cone_map: legs carry different ring maps")
    ent: dict[int, dict[tuple[int, int], Elem]] = {}
    for d, fd in fy.entries.items():
        for (i, j), elem in fd.items():
            si = src_where.get(("Y", d, j))
            di = dst_where.get(("Y", d, i))
            if si is not None and di is not None:
                ent.setdefault(d, {})[(di, si)] = elem
    for d, fd in fx.entries.items():
        for (i, j), elem in fd.items():
            si = src_where.get(("X", d, j))
            di = dst_where.get(("X", d, i))
            if si is not None and di is not None:
                ent.setdefault(d + 1, {})[(di, si)] = elem
    return ChainMap(
        src=src_cone, dst=dst_cone, entries=ent, ring_map=fx.ring_map or fy.ring_map
    )


# ---------- minimization ----------


def minimize(x: FreeComplex) -> FreeComplex:
    """Homotopy-equivalent complex with no unit entries (Gauss cancellation).

    Cancelling a unit entry c at (i, j) of diff[d] removes generator j in
    degree d and i in degree d-1, replaces the block by its Schur
    complement, and restricts the adjacent differentials. The augmentation
    restricts to the surviving degree-0 generators.
    """
    ring = x.ring
    F = x.field
    unit_exp = ring.unit
    # mutable column/row indexed structure per degree, keyed by original index
    cols: dict[int, dict[int, dict[int, Elem]]] = {}
    rows: dict[int, dict[int, set]] = {}
    alive: dict[int, set] = {d: set(range(len(g))) for d, g in x.gens.items()}
    for d, entries in x.diff.items():
        cd = cols.setdefault(d, {})
        rd = rows.setdefault(d, {})
        for (i, j), elem in entries.items():
            cd.setdefault(j, {})[i] = dict(elem)
            rd.setdefault(i, set()).add(j)

    def unit_of(elem: Elem):
        if len(elem) == 1 and unit_exp in elem:
            return elem[unit_exp]
        return None

    def find_unit():
        for d in sorted(cols):
            for j, col in cols[d].items():
                for i, elem in col.items():
                    if unit_of(elem) is not None:
                        return d, i, j
        return None

    def drop_entry(d: int, i: int, j: int):
        cd = cols.get(d, {})
        col = cd.get(j)
        if col is not None:
            col.pop(i, None)
            if not col:
                cd.pop(j, None)
        rd = rows.get(d, {})
        rset = rd.get(i)
        if rset is not None:
            rset.discard(j)
            if not rset:
                rd.pop(i, None)

    def set_entry(d: int, i: int, j: int, elem: Elem):
        if elem:
            cols.setdefault(d, {}).setdefault(j, {})[i] = elem
            rows.setdefault(d, {}).setdefault(i, set()).add(j)
        else:
            drop_entry(d, i, j)

    while True:
        hit = find_unit()
        if hit is None:
            break
        d, ui, uj = hit
        c = cols[d][uj][ui]
        cinv = {unit_exp: F.inv(c[unit_exp])}
        sigma = {r: e for r, e in cols[d][uj].items() if r != ui}
        rho = {
            k: cols[d][k][ui]
            for k in list(rows[d].get(ui, ()))
            if k != uj
        }
        # Schur complement on the remaining block
        for k, b in rho.items():
            factor = ring.elem_mul(cinv, b)
            for r, s in sigma.items():
                cur = cols[d].get(k, {}).get(r, {})
                upd = ring.elem_add(cur, ring.elem_neg(ring.elem_mul(s, factor)))
                set_entry(d, r, k, upd)
        # delete row ui and column uj in degree d
        for k in list(rows[d].get(ui, ())):
            drop_entry(d, ui, k)
        for r in list(cols[d].get(uj, {})):
            drop_entry(d, r, uj)
        # generator uj disappears from degree d: clear its row above
        for k in list(rows.get(d + 1, {}).get(uj, ())):
            drop_entry(d + 1, uj, k)
        # generator ui disappears from degree d-1: clear its column below
        for r in list(cols.get(d - 1, {}).get(ui, {})):
            drop_entry(d - 1, r, ui)
        alive[d].discard(uj)
        alive[d - 1].discard(ui)

    # rebuild with compacted indices
    new_gens: dict[int, list[GenInfo]] = {}
    remap: dict[int, dict[int, int]] = {}
    for d, g in x.gens.items():
        keep = sorted(alive.get(d, ()))
        remap[d] = {old: new for new, old in enumerate(keep)}
        new_gens[d] = [g[old] for old in keep]
    new_diff: dict[int, dict[tuple[int, int], Elem]] = {}
    for d, cd in cols.items():
        ent: dict[tuple[int, int], Elem] = {}
        for j, col in cd.items():
            for i, elem in col.items():
                if elem:
                    ent[(remap[d - 1][i], remap[d][j])] = elem
        if ent:
            new_diff[d] = ent
    new_aug = None
    if x.aug is not None:
        new_aug = [x.aug[old] for old in sorted(alive.get(0, ()))]
    return FreeComplex(
        ring=ring,
        gens=new_gens,
        diff=new_diff,
        aug=new_aug,
        aug_quotient=x.aug_quotient,
    )


# ---------- minimal resolutions ----------


def aug_strand_matrix(
    x: FreeComplex, w: Fraction, src: Optional[StrandBasis] = None
) -> tuple[SparseMatrix, StrandBasis, list[Exponents]]:
    """Strand matrix of the augmentation at weight w. Rows are indexed by
    the monomial basis of the augmentation target."""
    if x.aug is None:
        raise ValueError("complex has no augmentation")
    ring = x.ring
    prov = QuotientStrands(ring, x.aug_quotient)
    if src is None:
        src = strand_basis(x, 0, w, RingStrands(ring))
    tgt = prov.basis(w)
    tindex = {m: r for r, m in enumerate(tgt)}
    m = SparseMatrix(len(tgt), len(src.pairs), x.field)
    for c, (j, mono) in enumerate(src.pairs):
        for e, coeff in x.aug[j].items():
            ee = ring.mul_mono(e, mono)
            if prov.is_zero(ee):
                continue
            r = tindex.get(ee)
            if r is not None:
                m.add_at(r, c, coeff)
    return m, src, tgt


def minimal_resolution(
    ring: LevelRing,
    quotient_gens: tuple[Exponents, ...],
    dmax: int,
    wmax: Fraction,
) -> FreeComplex:
    """Minimal free resolution of R / (monomial ideal) up to degree dmax
    and generator weight wmax.

    New generators at each degree complete the strand kernels modulo
    multiples of generators already chosen, ascending through weights, so
    no differential entry is a unit and strands of weight <= wmax are
    resolved exactly.
    """
    wmax = Fraction(wmax)
    prov = RingStrands(ring)
    x = FreeComplex(
        ring=ring,
        gens={0: [GenInfo(Fraction(0), "e")]},
        diff={},
        aug=[ring.one()],
        aug_quotient=tuple(quotient_gens),
    )
    ring_ws = sorted(ring.basis_upto(wmax).keys())
    for d in range(1, dmax + 1):
        prev_gens = x.gens_at(d - 1)
        if not prev_gens:
            x.gens[d] = []
            continue
        cand_ws = sorted(
            {g.weight + rw for g in prev_gens for rw in ring_ws if g.weight + rw <= wmax}
        )
        chosen: list[tuple[Fraction, dict[int, Elem], str]] = []
        for w in cand_ws:
            sb = strand_basis(x, d - 1, w, prov)
            if not sb.pairs:
                continue
            if d == 1:
                mat, _, _ = aug_strand_matrix(x, w, src=sb)
            else:
                mat = strand_matrix(x, d - 1, w, prov, src=sb)
            cycles = kernel_rows(mat.rows, len(sb.pairs), x.field)
            if not cycles:
                continue
            span = Echelon(x.field)
            for (wg, colg, _tag) in chosen:
                for mono in prov.basis(w - wg):
                    vec: Vec = {}
                    for i, elem in colg.items():
                        for e, coeff in elem.items():
                            ee = ring.mul_mono(e, mono)
                            if prov.is_zero(ee):
                                continue
                            pos = sb.index.get((i, ee))
                            if pos is None:
                                continue
                            cur = x.field.add(vec.get(pos, x.field.zero), coeff)
                            cur = x.field.normalize(cur)
                            if x.field.is_zero(cur):
                                vec.pop(pos, None)
                            else:
                                vec[pos] = cur
                    span.insert(vec)
            for z in cycles:
                if span.insert(dict(z)) is None:
                    continue
                col: dict[int, Elem] = {}
                for pos, coeff in z.items():
                    i, mono = sb.pairs[pos]
                    cur = col.setdefault(i, {})
                    cur[mono] = coeff
                chosen.append((w, col, f"s{d}.{len(chosen)}"))
        x.gens[d] = [GenInfo(w, tag) for (w, _c, tag) in chosen]
        ent: dict[tuple[int, int], Elem] = {}
        for j, (_w, col, _tag) in enumerate(chosen):
            for i, elem in col.items():
                if elem:
                    ent[(i, j)] = elem
        if ent:
            x.diff[d] = ent
        if not chosen:
            break
    return x


def ideal_resolution(
    ring: LevelRing, gens: list[Exponents], dmax: int, wmax: Fraction
) -> FreeComplex:
    """Minimal free resolution of the ideal (gens) as a module: the
    resolution of R/(gens) shifted down one degree, augmented into R by
    the inclusion."""
    res = minimal_resolution(ring, tuple(gens), dmax + 1, Fraction(wmax))
    gens_out: dict[int, list[GenInfo]] = {}
    diff_out: dict[int, dict[tuple[int, int], Elem]] = {}
    for d, gl in res.gens.items():
        if d >= 1:
            gens_out[d - 1] = list(gl)
    for d, ent in res.diff.items():
        if d >= 2:
            diff_out[d - 1] = dict(ent)
    aug = []
    for j in range(len(res.gens_at(1))):
        acc: Elem = {}
        for (i, jj), elem in res.diff_at(1).items():
            if jj == j:
                # row i is the single degree-0 generator of res(R/I)
                acc = ring.elem_add(acc, elem)
        aug.append(acc)
    return FreeComplex(
        ring=ring, gens=gens_out, diff=diff_out, aug=aug, aug_quotient=()
    )


# ---------- lifting chain maps over resolutions ----------


def lift_chain_map(
    x: FreeComplex,
    y: FreeComplex,
    ring_map: Optional[Callable[[Exponents], Exponents]] = None,
) -> ChainMap:
    """Lift the identity of the augmentation targets to a chain map
    x -> y over acyclic y (a resolution). With a ring_map this lifts
    along a level inclusion; augmentation targets must correspond.

    Degree 0 solves aug_y(f(g)) = push(aug_x(g)) on each strand, higher
    degrees solve d(f(g)) = f(d(g)); failure to solve raises ValueError.
    """
    if x.aug is None or y.aug is None:
        raise ValueError("both complexes need augmentations")
    ring = y.ring
    F = y.field
    prov = RingStrands(ring)

    def push_elem(elem: Elem) -> Elem:
        if ring_map is None:
            return ring.reduce_elem(elem)
        return ring.reduce_elem({ring_map(e): v for e, v in elem.items()})

    f = ChainMap(src=x, dst=y, entries={}, ring_map=ring_map)
    tgt_prov = QuotientStrands(ring, y.aug_quotient)
    for d in range(x.lo, x.hi + 1):
        ent: dict[tuple[int, int], Elem] = {}
        for j, g in enumerate(x.gens_at(d)):
            w = g.weight
            ysb = strand_basis(y, d, w, prov)
            if d == 0:
                mat, _, tgt = aug_strand_matrix(y, w, src=ysb)
                target = push_elem(x.aug[j])
                target = {e: v for e, v in target.items() if not tgt_prov.is_zero(e)}
                tindex = {m: r for r, m in enumerate(tgt)}
                rhs = {tindex[e]: v for e, v in target.items()}
            else:
                mat = strand_matrix(y, d, w, prov, src=ysb)
                ydst = strand_basis(y, d - 1, w, prov)
                rhs: Vec = {}
                for i, selem in _col_items(x.diff_at(d), j):
                    pushed = push_elem(selem)
                    for i2, felem in f.column(d - 1, i).items():
                        prod = ring.elem_mul(felem, pushed)
                        for e, coeff in prod.items():
                            r = ydst.index.get((i2, e))
                            if r is None:
                                continue
                            nv = F.normalize(F.add(rhs.get(r, F.zero), coeff))
                            if F.is_zero(nv):
                                rhs.pop(r, None)
                            else:
                                rhs[r] = nv
            sol = solve_rows(mat.rows, len(ysb.pairs), rhs, F)
            if sol is None:
                raise ValueError(f"no lift at degree {d}, generator {j}")
            for pos, coeff in sol.items():
                i, mono = ysb.pairs[pos]
                cur = ent.setdefault((i, j), {})
                nv = F.normalize(F.add(cur.get(mono, F.zero), coeff))
                if F.is_zero(nv):
                    cur.pop(mono, None)
                else:
                    cur[mono] = nv
        ent = {k: v for k, v in ent.items() if v}
        if ent:
            f.entries[d] = ent
    return f


# ---------- hom complexes ----------


def hom_complex(x: FreeComplex, y: FreeComplex) -> tuple[FreeComplex, TensorInfo]:
    """Hom_R(x, y) as a complex: degree d holds Hom(x_p, y_{p+d}), basis
    element (p, i) -> (p+d, j) with weight w(y_j) - w(x_i);
    (df)(v) = d(f v) - (-1)^{|f|} f(dv)."""
    if x.ring is not y.ring:
        raise ValueError("hom factors live over different rings")
    ring = x.ring
    gens: dict[int, list[GenInfo]] = {}
    prov: dict = {}
    rev: dict = {}
    lo = y.lo - x.hi
    hi = y.hi - x.lo
    for d in range(lo, hi + 1):
        gl: list[GenInfo] = []
        for p in range(x.lo, x.hi + 1):
            q = p + d
            if q < y.lo or q > y.hi:
                continue
            for i, gx in enumerate(x.gens_at(p)):
                for j, gy in enumerate(y.gens_at(q)):
                    idx = len(gl)
                    gl.append(GenInfo(gy.weight - gx.weight, f"[{gx.tag}->{gy.tag}]"))
                    prov[(d, idx)] = (p, i, q, j)
                    rev[(p, i, q, j)] = idx
        gens[d] = gl
    diff: dict[int, dict[tuple[int, int], Elem]] = {}
    for d, gl in gens.items():
        if d - 1 not in gens:
            continue
        ent: dict[tuple[int, int], Elem] = {}
        sign = -1 if d % 2 else 1
        for idx in range(len(gl)):
            p, i, q, j = prov[(d, idx)]
            # postcompose with d_y: lands in Hom(x_p, y_{q-1})
            for (j2, elem) in _col_items(y.diff_at(q), j):
                tgt = rev.get((p, i, q - 1, j2))
                if tgt is not None:
                    key = (tgt, idx)
                    s = ring.elem_add(ent.get(key, {}), elem)
                    if s:
                        ent[key] = s
                    else:
                        ent.pop(key, None)
            # precompose with d_x: entries of d_x hitting row i give
            # components on Hom(x_{p+1}, y_q)
            dxp = x.diff_at(p + 1)
            for (ii, i2), elem in dxp.items():
                if ii != i:
                    continue
                tgt = rev.get((p + 1, i2, q, j))
                if tgt is None:
                    continue
                term = elem if sign == -1 else ring.elem_scale(ring.field.from_int(-1), elem)
                key = (tgt, idx)
                s = ring.elem_add(ent.get(key, {}), term)
                if s:
                    ent[key] = s
                else:
                    ent.pop(key, None)
        if ent:
            diff[d] = ent
    return FreeComplex(ring=ring, gens=gens, diff=diff), TensorInfo(prov, rev)
