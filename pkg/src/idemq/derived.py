"""Derived powers of an ideal family and their stabilized homology.

X_{n,l} models the n-fold derived tensor power of I(l) as the n-fold
tensor of the minimal free resolution of the ideal at level l; the cone
of the multiplication eps_n: X_{n,l} -> R(l) models R/I^{(x)n}. Homotopy
of the idempotent quotient in degree d is read off that cone at n = d+2,
the smallest power the stabilization bound trusts for degree d.

Every table is a colimit over ring levels, detected cell by cell: a
weight cell is Stable when its last `window` homology transition ranks
agree with each other and with the rank of their composite, and the
stable value is that common rank (the eventual image). A cell whose
class appears later than the level where its weight first becomes
representable must additionally survive a full window past its birth;
without that guard a freshly born persistent class is indistinguishable
from the transient classes that die one level after they appear.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, NamedTuple, Optional

from .complexes import (
    ChainMap,
    FreeComplex,
    HomologyData,
    IdealStrands,
    QuotientStrands,
    RingStrands,
    TensorInfo,
    cone,
    cone_map,
    compose_maps,
    homology_data,
    homology_map_matrix,
    ideal_resolution,
    k_strands,
    lift_chain_map,
    minimal_resolution,
    minimize,
    strand_weights,
    tensor_complexes,
    tensor_maps,
    unit_complex,
)
from .ideals import IdealFamily, NotIdempotent, UnknownUpToDepth, check_idempotent
from .rings import Elem, Exponents, LevelRing, RingSpec, make_level_ring
from .sparsela import SparseMatrix, matmul

# ---------- bounds ----------


class Bounds(NamedTuple):
    deg_max: int  # internal complex degree cap
    weight_max: Fraction
    max_level: int = 6
    window: int = 2


def default_bounds(N: int) -> Bounds:
    """Internal bounds for a degree-N request: one spare degree for cone
    boundaries plus margin, weights to N+2."""
    return Bounds(N + 3, Fraction(N + 2), 6, 2)


# ---------- stabilization detector ----------


def rep_level(w: Fraction, root_base: int) -> int:
    """First level whose weight lattice contains w."""
    d = Fraction(w).denominator
    cur, l = 1, 0
    while cur % d:
        cur *= root_base
        l += 1
        if l > 64:
            raise ValueError(f"weight {w} is not representable at any level")
    return l


class CellResult(NamedTuple):
    value: int  # rank of the eventual image over the window
    stable: bool
    dims: tuple[int, ...]  # homology dim at each inspected level


def colimit_stabilize(
    levels: list[int],
    dims: list[int],
    steps: list[SparseMatrix],
    window: int,
    first_rep: int,
) -> tuple[int, bool]:
    """Stable value of one colimit cell from its level dims and
    consecutive transition matrices; first_rep is the first level where
    the cell's weight is representable."""
    if len(steps) < window:
        return (dims[-1] if dims else 0, False)
    alive = [k for k, v in enumerate(dims) if v]
    if alive:
        born_idx = alive[0]
        born = levels[born_idx]
        if born > max(first_rep, levels[0]) and levels[-1] < born + window:
            # born later than it could have been: demand a full window
            # past birth before judging, unless the class already died
            died = dims[-1] == 0 and all(
                m.rank() == 0 for m in steps[born_idx:]
            )
            if not died:
                return (dims[-1], False)
    tail = steps[-window:]
    comp = tail[0]
    for m in tail[1:]:
        comp = matmul(m, comp)
    crank = comp.rank()
    stable = all(m.rank() == crank for m in tail)
    return (crank, stable)


# ---------- level diagrams ----------


@dataclass
class LevelDiagram:
    """Complexes over consecutive levels with transition chain maps
    (steps[k]: complexes[k] -> complexes[k+1]) and a module structure
    provider per level. Homology is cached under (tag, level, d, w)."""

    levels: list[int]
    complexes: list[FreeComplex]
    steps: list[ChainMap]
    providers: list
    root_base: int
    cache: dict = dc_field(default_factory=dict)
    tag: tuple = ()

    def homology(self, k: int, d: int, w: Fraction) -> HomologyData:
        key = (self.tag, self.levels[k], d, w)
        h = self.cache.get(key)
        if h is None:
            h = homology_data(self.complexes[k], d, w, self.providers[k])
            self.cache[key] = h
        return h

    def step_matrix(self, k: int, d: int, w: Fraction) -> SparseMatrix:
        key = (self.tag, "step", self.levels[k], d, w)
        m = self.cache.get(key)
        if m is None:
            src_h = self.homology(k, d, w)
            dst_h = self.homology(k + 1, d, w)
            if src_h.dim == 0 or dst_h.dim == 0:
                m = SparseMatrix(dst_h.dim, src_h.dim, self.complexes[0].field)
            else:
                m = homology_map_matrix(
                    self.steps[k], d, src_h, dst_h, self.providers[k + 1]
                )
            self.cache[key] = m
        return m

    def cell_weights(self, d: int, wmax: Fraction) -> list[Fraction]:
        ws = set()
        for k in range(len(self.levels)):
            ws.update(strand_weights(self.complexes[k], d, wmax, self.providers[k]))
        return sorted(ws)

    def run(
        self, degrees, wmax: Fraction, window: int
    ) -> dict[tuple[int, Fraction], CellResult]:
        out = {}
        for d in degrees:
            for w in self.cell_weights(d, wmax):
                hs = [self.homology(k, d, w) for k in range(len(self.levels))]
                dims = [h.dim for h in hs]
                mats = [
                    self.step_matrix(k, d, w)
                    for k in range(len(self.levels) - 1)
                ]
                if not any(dims):
                    continue
                value, stable = colimit_stabilize(
                    self.levels, dims, mats, window, rep_level(w, self.root_base)
                )
                out[(d, w)] = CellResult(value, stable, tuple(dims))
        return out


# ---------- result types ----------


@dataclass(frozen=True)
class Cell:
    degree: int
    weight: Fraction
    dim: int
    stable: bool
    level_dims: tuple[int, ...] = ()


@dataclass
class StabilizedTable:
    name: str
    cells: list[Cell]  # stable nonzero and unstable cells, sorted
    levels: tuple[int, ...]
    trusted_degree_max: int
    deg_max: int

    def dims(self) -> tuple[int, ...]:
        out = [0] * (self.deg_max + 1)
        for c in self.cells:
            if c.stable and c.degree <= self.deg_max:
                out[c.degree] += c.dim
        return tuple(out)

    def cell_map(self) -> dict[tuple[int, Fraction], Cell]:
        return {(c.degree, c.weight): c for c in self.cells}

    def degree_stable(self, d: int) -> bool:
        return all(c.stable for c in self.cells if c.degree == d)

    def all_stable(self) -> bool:
        return all(c.stable for c in self.cells)

    def unstable_cells(self) -> list[Cell]:
        return [c for c in self.cells if not c.stable]

    def stable_cells_at(self, d: int) -> dict[Fraction, int]:
        return {
            c.weight: c.dim
            for c in self.cells
            if c.degree == d and c.stable and c.dim
        }


def _make_table(
    name: str,
    raw: dict[tuple[int, Fraction], CellResult],
    levels,
    trusted: int,
    deg_max: int,
) -> StabilizedTable:
    cells = []
    for (d, w) in sorted(raw):
        r = raw[(d, w)]
        if r.stable and r.value == 0:
            continue
        cells.append(Cell(d, w, r.value, r.stable, r.dims))
    return StabilizedTable(name, cells, tuple(levels), trusted, deg_max)


# ---------- the tower ----------


def _family_contains_unit(family: IdealFamily) -> bool:
    return any(all(x == 0 for x in g) for g in family.gens)


class Tower:
    """Per-level resolutions, derived powers, cones and their transition
    maps for one ideal family under fixed degree/weight bounds."""

    def __init__(
        self,
        spec: RingSpec,
        family: IdealFamily,
        deg_max: int,
        weight_max: Fraction,
    ):
        if family.spec is not spec:
            raise ValueError("family was built over a different spec")
        self.spec = spec
        self.family = family
        self.dmax = deg_max
        self.wmax = Fraction(weight_max)
        self._inc: dict[int, Callable[[Exponents], Exponents]] = {}
        self._resI: dict[int, FreeComplex] = {}
        self._alpha: dict[int, ChainMap] = {}
        self._X: dict[tuple[int, int], FreeComplex] = {}
        self._Xinfo: dict[tuple[int, int], TensorInfo] = {}
        self._lam: dict[tuple[int, int], ChainMap] = {}
        self._unit: dict[int, FreeComplex] = {}
        self._Q: dict[tuple[int, int], tuple[FreeComplex, dict]] = {}
        self._Qstep: dict[tuple[int, int], ChainMap] = {}
        self._sigma: dict[tuple[int, int], ChainMap] = {}
        self._cof: dict[tuple[int, int], tuple[FreeComplex, dict]] = {}
        self._cofstep: dict[tuple[int, int], ChainMap] = {}
        self.cache: dict = {}

    # -- per-level primitives --

    def ring(self, l: int) -> LevelRing:
        return make_level_ring(self.spec, l)

    def inc(self, l: int):
        f = self._inc.get(l)
        if f is None:
            f = self.ring(l).include_exp
            self._inc[l] = f
        return f

    def unit(self, l: int) -> FreeComplex:
        u = self._unit.get(l)
        if u is None:
            u = unit_complex(self.ring(l))
            self._unit[l] = u
        return u

    def unit_step(self, l: int) -> ChainMap:
        return ChainMap(
            src=self.unit(l),
            dst=self.unit(l + 1),
            entries={0: {(0, 0): self.ring(l + 1).one()}},
            ring_map=self.inc(l),
        )

    def resI(self, l: int) -> FreeComplex:
        r = self._resI.get(l)
        if r is None:
            ring = self.ring(l)
            r = ideal_resolution(
                ring, self.family.gens_at(ring), self.dmax, self.wmax
            )
            self._resI[l] = r
        return r

    def alpha(self, l: int) -> ChainMap:
        a = self._alpha.get(l)
        if a is None:
            a = lift_chain_map(self.resI(l), self.resI(l + 1), ring_map=self.inc(l))
            self._alpha[l] = a
        return a

    # -- derived powers --

    def X(self, n: int, l: int) -> FreeComplex:
        if n < 1:
            raise ValueError("derived powers start at n = 1")
        x = self._X.get((n, l))
        if x is None:
            if n == 1:
                x = self.resI(l)
            else:
                t, info = tensor_complexes(
                    self.X(n - 1, l), self.resI(l), self.dmax, self.wmax
                )
                x = minimize(t)
                if any(x.rank(d) != t.rank(d) for d in t.gens):
                    # tensors of minimal complexes over a graded local ring
                    # stay minimal; anything else voids the index tables
                    raise AssertionError("tensor of minimal complexes shrank")
                self._Xinfo[(n, l)] = info
            self._X[(n, l)] = x
        return x

    def Xinfo(self, n: int, l: int) -> TensorInfo:
        self.X(n, l)
        return self._Xinfo[(n, l)]

    def lam(self, n: int, l: int) -> ChainMap:
        """Level transition X(n, l) -> X(n, l+1)."""
        f = self._lam.get((n, l))
        if f is None:
            if n == 1:
                f = self.alpha(l)
            else:
                f = tensor_maps(
                    self.lam(n - 1, l),
                    self.alpha(l),
                    self.X(n, l),
                    self.Xinfo(n, l),
                    self.X(n, l + 1),
                    self.Xinfo(n, l + 1),
                )
            self._lam[(n, l)] = f
        return f

    def eps(self, n: int, l: int) -> ChainMap:
        """Multiplication X(n, l) -> R, stored as the augmentation."""
        x = self.X(n, l)
        ent: dict[int, dict[tuple[int, int], Elem]] = {}
        if x.aug:
            e0 = {(0, j): x.aug[j] for j in range(x.rank(0)) if x.aug[j]}
            if e0:
                ent[0] = e0
        return ChainMap(src=x, dst=self.unit(l), entries=ent)

    def sigma(self, n: int, l: int) -> ChainMap:
        """id (x) eps_1: X(n+1, l) -> X(n, l)."""
        f = self._sigma.get((n, l))
        if f is None:
            src = self.X(n + 1, l)
            info = self.Xinfo(n + 1, l)
            resI = self.resI(l)
            ent: dict[int, dict[tuple[int, int], Elem]] = {}
            for (d, idx), (p, i, q, j) in info.prov.items():
                if q != 0:
                    continue
                elem = resI.aug[j]
                if elem:
                    ent.setdefault(d, {})[(i, idx)] = elem
            f = ChainMap(src=src, dst=self.X(n, l), entries=ent)
            self._sigma[(n, l)] = f
        return f

    # -- cones and their transitions --

    def Q(self, n: int, l: int) -> tuple[FreeComplex, dict]:
        q = self._Q.get((n, l))
        if q is None:
            q = cone(self.eps(n, l))
            self._Q[(n, l)] = q
        return q

    def Qstep(self, n: int, l: int) -> ChainMap:
        f = self._Qstep.get((n, l))
        if f is None:
            qs, ws = self.Q(n, l)
            qd, wd = self.Q(n, l + 1)
            f = cone_map(self.lam(n, l), self.unit_step(l), qs, ws, qd, wd)
            self._Qstep[(n, l)] = f
        return f

    def cof_sigma(self, n: int, l: int) -> tuple[FreeComplex, dict]:
        c = self._cof.get((n, l))
        if c is None:
            c = cone(self.sigma(n, l))
            self._cof[(n, l)] = c
        return c

    def cof_step(self, n: int, l: int) -> ChainMap:
        f = self._cofstep.get((n, l))
        if f is None:
            cs, ws = self.cof_sigma(n, l)
            cd, wd = self.cof_sigma(n, l + 1)
            f = cone_map(self.lam(n + 1, l), self.lam(n, l), cs, ws, cd, wd)
            self._cofstep[(n, l)] = f
        return f

    # -- diagrams --

    def _diagram(self, tag, levels, cx_fn, step_fn) -> LevelDiagram:
        return LevelDiagram(
            levels=list(levels),
            complexes=[cx_fn(l) for l in levels],
            steps=[step_fn(l) for l in levels[:-1]],
            providers=[RingStrands(self.ring(l)) for l in levels],
            root_base=self.spec.root_base,
            cache=self.cache,
            tag=tag,
        )

    def q_diagram(self, n: int, levels) -> LevelDiagram:
        return self._diagram(
            ("Q", n), levels, lambda l: self.Q(n, l)[0], lambda l: self.Qstep(n, l)
        )

    def x_diagram(self, n: int, levels) -> LevelDiagram:
        return self._diagram(
            ("X", n), levels, lambda l: self.X(n, l), lambda l: self.lam(n, l)
        )

    def cof_diagram(self, n: int, levels) -> LevelDiagram:
        return self._diagram(
            ("cof", n),
            levels,
            lambda l: self.cof_sigma(n, l)[0],
            lambda l: self.cof_step(n, l),
        )


def derived_power(
    spec: RingSpec,
    family: IdealFamily,
    n: int,
    level: int,
    deg_max: int,
    weight_max: Fraction,
) -> FreeComplex:
    """X_{n, level}: minimized n-fold tensor power of res(I(level))."""
    return Tower(spec, family, deg_max, weight_max).X(n, level)


# ---------- module references for derived tensors ----------


class ModuleRef(NamedTuple):
    kind: str  # "ring" | "residue" | "quotient" | "ideal"
    family: Optional[IdealFamily] = None

    @property
    def label(self) -> str:
        if self.kind == "ring":
            return "R"
        if self.kind == "residue":
            return "K"
        if self.kind == "quotient":
            return f"R/{self.family.name}"
        return self.family.name


def ring_module() -> ModuleRef:
    return ModuleRef("ring")


def residue_module() -> ModuleRef:
    return ModuleRef("residue")


def quotient_module(family: IdealFamily) -> ModuleRef:
    return ModuleRef("quotient", family)


def ideal_module(family: IdealFamily) -> ModuleRef:
    return ModuleRef("ideal", family)


def _resolve_ref(ref: ModuleRef, ring: LevelRing, dmax: int, wmax: Fraction) -> FreeComplex:
    if ref.kind == "ring":
        return unit_complex(ring)
    if ref.kind == "residue":
        return minimal_resolution(ring, tuple(k_strands(ring).ideal_exps), dmax, wmax)
    if ref.kind == "quotient":
        return minimal_resolution(ring, tuple(ref.family.gens_at(ring)), dmax, wmax)
    if ref.kind == "ideal":
        return ideal_resolution(ring, ref.family.gens_at(ring), dmax, wmax)
    raise ValueError(f"unknown module kind {ref.kind!r}")


def _strands_ref(ref: ModuleRef, ring: LevelRing):
    if ref.kind == "ring":
        return RingStrands(ring)
    if ref.kind == "residue":
        return k_strands(ring)
    if ref.kind == "quotient":
        return QuotientStrands(ring, tuple(ref.family.gens_at(ring)))
    if ref.kind == "ideal":
        return IdealStrands(ring, tuple(ref.family.gens_at(ring)))
    raise ValueError(f"unknown module kind {ref.kind!r}")


def _ref_min_level(ref: ModuleRef) -> int:
    return ref.family.min_level() if ref.family is not None else 0


class TorDiagram:
    """Tor(left, right) over the levels: the resolution of `left` read
    against the module structure of `right`, with lifted transitions."""

    def __init__(
        self,
        spec: RingSpec,
        left: ModuleRef,
        right: ModuleRef,
        deg_max: int,
        weight_max: Fraction,
    ):
        for ref in (left, right):
            if ref.family is not None and ref.family.spec is not spec:
                raise ValueError("module family was built over a different spec")
        self.spec = spec
        self.left = left
        self.right = right
        self.dmax = deg_max
        self.wmax = Fraction(weight_max)
        self._inc: dict[int, Callable] = {}
        self._res: dict[int, FreeComplex] = {}
        self._lift: dict[int, ChainMap] = {}
        self._prov: dict[int, object] = {}
        self.cache: dict = {}
        self.min_level = max(_ref_min_level(left), _ref_min_level(right))

    def ring(self, l: int) -> LevelRing:
        return make_level_ring(self.spec, l)

    def inc(self, l: int):
        f = self._inc.get(l)
        if f is None:
            f = self.ring(l).include_exp
            self._inc[l] = f
        return f

    def res(self, l: int) -> FreeComplex:
        r = self._res.get(l)
        if r is None:
            r = _resolve_ref(self.left, self.ring(l), self.dmax, self.wmax)
            self._res[l] = r
        return r

    def provider(self, l: int):
        p = self._prov.get(l)
        if p is None:
            p = _strands_ref(self.right, self.ring(l))
            self._prov[l] = p
        return p

    def lift(self, l: int) -> ChainMap:
        f = self._lift.get(l)
        if f is None:
            f = lift_chain_map(self.res(l), self.res(l + 1), ring_map=self.inc(l))
            self._lift[l] = f
        return f

    def diagram(self, levels) -> LevelDiagram:
        return LevelDiagram(
            levels=list(levels),
            complexes=[self.res(l) for l in levels],
            steps=[self.lift(l) for l in levels[:-1]],
            providers=[self.provider(l) for l in levels],
            root_base=self.spec.root_base,
            cache=self.cache,
            tag=("tor",),
        )

    def homology(self, l: int, d: int, w: Fraction) -> HomologyData:
        key = (("tor",), l, d, w)
        h = self.cache.get(key)
        if h is None:
            h = homology_data(self.res(l), d, w, self.provider(l))
            self.cache[key] = h
        return h

    def step_matrix(self, l: int, d: int, w: Fraction) -> SparseMatrix:
        return homology_map_matrix(
            self.lift(l), d, self.homology(l, d, w), self.homology(l + 1, d, w),
            self.provider(l + 1),
        )

    def double_step_matrix(self, l: int, d: int, w: Fraction) -> SparseMatrix:
        two = compose_maps(self.lift(l + 1), self.lift(l))
        return homology_map_matrix(
            two, d, self.homology(l, d, w), self.homology(l + 2, d, w),
            self.provider(l + 2),
        )


def derived_tensor(
    spec: RingSpec,
    left: ModuleRef,
    right: ModuleRef,
    deg_max: int,
    weight_max: Fraction,
    max_level: int = 6,
    window: int = 2,
    deg_min: int = 0,
) -> StabilizedTable:
    """Stabilized Tor table of two modules, degrees deg_min..deg_max.

    deg_min matters when Tor_0 is infinite-dimensional weight by weight
    (an ideal against R/J, say): the low degree would never stabilize
    and would drag the level loop to its cap.
    """
    td = TorDiagram(spec, left, right, deg_max + 1, weight_max)
    l0 = td.min_level
    L = min(l0 + window, max_level)
    while True:
        levels = list(range(l0, L + 1))
        raw = td.diagram(levels).run(
            range(deg_min, deg_max + 1), td.wmax, window
        )
        if all(r.stable for r in raw.values()) or L >= max_level:
            break
        L += 1
    name = f"Tor({left.label}, {right.label})"
    return _make_table(name, raw, levels, deg_max, deg_max)


def tor_transition(
    spec: RingSpec,
    left: ModuleRef,
    right: ModuleRef,
    level: int,
    degree: int,
    weight: Fraction,
    deg_max: Optional[int] = None,
    weight_max: Optional[Fraction] = None,
) -> SparseMatrix:
    """Matrix of the level -> level+1 transition on one Tor cell."""
    dmax = (degree + 2) if deg_max is None else deg_max
    wmax = Fraction(weight) + 1 if weight_max is None else Fraction(weight_max)
    td = TorDiagram(spec, left, right, dmax, wmax)
    return td.step_matrix(level, degree, Fraction(weight))


# ---------- quotient homotopy ----------


@dataclass
class QuotientHomotopy:
    table: StabilizedTable
    dims: tuple[int, ...]  # stable dims per degree 0..N
    stable: bool
    top_level: int
    n_used: tuple[int, ...]  # tensor power per degree
    notes: list[str]

    def degree_stable(self, d: int) -> bool:
        return self.table.degree_stable(d)


def variable_blocks(spec: RingSpec, family: IdealFamily) -> list[list[int]]:
    """Partition of the variables: truncation monomials and ideal
    generators tie their supports together; everything else is free."""
    parent = list(range(spec.nvars))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for t in spec.truncations:
        sup = [i for i, x in enumerate(t) if x]
        for b in sup[1:]:
            union(sup[0], b)
    for g in family.gens:
        sup = [i for i, x in enumerate(g) if x]
        for b in sup[1:]:
            union(sup[0], b)
    buckets: dict[int, list[int]] = {}
    for i in range(spec.nvars):
        buckets.setdefault(find(i), []).append(i)
    return sorted(buckets.values())


def _restrict_spec(spec: RingSpec, block: list[int]) -> RingSpec:
    pos = {v: k for k, v in enumerate(block)}
    variables = tuple(spec.variables[v] for v in block)
    truncs = []
    for t in spec.truncations:
        sup = [i for i, x in enumerate(t) if x]
        if sup and all(i in pos for i in sup):
            e = [Fraction(0)] * len(block)
            for i in sup:
                e[pos[i]] = t[i]
            truncs.append(tuple(e))
    return RingSpec(spec.field, spec.root_base, variables, tuple(truncs))


def _restrict_family(
    family: IdealFamily, sub: RingSpec, block: list[int]
) -> IdealFamily:
    pos = {v: k for k, v in enumerate(block)}
    roots = tuple(pos[v] for v in family.root_vars if v in pos)
    gens = []
    for g in family.gens:
        sup = [i for i, x in enumerate(g) if x]
        if sup and all(i in pos for i in sup):
            e = [Fraction(0)] * len(block)
            for i in sup:
                e[pos[i]] = g[i]
            gens.append(tuple(e))
    return IdealFamily(
        name=family.name, spec=sub, root_vars=roots, gens=tuple(gens)
    )


def _kunneth_cells(
    tables: list[dict[tuple[int, Fraction], CellResult]],
    N: int,
    wmax: Fraction,
) -> dict[tuple[int, Fraction], CellResult]:
    acc: dict[tuple[int, Fraction], tuple[int, bool]] = {
        (0, Fraction(0)): (1, True)
    }
    for cells in tables:
        nxt: dict[tuple[int, Fraction], tuple[int, bool]] = {}
        for (d1, w1), (v1, s1) in acc.items():
            for (d2, w2), r in cells.items():
                v2, s2 = r.value, r.stable
                if v1 * v2 == 0 and (s1 and s2):
                    continue
                d, w = d1 + d2, w1 + w2
                if d > N or w > wmax:
                    continue
                old = nxt.get((d, w), (0, True))
                nxt[(d, w)] = (old[0] + v1 * v2, old[1] and s1 and s2)
        acc = nxt
    return {
        key: CellResult(v, s, ())
        for key, (v, s) in acc.items()
        if v or not s
    }


def _quotient_direct(
    spec: RingSpec, family: IdealFamily, N: int, bounds: Bounds
) -> tuple[dict[tuple[int, Fraction], CellResult], int]:
    if _family_contains_unit(family):
        return {}, family.min_level()
    tw = Tower(spec, family, bounds.deg_max, bounds.weight_max)
    l0 = family.min_level()
    L = min(l0 + bounds.window, bounds.max_level)
    while True:
        levels = list(range(l0, L + 1))
        raw: dict[tuple[int, Fraction], CellResult] = {}
        for d in range(N + 1):
            res = tw.q_diagram(d + 2, levels).run(
                [d], bounds.weight_max, bounds.window
            )
            raw.update(res)
        if all(r.stable for r in raw.values()) or L >= bounds.max_level:
            return raw, L
        L += 1


def quotient_homotopy(
    spec: RingSpec,
    family: IdealFamily,
    N: int,
    bounds: Optional[Bounds] = None,
    force_direct: bool = False,
) -> QuotientHomotopy:
    """Homotopy of R/I^infty in degrees 0..N, stabilized over levels.

    Degree d is computed from cone(eps_{d+2}), the smallest power the
    stabilization bound trusts there. When the variables split into
    independent blocks the computation factors across them and the
    tables recombine by Kunneth convolution over the ground field.
    """
    bounds = bounds if bounds is not None else default_bounds(N)
    verdict = check_idempotent(family)
    if isinstance(verdict, NotIdempotent):
        raise ValueError(
            f"ideal {family.name} is not idempotent (witness {verdict.witness});"
            " the derived quotient needs an idempotent family"
        )
    notes = []
    if isinstance(verdict, UnknownUpToDepth):
        msg = f"idempotency of {family.name} unknown up to depth {verdict.depth}"
        warnings.warn(msg)
        notes.append(msg)

    blocks = variable_blocks(spec, family)
    if _family_contains_unit(family):
        # unit generators have empty support and belong to no block
        raw, top = {}, family.min_level()
        notes.append("ideal contains a unit, the quotient vanishes")
    elif force_direct or len(blocks) <= 1:
        raw, top = _quotient_direct(spec, family, N, bounds)
    else:
        per_block = []
        top = family.min_level()
        for block in blocks:
            sub = _restrict_spec(spec, block)
            fam = _restrict_family(family, sub, block)
            r, t = _quotient_direct(sub, fam, N, bounds)
            per_block.append(r)
            top = max(top, t)
        raw = _kunneth_cells(per_block, N, bounds.weight_max)
        notes.append(
            "factored over variable blocks "
            + " | ".join(
                ",".join(spec.variables[v].name for v in b) for b in blocks
            )
        )

    table = _make_table(
        f"pi(R/{family.name}^infty)", raw, range(family.min_level(), top + 1), N, N
    )
    return QuotientHomotopy(
        table=table,
        dims=table.dims(),
        stable=table.all_stable(),
        top_level=top,
        n_used=tuple(d + 2 for d in range(N + 1)),
        notes=notes,
    )


# ---------- static check ----------


@dataclass
class StaticCheck:
    static: Optional[bool]  # None when level stabilization ran out
    witness: Optional[tuple[int, Fraction]]
    stable: bool
    levels: tuple[int, ...]


def static_check(
    spec: RingSpec, family: IdealFamily, N: int, bounds: Optional[Bounds] = None
) -> StaticCheck:
    """Is R/I^infty static? True iff cone(sigma_1: X_2 -> X_1) is
    acyclic in degrees <= N at the stabilized colimit."""
    bounds = bounds if bounds is not None else default_bounds(N)
    if _family_contains_unit(family):
        return StaticCheck(True, None, True, ())
    tw = Tower(spec, family, bounds.deg_max, bounds.weight_max)
    l0 = family.min_level()
    L = min(l0 + bounds.window, bounds.max_level)
    while True:
        levels = list(range(l0, L + 1))
        raw = tw.cof_diagram(1, levels).run(
            range(N + 1), bounds.weight_max, bounds.window
        )
        if all(r.stable for r in raw.values()) or L >= bounds.max_level:
            break
        L += 1
    witness = None
    for (d, w) in sorted(raw):
        r = raw[(d, w)]
        if r.stable and r.value:
            witness = (d, w)
            break
    if witness is not None:
        return StaticCheck(False, witness, True, tuple(levels))
    if all(r.stable for r in raw.values()):
        return StaticCheck(True, None, True, tuple(levels))
    return StaticCheck(None, None, False, tuple(levels))


# ---------- tower report ----------


@dataclass
class TowerReport:
    ok: bool
    n_max: int
    connectivity_failures: list[tuple[int, int, Fraction]]  # (n, i, w)
    h0_mismatches: list[tuple[int, Fraction, int, int]]  # (n, w, got, want)
    undetermined: list[tuple[int, int, Fraction]]
    levels: tuple[int, ...]
    h0_cells_checked: int
    # True when every undetermined cell is in flight: first alive within one
    # window of the top level (the unavoidable newborn layer) or already dead
    # at the top and waiting out the window before certifying zero
    undetermined_is_boundary: bool = True
    # same flag restricted to the cofibre cells; the H_0 strands of a ring
    # with two or more root variables grow with the level at every weight,
    # so only the connectivity half can be expected to clear its frontier
    cof_undetermined_is_boundary: bool = True


def tower_report(
    spec: RingSpec,
    family: IdealFamily,
    n_max: int,
    bounds: Bounds,
) -> TowerReport:
    """Connectivity of the tower maps and collapse of H_0.

    For each n < n_max the cofibre of sigma_n must have stabilized
    H_i = 0 for i < n; for each 2 < n <= n_max the stabilized H_0(X_n)
    must equal H_0(X_2) weight by weight on mutually stable cells.
    """
    tw = Tower(spec, family, bounds.deg_max, bounds.weight_max)
    l0 = family.min_level()
    L = min(l0 + bounds.window, bounds.max_level)
    while True:
        levels = list(range(l0, L + 1))
        cof_raw: dict[int, dict] = {}
        for n in range(1, n_max):
            cof_raw[n] = tw.cof_diagram(n, levels).run(
                range(min(n, bounds.deg_max + 1)), bounds.weight_max, bounds.window
            )
        h0_raw: dict[int, dict] = {}
        for n in range(2, n_max + 1):
            h0_raw[n] = tw.x_diagram(n, levels).run(
                [0], bounds.weight_max, bounds.window
            )
        pending = any(
            not r.stable for raw in cof_raw.values() for r in raw.values()
        ) or any(not r.stable for raw in h0_raw.values() for r in raw.values())
        if not pending or L >= bounds.max_level:
            break
        L += 1

    def is_boundary(r: CellResult) -> bool:
        # in flight: born too close to the top to judge, or already dead
        # at the top and waiting out the window before certifying zero
        alive = [k for k, v in enumerate(r.dims) if v]
        return bool(alive) and (
            levels[alive[0]] + bounds.window > levels[-1] or r.dims[-1] == 0
        )

    conn_failures = []
    undetermined = []
    all_boundary = True
    cof_boundary = True
    for n in sorted(cof_raw):
        for (d, w) in sorted(cof_raw[n]):
            r = cof_raw[n][(d, w)]
            if not r.stable:
                undetermined.append((n, d, w))
                all_boundary = all_boundary and is_boundary(r)
                cof_boundary = cof_boundary and is_boundary(r)
            elif r.value:
                conn_failures.append((n, d, w))

    h0_mismatches = []
    checked = 0
    base = h0_raw.get(2, {})
    for n in sorted(h0_raw):
        if n == 2:
            continue
        keys = set(base) | set(h0_raw[n])
        for key in sorted(keys):
            rb = base.get(key)
            rn = h0_raw[n].get(key)
            vb = rb.value if rb is not None else 0
            vn = rn.value if rn is not None else 0
            sb = rb.stable if rb is not None else True
            sn = rn.stable if rn is not None else True
            if not (sb and sn):
                undetermined.append((n, 0, key[1]))
                for r in (rb, rn):
                    if r is not None and not r.stable:
                        all_boundary = all_boundary and is_boundary(r)
                continue
            checked += 1
            if vb != vn:
                h0_mismatches.append((n, key[1], vn, vb))

    return TowerReport(
        ok=not conn_failures and not h0_mismatches,
        n_max=n_max,
        connectivity_failures=conn_failures,
        h0_mismatches=h0_mismatches,
        undetermined=undetermined,
        levels=tuple(levels),
        h0_cells_checked=checked,
        undetermined_is_boundary=all_boundary,
        cof_undetermined_is_boundary=cof_boundary,
    )


# ---------- Amitsur comparison ----------


class _TotData(NamedTuple):
    tot: FreeComplex
    powers: list[FreeComplex]
    infos: list[Optional[TensorInfo]]
    wbar: FreeComplex
    idx: dict  # (k, internal degree, gen) -> (total degree, index)


def _reduced_resolution(W: FreeComplex) -> FreeComplex:
    """W modulo the span of its unit generator.

    Valid only when degree 0 is the single weight-0 unit generator; then
    the span is a subcomplex and the quotient is free on the remaining
    generators, with the degree-1 differential dropped.
    """
    g0 = W.gens_at(0)
    if len(g0) != 1 or g0[0].weight != 0:
        raise ValueError("resolution is not cyclic on a unit generator")
    gens = {d: gl for d, gl in W.gens.items() if d >= 1 and gl}
    diff = {d: ent for d, ent in W.diff.items() if d >= 2}
    return FreeComplex(ring=W.ring, gens=gens, diff=diff)


def _tensor_powers(
    W: FreeComplex, wbar: FreeComplex, count: int, dmax: int, wmax: Fraction
):
    powers = [W]
    infos: list[Optional[TensorInfo]] = [None]
    for _ in range(count - 1):
        t, info = tensor_complexes(powers[-1], wbar, dmax, wmax)
        powers.append(t)
        infos.append(info)
    return powers, infos


def _flat_tables(powers, infos):
    """Multi-index of each power generator as a tuple of W-generators."""
    flats = [{}]
    for (d, gl) in powers[0].gens.items():
        for i in range(len(gl)):
            flats[0][(d, i)] = ((d, i),)
    for j in range(1, len(powers)):
        prev = flats[j - 1]
        cur = {}
        for (d, idx), (p, i, q, jj) in infos[j].prov.items():
            cur[(d, idx)] = prev[(p, i)] + ((q, jj),)
        flats.append(cur)
    revs = [{multi: key for key, multi in f.items()} for f in flats]
    return flats, revs


def _amitsur_level(
    ring: LevelRing, gens, m: int, N: int, wmax: Fraction
) -> _TotData:
    """Normalized truncated totalization Tot^m of (R/I)^{(x) k+1}, k <= m,
    as one complex in total degrees -1 .. N+1 (column k sits in degree
    i - k).

    Cofaces insert the unit generator w0 of W = res(R/I), so the span of
    basis tensors carrying w0 in a positive slot is the coface-degenerate
    subcomplex; the Moore conormalization is the basis-aligned quotient
    by it. Column k of the quotient is W (x) Wbar^{(x) k} with
    Wbar = W / R.w0, and only the slot-0 coface survives."""
    dmax_int = N + 1 + m
    W = minimal_resolution(ring, tuple(gens), dmax_int, wmax)
    wbar = _reduced_resolution(W)
    powers, infos = _tensor_powers(W, wbar, m + 1, dmax_int, wmax)
    flats, revs = _flat_tables(powers, infos)
    F = ring.field

    gens_out: dict[int, list] = {}
    idx: dict = {}
    for d in range(-1, N + 2):
        gl = []
        for k in range(m + 1):
            i = d + k
            if i < 0:
                continue
            for g, gi in enumerate(powers[k].gens_at(i)):
                idx[(k, i, g)] = (d, len(gl))
                gl.append(gi._replace(tag=f"[{k}]{gi.tag}"))
        gens_out[d] = gl

    diff: dict[int, dict[tuple[int, int], Elem]] = {}

    def add_entry(d, dst, src, elem):
        ent = diff.setdefault(d, {})
        key = (dst, src)
        s = ring.elem_add(ent.get(key, {}), elem)
        if s:
            ent[key] = s
        else:
            ent.pop(key, None)

    one = ring.one()
    for (k, i, g), (d, src) in idx.items():
        # internal differential
        for (i2, j2), elem in powers[k].diff_at(i).items():
            if j2 != g:
                continue
            tgt = idx.get((k, i - 1, i2))
            if tgt is not None:
                add_entry(d, tgt[1], src, elem)
        # leading coface, sign (-1)^i to anticommute; inserting ahead of
        # the unit generator lands in the degenerate part and dies
        if k + 1 <= m:
            multi = flats[k][(i, g)]
            if multi[0][0] != 0:
                hit = revs[k + 1].get(((0, 0),) + multi)
                tgt = None if hit is None else idx.get((k + 1, hit[0], hit[1]))
                if tgt is not None:
                    sign = -1 if i % 2 else 1
                    add_entry(d, tgt[1], src, {ring.unit: F.from_int(sign)})

    tot = FreeComplex(ring=ring, gens=gens_out, diff=diff)
    return _TotData(tot, powers, infos, wbar, idx)


def _amitsur_step(
    lo: _TotData,
    hi: _TotData,
    beta: ChainMap,
    inc,
    m: int,
) -> ChainMap:
    """Transition Tot(l) -> Tot(l+1) from the lifted W(l) -> W(l+1)."""
    # beta restricts to the reduced factors: positive-degree entries never
    # target the unit generator, so no entries are dropped
    beta_bar = ChainMap(
        src=lo.wbar,
        dst=hi.wbar,
        entries={d: ent for d, ent in beta.entries.items() if d >= 1},
        ring_map=inc,
    )
    maps = [beta]
    for k in range(1, m + 1):
        maps.append(
            tensor_maps(
                maps[-1], beta_bar, lo.powers[k], lo.infos[k], hi.powers[k], hi.infos[k]
            )
        )
    ent: dict[int, dict[tuple[int, int], Elem]] = {}
    for k in range(m + 1):
        for d_int, entries in maps[k].entries.items():
            for (i2, j2), elem in entries.items():
                src = lo.idx.get((k, d_int, j2))
                dst = hi.idx.get((k, d_int, i2))
                if src is None or dst is None:
                    continue
                ent.setdefault(src[0], {})[(dst[1], src[1])] = elem
    return ChainMap(src=lo.tot, dst=hi.tot, entries=ent, ring_map=inc)


def _tot_lifetime(m: int, root_base: int) -> int:
    # truncation junk rides tensor columns whose weight numerators scale
    # by root_base per level, so it drowns past column m within this many
    # levels of its birth
    lam = 1
    t = root_base
    while t <= m:
        lam += 1
        t *= root_base
    return lam


@dataclass
class AmitsurReport:
    table: StabilizedTable
    reference: QuotientHomotopy
    agree: dict[int, bool]
    m: int
    window: int
    undetermined: tuple = ()

    def all_agree(self) -> bool:
        return all(self.agree.values())


def amitsur_crosscheck(
    spec: RingSpec,
    family: IdealFamily,
    m: int,
    N: int,
    bounds: Optional[Bounds] = None,
) -> AmitsurReport:
    """Compare H_i of the truncated Amitsur totalization against the
    tower route, degree by degree up to N. Needs m >= N+2 so the
    truncation error sits above the compared range.

    Truncation junk lives longer here than in the tower diagrams, so the
    run widens the detector window to the junk lifetime and treats cells
    first alive within lifetime + window - 1 levels of the top as young:
    they are still in flight and do not count against agreement."""
    if m < N + 2:
        raise ValueError(f"cosimplicial truncation m={m} needs m >= N+2={N + 2}")
    bounds = bounds if bounds is not None else default_bounds(N)
    reference = quotient_homotopy(spec, family, N, bounds)

    if _family_contains_unit(family):
        table = StabilizedTable("amitsur", [], (), N, N)
        agree = {
            d: reference.table.stable_cells_at(d) == {} for d in range(N + 1)
        }
        return AmitsurReport(table, reference, agree, m, bounds.window)

    l0 = family.min_level()
    data: dict[int, _TotData] = {}
    steps: dict[int, ChainMap] = {}
    incs: dict[int, Callable] = {}
    cache: dict = {}

    def level_data(l: int) -> _TotData:
        t = data.get(l)
        if t is None:
            ring = make_level_ring(spec, l)
            t = _amitsur_level(ring, family.gens_at(ring), m, N, bounds.weight_max)
            data[l] = t
        return t

    def level_step(l: int) -> ChainMap:
        s = steps.get(l)
        if s is None:
            ring_lo = make_level_ring(spec, l)
            inc = incs.setdefault(l, ring_lo.include_exp)
            beta = lift_chain_map(
                level_data(l).powers[0], level_data(l + 1).powers[0], ring_map=inc
            )
            s = _amitsur_step(level_data(l), level_data(l + 1), beta, inc, m)
            steps[l] = s
        return s

    lam = _tot_lifetime(m, spec.root_base)
    window = max(bounds.window, lam)
    horizon = window + lam - 1

    def young(dims, top):
        alive = [k for k, v in enumerate(dims) if v]
        return bool(alive) and l0 + alive[0] + horizon > top

    L = min(l0 + window, bounds.max_level)
    while True:
        levels = list(range(l0, L + 1))
        diag = LevelDiagram(
            levels=levels,
            complexes=[level_data(l).tot for l in levels],
            steps=[level_step(l) for l in levels[:-1]],
            providers=[RingStrands(make_level_ring(spec, l)) for l in levels],
            root_base=spec.root_base,
            cache=cache,
            tag=("tot", m),
        )
        raw = diag.run(range(N + 1), bounds.weight_max, window)
        table = _make_table(f"amitsur Tot^{m}", raw, levels, N, N)
        agree = {}
        undet = []
        for d in range(N + 1):
            loose = [
                (dd, w)
                for (dd, w), r in raw.items()
                if dd == d and not r.stable
            ]
            undet.extend(loose)
            agree[d] = (
                reference.table.degree_stable(d)
                and table.stable_cells_at(d) == reference.table.stable_cells_at(d)
                and all(young(raw[c].dims, L) for c in loose)
            )
        if all(agree.values()) or L >= bounds.max_level:
            break
        L += 1

    return AmitsurReport(
        table, reference, agree, m, window, tuple(sorted(undet))
    )
