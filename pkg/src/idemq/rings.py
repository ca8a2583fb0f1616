"""Truncated monoid algebras and their root-adjunction levels.

A ring spec fixes a field K, a root base r, variables (each optionally
divisible), and truncation monomials. Level l is the K-algebra on monomials
T_i^{e_i / r^l} (divisible vars; integer exponents otherwise) modulo the
monomial ideal generated by the truncations. Exponents at a level are kept
as integer numerators against per-variable scales, so weights are exact
Fractions and every weight strand is a finite monomial basis.

Ring elements are {exponent tuple: scalar} dicts; monomials killed by the
truncation ideal are dropped on reduction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

Exponents = tuple[int, ...]
FracMono = tuple[Fraction, ...]  # level-free monomial, one exponent per var
Elem = dict  # {Exponents: scalar}


@dataclass(frozen=True)
class VarInfo:
    name: str
    divisible: bool = False


@dataclass(frozen=True)
class RingSpec:
    field: object
    root_base: int
    variables: tuple[VarInfo, ...]
    truncations: tuple[FracMono, ...] = ()

    def __post_init__(self):
        if self.root_base < 2:
            raise ValueError("root_base must be >= 2")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable names")
        for t in self.truncations:
            if len(t) != len(self.variables):
                raise ValueError("truncation arity mismatch")
            for f in t:
                if f.denominator != 1 or f < 0:
                    raise ValueError("truncation exponents must be nonnegative integers")
            if all(f == 0 for f in t):
                raise ValueError("cannot truncate by the unit monomial")

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def var_index(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise KeyError(f"no variable named {name!r}")

    def mono_from_dict(self, d: dict) -> FracMono:
        """{name: Fraction} -> exponent tuple aligned with the variables."""
        left = dict(d)
        out = []
        for v in self.variables:
            out.append(Fraction(left.pop(v.name, 0)))
        if left:
            raise KeyError(f"unknown variables {sorted(left)}")
        return tuple(out)


def format_mono(spec: RingSpec, mono: FracMono) -> str:
    parts = []
    for v, f in zip(spec.variables, mono):
        if f == 0:
            continue
        if f == 1:
            parts.append(v.name)
        elif f.denominator == 1:
            parts.append(f"{v.name}^{f}")
        else:
            parts.append(f"{v.name}^{{{f}}}")
    return "*".join(parts) if parts else "1"


class LevelRing:
    """One level of the root tower over a RingSpec."""

    def __init__(self, spec: RingSpec, level: int):
        if level < 0:
            raise ValueError("level must be >= 0")
        self.spec = spec
        self.level = level
        r = spec.root_base
        self.scales: tuple[int, ...] = tuple(
            r**level if v.divisible else 1 for v in spec.variables
        )
        self.trunc_exps: tuple[Exponents, ...] = tuple(
            tuple(int(f) * s for f, s in zip(t, self.scales))
            for t in spec.truncations
        )
        self.nvars = spec.nvars
        self.unit: Exponents = (0,) * self.nvars
        self._basis_cache: dict[Fraction, list[Exponents]] = {}
        self._basis_done_upto: Optional[Fraction] = None

    @property
    def field(self):
        return self.spec.field

    # ---------- monomials ----------

    def weight(self, e: Exponents) -> Fraction:
        w = Fraction(0)
        for n, s in zip(e, self.scales):
            w += Fraction(n, s)
        return w

    def mono_is_zero(self, e: Exponents) -> bool:
        for t in self.trunc_exps:
            if all(a >= b for a, b in zip(e, t)):
                return True
        return False

    def mul_mono(self, a: Exponents, b: Exponents) -> Exponents:
        return tuple(x + y for x, y in zip(a, b))

    def exp_of(self, mono: FracMono) -> Exponents:
        """Numerators of a level-free monomial at this level."""
        out = []
        for f, s in zip(mono, self.scales):
            n = f * s
            if n.denominator != 1:
                raise ValueError(
                    f"exponent {f} not defined at level {self.level} (scale {s})"
                )
            out.append(int(n))
        return tuple(out)

    def frac_of(self, e: Exponents) -> FracMono:
        return tuple(Fraction(n, s) for n, s in zip(e, self.scales))

    def var_exp(self, i: int) -> Exponents:
        """T_i as an exponent tuple (exponent 1)."""
        e = [0] * self.nvars
        e[i] = self.scales[i]
        return tuple(e)

    # ---------- elements ----------

    def elem(self, pairs: Iterable[tuple[Exponents, object]]) -> Elem:
        out: Elem = {}
        F = self.field
        for e, v in pairs:
            if self.mono_is_zero(e) or F.is_zero(v):
                continue
            nv = F.normalize(F.add(out.get(e, F.zero), v))
            if F.is_zero(nv):
                out.pop(e, None)
            else:
                out[e] = nv
        return out

    def one(self) -> Elem:
        return {self.unit: self.field.one}

    def elem_add(self, x: Elem, y: Elem) -> Elem:
        F = self.field
        out = dict(x)
        for e, v in y.items():
            nv = F.normalize(F.add(out.get(e, F.zero), v))
            if F.is_zero(nv):
                out.pop(e, None)
            else:
                out[e] = nv
        return out

    def elem_scale(self, a, x: Elem) -> Elem:
        F = self.field
        if F.is_zero(a):
            return {}
        return {e: F.normalize(F.mul(a, v)) for e, v in x.items()}

    def elem_neg(self, x: Elem) -> Elem:
        F = self.field
        return {e: F.neg(v) for e, v in x.items()}

    def elem_mul(self, x: Elem, y: Elem) -> Elem:
        F = self.field
        out: Elem = {}
        for e1, v1 in x.items():
            for e2, v2 in y.items():
                e = self.mul_mono(e1, e2)
                if self.mono_is_zero(e):
                    continue
                nv = F.normalize(F.add(out.get(e, F.zero), F.mul(v1, v2)))
                if F.is_zero(nv):
                    out.pop(e, None)
                else:
                    out[e] = nv
        return out

    def elem_mul_mono(self, e0: Exponents, x: Elem) -> Elem:
        out: Elem = {}
        for e, v in x.items():
            ee = self.mul_mono(e0, e)
            if not self.mono_is_zero(ee):
                out[ee] = v
        return out

    def reduce_elem(self, x: Elem) -> Elem:
        F = self.field
        return {
            e: v
            for e, v in x.items()
            if not self.mono_is_zero(e) and not F.is_zero(v)
        }

    def elem_weight(self, x: Elem) -> Optional[Fraction]:
        """Common weight of a homogeneous element, None for 0."""
        ws = {self.weight(e) for e in x}
        if not ws:
            return None
        if len(ws) > 1:
            raise ValueError("element is not weight-homogeneous")
        return ws.pop()

    # ---------- weight strands ----------

    def basis_upto(self, wmax: Fraction) -> dict[Fraction, list[Exponents]]:
        """Monomial basis of the ring, bucketed by weight, for weights <= wmax."""
        wmax = Fraction(wmax)
        if self._basis_done_upto is None or wmax > self._basis_done_upto:
            buckets: dict[Fraction, list[Exponents]] = {}
            stack = [0] * self.nvars

            def rec(i: int, acc: Fraction):
                if i == self.nvars:
                    e = tuple(stack)
                    if not self.mono_is_zero(e):
                        buckets.setdefault(acc, []).append(e)
                    return
                s = self.scales[i]
                n = 0
                while acc + Fraction(n, s) <= wmax:
                    stack[i] = n
                    rec(i + 1, acc + Fraction(n, s))
                    n += 1
                stack[i] = 0

            rec(0, Fraction(0))
            for lst in buckets.values():
                lst.sort()
            self._basis_cache = buckets
            self._basis_done_upto = wmax
        return self._basis_cache

    def basis(self, w: Fraction) -> list[Exponents]:
        w = Fraction(w)
        if self._basis_done_upto is None or w > self._basis_done_upto:
            self.basis_upto(w)
        return self._basis_cache.get(w, [])

    # ---------- level maps ----------

    def include_exp(self, e: Exponents) -> Exponents:
        """Image of a monomial under R(l) -> R(l+1)."""
        r = self.spec.root_base
        return tuple(
            n * r if v.divisible else n
            for n, v in zip(e, self.spec.variables)
        )

    def include_elem(self, x: Elem, target: "LevelRing") -> Elem:
        if target.level != self.level + 1 or target.spec is not self.spec:
            raise ValueError("include_elem expects the next level of the same spec")
        out: Elem = {}
        for e, v in x.items():
            ee = self.include_exp(e)
            if not target.mono_is_zero(ee):
                out[ee] = v
        return out

    def __repr__(self) -> str:
        return f"<LevelRing level={self.level} of {_spec_brief(self.spec)}>"


def _spec_brief(spec: RingSpec) -> str:
    vs = ",".join(
        v.name + ("~" if v.divisible else "") for v in spec.variables
    )
    ts = ",".join(format_mono(spec, t) for t in spec.truncations)
    return f"K[{vs}]/({ts})" if ts else f"K[{vs}]"


_RING_CACHE: dict[tuple[int, int], LevelRing] = {}


def make_level_ring(spec: RingSpec, level: int) -> LevelRing:
    key = (id(spec), level)
    r = _RING_CACHE.get(key)
    if r is None or r.spec is not spec:
        r = _RING_CACHE[key] = LevelRing(spec, level)
    return r
