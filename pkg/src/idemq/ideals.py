"""Monomial ideal families over the level tower and their idempotency.

A family is a union of parts: a roots part contributes the generator
T^{1/r^l} at level l (requires a divisible variable), and fixed monomial
generators repeat at every level where they are defined. Exterior sums
juxtapose families, so one family may carry both kinds of part.

Idempotency (I*I = I in the colimit) is decidable exactly for monomial
families. A root generator factors into two generators one level deeper,
and a fixed generator g lies in I*I iff it either has positive exponent
on some roots variable (two arbitrarily small roots divide it) or
dominates the sum of two fixed generators. The depth argument is kept for
interface compatibility; the UnknownUpToDepth verdict is never produced
by the monomial test.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .rings import Elem, Exponents, FracMono, LevelRing, RingSpec, format_mono
from .sparsela import kernel_rows

# ---------- verdicts ----------


@dataclass(frozen=True)
class Idempotent:
    certificate: tuple[str, ...]  # one factorization per generator

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class NotIdempotent:
    witness: str  # generator not in I*I

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class UnknownUpToDepth:
    depth: int

    def __bool__(self) -> bool:
        return False


# ---------- families ----------


@dataclass(frozen=True)
class IdealFamily:
    name: str
    spec: RingSpec
    root_vars: tuple[int, ...] = ()
    gens: tuple[FracMono, ...] = ()

    def __post_init__(self):
        seen = set()
        for v in self.root_vars:
            if not (0 <= v < self.spec.nvars):
                raise ValueError("roots part needs a variable index")
            if not self.spec.variables[v].divisible:
                raise ValueError(
                    f"roots({self.spec.variables[v].name}) needs a divisible variable"
                )
            if v in seen:
                raise ValueError("duplicate roots variable")
            seen.add(v)
        for g in self.gens:
            if len(g) != self.spec.nvars:
                raise ValueError("generator arity mismatch")
            for f, v in zip(g, self.spec.variables):
                if f < 0:
                    raise ValueError("negative exponent in ideal generator")
                if not v.divisible and f.denominator != 1:
                    raise ValueError(
                        f"fractional exponent on non-divisible variable {v.name}"
                    )
                if v.divisible and not _is_power_denominator(
                    f.denominator, self.spec.root_base
                ):
                    raise ValueError(
                        f"denominator of {f} is not a power of root_base"
                    )

    # -- level data --

    @property
    def kind(self) -> str:
        if self.root_vars and not self.gens:
            return "roots"
        if self.root_vars:
            return "mixed"
        return "fixed"

    def min_level(self) -> int:
        """Lowest level where every generator has integral numerators."""
        lvl = 0
        r = self.spec.root_base
        for g in self.gens:
            for f, v in zip(g, self.spec.variables):
                if v.divisible:
                    d = f.denominator
                    k = 0
                    while d > 1:
                        d //= r
                        k += 1
                    lvl = max(lvl, k)
        return lvl

    def frac_gens(self) -> tuple[FracMono, ...]:
        """Level-free generators; the level-l generator T^{1/r^l} of a
        roots part cannot be expressed this way, so only fixed ones."""
        return self.gens

    def gens_at(self, ring: LevelRing) -> list:
        """Nonzero generator exponent tuples at a level (sorted, deduped)."""
        if ring.spec is not self.spec:
            raise ValueError("ring spec mismatch")
        exps = []
        for v in self.root_vars:
            e = [0] * ring.nvars
            e[v] = 1  # numerator 1 = T^{1/r^level}
            exps.append(tuple(e))
        exps.extend(ring.exp_of(g) for g in self.gens)
        out = sorted({e for e in exps if not ring.mono_is_zero(e)})
        return out

    def describe(self) -> str:
        parts = [f"roots({self.spec.variables[v].name})" for v in self.root_vars]
        parts.extend(format_mono(self.spec, g) for g in self.gens)
        return ", ".join(parts)


def _is_power_denominator(d: int, r: int) -> bool:
    while d > 1:
        if d % r:
            return False
        d //= r
    return True


def roots_family(spec: RingSpec, varname: str, name: str = "I") -> IdealFamily:
    return IdealFamily(name=name, spec=spec, root_vars=(spec.var_index(varname),))


def fixed_family(spec: RingSpec, gens, name: str = "I") -> IdealFamily:
    return IdealFamily(name=name, spec=spec, gens=tuple(gens))


# ---------- idempotency ----------


def _dominates(a: FracMono, b: FracMono) -> bool:
    return all(x >= y for x, y in zip(a, b))


def _killed_by_truncation(spec: RingSpec, g: FracMono) -> bool:
    # truncation exponents are integers, so this is level-independent
    return any(_dominates(g, t) for t in spec.truncations)


def live_frac_gens(family: IdealFamily) -> list[FracMono]:
    """Fixed generators that survive truncation, minimal under divisibility."""
    gens = [g for g in family.gens if not _killed_by_truncation(family.spec, g)]
    gens = sorted(set(gens))
    out = []
    for g in gens:
        if not any(h != g and _dominates(g, h) for h in gens):
            out.append(g)
    return out


def check_idempotent(family: IdealFamily, depth: int = 2):
    """Decide whether the family satisfies I*I = I in the colimit.

    Exact for monomial families; `depth` only caps how the certificate is
    phrased, never the decision.
    """
    spec = family.spec
    r = spec.root_base
    certs = []
    for v in family.root_vars:
        name = spec.variables[v].name
        certs.append(
            f"{name}^(1/r^(l+1)) * {name}^({r - 1}/r^(l+1)) at every level l"
        )

    gens = live_frac_gens(family)
    if not gens and not family.root_vars:
        return Idempotent(certificate=("zero ideal",))

    for g in gens:
        hit = None
        for v in family.root_vars:
            if g[v] > 0:
                name = spec.variables[v].name
                hit = f"two deep roots of {name}"
                break
        if hit is None:
            for i, a in enumerate(gens):
                for b in gens[i:]:
                    s = tuple(x + y for x, y in zip(a, b))
                    if _dominates(g, s):
                        hit = (
                            f"m * {format_mono(spec, a)} * {format_mono(spec, b)}"
                        )
                        break
                if hit:
                    break
        if hit is None:
            return NotIdempotent(witness=format_mono(spec, g))
        certs.append(f"{format_mono(spec, g)} = {hit}")
    return Idempotent(certificate=tuple(certs))


# ---------- presentation of the ideal as a module ----------


class ModulePresentation:
    """I at one level as coker-free data: minimal monomial generators and
    the weight-graded kernel of their evaluation map into R.

    relations[w] lists kernel vectors of (+)_j R(-|a_j|) -> I on the
    weight-w strand, each as {generator index: ring element}.
    """

    def __init__(
        self,
        ring: LevelRing,
        gens: tuple[Exponents, ...],
        relations: dict[Fraction, list[dict[int, Elem]]],
    ):
        self.ring = ring
        self.gens = gens
        self.relations = relations

    def gen_weights(self) -> list[Fraction]:
        return [self.ring.weight(e) for e in self.gens]

    def relation_count(self) -> int:
        return sum(len(rs) for rs in self.relations.values())


def ideal_presentation(
    ring: LevelRing, family: IdealFamily, wmax: Fraction
) -> ModulePresentation:
    """Present I(level) by minimal generators and syzygies up to wmax."""
    exps = family.gens_at(ring)
    # prune non-minimal generators (dominated ones are redundant)
    exps = [
        e
        for e in exps
        if not any(h != e and all(a >= b for a, b in zip(e, h)) for h in exps)
    ]
    gens = tuple(exps)
    gw = [ring.weight(e) for e in gens]
    relations: dict[Fraction, list[dict[int, Elem]]] = {}
    weights = set()
    for j, w0 in enumerate(gw):
        for rw in ring.basis_upto(Fraction(wmax) - w0):
            weights.add(w0 + rw)
    for w in sorted(weights):
        pairs = []
        for j, w0 in enumerate(gw):
            for m in ring.basis(w - w0):
                pairs.append((j, m))
        if not pairs:
            continue
        tgt = {m: r for r, m in enumerate(ring.basis(w))}
        rows: list[dict[int, object]] = [dict() for _ in tgt]
        for c, (j, m) in enumerate(pairs):
            prod = ring.mul_mono(gens[j], m)
            if ring.mono_is_zero(prod):
                continue
            rows[tgt[prod]][c] = ring.field.one
        rels = []
        for vec in kernel_rows(rows, len(pairs), ring.field):
            by_gen: dict[int, Elem] = {}
            for pos, coeff in vec.items():
                j, m = pairs[pos]
                cur = by_gen.setdefault(j, {})
                cur[m] = coeff
            rels.append(by_gen)
        if rels:
            relations[w] = rels
    return ModulePresentation(ring, gens, relations)
