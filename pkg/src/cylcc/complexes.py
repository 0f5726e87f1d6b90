"""The rational chain complex built from orbit and curve-count data.

Generators are good Reeb orbits graded by Conley-Zehnder index; the
differential counts index-1 cylinders weighted by 1/m(target orbit).
Everything at the chain level is exact rational arithmetic.

A dataset may additionally carry cobordism-level counts (chain maps,
grading 0), homotopy counts (levels ``k_plus``/``k_minus``, grading +1),
a plus/minus side split, and a stage decomposition for direct limits.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import ratmat
from .errors import DatasetError, IntegerCoefficientWarning, ValidationError
from .indices import ReebOrbit

LEVEL_SYMPLECTIZATION = "symplectization"
LEVEL_COBORDISM = "cobordism"
LEVEL_K_PLUS = "k_plus"
LEVEL_K_MINUS = "k_minus"
LEVELS = (LEVEL_SYMPLECTIZATION, LEVEL_COBORDISM, LEVEL_K_PLUS, LEVEL_K_MINUS)

# Grading drop enforced per level: the differential drops cz by 1, chain
# maps preserve it, homotopy maps raise it by 1.
LEVEL_GRADING_DROP = {
    LEVEL_SYMPLECTIZATION: 1,
    LEVEL_COBORDISM: 0,
    LEVEL_K_PLUS: -1,
    LEVEL_K_MINUS: -1,
}


@dataclass(frozen=True)
class OrbitRecord:
    """An orbit plus dataset-level metadata (side/stage, file location)."""

    orbit: ReebOrbit
    side: Optional[str] = None  # "plus" | "minus"
    stage: Optional[int] = None
    location: str = "<memory>"


@dataclass(frozen=True)
class CurveRecord:
    level: str
    ind: int
    from_id: str
    to_id: str
    count: Fraction
    tag: Optional[str] = None
    location: str = "<memory>"


@dataclass(frozen=True)
class Diagnostic:
    location: str
    message: str

    def __str__(self):
        return f"{self.location}: {self.message}"


@dataclass(frozen=True)
class ModuliDataset:
    orbits: Dict[str, OrbitRecord]
    curves: Tuple[CurveRecord, ...]

    def orbit(self, oid: str) -> ReebOrbit:
        return self.orbits[oid].orbit

    def orbit_ids(self, side=None, stage=None) -> List[str]:
        out = []
        for oid, rec in self.orbits.items():
            if side is not None and rec.side != side:
                continue
            if stage is not None and rec.stage != stage:
                continue
            out.append(oid)
        return sorted(out)

    @property
    def stages(self) -> List[int]:
        return sorted({r.stage for r in self.orbits.values() if r.stage is not None})


def load_dataset(orbit_records, curve_records) -> ModuliDataset:
    """Validate records into a dataset; collects every violation.

    ``orbit_records`` may contain bare :class:`ReebOrbit` objects or
    :class:`OrbitRecord` wrappers.
    """
    diagnostics: List[Diagnostic] = []
    orbits: Dict[str, OrbitRecord] = {}

    for rec in orbit_records:
        if isinstance(rec, ReebOrbit):
            rec = OrbitRecord(rec)
        oid = rec.orbit.id
        if oid in orbits:
            diagnostics.append(
                Diagnostic(
                    rec.location,
                    f"duplicate orbit id {oid!r} (first seen at {orbits[oid].location})",
                )
            )
            continue
        orbits[oid] = rec

    # Bad orbits are never generators; reject them at the door.
    for rec in orbits.values():
        if rec.orbit.is_bad:
            diagnostics.append(
                Diagnostic(
                    rec.location,
                    f"orbit {rec.orbit.id} is bad (even cover of a negative "
                    "hyperbolic orbit) and cannot generate the complex",
                )
            )

    # Orbits sharing a simple orbit must agree on its type, action and cz.
    by_simple: Dict[str, OrbitRecord] = {}
    for rec in orbits.values():
        o = rec.orbit
        prev = by_simple.get(o.simple_id)
        if prev is None:
            by_simple[o.simple_id] = rec
            continue
        p = prev.orbit
        if p.simple_type != o.simple_type:
            diagnostics.append(
                Diagnostic(rec.location, f"orbit {o.id}: simple orbit {o.simple_id} "
                           f"type disagrees with {p.id}")
            )
        if p.simple_action != o.simple_action:
            diagnostics.append(
                Diagnostic(rec.location, f"orbit {o.id}: action/multiplicity ratio "
                           f"disagrees with {p.id} over simple orbit {o.simple_id}")
            )
        if p.cz_simple != o.cz_simple:
            diagnostics.append(
                Diagnostic(rec.location, f"orbit {o.id}: cz of simple orbit "
                           f"{o.simple_id} disagrees with {p.id}")
            )

    curves = tuple(curve_records)
    for cur in curves:
        loc = cur.location
        if cur.level not in LEVELS:
            diagnostics.append(Diagnostic(loc, f"unknown curve level {cur.level!r}"))
            continue
        missing = [oid for oid in (cur.from_id, cur.to_id) if oid not in orbits]
        if missing:
            for oid in missing:
                diagnostics.append(Diagnostic(loc, f"unknown orbit id {oid!r}"))
            continue
        src = orbits[cur.from_id]
        dst = orbits[cur.to_id]
        for rec in (src, dst):
            if rec.orbit.is_bad:
                diagnostics.append(
                    Diagnostic(
                        loc,
                        f"orbit {rec.orbit.id} is bad (even cover of a negative "
                        "hyperbolic orbit) and cannot be a generator",
                    )
                )
        drop = LEVEL_GRADING_DROP[cur.level]
        if cur.ind != drop:
            diagnostics.append(
                Diagnostic(
                    loc,
                    f"{cur.level} curve must declare ind={drop}, got {cur.ind}",
                )
            )
        if src.orbit.cz - dst.orbit.cz != drop:
            diagnostics.append(
                Diagnostic(
                    loc,
                    f"{cur.level} curve must drop the grading by {drop}; "
                    f"cz({cur.from_id})={src.orbit.cz}, cz({cur.to_id})={dst.orbit.cz}",
                )
            )
        if cur.level == LEVEL_SYMPLECTIZATION:
            if src.orbit.action <= dst.orbit.action:
                diagnostics.append(
                    Diagnostic(
                        loc,
                        f"action must strictly decrease along symplectization "
                        f"curves: {src.orbit.action} -> {dst.orbit.action}",
                    )
                )
            if src.side is not None and src.side != dst.side:
                diagnostics.append(
                    Diagnostic(loc, "symplectization curve endpoints lie on "
                               "different sides")
                )
            if src.stage is not None and src.stage != dst.stage:
                diagnostics.append(
                    Diagnostic(loc, "symplectization curve endpoints lie in "
                               "different stages")
                )
        else:
            if src.orbit.action < dst.orbit.action:
                diagnostics.append(
                    Diagnostic(
                        loc,
                        f"action must weakly decrease along {cur.level} curves: "
                        f"{src.orbit.action} -> {dst.orbit.action}",
                    )
                )
            if src.side is not None and (src.side, dst.side) != ("plus", "minus"):
                diagnostics.append(
                    Diagnostic(loc, f"{cur.level} curve must run from side plus "
                               "to side minus")
                )
            if src.stage is not None and dst.stage != src.stage + 1:
                diagnostics.append(
                    Diagnostic(loc, f"{cur.level} curve must connect consecutive "
                               f"stages, got {src.stage} -> {dst.stage}")
                )

    if diagnostics:
        raise DatasetError(diagnostics)
    return ModuliDataset(orbits=orbits, curves=curves)


@dataclass(frozen=True)
class GradedRationalComplex:
    """Generators by grading plus differential blocks over the rationals.

    ``blocks[g]`` is the matrix of the differential C_g -> C_{g-1}, with
    columns indexed by ``generators[g]`` and rows by ``generators[g-1]``.
    Missing blocks are zero.
    """

    generators: Dict[int, Tuple[str, ...]]
    blocks: Dict[int, ratmat.Matrix]

    def __post_init__(self):
        for g, block in self.blocks.items():
            nrows = len(self.generators.get(g - 1, ()))
            ncols = len(self.generators.get(g, ()))
            if len(block) != nrows or any(len(row) != ncols for row in block):
                raise ValidationError(
                    f"differential block at grading {g} has shape "
                    f"{ratmat.shape(block)}, expected ({nrows},{ncols})"
                )

    @property
    def gradings(self) -> List[int]:
        return sorted(self.generators)

    def block(self, g: int) -> ratmat.Matrix:
        if g in self.blocks:
            return self.blocks[g]
        return ratmat.zeros(
            len(self.generators.get(g - 1, ())), len(self.generators.get(g, ()))
        )

    def dim(self, g: int) -> int:
        return len(self.generators.get(g, ()))


def differential_matrix(
    dataset: ModuliDataset,
    action_max: Optional[Fraction] = None,
    side: Optional[str] = None,
    stage: Optional[int] = None,
    audit: bool = True,
) -> GradedRationalComplex:
    """Assemble the differential from index-1 curve counts.

    Entry (gamma', gamma) is the summed signed count of curves from gamma
    to gamma' divided by m(gamma'), restricted to orbits of action below
    ``action_max``.  Non-integer coefficients only trigger a warning: the
    integrality of true data is a theorem, not an input invariant.
    """
    selected = [
        oid
        for oid in dataset.orbit_ids(side=side, stage=stage)
        if action_max is None or dataset.orbit(oid).action < action_max
    ]
    index = {oid: i for i, oid in enumerate(selected)}
    generators: Dict[int, List[str]] = {}
    for oid in selected:
        generators.setdefault(dataset.orbit(oid).cz, []).append(oid)
    gen_tuples = {g: tuple(ids) for g, ids in generators.items()}
    positions = {
        oid: (g, j) for g, ids in gen_tuples.items() for j, oid in enumerate(ids)
    }

    blocks: Dict[int, ratmat.Matrix] = {}
    totals: Dict[Tuple[str, str], Fraction] = {}
    for cur in dataset.curves:
        if cur.level != LEVEL_SYMPLECTIZATION:
            continue
        if cur.from_id not in index or cur.to_id not in index:
            continue
        key = (cur.from_id, cur.to_id)
        totals[key] = totals.get(key, Fraction(0)) + cur.count

    for (fid, tid), count in sorted(totals.items()):
        g, col = positions[fid]
        _, row = positions[tid]
        coeff = count / dataset.orbit(tid).multiplicity
        if audit and coeff.denominator != 1:
            warnings.warn(
                f"coefficient of {tid} in d({fid}) is {coeff}, not an integer",
                IntegerCoefficientWarning,
                stacklevel=2,
            )
        if g not in blocks:
            blocks[g] = ratmat.zeros(
                len(gen_tuples.get(g - 1, ())), len(gen_tuples.get(g, ()))
            )
        blocks[g][row][col] += coeff

    return GradedRationalComplex(generators=gen_tuples, blocks=blocks)


@dataclass(frozen=True)
class GradedMap:
    """A grading-homogeneous linear map between two graded complexes.

    ``blocks[g]`` maps source grading g to target grading ``g + degree``.
    """

    source: GradedRationalComplex
    target: GradedRationalComplex
    degree: int
    blocks: Dict[int, ratmat.Matrix]

    def __post_init__(self):
        for g, block in self.blocks.items():
            nrows = self.target.dim(g + self.degree)
            ncols = self.source.dim(g)
            if len(block) != nrows or any(len(row) != ncols for row in block):
                raise ValidationError(
                    f"map block at grading {g} has shape {ratmat.shape(block)}, "
                    f"expected ({nrows},{ncols})"
                )

    def block(self, g: int) -> ratmat.Matrix:
        if g in self.blocks:
            return self.blocks[g]
        return ratmat.zeros(self.target.dim(g + self.degree), self.source.dim(g))

    @classmethod
    def identity(cls, cx: GradedRationalComplex) -> "GradedMap":
        return cls(
            source=cx,
            target=cx,
            degree=0,
            blocks={g: ratmat.identity(cx.dim(g)) for g in cx.gradings},
        )

    @classmethod
    def zero(
        cls, source: GradedRationalComplex, target: GradedRationalComplex, degree=0
    ) -> "GradedMap":
        return cls(source=source, target=target, degree=degree, blocks={})


def graded_map_from_dataset(
    dataset: ModuliDataset,
    source: GradedRationalComplex,
    target: GradedRationalComplex,
    level: str,
    tag: Optional[str] = None,
    audit: Optional[bool] = None,
) -> GradedMap:
    """Assemble a chain map (cobordism) or homotopy map (k levels).

    Curves are matched by level and, when given, by tag.  Coefficients
    carry the 1/m(target) weight.  Cobordism coefficients are audited for
    integrality; homotopy maps are genuinely rational and are not.
    """
    if level not in (LEVEL_COBORDISM, LEVEL_K_PLUS, LEVEL_K_MINUS):
        raise ValidationError(f"graded maps come from cobordism or k levels, not {level}")
    degree = -LEVEL_GRADING_DROP[level]
    if audit is None:
        audit = level == LEVEL_COBORDISM

    src_pos = {
        oid: (g, j)
        for g, ids in source.generators.items()
        for j, oid in enumerate(ids)
    }
    dst_pos = {
        oid: (g, j)
        for g, ids in target.generators.items()
        for j, oid in enumerate(ids)
    }

    blocks: Dict[int, ratmat.Matrix] = {}
    totals: Dict[Tuple[str, str], Fraction] = {}
    for cur in dataset.curves:
        if cur.level != level:
            continue
        if tag is not None and cur.tag != tag:
            continue
        if cur.from_id not in src_pos or cur.to_id not in dst_pos:
            continue
        key = (cur.from_id, cur.to_id)
        totals[key] = totals.get(key, Fraction(0)) + cur.count

    for (fid, tid), count in sorted(totals.items()):
        g, col = src_pos[fid]
        _, row = dst_pos[tid]
        coeff = count / dataset.orbit(tid).multiplicity
        if audit and coeff.denominator != 1:
            warnings.warn(
                f"coefficient of {tid} in the chain map image of {fid} is "
                f"{coeff}, not an integer",
                IntegerCoefficientWarning,
                stacklevel=2,
            )
        if g not in blocks:
            blocks[g] = ratmat.zeros(target.dim(g + degree), source.dim(g))
        blocks[g][row][col] += coeff

    return GradedMap(source=source, target=target, degree=degree, blocks=blocks)


@dataclass(frozen=True)
class IdentityCheck:
    ok: bool
    grading: Optional[int] = None
    pair: Optional[Tuple[str, str]] = None
    value: Optional[Fraction] = None

    def __bool__(self):
        return self.ok


def verify_d_squared(cx: GradedRationalComplex) -> IdentityCheck:
    """Exact check that consecutive differential blocks compose to zero.

    On failure reports the first offending generator pair (gamma, gamma')
    with gamma in the higher grading.
    """
    for g in sorted(cx.blocks, reverse=True):
        if cx.dim(g) == 0 or cx.dim(g - 1) == 0 or cx.dim(g - 2) == 0:
            continue
        product = ratmat.mat_mul_shaped(
            cx.block(g - 1), cx.block(g), cx.dim(g - 2), cx.dim(g - 1), cx.dim(g)
        )
        for col, gamma in enumerate(cx.generators.get(g, ())):
            for row, gamma_prime in enumerate(cx.generators.get(g - 2, ())):
                if product[row][col] != 0:
                    return IdentityCheck(
                        ok=False,
                        grading=g,
                        pair=(gamma, gamma_prime),
                        value=product[row][col],
                    )
    return IdentityCheck(ok=True)


def homology(cx: GradedRationalComplex) -> Dict[int, int]:
    """Per-grading dimension of ker/im, by exact rational elimination."""
    check = verify_d_squared(cx)
    if not check.ok:
        raise ValidationError(
            f"d^2 != 0 at pair {check.pair} (grading {check.grading}); "
            "run verify_d_squared for details"
        )
    dims: Dict[int, int] = {}
    for g in cx.gradings:
        n = cx.dim(g)
        rank_out = ratmat.rank(cx.block(g)) if n else 0
        rank_in = ratmat.rank(cx.block(g + 1)) if cx.dim(g + 1) else 0
        dims[g] = n - rank_out - rank_in
    return dims


def chain_map_check(
    d_plus: GradedRationalComplex,
    d_minus: GradedRationalComplex,
    phi: GradedMap,
) -> IdentityCheck:
    """Exact check of the chain-map identity d_minus . phi = phi . d_plus."""
    if phi.degree != 0:
        raise ValidationError("chain maps must preserve the grading")
    if phi.source is not d_plus and phi.source.generators != d_plus.generators:
        raise ValidationError("phi source does not match the plus complex")
    if phi.target is not d_minus and phi.target.generators != d_minus.generators:
        raise ValidationError("phi target does not match the minus complex")

    gradings = sorted(set(d_plus.gradings) | set(d_minus.gradings), reverse=True)
    for g in gradings:
        nrows, ncols = d_minus.dim(g - 1), d_plus.dim(g)
        if nrows == 0 or ncols == 0:
            continue
        lhs = ratmat.mat_mul_shaped(
            d_minus.block(g), phi.block(g), nrows, d_minus.dim(g), ncols
        )
        rhs = ratmat.mat_mul_shaped(
            phi.block(g - 1), d_plus.block(g), nrows, d_plus.dim(g - 1), ncols
        )
        diff = ratmat.mat_sub(lhs, rhs)
        for col, gamma in enumerate(d_plus.generators.get(g, ())):
            for row, gamma_prime in enumerate(d_minus.generators.get(g - 1, ())):
                if diff[row][col] != 0:
                    return IdentityCheck(
                        ok=False, grading=g, pair=(gamma, gamma_prime),
                        value=diff[row][col],
                    )
    return IdentityCheck(ok=True)


def chain_homotopy_check(
    phi0: GradedMap,
    phi1: GradedMap,
    k_plus: GradedMap,
    k_minus: GradedMap,
    d_plus: GradedRationalComplex,
    d_minus: GradedRationalComplex,
) -> IdentityCheck:
    """Exact check of phi1 - phi0 = K_+ . d_+ + d_- . K_-."""
    for k in (k_plus, k_minus):
        if k.degree != 1:
            raise ValidationError("homotopy maps must raise the grading by 1")
    for phi in (phi0, phi1):
        if phi.degree != 0:
            raise ValidationError("chain maps must preserve the grading")

    gradings = sorted(set(d_plus.gradings) | set(d_minus.gradings), reverse=True)
    for g in gradings:
        nrows, ncols = d_minus.dim(g), d_plus.dim(g)
        if nrows == 0 or ncols == 0:
            continue
        lhs = ratmat.mat_sub(phi1.block(g), phi0.block(g))
        rhs = ratmat.mat_add(
            ratmat.mat_mul_shaped(
                k_plus.block(g - 1), d_plus.block(g), nrows, d_plus.dim(g - 1), ncols
            ),
            ratmat.mat_mul_shaped(
                d_minus.block(g + 1), k_minus.block(g), nrows, d_minus.dim(g + 1), ncols
            ),
        )
        diff = ratmat.mat_sub(lhs, rhs)
        for col, gamma in enumerate(d_plus.generators.get(g, ())):
            for row, gamma_prime in enumerate(d_minus.generators.get(g, ())):
                if diff[row][col] != 0:
                    return IdentityCheck(
                        ok=False, grading=g, pair=(gamma, gamma_prime),
                        value=diff[row][col],
                    )
    return IdentityCheck(ok=True)


def side_complexes(dataset: ModuliDataset, action_max=None):
    """The plus and minus differentials of a two-sided dataset."""
    d_plus = differential_matrix(dataset, action_max=action_max, side="plus")
    d_minus = differential_matrix(dataset, action_max=action_max, side="minus")
    return d_plus, d_minus


def stage_sequence(dataset: ModuliDataset, action_max=None):
    """Per-stage complexes and the cobordism maps between them."""
    stages = dataset.stages
    if not stages:
        raise ValidationError("dataset carries no stage labels")
    complexes = [
        differential_matrix(dataset, action_max=action_max, stage=s) for s in stages
    ]
    maps = [
        graded_map_from_dataset(
            dataset, complexes[i], complexes[i + 1], LEVEL_COBORDISM
        )
        for i in range(len(stages) - 1)
    ]
    return complexes, maps


def consistent_random_dataset(
    seed: int, dims=(3, 4, 3), max_count: int = 3
) -> ModuliDataset:
    """Random three-layer dataset whose differential squares to zero.

    Layers sit in gradings 2, 1, 0.  The grading-1 block is random; the
    grading-2 block is drawn from its exact rational kernel, so the
    product of the two blocks cancels by construction.
    """
    import random as _random

    rng = _random.Random(seed)
    n2, n1, n0 = dims

    def rand_int():
        return rng.randint(-max_count, max_count)

    lower = [[Fraction(rand_int()) for _ in range(n1)] for _ in range(n0)]
    kernel = ratmat.nullspace(lower, ncols=n1)
    kdim = len(kernel[0]) if kernel else 0
    mix = [[Fraction(rand_int()) for _ in range(n2)] for _ in range(kdim)]
    upper = ratmat.mat_mul_shaped(kernel, mix, n1, kdim, n2)
    # Clear denominators columnwise so the counts stay integral.
    for col in range(n2):
        denom = 1
        for row in range(n1):
            denom = denom * upper[row][col].denominator // _gcd(
                denom, upper[row][col].denominator
            )
        for row in range(n1):
            upper[row][col] *= denom

    orbits = []
    for g, n, base_action in ((2, n2, 30), (1, n1, 20), (0, n0, 10)):
        for j in range(n):
            stype = "pos_hyperbolic" if g % 2 == 0 else "neg_hyperbolic"
            orbits.append(
                ReebOrbit(
                    id=f"g{g}_{j}",
                    simple_id=f"g{g}_{j}s",
                    multiplicity=1,
                    simple_type=stype,
                    action=Fraction(base_action + j),
                    cz_simple=g,
                )
            )
    curves = []
    for row in range(n1):
        for col in range(n2):
            if upper[row][col] != 0:
                curves.append(
                    CurveRecord(
                        LEVEL_SYMPLECTIZATION, 1,
                        f"g2_{col}", f"g1_{row}", upper[row][col],
                    )
                )
    for row in range(n0):
        for col in range(n1):
            if lower[row][col] != 0:
                curves.append(
                    CurveRecord(
                        LEVEL_SYMPLECTIZATION, 1,
                        f"g1_{col}", f"g0_{row}", lower[row][col],
                    )
                )
    return load_dataset(orbits, curves)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return abs(a) if a else 1


@dataclass(frozen=True)
class DirectLimitResult:
    dims_by_stage: Dict[int, Dict[int, int]]  # grading -> {stage -> dim of image}
    stabilized: Dict[int, bool]
    value: Dict[int, int]
    stabilized_from: Dict[int, Optional[int]]

    @property
    def all_stable(self) -> bool:
        return all(self.stabilized.values())


def direct_limit(
    stages: Sequence[GradedRationalComplex],
    maps: Sequence[GradedMap],
    horizon: Optional[int] = None,
) -> DirectLimitResult:
    """Images of each stage's homology in the horizon stage's homology.

    For each grading the sequence dim im(H(stage i) -> H(horizon)) is
    reported for i = 1..horizon; the value is declared stable when the
    last two stages agree.
    """
    if horizon is None:
        horizon = len(stages)
    if not 1 <= horizon <= len(stages):
        raise ValidationError("horizon must index an available stage")
    if len(maps) < horizon - 1:
        raise ValidationError("need a chain map between each consecutive stage")

    for i in range(horizon - 1):
        check = chain_map_check(stages[i], stages[i + 1], maps[i])
        if not check.ok:
            raise ValidationError(
                f"stage {i + 1} -> {i + 2} map is not a chain map "
                f"(fails at {check.pair}, grading {check.grading})"
            )

    last = stages[horizon - 1]
    gradings = sorted({g for s in stages[:horizon] for g in s.gradings})
    dims_by_stage: Dict[int, Dict[int, int]] = {g: {} for g in gradings}

    for g in gradings:
        boundary_in = last.block(g + 1)  # image of d at the horizon stage
        rank_in = ratmat.rank(boundary_in) if last.dim(g + 1) else 0
        for stage_i in range(1, horizon + 1):
            if last.dim(g) == 0:
                dims_by_stage[g][stage_i] = 0
                continue
            cx = stages[stage_i - 1]
            if cx.dim(g) == 0:
                dims_by_stage[g][stage_i] = 0
                continue
            kernel = ratmat.nullspace(cx.block(g), ncols=cx.dim(g))
            pushed = kernel
            kcols = len(kernel[0]) if kernel else 0
            for j in range(stage_i - 1, horizon - 1):
                nmid = stages[j].dim(g)
                nrows = stages[j + 1].dim(g)
                pushed = ratmat.mat_mul_shaped(
                    maps[j].block(g), pushed, nrows, nmid, kcols
                )
            combined = ratmat.hstack(pushed, boundary_in)
            dims_by_stage[g][stage_i] = ratmat.rank(combined) - rank_in
    stabilized = {}
    value = {}
    stabilized_from: Dict[int, Optional[int]] = {}
    for g in gradings:
        seq = [dims_by_stage[g][i] for i in range(1, horizon + 1)]
        stable = len(seq) < 2 or seq[-1] == seq[-2]
        stabilized[g] = stable
        value[g] = seq[-1]
        if stable:
            start = horizon
            while start > 1 and dims_by_stage[g][start - 1] == seq[-1]:
                start -= 1
            stabilized_from[g] = start
        else:
            stabilized_from[g] = None
    return DirectLimitResult(
        dims_by_stage=dims_by_stage,
        stabilized=stabilized,
        value=value,
        stabilized_from=stabilized_from,
    )
