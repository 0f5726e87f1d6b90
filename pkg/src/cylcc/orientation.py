"""Exact sign calculus on determinant lines of finite-dimensional maps.

The comparison isomorphism sends an orientation of det(phi) = top(ker)
tensor top(coker)* to one of det(phi^{-1}(E)) tensor det(E)* via

    [v_1^...^v_m (x) w_n*^...^w_1*]
        |-> [v_1^...^v_m^f_1^...^f_l (x) phi(f_l)*^...^phi(f_1)*^w_n*^...^w_1*],

where F = <f_1..f_l> complements ker(phi) in phi^{-1}(E) and the w's
realize coker(phi) as a complement of phi(F) inside E.  The isomorphism
is natural up to a positive constant: rescaling any basis vector by a
positive factor or replacing F leaves all computed signs unchanged.

Everything here is exact rational arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import ratmat
from .errors import DegeneracyError, ValidationError

Vector = Tuple[Fraction, ...]


def wedge_sign(permutation: Sequence[int]) -> int:
    """Sign of a permutation given as a 0- or 1-based sequence."""
    perm = list(permutation)
    n = len(perm)
    base = min(perm) if perm else 0
    if base not in (0, 1) or sorted(perm) != list(range(base, base + n)):
        raise ValidationError(f"{permutation!r} is not a permutation")
    perm = [p - base for p in perm]
    seen = [False] * n
    sign = 1
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _as_vectors(vectors, dim: int, what: str) -> List[List[Fraction]]:
    out = []
    for v in vectors:
        v = [Fraction(x) for x in v]
        if len(v) != dim:
            raise ValidationError(f"{what}: vector of length {len(v)}, expected {dim}")
        out.append(v)
    return out


def _columns(vectors: List[List[Fraction]]) -> ratmat.Matrix:
    if not vectors:
        return []
    dim = len(vectors[0])
    return [[vectors[j][i] for j in range(len(vectors))] for i in range(dim)]


def _independent(vectors: List[List[Fraction]]) -> bool:
    if not vectors:
        return True
    return ratmat.rank(_columns(vectors)) == len(vectors)


def _in_span(vector: List[Fraction], basis: List[List[Fraction]]) -> bool:
    if not basis:
        return all(x == 0 for x in vector)
    return ratmat.solve_coordinates(_columns(basis), vector) is not None


@dataclass(frozen=True)
class OrientedBasis:
    """An ordered independent family together with a sign."""

    vectors: Tuple[Vector, ...]
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValidationError("orientation sign must be +1 or -1")
        vecs = [list(v) for v in self.vectors]
        if vecs and not _independent(vecs):
            raise ValidationError("oriented basis vectors must be independent")


@dataclass(frozen=True)
class FredholmModel:
    """A rational matrix phi: V -> W with a chosen subspace E of W.

    ``matrix`` has one row per W-coordinate; ``e_basis`` lists vectors
    spanning E.  The comparison isomorphism needs Im(phi) + E = W.
    """

    matrix: Tuple[Tuple[Fraction, ...], ...]
    e_basis: Tuple[Vector, ...]

    def __post_init__(self):
        rows = [list(map(Fraction, row)) for row in self.matrix]
        if not rows:
            raise ValidationError("phi needs at least one row")
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise ValidationError("ragged matrix")
        e_vecs = _as_vectors(self.e_basis, len(rows), "E basis")
        if e_vecs and not _independent(e_vecs):
            raise ValidationError("E basis must be independent")
        combined = [list(col) for col in zip(*rows)] + e_vecs
        if ratmat.rank(_columns(combined)) != len(rows):
            raise ValidationError("Im(phi) + span(E) must be all of W")

    @property
    def dim_w(self) -> int:
        return len(self.matrix)

    @property
    def dim_v(self) -> int:
        return len(self.matrix[0])

    def apply(self, v: Sequence[Fraction]) -> List[Fraction]:
        v = [Fraction(x) for x in v]
        if len(v) != self.dim_v:
            raise ValidationError("vector has wrong dimension for phi")
        return [
            sum((Fraction(a) * b for a, b in zip(row, v)), Fraction(0))
            for row in self.matrix
        ]

    def nullity(self) -> int:
        rows = [list(map(Fraction, row)) for row in self.matrix]
        return self.dim_v - ratmat.rank(rows)


def comparison_sign(
    model: FredholmModel,
    ker_basis: Sequence[Sequence],
    f_basis: Sequence[Sequence],
    coker_basis: Sequence[Sequence],
    phi_f_basis: Sequence[Sequence],
    preimage_basis: Optional[Sequence[Sequence]] = None,
    e_basis: Optional[Sequence[Sequence]] = None,
) -> int:
    """Sign relating the comparison image to a reference orientation.

    The comparison image of [ker (x) rev-dual coker] is expressed in the
    bases (ker, f) of phi^{-1}(E) and (coker, phi(f)) of E; the reference
    orientation uses ``preimage_basis`` and ``e_basis`` (defaulting to
    those same concatenations).  The result is the product of the signs
    of the two change-of-basis determinants.
    """
    dim_v, dim_w = model.dim_v, model.dim_w
    ker = _as_vectors(ker_basis, dim_v, "kernel basis")
    f = _as_vectors(f_basis, dim_v, "F basis")
    coker = _as_vectors(coker_basis, dim_w, "cokernel basis")
    phi_f = _as_vectors(phi_f_basis, dim_w, "phi(F) basis")
    e_span = _as_vectors(model.e_basis, dim_w, "E basis")

    for v in ker:
        if any(x != 0 for x in model.apply(v)):
            raise ValidationError("kernel basis vector not in ker(phi)")
    if len(ker) != model.nullity() or not _independent(ker):
        raise ValidationError("kernel basis must be a basis of ker(phi)")

    images = [model.apply(v) for v in f]
    for w in images:
        if not _in_span(w, e_span):
            raise ValidationError("phi(F) must lie inside E")
    if not _independent(ker + f):
        raise ValidationError("(ker, F) must be independent")
    if not _independent(images):
        raise ValidationError("phi must be injective on F")
    # F must fill phi^{-1}(E): dim = nullity + dim(Im phi cap E).
    rank_phi = model.dim_v - model.nullity()
    dim_sum = ratmat.rank(
        _columns([list(col) for col in zip(*model.matrix)] + e_span)
    )
    dim_cap = rank_phi + len(e_span) - dim_sum
    if len(f) != dim_cap:
        raise ValidationError(
            f"F basis has {len(f)} vectors; phi^{{-1}}(E) needs {dim_cap} beyond the kernel"
        )

    for w in coker:
        if not _in_span(w, e_span):
            raise ValidationError("cokernel representatives must lie inside E")
    if not _independent(coker + images):
        raise ValidationError("(coker, phi(F)) must be independent")
    if len(coker) + len(images) != len(e_span):
        raise ValidationError("(coker, phi(F)) must span E")

    for w in phi_f:
        if not _in_span(w, images):
            raise ValidationError("phi(F) basis must lie in the image of F")
    if len(phi_f) != len(images) or not _independent(phi_f):
        raise ValidationError("phi(F) basis must be a basis of phi(F)")

    if preimage_basis is None:
        preimage = ker + f
    else:
        preimage = _as_vectors(preimage_basis, dim_v, "preimage basis")
        for v in preimage:
            if not _in_span(model.apply(v), e_span):
                raise ValidationError("preimage basis vector outside phi^{-1}(E)")
        if len(preimage) != len(ker) + len(f) or not _independent(preimage):
            raise ValidationError("preimage basis must be a basis of phi^{-1}(E)")
    if e_basis is None:
        e_ref = coker + phi_f
    else:
        e_ref = _as_vectors(e_basis, dim_w, "reference E basis")
        for w in e_ref:
            if not _in_span(w, e_span):
                raise ValidationError("reference E basis vector outside E")
        if len(e_ref) != len(e_span) or not _independent(e_ref):
            raise ValidationError("reference E basis must be a basis of E")

    sign_v = _change_of_basis_sign(ker + f, preimage, "phi^{-1}(E)")
    sign_e = _change_of_basis_sign(coker + phi_f, e_ref, "E")
    return sign_v * sign_e


def _change_of_basis_sign(vectors, reference, what: str) -> int:
    """Sign of det of the matrix expressing ``vectors`` in ``reference``."""
    if not vectors and not reference:
        return 1
    cols = _columns(reference)
    coords = []
    for v in vectors:
        c = ratmat.solve_coordinates(cols, v)
        if c is None:
            raise ValidationError(f"vector outside the span of the {what} basis")
        coords.append(c)
    d = ratmat.det(coords)
    if d == 0:
        raise ValidationError(f"degenerate change of basis in {what}")
    return 1 if d > 0 else -1


def glued_sign(sgn1: int, sgn2: int, direction: str = "a_points_away") -> int:
    """Boundary-vector sign from the two glued-level signs.

    At an end where the boundary vector points away from the broken
    configuration, sgn(u1) sgn(u2) = -sgn(a); where it points toward,
    the product equals +sgn(a).
    """
    for s in (sgn1, sgn2):
        if s not in (1, -1):
            raise ValidationError("level signs must be +1 or -1")
    if direction == "a_points_away":
        return -sgn1 * sgn2
    if direction == "a_points_toward":
        return sgn1 * sgn2
    raise ValidationError("direction must be a_points_away or a_points_toward")


@dataclass(frozen=True)
class ArcPairing:
    sign_a: int
    consistent: bool


def arc_pair_check(s1: int, s2: int, s1_flat: int, s2_flat: int) -> ArcPairing:
    """Consistency of the two ends of one boundary arc.

    The arc orients its boundary vector away from (u1, u2) and toward
    (u1_flat, u2_flat), so consistency means exactly

        sgn(u1_flat) sgn(u2_flat) = sgn(a) = -sgn(u1) sgn(u2).
    """
    sign_from_start = glued_sign(s1, s2, "a_points_away")
    sign_from_end = glued_sign(s1_flat, s2_flat, "a_points_toward")
    return ArcPairing(
        sign_a=sign_from_start, consistent=sign_from_start == sign_from_end
    )


def ds0_sign(
    k: int,
    pole: str,
    ev_jacobian: Sequence[Sequence],
    lambdas: Sequence[float],
    T: float,
) -> int:
    """Sign of the linearized section's differential at a pole zero.

    The differential is diag(e^{-2 lambda_i T}) times the evaluation-map
    Jacobian; the diagonal factors are positive, so only the Jacobian's
    determinant sign survives, flipped globally at the south pole.
    """
    if k < 2:
        raise ValidationError("ds0 sign needs k >= 2")
    if pole not in ("north", "south"):
        raise ValidationError("pole must be north or south")
    if T <= 0:
        raise ValidationError("T must be positive")
    lams = [float(l) for l in lambdas]
    if len(lams) != k - 1 or any(l <= 0 for l in lams):
        raise ValidationError("need k-1 positive eigenvalues")
    jac = [list(map(Fraction, row)) for row in ev_jacobian]
    if len(jac) != k - 1 or any(len(row) != k - 1 for row in jac):
        raise ValidationError("ev_jacobian must be (k-1) x (k-1)")
    d = ratmat.det(jac)
    if d == 0:
        raise DegeneracyError("singular evaluation Jacobian at the pole zero")
    pole_sign = 1 if pole == "north" else -1
    return pole_sign * (1 if d > 0 else -1)
