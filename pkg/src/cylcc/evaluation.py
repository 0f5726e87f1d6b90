"""Evaluation-map geometry at cylinder ends.

A curve end contributes Fourier coefficients (c_1, ..., c_k) against the
positive eigenmodes of the asymptotic operator.  The translation flow
acts by c_i -> c_i e^{lambda_i s}, and nonzero coefficient vectors
descend to the sphere S^{k-1}: each flow line meets the radius-r sphere
exactly once since <c'(s), c(s)> > 0.

Synthetic evaluation maps (trigonometric polynomials into R^k minus the
origin, k = 2 or 3) stand in for moduli spaces with their evaluation
maps; derivatives are exact, so pole preimages, meridian crossings, and
the zero locus of the linearized obstruction section can all be checked
against brute-force scans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .errors import DegeneracyError, DomainError, ValidationError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EndExpansion:
    """Leading Fourier data of an end: eigenvalues and coefficients."""

    lambdas: Tuple[float, ...]
    coeffs: Tuple[float, ...]

    def __post_init__(self):
        if len(self.lambdas) != len(self.coeffs):
            raise ValidationError("lambdas and coeffs must have equal length")
        if len(self.lambdas) < 1:
            raise ValidationError("an end expansion needs at least one mode")
        if any(l <= 0 for l in self.lambdas):
            raise ValidationError("end expansions use positive eigenvalues only")
        if any(b < a for a, b in zip(self.lambdas, self.lambdas[1:])):
            raise ValidationError("eigenvalues must be nondecreasing")

    @property
    def k(self) -> int:
        return len(self.lambdas)


def flow_normalize(e: EndExpansion, radius: float = 1.0) -> np.ndarray:
    """The unique point of |c(s)| = radius along the translation flow."""
    if radius <= 0:
        raise DomainError("radius must be positive")
    c = np.asarray(e.coeffs, dtype=float)
    lam = np.asarray(e.lambdas, dtype=float)
    if not np.any(c != 0.0):
        raise DomainError("zero coefficient vector has an undefined quotient")

    def squared_radius(s):
        return float(np.sum(c * c * np.exp(2.0 * lam * s))) - radius**2

    lo = hi = 0.0
    step = 1.0
    while squared_radius(lo) > 0.0:
        lo -= step
        step *= 2.0
    step = 1.0
    while squared_radius(hi) < 0.0:
        hi += step
        step *= 2.0
    s_star = brentq(squared_radius, lo, hi, xtol=1e-15, rtol=8.9e-16)
    return c * np.exp(lam * s_star)


def s0_eval(T: float, e: EndExpansion) -> np.ndarray:
    """Entries e^{-2 lambda_i T} c_i of the linearized obstruction section.

    Only the first k-1 coefficients enter: the last cokernel element is
    quotiented out.
    """
    if T <= 0:
        raise DomainError("the gluing parameter T must be positive")
    if e.k < 2:
        raise ValidationError("s0 needs k >= 2 modes")
    lam = np.asarray(e.lambdas[:-1], dtype=float)
    c = np.asarray(e.coeffs[:-1], dtype=float)
    return np.exp(-2.0 * lam * T) * c


@dataclass(frozen=True)
class TrigPolynomial:
    """Real trigonometric polynomial in ``nvars`` circle variables.

    Terms are (kind, orders, value) with kind "const", "cos", or "sin";
    a cos/sin term contributes value * cos/sin(2 pi orders . theta).
    """

    nvars: int
    terms: Tuple[Tuple[str, Tuple[int, ...], float], ...]

    def __post_init__(self):
        for kind, orders, _ in self.terms:
            if kind not in ("const", "cos", "sin"):
                raise ValidationError(f"unknown term kind {kind!r}")
            if len(orders) != self.nvars:
                raise ValidationError("term order tuple has wrong arity")

    def __call__(self, theta) -> np.ndarray:
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        out = np.zeros(theta.shape[0])
        for kind, orders, value in self.terms:
            if kind == "const":
                out += value
                continue
            phase = TWO_PI * (theta @ np.asarray(orders, dtype=float))
            out += value * (np.cos(phase) if kind == "cos" else np.sin(phase))
        return out

    def partial(self, var: int) -> "TrigPolynomial":
        terms = []
        for kind, orders, value in self.terms:
            if kind == "const" or orders[var] == 0:
                continue
            w = TWO_PI * orders[var]
            if kind == "cos":
                terms.append(("sin", orders, -value * w))
            else:
                terms.append(("cos", orders, value * w))
        return TrigPolynomial(self.nvars, tuple(terms))

    @classmethod
    def zero(cls, nvars: int) -> "TrigPolynomial":
        return cls(nvars, ())


@dataclass(frozen=True)
class EvMapSpec:
    """Synthetic order-k evaluation map on a circle (k=2) or torus (k=3).

    ``components`` are the k coordinate functions into R^k; the image
    must avoid the origin (checked on a dense grid).  ``lambdas`` are the
    positive eigenvalues weighting the flow quotient. ``singular_params``
    declares parameter points whose images a generic meridian must avoid.
    """

    k: int
    components: Tuple[TrigPolynomial, ...]
    lambdas: Tuple[float, ...]
    orientation: int = 1
    singular_params: Tuple[Tuple[float, ...], ...] = ()
    _origin_check_grid: int = 256

    def __post_init__(self):
        if self.k not in (2, 3):
            raise ValidationError("evaluation maps are implemented for k in {2, 3}")
        if len(self.components) != self.k:
            raise ValidationError("need one component per target coordinate")
        if any(c.nvars != self.nvars for c in self.components):
            raise ValidationError("component arity must match the domain dimension")
        if len(self.lambdas) != self.k:
            raise ValidationError("need one eigenvalue per component")
        if any(l <= 0 for l in self.lambdas):
            raise ValidationError("flow eigenvalues must be positive")
        if any(b < a for a, b in zip(self.lambdas, self.lambdas[1:])):
            raise ValidationError("flow eigenvalues must be nondecreasing")
        if self.orientation not in (1, -1):
            raise ValidationError("orientation flag must be +1 or -1")
        grid = _param_grid(self.nvars, self._origin_check_grid)
        values = self.evaluate(grid)
        closest = float(np.min(np.linalg.norm(values, axis=1)))
        if closest < 1e-9:
            raise ValidationError(
                f"map image approaches the origin (min |F| = {closest:.2e})"
            )

    @property
    def nvars(self) -> int:
        return self.k - 1

    def evaluate(self, theta) -> np.ndarray:
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        return np.column_stack([comp(theta) for comp in self.components])

    def expansion_at(self, theta) -> EndExpansion:
        values = self.evaluate(np.atleast_2d(theta))[0]
        return EndExpansion(tuple(self.lambdas), tuple(float(v) for v in values))

    def normalized(self, theta, radius: float = 1.0) -> np.ndarray:
        return flow_normalize(self.expansion_at(theta), radius)


def _param_grid(nvars: int, n: int) -> np.ndarray:
    axes = [np.arange(n) / n for _ in range(nvars)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def _axis_index(spec: EvMapSpec, pole_choice: str) -> int:
    if pole_choice == "last_coordinate":
        return spec.k - 1
    if pole_choice == "first_coordinate":
        return 0
    raise ValidationError("pole_choice must be last_coordinate or first_coordinate")


def _orientation_correction(axis: int, pole_sign: int) -> int:
    # [sign * e_axis ^ e_{j_1} ^ ... ] = sign * (-1)^axis [e_1 ^ ... ^ e_k]
    return pole_sign * (-1) ** axis


@dataclass(frozen=True)
class PolePreimage:
    params: Tuple[float, ...]
    pole: int  # +1 for the positive pole on the axis, -1 for the negative
    sign: int  # local orientation sign


def _jacobian_det(spec: EvMapSpec, zero_comps, theta: np.ndarray) -> float:
    theta = np.atleast_2d(theta)
    rows = []
    for j in zero_comps:
        rows.append(
            [spec.components[j].partial(v)(theta)[0] for v in range(spec.nvars)]
        )
    mat = np.array(rows)
    return float(np.linalg.det(mat))


def _circle_roots(func, n_scan: int) -> List[float]:
    """Roots of a smooth 1-periodic function via sign changes + brentq.

    A near-zero sample with no sign change betrays a tangential root;
    those are rejected rather than silently missed.
    """
    ts = np.arange(n_scan + 1) / n_scan
    vals = func(ts.reshape(-1, 1))
    roots = []
    for j in range(n_scan):
        a, b = vals[j], vals[j + 1]
        if a == 0.0:
            roots.append(ts[j])
        elif a * b < 0.0:
            roots.append(
                brentq(lambda t: float(func(np.array([[t]]))[0]), ts[j], ts[j + 1],
                       xtol=1e-14)
            )
    # dedupe modulo 1
    out = []
    for r in sorted(x % 1.0 for x in roots):
        if not out or (r - out[-1]) % 1.0 > 1e-9:
            out.append(r)
    if out and (out[0] + 1.0 - out[-1]) < 1e-9:
        out.pop()
    near = np.abs(vals[:-1]) < 1e-6
    if np.any(near):
        for j in np.nonzero(near)[0]:
            t = float(ts[j])
            if not any(min(abs(t - r), 1.0 - abs(t - r)) < 2.0 / n_scan for r in out):
                raise DegeneracyError(
                    f"tangential zero near parameter {t}", where=(t,)
                )
    return out


def _torus_zeros(f1, f2, j1, j2, n_grid: int, newton_steps: int = 60) -> List[Tuple[float, float]]:
    """Common zeros of two trig polynomials on the torus by seeded Newton."""
    grid = _param_grid(2, n_grid)
    theta = grid.copy()
    for _ in range(newton_steps):
        v1, v2 = f1(theta), f2(theta)
        a = j1[0](theta)
        b = j1[1](theta)
        c = j2[0](theta)
        d = j2[1](theta)
        det = a * d - b * c
        bad = np.abs(det) < 1e-14
        det[bad] = 1.0
        dx = (d * v1 - b * v2) / det
        dy = (-c * v1 + a * v2) / det
        step = np.column_stack([dx, dy])
        norm = np.linalg.norm(step, axis=1, keepdims=True)
        step = np.where(norm > 0.25, step * (0.25 / norm), step)  # damped
        theta = theta - step
        theta[bad] = np.nan
    v1, v2 = f1(theta), f2(theta)
    ok = np.isfinite(theta).all(axis=1) & (np.abs(v1) < 1e-10) & (np.abs(v2) < 1e-10)
    candidates = np.mod(theta[ok], 1.0)
    roots: List[Tuple[float, float]] = []
    for cand in candidates:
        if not any(
            _torus_distance(cand, np.asarray(r)) < 1e-7 for r in roots
        ):
            roots.append((float(cand[0]), float(cand[1])))
    return sorted(roots)


def _torus_distance(a: np.ndarray, b: np.ndarray) -> float:
    d = np.abs(a - b) % 1.0
    d = np.minimum(d, 1.0 - d)
    return float(np.max(d))


def pole_preimages(
    spec: EvMapSpec,
    pole_choice: str = "last_coordinate",
    n_scan: int = 8192,
    n_grid: int = 96,
    degeneracy_tol: float = 1e-8,
) -> List[PolePreimage]:
    """All preimages of the two poles on the chosen axis, with local signs.

    A preimage of (0,..,0,+-1) (axis = last) is a common zero of the
    remaining components; the flow normalization rescales coordinates by
    positive factors, so the zero set and the Jacobian sign at each root
    are unaffected by the eigenvalue weights.
    """
    axis = _axis_index(spec, pole_choice)
    zero_comps = [j for j in range(spec.k) if j != axis]
    out: List[PolePreimage] = []
    if spec.nvars == 1:
        roots = _circle_roots(spec.components[zero_comps[0]], n_scan)
        params = [(r,) for r in roots]
    else:
        f1, f2 = (spec.components[j] for j in zero_comps)
        j1 = [f1.partial(0), f1.partial(1)]
        j2 = [f2.partial(0), f2.partial(1)]
        params = _torus_zeros(f1, f2, j1, j2, n_grid)
    for p in params:
        theta = np.asarray(p, dtype=float)
        det = _jacobian_det(spec, zero_comps, theta)
        if abs(det) < degeneracy_tol:
            raise DegeneracyError(
                f"pole preimage at {p} is not transverse (|det J| = {abs(det):.2e})",
                where=p,
            )
        axis_value = float(spec.components[axis](np.atleast_2d(theta))[0])
        pole = 1 if axis_value > 0 else -1
        sign = (
            _orientation_correction(axis, pole)
            * (1 if det > 0 else -1)
            * spec.orientation
        )
        out.append(PolePreimage(params=tuple(float(x) for x in p), pole=pole, sign=sign))
    return sorted(out, key=lambda r: r.params)


@dataclass(frozen=True)
class MeridianPath:
    """Meridian arc from the positive to the negative pole of an axis.

    The arc runs through the point ``through_sign * e_through``; crossing
    queries are made at its midpoint (the equator point).
    """

    pole_axis: str = "last_coordinate"
    through: int = 0
    through_sign: int = 1

    def __post_init__(self):
        if self.through_sign not in (1, -1):
            raise ValidationError("through_sign must be +1 or -1")


@dataclass(frozen=True)
class Crossing:
    params: Tuple[float, ...]
    sign: int


@dataclass(frozen=True)
class ArcComponent:
    """One component of the preimage of the meridian (k = 2 only)."""

    start: float
    end: float
    start_pole: int
    end_pole: int
    start_sign: int
    end_sign: int
    net_crossing: int


@dataclass(frozen=True)
class PathIntersections:
    crossings: Tuple[Crossing, ...]
    components: Tuple[ArcComponent, ...] = ()

    @property
    def total_signed(self) -> int:
        return sum(c.sign for c in self.crossings)


def path_intersections(
    spec: EvMapSpec,
    path: MeridianPath = MeridianPath(),
    n_scan: int = 8192,
    n_grid: int = 96,
    degeneracy_tol: float = 1e-8,
) -> PathIntersections:
    """Signed crossings of the normalized map through the meridian midpoint.

    The midpoint of the meridian is the equator point ``s * e_through``;
    its preimages are transverse intersections of the image with the arc,
    signed by the local degree.  For k = 2 the components of the arc
    preimage are reported as well, with their endpoint pole data.
    """
    axis = _axis_index(spec, path.pole_axis)
    if path.through == axis or not 0 <= path.through < spec.k:
        raise ValidationError("the meridian must pass through a distinct axis")
    for p in spec.singular_params:
        image = spec.normalized(np.asarray(p))
        on_plane = all(
            abs(image[j]) < 1e-9
            for j in range(spec.k)
            if j not in (axis, path.through)
        )
        if on_plane and image[path.through] * path.through_sign > -1e-9:
            raise ValidationError(
                f"declared singular image at parameters {p} lies on the meridian"
            )

    q_axis = path.through
    zero_comps = [j for j in range(spec.k) if j != q_axis]
    crossings: List[Crossing] = []
    if spec.nvars == 1:
        roots = _circle_roots(spec.components[zero_comps[0]], n_scan)
        params = [(r,) for r in roots]
    else:
        f1, f2 = (spec.components[j] for j in zero_comps)
        j1 = [f1.partial(0), f1.partial(1)]
        j2 = [f2.partial(0), f2.partial(1)]
        params = _torus_zeros(f1, f2, j1, j2, n_grid)
    for p in params:
        theta = np.asarray(p, dtype=float)
        through_val = float(spec.components[q_axis](np.atleast_2d(theta))[0])
        if through_val * path.through_sign <= 0:
            continue  # hits the antipodal meridian
        det = _jacobian_det(spec, zero_comps, theta)
        if abs(det) < degeneracy_tol:
            raise DegeneracyError(
                f"crossing at {p} is tangent to the meridian", where=p
            )
        sign = (
            _orientation_correction(q_axis, path.through_sign)
            * (1 if det > 0 else -1)
            * spec.orientation
        )
        crossings.append(Crossing(tuple(float(x) for x in p), sign))
    crossings.sort(key=lambda c: c.params)

    components: Tuple[ArcComponent, ...] = ()
    if spec.nvars == 1:
        components = tuple(
            _arc_components(spec, axis, path, crossings, n_scan, degeneracy_tol)
        )
    return PathIntersections(crossings=tuple(crossings), components=components)


def _arc_components(spec, axis, path, crossings, n_scan, degeneracy_tol):
    """Components of {theta : normalized image on the chosen half circle}."""
    poles = pole_preimages(
        spec,
        path.pole_axis,
        n_scan=n_scan,
        degeneracy_tol=degeneracy_tol,
    )
    if not poles:
        return []
    by_param = sorted(poles, key=lambda r: r.params[0])
    through = spec.components[path.through]
    out = []
    for a, b in zip(by_param, by_param[1:] + by_param[:1]):
        lo = a.params[0]
        hi = b.params[0] if b.params[0] > lo else b.params[0] + 1.0
        mid = (lo + hi) / 2.0
        inside = float(through(np.array([[mid % 1.0]]))[0]) * path.through_sign
        if inside <= 0:
            continue
        net = sum(
            c.sign
            for c in crossings
            if lo < c.params[0] < hi or lo < c.params[0] + 1.0 < hi
        )
        out.append(
            ArcComponent(
                start=lo,
                end=hi % 1.0,
                start_pole=a.pole,
                end_pole=b.pole,
                start_sign=a.sign,
                end_sign=b.sign,
                net_crossing=net,
            )
        )
    return out


@dataclass(frozen=True)
class ZeroLocusMismatch:
    T: float
    parameter: Tuple[float, ...]
    reason: str


@dataclass(frozen=True)
class ZeroLocusReport:
    ok: bool
    mismatches: Tuple[ZeroLocusMismatch, ...]

    def __bool__(self):
        return self.ok


def s0_zero_locus_check(
    spec: EvMapSpec,
    T_grid: Sequence[float],
    pole_choice: str = "last_coordinate",
    tol: float = 1e-8,
    n_scan: int = 4096,
    n_cells: int = 128,
) -> ZeroLocusReport:
    """Zeros of the linearized section versus pole preimages, per T.

    The zero finder works directly on the scaled section values by scan
    and subdivision, independently of the Newton/sign machinery that
    locates pole preimages.
    """
    if pole_choice != "last_coordinate":
        raise ValidationError(
            "the linearized section quotients by the last cokernel element; "
            "use last_coordinate poles"
        )
    poles = pole_preimages(spec, pole_choice)
    pole_params = [np.asarray(p.params) for p in poles]
    mismatches: List[ZeroLocusMismatch] = []
    for T in T_grid:
        if spec.nvars == 1:
            zeros = [
                (z,)
                for z in _scan_zeros_circle(spec, float(T), n_scan)
            ]
        else:
            zeros = _scan_zeros_torus(spec, float(T), n_cells)
        matched = [False] * len(pole_params)
        for z in zeros:
            z_arr = np.asarray(z)
            hit = None
            for i, p in enumerate(pole_params):
                if _torus_distance(z_arr, p) < tol:
                    hit = i
                    break
            if hit is None:
                mismatches.append(
                    ZeroLocusMismatch(float(T), tuple(z), "zero without pole preimage")
                )
            else:
                matched[hit] = True
        for i, seen in enumerate(matched):
            if not seen:
                mismatches.append(
                    ZeroLocusMismatch(
                        float(T), tuple(pole_params[i]), "pole preimage missed by zeros"
                    )
                )
    return ZeroLocusReport(ok=not mismatches, mismatches=tuple(mismatches))


def _scan_zeros_circle(spec: EvMapSpec, T: float, n_scan: int) -> List[float]:
    lam = spec.lambdas[0]
    scale = math.exp(-2.0 * lam * T)

    def section(ts):
        return scale * spec.components[0](ts)

    ts = np.arange(n_scan + 1) / n_scan
    vals = section(ts.reshape(-1, 1))
    zeros = []
    for j in range(n_scan):
        a, b = vals[j], vals[j + 1]
        if a == 0.0:
            zeros.append(float(ts[j]))
        elif a * b < 0.0:
            lo, hi = ts[j], ts[j + 1]
            flo = a
            for _ in range(60):  # plain bisection on the section values
                mid = 0.5 * (lo + hi)
                fmid = float(section(np.array([[mid]]))[0])
                if fmid == 0.0:
                    lo = hi = mid
                    break
                if flo * fmid < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fmid
            zeros.append(0.5 * (lo + hi))
    out = []
    for z in sorted(z % 1.0 for z in zeros):
        if not out or z - out[-1] > 1e-9:
            out.append(z)
    if out and (out[0] + 1.0 - out[-1]) < 1e-9:
        out.pop()
    return out


def _scan_zeros_torus(spec: EvMapSpec, T: float, n_cells: int) -> List[Tuple[float, float]]:
    scales = [math.exp(-2.0 * spec.lambdas[i] * T) for i in range(2)]

    def section(theta):
        return (
            scales[0] * spec.components[0](theta),
            scales[1] * spec.components[1](theta),
        )

    # Candidate cells: both components change sign over the 3x3 sample.
    cells = [
        (i / n_cells, j / n_cells, 1.0 / n_cells)
        for i in range(n_cells)
        for j in range(n_cells)
    ]
    zeros: List[Tuple[float, float]] = []
    for _ in range(55):
        if not cells:
            break
        keep = []
        sample = []
        for (x, y, h) in cells:
            pts = [
                ((x + a * h / 2.0) % 1.0, (y + b * h / 2.0) % 1.0)
                for a in range(3)
                for b in range(3)
            ]
            sample.append(pts)
        flat = np.array([p for pts in sample for p in pts])
        v1, v2 = section(flat)
        v1 = v1.reshape(len(cells), 9)
        v2 = v2.reshape(len(cells), 9)
        for idx, (x, y, h) in enumerate(cells):
            s1, s2 = v1[idx], v2[idx]
            if (s1.min() <= 0.0 <= s1.max()) and (s2.min() <= 0.0 <= s2.max()):
                if h < 1e-11:
                    zeros.append((x + h / 2.0, y + h / 2.0))
                else:
                    keep.extend(
                        (x + a * h / 2.0, y + b * h / 2.0, h / 2.0)
                        for a in (0, 1)
                        for b in (0, 1)
                    )
        cells = keep
        if all(h < 1e-11 for (_, _, h) in cells):
            zeros.extend((x + h / 2.0, y + h / 2.0) for (x, y, h) in cells)
            break
    out: List[Tuple[float, float]] = []
    for z in sorted(zeros):
        z_arr = np.asarray(z) % 1.0
        if not any(_torus_distance(z_arr, np.asarray(w)) < 1e-7 for w in out):
            out.append((float(z_arr[0]), float(z_arr[1])))
    return out


@dataclass(frozen=True)
class LiftedEvMap:
    """A spec pushed along a coordinate inclusion R^k -> R^{new_k}.

    The domain keeps its original dimension, so this is an evaluation
    object only: the image sits inside the big sphere but the lifted map
    is nowhere a local diffeomorphism onto it.
    """

    k: int
    components: Tuple[TrigPolynomial, ...]
    lambdas: Tuple[float, ...]

    def evaluate(self, theta) -> np.ndarray:
        theta = np.atleast_2d(np.asarray(theta, dtype=float))
        return np.column_stack([comp(theta) for comp in self.components])

    def expansion_at(self, theta) -> EndExpansion:
        values = self.evaluate(np.atleast_2d(theta))[0]
        return EndExpansion(tuple(self.lambdas), tuple(float(v) for v in values))

    def normalized(self, theta, radius: float = 1.0) -> np.ndarray:
        return flow_normalize(self.expansion_at(theta), radius)


def lift_spec(
    spec: EvMapSpec,
    positions: Sequence[int],
    new_k: int,
    new_lambdas: Sequence[float],
) -> LiftedEvMap:
    """Embed a spec along coordinate inclusions R^k -> R^{new_k}.

    Models the covered-curve inclusion (x_1, 0, ..., 0, x_2, 0, ...);
    which slots receive the old coordinates is explicit input.
    """
    positions = list(positions)
    if len(positions) != spec.k:
        raise ValidationError("need one target slot per original component")
    if positions != sorted(positions) or len(set(positions)) != len(positions):
        raise ValidationError("target slots must be strictly increasing")
    if positions[0] < 0 or positions[-1] >= new_k:
        raise ValidationError("target slots out of range")
    lambdas = tuple(float(l) for l in new_lambdas)
    if len(lambdas) != new_k:
        raise ValidationError("need one eigenvalue per target coordinate")
    if any(l <= 0 for l in lambdas):
        raise ValidationError("flow eigenvalues must be positive")
    components = [TrigPolynomial.zero(spec.nvars)] * new_k
    for src, dst in enumerate(positions):
        components[dst] = spec.components[src]
    return LiftedEvMap(k=new_k, components=tuple(components), lambdas=lambdas)


def parse_evmap(text: str, source_name: str = "<memory>") -> EvMapSpec:
    """Parse a trig-polynomial map file.

    Format::

        evmap k=<2|3> lambdas=<l1,l2[,l3]> [orientation=<1|-1>]
        term comp=<i> kind=<const|cos|sin> order=<m1[,m2]> value=<float>
    """
    header = None
    terms_by_comp = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        loc = f"{source_name}:{lineno}"
        tokens = line.split()
        fields = dict(tok.split("=", 1) for tok in tokens[1:] if "=" in tok)
        if tokens[0] == "evmap":
            if header is not None:
                raise ValidationError(f"{loc}: duplicate evmap header")
            try:
                header = {
                    "k": int(fields["k"]),
                    "lambdas": tuple(float(x) for x in fields["lambdas"].split(",")),
                    "orientation": int(fields.get("orientation", "1")),
                }
            except (KeyError, ValueError) as exc:
                raise ValidationError(f"{loc}: bad evmap header ({exc})")
        elif tokens[0] == "term":
            try:
                comp = int(fields["comp"])
                kind = fields["kind"]
                orders = tuple(int(x) for x in fields["order"].split(","))
                value = float(fields["value"])
            except (KeyError, ValueError) as exc:
                raise ValidationError(f"{loc}: bad term record ({exc})")
            terms_by_comp.setdefault(comp, []).append((kind, orders, value))
        else:
            raise ValidationError(f"{loc}: unknown record kind {tokens[0]!r}")
    if header is None:
        raise ValidationError(f"{source_name}: missing evmap header")
    k = header["k"]
    nvars = k - 1
    components = []
    for comp in range(k):
        terms = []
        for kind, orders, value in terms_by_comp.get(comp, []):
            if kind == "const":
                orders = (0,) * nvars
            if len(orders) != nvars:
                raise ValidationError(
                    f"component {comp}: order arity {len(orders)} != {nvars}"
                )
            terms.append((kind, orders, value))
        components.append(TrigPolynomial(nvars, tuple(terms)))
    return EvMapSpec(
        k=k,
        components=tuple(components),
        lambdas=header["lambdas"],
        orientation=header["orientation"],
    )
