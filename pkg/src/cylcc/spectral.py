"""Spectra of the model asymptotic operators A = -j0 d/dt - S(t).

Three constant-coefficient models are supported on the circle of period
one: an elliptic model S = eps*I (0 < eps < 2pi), a positive hyperbolic
model S = [[0, eps], [eps, 0]] with periodic boundary conditions, and a
negative hyperbolic model with the same S but the twisted identification
(1, x) ~ (0, -x), i.e. antiperiodic boundary conditions.

Closed forms follow the convention that positive indices carry positive
eigenvalues,

    ... <= lambda_-2 <= lambda_-1 < 0 < lambda_1 <= lambda_2 <= ...,

and all eigenfunctions are normalized to unit L^2 norm over one period.
Within each two-dimensional eigenspace the specific cos/sin pair below
is fixed once and for all so that downstream pairings are reproducible.

A finite-difference discretization provides an independent numeric
oracle for the same spectra.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigh

from .errors import DomainError, IllConditionedInputError, NumericError, ValidationError

TWO_PI = 2.0 * math.pi

ELLIPTIC = "elliptic"
POS_HYPERBOLIC = "pos_hyperbolic"
NEG_HYPERBOLIC = "neg_hyperbolic"
KINDS = (ELLIPTIC, POS_HYPERBOLIC, NEG_HYPERBOLIC)

J0 = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class OperatorKind:
    """One of the three model operators together with its parameter eps."""

    kind: str
    eps: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown operator kind {self.kind!r}")
        if self.kind == ELLIPTIC:
            if not 0.0 < self.eps < TWO_PI:
                raise DomainError(
                    f"elliptic model requires 0 < eps < 2*pi, got eps={self.eps}"
                )
        else:
            if self.eps <= 0.0:
                raise DomainError(
                    f"hyperbolic models require eps > 0, got eps={self.eps}"
                )
            if self.eps > 1.0:
                warnings.warn(
                    f"eps={self.eps} is large for a hyperbolic model; "
                    "closed forms remain valid but the small-eps regime is intended",
                    stacklevel=2,
                )

    @classmethod
    def elliptic(cls, eps: float) -> "OperatorKind":
        return cls(ELLIPTIC, eps)

    @classmethod
    def pos_hyperbolic(cls, eps: float) -> "OperatorKind":
        return cls(POS_HYPERBOLIC, eps)

    @classmethod
    def neg_hyperbolic(cls, eps: float) -> "OperatorKind":
        return cls(NEG_HYPERBOLIC, eps)

    @property
    def antiperiodic(self) -> bool:
        return self.kind == NEG_HYPERBOLIC

    @property
    def loop_period(self) -> float:
        """Period over which eigenfunctions close up as loops."""
        return 2.0 if self.antiperiodic else 1.0

    def s_matrix(self) -> np.ndarray:
        if self.kind == ELLIPTIC:
            return np.array([[self.eps, 0.0], [0.0, self.eps]])
        return np.array([[0.0, self.eps], [self.eps, 0.0]])


@dataclass(frozen=True)
class TrigLoop:
    """Single-frequency closed-form loop f(t) = A cos(omega t) + B sin(omega t).

    ``cos_coeff`` and ``sin_coeff`` are 2-vectors (A and B above).
    """

    omega: float
    cos_coeff: tuple
    sin_coeff: tuple
    period: float = 1.0

    def sample(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        c = np.cos(self.omega * ts)
        s = np.sin(self.omega * ts)
        a = np.asarray(self.cos_coeff)
        b = np.asarray(self.sin_coeff)
        return np.outer(c, a) + np.outer(s, b)

    def __call__(self, t: float) -> np.ndarray:
        return self.sample(np.array([t]))[0]


@dataclass(frozen=True)
class SampledLoop:
    """Eigenfunction known only through samples on a uniform t-grid."""

    ts: np.ndarray
    values: np.ndarray  # shape (n, 2)
    period: float = 1.0

    def sample(self, ts: np.ndarray) -> np.ndarray:
        ts = np.mod(np.asarray(ts, dtype=float), self.period)
        out = np.empty((len(ts), 2))
        grid = np.concatenate([self.ts, [self.period]])
        closed = np.vstack([self.values, self.values[:1]])
        for j in range(2):
            out[:, j] = np.interp(ts, grid, closed[:, j])
        return out

    def __call__(self, t: float) -> np.ndarray:
        return self.sample(np.array([t]))[0]


@dataclass(frozen=True)
class SpectrumEntry:
    index: int
    eigenvalue: float
    eigenfunction: object
    winding: Optional[int]

    def __post_init__(self):
        if self.index == 0:
            raise ValidationError("spectrum indices are nonzero integers")


@dataclass(frozen=True)
class SpectrumTable:
    """Ordered eigenvalue/eigenfunction data for one model operator."""

    kind: OperatorKind
    entries: tuple

    def __post_init__(self):
        idx = [e.index for e in self.entries]
        if len(set(idx)) != len(idx):
            raise ValidationError("duplicate spectrum indices")
        for e in self.entries:
            if e.eigenvalue * e.index < 0:
                raise ValidationError(
                    f"sign(lambda_{e.index}) != sign({e.index}) violates the ordering"
                )

    def entry(self, index: int) -> SpectrumEntry:
        for e in self.entries:
            if e.index == index:
                return e
        raise KeyError(f"no spectrum entry with index {index}")

    def eigenvalue(self, index: int) -> float:
        return self.entry(index).eigenvalue

    @property
    def indices(self) -> list:
        return [e.index for e in self.entries]


def _closed_form_entry(kind: OperatorKind, i: int) -> SpectrumEntry:
    eps = kind.eps
    sgn = 1 if i > 0 else -1
    a = abs(i)

    if kind.kind == ELLIPTIC:
        # f_{2n-1} = e^{2pi i n t}, f_{2n} = i e^{2pi i n t} for n >= 1;
        # f_{2n-2} = e^{2pi i n t}, f_{2n-1} = i e^{2pi i n t} for n <= 0.
        if i > 0:
            n = (i + 1) // 2
            member = "e" if i % 2 == 1 else "ie"
        else:
            n = (i + 2) // 2 if i % 2 == 0 else (i + 1) // 2
            member = "e" if i % 2 == 0 else "ie"
        lam = TWO_PI * n - eps
        if i > 0 and lam <= 0 or i < 0 and lam >= 0:
            raise DomainError(
                f"elliptic index {i} needs 0 < eps < 2*pi for the sign convention"
            )
        omega = TWO_PI * n
        if member == "e":  # (cos, sin)
            loop = TrigLoop(omega, (1.0, 0.0), (0.0, 1.0))
        else:  # i*e^{i omega t} = (-sin, cos)
            loop = TrigLoop(omega, (0.0, 1.0), (-1.0, 0.0))
        return SpectrumEntry(i, lam, loop, winding=n)

    if kind.kind == POS_HYPERBOLIC and a == 1:
        # Constant eigenfunctions: f_1 = (1,-1)/sqrt2, f_{-1} = (1,1)/sqrt2.
        lam = sgn * eps
        v = 1.0 / math.sqrt(2.0)
        loop = TrigLoop(0.0, (v, -sgn * v), (0.0, 0.0))
        return SpectrumEntry(i, lam, loop, winding=0)

    if kind.kind == POS_HYPERBOLIC:
        n = a // 2 if a % 2 == 0 else (a - 1) // 2
        member = "c" if a % 2 == 0 else "s"
        omega = TWO_PI * n
        wind = sgn * n
    else:  # negative hyperbolic, antiperiodic
        n = (a + 1) // 2
        member = "c" if a % 2 == 1 else "s"
        omega = (2 * n - 1) * math.pi
        wind = sgn * (2 * n - 1)

    rad = math.hypot(omega, eps)
    lam = sgn * rad
    # Solving f' = [[-eps, -lam], [lam, eps]] f forces the second component
    # to carry the coefficient -lam against the printed cos/sin pair.
    if member == "c":
        loop = TrigLoop(
            omega,
            (eps / rad, -lam / rad),
            (omega / rad, 0.0),
            period=kind.loop_period,
        )
    else:
        loop = TrigLoop(
            omega,
            (-omega / rad, 0.0),
            (eps / rad, -lam / rad),
            period=kind.loop_period,
        )
    return SpectrumEntry(i, lam, loop, winding=wind)


def closed_form_spectrum(kind: OperatorKind, max_index: int) -> SpectrumTable:
    """Closed-form spectrum for indices -max_index..-1, 1..max_index."""
    if max_index < 1:
        raise DomainError("max_index must be >= 1")
    entries = [
        _closed_form_entry(kind, i)
        for i in list(range(-max_index, 0)) + list(range(1, max_index + 1))
    ]
    return SpectrumTable(kind, tuple(entries))


def _centered_difference(n: int, h: float, antiperiodic: bool) -> sp.csr_matrix:
    """Centered first-difference matrix with (anti)periodic wraparound."""
    main = np.zeros(n)
    upper = np.full(n - 1, 1.0 / (2.0 * h))
    lower = np.full(n - 1, -1.0 / (2.0 * h))
    d = sp.diags([lower, main, upper], [-1, 0, 1], format="lil")
    wrap = -1.0 if antiperiodic else 1.0
    d[n - 1, 0] = wrap / (2.0 * h)
    d[0, n - 1] = -wrap / (2.0 * h)
    return d.tocsr()


def finite_difference_operator(
    kind_name: str, eps: float, grid_size: int
) -> sp.csr_matrix:
    """Discretized A = -j0 d/dt - S on a uniform grid of ``grid_size`` points.

    eps = 0 is admitted here (kernel sanity checks); the public entry
    point validates through :class:`OperatorKind`.

    The antiperiodic case is realized by doubling the period, discretizing
    the periodic problem on [0, 2], and restricting to the odd sector
    (f(t+1) = -f(t)); the restriction is carried out exactly below.
    """
    if kind_name not in KINDS:
        raise DomainError(f"unknown operator kind {kind_name!r}")
    n = grid_size
    h = 1.0 / n
    if kind_name == ELLIPTIC:
        s_mat = np.array([[eps, 0.0], [0.0, eps]])
    else:
        s_mat = np.array([[0.0, eps], [eps, 0.0]])

    if kind_name != NEG_HYPERBOLIC:
        d = _centered_difference(n, h, antiperiodic=False)
        return (-sp.kron(d, J0) - sp.kron(sp.identity(n), s_mat)).tocsr()

    # Doubled periodic problem on [0, 2] with 2n points, then the odd
    # sector spanned by (e_j - e_{j+n})/sqrt(2), j < n.
    d2 = _centered_difference(2 * n, h, antiperiodic=False)
    a2 = (-sp.kron(d2, J0) - sp.kron(sp.identity(2 * n), s_mat)).tocsr()
    rows = np.concatenate([np.arange(2 * n), np.arange(2 * n) + 2 * n])
    cols = np.concatenate([np.arange(2 * n), np.arange(2 * n)])
    vals = np.concatenate(
        [np.full(2 * n, 1.0 / math.sqrt(2.0)), np.full(2 * n, -1.0 / math.sqrt(2.0))]
    )
    u = sp.csr_matrix((vals, (rows, cols)), shape=(4 * n, 2 * n))
    return (u.T @ a2 @ u).tocsr()


def _roughness(vec: np.ndarray) -> float:
    """Fraction of nearest-neighbour oscillation energy in a grid vector.

    Centered differences are blind to the Nyquist-reflected mode, so each
    physical eigenvalue acquires a spurious sawtooth partner with the same
    magnitude.  Smooth (physical) modes score ~(omega*h)^2/4; sawtooth
    modes score ~1.
    """
    v = vec.reshape(-1, 2)
    diff = np.roll(v, -1, axis=0) - v
    return float(np.sum(diff * diff) / (4.0 * np.sum(v * v)))


def _split_alias_degeneracies(vals: np.ndarray, vecs: np.ndarray):
    """Rotate each degenerate eigenvalue cluster into pure smooth/rough modes.

    A physical mode and its Nyquist alias share the eigenvalue exactly, so
    the solver may hand back mixtures.  Diagonalizing the oscillation
    quadratic form within each cluster undoes the mixing.
    """
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order].copy()
    scale = 1.0 + np.max(np.abs(vals))
    start = 0
    while start < len(vals):
        stop = start + 1
        while stop < len(vals) and vals[stop] - vals[start] < 1e-8 * scale:
            stop += 1
        if stop - start > 1:
            block = vecs[:, start:stop]
            pairs = block.reshape(-1, 2, stop - start)
            diff = np.roll(pairs, -1, axis=0) - pairs
            form = np.einsum("nia,nib->ab", diff, diff) / 4.0
            _, rot = eigh(form)
            vecs[:, start:stop] = block @ rot
        start = stop
    return vals, vecs


def numeric_spectrum(kind: OperatorKind, grid_size: int, count: int) -> SpectrumTable:
    """Finite-difference oracle: the ``count`` eigenvalues closest to zero."""
    if grid_size < 64:
        raise DomainError("grid_size must be >= 64")
    if count < 1 or count > grid_size // 4:
        raise DomainError("count must satisfy 1 <= count <= grid_size/4")

    a = finite_difference_operator(kind.kind, kind.eps, grid_size)
    n2 = a.shape[0]
    # Request extra pairs: the sawtooth partners are interleaved with the
    # physical eigenvalues and are dropped below.
    k_request = min(2 * count + 8, n2 - 2)
    try:
        if n2 <= 1024:
            vals, vecs = eigh(a.toarray())
            order = np.argsort(np.abs(vals))[:k_request]
            vals, vecs = vals[order], vecs[:, order]
        else:
            vals, vecs = spla.eigsh(a, k=k_request, sigma=0.0, which="LM")
    except (spla.ArpackNoConvergence, RuntimeError) as exc:
        raise NumericError(f"eigensolve failed to converge: {exc}") from exc

    residuals = np.array(
        [
            np.linalg.norm(a @ vecs[:, j] - vals[j] * vecs[:, j])
            for j in range(len(vals))
        ]
    )
    if np.any(residuals > 1e-7 * (1.0 + np.abs(vals))):
        raise NumericError(
            "eigensolve residuals exceed tolerance", residuals=residuals.tolist()
        )

    vals, vecs = _split_alias_degeneracies(vals, vecs)
    physical = [j for j in range(len(vals)) if _roughness(vecs[:, j]) < 0.25]
    if len(physical) < count:
        raise NumericError(
            f"only {len(physical)} physical modes among {len(vals)} computed; "
            "increase grid_size or lower count",
            residuals=residuals.tolist(),
        )
    # Balanced selection: count//2 per sign where available (hyperbolic
    # spectra are symmetric), falling back to closest-to-zero overall.
    neg_phys = sorted(
        (j for j in physical if vals[j] < 0), key=lambda j: -vals[j]
    )
    pos_phys = sorted(
        (j for j in physical if vals[j] >= 0), key=lambda j: vals[j]
    )
    take_neg = min(len(neg_phys), count // 2)
    take_pos = min(len(pos_phys), count - take_neg)
    take_neg = min(len(neg_phys), count - take_pos)
    keep = sorted(neg_phys[:take_neg] + pos_phys[:take_pos], key=lambda j: vals[j])
    vals, vecs = vals[keep], vecs[:, keep]
    neg = [j for j in range(count) if vals[j] < 0]
    pos = [j for j in range(count) if vals[j] >= 0]

    n = grid_size
    ts = np.arange(n) / n
    entries = []
    for rank, j in enumerate(reversed(neg)):
        entries.append(_numeric_entry(-(rank + 1), vals[j], vecs[:, j], ts, kind))
    for rank, j in enumerate(pos):
        entries.append(_numeric_entry(rank + 1, vals[j], vecs[:, j], ts, kind))
    entries.sort(key=lambda e: e.index)
    return SpectrumTable(kind, tuple(entries))


def _numeric_entry(
    index: int, lam: float, vec: np.ndarray, ts: np.ndarray, kind: OperatorKind
) -> SpectrumEntry:
    n = len(ts)
    values = vec.reshape(n, 2) * math.sqrt(n)  # unit discrete L^2 over one period
    if kind.antiperiodic:
        loop_ts = np.concatenate([ts, ts + 1.0])
        loop_vals = np.vstack([values, -values])
        loop = SampledLoop(loop_ts, loop_vals, period=2.0)
    else:
        loop = SampledLoop(ts, values, period=1.0)
    try:
        wind = winding_number(loop_vals if kind.antiperiodic else values)
    except IllConditionedInputError:
        wind = None
    return SpectrumEntry(index, float(lam), loop, wind)


def winding_number(loop: Sequence) -> int:
    """Total signed winding of a sampled closed planar curve about the origin.

    The samples must avoid the origin and consecutive angular steps must
    stay below pi; otherwise the input is rejected as ill-conditioned.
    """
    pts = np.asarray(loop, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 1:
        raise ValidationError("loop must be an (n, 2) array of samples")
    radii = np.hypot(pts[:, 0], pts[:, 1])
    if np.any(radii == 0.0):
        j = int(np.argmin(radii))
        raise IllConditionedInputError(f"sample {j} lies at the origin")
    angles = np.arctan2(pts[:, 1], pts[:, 0])
    closed = np.concatenate([angles, angles[:1]])
    steps = np.diff(closed)
    steps = (steps + math.pi) % (2.0 * math.pi) - math.pi
    if np.any(np.abs(steps) >= math.pi * (1.0 - 1e-12)):
        j = int(np.argmax(np.abs(steps)))
        raise IllConditionedInputError(
            f"angular jump of {steps[j]:.6f} rad at step {j} is >= pi"
        )
    total = steps.sum() / (2.0 * math.pi)
    wind = int(round(total))
    if abs(total - wind) > 1e-6:
        raise IllConditionedInputError(f"winding {total} is not integral")
    return wind


def gram_matrix(table: SpectrumTable, quad_points: int) -> np.ndarray:
    """Pairwise discrete L^2 inner products over one period [0, 1]."""
    if not table.entries:
        raise ValidationError("spectrum table is empty")
    if quad_points < 2:
        raise DomainError("quad_points must be >= 2")
    ts = (np.arange(quad_points) + 0.5) / quad_points
    samples = [e.eigenfunction.sample(ts) for e in table.entries]
    m = len(samples)
    gram = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            val = float(np.sum(samples[i] * samples[j])) / quad_points
            gram[i, j] = gram[j, i] = val
    return gram
