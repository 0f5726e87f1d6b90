"""Numerical sandbox for the linear gluing problem on the neck.

The neck is the cylinder region [0, 2T] x (R/Z) between a bottom level
(ends written in negative eigenmodes) and a top level translated up by
2T (positive eigenmodes).  In the supersimple regime the operator acts
diagonally per mode: writing a field as sum_i b_i(s) e^{lambda_i s}
f_i(t), D sends b_i to b_i'.

Cutoffs follow beta_plus(s) = beta((s - T0)/hr) ramping up at T0 and
beta_minus(s) = beta((T - s)/hr) ramping down at T; each ramp *rate*
(|d beta / ds|) integrates to one, which is the normalization the
closed-form pairing values assume.  The profile is the C^2 smoothstep
6x^5 - 15x^4 + 10x^3, fixed for reproducible quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, ValidationError
from .spectral import OperatorKind, SpectrumTable, closed_form_spectrum


@dataclass(frozen=True)
class NeckParams:
    """Gluing-neck geometry; the defaults satisfy the constraints minimally."""

    T0: float = 21.0
    T: float = 60.0
    h: float = 0.5
    r: float = 4.0
    s_grid: int = 2048
    t_modes: int = 3

    def __post_init__(self):
        if not 0.0 < self.h < 1.0:
            raise DomainError("h must lie in (0, 1)")
        if self.r <= 1.0 / self.h:
            raise DomainError(f"need r > 1/h = {1.0 / self.h}")
        if self.T0 <= 5.0 * self.r:
            raise DomainError(f"need T0 > 5r = {5.0 * self.r}")
        if self.T <= 2.0 * self.T0:
            raise DomainError(f"need T > 2*T0 = {2.0 * self.T0}")
        if self.s_grid < 64:
            raise DomainError("s_grid must be >= 64")
        if self.t_modes < 1:
            raise DomainError("t_modes must be >= 1")

    @property
    def ramp_width(self) -> float:
        return self.h * self.r

    @property
    def s_max(self) -> float:
        return 2.0 * self.T

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.s_max, self.s_grid)


def _smoothstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x))


def _smoothstep_rate(x: np.ndarray) -> np.ndarray:
    inside = (x > 0.0) & (x < 1.0)
    x = np.where(inside, x, 0.0)
    return np.where(inside, 30.0 * x * x * (1.0 - x) ** 2, 0.0)


@dataclass(frozen=True)
class Cutoffs:
    """The two cutoff profiles and their ramp rates on the neck."""

    params: NeckParams

    def beta_plus(self, s) -> np.ndarray:
        w = self.params.ramp_width
        return _smoothstep((np.asarray(s, float) - self.params.T0) / w)

    def beta_minus(self, s) -> np.ndarray:
        w = self.params.ramp_width
        return _smoothstep((self.params.T - np.asarray(s, float)) / w)

    def rho_plus(self, s) -> np.ndarray:
        """d(beta_plus)/ds >= 0; integrates to one over the ramp."""
        w = self.params.ramp_width
        return _smoothstep_rate((np.asarray(s, float) - self.params.T0) / w) / w

    def rho_minus(self, s) -> np.ndarray:
        """|d(beta_minus)/ds| >= 0; integrates to one over the ramp."""
        w = self.params.ramp_width
        return _smoothstep_rate((self.params.T - np.asarray(s, float)) / w) / w

    def ramp_minus(self, s) -> np.ndarray:
        """The cumulative rate 1 - beta_minus: 0 below the ramp, 1 above."""
        return 1.0 - self.beta_minus(s)

    @property
    def plus_support(self) -> Tuple[float, float]:
        return (self.params.T0, self.params.T0 + self.params.ramp_width)

    @property
    def minus_support(self) -> Tuple[float, float]:
        return (self.params.T - self.params.ramp_width, self.params.T)


def make_cutoffs(params: NeckParams) -> Cutoffs:
    return Cutoffs(params)


@dataclass(frozen=True)
class ModeFunction:
    """Coefficient function b(s) with its exact derivative."""

    value: Callable
    deriv: Callable


def const_mode(c: float) -> ModeFunction:
    return ModeFunction(
        value=lambda s, c=c: np.full_like(np.asarray(s, float), c),
        deriv=lambda s: np.zeros_like(np.asarray(s, float)),
    )


@dataclass(frozen=True)
class NeckField:
    """Per-mode coefficient functions bound to a spectrum table.

    The physical field is sum_i modes[i](s) e^{lambda_i s} f_i(t); the
    eigenfunctions are orthonormal, so pairings and norms reduce to
    one-dimensional s-integrals per mode.
    """

    spectrum: SpectrumTable
    params: NeckParams
    modes: Dict[int, ModeFunction]

    def __post_init__(self):
        grid = self.params.grid()
        for i in self.modes:
            self.spectrum.eigenvalue(i)  # raises for unknown mode
            vals = self.mode_value(i, grid)
            if not np.all(np.isfinite(vals)):
                raise ValidationError(
                    f"mode {i} is not finite-energy on the stored range"
                )

    @classmethod
    def zero(cls, spectrum: SpectrumTable, params: NeckParams) -> "NeckField":
        return cls(spectrum, params, {})

    @classmethod
    def end_from_above(
        cls, spectrum: SpectrumTable, params: NeckParams, coeffs: Dict[int, float]
    ) -> "NeckField":
        """eta_plus = sum c_i e^{lambda_i (s - 2T)} f_i, positive modes."""
        if any(i <= 0 for i in coeffs):
            raise ValidationError("a top end carries positive modes only")
        modes = {
            i: const_mode(c * math.exp(-2.0 * spectrum.eigenvalue(i) * params.T))
            for i, c in coeffs.items()
        }
        return cls(spectrum, params, modes)

    @classmethod
    def end_from_below(
        cls, spectrum: SpectrumTable, params: NeckParams, coeffs: Dict[int, float]
    ) -> "NeckField":
        """eta_minus = sum d_i e^{lambda_i s} f_i, negative modes."""
        if any(i >= 0 for i in coeffs):
            raise ValidationError("a bottom end carries negative modes only")
        return cls(spectrum, params, {i: const_mode(d) for i, d in coeffs.items()})

    def b(self, i: int, s) -> np.ndarray:
        fn = self.modes.get(i)
        if fn is None:
            return np.zeros_like(np.asarray(s, float))
        return fn.value(s)

    def b_deriv(self, i: int, s) -> np.ndarray:
        fn = self.modes.get(i)
        if fn is None:
            return np.zeros_like(np.asarray(s, float))
        return fn.deriv(s)

    def mode_value(self, i: int, s) -> np.ndarray:
        """b_i(s) e^{lambda_i s}; a zero coefficient wins over an
        overflowing exponential (the product underflowed upstream)."""
        b = self.b(i, s)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = b * np.exp(self.spectrum.eigenvalue(i) * np.asarray(s, float))
        return np.where(b == 0.0, 0.0, vals)

    @property
    def mode_indices(self) -> List[int]:
        return sorted(self.modes)

    def star_norm(self) -> float:
        """Discrete L^2 norm of the field plus that of its s-derivative."""
        grid = self.params.grid()
        total = 0.0
        dtotal = 0.0
        for i in self.mode_indices:
            lam = self.spectrum.eigenvalue(i)
            b = self.b(i, grid)
            db = self.b_deriv(i, grid) + lam * b
            with np.errstate(over="ignore", invalid="ignore"):
                weight = np.exp(lam * grid)
                vals = np.where(b == 0.0, 0.0, b * weight)
                dvals = np.where(db == 0.0, 0.0, db * weight)
            total += float(np.trapezoid(vals * vals, grid))
            dtotal += float(np.trapezoid(dvals * dvals, grid))
        return math.sqrt(total) + math.sqrt(dtotal)


def _check_same_spectrum(a: NeckField, b: NeckField):
    if a.spectrum.kind != b.spectrum.kind:
        raise ValidationError("fields are bound to different spectrum tables")
    if a.params != b.params:
        raise ValidationError("fields live on different neck grids")


def preglue(eta_plus: NeckField, eta_minus: NeckField, params: NeckParams) -> NeckField:
    """v_* = beta_plus eta_plus + beta_minus eta_minus on the neck.

    Above the top ramp only eta_plus survives; below the bottom ramp only
    eta_minus does.
    """
    _check_same_spectrum(eta_plus, eta_minus)
    if any(i <= 0 for i in eta_plus.mode_indices):
        raise ValidationError("eta_plus must be supported in positive modes")
    if any(i >= 0 for i in eta_minus.mode_indices):
        raise ValidationError("eta_minus must be supported in negative modes")
    cut = make_cutoffs(params)
    modes: Dict[int, ModeFunction] = {}
    for i in eta_plus.mode_indices:
        fn = eta_plus.modes[i]
        modes[i] = ModeFunction(
            value=lambda s, fn=fn: cut.beta_plus(s) * fn.value(s),
            deriv=lambda s, fn=fn: cut.rho_plus(s) * fn.value(s)
            + cut.beta_plus(s) * fn.deriv(s),
        )
    for i in eta_minus.mode_indices:
        fn = eta_minus.modes[i]
        modes[i] = ModeFunction(
            value=lambda s, fn=fn: cut.beta_minus(s) * fn.value(s),
            deriv=lambda s, fn=fn: -cut.rho_minus(s) * fn.value(s)
            + cut.beta_minus(s) * fn.deriv(s),
        )
    return NeckField(eta_plus.spectrum, params, modes)


def solve_neck(
    eta_plus: NeckField, eta_minus: NeckField, params: NeckParams
) -> Tuple[NeckField, NeckField]:
    """Solve Theta_+ = 0 and the projected Theta_- equation per mode.

    With constant end data the solutions are the exact cumulative-rate
    integrals of the forcing:

    * psi_plus carries the negative modes b_i(s) = -d_i * ramp(s), where
      ramp climbs 0 -> 1 across the bottom cutoff ramp; so b_i is 0 deep
      in the neck and -d_i at the top (s = 2T).
    * psi_plus positive modes vanish: constants there lie in ker D_+ and
      are removed by the orthogonality gauge.
    * psi_minus carries positive modes b_i(s) = c_i e^{-2 lambda_i T}
      (1 - beta_plus(s)), decaying above the T0 ramp.
    """
    _check_same_spectrum(eta_plus, eta_minus)
    if set(eta_plus.mode_indices) & set(eta_minus.mode_indices):
        raise ValidationError("mode-index collision between the end supports")
    if any(i <= 0 for i in eta_plus.mode_indices):
        raise ValidationError("eta_plus must be supported in positive modes")
    if any(i >= 0 for i in eta_minus.mode_indices):
        raise ValidationError("eta_minus must be supported in negative modes")
    cut = make_cutoffs(params)
    grid = params.grid()

    psi_plus_modes: Dict[int, ModeFunction] = {}
    for i in eta_minus.mode_indices:
        d_i = float(eta_minus.b(i, np.array([0.0]))[0])
        const = np.max(np.abs(eta_minus.b(i, grid) - d_i))
        if const > 1e-12 * (1.0 + abs(d_i)):
            raise ValidationError(
                f"bottom-end mode {i} is not constant; the closed-form solve "
                "applies to end data only"
            )
        psi_plus_modes[i] = ModeFunction(
            value=lambda s, d=d_i: -d * cut.ramp_minus(s),
            deriv=lambda s, d=d_i: -d * cut.rho_minus(s),
        )

    psi_minus_modes: Dict[int, ModeFunction] = {}
    for i in eta_plus.mode_indices:
        b_i = float(eta_plus.b(i, np.array([0.0]))[0])
        psi_minus_modes[i] = ModeFunction(
            value=lambda s, b=b_i: b * (1.0 - cut.beta_plus(s)),
            deriv=lambda s, b=b_i: -b * cut.rho_plus(s),
        )

    psi_plus = NeckField(eta_plus.spectrum, params, psi_plus_modes)
    psi_minus = NeckField(eta_plus.spectrum, params, psi_minus_modes)
    return psi_plus, psi_minus


def theta_residuals(
    eta_plus: NeckField,
    eta_minus: NeckField,
    psi_plus: NeckField,
    psi_minus: NeckField,
    params: NeckParams,
) -> Tuple[float, float]:
    """Discrete L^2 residuals of the two Theta equations on the grid."""
    cut = make_cutoffs(params)
    grid = params.grid()
    spectrum = eta_plus.spectrum
    all_modes = (
        set(eta_plus.mode_indices)
        | set(eta_minus.mode_indices)
        | set(psi_plus.mode_indices)
        | set(psi_minus.mode_indices)
    )
    res_plus_sq = 0.0
    res_minus_sq = 0.0
    rho_m = cut.rho_minus(grid)
    rho_p = cut.rho_plus(grid)
    for i in sorted(all_modes):
        lam = spectrum.eigenvalue(i)
        with np.errstate(over="ignore"):
            weight = np.exp(lam * grid)
        # Theta_+ = D_+ psi_+ + rho_minus (eta_- + psi_-)
        db = psi_plus.b_deriv(i, grid)
        with np.errstate(over="ignore", invalid="ignore"):
            dpsi = np.where(db == 0.0, 0.0, db * weight)
        forcing = rho_m * (eta_minus.mode_value(i, grid) + psi_minus.mode_value(i, grid))
        res_plus_sq += float(np.trapezoid((dpsi + forcing) ** 2, grid))
        # Theta_- = D_- psi_- + rho_plus (eta_+ + psi_+)
        db = psi_minus.b_deriv(i, grid)
        with np.errstate(over="ignore", invalid="ignore"):
            dpsi = np.where(db == 0.0, 0.0, db * weight)
        forcing = rho_p * (eta_plus.mode_value(i, grid) + psi_plus.mode_value(i, grid))
        res_minus_sq += float(np.trapezoid((dpsi + forcing) ** 2, grid))
    return math.sqrt(res_plus_sq), math.sqrt(res_minus_sq)


@dataclass(frozen=True)
class SigmaEntry:
    """One model cokernel element: sum_j coeffs[j] e^{-lambda_j s} f_j."""

    index: int
    coeffs: Dict[int, float]
    spectrum: SpectrumTable


@dataclass(frozen=True)
class CokernelBasisModel:
    """Model cokernel basis with prescribed leading asymptotics.

    ``c[i][j]`` (0-based, upper triangular with unit diagonal) are the
    positive-end tail coefficients of sigma_i against f_{j+1}; row k-1 is
    the element identified with the cobordism-direction generator Y.
    ``d[i][col]`` are negative-end coefficients against g_{col-k} (col 0
    is j = -k); row i may populate columns 0..i-1 only, row k-1 only the
    column for j = -1.
    """

    k: int
    spectrum_plus: SpectrumTable
    c: Tuple[Tuple[float, ...], ...] = None
    spectrum_minus: Optional[SpectrumTable] = None
    d: Optional[Tuple[Tuple[float, ...], ...]] = None

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("cokernel rank k must be >= 1")
        if self.c is None:
            object.__setattr__(
                self,
                "c",
                tuple(
                    tuple(1.0 if i == j else 0.0 for j in range(self.k))
                    for i in range(self.k)
                ),
            )
        if len(self.c) != self.k or any(len(row) != self.k for row in self.c):
            raise ValidationError("c must be a k x k matrix")
        for i in range(self.k):
            if self.c[i][i] != 1.0:
                raise ValidationError("c must have unit diagonal")
            for j in range(i):
                if self.c[i][j] != 0.0:
                    raise ValidationError("c must be upper triangular")
        max_index = max(self.spectrum_plus.indices)
        if max_index < self.k:
            raise ValidationError("spectrum table too small for the cokernel rank")
        if self.d is not None:
            if self.spectrum_minus is None:
                raise ValidationError("negative-end data needs its spectrum table")
            if len(self.d) != self.k or any(len(row) != self.k for row in self.d):
                raise ValidationError("d must be a k x k matrix")
            for i in range(self.k):
                for col in range(self.k):
                    # 0-based row i is sigma'_{i+1}: columns 0..i allowed
                    # (j = -k .. -k+i); the last row touches j = -1 only.
                    allowed = (col <= i) if i < self.k - 1 else (col == self.k - 1)
                    if self.d[i][col] != 0.0 and not allowed:
                        raise ValidationError(
                            f"d[{i}][{col}] violates the triangular support pattern"
                        )

    @classmethod
    def exact(cls, k: int, spectrum: SpectrumTable) -> "CokernelBasisModel":
        """The tail-free model sigma_i = e^{-lambda_i s} f_i."""
        return cls(k=k, spectrum_plus=spectrum)

    def sigma(self, i: int) -> SigmaEntry:
        """Positive-end data of sigma_i, 1-based."""
        if not 1 <= i <= self.k:
            raise ValidationError(f"sigma index {i} out of range 1..{self.k}")
        coeffs = {
            j + 1: self.c[i - 1][j] for j in range(self.k) if self.c[i - 1][j] != 0.0
        }
        return SigmaEntry(index=i, coeffs=coeffs, spectrum=self.spectrum_plus)


def obstruction_pairing(
    sigma: SigmaEntry,
    fld: NeckField,
    params: NeckParams,
    n_quad: Optional[int] = None,
) -> float:
    """Discrete L^2 pairing <sigma, rho_plus * field> over the neck.

    For a single constant mode this reduces to c_i e^{-2 lambda_i T}
    times the ramp-rate integral (which is one), so the value is pure
    quadrature error away from the closed form.
    """
    if sigma.spectrum.kind != fld.spectrum.kind:
        raise ValidationError("sigma and field are bound to different spectra")
    cut = make_cutoffs(params)
    lo, hi = cut.plus_support
    n = n_quad or params.s_grid
    if n % 2 == 1:
        n += 1
    s = np.linspace(lo, hi, n + 1)
    rho = cut.rho_plus(s)
    total = 0.0
    for j, coeff in sigma.coeffs.items():
        vals = rho * fld.b(j, s)  # e^{-lam s} * b e^{lam s} = b
        total += coeff * float(_simpson(vals, s))
    return total


def _simpson(vals: np.ndarray, s: np.ndarray) -> float:
    n = len(s) - 1
    h = (s[-1] - s[0]) / n
    return h / 3.0 * (vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-1:2].sum())


def momo_check(
    eta_plus: NeckField,
    eta_minus: NeckField,
    params: NeckParams,
) -> Dict[str, float]:
    """Constancy of positive modes and ramp endpoints of negative modes.

    Returns the maximal deviations: positive-mode drift of psi_+ across
    the neck and |b_i(2T) + d_i| over the bottom-end modes.
    """
    psi_plus, _ = solve_neck(eta_plus, eta_minus, params)
    grid = params.grid()
    drift = 0.0
    for i in psi_plus.mode_indices:
        if i > 0:
            vals = psi_plus.b(i, grid)
            drift = max(drift, float(np.max(np.abs(vals - vals[-1]))))
    endpoint = 0.0
    top = np.array([params.s_max])
    for i in eta_minus.mode_indices:
        d_i = float(eta_minus.b(i, np.array([0.0]))[0])
        b_top = float(psi_plus.b(i, top)[0])
        endpoint = max(endpoint, abs(b_top + d_i))
    return {"positive_mode_drift": drift, "endpoint_deviation": endpoint}


def two_sided_pairing(
    T_minus: float,
    T_plus: float,
    cokernel: CokernelBasisModel,
    c_coeffs: Sequence[float],
    d_coeffs: Sequence[float],
) -> np.ndarray:
    """Case-B obstruction values against sigma'_1 .. sigma'_{k-1}.

    Entry i is

        sum_{i<=j<=k} c_{i,j} c_j e^{-2 lambda_j T_+}
        - sum_{-k<=j<=-k+i-1} d_{i,j} d_j e^{2 lambda'_j T_-}.
    """
    if T_minus <= 0 or T_plus <= 0:
        raise DomainError("gluing parameters must be positive")
    k = cokernel.k
    if len(c_coeffs) != k:
        raise ValidationError(f"need {k} top-end coefficients")
    if len(d_coeffs) != k:
        raise ValidationError(f"need {k} bottom-end coefficients")
    lam_plus = [cokernel.spectrum_plus.eigenvalue(j) for j in range(1, k + 1)]
    if cokernel.d is not None:
        lam_minus = [cokernel.spectrum_minus.eigenvalue(j) for j in range(-k, 0)]
    out = np.zeros(k - 1)
    for i in range(1, k):
        top = sum(
            cokernel.c[i - 1][j] * c_coeffs[j] * math.exp(-2.0 * lam_plus[j] * T_plus)
            for j in range(i - 1, k)
        )
        bottom = 0.0
        if cokernel.d is not None:
            bottom = sum(
                cokernel.d[i - 1][col]
                * d_coeffs[col]
                * math.exp(2.0 * lam_minus[col] * T_minus)
                for col in range(k)
            )
        out[i - 1] = top - bottom
    return out


def two_sided_pairing_quadrature(
    T_minus: float,
    T_plus: float,
    cokernel: CokernelBasisModel,
    c_coeffs: Sequence[float],
    d_coeffs: Sequence[float],
    params: NeckParams,
    n_quad: int = 4096,
) -> np.ndarray:
    """Direct neck quadrature of the case-B pairing (cross-check oracle).

    The top pairing integrates over the upward ramp at +T0, the bottom
    over the downward ramp at -T0, each rate normalized to integrate to
    one in the direction away from the middle level.
    """
    k = cokernel.k
    w = params.ramp_width
    lam_plus = [cokernel.spectrum_plus.eigenvalue(j) for j in range(1, k + 1)]
    if cokernel.d is not None:
        lam_minus = [cokernel.spectrum_minus.eigenvalue(j) for j in range(-k, 0)]
    if n_quad % 2 == 1:
        n_quad += 1
    s_top = np.linspace(params.T0, params.T0 + w, n_quad + 1)
    rho_top = _smoothstep_rate((s_top - params.T0) / w) / w
    s_bot = np.linspace(-params.T0 - w, -params.T0, n_quad + 1)
    rho_bot = _smoothstep_rate((-params.T0 - s_bot) / w) / w
    out = np.zeros(k - 1)
    for i in range(1, k):
        total = 0.0
        for j in range(i - 1, k):
            # sigma tail e^{-lam s} against c_j e^{lam (s - 2T_+)}
            integrand = rho_top * math.exp(-2.0 * lam_plus[j] * T_plus)
            total += cokernel.c[i - 1][j] * c_coeffs[j] * _simpson(integrand, s_top)
        if cokernel.d is not None:
            for col in range(k):
                if cokernel.d[i - 1][col] == 0.0:
                    continue
                integrand = rho_bot * math.exp(2.0 * lam_minus[col] * T_minus)
                total -= (
                    cokernel.d[i - 1][col]
                    * d_coeffs[col]
                    * _simpson(integrand, s_bot)
                )
        out[i - 1] = total
    return out


@dataclass(frozen=True)
class SweepRow:
    T: float
    r: float
    h: float
    amplitude: float
    psi_plus_norm: float
    psi_minus_norm: float
    ratio: float


@dataclass(frozen=True)
class SweepReport:
    rows: Tuple[SweepRow, ...]

    @property
    def max_ratio(self) -> float:
        return max((row.ratio for row in self.rows), default=0.0)

    def ratios_nonincreasing_in_T(self, tol: float = 1e-5) -> bool:
        """Monotonicity up to the discrete-norm quadrature jitter."""
        by_key: Dict[Tuple[float, float, float], List[SweepRow]] = {}
        for row in self.rows:
            by_key.setdefault((row.r, row.h, row.amplitude), []).append(row)
        for rows in by_key.values():
            rows = sorted(rows, key=lambda r: r.T)
            for a, b in zip(rows, rows[1:]):
                if b.ratio > a.ratio * (1.0 + tol):
                    return False
        return True


def estimate_sweep(
    params_grid: Sequence[NeckParams],
    amplitudes: Sequence[float],
    kind: Optional[OperatorKind] = None,
) -> SweepReport:
    """Measured solution norms against the contraction-estimate bound.

    For each neck geometry and bottom-end amplitude, solve the linear
    neck problem with eta_minus = amplitude * (mode -1) and report
    ||psi_+||_* / (r^{-1}(e^{-lambda T} + ||psi_-||_*)), the measured
    analogue of the a-priori bound constant.
    """
    kind = kind or OperatorKind.pos_hyperbolic(0.5)
    rows: List[SweepRow] = []
    for params in params_grid:
        spectrum = closed_form_spectrum(kind, max(params.t_modes, 1))
        lam = min(
            spectrum.eigenvalue(1), abs(spectrum.eigenvalue(-1))
        )
        for amp in amplitudes:
            eta_plus = NeckField.zero(spectrum, params)
            eta_minus = NeckField.end_from_below(
                spectrum, params, {-1: amp} if amp != 0.0 else {}
            )
            psi_plus, psi_minus = solve_neck(eta_plus, eta_minus, params)
            plus_norm = psi_plus.star_norm()
            minus_norm = psi_minus.star_norm()
            denom = (math.exp(-lam * params.T) + minus_norm) / params.r
            rows.append(
                SweepRow(
                    T=params.T,
                    r=params.r,
                    h=params.h,
                    amplitude=amp,
                    psi_plus_norm=plus_norm,
                    psi_minus_norm=minus_norm,
                    ratio=plus_norm / denom if denom > 0 else 0.0,
                )
            )
    return SweepReport(rows=tuple(rows))
