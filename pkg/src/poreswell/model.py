"""Physical parameters, constitutive laws, data and assumption checks.

The model is the one-dimensional swelling problem: water content ``u`` diffuses
on ``[a, s(t)]``, enters through the pore mouth ``z = a`` at rate
``beta(h(t) - H u(t, a))`` and pushes the front ``s`` with speed
``a0 (u(t, s) - phi(s))``.

Everything in this module is immutable after :func:`validate` returns, so a
:class:`ValidatedModel` can be shared read-only between threads or processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ValidationError

#: samples used to estimate ``sup f`` and ``sup f'`` of a tabulated law
SUP_SAMPLES = 10_000

# max of 2x/(1+x^2)^2 over x > 0, attained at x = 1/sqrt(3)
_SIGMOID_SLOPE = 3.0 * math.sqrt(3.0) / 8.0


@dataclass(frozen=True)
class PhysicalParams:
    """Scalar constants of the model.

    Attributes
    ----------
    a : float
        Position of the pore mouth.
    a0 : float
        Front-rate coefficient.
    H : float
        Henry-type partition constant.
    k : float
        Diffusivity.
    T : float
        Requested time horizon.
    """

    a: float
    a0: float
    H: float
    k: float
    T: float


class RationalSigmoid:
    """``height * r**2 / (r**2 + scale**2)`` for ``r > 0`` and zero otherwise.

    The function is C^1 on the real line (value and slope vanish at the
    origin), nondecreasing, and saturates at ``height``.
    """

    kind = "rational"

    def __init__(self, height: float, scale: float):
        self.height = float(height)
        self.scale = float(scale)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        rp = np.maximum(r, 0.0)
        out = self.height * rp * rp / (rp * rp + self.scale * self.scale)
        return float(out) if out.ndim == 0 else out

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        rp = np.maximum(r, 0.0)
        c2 = self.scale * self.scale
        out = self.height * 2.0 * rp * c2 / (rp * rp + c2) ** 2
        return float(out) if out.ndim == 0 else out

    def encode(self) -> np.ndarray:
        """Flat array form consumed by the compiled stepper."""
        return np.array([0.0, self.height, self.scale])

    @property
    def sup(self) -> float:
        return self.height

    @property
    def sup_derivative(self) -> float:
        return _SIGMOID_SLOPE * self.height / self.scale

    def __repr__(self):
        return f"RationalSigmoid(height={self.height!r}, scale={self.scale!r})"


class TabulatedLaw:
    """Monotone piecewise-cubic (PCHIP) interpolant of a table ``(r_j, f_j)``.

    The table must start at ``r = 0`` with value ``0``; a phantom knot at
    ``r = -1`` pins the slope at the origin to zero. Inputs at or below zero
    map to zero and inputs beyond the last knot to the last value, so the last
    two values should coincide for the law to stay C^1.
    """

    kind = "table"

    def __init__(self, r: Sequence[float], values: Sequence[float]):
        self.r = np.asarray(r, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.r.ndim != 1 or self.r.shape != self.values.shape or self.r.size < 2:
            raise ValueError("table needs matching 1-d knot and value arrays of length >= 2")
        if not np.all(np.diff(self.r) > 0):
            raise ValueError("table knots must be strictly increasing")
        knots = np.concatenate(([self.r[0] - 1.0], self.r))
        vals = np.concatenate(([self.values[0]], self.values))
        self._interp = PchipInterpolator(knots, vals, extrapolate=False)
        self._slope = self._interp.derivative()
        grid = np.linspace(0.0, self.r[-1], SUP_SAMPLES)
        self._sup = float(np.max(self._interp(grid)))
        self._sup_derivative = float(np.max(self._slope(grid)))

    def _clip(self, r):
        return np.clip(r, self.r[0], self.r[-1])

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= 0.0, 0.0, self._interp(self._clip(r)))
        return float(out) if out.ndim == 0 else out

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r > 0.0) & (r < self.r[-1])
        out = np.where(inside, self._slope(self._clip(r)), 0.0)
        return float(out) if out.ndim == 0 else out

    def encode(self) -> np.ndarray:
        """``[1, m, r_first, r_last, knots (m + 1), coefficients (4 m)]``."""
        x = self._interp.x
        c = self._interp.c.T.ravel()
        m = x.size - 1
        return np.concatenate(([1.0, m, self.r[0], self.r[-1]], x, c))

    @property
    def end_slope(self) -> float:
        return float(self._slope(self.r[-1]))

    @property
    def sup(self) -> float:
        return self._sup

    @property
    def sup_derivative(self) -> float:
        return self._sup_derivative

    def __repr__(self):
        return f"TabulatedLaw(r={self.r.tolist()!r}, values={self.values.tolist()!r})"


Law = Union[RationalSigmoid, TabulatedLaw]


@dataclass(frozen=True)
class ConstitutiveSpec:
    """The adsorption law ``beta`` and the swelling law ``phi``."""

    beta: Law
    phi: Law

    @classmethod
    def default(cls, beta_max: float, phi_max: float, r_phi: float) -> "ConstitutiveSpec":
        return cls(RationalSigmoid(beta_max, 1.0), RationalSigmoid(phi_max, r_phi))


class BoundarySignal:
    """Moisture threshold ``h(t)``: a constant or a piecewise-linear table."""

    def __init__(self, t: Sequence[float], h: Sequence[float]):
        self.t = np.asarray(t, dtype=float)
        self.h = np.asarray(h, dtype=float)
        self.is_constant = self.t.size == 1

    @classmethod
    def constant(cls, value: float) -> "BoundarySignal":
        return cls([0.0], [value])

    @classmethod
    def from_spec(cls, spec) -> "BoundarySignal":
        """Build from a scalar or a list of ``[t, h]`` pairs."""
        if np.ndim(spec) == 0:
            return cls.constant(float(spec))
        knots = np.asarray(spec, dtype=float)
        if knots.ndim != 2 or knots.shape[1] != 2:
            raise ValueError("boundary.h must be a scalar or a list of [t, h] pairs")
        return cls(knots[:, 0], knots[:, 1])

    def __call__(self, t):
        if self.is_constant:
            out = np.full(np.shape(t), self.h[0])
            return float(out) if out.ndim == 0 else out
        out = np.interp(t, self.t, self.h)
        return float(out) if np.ndim(out) == 0 else out

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.h)))

    def encode(self) -> tuple[np.ndarray, np.ndarray]:
        return self.t.copy(), self.h.copy()

    def to_spec(self):
        if self.is_constant:
            return float(self.h[0])
        return [[float(t), float(h)] for t, h in zip(self.t, self.h)]


@dataclass(frozen=True)
class InitialData:
    """Initial front ``s0`` and samples of ``u0`` on a uniform grid of ``[a, s0]``."""

    s0: float
    u0: np.ndarray = field(repr=False)

    @classmethod
    def from_spec(cls, s0: float, u0) -> "InitialData":
        samples = np.atleast_1d(np.asarray(u0, dtype=float))
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("initial.u0 must be a scalar or a flat list of samples")
        if samples.size == 1:
            samples = np.repeat(samples, 2)
        return cls(float(s0), samples)

    def reference_profile(self, y):
        """``u0((1 - y) a + y s0)`` by linear interpolation of the samples."""
        y_s = np.linspace(0.0, 1.0, self.u0.size)
        return np.interp(y, y_s, self.u0)


@dataclass(frozen=True)
class Violation:
    code: str
    field: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.field}: {self.message}"


@dataclass(frozen=True)
class ValidatedModel:
    """A model bundle that passed every assumption check.

    Derived constants are cached: ``c_beta = sup beta + sup beta'``,
    ``c_phi = sup phi + sup phi'``, ``phi_a = phi(a)`` and ``h_sup = |h|_inf``.
    """

    params: PhysicalParams
    constitutive: ConstitutiveSpec
    boundary: BoundarySignal
    initial: InitialData
    c_beta: float
    c_phi: float
    phi_a: float
    h_sup: float

    @property
    def u_max(self) -> float:
        """Upper content bound ``|h|_inf / H``."""
        return self.h_sup / self.params.H

    @property
    def L_default(self) -> float:
        """Crude upper bound on the front over the horizon."""
        p = self.params
        return self.initial.s0 + p.a0 * self.u_max * p.T

    def K_default(self, T: float | None = None) -> float:
        """Radius of the W^{1,2} ball the fixed-point iterates must stay in."""
        p = self.params
        T = p.T if T is None else T
        v = p.a0 * self.u_max
        return 2.0 * (self.initial.s0 + v * T) * math.sqrt(T) + v * math.sqrt(T)

    def beta(self, r):
        return self.constitutive.beta(r)

    def phi(self, r):
        return self.constitutive.phi(r)

    def sigma(self, r):
        return sigma_eval(r, self.phi_a)

    def h(self, t):
        return self.boundary(t)

    def u0_reference(self, y):
        return self.initial.reference_profile(y)


def beta_eval(r, beta_max: float):
    """Default adsorption law ``beta_max r^2 / (1 + r^2)`` (zero for ``r <= 0``)."""
    return RationalSigmoid(beta_max, 1.0)(r)


def phi_eval(r, phi_max: float, r_phi: float):
    """Default swelling law ``phi_max r^2 / (r^2 + r_phi^2)`` (zero for ``r <= 0``)."""
    return RationalSigmoid(phi_max, r_phi)(r)


def sigma_eval(r, phi_a: float):
    """Truncation from below at ``phi(a)``."""
    out = np.maximum(np.asarray(r, dtype=float), phi_a)
    return float(out) if out.ndim == 0 else out


def _finite_positive(x) -> bool:
    return isinstance(x, (int, float, np.floating)) and math.isfinite(x) and x > 0


def _check_law(law: Law, code: str, name: str, out: list[Violation]) -> None:
    if isinstance(law, RationalSigmoid):
        if not _finite_positive(law.height):
            out.append(Violation(code, f"{name}_max", f"must be finite and > 0, got {law.height}"))
        if not _finite_positive(law.scale):
            out.append(Violation(code, f"{name}.scale", f"must be finite and > 0, got {law.scale}"))
        return
    if law.r[0] != 0.0 or law.values[0] != 0.0:
        out.append(Violation(code, f"{name}_table", "table must start at (0, 0)"))
    if np.any(np.diff(law.values) < 0) or np.any(law.values < 0):
        out.append(Violation(code, f"{name}_table", "values must be nonnegative and nondecreasing"))
    if abs(law.end_slope) > 1e-12:
        out.append(Violation(code, f"{name}_table",
                             f"slope at last knot must vanish (got {law.end_slope:.3g})"))


def validate(params: PhysicalParams, constitutive: ConstitutiveSpec,
             boundary: BoundarySignal, initial: InitialData) -> ValidatedModel:
    """Check (A1)-(A5) and return a :class:`ValidatedModel`.

    Raises
    ------
    ValidationError
        Carrying every violated predicate, each tagged ``ViolatesA1`` ..
        ``ViolatesA5`` with the offending field and the bound it broke.
    """
    v: list[Violation] = []

    for name in ("a", "a0", "H", "k", "T"):
        val = getattr(params, name)
        if not _finite_positive(val):
            v.append(Violation("ViolatesA1", f"physical.{name}", f"must be finite and > 0, got {val}"))
    a_ok = _finite_positive(params.a)
    H_ok = _finite_positive(params.H)
    T_ok = _finite_positive(params.T)

    h_ok = True
    if not np.all(np.isfinite(boundary.h)) or not np.all(np.isfinite(boundary.t)):
        v.append(Violation("ViolatesA2", "boundary.h", "values must be finite"))
        h_ok = False
    elif np.any(boundary.h < 0):
        v.append(Violation("ViolatesA2", "boundary.h", f"must be >= 0, min is {boundary.h.min()}"))
    if not boundary.is_constant:
        if np.any(np.diff(boundary.t) <= 0):
            v.append(Violation("ViolatesA2", "boundary.h", "knot times must be strictly increasing"))
        if T_ok and (boundary.t[0] > 0.0 or boundary.t[-1] < params.T):
            v.append(Violation("ViolatesA2", "boundary.h",
                               f"knots must cover [0, T={params.T}], got [{boundary.t[0]}, {boundary.t[-1]}]"))
    h_sup = boundary.sup_norm if h_ok else math.nan

    _check_law(constitutive.beta, "ViolatesA3", "beta", v)
    n_before = len(v)
    _check_law(constitutive.phi, "ViolatesA4", "phi", v)
    phi_ok = len(v) == n_before

    beta, phi = constitutive.beta, constitutive.phi
    phi_a = float(phi(params.a)) if (a_ok and phi_ok) else math.nan
    if phi_ok and a_ok:
        if isinstance(phi, RationalSigmoid):
            if phi.scale > params.a:
                v.append(Violation("ViolatesA4", "constitutive.r_phi",
                                   f"r_phi={phi.scale} must be <= a={params.a} so that sup phi <= 2 phi(a)"))
        elif phi.sup > 2.0 * phi_a * (1 + 1e-12):
            v.append(Violation("ViolatesA4", "phi_table",
                               f"sup phi={phi.sup:.6g} exceeds 2 phi(a)={2 * phi_a:.6g}"))
        if H_ok and h_ok and phi.sup > h_sup / params.H * (1 + 1e-12):
            v.append(Violation("ViolatesA4", "constitutive.phi_max",
                               f"sup phi={phi.sup:.6g} exceeds |h|_inf/H={h_sup / params.H:.6g}"))

    if not math.isfinite(initial.s0) or (a_ok and initial.s0 <= params.a):
        v.append(Violation("ViolatesA5", "initial.s0", f"s0={initial.s0} must exceed a={params.a}"))
    if not np.all(np.isfinite(initial.u0)):
        v.append(Violation("ViolatesA5", "initial.u0", "samples must be finite"))
    else:
        if math.isfinite(phi_a) and initial.u0.min() < phi_a:
            v.append(Violation("ViolatesA5", "initial.u0",
                               f"min u0={initial.u0.min():.6g} is below phi(a)={phi_a:.6g}"))
        if H_ok and h_ok and initial.u0.max() > h_sup / params.H * (1 + 1e-12):
            v.append(Violation("ViolatesA5", "initial.u0",
                               f"max u0={initial.u0.max():.6g} exceeds |h|_inf/H={h_sup / params.H:.6g}"))

    if v:
        raise ValidationError(v)

    return ValidatedModel(
        params=params,
        constitutive=constitutive,
        boundary=boundary,
        initial=initial,
        c_beta=beta.sup + beta.sup_derivative,
        c_phi=phi.sup + phi.sup_derivative,
        phi_a=phi_a,
        h_sup=h_sup,
    )
