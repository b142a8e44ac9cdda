"""The convex energy behind the auxiliary problem.

For a front position ``s`` and threshold value ``h`` the energy of a
nonnegative reference field ``u`` is::

    psi(u) = k / (2 (s - a)^2) int_0^1 u_y^2 dy + g1(s, u(1)) + g2(s, h, u(0))

    g1(s, r) =  1/(s - a) int_0^r a0 sigma(x) (sigma(x) - phi(s)) dx
    g2(s, h, r) = -1/(s - a) int_0^r beta(h - H x) dx

and ``+inf`` for fields with a negative node. The auxiliary problem is the
gradient flow ``u_t + d psi(u) = y s_t / (s - a) u_y``, which
:func:`subdiff_residual` checks step by step.

On the grid, fields are continuous piecewise-linear, so the gradient term is
evaluated exactly from the cell differences ``(u[i+1] - u[i]) / dy``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering

import numpy as np
from scipy.integrate import quad

from .errors import BadGuards, OutsideDomain
from .model import ValidatedModel
from .transform import advection_coeff

#: free parameter in the Young splitting of the cubic boundary term
ETA = 0.3


@total_ordering
class _OutsideDomainMarker:
    """``+inf`` value of the energy; larger than every number, equal only to itself."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __hash__(self):
        return hash("poreswell.OUTSIDE_DOMAIN")

    def __repr__(self):
        return "OUTSIDE_DOMAIN"

    def __reduce__(self):
        return (_OutsideDomainMarker, ())

    @property
    def total(self):
        return self


OUTSIDE_DOMAIN = _OutsideDomainMarker()


@dataclass(frozen=True)
class FunctionalValue:
    """Energy split into its three parts; ``total`` is their sum."""

    gradient: float
    g1: float
    g2: float

    @property
    def total(self) -> float:
        return self.gradient + self.g1 + self.g2


def _span(model: ValidatedModel, s: float) -> float:
    span = s - model.params.a
    if not span > 0:
        raise OutsideDomain(f"front s={s} must lie above a={model.params.a}")
    return span


def gradient_energy(model: ValidatedModel, u: np.ndarray, s: float) -> float:
    """``k / (2 (s - a)^2) int_0^1 u_y^2`` for the piecewise-linear interpolant of ``u``."""
    u = np.asarray(u, dtype=float)
    N = u.size - 1
    du = np.diff(u)
    return model.params.k / (2.0 * _span(model, s) ** 2) * N * float(np.dot(du, du))


def boundary_potential_right(model: ValidatedModel, r: float, s: float) -> float:
    """``g1(s, r)`` in closed form.

    Below ``phi(a)`` the integrand is the constant ``a0 phi(a) (phi(a) - phi(s))``;
    above it is the quadratic ``a0 x (x - phi(s))``.
    """
    if r < 0:
        raise OutsideDomain(f"boundary value r={r} must be >= 0")
    a0, pa = model.params.a0, model.phi_a
    ps = float(model.phi(s))
    if r <= pa:
        val = r * a0 * pa * (pa - ps)
    else:
        val = (a0 * pa * pa * (pa - ps)
               + a0 * ((r**3 - pa**3) / 3.0 - ps * (r * r - pa * pa) / 2.0))
    return val / _span(model, s)


def boundary_potential_left(model: ValidatedModel, r: float, s: float, h_val: float) -> float:
    """``g2(s, h, r)`` by adaptive quadrature (absolute tolerance ``1e-12``)."""
    if r < 0:
        raise OutsideDomain(f"boundary value r={r} must be >= 0")
    span = _span(model, s)
    if r == 0.0:
        return 0.0
    H = model.params.H
    beta = model.constitutive.beta
    # the integrand switches on at x = h/H; give quad the kink explicitly
    kink = h_val / H
    points = [kink] if 0.0 < kink < r else None
    val, _ = quad(lambda x: beta(h_val - H * x), 0.0, r, epsabs=1e-12, epsrel=1e-12,
                  points=points, limit=200)
    return -val / span


def psi_eval(model: ValidatedModel, u, s: float, h_val: float):
    """Energy of the reference field ``u`` at front ``s`` and threshold ``h_val``.

    Returns
    -------
    FunctionalValue or OUTSIDE_DOMAIN
        The marker is returned, not raised, for fields with a negative node.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 2:
        raise ValueError("u must be a 1-d array of node values")
    if np.any(u < 0):
        return OUTSIDE_DOMAIN
    return FunctionalValue(gradient_energy(model, u, s),
                           boundary_potential_right(model, float(u[-1]), s),
                           boundary_potential_left(model, float(u[0]), s, h_val))


@dataclass(frozen=True)
class CoercivityConstants:
    C0: float
    C1: float
    K: float
    alpha: float

    def __iter__(self):
        return iter((self.C0, self.C1))


def coercivity_constants(model: ValidatedModel, L_guard: float, delta_guard: float,
                         eta: float = ETA) -> CoercivityConstants:
    """Explicit ``(C0, C1)`` with ``X <= C0 psi(u) + C1`` for ``X`` each of
    ``u(0)^2``, ``u(1)^2`` and ``k/(2 (s-a)^2) |u_y|^2``.

    Valid for every front with ``a + delta_guard <= s <= L_guard``. Writing
    ``l = L_guard - a`` and ``d = delta_guard``:

    1. Young's inequality on ``phi(s) r^2 / 2 <= c_phi r^2 / 2`` gives, for
       ``r > phi(a)``, ``(s-a) g1 >= c0 r^3 + R`` with
       ``c0 = a0 (1 - 2 eta^1.5) / 3``.
    2. With ``alpha = c0 phi(a) / (2 l)`` this becomes ``g1 >= 2 alpha r^2 - K1``
       on all of ``r >= 0`` (below ``phi(a)`` the integrand is at least
       ``-a0 phi(a) c_phi``).
    3. ``g2 >= -c_beta u(0) / (s-a)`` and ``u(0) <= u(1) + |u_y|``. Young once
       against ``alpha u(1)^2`` and once against half the gradient energy
       leaves ``K2``.

    Hence ``psi >= G/2 + alpha u(1)^2 - K`` with ``K = K1 + K2``, which yields
    the three bounds with ``C0 = max(2, 1/alpha, 8 l^2/k + 2/alpha)`` and
    ``C1 = C0 K``.

    Raises
    ------
    BadGuards
        If ``L_guard <= a``, ``delta_guard <= 0`` or ``delta_guard > L_guard - a``.
    """
    p = model.params
    ell = L_guard - p.a
    if not ell > 0:
        raise BadGuards(f"L_guard={L_guard} must exceed a={p.a}")
    if not delta_guard > 0:
        raise BadGuards(f"delta_guard={delta_guard} must be > 0")
    if delta_guard > ell:
        raise BadGuards(f"delta_guard={delta_guard} exceeds L_guard - a = {ell}")
    if not 0 < eta < 0.5 ** (2.0 / 3.0):
        raise BadGuards(f"eta={eta} must lie in (0, 2^(-2/3))")
    a0, k, pa, c_phi, c_beta = p.a0, p.k, model.phi_a, model.c_phi, model.c_beta
    d = delta_guard

    c0 = a0 / 3.0 * (1.0 - 2.0 * eta**1.5)
    R = -a0 / 3.0 * (c_phi / (2.0 * eta)) ** 3 + a0 * (2.0 * pa**3 / 3.0 - pa**2 * c_phi / 2.0)
    alpha = c0 * pa / (2.0 * ell)
    K1 = max(max(0.0, -R) / d, c0 * pa**3 / ell + a0 * pa**2 * c_phi / d)
    K2 = ell / (2.0 * c0 * pa) * (c_beta / d) ** 2 + c_beta**2 / k
    K = K1 + K2
    C0 = max(2.0, 1.0 / alpha, 8.0 * ell**2 / k + 2.0 / alpha)
    return CoercivityConstants(C0, C0 * K, K, alpha)


@dataclass(frozen=True)
class SubdiffResidual:
    """Max-norm defects of a candidate subgradient ``z``.

    ``interior`` compares ``z`` with ``-k/(s-a)^2 u_yy``; ``left`` and ``right``
    are the two flux identities at ``y = 0`` and ``y = 1`` after the ghost
    values are recovered from ``z``. ``scale`` is ``max |z|``.
    """

    interior: float
    left: float
    right: float
    scale: float


def ap_subgradient(model: ValidatedModel, u_new: np.ndarray, u_old: np.ndarray, s: float,
                   s_t: float, dt: float) -> np.ndarray:
    """``z = -(u_new - u_old)/dt + y s_t/(s-a) u_y`` for one auxiliary-problem step.

    ``u_y`` is the centred difference of ``u_new`` inside and, at ``y = 1``,
    the derivative implied by the front flux law.
    """
    u_new = np.asarray(u_new, dtype=float)
    N = u_new.size - 1
    span = _span(model, s)
    y = np.arange(N + 1) / N
    grad = np.empty(N + 1)
    grad[0] = 0.0
    grad[1:-1] = (u_new[2:] - u_new[:-2]) * (N / 2.0)
    sig = max(float(u_new[-1]), model.phi_a)
    grad[-1] = -span * model.params.a0 * sig * (sig - float(model.phi(s))) / model.params.k
    return -(u_new - np.asarray(u_old)) / dt + advection_coeff(y, s, s_t, model.params.a) * grad


def subdiff_residual(model: ValidatedModel, u, s: float, h_val: float, z) -> SubdiffResidual:
    """How far ``z`` is from the subgradient of ``psi`` at ``u``.

    Parameters
    ----------
    u : array
        Reference field in the domain (all nodes nonnegative).
    s, h_val : float
        Front position and threshold value defining the energy.
    z : array
        Candidate subgradient on the grid nodes, e.g. from :func:`ap_subgradient`.
    """
    u = np.asarray(u, dtype=float)
    z = np.asarray(z, dtype=float)
    p = model.params
    N = u.size - 1
    dy = 1.0 / N
    span = _span(model, s)
    D = p.k / span**2
    lap = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dy**2
    interior = float(np.max(np.abs(z[1:-1] + D * lap))) if N > 1 else 0.0

    # ghost values that make z = -D u_yy hold at the end nodes too
    ghost_left = 2.0 * u[0] - u[1] - z[0] * dy**2 / D
    ghost_right = 2.0 * u[N] - u[N - 1] - z[N] * dy**2 / D
    uy0 = (u[1] - ghost_left) / (2.0 * dy)
    uy1 = (ghost_right - u[N - 1]) / (2.0 * dy)
    inflow = float(model.beta(h_val - p.H * u[0]))
    sig = max(float(u[N]), model.phi_a)
    outflow = p.a0 * sig * (sig - float(model.phi(s)))
    left = abs(-p.k / span * uy0 - inflow)
    right = abs(-p.k / span * uy1 - outflow)
    return SubdiffResidual(interior, left, right, float(np.max(np.abs(z))))


def midpoint_gap(model: ValidatedModel, u, v, s: float, h_val: float) -> float:
    """``psi((u+v)/2) - (psi(u) + psi(v))/2``; nonpositive for a convex energy.

    Both fields must lie in the domain.
    """
    pu, pv = psi_eval(model, u, s, h_val), psi_eval(model, v, s, h_val)
    if pu is OUTSIDE_DOMAIN or pv is OUTSIDE_DOMAIN:
        raise OutsideDomain("midpoint gap needs two nonnegative fields")
    pm = psi_eval(model, 0.5 * (np.asarray(u) + np.asarray(v)), s, h_val)
    return pm.total - 0.5 * (pu.total + pv.total)
