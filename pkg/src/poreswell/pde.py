"""Time stepping of the transformed diffusion equation on the reference grid.

Each step is backward Euler in the diffusion term. Advection and the two
nonlinear boundary fluxes are lagged at the previous Picard iterate, and the
resulting tridiagonal system is re-solved until successive iterates agree to
``picard_tol``. Flux conditions enter through ghost-point elimination with a
centred difference, which keeps the boundary treatment second order.

Two right-boundary laws are supported:

``"monolithic"``
    ``-k/(s-a) u_y(1) = u(1) s_t`` with ``s_t`` given (the coupled problem).
``"ap"``
    ``-k/(s-a) u_y(1) = a0 sigma(u(1)) (sigma(u(1)) - phi(s))`` for a frozen
    front path (the auxiliary problem behind the fixed-point construction).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels as kern
from .errors import DegenerateFront, PicardDivergence
from .model import ValidatedModel
from .transform import ReferenceGrid

log = logging.getLogger(__name__)

MODES = ("monolithic", "ap")


@dataclass(frozen=True)
class StepperConfig:
    """Time step and inner-iteration controls.

    ``delta_min`` defaults to ``1e-3 * a`` when left as ``None``.
    """

    dt: float
    picard_tol: float = 1e-10
    picard_max: int = 50
    delta_min: float | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if not self.picard_tol > 0:
            raise ValueError(f"picard_tol must be > 0, got {self.picard_tol}")
        if int(self.picard_max) != self.picard_max or self.picard_max < 1:
            raise ValueError(f"picard_max must be an integer >= 1, got {self.picard_max}")
        if self.delta_min is not None and not self.delta_min > 0:
            raise ValueError(f"delta_min must be > 0, got {self.delta_min}")

    def guard(self, a: float) -> float:
        return 1e-3 * a if self.delta_min is None else self.delta_min


@dataclass
class TridiagonalSystem:
    """``lower[i] u[i-1] + diag[i] u[i] + upper[i] u[i+1] = rhs[i]``.

    ``lower[0]`` and ``upper[-1]`` are unused and kept at zero.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def solve(self) -> np.ndarray:
        out = np.empty_like(self.diag)
        kern.thomas(self.lower, self.diag, self.upper, self.rhs, out)
        return out

    def to_dense(self) -> np.ndarray:
        n = self.diag.size
        m = np.diag(self.diag)
        m[np.arange(1, n), np.arange(n - 1)] = self.lower[1:]
        m[np.arange(n - 1), np.arange(1, n)] = self.upper[:-1]
        return m


class BoundaryRow(NamedTuple):
    """Ghost-eliminated spatial operator at a boundary node.

    ``(D u_yy + advection)`` at that node equals
    ``center * u_node + neighbor * u_inner + source``, and ``flux`` is the
    value of the (lagged) flux law that produced ``source``.
    """

    center: float
    neighbor: float
    source: float
    flux: float


class StepResult(NamedTuple):
    u: np.ndarray
    s: float
    s_t: float
    iterations: int


class KernelArgs(NamedTuple):
    """Model data in the flat form taken by :mod:`poreswell._kernels`."""

    pp: np.ndarray
    beta: np.ndarray
    phi: np.ndarray
    ht: np.ndarray
    hv: np.ndarray


def kernel_args(model: ValidatedModel) -> KernelArgs:
    p = model.params
    pp = np.array([p.a, p.a0, p.H, p.k, model.phi_a])
    ht, hv = model.boundary.encode()
    return KernelArgs(pp, model.constitutive.beta.encode(), model.constitutive.phi.encode(), ht, hv)


def _mode_code(mode: str) -> int:
    if mode == "monolithic":
        return kern.MONOLITHIC
    if mode == "ap":
        return kern.AP
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def check_front(s: float, a: float, delta_min: float) -> None:
    if not s - a >= delta_min:
        raise DegenerateFront(f"s - a = {s - a:.6g} fell below delta_min = {delta_min:.6g}")


def left_flux(model: ValidatedModel, u0: float, h_val: float) -> float:
    """Inflow ``beta(h - H u(0))`` through the pore mouth."""
    return float(model.beta(h_val - model.params.H * u0))


def right_flux(model: ValidatedModel, uN: float, s: float, s_t: float, mode: str) -> float:
    """Outflow ``-k/(s-a) u_y(1)`` demanded by the front condition."""
    if _mode_code(mode) == kern.MONOLITHIC:
        return uN * s_t
    sig = model.sigma(uN)
    return model.params.a0 * sig * (sig - model.phi(s))


def apply_boundary_left(model: ValidatedModel, grid: ReferenceGrid, u0: float, s: float,
                        h_val: float) -> BoundaryRow:
    """Row for node ``y = 0``; the advection speed vanishes there."""
    a, k = model.params.a, model.params.k
    D = k / (s - a) ** 2
    flux = left_flux(model, u0, h_val)
    c = 2.0 * D / grid.dy**2
    return BoundaryRow(-c, c, 2.0 * flux / ((s - a) * grid.dy), flux)


def apply_boundary_right(model: ValidatedModel, grid: ReferenceGrid, uN: float, s: float,
                         s_t: float, mode: str) -> BoundaryRow:
    """Row for node ``y = 1``.

    The advection term there uses the boundary derivative implied by the flux
    law, ``u_y(1) = -(s - a) flux / k``.
    """
    a, k = model.params.a, model.params.k
    D = k / (s - a) ** 2
    flux = right_flux(model, uN, s, s_t, mode)
    c = 2.0 * D / grid.dy**2
    speed = s_t / (s - a)
    source = -2.0 * flux / ((s - a) * grid.dy) - speed * (s - a) * flux / k
    return BoundaryRow(-c, c, source, flux)


def advection_term(model: ValidatedModel, grid: ReferenceGrid, u: np.ndarray,
                   s: float, s_t: float) -> np.ndarray:
    """``y s_t/(s-a) u_y`` at interior nodes (zero at both ends).

    Centred differences where the cell Peclet number ``|A| dy / (2 D)`` is at
    most one, first-order upwinding by the sign of ``s_t`` elsewhere.
    """
    u = np.ascontiguousarray(u, dtype=float)
    out = np.empty_like(u)
    n_up = kern.advection(u, s, s_t, kernel_args(model).pp, out)
    if n_up:
        log.debug("upwinding at %d of %d interior nodes", n_up, grid.N - 1)
    return out


def assemble_step(model: ValidatedModel, grid: ReferenceGrid, u_old: np.ndarray, s: float,
                  s_t: float, h_val: float, dt: float, lag: np.ndarray | None = None,
                  mode: str = "monolithic", delta_min: float | None = None) -> TridiagonalSystem:
    """Backward-Euler system ``(I - dt D L) u_new = u_old + dt (advection + boundary sources)``.

    ``lag`` is the Picard iterate at which advection and both flux laws are
    frozen; it defaults to ``u_old``.
    """
    a = model.params.a
    check_front(s, a, 1e-3 * a if delta_min is None else delta_min)
    u_old = np.ascontiguousarray(u_old, dtype=float)
    lag = u_old if lag is None else np.ascontiguousarray(lag, dtype=float)
    if u_old.size != grid.N + 1 or lag.size != grid.N + 1:
        raise ValueError(f"fields must have N + 1 = {grid.N + 1} nodes")
    ka = kernel_args(model)
    n = grid.N + 1
    lower, diag, upper, rhs = (np.empty(n) for _ in range(4))
    kern.assemble(u_old, lag, s, s_t, h_val, dt, _mode_code(mode), ka.pp, ka.beta, ka.phi,
                  lower, diag, upper, rhs)
    return TridiagonalSystem(lower, diag, upper, rhs)


def picard_step(model: ValidatedModel, grid: ReferenceGrid, cfg: StepperConfig,
                u_old: np.ndarray, s: float, s_t: float, h_val: float,
                mode: str) -> tuple[np.ndarray, int]:
    """Advance the field one step for a known front position and speed."""
    check_front(s, model.params.a, cfg.guard(model.params.a))
    ka = kernel_args(model)
    u_old = np.ascontiguousarray(u_old, dtype=float)
    out = np.empty_like(u_old)
    its, change = kern.picard(u_old, s, s_t, h_val, cfg.dt, _mode_code(mode), cfg.picard_tol,
                              cfg.picard_max, ka.pp, ka.beta, ka.phi, out)
    if its < 0:
        raise PicardDivergence(
            f"boundary iteration stalled after {-its} sweeps (last change {change:.3g})")
    return out, its


def step_monolithic(model: ValidatedModel, grid: ReferenceGrid, cfg: StepperConfig,
                    u: np.ndarray, s: float, t: float) -> StepResult:
    """One coupled step: explicit Euler for the front, then the field solve."""
    p = model.params
    s_t = p.a0 * (u[-1] - model.phi(s))
    s_new = s + cfg.dt * s_t
    check_front(s_new, p.a, cfg.guard(p.a))
    u_new, its = picard_step(model, grid, cfg, u, s_new, s_t, model.h(t + cfg.dt), "monolithic")
    return StepResult(u_new, s_new, s_t, its)


@dataclass
class Run:
    """Time history of a completed solve.

    ``u[n]`` holds the reference field at ``t[n]``; ``s_t[n]`` is the front
    speed on ``[t[n], t[n+1]]`` (the last entry repeats the rate law at the
    final state).
    """

    model: ValidatedModel
    grid: ReferenceGrid
    t: np.ndarray
    s: np.ndarray
    s_t: np.ndarray
    u: np.ndarray
    mode: str
    picard_iterations: np.ndarray | None = None
    distances: tuple[float, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def steps(self) -> int:
        return self.t.size - 1


def initial_field(model: ValidatedModel, grid: ReferenceGrid) -> np.ndarray:
    return np.asarray(model.u0_reference(grid.y), dtype=float)


def _raise_status(status: int, step: int, info: float, cfg: StepperConfig, delta: float) -> None:
    if status == kern.DEGENERATE:
        raise DegenerateFront(
            f"step {step}: s - a = {info:.6g} fell below delta_min = {delta:.6g}")
    if status == kern.STALLED:
        raise PicardDivergence(
            f"step {step}: boundary iteration stalled after {cfg.picard_max} sweeps "
            f"(last change {info:.3g})")


def solve_monolithic(model: ValidatedModel, grid: ReferenceGrid, cfg: StepperConfig,
                     steps: int) -> Run:
    """March the coupled problem for ``steps`` steps of size ``cfg.dt``."""
    ka = kernel_args(model)
    delta = cfg.guard(model.params.a)
    t = cfg.dt * np.arange(steps + 1)
    u = np.empty((steps + 1, grid.N + 1))
    s = np.empty(steps + 1)
    s_t = np.empty(steps + 1)
    its = np.zeros(steps + 1, dtype=np.int64)
    u[0] = initial_field(model, grid)
    s[0] = model.initial.s0
    check_front(s[0], model.params.a, delta)
    status, step, info = kern.march_monolithic(cfg.dt, cfg.picard_tol, cfg.picard_max, delta,
                                               ka.pp, ka.beta, ka.phi, ka.ht, ka.hv,
                                               u, s, s_t, its)
    _raise_status(status, step, info, cfg, delta)
    return Run(model, grid, t, s, s_t, u, "monolithic", its)


def solve_ap(model: ValidatedModel, grid: ReferenceGrid, cfg: StepperConfig, path,
             u0: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Field history of the auxiliary problem for a frozen front path.

    ``path`` supplies ``t`` (uniform, step ``cfg.dt``), ``s`` and forward
    differences ``s_t``. Returns ``(u, picard_iterations)`` with ``u`` of
    shape ``(len(t), N + 1)``.
    """
    a = model.params.a
    delta = cfg.guard(a)
    s = np.ascontiguousarray(path.s, dtype=float)
    if np.min(s) - a < delta:
        raise DegenerateFront(f"front path dips to s - a = {np.min(s) - a:.6g} < delta_min = {delta:.6g}")
    t = np.ascontiguousarray(path.t, dtype=float)
    s_t = np.ascontiguousarray(path.s_t, dtype=float)
    if t.size > 1 and not np.allclose(np.diff(t), cfg.dt, rtol=1e-9, atol=0.0):
        raise ValueError("front path time nodes must be uniform with step cfg.dt")
    ka = kernel_args(model)
    u = np.empty((t.size, grid.N + 1))
    its = np.zeros(t.size, dtype=np.int64)
    u[0] = initial_field(model, grid) if u0 is None else u0
    status, step, info = kern.march_ap(cfg.dt, cfg.picard_tol, cfg.picard_max, ka.pp, ka.beta,
                                       ka.phi, ka.ht, ka.hv, t, s, s_t, u, its)
    _raise_status(status, step, info, cfg, delta)
    return u, its
