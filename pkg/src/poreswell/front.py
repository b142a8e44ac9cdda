"""Front paths, the map Gamma and the fixed-point driver.

For a frozen front path ``s`` the auxiliary problem gives a field whose
trace at ``y = 1`` drives the rate law; integrating that rate from ``s0``
yields a new path ``Gamma(s)``. Solutions of the coupled problem are the
fixed points of ``Gamma``, and :func:`fixed_point_solve` finds them by plain
iteration from the constant path. Distances between paths are measured in the
discrete ``W^{1,2}`` norm.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import GuardTripped, MismatchedGrids, NoConvergence
from .model import ValidatedModel
from .pde import Run, StepperConfig, initial_field, solve_ap
from .transform import ReferenceGrid

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FrontPath:
    """Front positions on uniform time nodes.

    ``s_t[n]`` is the forward difference on ``[t[n], t[n+1]]``; the last
    entry carries the rate at the final node so all arrays share one length.
    """

    t: np.ndarray
    s: np.ndarray
    s_t: np.ndarray

    def __post_init__(self):
        if not (self.t.shape == self.s.shape == self.s_t.shape) or self.t.ndim != 1:
            raise ValueError("t, s and s_t must be 1-d arrays of one length")
        if self.t.size < 2:
            raise ValueError("a front path needs at least two time nodes")

    @classmethod
    def from_values(cls, t, s, final_rate: float | None = None) -> "FrontPath":
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        s_t = np.empty_like(s)
        s_t[:-1] = np.diff(s) / np.diff(t)
        s_t[-1] = s_t[-2] if final_rate is None else final_rate
        return cls(t, s, s_t)

    @classmethod
    def constant(cls, t, value: float) -> "FrontPath":
        t = np.asarray(t, dtype=float)
        return cls(t, np.full(t.size, float(value)), np.zeros(t.size))

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def horizon(self) -> float:
        return float(self.t[-1] - self.t[0])

    def w12_norm(self) -> float:
        """Discrete ``W^{1,2}(0, T)`` norm (left-point sums over the intervals)."""
        return _w12(self.s[:-1], self.s_t[:-1], self.dt)


def _w12(v: np.ndarray, v_t: np.ndarray, dt: float) -> float:
    return math.sqrt(dt * float(np.dot(v, v) + np.dot(v_t, v_t)))


def front_rhs(model: ValidatedModel, u_boundary, s):
    """Truncated rate law ``a0 (sigma(u(1)) - phi(s))``."""
    out = model.params.a0 * (model.sigma(u_boundary) - np.asarray(model.phi(s)))
    return float(out) if np.ndim(out) == 0 else out


def w12_distance(p: FrontPath, q: FrontPath) -> float:
    """``sqrt(sum dt (p - q)^2 + sum dt (p_t - q_t)^2)`` over the shared intervals."""
    if p.t.shape != q.t.shape or not np.allclose(p.t, q.t, rtol=0.0, atol=1e-12 * max(1.0, p.horizon)):
        raise MismatchedGrids("front paths are sampled on different time nodes")
    return _w12(p.s[:-1] - q.s[:-1], p.s_t[:-1] - q.s_t[:-1], p.dt)


@dataclass
class GammaImage:
    """``Gamma(s)`` together with the field and trace that produced it."""

    path: FrontPath
    u: np.ndarray
    rate: np.ndarray
    picard_iterations: np.ndarray


def gamma_map(model: ValidatedModel, grid: ReferenceGrid, cfg: StepperConfig, path: FrontPath,
              u0: np.ndarray | None = None) -> GammaImage:
    """Solve the auxiliary problem along ``path`` and integrate the rate law.

    The integral uses the trapezoid rule on the time nodes, so the image
    starts exactly at ``s0``.
    """
    u, its = solve_ap(model, grid, cfg, path, u0)
    rate = front_rhs(model, u[:, -1], path.s)
    s_new = model.initial.s0 + cumulative_trapezoid(rate, path.t, initial=0.0)
    return GammaImage(FrontPath.from_values(path.t, s_new, final_rate=rate[-1]), u, rate, its)


@dataclass
class FixedPointResult:
    """Outcome of :func:`fixed_point_solve`.

    ``distances[m]`` is ``|s(m+1) - s(m)|`` in the ``W^{1,2}`` norm, and
    ``residual`` is ``|Gamma(s*) - s*|`` for the returned path ``s*``.
    """

    path: FrontPath
    u: np.ndarray
    distances: list[float]
    residual: float
    K: float
    L: float
    picard_iterations: np.ndarray = field(repr=False, default=None)

    @property
    def iterations(self) -> int:
        return len(self.distances)

    @property
    def ratios(self) -> np.ndarray:
        d = np.asarray(self.distances)
        if d.size < 2:
            return np.empty(0)
        with np.errstate(divide="ignore", invalid="ignore"):
            return d[1:] / d[:-1]

    def to_run(self, model: ValidatedModel, grid: ReferenceGrid) -> Run:
        return Run(model, grid, self.path.t, self.path.s, self.path.s_t, self.u, "gamma",
                   self.picard_iterations, tuple(self.distances),
                   {"K": self.K, "L": self.L, "fp_residual": self.residual})


def _check_admissible(model: ValidatedModel, cfg: StepperConfig, path: FrontPath, K: float,
                      L: float, m: int) -> None:
    norm = path.w12_norm()
    if norm > K:
        raise GuardTripped(f"iterate {m}: |s|_W12 = {norm:.6g} exceeds K = {K:.6g}")
    top = float(np.max(path.s))
    if top > L:
        raise GuardTripped(f"iterate {m}: max s = {top:.6g} exceeds L = {L:.6g}")
    gap = float(np.min(path.s)) - model.params.a
    if gap < cfg.guard(model.params.a):
        raise GuardTripped(f"iterate {m}: min s - a = {gap:.6g} is below delta_min")


def fixed_point_solve(model: ValidatedModel, grid: ReferenceGrid, cfg: StepperConfig, steps: int,
                      fp_tol: float | None = None, fp_max: int = 60, K: float | None = None,
                      L: float | None = None) -> FixedPointResult:
    """Iterate ``s <- Gamma(s)`` from the constant path ``s0`` over ``steps`` steps.

    Parameters
    ----------
    model, grid, cfg
        Problem, reference grid and stepper settings; the horizon is
        ``steps * cfg.dt``.
    fp_tol : float, optional
        Stop once successive iterates are closer than this in ``W^{1,2}``.
        Defaults to ``1e-8 * sqrt(horizon)``.
    fp_max : int
        Iteration budget.
    K, L : float, optional
        Admissible-set radius and front ceiling; default to
        ``model.K_default(horizon)`` and ``model.L_default``.

    Raises
    ------
    NoConvergence
        When ``fp_max`` iterations do not reach ``fp_tol``.
    GuardTripped
        When an iterate leaves the admissible set.
    """
    horizon = steps * cfg.dt
    fp_tol = 1e-8 * math.sqrt(horizon) if fp_tol is None else fp_tol
    K = model.K_default(horizon) if K is None else K
    L = model.L_default if L is None else L
    t = cfg.dt * np.arange(steps + 1)
    u0 = initial_field(model, grid)
    current = FrontPath.constant(t, model.initial.s0)
    distances: list[float] = []
    for m in range(1, fp_max + 1):
        image = gamma_map(model, grid, cfg, current, u0).path
        _check_admissible(model, cfg, image, K, L, m)
        d = w12_distance(image, current)
        distances.append(d)
        log.debug("fixed-point iterate %d: distance %.3e", m, d)
        current = image
        if d < fp_tol:
            break
    else:
        raise NoConvergence(
            f"{fp_max} iterations left distance {distances[-1]:.3e} above fp_tol = {fp_tol:.3e}")
    final = gamma_map(model, grid, cfg, current, u0)
    return FixedPointResult(current, final.u, distances, w12_distance(final.path, current),
                            K, L, final.picard_iterations)


def contraction_ok(distances, spread: float = 0.2, tail: int = 3) -> bool:
    """All successive ratios below one and the last ``tail`` within ``spread``."""
    d = np.asarray(distances, dtype=float)
    if d.size < tail + 1:
        return False
    ratios = d[1:] / d[:-1]
    last = ratios[-tail:]
    return bool(np.all(ratios < 1.0) and last.max() - last.min() < spread)


@dataclass
class BisectionResult:
    horizon: float
    steps: int
    result: FixedPointResult | None
    trials: list[tuple[float, str]]

    @property
    def found(self) -> bool:
        return self.result is not None


def horizon_bisection(model: ValidatedModel, grid: ReferenceGrid, cfg: StepperConfig, steps: int,
                      fp_max: int = 60, max_halvings: int = 8, spread: float = 0.2,
                      min_steps: int = 8) -> BisectionResult:
    """Halve the horizon at fixed ``dt`` until the iteration visibly contracts.

    A horizon is accepted when the fixed-point iteration converges, every
    distance ratio is below one and the last three ratios agree to within
    ``spread``. The tolerance at each trial horizon ``T`` is ``1e-8 sqrt(T)``.
    """
    trials: list[tuple[float, str]] = []
    n = steps
    for _ in range(max_halvings + 1):
        horizon = n * cfg.dt
        try:
            res = fixed_point_solve(model, grid, cfg, n, fp_max=fp_max)
        except (NoConvergence, GuardTripped) as exc:
            trials.append((horizon, f"{type(exc).__name__}: {exc}"))
        else:
            if contraction_ok(res.distances, spread):
                trials.append((horizon, "accepted"))
                return BisectionResult(horizon, n, res, trials)
            trials.append((horizon, f"ratios {np.round(res.ratios, 3).tolist()}"))
        if n // 2 < min_steps:
            break
        n //= 2
    return BisectionResult(n * cfg.dt, n, None, trials)
