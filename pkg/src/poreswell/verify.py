"""Audits of completed runs and grid-refinement studies.

The audit functions are pure functions of a :class:`~poreswell.pde.Run`:

* :func:`check_bounds` for ``phi(a) <= u <= |h|_inf / H``,
* :func:`mass_audit` for the water balance of the wet region,
* :func:`front_rate_bounds` for the speed bounds and the integrated lower bound,

and :func:`build_report` bundles them into a :class:`RunReport`.
:func:`refinement_study` measures observed orders by successive halving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import ValidatedModel
from .pde import Run, StepperConfig, solve_monolithic
from .transform import ReferenceGrid, from_reference, to_reference

TOL_BOUND = 1e-8

#: differences below this are roundoff, i.e. exact agreement
EXACT_FLOOR = 1e-10


def reconstruct(run: Run, n: int, z) -> np.ndarray:
    """Physical field ``u(t_n, z)`` by linear interpolation of the reference nodes."""
    y = to_reference(z, float(run.s[n]), run.model.params.a)
    return np.interp(y, run.grid.y, run.u[n])


@dataclass(frozen=True)
class BoundsCheck:
    passed: bool
    lower: float
    upper: float
    min_u: np.ndarray = field(repr=False)
    max_u: np.ndarray = field(repr=False)
    tol: float = TOL_BOUND

    @property
    def worst(self) -> float:
        """Largest violation of either bound (zero or negative when inside)."""
        return max(self.lower, self.upper)


def check_bounds(run: Run, tol: float = TOL_BOUND) -> BoundsCheck:
    """Check ``phi(a) - tol <= u <= |h|_inf / H + tol`` at every node and step.

    The field is mapped back to the physical nodes ``z_i = (1 - y_i) a + y_i s``;
    a piecewise-linear reconstruction attains its extrema there.
    """
    model = run.model
    a = model.params.a
    z = from_reference(run.grid.y[None, :], run.s[:, None], a)
    u = np.array([reconstruct(run, n, z[n]) for n in range(run.t.size)])
    min_u = u.min(axis=1)
    max_u = u.max(axis=1)
    lower = float(model.phi_a - min_u.min())
    upper = float(max_u.max() - model.u_max)
    finite = bool(np.all(np.isfinite(u)))
    return BoundsCheck(finite and lower <= tol and upper <= tol, lower, upper, min_u, max_u, tol)


@dataclass(frozen=True)
class MassAudit:
    mass: np.ndarray = field(repr=False)
    inflow_cum: np.ndarray = field(repr=False)
    error: np.ndarray = field(repr=False)

    @property
    def max_error(self) -> float:
        return float(np.max(self.error))


def mass(run: Run) -> np.ndarray:
    """Water content ``int_a^s u dz = (s - a) int_0^1 u dy`` by the trapezoid rule."""
    return (run.s - run.model.params.a) * (run.u @ run.grid.trapezoid_weights)


def mass_audit(run: Run) -> MassAudit:
    """``e_n = |M_n - M_0 - sum_{m<n} dt beta(h(t_m) - H u(t_m, a))|``.

    The front flux drops out of the balance, so only the inflow at the pore
    mouth is accumulated (left-endpoint rule).
    """
    model = run.model
    M = mass(run)
    inflow = np.asarray(model.beta(model.h(run.t) - model.params.H * run.u[:, 0]))
    cum = np.concatenate(([0.0], np.cumsum(np.diff(run.t) * inflow[:-1])))
    return MassAudit(M, cum, np.abs(M - M[0] - cum))


@dataclass(frozen=True)
class FrontRateCheck:
    passed: bool
    rate_min: float
    rate_max: float
    lower_rate: float
    upper_rate: float
    integrated_margin: float
    tol: float = TOL_BOUND


def front_rate_bounds(run: Run, tol: float = TOL_BOUND) -> FrontRateCheck:
    """Check ``a0 (phi(a) - c_phi) <= s_t <= a0 |h|_inf / H`` and
    ``s(t) >= s0 + a0 (phi(a) - c_phi) t`` at every node."""
    model = run.model
    a0 = model.params.a0
    lo = a0 * (model.phi_a - model.c_phi)
    hi = a0 * model.u_max
    s_t = np.asarray(run.s_t, dtype=float)
    floor = run.s[0] + lo * (run.t - run.t[0])
    margin = float(np.min(run.s - floor))
    # relative slack for roundoff in the accumulated front positions
    ok = (bool(np.all(np.isfinite(s_t))) and s_t.min() >= lo - tol and s_t.max() <= hi + tol
          and margin >= -tol * (1.0 + float(np.max(np.abs(run.s)))))
    return FrontRateCheck(ok, float(s_t.min()), float(s_t.max()), lo, hi, margin, tol)


@dataclass
class RunReport:
    """Audit results aligned with the run's time nodes."""

    t: np.ndarray
    s: np.ndarray
    s_t: np.ndarray
    u_at_a: np.ndarray
    u_at_front: np.ndarray
    mass: np.ndarray
    inflow_cum: np.ndarray
    mass_error: np.ndarray
    min_u: np.ndarray
    max_u: np.ndarray
    psi: np.ndarray
    bounds: BoundsCheck
    rates: FrontRateCheck
    distances: tuple[float, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.bounds.passed and self.rates.passed

    TIMESERIES_COLUMNS = ("t", "s", "s_t", "u_at_a", "u_at_front", "mass", "inflow_cum",
                          "min_u", "max_u", "psi")

    def timeseries(self) -> np.ndarray:
        return np.column_stack([getattr(self, c) for c in self.TIMESERIES_COLUMNS])

    def summary(self) -> dict:
        b, r = self.bounds, self.rates
        return {
            "passed": self.passed,
            "steps": int(self.t.size - 1),
            "final": {"t": float(self.t[-1]), "s": float(self.s[-1])},
            "bounds": {"passed": b.passed, "tol": b.tol, "lower_violation": b.lower,
                       "upper_violation": b.upper, "min_u": float(self.min_u.min()),
                       "max_u": float(self.max_u.max())},
            "front_rate": {"passed": r.passed, "min": r.rate_min, "max": r.rate_max,
                           "lower_bound": r.lower_rate, "upper_bound": r.upper_rate,
                           "integrated_margin": r.integrated_margin},
            "mass": {"max_error": float(np.max(self.mass_error)),
                     "final_mass": float(self.mass[-1]),
                     "inflow_total": float(self.inflow_cum[-1])},
            "fixed_point_distances": [float(d) for d in self.distances],
            **self.meta,
        }


def _psi_series(run: Run) -> np.ndarray:
    from .functional import OUTSIDE_DOMAIN, psi_eval

    model = run.model
    out = np.empty(run.t.size)
    for n in range(run.t.size):
        val = psi_eval(model, run.u[n], float(run.s[n]), float(model.h(run.t[n])))
        out[n] = math.inf if val is OUTSIDE_DOMAIN else val.total
    return out


def build_report(run: Run, tol: float = TOL_BOUND, with_psi: bool = True) -> RunReport:
    bounds = check_bounds(run, tol)
    rates = front_rate_bounds(run, tol)
    audit = mass_audit(run)
    psi = _psi_series(run) if with_psi else np.full(run.t.size, np.nan)
    meta = {"mode": run.mode, **run.meta}
    return RunReport(run.t, run.s, run.s_t, run.u[:, 0], run.u[:, -1], audit.mass,
                     audit.inflow_cum, audit.error, bounds.min_u, bounds.max_u, psi,
                     bounds, rates, tuple(run.distances), meta)


@dataclass(frozen=True)
class RefinementLevel:
    N: int
    steps: int
    diff: float | None
    order: float | None


@dataclass
class RefinementStudy:
    """Successive-halving differences and observed orders.

    ``diff`` on level ``l`` compares it with level ``l - 1``: the larger of
    the max front difference on the shared time nodes and the max difference
    of the final field on the shared grid nodes. ``order`` is
    ``log2(diff[l-1] / diff[l])``; both are ``None`` where undefined.
    """

    spatial: list[RefinementLevel]
    temporal: list[RefinementLevel]
    exact: bool

    def orders(self, which: str) -> list[float]:
        rows = self.spatial if which == "spatial" else self.temporal
        return [r.order for r in rows if r.order is not None]

    def discretization_error(self) -> float:
        """Richardson estimate of the error at the coarsest level (both directions).

        Uses the first difference of each direction scaled by
        ``2^p / (2^p - 1)`` with the nominal orders ``p = 2`` (space) and
        ``p = 1`` (time).
        """
        if self.exact:
            return 0.0
        e_space = self.spatial[1].diff * 4.0 / 3.0
        e_time = self.temporal[1].diff * 2.0
        return e_space + e_time

    def rows(self) -> list[dict]:
        out = []
        for kind, levels in (("spatial", self.spatial), ("temporal", self.temporal)):
            for lev in levels:
                out.append({"kind": kind, "N": lev.N, "steps": lev.steps,
                            "diff": lev.diff, "order": "exact" if self.exact and lev.diff is not None
                            else lev.order})
        return out


def _difference(coarse: Run, fine: Run, space: bool) -> float:
    if space:
        ds = np.max(np.abs(coarse.s - fine.s))
        du = np.max(np.abs(coarse.u[-1] - fine.u[-1, ::2]))
    else:
        ds = np.max(np.abs(coarse.s - fine.s[::2]))
        du = np.max(np.abs(coarse.u[-1] - fine.u[-1]))
    return float(max(ds, du))


def _orders(diffs: list[float]) -> list[float | None]:
    out: list[float | None] = [None, None]
    for prev, cur in zip(diffs[:-1], diffs[1:]):
        out.append(math.log2(prev / cur) if cur > 0 and prev > 0 else None)
    return out


def refinement_study(model: ValidatedModel, N: int, steps: int, horizon: float, levels: int,
                     picard_tol: float = 1e-12, picard_max: int = 50,
                     delta_min: float | None = None) -> RefinementStudy:
    """Self-convergence in space and in time, one direction at a time.

    The spatial sequence uses ``N, 2N, ..., 2^(levels-1) N`` cells at the
    finest time step ``horizon / (2^(levels-1) steps)``; the temporal sequence
    uses ``steps, ..., 2^(levels-1) steps`` on the finest grid.
    """
    if levels < 3:
        raise ValueError(f"a refinement study needs levels >= 3, got {levels}")
    top = 2 ** (levels - 1)

    def solve(n_cells: int, n_steps: int) -> Run:
        cfg = StepperConfig(horizon / n_steps, picard_tol, picard_max, delta_min)
        return solve_monolithic(model, ReferenceGrid(n_cells), cfg, n_steps)

    finest = solve(N * top, steps * top)
    space_runs = [solve(N * 2**l, steps * top) for l in range(levels - 1)] + [finest]
    time_runs = [solve(N * top, steps * 2**l) for l in range(levels - 1)] + [finest]
    d_space = [_difference(c, f, True) for c, f in zip(space_runs[:-1], space_runs[1:])]
    d_time = [_difference(c, f, False) for c, f in zip(time_runs[:-1], time_runs[1:])]
    exact = max(d_space + d_time) < EXACT_FLOOR
    if exact:
        o_space = o_time = [None] * levels
    else:
        o_space, o_time = _orders(d_space), _orders(d_time)
    spatial = [RefinementLevel(N * 2**l, steps * top, None if l == 0 else d_space[l - 1], o_space[l])
               for l in range(levels)]
    temporal = [RefinementLevel(N * top, steps * 2**l, None if l == 0 else d_time[l - 1], o_time[l])
                for l in range(levels)]
    return RefinementStudy(spatial, temporal, exact)
