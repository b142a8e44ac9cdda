"""Acceptance criteria AC-1 .. AC-8, one test each.

Every test records ``(passed, detail)`` in ``conftest.ACCEPTANCE`` before
asserting, so the terminal summary prints one line per criterion even when
a criterion fails.
"""

import csv
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from poreswell import config as cfgmod
from poreswell.cli import cmd_converge
from poreswell.front import horizon_bisection, fixed_point_solve
from poreswell.functional import (ap_subgradient, coercivity_constants, gradient_energy,
                                  midpoint_gap, psi_eval, subdiff_residual)
from poreswell.pde import StepperConfig, solve_monolithic
from poreswell.transform import ReferenceGrid
from poreswell.verify import check_bounds, front_rate_bounds, mass_audit


def _record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    assert ok, f"{key}: {detail}"


def test_ac1_steady_state_exactness(equilibrium_rc):
    rc = equilibrium_rc
    grid = ReferenceGrid(64)
    solve_monolithic(rc.model, grid, rc.stepper, 2)  # compile outside the timing
    t0 = time.perf_counter()
    run = solve_monolithic(rc.model, grid, rc.stepper, 1000)
    elapsed = time.perf_counter() - t0
    du = float(np.max(np.abs(run.u - run.u[0])))
    ds = float(np.max(np.abs(run.s - rc.model.initial.s0)))
    ok = du <= 1e-12 and ds <= 1e-12 and elapsed < 1.0
    _record("AC-1", ok, f"max|u-u0|={du:.2e} max|s-s0|={ds:.2e} time={elapsed:.2f}s")


def test_ac2_invariant_bounds_on_random_configs():
    t0 = time.perf_counter()
    failures = []
    for seed in range(20):
        cfg = cfgmod.random_config(np.random.default_rng(seed), steps=500, N=64)
        rc = cfgmod.build_run_config(cfg)
        run = solve_monolithic(rc.model, rc.grid, rc.stepper, 500)
        b, r = check_bounds(run, 1e-8), front_rate_bounds(run, 1e-8)
        if not (b.passed and r.passed):
            failures.append((seed, b.worst, r.integrated_margin))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 60
    _record("AC-2", ok, f"20 configs, failures={failures} time={elapsed:.1f}s")


def _mass_error(cfg, N, steps):
    rc = cfgmod.build_run_config(cfg)
    run = solve_monolithic(rc.model, ReferenceGrid(N), StepperConfig(rc.horizon / steps, 1e-12), steps)
    return mass_audit(run).max_error


def test_ac3_mass_balance_refinement(default_cfg):
    t0 = time.perf_counter()
    # temporal levels on a grid fine enough that the time error dominates
    e_t = [_mass_error(default_cfg, 64, n) for n in (500, 1000, 2000)]
    # spatial levels at a step small enough that the space error dominates
    e_y = [_mass_error(default_cfg, N, 500_000) for N in (8, 16, 32)]
    elapsed = time.perf_counter() - t0
    r_t = [e_t[i] / e_t[i + 1] for i in range(2)]
    r_y = [e_y[i] / e_y[i + 1] for i in range(2)]
    ok = (all(1.7 <= r <= 2.3 for r in r_t) and all(3.4 <= r <= 4.6 for r in r_y)
          and elapsed < 60)
    _record("AC-3", ok, f"dt ratios={np.round(r_t, 3).tolist()} dy ratios="
                        f"{np.round(r_y, 3).tolist()} time={elapsed:.1f}s")


@pytest.fixture(scope="module")
def convergence(tmp_path_factory):
    out = tmp_path_factory.mktemp("converge")
    t0 = time.perf_counter()
    code = cmd_converge("default", 4, out)
    elapsed = time.perf_counter() - t0
    with open(out / "convergence.csv") as fh:
        rows = list(csv.DictReader(fh))
    return code, rows, elapsed


def _orders(rows, kind):
    return [float(r["order"]) for r in rows if r["kind"] == kind and r["order"]]


def test_ac4_self_convergence_orders(convergence):
    code, rows, elapsed = convergence
    sp, tm = _orders(rows, "spatial"), _orders(rows, "temporal")
    ok = (code == 0 and sp and tm and all(1.8 <= o <= 2.2 for o in sp)
          and all(0.8 <= o <= 1.2 for o in tm) and elapsed < 120)
    _record("AC-4", ok, f"spatial={np.round(sp, 4).tolist()} temporal={np.round(tm, 4).tolist()} "
                        f"time={elapsed:.1f}s")


def test_ac5_gamma_contraction(default_rc):
    rc = default_rc
    t0 = time.perf_counter()
    res = horizon_bisection(rc.model, rc.grid, rc.stepper, rc.steps)
    elapsed = time.perf_counter() - t0
    ok = res.found
    detail = f"trials={len(res.trials)}"
    if res.found:
        fp = res.result
        ratios = np.asarray(fp.ratios)
        fp_tol = 1e-8 * math.sqrt(res.horizon)
        tail = ratios[-3:]
        ok = (bool(np.all(ratios < 1)) and float(tail.max() - tail.min()) < 0.2
              and fp.residual < 2 * fp_tol and elapsed < 120)
        detail = (f"T*={res.horizon:g} ratios={np.round(ratios, 3).tolist()} "
                  f"residual={fp.residual:.2e} < {2 * fp_tol:.1e} time={elapsed:.1f}s")
    _record("AC-5", ok, detail)


def test_ac6_mode_cross_check(default_rc, convergence):
    rc = default_rc
    _, rows, _ = convergence
    first = {kind: next(float(r["diff"]) for r in rows if r["kind"] == kind and r["diff"])
             for kind in ("spatial", "temporal")}
    # Richardson estimate at the base resolution (nominal orders 2 and 1)
    err = first["spatial"] * 4.0 / 3.0 + first["temporal"] * 2.0
    t0 = time.perf_counter()
    mono = solve_monolithic(rc.model, rc.grid, rc.stepper, rc.steps)
    fp = fixed_point_solve(rc.model, rc.grid, rc.stepper, rc.steps)
    elapsed = time.perf_counter() - t0
    gap = float(np.max(np.abs(mono.s - fp.path.s)))
    ok = gap <= 5 * err and elapsed < 60
    _record("AC-6", ok, f"max|s_mono-s_fp|={gap:.2e} <= 5*{err:.2e} time={elapsed:.1f}s")


def _random_field(rng, n):
    kind = rng.integers(4)
    y = np.linspace(0, 1, n)
    if kind == 0:
        return rng.uniform(0, 3, n)
    if kind == 1:
        return np.abs(rng.normal(0.5, 1.0) + rng.normal(0, 1.0) * y)
    if kind == 2:
        return rng.uniform(0, 2) * (1 + np.cos(np.pi * rng.integers(1, 8) * y)) / 2
    return np.abs(np.cumsum(rng.normal(0, 0.3, n)))


def test_ac7_energy_coercivity_and_convexity(default_model, rng):
    m = default_model
    a = m.params.a
    delta, L = 0.5 * (m.initial.s0 - a), m.L_default
    C0, C1 = coercivity_constants(m, L, delta, eta=0.3)
    t0 = time.perf_counter()
    worst = -math.inf
    worst_gap = -math.inf
    for _ in range(10):
        s = rng.uniform(a + delta, L)
        h = float(m.h(rng.uniform(0, m.params.T)))
        for _ in range(100):
            u = _random_field(rng, int(rng.integers(2, 65)) + 1)
            val = psi_eval(m, u, s, h).total
            for X in (u[0] ** 2, u[-1] ** 2, gradient_energy(m, u, s)):
                worst = max(worst, X - (C0 * val + C1))
            v = _random_field(rng, u.size)
            pu, pv = psi_eval(m, u, s, h).total, psi_eval(m, v, s, h).total
            gap = midpoint_gap(m, u, v, s, h) / max(1.0, abs(pu) + abs(pv))
            worst_gap = max(worst_gap, gap)
    elapsed = time.perf_counter() - t0
    ok = worst <= 0 and worst_gap <= 1e-12 and elapsed < 30
    _record("AC-7", ok, f"C0={C0:.3g} C1={C1:.3g} max(X-bound)={worst:.3g} "
                        f"max rel gap={worst_gap:.2e} time={elapsed:.1f}s")


def test_ac8_subdifferential_residual(default_cfg):
    default_cfg["solver"]["steps"] = 200
    rc = cfgmod.build_run_config(default_cfg)
    t0 = time.perf_counter()
    fp = fixed_point_solve(rc.model, rc.grid, rc.stepper, rc.steps)
    path, u, dt = fp.path, fp.u, rc.stepper.dt
    dy = rc.grid.dy
    boundary, interior = 0.0, 0.0
    for n in range(1, rc.steps + 1):
        z = ap_subgradient(rc.model, u[n], u[n - 1], path.s[n], path.s_t[n - 1], dt)
        res = subdiff_residual(rc.model, u[n], path.s[n], float(rc.model.h(path.t[n])), z)
        boundary = max(boundary, res.left, res.right)
        interior = max(interior, res.interior / max(res.scale, 1e-300))
    elapsed = time.perf_counter() - t0
    tol = 10 * rc.stepper.picard_tol
    ok = boundary <= tol and interior <= dy**2 and elapsed < 30
    _record("AC-8", ok, f"boundary={boundary:.2e} <= {tol:.0e} interior/|z|={interior:.2e} "
                        f"<= dy^2={dy**2:.2e} time={elapsed:.1f}s")
