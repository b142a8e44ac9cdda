"""Configuration files and built-in presets.

A configuration is a YAML mapping::

    physical:     {a: 1.0, a0: 1.0, H: 1.0, k: 1.0, T: 1.0}
    constitutive: {beta_max: 0.5, phi_max: 0.5, r_phi: 1.0}
    boundary:     {h: 1.0}            # or h: [[t0, h0], [t1, h1], ...]
    initial:      {s0: 2.0, u0: 0.5}  # or u0: [samples on a uniform grid of [a, s0]]
    solver:       {N: 64, steps: 500, picard_tol: 1.0e-10, picard_max: 50, delta_min: null}
    run:          {mode: monolithic, horizon: null, fp_tol: null, fp_max: 60, K: null,
                   verify: true}

``constitutive`` may replace the parametric laws by monotone tables,
``beta_table: [[r, beta], ...]`` and/or ``phi_table: [[r, phi], ...]``, each
starting at ``[0, 0]``. The ``solver`` and ``run`` sections are optional.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .model import (BoundarySignal, ConstitutiveSpec, InitialData, PhysicalParams,
                    RationalSigmoid, TabulatedLaw, ValidatedModel, validate)
from .pde import StepperConfig
from .transform import ReferenceGrid

RUN_MODES = ("monolithic", "gamma")

DEFAULT = {
    "physical": {"a": 1.0, "a0": 1.0, "H": 1.0, "k": 1.0, "T": 1.0},
    "constitutive": {"beta_max": 0.5, "phi_max": 0.5, "r_phi": 1.0},
    "boundary": {"h": 1.0},
    "initial": {"s0": 2.0, "u0": 0.5},
    "solver": {"N": 64, "steps": 500, "picard_tol": 1e-10, "picard_max": 50, "delta_min": None},
    "run": {"mode": "monolithic", "horizon": None, "fp_tol": None, "fp_max": 60, "K": None,
            "verify": True},
}

# phi saturates at 0.5 from r = 2 on, so a front at s0 = 2.5 with u0 = phi(s0)
# and h = H phi(s0) is an exact steady state that still satisfies (A4).
EQUILIBRIUM = {
    "physical": {"a": 1.0, "a0": 1.0, "H": 1.0, "k": 1.0, "T": 1.0},
    "constitutive": {"beta_max": 0.5,
                     "phi_table": [[0.0, 0.0], [1.0, 0.4], [2.0, 0.5], [3.0, 0.5]]},
    "boundary": {"h": 0.5},
    "initial": {"s0": 2.5, "u0": 0.5},
    "solver": {"N": 64, "steps": 1000, "picard_tol": 1e-10, "picard_max": 50, "delta_min": None},
    "run": {"mode": "monolithic", "horizon": None, "fp_tol": None, "fp_max": 60, "K": None,
            "verify": True},
}

PRESETS = {"default": DEFAULT, "equilibrium": EQUILIBRIUM}


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to launch one solve."""

    model: ValidatedModel
    grid: ReferenceGrid
    stepper: StepperConfig
    steps: int
    mode: str = "monolithic"
    horizon: float = 1.0
    fp_tol: float | None = None
    fp_max: int = 60
    K: float | None = None
    verify: bool = True
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in RUN_MODES:
            raise ValueError(f"mode must be one of {RUN_MODES}, got {self.mode!r}")
        if self.horizon > self.model.params.T * (1 + 1e-12):
            raise ValueError(f"horizon {self.horizon} exceeds model T={self.model.params.T}")

    @property
    def fp_tolerance(self) -> float:
        return 1e-8 * np.sqrt(self.horizon) if self.fp_tol is None else self.fp_tol


def preset(name: str) -> dict:
    return copy.deepcopy(PRESETS[name])


def random_config(rng: np.random.Generator, steps: int = 500, N: int = 64) -> dict:
    """A random configuration satisfying (A1)-(A5) by construction."""
    a = rng.uniform(0.5, 2.0)
    H = rng.uniform(0.5, 2.0)
    k = rng.uniform(0.2, 2.0)
    a0 = rng.uniform(0.2, 2.0)
    T = rng.uniform(0.2, 1.0)
    r_phi = a * rng.uniform(0.3, 1.0)
    # pick |h|_inf first, then keep sup phi below |h|_inf / H
    u_max = rng.uniform(0.3, 1.5)
    phi_max = u_max * rng.uniform(0.3, 1.0)
    knots_t = np.linspace(0.0, T, rng.integers(2, 6))
    h_vals = H * u_max * rng.uniform(0.0, 1.0, knots_t.size)
    h_vals[rng.integers(knots_t.size)] = H * u_max
    phi_a = phi_max * a * a / (a * a + r_phi * r_phi)
    # the front can recede at most a0 * phi_max / 2 per unit time
    s0 = a + 0.2 + a0 * phi_max * T + rng.uniform(0.0, 1.5)
    n_samples = int(rng.integers(2, 12))
    u0 = rng.uniform(phi_a, u_max, n_samples)
    return {
        "physical": {"a": a, "a0": a0, "H": H, "k": k, "T": T},
        "constitutive": {"beta_max": rng.uniform(0.1, 2.0), "phi_max": phi_max, "r_phi": r_phi},
        "boundary": {"h": [[float(t), float(v)] for t, v in zip(knots_t, h_vals)]},
        "initial": {"s0": s0, "u0": [float(x) for x in u0]},
        "solver": {"N": N, "steps": steps, "picard_tol": 1e-10, "picard_max": 50, "delta_min": None},
        "run": {"mode": "monolithic", "horizon": None, "fp_tol": None, "fp_max": 60, "K": None,
                "verify": True},
    }


def _law(section: dict, name: str, default_scale: float | None):
    table = section.get(f"{name}_table")
    if table is not None:
        tab = np.asarray(table, dtype=float)
        return TabulatedLaw(tab[:, 0], tab[:, 1])
    height = float(section[f"{name}_max"])
    scale = default_scale if default_scale is not None else float(section["r_phi"])
    return RationalSigmoid(height, scale)


def build_model(cfg: dict) -> ValidatedModel:
    """Validated model from a configuration mapping (raises ``ValidationError``)."""
    phys = cfg["physical"]
    params = PhysicalParams(*(float(phys[key]) for key in ("a", "a0", "H", "k", "T")))
    cons = cfg["constitutive"]
    constitutive = ConstitutiveSpec(_law(cons, "beta", 1.0), _law(cons, "phi", None))
    boundary = BoundarySignal.from_spec(cfg["boundary"]["h"])
    initial = InitialData.from_spec(cfg["initial"]["s0"], cfg["initial"]["u0"])
    return validate(params, constitutive, boundary, initial)


def build_run_config(cfg: dict, mode: str | None = None) -> RunConfig:
    model = build_model(cfg)
    solver = {**DEFAULT["solver"], **(cfg.get("solver") or {})}
    run = {**DEFAULT["run"], **(cfg.get("run") or {})}
    horizon = model.params.T if run["horizon"] is None else float(run["horizon"])
    steps = int(solver["steps"])
    stepper = StepperConfig(dt=horizon / steps, picard_tol=float(solver["picard_tol"]),
                            picard_max=int(solver["picard_max"]), delta_min=solver["delta_min"])
    return RunConfig(
        model=model,
        grid=ReferenceGrid(int(solver["N"])),
        stepper=stepper,
        steps=steps,
        mode=mode or run["mode"],
        horizon=horizon,
        fp_tol=run["fp_tol"],
        fp_max=int(run["fp_max"]),
        K=run["K"],
        verify=bool(run["verify"]),
        raw=cfg,
    )


def load(source) -> dict:
    """Read a YAML file, or return a copy of a preset when given its name."""
    if isinstance(source, dict):
        return copy.deepcopy(source)
    if str(source) in PRESETS:
        return preset(str(source))
    with open(source) as fh:
        cfg = yaml.safe_load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"{source}: expected a mapping at top level")
    return cfg


def dump(cfg: dict, path) -> None:
    Path(path).write_text(yaml.safe_dump(_plain(cfg), sort_keys=False))


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def set_param(cfg: dict, param: str, value) -> dict:
    """Copy of ``cfg`` with a dotted (``physical.a0``) or bare (``a0``) key replaced."""
    out = copy.deepcopy(cfg)
    if "." in param:
        section, key = param.split(".", 1)
        out.setdefault(section, {})[key] = value
        return out
    for section in ("physical", "constitutive", "boundary", "initial", "solver", "run"):
        if param in out.get(section, {}):
            out[section][param] = value
            return out
    raise KeyError(f"unknown parameter {param!r}")

