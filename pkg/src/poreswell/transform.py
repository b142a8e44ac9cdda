"""Front-fixing change of variables ``y = (z - a) / (s - a)``.

Maps the moving wet region ``[a, s(t)]`` onto the fixed interval ``[0, 1]``.
In the reference variable the diffusion equation picks up a time-dependent
diffusivity ``k / (s - a)**2`` and an advection term with speed
``y s_t / (s - a)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFront, OutsideDomain

_EDGE_TOL = 1e-14


@dataclass(frozen=True)
class ReferenceGrid:
    """Uniform grid ``y_i = i / N`` on ``[0, 1]`` with ``N`` cells."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 4:
            raise ValueError(f"reference grid needs an integer N >= 4, got {self.N}")

    @property
    def dy(self) -> float:
        return 1.0 / self.N

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.N + 1) / self.N

    @property
    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.N + 1, self.dy)
        w[0] = w[-1] = 0.5 * self.dy
        return w


def _check_front(s, a):
    if not np.all(np.asarray(s) > a):
        raise DegenerateFront(f"front s={s} must lie strictly above a={a}")


def to_reference(z, s, a):
    """Physical coordinate ``z`` in ``[a, s]`` to reference ``y`` in ``[0, 1]``."""
    _check_front(s, a)
    z = np.asarray(z, dtype=float)
    span = np.asarray(s, dtype=float) - a
    tol = _EDGE_TOL * np.maximum(1.0, np.abs(s))
    if np.any(z < a - tol) or np.any(z > s + tol):
        raise OutsideDomain(f"z must lie in [a={a}, s={s}]")
    y = np.clip((z - a) / span, 0.0, 1.0)
    return float(y) if y.ndim == 0 else y


def from_reference(y, s, a):
    """Reference ``y`` in ``[0, 1]`` back to ``z = (1 - y) a + y s``."""
    _check_front(s, a)
    y = np.asarray(y, dtype=float)
    if np.any(y < -_EDGE_TOL) or np.any(y > 1.0 + _EDGE_TOL):
        raise OutsideDomain("y must lie in [0, 1]")
    z = (1.0 - y) * a + y * np.asarray(s, dtype=float)
    return float(z) if z.ndim == 0 else z


def diffusion_coeff(k: float, s: float, a: float) -> float:
    """Reference diffusivity ``k / (s - a)**2``."""
    _check_front(s, a)
    return k / (s - a) ** 2


def advection_coeff(y, s: float, s_t: float, a: float):
    """Reference advection speed ``y s_t / (s - a)``."""
    _check_front(s, a)
    out = np.asarray(y, dtype=float) * s_t / (s - a)
    return float(out) if out.ndim == 0 else out
