"""Exception hierarchy shared by the solver modules."""

from __future__ import annotations


class PoreSwellError(Exception):
    """Base class for all package errors."""


class ValidationError(PoreSwellError, ValueError):
    """Raised when model inputs violate one or more standing assumptions.

    All violations are collected before raising, so ``violations`` lists
    every failed predicate rather than only the first one.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "\n".join(f"  {v}" for v in self.violations)
        super().__init__(f"{len(self.violations)} assumption violation(s):\n{lines}")

    @property
    def codes(self):
        return sorted({v.code for v in self.violations})


class OutsideDomain(PoreSwellError, ValueError):
    """A physical coordinate lies outside ``[a, s]`` or a reference one outside ``[0, 1]``."""


class SolverError(PoreSwellError, RuntimeError):
    """Base class for guards tripped while time stepping or iterating."""


class DegenerateFront(SolverError):
    """The front came too close to the pore mouth (``s - a`` below the guard)."""


class PicardDivergence(SolverError):
    """The inner boundary iteration did not reach its tolerance."""


class NoConvergence(SolverError):
    """The outer fixed-point iteration did not reach its tolerance."""


class GuardTripped(SolverError):
    """A front path left the admissible set (W^{1,2} ball or position bounds)."""


class MismatchedGrids(PoreSwellError, ValueError):
    """Two front paths do not share the same time nodes."""


class BadGuards(PoreSwellError, ValueError):
    """Guard constants passed to the coercivity computation are inconsistent."""
