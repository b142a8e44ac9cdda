import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poreswell.errors import DegenerateFront, OutsideDomain
from poreswell.transform import (ReferenceGrid, advection_coeff, diffusion_coeff, from_reference,
                                 to_reference)


def test_reference_examples():
    assert to_reference(1.0, 2.0, 1.0) == 0.0
    assert to_reference(2.0, 2.0, 1.0) == 1.0
    assert to_reference(1.5, 2.0, 1.0) == 0.5
    assert from_reference(0.0, 2.0, 1.0) == 1.0
    assert from_reference(1.0, 2.0, 1.0) == 2.0
    assert from_reference(0.5, 2.0, 1.0) == 1.5


def test_reference_errors():
    with pytest.raises(OutsideDomain):
        to_reference(2.5, 2.0, 1.0)
    with pytest.raises(OutsideDomain):
        from_reference(-0.1, 2.0, 1.0)
    with pytest.raises(DegenerateFront):
        to_reference(1.0, 1.0, 1.0)
    with pytest.raises(DegenerateFront):
        diffusion_coeff(1.0, 0.9, 1.0)


def test_coefficient_examples():
    assert diffusion_coeff(1.0, 2.0, 1.0) == 1.0
    assert diffusion_coeff(1.0, 3.0, 1.0) == 0.25
    assert advection_coeff(0.0, 2.0, 0.7, 1.0) == 0.0
    assert advection_coeff(0.6, 2.0, 0.0, 1.0) == 0.0
    assert advection_coeff(1.0, 3.0, 0.2, 1.0) == pytest.approx(0.1)


def test_grid():
    g = ReferenceGrid(8)
    assert g.y[0] == 0.0 and g.y[-1] == 1.0
    assert g.trapezoid_weights.sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ReferenceGrid(3)


fronts = st.tuples(st.floats(0.01, 10), st.floats(1e-3, 10)).map(lambda p: (p[0], p[0] + p[1]))


@given(y=st.floats(0, 1), front=fronts)
def test_round_trip(y, front):
    a, s = front
    z = from_reference(y, s, a)
    assert to_reference(z, s, a) == pytest.approx(y, rel=1e-14, abs=1e-14 * s / (s - a))


@given(y=st.floats(0, 1), c=st.floats(0, 1), s_t=st.floats(-5, 5), front=fronts)
def test_advection_linear_in_y_and_speed(y, c, s_t, front):
    a, s = front
    base = advection_coeff(y, s, s_t, a)
    assert advection_coeff(y, s, c * s_t, a) == pytest.approx(c * base, rel=1e-12, abs=1e-300)
    assert advection_coeff(c * y, s, s_t, a) == pytest.approx(c * base, rel=1e-12, abs=1e-300)


@given(k=st.floats(0.01, 10), front=fronts, dz=st.floats(1e-3, 5))
def test_diffusion_strictly_decreasing(k, front, dz):
    a, s = front
    assert diffusion_coeff(k, s + dz, a) < diffusion_coeff(k, s, a)
