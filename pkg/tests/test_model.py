import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poreswell import config as cfgmod
from poreswell.errors import ValidationError
from poreswell.model import (BoundarySignal, ConstitutiveSpec, InitialData, PhysicalParams,
                             RationalSigmoid, TabulatedLaw, beta_eval, phi_eval, sigma_eval,
                             validate)

reals = st.floats(-50, 50, allow_nan=False)


def test_default_config_is_valid(default_model):
    m = default_model
    assert m.phi_a == pytest.approx(0.25)
    assert m.h_sup == 1.0
    assert m.u_max == 1.0
    # sup + sup' of the rational sigmoid, 3 sqrt(3)/8 * height / scale
    assert m.c_beta == pytest.approx(0.5 + 3 * math.sqrt(3) / 16)
    assert m.c_phi == pytest.approx(0.5 + 3 * math.sqrt(3) / 16)


def test_u0_below_phi_a_violates_a5(default_cfg):
    default_cfg["initial"]["u0"] = 0.1
    with pytest.raises(ValidationError) as exc:
        cfgmod.build_model(default_cfg)
    assert exc.value.codes == ["ViolatesA5"]
    assert "initial.u0" in str(exc.value)


def test_phi_max_above_h_over_H_violates_a4(default_cfg):
    default_cfg["constitutive"]["phi_max"] = 2.0
    # keep u0 inside [phi(a), |h|/H] so only the phi bound trips
    default_cfg["initial"]["u0"] = 1.0
    with pytest.raises(ValidationError) as exc:
        cfgmod.build_model(default_cfg)
    assert exc.value.codes == ["ViolatesA4"]


def test_all_violations_are_collected(default_cfg):
    default_cfg["physical"]["k"] = -1.0
    default_cfg["boundary"]["h"] = -0.5
    default_cfg["constitutive"]["r_phi"] = 3.0
    default_cfg["initial"]["s0"] = 0.5
    with pytest.raises(ValidationError) as exc:
        cfgmod.build_model(default_cfg)
    assert {"ViolatesA1", "ViolatesA2", "ViolatesA4", "ViolatesA5"} <= set(exc.value.codes)


def test_r_phi_larger_than_a_is_rejected(default_cfg):
    default_cfg["constitutive"]["r_phi"] = 1.5
    with pytest.raises(ValidationError) as exc:
        cfgmod.build_model(default_cfg)
    assert any(v.field == "constitutive.r_phi" for v in exc.value.violations)


def test_h_knots_must_cover_horizon(default_cfg):
    default_cfg["boundary"]["h"] = [[0.0, 1.0], [0.5, 1.0]]
    with pytest.raises(ValidationError) as exc:
        cfgmod.build_model(default_cfg)
    assert exc.value.codes == ["ViolatesA2"]


def test_beta_examples():
    assert beta_eval(-1.0, 0.5) == 0.0
    assert beta_eval(0.0, 0.5) == 0.0
    assert beta_eval(1.0, 0.5) == pytest.approx(0.25)


def test_phi_examples():
    assert phi_eval(-2.0, 0.5, 1.0) == 0.0
    assert phi_eval(1.0, 0.5, 1.0) == pytest.approx(0.25)
    assert phi_eval(1e8, 0.5, 1.0) == pytest.approx(0.5, rel=1e-12)


def test_sigma_examples():
    assert sigma_eval(0.3, 0.5) == 0.5
    assert sigma_eval(0.7, 0.5) == 0.7
    assert sigma_eval(0.5, 0.5) == 0.5


def test_rational_sup_derivative_matches_dense_sampling():
    law = RationalSigmoid(0.7, 1.3)
    r = np.linspace(0, 10, 200_001)
    assert law.sup_derivative == pytest.approx(law.derivative(r).max(), rel=1e-8)


def test_tabulated_law_properties():
    law = TabulatedLaw([0, 1, 2, 3], [0, 0.4, 0.5, 0.5])
    assert law(-1.0) == 0.0
    assert law(0.0) == 0.0
    assert law(2.5) == 0.5
    assert law(10.0) == 0.5
    assert law.derivative(0.0) == 0.0
    assert abs(law.end_slope) < 1e-12
    r = np.linspace(0, 3, 1001)
    assert np.all(np.diff(law(r)) >= -1e-15)


def test_tabulated_law_with_nonzero_end_slope_is_rejected(default_cfg):
    default_cfg["constitutive"]["phi_table"] = [[0, 0], [1, 0.3], [2, 0.5]]
    with pytest.raises(ValidationError) as exc:
        cfgmod.build_model(default_cfg)
    assert any("slope at last knot" in v.message for v in exc.value.violations)


def test_boundary_signal_interpolates_linearly():
    h = BoundarySignal.from_spec([[0, 0], [1, 2]])
    assert h(0.25) == pytest.approx(0.5)
    assert h.sup_norm == 2.0
    assert BoundarySignal.from_spec(0.7)(np.array([0, 5])).tolist() == [0.7, 0.7]


def test_initial_profile_interpolates_samples():
    init = InitialData.from_spec(2.0, [0.3, 0.5, 0.4])
    assert init.reference_profile(0.25) == pytest.approx(0.4)
    assert init.reference_profile(1.0) == pytest.approx(0.4)


LAWS = [RationalSigmoid(0.5, 1.0), RationalSigmoid(2.0, 0.3),
        TabulatedLaw([0, 1, 2, 3], [0, 0.4, 0.5, 0.5])]


@pytest.mark.parametrize("law", LAWS, ids=repr)
@given(r=st.floats(-100, 0))
def test_laws_vanish_on_nonpositive_axis(law, r):
    assert law(r) == 0.0


@pytest.mark.parametrize("law", LAWS, ids=repr)
@given(r1=reals, r2=reals)
def test_laws_are_monotone(law, r1, r2):
    lo, hi = min(r1, r2), max(r1, r2)
    assert law(lo) <= law(hi) + 1e-15


@given(r1=reals, r2=reals, pa=st.floats(0, 5))
def test_sigma_monotone_and_bounded_below(r1, r2, pa):
    lo, hi = min(r1, r2), max(r1, r2)
    assert sigma_eval(lo, pa) <= sigma_eval(hi, pa)
    assert sigma_eval(r1, pa) >= pa


@pytest.mark.parametrize("law", LAWS, ids=repr)
def test_laws_are_c1_at_origin(law):
    steps = 10.0 ** -np.arange(1, 8)
    slopes = np.array([(law(h) - law(-h)) / (2 * h) for h in steps])
    assert np.all(np.diff(np.abs(slopes)) <= 1e-15)
    # the one-sided slope is O(h) for both families
    assert abs(slopes[-1]) < 100 * steps[-1]


# one field at a time, with the predicate the perturbation should break
PERTURBATIONS = [
    ("physical", "a", -0.5, "ViolatesA1"),
    ("physical", "a0", 0.0, "ViolatesA1"),
    ("physical", "H", -1.0, "ViolatesA1"),
    ("physical", "k", 0.0, "ViolatesA1"),
    ("physical", "T", -2.0, "ViolatesA1"),
    ("boundary", "h", -0.1, "ViolatesA2"),
    ("constitutive", "beta_max", -1.0, "ViolatesA3"),
    ("constitutive", "phi_max", 0.0, "ViolatesA4"),
    ("initial", "s0", 0.5, "ViolatesA5"),
    ("initial", "u0", 5.0, "ViolatesA5"),
]


@given(seed=st.integers(0, 2**31 - 1), which=st.integers(0, len(PERTURBATIONS) - 1))
def test_validate_flags_the_perturbed_predicate(seed, which):
    cfg = cfgmod.random_config(np.random.default_rng(seed))
    cfgmod.build_model(cfg)
    section, key, value, code = PERTURBATIONS[which]
    cfg[section][key] = value
    with pytest.raises(ValidationError) as exc:
        cfgmod.build_model(cfg)
    assert code in exc.value.codes


@given(seed=st.integers(0, 2**31 - 1))
def test_random_configs_are_valid(seed):
    model = cfgmod.build_model(cfgmod.random_config(np.random.default_rng(seed)))
    assert model.constitutive.phi.sup <= min(2 * model.phi_a, model.u_max) * (1 + 1e-12)


def test_validate_accepts_tables_directly():
    params = PhysicalParams(1.0, 1.0, 1.0, 1.0, 1.0)
    cons = ConstitutiveSpec(RationalSigmoid(0.5, 1.0), TabulatedLaw([0, 1, 2, 3], [0, 0.4, 0.5, 0.5]))
    model = validate(params, cons, BoundarySignal.constant(0.5), InitialData.from_spec(2.5, 0.5))
    assert model.phi_a == pytest.approx(0.4)
