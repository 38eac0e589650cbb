import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bms_rare.criticality import (CriticalitySpec, Dimension, ParamSpace, denormalize, is_critical,
                                  kappa_combine, kappa_temp, kappa_time)
from bms_rare.errors import ConfigError
from bms_rare.objective import Objective

SPACE = ParamSpace()


@pytest.mark.parametrize("u, phys", [((0, 0), (-5, 10)), ((1, 1), (40, 100)), ((0.5, 0.5), (17.5, 55))])
def test_denormalize_corners(u, phys):
    assert denormalize(u, SPACE) == pytest.approx(phys)


def test_denormalize_rejects_outside():
    with pytest.raises(ValueError):
        denormalize((1.01, 0.5), SPACE)
    with pytest.raises(ValueError):
        denormalize((0.5,), SPACE)


def test_space_validation():
    with pytest.raises(ConfigError, match="space.x"):
        ParamSpace((Dimension("x", 1.0, 1.0),))


def test_kappa_time_examples():
    assert kappa_time(7.2) == pytest.approx(0.8, abs=1e-12)
    assert kappa_time(0.0) == 0.0
    assert kappa_time(10.0) == 1.0
    assert kappa_time(9.0) == 1.0


def test_kappa_temp_examples():
    assert kappa_temp(63.75) == 1.0
    assert kappa_temp(-5.0) == 0.0
    assert kappa_temp(50.0) == pytest.approx(0.8, abs=1e-12)
    # the 51 degC requirement sits above the threshold under the printed formula
    assert kappa_temp(51.0) == pytest.approx(56 / 68.75)
    assert kappa_temp(-40.0) == 0.0
    assert kappa_temp(200.0) == 1.0


def test_combine_examples():
    assert kappa_combine(0.3, 0.9) == 0.9
    assert kappa_combine(0.8, 0.8) == 0.8
    assert kappa_combine(kappa_time(7.2), kappa_temp(-5.0)) == pytest.approx(0.8)


def test_is_critical_inclusive():
    assert is_critical(0.8)
    assert not is_critical(0.79999)
    assert is_critical(1.0)


@given(a=st.floats(-10, 20), b=st.floats(-10, 20))
def test_kappa_time_monotone(a, b):
    lo, hi = sorted((a, b))
    assert kappa_time(lo) <= kappa_time(hi)
    assert 0.0 <= kappa_time(a) <= 1.0


@given(a=st.floats(-273.15, 200), b=st.floats(-273.15, 200))
def test_kappa_temp_monotone(a, b):
    lo, hi = sorted((a, b))
    assert kappa_temp(lo) <= kappa_temp(hi)
    assert 0.0 <= kappa_temp(a) <= 1.0


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_combine_monotone(a, b, c):
    assert kappa_combine(a, b) <= kappa_combine(max(a, c), b)
    assert kappa_combine(a, b) <= kappa_combine(a, max(b, c))


def test_spec_validation():
    with pytest.raises(ConfigError, match="c_kappa"):
        CriticalitySpec(c_kappa=1.0)
    with pytest.raises(ConfigError, match="t_fatal_h"):
        CriticalitySpec(t_fatal_h=0.0)


# -- objective ---------------------------------------------------------------


def test_objective_examples(objective):
    assert objective((1.0, 1.0)) >= 0.8
    mid = objective((0.5, 0.5))
    assert 0.0 < mid < 0.8
    assert objective((0.5, 0.5)) == mid


@settings(max_examples=200, deadline=None)
@given(u0=st.floats(0, 1), u1=st.floats(0, 1))
def test_objective_bounded(objective, u0, u1):
    k = objective((u0, u1))
    assert 0.0 <= k <= 1.0


def test_objective_counts_calls():
    obj = Objective()
    obj((0.1, 0.2))
    obj.evaluate_many(np.array([[0.0, 0.0], [1.0, 1.0]]))
    assert obj.calls == 3


def test_objective_rejects_bad_input():
    with pytest.raises(ValueError):
        Objective().evaluate_many(np.array([[1.5, 0.0]]))
    with pytest.raises(ValueError):
        Objective(engine="gpu")
    with pytest.raises(ValueError):
        Objective(space=ParamSpace((Dimension("t_amb", -5, 40),)))


def test_objective_is_critical(objective):
    assert objective.is_critical(0.8)
    assert not objective.is_critical(0.5)
