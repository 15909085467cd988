import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tract_eroder.propagation import (
    SetbackError,
    SetbackSpec,
    fspl_db,
    fspl_distance,
    required_path_loss,
    setback_for_deployment,
)


@pytest.mark.parametrize(
    "cls, loss",
    [("outdoor", 110.0), ("indoor_residential", 100.0), ("indoor_commercial", 90.0)],
)
def test_required_path_loss_table(cls, loss):
    assert required_path_loss(SetbackSpec.for_class(cls)) == loss


@pytest.mark.parametrize(
    "loss, expected, tol",
    [(110.0, 2100.0, 5.0), (100.0, 663.0, 2.0), (90.0, 210.0, 1.0)],
)
def test_fspl_distance_table(loss, expected, tol):
    assert fspl_distance(loss, 3600.0) == pytest.approx(expected, abs=tol)


@pytest.mark.parametrize(
    "cls, expected, tol",
    [("outdoor", 2100.0, 5.0), ("indoor-residential", 663.0, 2.0), ("indoor_commercial", 210.0, 1.0)],
)
def test_setback_for_deployment(cls, expected, tol):
    assert setback_for_deployment(cls) == pytest.approx(expected, abs=tol)


def test_custom_spec_is_accepted():
    spec = SetbackSpec(deployment_class="custom", building_loss_db=0.0)
    assert setback_for_deployment(spec) == pytest.approx(setback_for_deployment("outdoor"))


def test_zero_path_loss_rejected():
    with pytest.raises(SetbackError):
        required_path_loss(SetbackSpec(eirp_dbm=30, boundary_limit_dbm=30))


def test_invalid_specs_rejected():
    with pytest.raises(SetbackError):
        SetbackSpec(freq_mhz=0)
    with pytest.raises(SetbackError):
        SetbackSpec(building_loss_db=-1)
    with pytest.raises(SetbackError):
        SetbackSpec.for_class("underground")


def test_fspl_round_trip():
    d = fspl_distance(97.3, 3550.0)
    assert fspl_db(d, 3550.0) == pytest.approx(97.3, abs=1e-9)


losses = st.floats(min_value=1.0, max_value=200.0)
freqs = st.floats(min_value=100.0, max_value=10000.0)


@given(losses, freqs)
def test_plus_20_db_is_ten_times_distance(loss, freq):
    assert fspl_distance(loss + 20.0, freq) == pytest.approx(10 * fspl_distance(loss, freq), rel=1e-12)


@given(losses, st.floats(min_value=0.01, max_value=20.0), freqs)
def test_monotone_in_loss(loss, extra, freq):
    assert fspl_distance(loss + extra, freq) > fspl_distance(loss, freq)


@given(losses, freqs, st.floats(min_value=1.0, max_value=1000.0))
def test_monotone_in_frequency(loss, freq, extra):
    assert fspl_distance(loss, freq + extra) < fspl_distance(loss, freq)


def test_formula_constant():
    # 32.44 dB at 1 km and 1 MHz
    assert fspl_db(1000.0, 1.0) == pytest.approx(32.44)
    assert math.isclose(fspl_distance(32.44, 1.0), 1000.0)
