import dataclasses
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qubitmech.core import (
    CONVENTION,
    FluxoniumParams,
    TransmonParams,
    ZeroPiParams,
    physical_fields,
    validate,
)
from qubitmech.errors import NonFinite, NonPositiveEnergy

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)
positive = st.floats(min_value=1e-3, max_value=1e3)


def test_transmon_offset_charge_wraps():
    p = validate(TransmonParams(e_c=1, e_j=50, n_g=1.25, phi_ext=0))
    assert p.n_g == pytest.approx(0.25)
    assert p == TransmonParams(1.0, 50.0, 0.25, 0.0)


def test_raw_input_kept_for_reporting():
    p = validate(TransmonParams(e_c=1, e_j=50, n_g=1.25, phi_ext=-1.0))
    assert p.raw == {"e_c": 1.0, "e_j": 50.0, "n_g": 1.25, "phi_ext": -1.0}
    assert p.phi_ext == pytest.approx(2 * math.pi - 1.0)


def test_fluxonium_negative_inductive_energy():
    with pytest.raises(NonPositiveEnergy, match="e_l"):
        validate(FluxoniumParams(e_c=1, e_l=-1, e_j=10, phi_ext=math.pi))


def test_zeropi_flux_wraps():
    p = validate(ZeroPiParams(1, 1, 10, 0.05, 2 * math.pi + 0.1))
    assert p.phi_ext == pytest.approx(0.1, abs=1e-14)


@pytest.mark.parametrize(
    "params",
    [
        TransmonParams(0.0, 1.0),
        TransmonParams(1.0, -0.1),
        FluxoniumParams(1.0, 0.0, 1.0),
        ZeroPiParams(1.0, -2.0, 1.0, 0.1),
        ZeroPiParams(1.0, 1.0, 1.0, 0.0),
    ],
)
def test_non_positive_energies_rejected(params):
    with pytest.raises(NonPositiveEnergy):
        validate(params)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_rejected(bad):
    with pytest.raises(NonFinite):
        validate(TransmonParams(1.0, 1.0, bad))
    with pytest.raises(NonFinite):
        validate(FluxoniumParams(1.0, 1.0, 1.0, bad))


def test_zero_josephson_energy_allowed():
    assert validate(TransmonParams(1.0, 0.0)).e_j == 0.0


@given(positive, positive, finite, finite)
def test_validate_is_idempotent(e_c, e_j, n_g, phi_ext):
    once = validate(TransmonParams(e_c, e_j, n_g, phi_ext))
    twice = validate(once)
    assert twice == once
    assert twice.raw == once.raw
    assert 0.0 <= once.n_g < 1.0
    assert 0.0 <= once.phi_ext < 2 * math.pi


@given(positive, positive, positive, finite)
def test_fluxonium_canonical_range(e_c, e_l, e_j, phi_ext):
    p = validate(FluxoniumParams(e_c, e_l, e_j, phi_ext))
    assert 0.0 <= p.phi_ext < 2 * math.pi
    assert math.isclose(math.cos(p.phi_ext), math.cos(phi_ext), abs_tol=1e-9)


def test_tiny_negative_offset_wraps_inside_range():
    p = validate(TransmonParams(1.0, 1.0, -1e-18))
    assert 0.0 <= p.n_g < 1.0


def test_params_are_immutable():
    p = TransmonParams(1.0, 2.0)
    with pytest.raises(dataclasses.FrozenInstanceError):
        p.e_c = 3.0


def test_energy_convention():
    assert CONVENTION.energy_unit == "GHz"
    assert CONVENTION.frequency(2.5) == 2.5


def test_physical_fields_skip_raw():
    assert physical_fields(validate(ZeroPiParams(1, 2, 3, 4, 5))) == {
        "e_c_phi": 1.0, "e_c_theta": 2.0, "e_j": 3.0, "e_l": 4.0, "phi_ext": 5.0,
    }
