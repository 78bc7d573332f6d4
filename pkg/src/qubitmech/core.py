"""Circuit parameter types, the unit convention and validation.

Energy convention
-----------------
Every energy is E/h expressed in GHz and hbar is set to 1.  A transition
energy E_10 is therefore numerically equal to the transition frequency f_10
in GHz, and no factors of 2*pi appear anywhere in the package.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Union

from .errors import NonFinite, NonPositiveEnergy

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EnergyConvention:
    """Documents the unit system: E/h in GHz with hbar = 1.

    Under this convention ``f10 == E1 - E0`` and mechanical inertias carry
    units of 1/GHz.  To reinstate SI units multiply energies by ``h * 1e9``
    and replace ``hbar = 1`` by ``hbar = h / (2 pi)``.
    """

    energy_unit: str = "GHz"
    hbar: float = 1.0

    def frequency(self, energy: float) -> float:
        return energy / self.hbar


CONVENTION = EnergyConvention()


@dataclass(frozen=True)
class TransmonParams:
    """Capacitively shunted junction: 4 E_C (n - n_g)^2 + E_j (1 - cos(phi - phi_ext))."""

    e_c: float
    e_j: float
    n_g: float = 0.0
    phi_ext: float = 0.0
    raw: dict | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FluxoniumParams:
    """Inductively shunted junction.

    ``e_l`` is E_L = Phi_0^2 / L; the potential is
    E_L phi^2 / 2 + E_j (1 - cos(phi - phi_ext)).
    """

    e_c: float
    e_l: float
    e_j: float
    phi_ext: float = 0.0
    raw: dict | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ZeroPiParams:
    """Reduced two-dimensional 0-pi circuit.

    ``e_l`` multiplies phi^2 directly and the kinetic coefficients multiply
    n_phi^2 and n_theta^2 without a factor of 4.
    """

    e_c_phi: float
    e_c_theta: float
    e_j: float
    e_l: float
    phi_ext: float = 0.0
    raw: dict | None = field(default=None, compare=False, repr=False)


CircuitParams = Union[TransmonParams, FluxoniumParams, ZeroPiParams]

_STRICTLY_POSITIVE = {
    TransmonParams: ("e_c",),
    FluxoniumParams: ("e_c", "e_l"),
    ZeroPiParams: ("e_c_phi", "e_c_theta", "e_l"),
}

CIRCUITS = {
    "transmon": TransmonParams,
    "fluxonium": FluxoniumParams,
    "zeropi": ZeroPiParams,
}


def circuit_name(params: CircuitParams) -> str:
    for name, cls in CIRCUITS.items():
        if isinstance(params, cls):
            return name
    raise TypeError(f"not a circuit parameter set: {type(params).__name__}")


def physical_fields(params: CircuitParams) -> dict:
    """Field values without the ``raw`` bookkeeping entry."""
    return {f.name: getattr(params, f.name) for f in dataclasses.fields(params) if f.name != "raw"}


def _wrap(value: float, period: float) -> float:
    wrapped = math.fmod(value, period)
    if wrapped < 0.0:
        wrapped += period
    # fmod of a tiny negative number can round up to exactly one period
    if wrapped >= period:
        wrapped = 0.0
    return wrapped


def validate(params: CircuitParams) -> CircuitParams:
    """Check a parameter set and return its canonical form.

    ``n_g`` is reduced to [0, 1) and ``phi_ext`` to [0, 2 pi).  The values
    originally supplied are kept in ``raw`` for reporting; validating an
    already validated set leaves ``raw`` untouched.

    Raises
    ------
    NonFinite
        If any field is NaN or infinite.
    NonPositiveEnergy
        If a charging or inductive energy is not strictly positive, or
        ``e_j`` is negative.
    """
    if type(params) not in _STRICTLY_POSITIVE:
        raise TypeError(f"not a circuit parameter set: {type(params).__name__}")
    values = physical_fields(params)
    for name, value in values.items():
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise NonFinite(f"{name} must be a real number, got {value!r}") from None
        if not math.isfinite(value):
            raise NonFinite(f"{name} must be finite, got {value!r}")
        values[name] = value
    for name in _STRICTLY_POSITIVE[type(params)]:
        if values[name] <= 0.0:
            raise NonPositiveEnergy(f"{name} must be > 0, got {values[name]!r}")
    if values["e_j"] < 0.0:
        raise NonPositiveEnergy(f"e_j must be >= 0, got {values['e_j']!r}")

    raw = params.raw if params.raw is not None else dict(values)
    if "n_g" in values:
        values["n_g"] = _wrap(values["n_g"], 1.0)
    values["phi_ext"] = _wrap(values["phi_ext"], TWO_PI)
    return type(params)(**values, raw=raw)
