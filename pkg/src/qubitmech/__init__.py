"""Numerical spectra of superconducting qubit circuits and their mechanical analogs."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    CONVENTION,
    EnergyConvention,
    FluxoniumParams,
    TransmonParams,
    ZeroPiParams,
    validate,
)
from .eigensolve import Spectrum, degeneracy_groups, lowest_eigenpairs  # noqa: E402
from .operators import (  # noqa: E402
    BoundedGrid,
    ChargeBasis,
    HermitianOperator,
    PeriodicGrid,
    ProductBasis,
    fluxonium_hamiltonian,
    observable_operator,
    transmon_charge_hamiltonian,
    transmon_twisted_grid_hamiltonian,
    zeropi_hamiltonian,
)

__all__ = [
    "CONVENTION",
    "EnergyConvention",
    "FluxoniumParams",
    "TransmonParams",
    "ZeroPiParams",
    "validate",
    "Spectrum",
    "degeneracy_groups",
    "lowest_eigenpairs",
    "BoundedGrid",
    "ChargeBasis",
    "HermitianOperator",
    "PeriodicGrid",
    "ProductBasis",
    "fluxonium_hamiltonian",
    "observable_operator",
    "transmon_charge_hamiltonian",
    "transmon_twisted_grid_hamiltonian",
    "zeropi_hamiltonian",
]
