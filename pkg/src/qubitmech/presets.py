"""Documented parameter sets used by the shipped configs and the acceptance suite.

The default fluxonium values are chosen to show the qualitative
features of a flux sweep (double well at half flux quantum, localized
states away from it); they are not taken from any measured device.
"""

from .core import FluxoniumParams, ZeroPiParams
from .operators import BoundedGrid, PeriodicGrid, ProductBasis

FLUXONIUM_DEFAULT = FluxoniumParams(e_c=1.0, e_l=0.5, e_j=8.0)

# Light phi, heavy theta, weak inductive envelope: the ground pair sits in
# opposite theta wells and tunnels only along phi.
ZEROPI_PROTECTED = ZeroPiParams(e_c_phi=40.0, e_c_theta=0.08, e_j=10.0, e_l=0.02, phi_ext=0.0)
ZEROPI_PROTECTED_BASIS = ProductBasis(PeriodicGrid(64), BoundedGrid(25.0, 350))
# Coarse grid small enough for a dense solve; used as an independent oracle.
ZEROPI_COARSE_BASIS = ProductBasis(PeriodicGrid(32), BoundedGrid(25.0, 120))
