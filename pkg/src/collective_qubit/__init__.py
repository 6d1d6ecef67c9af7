"""Models for coupling single-atom qubits to N-atom collective qubits.

Modules: ``geometry`` (cloud and optics), ``readout`` (photon counting),
``dynamics`` (single-photon absorption), ``emission`` (sampled far-field
check of directed emission), ``states`` and ``protocol`` (density-operator
transmission), ``cli``.
"""

from .errors import ConfigError, NumericalError, QuadratureError, UnattainableError
from .geometry import DerivedGeometry, TrapConfig, derive_geometry
from .states import CollectiveQubitState, DensityOperator, SingleQubitState

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "NumericalError", "QuadratureError", "UnattainableError",
    "DerivedGeometry", "TrapConfig", "derive_geometry",
    "CollectiveQubitState", "DensityOperator", "SingleQubitState",
]
