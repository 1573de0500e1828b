"""Entangling Gaussian states with beam splitters and phase shifters."""

from .core import (
    CovarianceMatrix,
    PassiveTransform,
    apply_passive,
    complexify,
    direct_sum,
    make_state,
    passive_from_unitary,
    realify,
    simon_form,
    squeezed,
    squeezing_report,
    symplectic_form,
    thermal,
    two_mode_squeezed,
    vacuum,
    validate,
)
from .entanglement import (
    ModePartition,
    entanglement_report,
    partial_transpose,
    symplectic_spectrum,
)
from .errors import GaussianError, NumericalDomainError, StructuralError, ValidityError
from .power import (
    add_vacuum_ancilla,
    attainable_two_mode,
    concentrate_modes,
    entangle_optimally,
    optimal_two_mode_plan,
    verdict,
)

__version__ = "0.1.0"
