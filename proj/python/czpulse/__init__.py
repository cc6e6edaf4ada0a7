"""Python access to the czpulse gate toolkit.

Frequencies are in GHz, couplings and ZZ rates in MHz, times in ns.
"""

from ._czpulse import (
    CircuitSpec,
    CzpulseError,
    GateModel,
    coupling_variant,
    effective_coupling_mhz,
    gate_circuit,
    linspace,
    reference_circuit,
    zeta2_direct_closed_form,
    zz_curve,
    zz_switch,
)

__all__ = [
    "CircuitSpec",
    "CzpulseError",
    "GateModel",
    "coupling_variant",
    "effective_coupling_mhz",
    "gate_circuit",
    "linspace",
    "reference_circuit",
    "zeta2_direct_closed_form",
    "zz_curve",
    "zz_switch",
]
