"""Hund-Mulliken model of two singlet-triplet qubits in a linear four-dot array."""
__version__ = "0.1.0"

from .device import Device, DeviceGeometry, Detunings, MaterialParams
from .integrals import HubbardParams, compute_integrals, extract_hubbard, hubbard_params
from .model import DeviceSolution, solve
from .spin import j_eff_bond, spin_chain_couplings
from .couplings import capacitive_params, chi_ratio, crosstalk_map, crosstalk_metric
