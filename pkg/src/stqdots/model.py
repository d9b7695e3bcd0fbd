"""End-to-end solution of one device configuration."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .couplings import qubit_product_states, solve_isolated_dqd
from .device import Device
from .integrals import HubbardParams, Integrals, compute_integrals, extract_hubbard
from .manybody import (Classification, ManyBodyHamiltonian, SpectralExchange, SpectrumResult, assemble,
                       classify, diagonalize, exchange_from_energies, fock_space, standard_labels)
from .spin import ResonanceError, j_eff_bond

BRANCHES = ("SS", "ST", "TS", "TT")


@dataclass
class DeviceSolution:
    device: Device
    mode: str
    integrals: Integrals
    params: HubbardParams
    hamiltonian: ManyBodyHamiltonian
    spectrum: SpectrumResult
    classification: Classification
    references: dict[str, np.ndarray]

    def energy(self, branch: str) -> float:
        return float(self.spectrum.energies[self.classification.branch_index[branch]])

    def weight(self, branch: str, label: str) -> float:
        return float(self.classification.weights[label][self.classification.branch_index[branch]])

    def j_st(self, side: str = "L", threshold: float | None = None) -> SpectralExchange:
        kw = {} if threshold is None else {"threshold": threshold}
        if side == "L":
            return exchange_from_energies(self.spectrum, self.classification, "SS", "TS", **kw)
        return exchange_from_energies(self.spectrum, self.classification, "SS", "ST", **kw)

    def j_eff(self, bond: int) -> float:
        """Second-order exchange; NaN at a charge-transfer resonance."""
        try:
            return j_eff_bond(bond, self.params)
        except ResonanceError:
            return float("nan")


def solve(device: Device, mode: str = "hubbard-nn") -> DeviceSolution:
    """Integrals, Hubbard parameters, many-body spectrum and branch classification."""
    ints = compute_integrals(device)
    params = extract_hubbard(ints.h, ints.V)
    H = assemble(ints, mode)
    spec = diagonalize(H)
    left = solve_isolated_dqd("L", ints)
    right = solve_isolated_dqd("R", ints)
    refs = qubit_product_states(left, right)
    cls = classify(spec, standard_labels(fock_space()), refs)
    return DeviceSolution(device, mode, ints, params, H, spec, cls, refs)
