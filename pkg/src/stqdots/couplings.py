"""Isolated-qubit states, capacitive coupling and gate-crosstalk maps."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .device import Device
from .integrals import Integrals, compute_integrals, extract_hubbard
from .manybody import (_one_body_basis, _pair_terms, assemble_from_integrals, fock_space, product_label,
                       state_vector)
from .spin import ResonanceError, j_eff_bond

SIDES = {"L": (0, 1), "R": (2, 3)}
CAPACITIVE_METHODS = ("coupled", "hartree")
SINGLET_KINDS = ("S(11)", "S(20)", "S(02)")
ALPHA_FLOOR = 1e-12  # meV


class UndefinedRatioError(ArithmeticError):
    pass


@dataclass(frozen=True)
class IsolatedQubitSolution:
    side: str
    singlet_amplitudes: np.ndarray  # over S(11), S(20), S(02)
    singlet_energy: float
    triplet_energy: float
    singlet_density: np.ndarray     # one-particle density matrix on the four orbitals
    triplet_density: np.ndarray


def _pair_space():
    return fock_space(2, 1, 1)


def _pair_vectors():
    space = _pair_space()
    singlets = np.array([product_label_pair(space, k) for k in SINGLET_KINDS])
    return space, singlets, product_label_pair(space, "T(11)")


def product_label_pair(space, kind):
    return state_vector(space, _pair_terms(kind, 0, 1))


def _density_matrix(vec, dots) -> np.ndarray:
    E = _one_body_basis(_pair_space())
    D2 = np.einsum("i,pqij,j->pq", vec, E, vec)
    D = np.zeros((4, 4))
    D[np.ix_(dots, dots)] = D2
    return D


def solve_isolated_dqd(side: str, ints: Integrals) -> IsolatedQubitSolution:
    """Two electrons on one dot pair, using that pair's four-dot orthogonal orbitals.

    The singlet comes from the 3x3 block over S(11), S(20), S(02); the triplet
    energy is the T(11) expectation value.
    """
    dots = list(SIDES[side])
    h = ints.h[np.ix_(dots, dots)]
    V = ints.V[np.ix_(dots, dots, dots, dots)]
    H = assemble_from_integrals(h, V, _pair_space())
    _, singlets, triplet = _pair_vectors()
    block = singlets @ H @ singlets.T
    w, v = np.linalg.eigh(block)
    amps = v[:, 0] * np.sign(v[0, 0] if v[0, 0] != 0 else 1.0)
    s_vec = amps @ singlets
    return IsolatedQubitSolution(
        side=side,
        singlet_amplitudes=amps,
        singlet_energy=float(w[0]),
        triplet_energy=float(triplet @ H @ triplet),
        singlet_density=_density_matrix(s_vec, dots),
        triplet_density=_density_matrix(triplet, dots),
    )


def qubit_product_states(left: IsolatedQubitSolution, right: IsolatedQubitSolution) -> dict[str, np.ndarray]:
    """SS, ST, TS, TT four-dot vectors built from the isolated-qubit states."""
    space = fock_space()
    kinds = {
        "S": list(zip(left.singlet_amplitudes, SINGLET_KINDS)),
        "T": [(1.0, "T(11)")],
    }
    kinds_r = {
        "S": list(zip(right.singlet_amplitudes, SINGLET_KINDS)),
        "T": [(1.0, "T(11)")],
    }
    out = {}
    for xl, terms_l in kinds.items():
        for xr, terms_r in kinds_r.items():
            vec = sum(al * ar * product_label(space, kl, kr) for al, kl in terms_l for ar, kr in terms_r)
            out[xl + xr] = vec / np.linalg.norm(vec)
    return out


def cross_coulomb_energy(left_density: np.ndarray, right_density: np.ndarray, V: np.ndarray) -> float:
    """Hartree energy between two charge distributions given as orbital density matrices."""
    return float(np.einsum("pr,qs,pqrs->", left_density, right_density, V, optimize=True))


@dataclass(frozen=True)
class CapacitiveParams:
    alpha0: float
    beta1: float
    beta2: float
    at: tuple[float, float]


def capacitive_from_energies(V_SS, V_ST, V_TS, V_TT, at=(0.0, 0.0)) -> CapacitiveParams:
    """Solve E_xy = alpha0 s_x s_y + beta1 s_x + beta2 s_y + const with s_S = +1, s_T = -1.

    The first letter labels the left qubit. Flipping the sign convention flips both
    betas and leaves alpha0 unchanged.
    """
    return CapacitiveParams(
        alpha0=(V_SS + V_TT - V_ST - V_TS) / 4,
        beta1=(V_SS + V_ST - V_TS - V_TT) / 4,
        beta2=(V_SS + V_TS - V_ST - V_TT) / 4,
        at=at,
    )


def _pair_hamiltonian(side: str, ints: Integrals) -> np.ndarray:
    dots = list(SIDES[side])
    return assemble_from_integrals(ints.h[np.ix_(dots, dots)],
                                   ints.V[np.ix_(dots, dots, dots, dots)], _pair_space())


def coupled_branch_energies(ints: Integrals) -> dict[str, float]:
    """Lowest energy of each qubit-pair sector with inter-qubit Coulomb switched on.

    Works in the 16-dim product of the two pair spaces: H_L + H_R plus every Coulomb
    term with one electron on each qubit. Each sector (singlet block of each qubit or
    its T(11) state) is diagonalised separately, so the charge configurations inside a
    singlet may repolarise in response to the other qubit.
    """
    space, singlets, trip = _pair_vectors()
    E1 = _one_body_basis(space)
    L, R = list(SIDES["L"]), list(SIDES["R"])
    V_lr = ints.V[np.ix_(L, R, L, R)]
    V_op = np.einsum("pqrs,prij,qskl->ikjl", V_lr, E1, E1, optimize=True).reshape(16, 16)
    eye = np.eye(space.dim)
    H = np.kron(_pair_hamiltonian("L", ints), eye) + np.kron(eye, _pair_hamiltonian("R", ints)) + V_op
    blocks = {"S": singlets, "T": trip[None, :]}
    out = {}
    for xl in "ST":
        for xr in "ST":
            B = np.kron(blocks[xl], blocks[xr])
            out[xl + xr] = float(np.linalg.eigvalsh(B @ H @ B.T)[0])
    return out


def hartree_branch_energies(ints: Integrals) -> dict[str, float]:
    """Inter-qubit Coulomb energy of frozen isolated-qubit densities."""
    left = solve_isolated_dqd("L", ints)
    right = solve_isolated_dqd("R", ints)
    rho_l = {"S": left.singlet_density, "T": left.triplet_density}
    rho_r = {"S": right.singlet_density, "T": right.triplet_density}
    return {xl + xr: cross_coulomb_energy(rho_l[xl], rho_r[xr], ints.V) for xl in "ST" for xr in "ST"}


def capacitive_params(eps_L: float, eps_R: float, device: Device, method: str = "coupled") -> CapacitiveParams:
    """Fit the sigma_z coupling model to the four qubit-sector energies.

    ``coupled`` uses the sector ground energies of the two interacting qubits;
    ``hartree`` uses first-order cross energies of the isolated densities. Only the
    differences enter alpha0, so both are free of the single-qubit energies.
    """
    if method not in CAPACITIVE_METHODS:
        raise ValueError(f"unknown capacitive method {method!r}")
    ints = compute_integrals(device.with_detunings(eps_L, eps_R))
    E = coupled_branch_energies(ints) if method == "coupled" else hartree_branch_energies(ints)
    return capacitive_from_energies(E["SS"], E["ST"], E["TS"], E["TT"], at=(eps_L, eps_R))


@dataclass(frozen=True)
class CouplingPoint:
    J23: float
    alpha0: float
    chi: float


def chi_ratio(device: Device, eps_L: float, eps_R: float = 0.0, method: str = "coupled") -> CouplingPoint:
    """Exchange-to-capacitive ratio J_eff(2,3) / alpha0."""
    dev = device.with_detunings(eps_L, eps_R)
    ints = compute_integrals(dev)
    j23 = j_eff_bond(1, extract_hubbard(ints.h, ints.V))
    alpha0 = capacitive_params(eps_L, eps_R, device, method).alpha0
    if abs(alpha0) < ALPHA_FLOOR:
        raise UndefinedRatioError(f"alpha0 = {alpha0:.3e} meV below {ALPHA_FLOOR}")
    return CouplingPoint(j23, alpha0, j23 / alpha0)


@dataclass(frozen=True)
class CrosstalkMap:
    eps_L: np.ndarray
    eps_R: np.ndarray
    J12: np.ndarray   # shape (len(eps_L), len(eps_R)); NaN where masked
    J34: np.ndarray
    mask12: np.ndarray  # True where the cell hit a resonance
    mask34: np.ndarray


def crosstalk_cell(device: Device, eps_L: float, eps_R: float):
    """(J12, J34, masked12, masked34) at one detuning pair."""
    ints = compute_integrals(device.with_detunings(eps_L, eps_R))
    p = extract_hubbard(ints.h, ints.V)
    out = []
    for bond in (0, 2):
        try:
            out.append((j_eff_bond(bond, p), False))
        except ResonanceError:
            out.append((float("nan"), True))
    return out[0][0], out[1][0], out[0][1], out[1][1]


def crosstalk_map(eps_L, eps_R, device: Device, map_fn: Callable = map) -> CrosstalkMap:
    """J_eff of both qubits over an (eps_L, eps_R) grid.

    ``map_fn`` lets callers fan cells out to a worker pool; cells are assembled in
    grid order regardless.
    """
    eps_L = np.asarray(eps_L, dtype=float)
    eps_R = np.asarray(eps_R, dtype=float)
    cells = [(float(x), float(y)) for x in eps_L for y in eps_R]
    res = list(map_fn(lambda xy: crosstalk_cell(device, *xy), cells))
    shape = (len(eps_L), len(eps_R))
    arr = np.array([r[:2] for r in res], dtype=float).reshape(shape + (2,))
    msk = np.array([r[2:] for r in res], dtype=bool).reshape(shape + (2,))
    return CrosstalkMap(eps_L, eps_R, arr[..., 0], arr[..., 1], msk[..., 0], msk[..., 1])


def crosstalk_metric(device: Device, eps_L_star: float = -2.0,
                     eps_R=np.linspace(-5.0, 5.0, 21)) -> float:
    """max over eps_R of |J12(eps_L*, eps_R) - J12(eps_L*, 0)| / J12(eps_L*, 0)."""
    ref = crosstalk_cell(device, eps_L_star, 0.0)[0]
    vals = np.array([crosstalk_cell(device, eps_L_star, float(e))[0] for e in eps_R])
    return float(np.max(np.abs(vals - ref)) / abs(ref))
