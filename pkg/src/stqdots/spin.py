"""Effective Heisenberg exchange of a Hubbard chain at single occupancy."""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .integrals import HubbardParams
from .manybody import apply, c, c_dag

RESONANCE_FLOOR = 1e-9  # meV


class ResonanceError(ArithmeticError):
    """A charge-transfer denominator vanished; second-order elimination is invalid."""


@dataclass(frozen=True)
class SpinChainCouplings:
    J_eff: np.ndarray  # meV, one per bond


def _padded(arr: np.ndarray, i: int) -> float:
    # out-of-range chain parameters count as zero
    return float(arr[i]) if 0 <= i < len(arr) else 0.0


def exchange_denominators(bond: int, p: HubbardParams) -> tuple[float, float]:
    """Charge-transfer energies of the two virtual hops across ``bond`` (sites bond, bond+1).

    The first one doubly occupies the left site, the second the right site.
    """
    k, k1 = bond, bond + 1
    U_left = _padded(p.Unn, k - 1)   # U_{k-1,k}
    U_mid = _padded(p.Unn, k)        # U_{k,k+1}
    U_right = _padded(p.Unn, k + 1)  # U_{k+1,k+2}
    de = p.eps[k] - p.eps[k1]
    return (p.U[k] + U_left - U_mid - U_right + de,
            p.U[k1] + U_right - U_left - U_mid - de)


def j_eff_bond(bond: int, p: HubbardParams) -> float:
    """Second-order exchange across sites (bond, bond + 1), 0-based."""
    if not 0 <= bond < p.n_sites - 1:
        raise IndexError(f"bond {bond} outside chain of {p.n_sites} sites")
    d_left, d_right = exchange_denominators(bond, p)
    if abs(d_left) <= RESONANCE_FLOOR or abs(d_right) <= RESONANCE_FLOOR:
        raise ResonanceError(f"bond {bond}: denominators {d_left:.3e}, {d_right:.3e} meV")
    t = p.t[bond]
    jt_left, jt_right = p.Jt[bond]
    return float(2 * (t - jt_left) ** 2 / d_left + 2 * (t - jt_right) ** 2 / d_right
                 - 2 * p.Je[bond])


def spin_chain_couplings(p: HubbardParams) -> SpinChainCouplings:
    return SpinChainCouplings(np.array([j_eff_bond(k, p) for k in range(p.n_sites - 1)]))


# ---------------------------------------------------------------- oracles

def two_site_exact_exchange(t: float, U: float, delta: float = 0.0) -> float:
    """Triplet-singlet gap of the two-site, two-electron Hubbard model (S_z = 0).

    Basis: |up down, 0>, |up, down>, |down, up>, |0, up down>; the left site sits
    ``delta`` above the right one.
    """
    e1, e2 = 0.5 * delta, -0.5 * delta
    # hopping elements carry the fermionic signs of this explicit basis
    H = np.array([
        [2 * e1 + U, t, -t, 0.0],
        [t, e1 + e2, 0.0, t],
        [-t, 0.0, e1 + e2, -t],
        [0.0, t, -t, 2 * e2 + U],
    ])
    w, v = np.linalg.eigh(H)
    # the triplet (|ud> + |du>)/sqrt2 decouples at energy e1 + e2
    triplet = e1 + e2
    singlet = w[np.argmin(np.where(np.abs(w - triplet) < 1e-12 * max(1.0, abs(U)), np.inf, w))]
    return float(triplet - singlet)


def sw_two_site_oracle(t: float, U: float, delta: float = 0.0):
    """Compare the second-order exchange with the exact two-site gap.

    Returns (J_eff, J_exact, |J_eff - J_exact|).
    """
    if abs(t / U) > 0.2:
        raise ValueError("oracle defined for |t/U| <= 0.2")
    p = HubbardParams.zeros(2, eps=[0.5 * delta, -0.5 * delta], t=[t], U=[U, U])
    j_eff = j_eff_bond(0, p)
    j_exact = two_site_exact_exchange(t, U, delta)
    return j_eff, j_exact, abs(j_eff - j_exact)


_SX = np.array([[0, 1], [1, 0]]) / 2
_SY = np.array([[0, -1j], [1j, 0]]) / 2
_SZ = np.array([[1, 0], [0, -1]]) / 2


def _site_op(op, site, n):
    return reduce(np.kron, [op if k == site else np.eye(2) for k in range(n)])


def spin_dot(i: int, j: int, n: int) -> np.ndarray:
    """S_i . S_j on n spin-1/2 sites (site 0 is the most significant factor)."""
    M = sum(_site_op(s, i, n) @ _site_op(s, j, n) for s in (_SX, _SY, _SZ))
    return np.real_if_close(M).astype(float)


def heisenberg_chain(J) -> np.ndarray:
    """sum_k J_k S_k . S_{k+1} on len(J) + 1 spins."""
    n = len(J) + 1
    return sum(J[k] * spin_dot(k, k + 1, n) for k in range(n - 1))


def spin_identity_check(atol: float = 1e-14) -> bool:
    """Check P sum c+_{1a} c_{2a} c+_{2b} c_{1b} P = 1/2 - 2 S1.S2 on two singly occupied sites.

    The fermion side is evaluated on the full two-electron Fock space; the spin side
    uses Pauli matrices on the product basis |s1 s2> = c+_{1 s1} c+_{2 s2}|vac>.
    """
    def mode(site, spin):
        return 2 * site + spin

    spins = (0, 1)  # 0 up, 1 down
    basis = [(s1, s2) for s1 in spins for s2 in spins]
    masks = []
    signs = []
    for s1, s2 in basis:
        sign, m = apply([c_dag(mode(0, s1)), c_dag(mode(1, s2))], 0)
        masks.append(m)
        signs.append(sign)
    F = np.zeros((4, 4))
    for j, m in enumerate(masks):
        for a in spins:
            for b in spins:
                out = apply([c_dag(mode(0, a)), c(mode(1, a)), c_dag(mode(1, b)), c(mode(0, b))], m)
                if out is None or out[1] not in masks:
                    continue
                i = masks.index(out[1])
                F[i, j] += out[0] * signs[i] * signs[j]
    spin_side = 0.5 * np.eye(4) - 2 * spin_dot(0, 1, 2)
    return bool(np.max(np.abs(F - spin_side)) <= atol)
