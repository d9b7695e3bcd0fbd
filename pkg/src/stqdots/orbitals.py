"""Fock-Darwin ground-state Gaussians and their Lowdin-orthogonalised combinations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .device import Device, dot_centers, fock_darwin_radius

DEGENERACY_FLOOR = 1e-10


class DegenerateBasisError(ValueError):
    pass


@dataclass(frozen=True)
class PrimitiveOrbital:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be > 0")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        d2 = np.sum((r - np.asarray(self.center)) ** 2, axis=-1)
        return np.exp(-0.5 * d2 / self.radius**2) / (self.radius * np.sqrt(np.pi))


@dataclass(frozen=True)
class OrthogonalBasis:
    """psi_k = sum_l coeffs[k, l] phi_l."""

    primitives: tuple[PrimitiveOrbital, ...]
    overlap: np.ndarray
    coeffs: np.ndarray

    @property
    def radius(self) -> float:
        return self.primitives[0].radius

    @property
    def centers(self) -> np.ndarray:
        return np.array([p.center for p in self.primitives])

    def __call__(self, k: int, r):
        return eval_orthogonal(self, k, r)


def build_primitives(device: Device) -> tuple[PrimitiveOrbital, ...]:
    aB = fock_darwin_radius(device.material, device.geometry.hbar_omega0)
    return tuple(PrimitiveOrbital((float(x), float(y)), aB) for x, y in dot_centers(device.geometry))


def _common_radius(primitives) -> float:
    radii = {p.radius for p in primitives}
    if len(radii) != 1:
        raise ValueError("all primitives must share one radius")
    return radii.pop()


def primitive_overlap(p: PrimitiveOrbital, q: PrimitiveOrbital) -> float:
    """<p|q> = exp(-d^2 / 4 a_B^2) for equal-width normalised Gaussians."""
    aB = _common_radius((p, q))
    d2 = float(np.sum((np.asarray(p.center) - np.asarray(q.center)) ** 2))
    return float(np.exp(-d2 / (4 * aB**2)))


def overlap_matrix(primitives) -> np.ndarray:
    """O_ij = exp(-d_ij^2 / 4 a_B^2) for equal-width normalised Gaussians."""
    aB = _common_radius(primitives)
    c = np.array([p.center for p in primitives])
    d2 = np.sum((c[:, None, :] - c[None, :, :]) ** 2, axis=-1)
    O = np.exp(-d2 / (4 * aB**2))
    if np.linalg.eigvalsh(O)[0] <= DEGENERACY_FLOOR:
        raise DegenerateBasisError("overlap matrix is not positive definite")
    return O


def lowdin_inverse_sqrt(O: np.ndarray) -> np.ndarray:
    """Symmetric inverse square root of a positive-definite overlap matrix."""
    O = np.asarray(O, dtype=float)
    w, U = np.linalg.eigh(0.5 * (O + O.T))
    if w[0] < DEGENERACY_FLOOR:
        raise DegenerateBasisError(f"overlap eigenvalue {w[0]:.3e} below {DEGENERACY_FLOOR}")
    C = (U * w**-0.5) @ U.T
    return 0.5 * (C + C.T)


def build_basis(device: Device) -> OrthogonalBasis:
    prims = build_primitives(device)
    O = overlap_matrix(prims)
    return OrthogonalBasis(prims, O, lowdin_inverse_sqrt(O))


def eval_orthogonal(basis: OrthogonalBasis, k: int, r):
    """Amplitude of the k-th orthogonal orbital (0-based) at r."""
    phis = np.stack([p(r) for p in basis.primitives], axis=-1)
    return phis @ basis.coeffs[k]
