"""Device geometry, material constants and the confinement potential.

Energies are in meV and lengths in nm everywhere in the package.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants as _c

# hbar^2 / m_e in meV nm^2 and e^2 / (4 pi eps0) in meV nm
HBAR2_OVER_ME = (_c.hbar**2 / _c.m_e) / _c.e * 1e3 * 1e18
COULOMB_CONSTANT = _c.e / (4 * np.pi * _c.epsilon_0) * 1e3 * 1e9

GAAS_MASS_RATIO = 0.067
GAAS_PERMITTIVITY = 12.9


class DeviceError(ValueError):
    """Raised when a device parameter violates a physical invariant."""


@dataclass(frozen=True)
class MaterialParams:
    effective_mass_ratio: float = GAAS_MASS_RATIO
    relative_permittivity: float = GAAS_PERMITTIVITY

    def __post_init__(self):
        if not self.effective_mass_ratio > 0:
            raise DeviceError("effective_mass_ratio must be > 0")
        if not self.relative_permittivity > 0:
            raise DeviceError("relative_permittivity must be > 0")

    @property
    def coulomb_scale(self) -> float:
        """e^2 / (4 pi eps0 eps_r) in meV nm."""
        return COULOMB_CONSTANT / self.relative_permittivity


@dataclass(frozen=True)
class Detunings:
    eps_L: float = 0.0
    eps_R: float = 0.0


@dataclass(frozen=True)
class DeviceGeometry:
    """Linear four-dot device.

    ``a`` is half the intra-qubit dot spacing, ``R`` half the distance between
    the two double-dot centres, ``epsilon`` the per-dot energy offsets.
    """

    a: float = 22.0
    R: float = 58.0
    epsilon: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    hbar_omega0: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "epsilon", tuple(float(e) for e in self.epsilon))
        if len(self.epsilon) != 4:
            raise DeviceError("epsilon must hold 4 per-dot offsets")
        if not self.a > 0:
            raise DeviceError(f"invariant a > 0 violated (a={self.a})")
        if not self.R > self.a:
            raise DeviceError(f"invariant R > a violated (R={self.R}, a={self.a})")
        if not self.hbar_omega0 > 0:
            raise DeviceError(f"invariant hbar_omega0 > 0 violated (hbar_omega0={self.hbar_omega0})")
        if not all(np.isfinite(self.epsilon)):
            raise DeviceError("epsilon must be finite")

    @property
    def detunings(self) -> Detunings:
        e1, e2, e3, e4 = self.epsilon
        return Detunings(e1 - e2, e3 - e4)

    def mirrored(self) -> DeviceGeometry:
        """Image under x -> -x: dot 1 <-> 4 and 2 <-> 3."""
        return replace(self, epsilon=tuple(reversed(self.epsilon)))


@dataclass(frozen=True)
class Device:
    geometry: DeviceGeometry = field(default_factory=DeviceGeometry)
    material: MaterialParams = field(default_factory=MaterialParams)

    @property
    def bohr_radius(self) -> float:
        return fock_darwin_radius(self.material, self.geometry.hbar_omega0)

    def with_detunings(self, eps_L: float, eps_R: float) -> Device:
        return replace(self, geometry=set_detunings(self.geometry, Detunings(eps_L, eps_R)))

    def mirrored(self) -> Device:
        return replace(self, geometry=self.geometry.mirrored())


def dot_centers(g: DeviceGeometry) -> np.ndarray:
    """Planar dot centres, shape (4, 2)."""
    a, R = g.a, g.R
    return np.array([[-R - a, 0.0], [-R + a, 0.0], [R - a, 0.0], [R + a, 0.0]])


def set_detunings(g: DeviceGeometry, d: Detunings) -> DeviceGeometry:
    # symmetric split keeps the summed offset at zero
    eps = (0.5 * d.eps_L, -0.5 * d.eps_L, 0.5 * d.eps_R, -0.5 * d.eps_R)
    return replace(g, epsilon=eps)


def fock_darwin_radius(m: MaterialParams, hbar_omega0: float) -> float:
    """Ground-state length sqrt(hbar / m* omega0) in nm."""
    if not hbar_omega0 > 0:
        raise DeviceError("hbar_omega0 must be > 0")
    return float(np.sqrt(HBAR2_OVER_ME / (m.effective_mass_ratio * hbar_omega0)))


def well_potentials(r, g: DeviceGeometry, m: MaterialParams) -> np.ndarray:
    """Individual paraboloids v_i(r); trailing axis of length 4."""
    r = np.asarray(r, dtype=float)
    aB = fock_darwin_radius(m, g.hbar_omega0)
    stiffness = 0.5 * g.hbar_omega0 / aB**2  # m* omega0^2 / 2 in meV/nm^2
    diff = r[..., None, :] - dot_centers(g)
    return stiffness * np.sum(diff**2, axis=-1) + np.asarray(g.epsilon)


def potential_at(r, g: DeviceGeometry, m: MaterialParams):
    """Confinement potential min_i v_i(r) in meV; r has trailing axis of length 2."""
    v = well_potentials(r, g, m).min(axis=-1)
    return float(v) if v.ndim == 0 else v
