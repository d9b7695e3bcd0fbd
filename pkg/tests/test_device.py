import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stqdots.device import (COULOMB_CONSTANT, HBAR2_OVER_ME, Device, DeviceError, DeviceGeometry, Detunings,
                            MaterialParams, dot_centers, fock_darwin_radius, potential_at, set_detunings,
                            well_potentials)


def test_unit_constants():
    # hbar^2/m_e in meV nm^2 and e^2/(4 pi eps0) in meV nm
    assert HBAR2_OVER_ME == pytest.approx(76.1996, rel=1e-5)
    assert COULOMB_CONSTANT == pytest.approx(1439.96, rel=1e-5)


def test_gaas_defaults():
    d = Device()
    assert d.material.effective_mass_ratio == 0.067
    assert d.material.relative_permittivity == 12.9
    assert d.geometry.hbar_omega0 == 5.0 and d.geometry.a == 22.0
    assert d.material.coulomb_scale == pytest.approx(111.625, rel=1e-4)
    assert d.bohr_radius == pytest.approx(15.0818, rel=1e-4)


def test_dot_centers_layout():
    c = dot_centers(DeviceGeometry(a=22, R=58))
    np.testing.assert_allclose(c[:, 0], [-80, -36, 36, 80])
    np.testing.assert_array_equal(c[:, 1], 0.0)


@pytest.mark.parametrize("kw", [dict(a=-1), dict(a=0), dict(R=10, a=22), dict(hbar_omega0=0),
                                dict(epsilon=(0, 0, 0)), dict(epsilon=(0, np.nan, 0, 0))])
def test_geometry_invariants(kw):
    with pytest.raises(DeviceError):
        DeviceGeometry(**kw)


def test_material_invariants():
    with pytest.raises(DeviceError):
        MaterialParams(effective_mass_ratio=-0.1)
    with pytest.raises(DeviceError):
        MaterialParams(relative_permittivity=0)


def test_bohr_radius_scaling():
    m = MaterialParams()
    # a_B^2 scales as 1 / (m* hbar omega)
    assert fock_darwin_radius(m, 20.0) == pytest.approx(fock_darwin_radius(m, 5.0) / 2)


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_detuning_round_trip(eL, eR):
    g = set_detunings(DeviceGeometry(), Detunings(eL, eR))
    assert g.detunings.eps_L == pytest.approx(eL, abs=1e-12)
    assert g.detunings.eps_R == pytest.approx(eR, abs=1e-12)
    assert sum(g.epsilon) == pytest.approx(0.0, abs=1e-12)


def test_potential_minimum_at_dots():
    g = DeviceGeometry()
    m = MaterialParams()
    for x, y in dot_centers(g):
        assert potential_at((x, y), g, m) == pytest.approx(0.0, abs=1e-12)
    assert potential_at((0.0, 0.0), g, m) > 0


@settings(max_examples=50)
@given(st.floats(-150, 150), st.floats(-60, 60))
def test_potential_is_min_of_wells(x, y):
    g = set_detunings(DeviceGeometry(), Detunings(1.5, -0.7))
    m = MaterialParams()
    w = well_potentials((x, y), g, m)
    assert potential_at((x, y), g, m) == pytest.approx(w.min())


@given(st.floats(-150, 150), st.floats(-60, 60), st.floats(-5, 5), st.floats(-5, 5))
def test_mirror_potential(x, y, eL, eR):
    m = MaterialParams()
    g = set_detunings(DeviceGeometry(), Detunings(eL, eR))
    # mirroring x swaps the dot roles: (eps_L, eps_R) -> (-eps_R, -eps_L)
    gm = set_detunings(DeviceGeometry(), Detunings(-eR, -eL))
    assert potential_at((x, y), g, m) == pytest.approx(potential_at((-x, y), gm, m), abs=1e-9)
    assert g.mirrored().epsilon == gm.epsilon
