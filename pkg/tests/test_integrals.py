import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import coulomb_kspace, gaussian_cloud_coulomb_polar, kinetic_quad, overlap_quad
from stqdots.device import Device, DeviceGeometry, MaterialParams
from stqdots.integrals import (HubbardParams, QuadratureError, coulomb_kernel, coulomb_primitive_4center,
                               coulomb_tensor, compute_integrals, extract_hubbard, hubbard_params,
                               kinetic_primitive, potential_primitive, potential_primitive_quad,
                               restrict_nearest_neighbor, well_strips)
from stqdots.manybody import assemble, assemble_from_integrals, assemble_hubbard
from stqdots.orbitals import PrimitiveOrbital, build_primitives

AB = Device().bohr_radius
KAPPA = MaterialParams().coulomb_scale
RATIOS = [0.0, 0.5, 1.0, 2.0, 4.0]


@pytest.mark.parametrize("ratio", RATIOS)
def test_overlap_closed_form(ratio):
    p = PrimitiveOrbital((0.0, 0.0), AB)
    q = PrimitiveOrbital((ratio * AB, 0.0), AB)
    assert np.exp(-ratio**2 / 4) == pytest.approx(overlap_quad(p, q), rel=1e-6)


@pytest.mark.parametrize("ratio", RATIOS)
def test_kinetic_closed_form(ratio):
    p = PrimitiveOrbital((-10.0, 0.0), AB)
    q = PrimitiveOrbital((-10.0 + ratio * AB, 0.0), AB)
    ref = kinetic_quad(p, q, 5.0)
    assert kinetic_primitive(p, q, 5.0) == pytest.approx(ref, rel=1e-6, abs=1e-12)


def test_kinetic_zero_at_node():
    # (1 - d^2/4a_B^2) vanishes at d = 2 a_B
    p = PrimitiveOrbital((0.0, 0.0), AB)
    q = PrimitiveOrbital((2 * AB, 0.0), AB)
    assert kinetic_primitive(p, q, 5.0) == pytest.approx(0.0, abs=1e-14)
    assert kinetic_primitive(p, p, 5.0) == pytest.approx(2.5)


@pytest.mark.parametrize("ratio", RATIOS)
def test_coulomb_kernel_polar_quadrature(ratio):
    ref = gaussian_cloud_coulomb_polar(ratio * AB, AB, KAPPA)
    assert coulomb_kernel(ratio * AB, AB, KAPPA) == pytest.approx(ref, rel=1e-6)


def test_coulomb_kernel_far_field():
    assert coulomb_kernel(2000.0, AB, KAPPA) == pytest.approx(KAPPA / 2000.0, rel=1e-4)


def test_coulomb_onsite_value():
    # kappa sqrt(pi/2) / a_B for two electrons in one Gaussian
    p = PrimitiveOrbital((0.0, 0.0), AB)
    assert coulomb_primitive_4center(p, p, p, p, KAPPA) == pytest.approx(KAPPA * np.sqrt(np.pi / 2) / AB)


def test_coulomb_tensor_symmetries():
    V = coulomb_tensor(build_primitives(Device()), KAPPA)
    np.testing.assert_allclose(V, V.transpose(1, 0, 3, 2), atol=1e-14)  # swap electrons
    np.testing.assert_allclose(V, V.transpose(2, 1, 0, 3), atol=1e-14)  # real orbitals
    np.testing.assert_allclose(V, V.transpose(0, 3, 2, 1), atol=1e-14)
    prims = build_primitives(Device())
    assert V[0, 1, 2, 3] == pytest.approx(coulomb_primitive_4center(*prims, KAPPA))


def test_well_strips_cover_line():
    g = DeviceGeometry(epsilon=(0.5, -0.5, 1.0, -1.0))
    strips = well_strips(g, MaterialParams())
    assert strips[0][0] == -np.inf and strips[-1][1] == np.inf
    for (_, hi, _), (lo, _, _) in zip(strips[:-1], strips[1:]):
        assert hi == lo


@pytest.mark.parametrize("pair", [(0, 0), (0, 1), (1, 2), (0, 3), (2, 2)])
@pytest.mark.parametrize("eps", [(0, 0, 0, 0), (1.5, -1.5, -2.0, 2.0)])
def test_potential_strips_match_quadrature(pair, eps):
    dev = Device(DeviceGeometry(R=50, epsilon=eps))
    prims = build_primitives(dev)
    p, q = prims[pair[0]], prims[pair[1]]
    exact = potential_primitive(p, q, dev.geometry, dev.material)
    val, err = potential_primitive_quad(p, q, dev.geometry, dev.material)
    assert exact == pytest.approx(val, rel=1e-7, abs=1e-10)


def test_potential_quadrature_failure_raises():
    dev = Device()
    prims = build_primitives(dev)
    with pytest.raises(QuadratureError):
        potential_primitive_quad(prims[0], prims[0], dev.geometry, dev.material, rtol=1e-20, atol=1e-300)


@pytest.fixture(scope="module")
def ints():
    return compute_integrals(Device(DeviceGeometry(R=50)).with_detunings(-1.0, 0.5))


@pytest.mark.parametrize("idx", [(0, 0, 0, 0), (0, 1, 0, 1), (0, 1, 1, 0), (0, 0, 0, 1), (1, 2, 1, 2)])
def test_orthogonal_coulomb_kspace(ints, idx):
    a, b, c, d = idx
    C = ints.basis.coeffs
    xs = ints.basis.centers[:, 0]
    ref = coulomb_kspace(np.outer(C[a], C[c]), np.outer(C[b], C[d]), xs, ints.basis.radius, KAPPA)
    assert ints.V[idx] == pytest.approx(ref, rel=1e-6)


def test_hubbard_values_default_device():
    p = hubbard_params(Device().with_detunings(-2.0, 0.0))
    assert p.n_sites == 4
    assert p.U[0] == pytest.approx(9.33, abs=0.01)
    assert p.t[0] == pytest.approx(-0.496, abs=0.002)
    assert p.Unn[0] > p.Unn[1] > 0
    assert p.Je[0] > 0


def test_nn_assembly_equals_tensor_restriction(ints):
    # sign-convention oracle: Hubbard form vs integral tensor cut to the same terms
    p = extract_hubbard(ints.h, ints.V)
    H_hub = assemble_hubbard(p)
    H_dir = assemble_from_integrals(*restrict_nearest_neighbor(ints.h, ints.V))
    np.testing.assert_allclose(H_hub, H_dir, atol=1e-10)
    np.testing.assert_allclose(assemble(p).matrix, assemble(ints, "hubbard-nn").matrix, atol=1e-10)


def test_full_mode_keeps_long_range(ints):
    h, V = ints.for_mode("hubbard-nn")
    assert V[0, 2, 0, 2] == 0.0 and V[0, 3, 0, 3] == 0.0
    h, V = ints.for_mode("full")
    assert V[0, 2, 0, 2] > 0.0
    with pytest.raises(ValueError):
        ints.for_mode("exact")


def test_mirror_hubbard():
    dev = Device(DeviceGeometry(R=55)).with_detunings(-1.3, 0.4)
    p = hubbard_params(dev)
    pm = hubbard_params(dev.mirrored())
    for name in ("eps", "t", "U", "Unn", "Je", "Jp"):
        np.testing.assert_allclose(getattr(p.mirrored(), name), getattr(pm, name), atol=1e-12)
    np.testing.assert_allclose(p.mirrored().Jt, pm.Jt, atol=1e-12)


finite = st.floats(-50, 50, allow_nan=False)


@settings(max_examples=30)
@given(st.integers(2, 6), st.data())
def test_hubbard_text_round_trip(n, data):
    vec = lambda m: np.array(data.draw(st.lists(finite, min_size=m, max_size=m)))
    p = HubbardParams(vec(n), vec(n - 1), vec(n), vec(n - 1), vec(n - 1), vec(n - 1),
                      vec(2 * (n - 1)).reshape(n - 1, 2))
    q = HubbardParams.from_text(p.to_text())
    for name in ("eps", "t", "U", "Unn", "Je", "Jp", "Jt"):
        np.testing.assert_array_equal(getattr(p, name), getattr(q, name))


def test_hubbard_params_read_only():
    p = HubbardParams.zeros(4)
    with pytest.raises(ValueError):
        p.U[0] = 1.0
