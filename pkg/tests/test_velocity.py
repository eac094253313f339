"""Velocity measure construction, integration, and panel refinement."""

import math

import numpy as np
import pytest

from kinetic_eikonal import (
    VelocityModel,
    build_discrete_maxwellian,
    build_uniform_maxwellian,
    parse_velocity_spec,
)
from kinetic_eikonal.velocity import refine_near


def test_uniform_moments():
    vm = build_uniform_maxwellian(1.0, 32)
    assert abs(vm.integrate(np.ones(vm.n_nodes)) - 1.0) <= 1e-12
    assert abs(vm.integrate(vm.nodes)) <= 1e-12
    assert abs(vm.theta2 - 1.0 / 3.0) <= 1e-12
    assert vm.v_max == 1.0


def test_uniform_wider_domain():
    vm = build_uniform_maxwellian(2.0, 16)
    assert abs(vm.theta2 - 4.0 / 3.0) <= 1e-12


def test_uniform_rejects_bad_inputs():
    with pytest.raises(ValueError):
        build_uniform_maxwellian(1.0, 31)  # odd breaks exact symmetry
    with pytest.raises(ValueError):
        build_uniform_maxwellian(0.0, 32)
    with pytest.raises(ValueError):
        build_uniform_maxwellian(-1.0, 32)


def test_node_symmetry():
    vm = build_uniform_maxwellian(1.5, 24)
    np.testing.assert_allclose(vm.nodes, -vm.nodes[::-1], rtol=0, atol=0)
    np.testing.assert_allclose(vm.weights, vm.weights[::-1], rtol=0, atol=0)


def test_two_velocity_atoms():
    vm = build_discrete_maxwellian([(1.0, 0.5), (-1.0, 0.5)])
    assert vm.v_max == 1.0
    assert abs(vm.theta2 - 1.0) <= 1e-15
    assert abs(vm.integrate(vm.nodes)) <= 1e-15


def test_four_atom_second_moment():
    vm = build_discrete_maxwellian([(2.0, 0.25), (-2.0, 0.25),
                                    (0.5, 0.25), (-0.5, 0.25)])
    assert abs(vm.theta2 - 2.125) <= 1e-15


def test_atoms_reject_asymmetry_and_bad_mass():
    with pytest.raises(ValueError):
        build_discrete_maxwellian([(1.0, 0.5), (-2.0, 0.5)])
    with pytest.raises(ValueError):
        build_discrete_maxwellian([(1.0, 0.6), (-1.0, 0.5)])
    with pytest.raises(ValueError):
        build_discrete_maxwellian([(1.0, 1.0)])


def test_integrate_basics():
    vm = build_uniform_maxwellian(1.0, 32)
    assert vm.integrate(lambda v: 1.0) == pytest.approx(1.0, abs=1e-14)
    assert vm.integrate(lambda v: v) == pytest.approx(0.0, abs=1e-12)
    assert vm.integrate(lambda v: v * v) == pytest.approx(1.0 / 3.0, abs=1e-13)


def test_integrate_linearity():
    vm = build_uniform_maxwellian(1.0, 16)
    f = np.cos(vm.nodes)
    g = vm.nodes ** 3 + 0.25
    lhs = vm.integrate(2.0 * f - 3.0 * g)
    rhs = 2.0 * vm.integrate(f) - 3.0 * vm.integrate(g)
    assert abs(lhs - rhs) <= 1e-14


def test_integrate_bitwise_repeatable():
    vm = build_uniform_maxwellian(1.0, 64)
    vals = np.sin(3.0 * vm.nodes) + vm.nodes ** 2
    first = vm.integrate(vals)
    for _ in range(5):
        assert vm.integrate(vals) == first


def test_integrate_polynomial_exactness():
    # Gauss-Legendre with n nodes is exact through degree 2n-1
    vm = build_uniform_maxwellian(1.0, 32)
    got = vm.integrate(vm.nodes ** 62)
    assert abs(got - 1.0 / 63.0) <= 1e-13 / 63.0 + 1e-15


def test_integrate_rejects_nonfinite():
    vm = build_uniform_maxwellian(1.0, 8)
    bad = np.ones(vm.n_nodes)
    bad[3] = np.inf
    with pytest.raises(ValueError):
        vm.integrate(bad)


def test_refine_near_noop_at_zero_levels():
    vm = build_uniform_maxwellian(1.0, 16)
    same = refine_near(vm, 1.0, 0)
    np.testing.assert_array_equal(same.nodes, vm.nodes)
    np.testing.assert_array_equal(same.weights, vm.weights)


def test_refine_near_preserves_normalization_and_symmetry():
    vm = build_uniform_maxwellian(1.0, 32)
    ref = refine_near(vm, 1.0, 10)
    assert abs(ref.integrate(np.ones(ref.n_nodes)) - 1.0) <= 1e-12
    np.testing.assert_allclose(ref.nodes, -ref.nodes[::-1], rtol=0, atol=0)


def test_refine_near_resolves_near_pole_integral():
    # integral of 1/(1.001 - v) against the uniform measure on (-1, 1)
    vm = build_uniform_maxwellian(1.0, 32)
    ref = refine_near(vm, 1.0, 12)
    exact = 0.5 * math.log(2.001 / 0.001)
    assert abs(ref.integrate(lambda v: 1.0 / (1.001 - v)) - exact) < 1e-8
    # the unrefined rule is far off; this is what refinement buys
    assert abs(vm.integrate(lambda v: 1.0 / (1.001 - v)) - exact) > 1e-2


def test_refine_near_rejects_atoms():
    vm = build_discrete_maxwellian([(1.0, 0.5), (-1.0, 0.5)])
    with pytest.raises(ValueError):
        refine_near(vm, 1.0, 4)


def test_parse_velocity_spec_forms():
    vm = parse_velocity_spec("uniform:vmax=1,n=64")
    assert vm.kind == "continuous" and vm.n_nodes == 64
    at = parse_velocity_spec("atoms:(1,0.5);(-1,0.5)")
    assert at.kind == "discrete" and at.v_max == 1.0


def test_parse_velocity_spec_rejects_garbage():
    for bad in ("uniform:vmax=1", "uniform:n=8", "atoms:(1,0.5)",
                "atoms:1:0.5,-1:0.5", "gauss:sigma=1", ""):
        with pytest.raises(ValueError):
            parse_velocity_spec(bad)
