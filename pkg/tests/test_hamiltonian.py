"""Effective Hamiltonian: root solve, derivatives, eigenfunction, corrector,
Legendre transform."""

import numpy as np
import pytest

from kinetic_eikonal import (
    Hamiltonian,
    NumericalError,
    bracket,
    build_discrete_maxwellian,
    build_uniform_maxwellian,
    eigenfunction_q,
    hamiltonian_from_spec,
    solve_corrector,
)

UNIFORM = build_uniform_maxwellian(1.0, 32)
TWOV = build_discrete_maxwellian([(1.0, 0.5), (-1.0, 0.5)])

# closed-form references, exact to the last digit
H_COTH_AT_1 = 0.3130352854993313    # p/tanh(p) - 1 at p = 1
DH_COTH_AT_1 = 0.5889736245330208   # 1/tanh(p) - p/sinh(p)^2 at p = 1
H_REL_AT_075 = 0.4013878188659973   # (sqrt(1 + 4 p^2) - 1)/2 at p = 0.75


def test_bracket_at_zero():
    lo, hi = bracket(UNIFORM, 0.0)
    assert 0.0 < lo < 1e-12
    assert hi > lo


def test_bracket_beyond_speed_line():
    lo, hi = bracket(UNIFORM, 2.0)
    node_line = float((UNIFORM.nodes * 2.0).max()) - 1.0
    assert lo == pytest.approx(node_line, abs=1e-10)
    assert lo > node_line  # strictly above max_i(v_i.p) - 1
    assert hi > lo


def test_bracket_atoms_beyond_speed_line():
    lo, hi = bracket(TWOV, 2.0)
    assert lo == pytest.approx(1.0, abs=1e-10)
    assert lo > 1.0
    assert hi > lo


def test_bracket_contains_two_velocity_root():
    lo, hi = bracket(TWOV, 0.75)
    assert lo < H_REL_AT_075 < hi


def test_value_closed_coth_at_one():
    ham = Hamiltonian.closed_coth(1.0)
    assert abs(ham.value(1.0) - H_COTH_AT_1) <= 1e-15


def test_value_zero_at_zero():
    for ham in (Hamiltonian.closed_coth(1.0),
                Hamiltonian.closed_relativistic(),
                Hamiltonian.classical_eikonal(1.0 / 3.0),
                Hamiltonian.implicit(UNIFORM),
                Hamiltonian.implicit(TWOV)):
        assert ham.value(0.0) == 0.0


def test_value_closed_relativistic():
    ham = Hamiltonian.closed_relativistic()
    assert abs(ham.value(0.75) - H_REL_AT_075) <= 1e-14


def test_implicit_matches_coth_at_one():
    ham = Hamiltonian.implicit(build_uniform_maxwellian(1.0, 64))
    assert abs(ham.value(1.0) - H_COTH_AT_1) <= 1e-10


def test_implicit_positivity_symmetry_speed_line():
    ham = Hamiltonian.implicit(UNIFORM)
    ps = np.linspace(0.0, 5.0, 26)
    hs = ham.value(ps)
    assert np.all(hs >= 0.0)
    np.testing.assert_allclose(hs, ham.value(-ps), atol=1e-10, rtol=0)
    assert np.all(hs > np.abs(ps) - 1.0)


def test_grad_zero_at_zero():
    assert Hamiltonian.implicit(UNIFORM).grad(0.0) == pytest.approx(0.0, abs=1e-12)
    assert Hamiltonian.implicit(TWOV).grad(0.0) == pytest.approx(0.0, abs=1e-12)


def test_closed_coth_gradient_value():
    _, g, _ = Hamiltonian.closed_coth(1.0).derivatives(1.0)
    assert abs(g - DH_COTH_AT_1) <= 1e-12


def test_derivatives_match_finite_differences():
    ham = Hamiltonian.implicit(UNIFORM)
    rng = np.random.default_rng(20260401)
    rng.uniform(-2, 2, 20)  # same stream layout as the corrector sample
    d = 2e-3
    worst = 0.0
    for p in rng.uniform(-3.0, 3.0, 50):
        _, g, hess = ham.derivatives(p)
        fd1 = (ham.value(p + d) - ham.value(p - d)) / (2 * d)
        fd2 = (ham.value(p + d) - 2 * ham.value(p) + ham.value(p - d)) / d**2
        worst = max(worst, abs(float(g) - fd1), abs(float(hess) - fd2))
        assert hess >= 0.0
    assert worst <= 1e-6


def test_gradient_respects_speed_bound():
    ham = Hamiltonian.implicit(UNIFORM)
    for p in np.linspace(-6.0, 6.0, 61):
        assert abs(float(ham.grad(p))) <= 1.0 + 1e-10


def test_convexity_chords():
    ham = Hamiltonian.implicit(UNIFORM)
    rng = np.random.default_rng(7)
    for _ in range(200):
        a, b = np.sort(rng.uniform(-4.0, 4.0, 2))
        lam = rng.uniform(0.0, 1.0)
        mid = lam * a + (1.0 - lam) * b
        chord = lam * ham.value(a) + (1.0 - lam) * ham.value(b)
        assert ham.value(mid) <= chord + 1e-10


def test_small_p_quadratic_equivalence():
    ham = Hamiltonian.implicit(UNIFORM)
    devs = [abs(ham.value(p) / p**2 - 1.0 / 3.0) for p in (0.1, 0.05, 0.025)]
    assert devs[0] > devs[1] > devs[2]


def test_deep_p_raises_numerical_error():
    ham = Hamiltonian.implicit(UNIFORM)
    with pytest.raises(NumericalError):
        ham.value(40.0)


def test_eigenfunction_identity_at_zero():
    q = eigenfunction_q(UNIFORM, 0.0)
    np.testing.assert_allclose(q, 1.0, rtol=0, atol=1e-12)


def test_eigenfunction_normalization_and_residual():
    rng = np.random.default_rng(3)
    for p in rng.uniform(-2.0, 2.0, 8):
        q = eigenfunction_q(UNIFORM, p)
        assert np.all(q > 0.0)
        # reconstruct the h the solve used; the eigenrelation then closes
        h = 1.0 / q[0] + UNIFORM.nodes[0] * p - 1.0
        lhs = (1.0 + h - UNIFORM.nodes * p) * q
        rhs = float(np.sum(UNIFORM.weights * q))
        assert np.abs(lhs - rhs).max() <= 1e-12


def test_eigenfunction_two_velocity_closed_form():
    q = eigenfunction_q(TWOV, 0.75)
    d = 1.0 + H_REL_AT_075
    np.testing.assert_allclose(q, [1.0 / (d + 0.75), 1.0 / (d - 0.75)],
                               rtol=0, atol=1e-12)


def test_corrector_trivial_at_zero():
    res = solve_corrector(UNIFORM, 0.0)
    assert res.mu0 == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(res.eta, 0.0, rtol=0, atol=1e-12)


def test_corrector_identities():
    rng = np.random.default_rng(20260401)
    v = UNIFORM.nodes
    for p in rng.uniform(-2.0, 2.0, 20):
        res = solve_corrector(UNIFORM, p)
        ee = np.exp(res.eta)
        assert np.all(ee > 0.0)
        pair = np.abs((ee[:, None] - ee[None, :]) - (v[None, :] - v[:, None]) * p)
        assert pair.max() <= 1e-10
        renorm = float(np.sum(UNIFORM.weights * np.exp(-res.eta)))
        assert abs(renorm - 1.0) <= 1e-10
        # e^eta equals the dispersion denominator of the same node set
        assert np.abs(ee - 1.0 / eigenfunction_q(UNIFORM, p)).max() <= 1e-10


def test_legendre_table_invariants():
    tab = Hamiltonian.closed_coth(1.0).legendre_table()
    q, vals = tab.q, tab.values
    mid = len(q) // 2
    assert q[mid] == 0.0 and vals[mid] == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(vals, vals[::-1], rtol=0, atol=1e-10)
    assert np.all(vals >= -1e-12)
    assert np.all(np.diff(vals, 2) >= -1e-10)


def test_legendre_relativistic_point_value():
    # analytic dual of the relativistic form: L(q) = (1 - sqrt(1 - q^2))/2
    tab = Hamiltonian.closed_relativistic().legendre_table(q_count=2001)
    assert abs(float(tab(np.array([0.6]))[0]) - 0.1) <= 2e-4


def test_legendre_classical_point_value():
    tab = Hamiltonian.classical_eikonal(1.0 / 3.0).legendre_table(q_count=2001)
    assert abs(float(tab(np.array([1.0]))[0]) - 0.75) <= 2e-4


def test_legendre_outside_table_is_infinite():
    tab = Hamiltonian.closed_coth(1.0).legendre_table()
    out = tab(np.array([1.5, -2.0]))
    assert np.all(np.isinf(out))


def test_legendre_rejects_boundary_argmax():
    # p-span too small for the requested q range: sup hits the p-grid edge
    with pytest.raises(NumericalError):
        Hamiltonian.closed_coth(1.0).legendre_table(p_span=0.5)


def test_legendre_rejects_even_counts():
    with pytest.raises(ValueError):
        Hamiltonian.closed_coth(1.0).legendre_table(q_count=200)
    with pytest.raises(ValueError):
        Hamiltonian.closed_coth(1.0).legendre_table(p_count=4000)


def test_hamiltonian_from_spec_forms():
    assert hamiltonian_from_spec("coth:vmax=1").value(1.0) == pytest.approx(
        H_COTH_AT_1, abs=1e-14)
    assert hamiltonian_from_spec("relativistic").value(0.75) == pytest.approx(
        H_REL_AT_075, abs=1e-14)
    assert hamiltonian_from_spec("classical:theta2=0.25").value(2.0) == pytest.approx(
        1.0, abs=1e-14)
    imp = hamiltonian_from_spec("uniform:vmax=1,n=32")
    assert imp.source == "implicit"
    with pytest.raises(ValueError):
        hamiltonian_from_spec("spline:knots=3")
