"""
Tests for problem instances: periodic fields, Hamiltonians, Levy data
"""

from dataclasses import replace

import numpy as np
import pytest

from levylab.core.errors import ConfigurationError
from levylab.problem import catalog
from levylab.problem.models import FieldFamily, LevyFamily, ProblemConfig
from levylab.problem.spec import LevyData, PeriodicField, build_problem, custom_hamiltonian


def build(document):
    return build_problem(ProblemConfig.model_validate(document))


def column(values):
    return np.asarray(values, dtype=float).reshape(-1, 1)


class TestPeriodicField:
    """Test the scalar periodic field families"""

    def test_hat(self):
        field = PeriodicField(FieldFamily.HAT, amplitude=1.0)
        values = field(column([0.0, 0.25, 0.5, 0.75]))
        np.testing.assert_allclose(values, [0.0, 1.0, 0.0, 0.0], atol=1e-15)
        assert field.lipschitz == 4.0
        assert (field.min_value, field.max_value) == (0.0, 1.0)

    def test_cosine_range(self):
        field = PeriodicField(FieldFamily.COSINE, offset=1.0, amplitude=0.5)
        assert field.min_value == pytest.approx(0.5)
        assert field.max_value == pytest.approx(1.5)
        assert field.lipschitz == pytest.approx(np.pi)

    def test_negative_amplitude_range(self):
        field = PeriodicField(FieldFamily.COSINE_SQUARED, amplitude=-2.0)
        assert field.min_value == pytest.approx(-2.0)
        assert field.max_value == pytest.approx(0.0)

    @pytest.mark.parametrize("family", [FieldFamily.COSINE, FieldFamily.SINE, FieldFamily.COSINE_SQUARED,
                                        FieldFamily.FOURIER])
    def test_derivative_matches_difference_quotient(self, family):
        field = PeriodicField(family, amplitude=0.7, wavenumber=2, seed=3)
        x = column(np.linspace(0.03, 0.97, 17))
        step = 1e-6
        quotient = (field(x + step) - field(x - step)) / (2.0 * step)
        np.testing.assert_allclose(field.derivative(x), quotient, rtol=1e-6, atol=1e-6)

    def test_fourier_is_seeded(self):
        x = column(np.linspace(0.0, 1.0, 9))
        a = PeriodicField(FieldFamily.FOURIER, amplitude=1.0, seed=5)
        b = PeriodicField(FieldFamily.FOURIER, amplitude=1.0, seed=5)
        c = PeriodicField(FieldFamily.FOURIER, amplitude=1.0, seed=6)
        np.testing.assert_array_equal(a(x), b(x))
        assert not np.allclose(a(x), c(x))

    def test_periodic(self):
        field = PeriodicField(FieldFamily.FOURIER, amplitude=1.0, seed=2)
        x = column([0.1, 0.4, 0.8])
        np.testing.assert_allclose(field(x), field(x + 1.0), atol=1e-12)


class TestHamiltonian:
    """Test the power-coercive family and its derived constants"""

    def test_eikonal_constants(self, eikonal):
        H = eikonal.hamiltonian
        assert H.exponent == 2.0
        assert (H.b_m, H.K) == (1.0, 1.0)
        assert H.L_H == pytest.approx(2.0 * np.pi)
        assert H.C_zeta == pytest.approx(2.0)
        assert H.H_0 == pytest.approx(1.0)

    def test_rest_bound_takes_larger_of_declared_and_sampled(self, grid64):
        """Test that one H_0 serves every sup bound: max(declared, sup |H(x, 0)|)"""
        assert catalog.eikonal().hamiltonian.rest_bound(grid64.points) == pytest.approx(1.0)
        under = catalog.eikonal(hamiltonian={"H_0": 0.25}).hamiltonian
        assert under.rest_bound(grid64.points) == pytest.approx(1.0)
        over = catalog.eikonal(hamiltonian={"H_0": 3.0}).hamiltonian
        assert over.rest_bound(grid64.points) == 3.0

    def test_derived_defaults(self):
        spec = catalog.mixed(exponent=3.0)
        H = spec.hamiltonian
        assert H.b_m == pytest.approx(2.0)
        assert H.K == pytest.approx(1.0)
        assert H.eta == pytest.approx(1.0)

    def test_evaluation(self, eikonal):
        x = column([0.0, 0.5])
        p = column([2.0, 1.0])
        np.testing.assert_allclose(eikonal.hamiltonian(x, p), [4.0 - 1.0, 1.0 + 1.0])

    def test_gradient(self):
        H = catalog.mixed(exponent=3.0).hamiltonian
        x = column([0.2, 0.7, 0.9])
        p = column([-1.5, 0.5, 2.0])
        step = 1e-6
        quotient = (H(x, p + step) - H(x, p - step)) / (2.0 * step)
        np.testing.assert_allclose(H.gradient_p(x, p)[:, 0], quotient, rtol=1e-6)

    def test_gradient_bound(self):
        H = catalog.mixed(exponent=3.0).hamiltonian
        np.testing.assert_allclose(H.gradient_bound(column([0.3]), 2.0), [12.0])

    def test_custom_hamiltonian(self):
        H = custom_hamiltonian(lambda x, p: np.sum(p ** 2, axis=-1) + 0.5, exponent=2.0, b_m=1.0, K=0.0)
        x = column([0.1])
        p = column([3.0])
        assert H(x, p)[0] == pytest.approx(9.5)
        assert H.gradient_p(x, p)[0, 0] == pytest.approx(6.0, rel=1e-6)

    def test_nonpositive_coefficient_rejected(self):
        with pytest.raises(ConfigurationError):
            build({"preset": "eikonal", "hamiltonian": {"a": {"family": "constant", "offset": 0.0}}})

    def test_missing_modulus(self):
        H = custom_hamiltonian(lambda x, p: np.sum(p ** 2, axis=-1), exponent=2.0, b_m=1.0, K=0.0)
        with pytest.raises(ConfigurationError):
            H.zeta(np.array([0.1]))


class TestLevyData:
    """Test radial moments of the measure families"""

    def test_fractional_order_one(self, eikonal):
        levy = eikonal.levy
        assert levy.inner_second_moment(1.0) == pytest.approx(2.0)
        assert levy.tail_mass(1.0) == pytest.approx(2.0)
        assert levy.declared_C_nu() == pytest.approx(4.0)

    @pytest.mark.parametrize("order", [0.5, 1.0, 1.5])
    def test_radial_additivity(self, order):
        levy = LevyData(1, LevyFamily.FRACTIONAL, order=order)
        split = levy.radial_mass(0.1, 1.0) + levy.radial_mass(1.0, 10.0)
        assert split == pytest.approx(float(levy.radial_mass(0.1, 10.0)))
        assert float(levy.radial_mass(10.0, 1e30)) == pytest.approx(levy.tail_mass(10.0), rel=1e-6)

    @pytest.mark.parametrize("dimension", [1, 2])
    def test_finite_total_mass(self, dimension):
        levy = LevyData(dimension, LevyFamily.FINITE, radius=0.3, mass=2.0)
        assert float(levy.radial_mass(0.0, 5.0)) == pytest.approx(2.0)
        assert levy.tail_mass(0.3) == pytest.approx(0.0)
        assert levy.outer_radius == 0.3

    def test_atomic(self):
        levy = LevyData(1, LevyFamily.ATOMIC, atoms=(((0.25,), 1.0), ((-2.0,), 0.5)))
        assert float(levy.radial_mass(0.2, 1.0)) == pytest.approx(1.0)
        assert levy.inner_second_moment(1.0) == pytest.approx(0.0625)
        assert levy.tail_mass(1.0) == pytest.approx(0.5)
        assert levy.outer_radius == pytest.approx(2.0)

    def test_translation_jump(self, eikonal):
        z = column([0.1, -0.3])
        np.testing.assert_allclose(eikonal.levy.jump(column([0.2, 0.7]), z), z)

    def test_modulated_jump(self):
        spec = build({"preset": "eikonal", "jump": {"family": "modulated",
                                                     "g": {"family": "cosine", "offset": 1.0, "amplitude": 0.5}}})
        levy = spec.levy
        assert not levy.is_translation
        assert levy.scale_range == pytest.approx((0.5, 1.5, np.pi))
        assert levy.declared_C_j == pytest.approx(np.pi)
        np.testing.assert_allclose(levy.jump(column([0.0]), column([0.2])), [[0.3]])

    def test_constant_modulation_is_translation(self):
        spec = build({"preset": "eikonal", "jump": {"family": "modulated"}})
        assert spec.levy.is_translation

    def test_modulation_must_stay_positive(self):
        with pytest.raises(ConfigurationError):
            build({"preset": "eikonal", "jump": {"family": "modulated",
                                                 "g": {"family": "cosine", "offset": 1.0, "amplitude": 1.5}}})

    def test_invalid_order_in_library_use(self):
        with pytest.raises(ConfigurationError):
            LevyData(1, LevyFamily.FRACTIONAL, order=2.0)


class TestProblemSpec:
    """Test the assembled instance"""

    def test_with_discount(self, eikonal):
        discounted = eikonal.with_discount(0.1)
        assert discounted.discount == 0.1
        assert eikonal.discount == 0.0

    def test_require_initial(self, eikonal):
        assert eikonal.require_initial() is eikonal.initial
        with pytest.raises(ConfigurationError):
            replace(eikonal, initial=None).require_initial()

    def test_negative_discount(self, eikonal):
        with pytest.raises(ConfigurationError):
            replace(eikonal, discount=-1.0)

    def test_two_dimensional_build(self):
        spec = build({"preset": "eikonal", "dimension": 2, "diffusion": {"family": "constant", "scale": 0.2}})
        assert spec.dimension == 2
        A = spec.diffusion.covariance(np.array([[0.1, 0.2]]))
        np.testing.assert_allclose(A[0], 0.04 * np.eye(2))

    def test_null_space(self, first_order, eikonal):
        x = column([0.0, 0.3])
        assert all(basis.shape == (1, 1) for basis in first_order.diffusion.null_space(x))
        assert all(basis.shape == (1, 0) for basis in eikonal.diffusion.null_space(x))

    def test_initial_lipschitz_from_field(self):
        spec = build({"preset": "eikonal", "initial": {"family": "sine", "amplitude": 0.5}})
        assert spec.initial_lipschitz == pytest.approx(np.pi)
