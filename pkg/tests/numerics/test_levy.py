"""
Tests for the Levy-Ito quadrature table, its exponential counterpart and
the Fourier reference of the fractional operator
"""

from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from levylab.core.config import Settings
from levylab.core.errors import ConfigurationError, DomainError, UsageError
from levylab.core.monitoring import DiagnosticsLog
from levylab.numerics.grid import GridFunction, TorusGrid
from levylab.numerics.levy import (
    apply_Ij,
    apply_Ij_values,
    apply_Jj,
    apply_Jj_values,
    build_table,
    fractional_multiplier,
    fractional_multiplier_closed_form,
    fractional_reference,
    multiplier_table,
    radial_edges,
    small_jump_defect,
)
from levylab.problem import catalog
from levylab.problem.models import ProblemConfig
from levylab.problem.spec import build_problem


def build(document):
    return build_problem(ProblemConfig.model_validate(document))


def fractional(order, **extra):
    return catalog.eikonal(levy={"family": "fractional", "order": order}, **extra)


def modulated_finite():
    return build({"preset": "eikonal", "levy": {"family": "finite", "radius": 0.3, "mass": 2.0},
                  "jump": {"family": "modulated", "g": {"family": "cosine", "offset": 1.0, "amplitude": 0.5}}})


def wave(grid, k=1):
    return GridFunction.from_function(grid, lambda x: np.cos(2.0 * np.pi * k * x[:, 0]))


class TestQuadratureTable:
    """Test the structure of the nonlocal stencil"""

    def test_edges(self, eikonal):
        h = 1.0 / 64
        edges = radial_edges(eikonal.levy, h, 10.0, 16, h)
        assert edges[0] == h
        assert edges[-1] == 10.0
        assert 1.0 in edges
        assert np.all(np.diff(edges) <= h * (1.0 + 1e-12))
        assert np.all(edges[1:] / edges[:-1] <= 10.0 ** (1.0 / 16) * (1.0 + 1e-12))

    def test_weights_nonnegative(self, eikonal, grid64):
        table = build_table(eikonal, grid64)
        assert np.all(table.stencil_weight >= 0.0)
        assert np.all(table.second_order >= 0.0)
        assert table.translation_invariant
        assert table.delta == grid64.h

    def test_symmetric_measure_has_no_drift(self, eikonal, grid64):
        assert not np.any(build_table(eikonal, grid64).drift)

    def test_kappa_small(self, eikonal, grid64):
        """kappa = 1/2 int_{|z|<h} |z|^2 |z|^-2 dz = h for order one"""
        table = build_table(eikonal, grid64)
        np.testing.assert_allclose(table.kappa_small, grid64.h)

    def test_tail_reporting(self, eikonal, grid64):
        table = build_table(eikonal, grid64, tail_radius=4.0, tail_closure=False)
        assert table.dropped_tail_mass == pytest.approx(0.5)
        assert not table.tail_closure

    def test_tail_radius_below_one(self, eikonal, grid64):
        with pytest.raises(ConfigurationError):
            build_table(eikonal, grid64, tail_radius=0.5)

    def test_diagnostics(self, eikonal, grid64):
        log = DiagnosticsLog()
        build_table(eikonal, grid64, diagnostics=log)
        events = [row["event"] for row in log.rows]
        assert "table_built" in events

    def test_grid_mismatch(self, eikonal, grid64, grid32):
        table = build_table(eikonal, grid64)
        with pytest.raises(UsageError):
            apply_Ij(table, GridFunction.constant(grid32, 0.0))

    def test_node_count_grows_with_Q(self, eikonal, grid64):
        assert build_table(eikonal, grid64, nodes_per_decade=32).node_count > \
            build_table(eikonal, grid64, nodes_per_decade=8).node_count


def atomic_2d(*atoms):
    return catalog.atomic_degenerate(dimension=2, levy={"family": "atomic",
                                                        "atoms": [{"z": list(z), "mass": 1.0} for z in atoms]})


class TestSmallJumpTensor:
    """Test the second-order term built from the small-jump second-moment tensor"""

    def test_isotropic_split_evenly(self, grid2d):
        table = build_table(build({"preset": "eikonal", "dimension": 2}), grid2d, tail_radius=2.0)
        np.testing.assert_allclose(table.kappa_tensor[:, 0, 1], 0.0, atol=1e-15)
        np.testing.assert_allclose(table.kappa_tensor[:, 0, 0], table.kappa_tensor[:, 1, 1])
        assert not np.any(table.cross_order)

    def test_axis_atom_diffuses_along_its_axis_only(self, grid2d):
        """Test that an atom at (h/2, 0) leaves functions of x_2 untouched"""
        h = grid2d.h
        table = build_table(atomic_2d((0.5 * h, 0.0)), grid2d)
        np.testing.assert_allclose(table.kappa_small, 0.5 * (0.5 * h) ** 2)
        np.testing.assert_allclose(table.second_order[:, 0], 0.5 * (0.5 * h) ** 2)
        np.testing.assert_allclose(table.second_order[:, 1], 0.0)
        u = np.cos(2.0 * np.pi * grid2d.points[:, 1])
        np.testing.assert_allclose(apply_Ij_values(table, u), 0.0, atol=1e-12)

    @pytest.mark.parametrize("z, sign", [((0.5, 0.5), 1.0), ((0.5, -0.5), -1.0)])
    def test_diagonal_atom_uses_diagonal_stencil(self, grid2d, z, sign):
        """Test that an atom along (1, +-1) diffuses along that diagonal only"""
        h = grid2d.h
        table = build_table(atomic_2d((z[0] * h, z[1] * h)), grid2d)
        np.testing.assert_allclose(table.cross_order, 0.5 * 0.25 * h ** 2)
        np.testing.assert_allclose(table.cross_sign, sign)
        np.testing.assert_allclose(table.second_order, 0.0, atol=1e-18)
        x = grid2d.points
        along_normal = np.cos(2.0 * np.pi * (x[:, 0] - sign * x[:, 1]))
        np.testing.assert_allclose(apply_Ij_values(table, along_normal), 0.0, atol=1e-12)
        along_jump = np.cos(2.0 * np.pi * (x[:, 0] + sign * x[:, 1]))
        assert apply_Ij_values(table, along_jump)[0] < 0.0

    def test_two_skewed_atoms_split_exactly(self, grid2d):
        h = grid2d.h
        table = build_table(atomic_2d((0.6 * h, 0.2 * h), (0.2 * h, 0.6 * h)), grid2d)
        K = table.kappa_tensor[0]
        np.testing.assert_allclose(K, 0.5 * h ** 2 * np.array([[0.4, 0.24], [0.24, 0.4]]))
        np.testing.assert_allclose(table.cross_order, K[0, 1])
        np.testing.assert_allclose(table.second_order, K[0, 0] - K[0, 1])
        assert table.clipped_points == 0

    def test_single_skewed_atom_is_clipped(self, grid2d):
        """Test that a rank-one tensor off the diagonals keeps nonnegative weights and reports clipping"""
        h = grid2d.h
        log = DiagnosticsLog()
        table = build_table(atomic_2d((0.6 * h, 0.2 * h)), grid2d, diagnostics=log)
        K = table.kappa_tensor[0]
        np.testing.assert_allclose(table.cross_order, K[1, 1])
        np.testing.assert_allclose(table.second_order[:, 0], K[0, 0] - K[1, 1])
        np.testing.assert_allclose(table.second_order[:, 1], 0.0, atol=1e-18)
        assert table.clipped_points == grid2d.size
        assert "defect_clip_warning" in [row["event"] for row in log.rows]

    def test_exponential_identity_with_cross_term(self, grid2d):
        h = grid2d.h
        table = build_table(atomic_2d((0.5 * h, 0.5 * h), (0.25, 0.0)), grid2d)
        x = grid2d.points
        v = 0.3 * np.cos(2.0 * np.pi * x[:, 0]) * np.sin(2.0 * np.pi * x[:, 1])
        linear = apply_Ij_values(table, np.exp(v))
        exponential = np.exp(v) * apply_Jj_values(table, v)
        np.testing.assert_allclose(linear, exponential, atol=1e-9 * np.abs(linear).max())


class TestLevyOperator:
    """Test I_h against exact values"""

    @pytest.mark.parametrize("make_spec", [
        lambda: catalog.eikonal(),
        lambda: catalog.mixed(),
        lambda: catalog.atomic_degenerate(),
        modulated_finite,
    ])
    def test_constants_map_to_zero(self, make_spec, grid64):
        table = build_table(make_spec(), grid64)
        result = apply_Ij_values(table, np.full(grid64.size, 3.7))
        np.testing.assert_allclose(result, 0.0, atol=1e-10)

    @pytest.mark.parametrize("order", [0.5, 1.0, 1.5])
    def test_translation_equivariance(self, order, grid64):
        """Test that shifting the input by one cell shifts the output"""
        table = build_table(fractional(order), grid64)
        rng = np.random.default_rng(1)
        values = rng.normal(size=grid64.size)
        shifted_then_applied = apply_Ij_values(table, grid64.shift(values, 0, 5))
        applied_then_shifted = grid64.shift(apply_Ij_values(table, values), 0, 5)
        np.testing.assert_allclose(shifted_then_applied, applied_then_shifted, atol=1e-12 * table.total_weight.max())

    def test_single_atom_is_exact(self):
        """One atom at z = 1/4 lands exactly on a grid point"""
        grid = TorusGrid(1, 64)
        table = build_table(catalog.atomic_degenerate(), grid)
        u = wave(grid).values
        expected = np.roll(u, -16) - u - 0.25 * (u - np.roll(u, 1)) / grid.h
        np.testing.assert_allclose(apply_Ij_values(table, u), expected, atol=1e-12)

    def test_maximum_principle(self, mixed, grid64):
        """At a global maximum of u, I_h u <= 0"""
        table = build_table(mixed, grid64)
        u = wave(grid64)
        top = int(np.argmax(u.values))
        assert apply_Ij(table, u).values[top] <= 0.0

    @pytest.mark.parametrize("order", [0.5, 1.0, 1.5])
    def test_matches_fourier_reference(self, order):
        grid = TorusGrid(1, 128)
        spec = fractional(order)
        u = wave(grid)
        reference = fractional_reference(u, order, spec=spec).values
        approximation = apply_Ij(build_table(spec, grid), u).values
        assert np.abs(approximation - reference).max() <= 1e-2 * np.abs(reference).max()

    @pytest.mark.parametrize("order", [0.5, 1.0, 1.5])
    def test_reference_error_does_not_grow_with_Q(self, order):
        """Test that doubling the nodes per decade never makes the error worse"""
        grid = TorusGrid(1, 128)
        spec = fractional(order)
        u = wave(grid)
        reference = fractional_reference(u, order, spec=spec).values
        errors = [np.abs(apply_Ij(build_table(spec, grid, nodes_per_decade=Q), u).values - reference).max()
                  for Q in (8, 16, 32)]
        scale = np.abs(reference).max()
        assert errors[1] <= 1.02 * errors[0] + 1e-6 * scale
        assert errors[2] <= 1.02 * errors[1] + 1e-6 * scale

    def test_two_dimensional(self):
        grid = TorusGrid(2, 16)
        spec = build({"preset": "eikonal", "dimension": 2})
        table = build_table(spec, grid, tail_radius=2.0)
        np.testing.assert_allclose(apply_Ij_values(table, np.ones(grid.size)), 0.0, atol=1e-10)
        u = np.cos(2.0 * np.pi * grid.points[:, 0])
        result = apply_Ij_values(table, u)
        assert result[0] < 0.0
        np.testing.assert_allclose(result, grid.shift(result, 1, 3), atol=1e-10)


MONOTONE_SPECS = {
    "eikonal": lambda: catalog.eikonal(),
    "mixed": lambda: catalog.mixed(),
    "atomic": lambda: catalog.atomic_degenerate(),
    "modulated": modulated_finite,
}


@lru_cache(maxsize=None)
def monotone_table(name):
    return build_table(MONOTONE_SPECS[name](), TorusGrid(1, 32))


bounded = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)
bumps = st.floats(min_value=0.0, max_value=1.0, allow_nan=False, allow_infinity=False)


class TestLevyMonotonicity:
    """Test that I_h is monotone in the values away from the evaluation point"""

    @pytest.mark.parametrize("name", sorted(MONOTONE_SPECS))
    @hypothesis_settings(max_examples=25, deadline=None)
    @given(lower=st.lists(bounded, min_size=32, max_size=32), bump=st.lists(bumps, min_size=32, max_size=32),
           touch=st.integers(min_value=0, max_value=31))
    def test_touching_pairs(self, name, lower, bump, touch):
        """Test that u <= v with u(x) = v(x) gives I_h u(x) <= I_h v(x)"""
        table = monotone_table(name)
        u = np.asarray(lower)
        gap = np.asarray(bump)
        gap[touch] = 0.0
        v = u + gap
        h = table.grid.h
        scale = (1.0 + table.total_weight.max() + 4.0 * table.second_order.max() / h ** 2
                 + 2.0 * np.abs(table.drift).max(initial=0.0) / h + table.tail_mass)
        assert apply_Ij_values(table, u)[touch] <= apply_Ij_values(table, v)[touch] + 1e-12 * scale


class TestExponentialOperator:
    """Test I_h(e^v) = e^v J_h(v) and the overflow guard"""

    @pytest.mark.parametrize("make_spec", [
        lambda: catalog.eikonal(),
        lambda: catalog.atomic_degenerate(),
        modulated_finite,
    ])
    def test_identity(self, make_spec, grid64):
        table = build_table(make_spec(), grid64)
        v = 0.3 * np.cos(2.0 * np.pi * grid64.points[:, 0]) + 0.1 * np.sin(6.0 * np.pi * grid64.points[:, 0])
        linear = apply_Ij_values(table, np.exp(v))
        exponential = np.exp(v) * apply_Jj_values(table, v)
        np.testing.assert_allclose(linear, exponential, atol=1e-9 * np.abs(linear).max())

    def test_constants_map_to_zero(self, eikonal, grid64):
        table = build_table(eikonal, grid64)
        np.testing.assert_allclose(apply_Jj(table, GridFunction.constant(grid64, 5.0)).values, 0.0, atol=1e-12)

    def test_overflow_guard(self, eikonal, grid64):
        table = build_table(eikonal, grid64)
        values = np.zeros(grid64.size)
        values[7] = 800.0
        with pytest.raises(DomainError):
            apply_Jj_values(table, values)

    def test_custom_guard(self, eikonal, grid64):
        table = build_table(eikonal, grid64)
        values = np.zeros(grid64.size)
        values[7] = 5.0
        with pytest.raises(DomainError):
            apply_Jj_values(table, values, guard=Settings(exp_guard=1.0).exp_guard)


class TestSmallJumpDefect:
    """Test the small-jump gap between J and I"""

    @pytest.mark.parametrize("N", [64, 128])
    def test_scaled_defect_bounded(self, eikonal, N):
        grid = TorusGrid(1, N)
        table = build_table(eikonal, grid)
        defect = small_jump_defect(table, GridFunction(grid, 0.3 * wave(grid).values), order=1.0)
        assert 0.0 < defect.ratio <= 1.5

    def test_defect_vanishes_under_refinement(self, eikonal):
        defects = []
        for N in (32, 64, 128):
            grid = TorusGrid(1, N)
            g = GridFunction(grid, 0.3 * wave(grid).values)
            defects.append(small_jump_defect(build_table(eikonal, grid), g, order=1.0).defect)
        assert defects[0] > defects[1] > defects[2]


class TestFourierMultiplier:
    """Test the adaptive-quadrature multiplier"""

    @pytest.mark.parametrize("order", [0.5, 1.0, 1.5])
    @pytest.mark.parametrize("k", [1, 2, 7, 32])
    def test_closed_form(self, order, k):
        assert fractional_multiplier(k, order) == pytest.approx(fractional_multiplier_closed_form(k, order), rel=1e-7)

    def test_zero_mode(self):
        assert fractional_multiplier(0, 1.0) == 0.0

    def test_table(self):
        quadrature, closed = multiplier_table(16, 1.5)
        assert quadrature.shape == (9,)
        np.testing.assert_allclose(quadrature, closed, rtol=1e-7)

    def test_reference_scales_with_intensity(self, grid64):
        u = wave(grid64, 2)
        once = fractional_reference(u, 1.0).values
        twice = fractional_reference(u, 1.0, intensity=2.0).values
        np.testing.assert_allclose(twice, 2.0 * once, atol=1e-12)
        np.testing.assert_allclose(once, -fractional_multiplier(2, 1.0) * u.values, atol=1e-9)

    def test_reference_rejects_two_dimensions(self):
        grid = TorusGrid(2, 8)
        with pytest.raises(UsageError):
            fractional_reference(GridFunction.constant(grid, 0.0), 1.0)

    def test_reference_rejects_modulated_jumps(self, grid64):
        with pytest.raises(UsageError):
            fractional_reference(wave(grid64), 1.0, spec=modulated_finite())
