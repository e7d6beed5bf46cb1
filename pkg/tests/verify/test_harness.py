"""
Tests for the comparison, exponential identity, sup bound and kappa verdicts
"""

import json

import numpy as np
import pytest

from levylab.core.errors import UsageError
from levylab.numerics.grid import GridFunction, TorusGrid
from levylab.problem import catalog
from levylab.verify.harness import (
    Verdict,
    bernstein_defects,
    bernstein_identity_check,
    comparison_harness,
    kappa_monotonicity_check,
    sup_bound_check,
)
from levylab.numerics.local import SchemeOperators
from levylab.verify.suite import ordered_pairs

GRID = TorusGrid(1, 32)


class TestVerdict:
    """Test the verdict record"""

    def test_row(self):
        verdict = Verdict(name="demo", instance="eikonal", passed=True, witness={"b": 2, "a": 1.5},
                          max_defect=1e-3)
        row = verdict.to_row()
        assert json.loads(row["witness"]) == {"a": 1.5, "b": 2}
        assert row["witness"].index('"a"') < row["witness"].index('"b"')
        assert row["passed"] is True

    @pytest.mark.parametrize("passed,informational,prefix", [
        (True, False, "PASS"),
        (False, True, "INFO"),
        (False, False, "FAIL"),
    ])
    def test_summary(self, passed, informational, prefix):
        verdict = Verdict(name="demo", instance="x", passed=passed, informational=informational)
        assert verdict.summary().startswith(prefix)

    def test_frozen(self):
        verdict = Verdict(name="demo", instance="x", passed=True)
        with pytest.raises(Exception):
            verdict.passed = False


class TestComparisonHarness:
    """Test ordering preservation along shared step sequences"""

    def test_ordered_pairs_stay_ordered(self, mixed, diagnostics):
        verdict = comparison_harness(mixed, ordered_pairs(GRID, 3, seed=0), 0.2, sample_every=5,
                                     diagnostics=diagnostics)
        assert verdict.passed
        assert verdict.max_defect <= 1e-12
        assert "comparison" in [row["event"] for row in diagnostics.rows]

    def test_rejects_unordered_pair(self, mixed):
        lower, upper = ordered_pairs(GRID, 1, seed=3)[0]
        with pytest.raises(UsageError):
            comparison_harness(mixed, [(upper, lower)], 0.1)


class TestBernsteinIdentity:
    """Test the exponential change of variables"""

    def test_eikonal(self, eikonal):
        grid = TorusGrid(1, 64)
        v = GridFunction.from_function(grid, lambda x: 0.3 * np.cos(2.0 * np.pi * x[:, 0]))
        verdict = bernstein_identity_check(eikonal, [v])
        assert verdict.passed
        assert verdict.witness["nonlocal_defect"] <= 1e-8

    def test_defect_shrinks_under_refinement(self, eikonal):
        defects = []
        for N in (32, 64):
            grid = TorusGrid(1, N)
            v = GridFunction.from_function(grid, lambda x: 0.3 * np.cos(2.0 * np.pi * x[:, 0]))
            defects.append(bernstein_defects(eikonal, v, SchemeOperators.build(eikonal, grid))[0])
        assert defects[1] < defects[0]

    def test_no_jumps(self, first_order):
        v = GridFunction.from_function(GRID, lambda x: 0.3 * np.sin(2.0 * np.pi * x[:, 0]))
        _, nonlocal_defect = bernstein_defects(first_order, v, SchemeOperators.build(first_order, GRID))
        assert nonlocal_defect == 0.0

    def test_needs_samples(self, eikonal):
        with pytest.raises(UsageError):
            bernstein_identity_check(eikonal, [])


class TestSupBound:
    """Test ||u_lambda|| <= H_0 / lambda"""

    @pytest.mark.parametrize("lam", [1.0, 0.5])
    def test_eikonal(self, lam):
        verdict = sup_bound_check(catalog.eikonal(discount=lam), GRID, tol=1e-6)
        assert verdict.passed
        assert verdict.witness["sup_norm"] <= verdict.witness["bound"]
        assert verdict.instance == f"eikonal@lam={lam:g}"

    def test_bound_matches_discount_sweep(self):
        """Test that an underestimated declared H_0 does not tighten the bound below sup |H(x, 0)|"""
        spec = catalog.eikonal(discount=1.0, hamiltonian={"H_0": 0.25})
        verdict = sup_bound_check(spec, GRID, tol=1e-6)
        assert verdict.passed
        assert verdict.witness["bound"] == pytest.approx(spec.hamiltonian.rest_bound(GRID.points) + 1e-5)
        assert verdict.witness["bound"] == pytest.approx(1.0 + 1e-5)


class TestKappaMonotonicity:
    """Test that max(u - v) never grows"""

    def test_eikonal(self, eikonal, diagnostics):
        verdict = kappa_monotonicity_check(eikonal, ordered_pairs(GRID, 2, seed=1), 0.2, sample_every=5,
                                           diagnostics=diagnostics)
        assert verdict.passed
        assert verdict.witness["violations"] == 0
