"""
Tests for the acceptance suite plumbing and its cheap criteria
"""

from pathlib import Path

import numpy as np
import pytest

from levylab.core.errors import UsageError
from levylab.core.export import frame_digest
from levylab.core.monitoring import DiagnosticsLog
from levylab.numerics.grid import TorusGrid
from levylab.problem.models import NumericsConfig, load_experiment
from levylab.verify.harness import Verdict
from levylab.verify.suite import CRITERIA, acceptance_suite, ordered_pairs, verdicts_frame

DESK = NumericsConfig(points_per_axis=32, check_samples=256, seeds=[0], T_final=1.0, checkpoints=[0.5, 1.0],
                      lambda_schedule=[0.1, 0.05, 0.025, 0.0125], discounts=[1.0], tolerance=1e-6)
CONFIGS = Path(__file__).resolve().parents[2] / "configs"


class TestOrderedPairs:
    """Test the random ordered initial data"""

    def test_ordered(self):
        for lower, upper in ordered_pairs(TorusGrid(1, 64), 10, seed=4):
            assert np.all(upper.values - lower.values >= 0.0)

    def test_seeded(self):
        grid = TorusGrid(1, 32)
        first = ordered_pairs(grid, 3, seed=9)
        second = ordered_pairs(grid, 3, seed=9)
        for (a, _), (b, _) in zip(first, second):
            np.testing.assert_array_equal(a.values, b.values)


class TestVerdictsFrame:
    """Test the checks.csv layout"""

    def test_columns(self):
        frame = verdicts_frame([Verdict(name="a", instance="b", passed=True)])
        assert list(frame.columns) == ["name", "instance", "passed", "informational", "witness", "max_defect"]
        assert len(frame) == 1

    def test_empty(self):
        assert verdicts_frame([]).empty


class TestAcceptanceSuite:
    """Test selected criteria at desk scale"""

    def test_registry(self):
        assert sorted(CRITERIA) == list(range(1, 12))

    def test_unknown_criterion(self):
        with pytest.raises(UsageError):
            acceptance_suite(DESK, criteria=[12])

    def test_assumptions(self, diagnostics):
        verdicts = acceptance_suite(DESK, criteria=[1], diagnostics=diagnostics)
        assert [v.name for v in verdicts] == ["assumptions"]
        assert verdicts[0].passed
        assert diagnostics.rows[-1]["event"] == "verdict"

    def test_covering(self):
        verdicts = acceptance_suite(DESK, criteria=[10])
        assert [v.name for v in verdicts] == ["covering_full_support", "covering_atomic_fails",
                                              "profile_uniqueness"]
        assert verdicts[0].passed
        assert verdicts[1].passed

    def test_determinism(self):
        verdict = acceptance_suite(DESK, criteria=[11])[0]
        assert verdict.name == "determinism"
        assert verdict.passed

    @pytest.mark.slow
    def test_desk_suite(self):
        numerics = NumericsConfig(points_per_axis=64, T_final=20.0, checkpoints=[5.0, 10.0, 20.0],
                                  discounts=[1.0, 0.1], check_samples=512, seeds=[0])
        verdicts = acceptance_suite(numerics)
        failed = [v.summary() for v in verdicts if not v.passed]
        assert not failed, failed


class TestReproducibility:
    """Test that whole suite runs repeat exactly"""

    def test_repeated_runs_share_digests(self):
        digests = []
        for _ in range(2):
            log = DiagnosticsLog()
            verdicts = acceptance_suite(DESK, seed=3, criteria=[1, 2, 9, 10], diagnostics=log)
            digests.append((frame_digest(verdicts_frame(verdicts)), frame_digest(log.to_frame())))
        assert digests[0] == digests[1]


class TestAcceptanceScale:
    """Test the criteria that carry the scheme's guarantees at the shipped verify-all scale"""

    @pytest.mark.slow
    @pytest.mark.parametrize("criterion", [1, 2, 3, 9])
    def test_criterion(self, criterion):
        config = load_experiment(CONFIGS / "verify_all.yaml")
        assert config.numerics.points_per_axis == 256
        assert config.numerics.T_final == 50.0
        verdicts = acceptance_suite(config.numerics, config.seed, criteria=[criterion])
        failed = [v.summary() for v in verdicts if not v.passed]
        assert not failed, failed
