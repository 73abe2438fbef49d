import json
import math

import pytest

from hebmix.phase import (
    BracketError,
    PHASE_PARAMAGNET,
    PHASE_RETRIEVAL_META,
    PHASE_RETRIEVAL_STABLE,
    PHASE_SPIN_GLASS,
    boundaries_to_json,
    BoundaryCurve,
    classify_point,
    conjecture_shift,
    first_order_line,
    grid_to_csv,
    retrieval_existence_boundary,
    scan_grid,
    second_order_line_analytic,
    second_order_line_numeric,
)
from hebmix.rs import SolverSettings, enumerate_branches


class TestSecondOrderLine:
    def test_analytic_values(self):
        assert second_order_line_analytic(0.0) == 1.0
        assert second_order_line_analytic(1.0) == 0.5
        assert second_order_line_analytic(0.04) == pytest.approx(1 / 1.2, abs=1e-15)

    def test_analytic_rejects_negative(self):
        with pytest.raises(ValueError):
            second_order_line_analytic(-0.1)

    @pytest.mark.parametrize("alpha", [0.1, 0.5])
    def test_numeric_matches_analytic(self, alpha):
        got = second_order_line_numeric(alpha)
        assert got == pytest.approx(second_order_line_analytic(alpha), abs=1e-3)

    def test_bracket_failure_is_loud(self):
        with pytest.raises(BracketError):
            second_order_line_numeric(0.1, bracket=(1e-3, 2e-3))

    def test_requires_positive_alpha(self):
        with pytest.raises(ValueError):
            second_order_line_numeric(0.0)


class TestExistenceAndFirstOrder:
    def test_existence_interval_at_moderate_beta(self):
        a_max = retrieval_existence_boundary(3.0)
        assert 0.0 < a_max < 0.138

    def test_existence_requires_low_temperature(self):
        with pytest.raises(ValueError):
            retrieval_existence_boundary(0.9)

    def test_first_order_below_existence(self):
        a_star = first_order_line(3.0)
        a_max = retrieval_existence_boundary(3.0)
        assert a_star < a_max
        sols = [s for s in enumerate_branches(a_star - 5e-3, 3.0) if s.converged]
        ret = max((s for s in sols if s.branch_label == "retrieval"),
                  key=lambda s: s.free_energy, default=None)
        sg = max((s for s in sols if s.branch_label == "spin-glass"),
                 key=lambda s: s.free_energy, default=None)
        assert ret is not None and sg is not None
        assert ret.free_energy > sg.free_energy  # retrieval dominates below the line


class TestClassifyPoint:
    def test_zero_load_column_is_stable_retrieval(self):
        for beta in (1.2, 2.0, 5.0):
            assert classify_point(0.0, beta).phase == PHASE_RETRIEVAL_STABLE

    def test_paramagnet_below_the_line(self):
        assert classify_point(0.2, 0.6).phase == PHASE_PARAMAGNET

    def test_spin_glass_beyond_existence(self):
        assert classify_point(0.3, 5.0).phase == PHASE_SPIN_GLASS

    def test_metastable_retrieval_between_lines(self):
        assert classify_point(0.1, 5.0).phase == PHASE_RETRIEVAL_META

    def test_stable_retrieval_at_low_load(self):
        assert classify_point(0.02, 5.0).phase == PHASE_RETRIEVAL_STABLE


class TestConjectureShift:
    def test_zero_shift_identity(self):
        a = conjecture_shift(0.05, 0.0, 5.0)
        b = enumerate_branches(0.05, 5.0)
        assert [s.to_record() for s in a if s.converged] == \
               [s.to_record() for s in b if s.converged]

    def test_shift_is_bitwise_code_identity(self):
        a = conjecture_shift(0.03, 0.02, 5.0)
        b = conjecture_shift(0.05, 0.0, 5.0)
        ra = [s.to_record() for s in a if s.converged]
        rb = [s.to_record() for s in b if s.converged]
        assert json.dumps(ra) == json.dumps(rb)

    def test_shift_beyond_existence_kills_retrieval(self):
        sols = [s for s in conjecture_shift(0.10, 0.10, 5.0) if s.converged]
        assert all(s.branch_label != "retrieval" for s in sols)

    def test_rejects_negative_loads(self):
        with pytest.raises(ValueError):
            conjecture_shift(-0.1, 0.0, 2.0)


class TestScanGrid:
    def test_grid_classification_and_determinism(self):
        pts = scan_grid((0.0, 0.2), (0.5, 5.0), (4, 5))
        assert len(pts) == 20
        for pt in pts:
            expected_para = pt.beta < second_order_line_analytic(pt.alpha) - 1e-9
            if expected_para:
                assert pt.phase == PHASE_PARAMAGNET, (pt.alpha, pt.beta, pt.phase)
            else:
                assert pt.phase != PHASE_PARAMAGNET, (pt.alpha, pt.beta, pt.phase)
        again = scan_grid((0.0, 0.2), (0.5, 5.0), (4, 5))
        assert grid_to_csv(pts) == grid_to_csv(again)

    def test_csv_shape(self):
        pts = scan_grid((0.0, 0.1), (0.5, 2.0), 2)
        text = grid_to_csv(pts)
        lines = text.strip().split("\n")
        assert lines[0].startswith("# schema=hebmix.grid.v1")
        assert lines[1].split(",")[:4] == ["alpha", "beta", "gamma", "phase"]
        assert len(lines) == 2 + 4

    def test_rejects_empty_grid(self):
        with pytest.raises(ValueError):
            scan_grid((0.0, 0.1), (0.5, 2.0), 0)


class TestBoundarySerialization:
    def test_json_roundtrip(self):
        curve = BoundaryCurve(kind="second-order", points=((0.1, 0.76), (0.5, 0.59)),
                              tolerance=1e-4)
        blob = boundaries_to_json([curve])
        parsed = json.loads(blob)
        assert parsed["schema"] == "hebmix.boundary.v1"
        assert parsed["curves"][0]["kind"] == "second-order"
        assert parsed["curves"][0]["points"][0]["alpha"] == 0.1
