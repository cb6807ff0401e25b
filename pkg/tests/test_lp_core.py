import numpy as np
import pytest

from hetcache.lp_core import (
    LinearProgram,
    LpStatus,
    SolverError,
    format_lp,
    solve_lp,
)
from oracles import brute_force_lp, random_box_lp


def lp_from_parts(c, eq_rows, ub_rows, lo, hi):
    return LinearProgram(
        c=np.asarray(c, dtype=float),
        eq_rows=[(dict(r), float(b)) for r, b in eq_rows],
        ub_rows=[(dict(r), float(b)) for r, b in ub_rows],
        lo=np.asarray(lo, dtype=float),
        hi=np.asarray(hi, dtype=float),
    )


class TestSmallPrograms:
    def test_pure_box(self):
        # No rows at all: each variable sits at whichever bound its cost
        # prefers.
        sol = solve_lp(lp_from_parts([-1.0], [], [], [0.0], [1.0]))
        assert sol.is_optimal
        assert sol.x[0] == pytest.approx(1.0)
        assert sol.objective == pytest.approx(-1.0)

    def test_single_equality(self):
        sol = solve_lp(
            lp_from_parts([1.0, 2.0], [({0: 1.0, 1: 1.0}, 1.0)], [], [0, 0], [1, 1])
        )
        assert sol.is_optimal
        assert sol.objective == pytest.approx(1.0)
        assert sol.x[0] == pytest.approx(1.0)

    def test_infeasible_sum(self):
        sol = solve_lp(
            lp_from_parts([1.0, 1.0], [({0: 1.0, 1: 1.0}, 3.0)], [], [0, 0], [1, 1])
        )
        assert sol.status is LpStatus.INFEASIBLE

    def test_inequality_binding(self):
        sol = solve_lp(
            lp_from_parts(
                [-1.0, -1.0], [], [({0: 1.0, 1: 2.0}, 2.0)], [0, 0], [5, 5]
            )
        )
        assert sol.is_optimal
        # x0 as large as possible dominates: x = (2, 0).
        assert sol.objective == pytest.approx(-2.0)

    def test_negative_lower_bounds(self):
        sol = solve_lp(
            lp_from_parts([1.0, 1.0], [({0: 1.0, 1: -1.0}, 0.0)], [], [-2, -2], [2, 2])
        )
        assert sol.is_optimal
        assert sol.objective == pytest.approx(-4.0)

    def test_redundant_equalities(self):
        rows = [({0: 1.0, 1: 1.0}, 1.0), ({0: 2.0, 1: 2.0}, 2.0)]
        sol = solve_lp(lp_from_parts([1.0, 0.0], rows, [], [0, 0], [1, 1]))
        assert sol.is_optimal
        assert sol.objective == pytest.approx(0.0)

    def test_fixed_variable(self):
        sol = solve_lp(
            lp_from_parts([-3.0, 1.0], [], [({0: 1.0, 1: 1.0}, 2.0)], [0.5, 0], [0.5, 9])
        )
        assert sol.is_optimal
        assert sol.x[0] == pytest.approx(0.5)
        assert sol.objective == pytest.approx(-1.5)

    def test_beale_degeneracy(self):
        # The classic cycling example for largest-coefficient pricing; the
        # Bland fallback must still reach the optimum -1/20.
        c = [-0.75, 150.0, -0.02, 6.0]
        ub = [
            ({0: 0.25, 1: -60.0, 2: -0.04, 3: 9.0}, 0.0),
            ({0: 0.5, 1: -90.0, 2: -0.02, 3: 3.0}, 0.0),
            ({2: 1.0}, 1.0),
        ]
        sol = solve_lp(lp_from_parts(c, [], ub, [0] * 4, [1e3] * 4))
        assert sol.is_optimal
        assert sol.objective == pytest.approx(-0.05, abs=1e-9)

    def test_malformed_program_rejected(self):
        lp = lp_from_parts([1.0], [({2: 1.0}, 0.0)], [], [0], [1])
        with pytest.raises(ValueError, match="references column"):
            solve_lp(lp)
        lp2 = lp_from_parts([1.0], [], [], [0], [np.inf])
        with pytest.raises(ValueError, match="finite"):
            solve_lp(lp2)


class TestOracleAgreement:
    def test_random_suite(self):
        # 50 seeded random programs against the vertex-enumeration oracle:
        # statuses must match and optimal objectives agree to 1e-7.
        rng = np.random.default_rng(1234)
        n_optimal = n_infeasible = 0
        for trial in range(50):
            c, eq, ub, lo, hi = random_box_lp(rng)
            status, _, obj = brute_force_lp(c, eq, ub, lo, hi)
            sol = solve_lp(lp_from_parts(c, eq, ub, lo, hi))
            if status == "optimal":
                n_optimal += 1
                assert sol.is_optimal, f"trial {trial}: solver says {sol.status}"
                assert sol.objective == pytest.approx(obj, abs=1e-7), f"trial {trial}"
            else:
                n_infeasible += 1
                assert sol.status is LpStatus.INFEASIBLE, f"trial {trial}"
        # The generator is tuned to exercise both outcomes.
        assert n_optimal >= 20 and n_infeasible >= 5

    def test_solutions_are_feasible(self):
        rng = np.random.default_rng(77)
        for _ in range(30):
            c, eq, ub, lo, hi = random_box_lp(rng)
            lp = lp_from_parts(c, eq, ub, lo, hi)
            sol = solve_lp(lp)
            if sol.is_optimal:
                assert lp.check_point(sol.x) == []


class TestDeterminismAndScaling:
    def test_same_program_same_vertex(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            c, eq, ub, lo, hi = random_box_lp(rng)
            a = solve_lp(lp_from_parts(c, eq, ub, lo, hi))
            b = solve_lp(lp_from_parts(c, eq, ub, lo, hi))
            assert a.status == b.status
            if a.is_optimal:
                assert np.array_equal(a.x, b.x)

    def test_objective_scaling(self):
        rng = np.random.default_rng(11)
        count = 0
        while count < 10:
            c, eq, ub, lo, hi = random_box_lp(rng)
            base = solve_lp(lp_from_parts(c, eq, ub, lo, hi))
            if not base.is_optimal:
                continue
            count += 1
            scaled = solve_lp(lp_from_parts(3.5 * np.asarray(c), eq, ub, lo, hi))
            assert scaled.is_optimal
            assert scaled.objective == pytest.approx(3.5 * base.objective, abs=1e-6)
            assert np.allclose(scaled.x, base.x, atol=1e-9)


def test_format_lp_lists_every_row():
    lp = lp_from_parts(
        [1.0, -1.0], [({0: 1.0, 1: 1.0}, 1.0)], [({0: 2.0}, 0.5)], [0, 0], [1, 1]
    )
    lp.names = ("alpha", "beta")
    text = format_lp(lp)
    lines = text.splitlines()
    assert lines[0].startswith("min")
    assert any("== 1" in ln for ln in lines)
    assert any("<= 0.5" in ln for ln in lines)
    assert sum("alpha" in ln for ln in lines) >= 3


def test_iteration_limit_raises():
    rng = np.random.default_rng(3)
    c, eq, ub, lo, hi = random_box_lp(rng)
    with pytest.raises(SolverError, match="iteration limit"):
        solve_lp(lp_from_parts([-1.0, -1.0], [({0: 1.0, 1: 1.0}, 1.0)], [], [0, 0], [1, 1]),
                 max_iterations=0)
