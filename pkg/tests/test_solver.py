import numpy as np
import pytest

from arcscreen.assembly import assemble_system
from arcscreen.solver import SolverError, Solution, condition_estimate, solve
from tests.conftest import make_spec


class TestSolve:
    def test_residual_at_machine_level(self, ex1_enriched_64):
        sol, _ = ex1_enriched_64
        assert sol.residual_norm <= 1e-10

    def test_condition_reported(self, ex1_enriched_64):
        sol, _ = ex1_enriched_64
        assert np.isfinite(sol.condition) and sol.condition > 1.0

    def test_solution_lengths(self, ex1_enriched_64):
        sol, _ = ex1_enriched_64
        assert len(sol.U) == sol.system.u_space.dim
        assert len(sol.psi) == sol.system.psi_space.dim

    def test_standard_density_endpoint_dofs_inactive(self, ex1_standard_64):
        sol, _ = ex1_standard_64
        n = sol.system.psi_space.n_hats
        assert sol.psi[0] == 0.0
        assert sol.psi[n - 1] == 0.0
        # interior coefficients are genuinely nonzero
        assert np.max(np.abs(sol.psi[1:n - 1])) > 0.1

    def test_enriched_keeps_all_density_dofs(self, ex1_enriched_64):
        sol, _ = ex1_enriched_64
        n = sol.system.psi_space.n_hats
        assert sol.psi[0] != 0.0 and sol.psi[n - 1] != 0.0

    def test_refinement_is_idempotent_at_machine_level(self):
        spec = make_spec("ex1", "enriched", 16)
        system = assemble_system(spec)
        a = solve(system, refine=True)
        b = solve(system, refine=False)
        assert np.max(np.abs(a.U - b.U)) < 1e-11

    def test_singular_matrix_raises(self):
        spec = make_spec("ex1", "standard", 8)
        system = assemble_system(spec)
        system.A[:] = 0.0
        system.C[:] = 0.0
        system.F[:] = 0.0
        import warnings
        with pytest.raises(SolverError), warnings.catch_warnings():
            warnings.simplefilter("ignore")  # expected exact-zero-pivot note
            solve(system)


class TestConditionEstimate:
    def test_identity(self):
        assert condition_estimate(np.eye(5)) == pytest.approx(1.0)

    def test_diagonal_scaling(self):
        assert condition_estimate(np.diag([1.0, 1e-6])) \
            == pytest.approx(1e6, rel=1e-10)

    def test_singular_is_infinite(self):
        M = np.ones((3, 3))
        assert condition_estimate(M) == np.inf

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            condition_estimate(np.ones((2, 3)))


class TestEvaluation:
    def test_eval_u_matches_space(self, ex1_enriched_64):
        sol, _ = ex1_enriched_64
        s = np.linspace(-1, 1, 57)
        direct = sol.system.u_space.eval_function(sol.U, s)
        assert np.allclose(sol.eval_U(s), direct)

    def test_eval_psi_rejects_endpoint_for_enriched(self, ex1_enriched_64):
        sol, _ = ex1_enriched_64
        with pytest.raises(ValueError, match="endpoint"):
            sol.eval_psi(-1.0)
        # interior evaluation works
        assert np.isfinite(sol.eval_psi(0.0))

    def test_eval_psi_endpoint_ok_for_standard(self, ex1_standard_64):
        sol, _ = ex1_standard_64
        assert sol.eval_psi(-1.0) == 0.0

    def test_mirror_symmetry_of_segment_solution(self, ex1_enriched_64):
        # even data on the symmetric segment: U and psi are even in s
        sol, _ = ex1_enriched_64
        s = np.linspace(-0.9, 0.9, 41)
        assert np.max(np.abs(sol.eval_U(s) - sol.eval_U(-s))) < 1e-8
        assert np.max(np.abs(sol.eval_psi(s) - sol.eval_psi(-s))) < 1e-8
