import numpy as np
import pytest

from arcscreen.assembly import assemble_system, bilinear_apply, dump_matrix
from arcscreen.quadrature import adaptive_integrate
from tests.conftest import make_spec


@pytest.fixture(scope="module")
def ex1_system():
    spec = make_spec("ex1", "enriched", 16)
    return assemble_system(spec), spec


class TestBlockStructure:
    def test_block_shapes(self, ex1_system):
        system, _ = ex1_system
        dim = 17 + 2
        assert system.A.shape == (dim, dim)
        assert system.C.shape == (dim, dim)
        assert system.Cp.shape == (dim, dim)
        assert system.V.shape == (dim, dim)
        assert system.full_matrix().shape == (2 * dim, 2 * dim)
        assert system.size == 2 * dim

    def test_stiffness_hat_block(self, ex1_system):
        system, _ = ex1_system
        h = 2.0 / 16
        n = 17
        A = system.A[:n, :n]
        expected = (np.diag(np.full(n, 2.0 / h))
                    - np.diag(np.full(n - 1, 1.0 / h), 1)
                    - np.diag(np.full(n - 1, 1.0 / h), -1))
        expected[0, 0] = expected[-1, -1] = 1.0 / h
        assert np.max(np.abs(A - expected)) < 1e-12

    def test_coupling_hat_block_is_mass_matrix(self, ex1_system):
        system, _ = ex1_system
        h = 2.0 / 16
        n = 17
        C = system.C[:n, :n]
        expected = (np.diag(np.full(n, 2 * h / 3))
                    + np.diag(np.full(n - 1, h / 6), 1)
                    + np.diag(np.full(n - 1, h / 6), -1))
        expected[0, 0] = expected[-1, -1] = h / 3
        assert np.max(np.abs(C - expected)) < 1e-13

    def test_transpose_coupling_exact(self, ex1_system):
        system, _ = ex1_system
        assert np.array_equal(system.Cp, system.C.T)

    def test_single_layer_symmetry(self, ex1_system):
        system, _ = ex1_system
        assert np.max(np.abs(system.V - system.V.T)) <= 1e-10

    def test_load_compatibility(self, ex1_system):
        # testing the bulk equation with the constant function turns the
        # load into the integral of f plus the endpoint flux data
        system, spec = ex1_system
        n = system.u_space.n_hats
        total = float(np.sum(system.F[:n]))
        assert abs(total - spec.compatibility_target) < 1e-10


class TestSingleLayerOracles:
    def test_disjoint_hat_entry_segment(self, ex1_system):
        # supports of hats 3 and 12 are far apart: smooth double integral
        system, spec = ex1_system
        space = system.psi_space
        i, j = 3, 12
        inner = lambda s: adaptive_integrate(
            lambda t: space.eval_basis(j, t)
            * np.log(np.abs(s - t)), space.partition.nodes[j - 1],
            space.partition.nodes[j + 1], tol=1e-12)
        oracle = -adaptive_integrate(
            np.vectorize(lambda s: float(space.eval_basis(i, s)) * inner(s)),
            space.partition.nodes[i - 1], space.partition.nodes[i + 1],
            tol=1e-11) / (2 * np.pi)
        assert system.V[i, j] == pytest.approx(oracle, abs=1e-11)

    def test_semicircle_entry_includes_curvature(self):
        # on a curved arc the kernel differs from the flat-parameter log;
        # check one disjoint hat pair against the direct chord-distance oracle
        spec = make_spec("ex2", "standard", 8)
        system = assemble_system(spec)
        space = system.psi_space
        nodes = space.partition.nodes
        arc = spec.arc
        i, j = 1, 6

        def kern(s, t):
            r = np.linalg.norm(arc.position(np.atleast_1d(s))[0]
                               - arc.position(np.atleast_1d(t))[0])
            return np.log(r)

        inner = lambda s: adaptive_integrate(
            lambda t: space.eval_basis(j, t)
            * np.array([kern(s, tk) for tk in np.atleast_1d(t)]),
            nodes[j - 1], nodes[j + 1], tol=1e-11)
        oracle = -adaptive_integrate(
            np.vectorize(lambda s: float(space.eval_basis(i, s)) * inner(s)),
            nodes[i - 1], nodes[i + 1], tol=1e-10) / (2 * np.pi)
        assert system.V[i, j] == pytest.approx(oracle, abs=1e-9)

    def test_flat_arc_smooth_remainder_vanishes(self):
        spec = make_spec("ex1", "enriched", 8)
        plain = assemble_system(spec)
        forced = assemble_system(spec, force_smooth=True)
        assert np.max(np.abs(plain.V - forced.V)) <= 1e-13


class TestStiffnessSingularCouplings:
    def test_hat_coupling_telescopes(self, ex1_system):
        # <w', hat_i'> = +-(1/h)(w(x_{i+1}) - w(x_i)) by exact integration
        # of the piecewise-constant hat derivative
        system, _ = ex1_system
        space = system.u_space
        nodes = space.partition.nodes
        h = nodes[1] - nodes[0]
        idx = space.n_hats  # left singular function
        w = lambda s: space.eval_basis(idx, s)
        for i in range(1, 4):
            expected = (w(nodes[i]) - w(nodes[i - 1])) / h \
                - (w(nodes[i + 1]) - w(nodes[i])) / h
            assert system.A[i, idx] == pytest.approx(expected, abs=1e-12)

    def test_singular_diagonal_against_oracle(self, ex1_system):
        system, _ = ex1_system
        space = system.u_space
        idx = space.n_hats
        oracle = adaptive_integrate(
            lambda s: space.eval_basis(idx, s, 1) ** 2, -1.0, -0.5,
            tol=1e-12)
        assert system.A[idx, idx] == pytest.approx(oracle, abs=1e-11)


class TestAssemblyOptions:
    def test_hat_cache_reuse_bitwise(self):
        spec_std = make_spec("ex1", "standard", 8)
        spec_enr = make_spec("ex1", "enriched", 8)
        cache = {}
        first = assemble_system(spec_std, hat_cache=cache)
        assert cache  # populated
        second = assemble_system(spec_enr, hat_cache=cache)
        n = first.psi_space.n_hats
        assert np.array_equal(first.V[:n, :n], second.V[:n, :n])

    def test_quad_order_bounds(self):
        spec = make_spec("ex1", "standard", 8)
        with pytest.raises(ValueError):
            assemble_system(spec, quad_order=3)
        with pytest.raises(ValueError):
            assemble_system(spec, quad_order=49)

    def test_quad_order_stability(self):
        # the default order is converged: raising it barely moves the matrix
        spec = make_spec("ex1", "enriched", 8)
        base = assemble_system(spec)
        high = assemble_system(spec, quad_order=24)
        assert np.max(np.abs(base.full_matrix() - high.full_matrix())) < 1e-11

    def test_incompatible_data_warns(self):
        from arcscreen.assembly import ProblemSpec
        from arcscreen.geometry import make_segment
        with pytest.warns(UserWarning, match="compatibility"):
            ProblemSpec(arc=make_segment(),
                        f=lambda s: np.ones_like(np.asarray(s, dtype=float)),
                        g_left=0.0, g_right=0.0, N=8)


class TestHelpers:
    def test_bilinear_apply_matches_full_matrix(self, ex1_system):
        system, _ = ex1_system
        rng = np.random.default_rng(11)
        d = system.u_space.dim
        u = (rng.standard_normal(d), rng.standard_normal(d))
        v = (rng.standard_normal(d), rng.standard_normal(d))
        direct = bilinear_apply(system, u, v)
        xu = np.concatenate(u)
        xv = np.concatenate(v)
        assert direct == pytest.approx(float(xv @ system.full_matrix() @ xu),
                                       rel=1e-13)

    def test_bilinear_apply_dimension_check(self, ex1_system):
        system, _ = ex1_system
        with pytest.raises(ValueError):
            bilinear_apply(system, (np.zeros(3), np.zeros(3)),
                           (np.zeros(3), np.zeros(3)))

    def test_dump_matrix_round_trip(self, tmp_path, ex1_system):
        system, _ = ex1_system
        path = tmp_path / "v.txt"
        dump_matrix(system.V, path)
        rows = np.loadtxt(path)
        n = system.psi_space.dim
        rebuilt = np.zeros((n, n))
        rebuilt[rows[:, 0].astype(int), rows[:, 1].astype(int)] = rows[:, 2]
        assert np.array_equal(rebuilt, system.V)
