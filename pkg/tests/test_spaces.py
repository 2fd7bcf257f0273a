import numpy as np
import pytest

from arcscreen.spaces import (
    EnrichedSpace,
    Partition,
    build_uniform_partition,
    cutoff_eta,
    cutoff_phi,
    cutoff_phi_prime,
    prolong,
)


class TestPartition:
    def test_uniform_nodes(self):
        part = build_uniform_partition((-1.0, 1.0), 4)
        assert np.allclose(part.nodes, [-1, -0.5, 0, 0.5, 1])
        assert part.h == pytest.approx(0.5)
        assert part.is_uniform

    def test_h_on_pi_domain(self):
        part = build_uniform_partition((0.0, np.pi), 64)
        assert part.h == pytest.approx(np.pi / 64)

    def test_too_coarse_rejected(self):
        with pytest.raises(ValueError):
            build_uniform_partition((-1.0, 1.0), 2)

    def test_non_monotone_rejected(self):
        with pytest.raises(ValueError):
            Partition(np.array([0.0, 0.5, 0.4, 1.0]))

    def test_quasi_uniformity_enforced(self):
        with pytest.raises(ValueError, match="quasi-uniform"):
            Partition(np.array([0.0, 0.1, 0.5, 1.0]))
        # ratio exactly 2 is admissible
        Partition(np.array([0.0, 0.1, 0.3, 0.5]))


class TestCutoff:
    def test_plateau_and_support(self):
        assert cutoff_phi(0.1) == 1.0
        assert cutoff_phi(0.3) == 0.0
        assert cutoff_phi(0.125) == 1.0
        assert cutoff_phi(0.25) == 0.0

    def test_eta_partition_of_unity(self):
        t = np.linspace(-0.5, 1.5, 101)
        assert np.max(np.abs(cutoff_eta(t) + cutoff_eta(1 - t) - 1.0)) < 1e-15
        assert cutoff_eta(0.5) == pytest.approx(0.5)

    def test_phi_monotone(self):
        x = np.linspace(0.0, 0.3, 400)
        vals = cutoff_phi(x)
        assert np.all(np.diff(vals) <= 1e-15)

    def test_phi_prime_matches_finite_differences(self):
        # second-order convergence of the centered difference to phi'
        x = np.linspace(0.13, 0.24, 23)
        errs = []
        for eps in (1e-3, 5e-4, 2.5e-4):
            fd = (cutoff_phi(x + eps) - cutoff_phi(x - eps)) / (2 * eps)
            errs.append(np.max(np.abs(fd - cutoff_phi_prime(x))))
        assert errs[1] < 0.3 * errs[0]
        assert errs[2] < 0.3 * errs[1]


def _enriched(q, N=16, domain=(-1.0, 1.0)):
    part = build_uniform_partition(domain, N)
    return EnrichedSpace(partition=part, kind="enriched", q=q)


class TestEnrichedSpace:
    def test_dimensions(self):
        part = build_uniform_partition((-1.0, 1.0), 16)
        std = EnrichedSpace(partition=part)
        assert std.dim == 17 and std.n_singular == 0
        enr = _enriched(1.5)
        assert enr.dim == 19 and enr.n_singular == 2

    def test_invalid_construction(self):
        part = build_uniform_partition((-1.0, 1.0), 8)
        with pytest.raises(ValueError):
            EnrichedSpace(partition=part, kind="weird")
        with pytest.raises(ValueError):
            EnrichedSpace(partition=part, kind="enriched", q=2.0)

    def test_hats_are_nodal(self):
        space = _enriched(1.5, N=8)
        nodes = space.partition.nodes
        for i in range(space.n_hats):
            vals = np.array([space.eval_basis(i, x) for x in nodes])
            expected = np.zeros(space.n_hats)
            expected[i] = 1.0
            assert np.allclose(vals, expected)

    def test_partition_of_unity(self):
        space = _enriched(1.5, N=12)
        s = np.linspace(-1, 1, 500)
        total = sum(space.eval_basis(i, s) for i in range(space.n_hats))
        assert np.max(np.abs(total - 1.0)) < 1e-13

    def test_singular_value_examples(self):
        psi_space = _enriched(-0.5)
        # on (-1, 1) the distance rescaling is the identity
        assert psi_space.eval_basis(psi_space.n_hats, -1.0 + 0.04) \
            == pytest.approx(5.0)
        u_space = _enriched(1.5)
        assert u_space.eval_basis(u_space.n_hats, -1.0) == 0.0
        d = 1e-8
        assert abs(u_space.eval_basis(u_space.n_hats, -1.0 + d, 1)) < 1e-3

    def test_singular_support(self):
        space = _enriched(1.5, N=16)
        s = np.linspace(-1 + 0.25, 1, 50)
        assert np.all(space.eval_basis(space.n_hats, s) == 0.0)
        s = np.linspace(-1, 1 - 0.25, 50)
        assert np.all(space.eval_basis(space.n_hats + 1, s) == 0.0)

    def test_singular_scaling_on_general_domain(self):
        # support always covers the first quarter of the domain
        space = _enriched(-0.5, N=16, domain=(0.0, np.pi))
        d = space.singular_distance("left", np.array([0.1]))
        x = space.scale * d
        expected = x ** -0.5 * cutoff_phi(x)
        assert space.eval_basis(space.n_hats, 0.1) == pytest.approx(
            float(expected[0]))
        assert space.eval_basis(space.n_hats, np.pi / 2) == 0.0

    def test_forbidden_derivative(self):
        space = _enriched(-0.5)
        with pytest.raises(ValueError, match="not"):
            space.eval_basis(space.n_hats, -0.9, 1)

    def test_out_of_domain_rejected(self):
        space = _enriched(1.5)
        with pytest.raises(ValueError):
            space.eval_basis(0, 1.5)

    def test_eval_function_combines_parts(self):
        space = _enriched(1.5, N=8)
        coeffs = np.zeros(space.dim)
        coeffs[:space.n_hats] = np.linspace(0, 1, space.n_hats)
        coeffs[space.n_hats] = 2.0
        s = np.array([-0.95, -0.4, 0.3])
        expected = np.interp(s, space.partition.nodes,
                             coeffs[:space.n_hats]) \
            + 2.0 * space.singular_value("left", s)
        assert np.allclose(space.eval_function(coeffs, s), expected)


class TestProlongation:
    def test_exact_reproduction(self):
        coarse = _enriched(1.5, N=8)
        fine = _enriched(1.5, N=16)
        rng = np.random.default_rng(3)
        coeffs = rng.standard_normal(coarse.dim)
        out = prolong(coarse, coeffs, fine)
        s = np.linspace(-1, 1, 1000)
        diff = coarse.eval_function(coeffs, s) - fine.eval_function(out, s)
        assert np.max(np.abs(diff)) < 1e-12

    def test_singular_coefficients_copied(self):
        coarse = _enriched(-0.5, N=8)
        fine = _enriched(-0.5, N=16)
        coeffs = np.zeros(coarse.dim)
        coeffs[-2:] = [3.0, -4.0]
        out = prolong(coarse, coeffs, fine)
        assert list(out[-2:]) == [3.0, -4.0]

    def test_midpoint_value(self):
        coarse = EnrichedSpace(build_uniform_partition((-1.0, 1.0), 4))
        fine = EnrichedSpace(build_uniform_partition((-1.0, 1.0), 8))
        coeffs = np.zeros(5)
        coeffs[0] = 1.0
        out = prolong(coarse, coeffs, fine)
        assert out[1] == pytest.approx(0.5)

    def test_non_nested_rejected(self):
        coarse = _enriched(1.5, N=8)
        with pytest.raises(ValueError, match="nested"):
            prolong(coarse, np.zeros(coarse.dim), _enriched(1.5, N=24))
        with pytest.raises(ValueError, match="structure"):
            prolong(coarse, np.zeros(coarse.dim), _enriched(-0.5, N=16))
