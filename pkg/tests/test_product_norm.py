import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from signsym.generators import TabulatedGenerator, psi_p, tabulate
from signsym.norms import (
    AxiomReport,
    BaseNorm,
    BlockVector,
    DimensionMismatch,
    ProductNorm,
    axiom_suite,
    base_eval,
    norm_eval,
    pairing,
    psi_recovery,
    real_norm,
    sandwich_check,
)
from signsym.simplex import SimplexGrid, make_point, vertex


class TestBaseNorm:
    def test_euclidean(self):
        assert base_eval(BaseNorm(2, 2), [3, 4]) == 5.0

    def test_max_norm(self):
        assert base_eval(BaseNorm(math.inf, 2), [-2, 1]) == 2.0

    def test_zero(self):
        for p in (1, 2, 3, math.inf):
            assert base_eval(BaseNorm(p, 3), [0, 0, 0]) == 0.0

    def test_dual_exponents(self):
        assert BaseNorm(1, 2).q == math.inf
        assert BaseNorm(math.inf, 2).q == 1.0
        assert BaseNorm(1.5, 2).q == 3.0
        assert BaseNorm(2, 2).dual() == BaseNorm(2, 2)

    def test_strict_convexity_flag(self):
        assert BaseNorm(1.5, 2).strictly_convex
        assert not BaseNorm(1, 2).strictly_convex
        assert not BaseNorm(math.inf, 2).strictly_convex

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            BaseNorm(2, 2).eval([1, 2, 3])

    @given(st.floats(-5, 5), st.lists(st.floats(-10, 10), min_size=2, max_size=2))
    def test_homogeneity(self, lam, v):
        norm = BaseNorm(2, 2)
        assert math.isclose(norm.eval(np.multiply(lam, v)), abs(lam) * norm.eval(v),
                            rel_tol=1e-12, abs_tol=1e-12)


class TestBlockVector:
    def test_round_trip(self):
        x = BlockVector.from_flat([1, 2, 3, 4, 5, 6], 3, 2)
        assert x.n == 3 and x.d == 2
        assert np.array_equal(x.flat(), [1, 2, 3, 4, 5, 6])

    def test_bad_flat_length(self):
        with pytest.raises(DimensionMismatch):
            BlockVector.from_flat([1, 2, 3], 2, 2)

    def test_pairing(self):
        a = BlockVector.from_array([[1, 0], [0, 2]])
        b = BlockVector.from_array([[3, 5], [7, 4]])
        assert pairing(a, b) == 3 + 8


class TestNormEval:
    def test_hand_example_psi2(self):
        N = ProductNorm(psi_p(2, 2), BaseNorm(2, 2))
        assert math.isclose(norm_eval(N, BlockVector.from_array([[3, 0], [0, 4]])), 5.0)

    def test_hand_example_psi1(self):
        N = ProductNorm(psi_p(1, 2), BaseNorm(2, 2))
        assert math.isclose(norm_eval(N, BlockVector.from_array([[3, 0], [0, 4]])), 7.0)

    def test_zero_vector(self):
        N = ProductNorm(psi_p(math.inf, 2), BaseNorm(2, 2))
        assert norm_eval(N, BlockVector.from_array([[0, 0], [0, 0]])) == 0.0

    def test_zero_only_at_zero(self):
        N = ProductNorm(psi_p(2, 3), BaseNorm(2, 2))
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.standard_normal((3, 2)) * 10 ** rng.uniform(-6, 3)
            assert N.eval_many(x[None])[0] > 0.0

    @pytest.mark.parametrize("p", [1, 2, math.inf])
    def test_matches_flat_p_norm(self, p):
        # generator p over base p collapses to the p-norm of the flattened vector
        N = ProductNorm(psi_p(p, 3), BaseNorm(p, 2))
        rng = np.random.default_rng(4)
        for _ in range(100):
            x = rng.standard_normal((3, 2))
            direct = BaseNorm(p, 6).eval(x.ravel())
            assert math.isclose(float(N.eval_many(x[None])[0]), direct, rel_tol=1e-12)

    def test_real_norm_matches_d1_layout(self):
        psi = psi_p(1.5, 3)
        N = ProductNorm(psi, BaseNorm(2, 1))
        nu = [1.0, -2.0, 0.5]
        assert math.isclose(real_norm(psi, nu),
                            N(BlockVector.from_array([[v] for v in nu])), rel_tol=1e-14)

    def test_dimension_mismatch(self):
        N = ProductNorm(psi_p(2, 2), BaseNorm(2, 2))
        with pytest.raises(DimensionMismatch):
            N(BlockVector.from_array([[1, 0, 0], [0, 1, 0]]))


class TestAxiomSuite:
    @pytest.mark.parametrize("p,base_p,d", [(2, 2, 2), (1, 1, 1), (math.inf, 2, 3), (1.5, 3, 2)])
    def test_certified_generators_pass(self, p, base_p, d):
        N = ProductNorm(psi_p(p, 2), BaseNorm(base_p, d))
        rep = axiom_suite(N, samples=500, seed=11)
        assert rep.passed

    def test_uncertified_scaled_generator_fails_single_block(self):
        # scaling the table breaks the vertex normalization, so the
        # single-block identity must fail with a visible margin
        grid = SimplexGrid(2, 16)
        bad = TabulatedGenerator(grid, 0.9 * psi_p(2, 2).eval_many(grid.points_array))
        N = ProductNorm(bad, BaseNorm(2, 2), require_certificate=False)
        rep = axiom_suite(N, samples=200, seed=0)
        assert rep.single_block_worst > 1e-3
        assert not rep.passed

    def test_negation_symmetry(self):
        N = ProductNorm(psi_p(2, 2), BaseNorm(2, 2))
        x = np.array([[1.5, -2.0], [0.25, 3.0]])
        assert N.eval_many(x[None])[0] == N.eval_many(-x[None])[0]

    def test_report_fields(self):
        N = ProductNorm(psi_p(2, 2), BaseNorm(2, 2))
        rep = axiom_suite(N, samples=100, seed=5)
        assert isinstance(rep, AxiomReport)
        assert rep.samples == 100 and rep.seed == 5
        assert rep.witness is not None

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_triangle_inequality_random(self, seed):
        N = ProductNorm(psi_p(1.5, 2), BaseNorm(2, 2))
        rng = np.random.default_rng(seed)
        x, y = rng.standard_normal((2, 2, 2))
        nx = float(N.eval_many(x[None])[0])
        ny = float(N.eval_many(y[None])[0])
        assert float(N.eval_many((x + y)[None])[0]) <= nx + ny + 1e-10 * (nx + ny)


class TestSandwich:
    def test_hand_example(self):
        N = ProductNorm(psi_p(2, 2), BaseNorm(2, 2))
        rep = sandwich_check(N, BlockVector.from_array([[3, 0], [0, 4]]))
        assert rep.passed
        lo, v, hi, cap = rep.chain
        assert (lo, v, hi, cap) == pytest.approx((4.0, 5.0, 7.0, 8.0))

    def test_zero_vector(self):
        N = ProductNorm(psi_p(2, 2), BaseNorm(2, 2))
        rep = sandwich_check(N, BlockVector.from_array([[0, 0], [0, 0]]))
        assert rep.passed and rep.chain[1] == 0.0

    def test_block_already_zero(self):
        N = ProductNorm(psi_p(1.5, 3), BaseNorm(2, 2))
        rep = sandwich_check(N, BlockVector.from_array([[1, 2], [0, 0], [3, -1]]))
        assert rep.passed

    def test_random_samples(self):
        N = ProductNorm(psi_p(3, 3), BaseNorm(1, 2))
        rng = np.random.default_rng(9)
        for _ in range(100):
            rep = sandwich_check(N, BlockVector.from_array(rng.standard_normal((3, 2))))
            assert rep.passed


class TestPsiRecovery:
    def test_center_example(self):
        N = ProductNorm(psi_p(2, 2), BaseNorm(2, 2))
        v = psi_recovery(N, make_point([0.5, 0.5]), [[1, 0], [1, 0]])
        assert math.isclose(v, math.sqrt(0.5))

    def test_vertex_case(self):
        N = ProductNorm(psi_p(1.5, 2), BaseNorm(2, 2))
        assert math.isclose(psi_recovery(N, vertex(1, 2), [[0, 1], [1, 0]]), 1.0)

    def test_max_generator_center(self):
        N = ProductNorm(psi_p(math.inf, 3), BaseNorm(2, 2))
        third = 1.0 / 3
        v = psi_recovery(N, make_point([third] * 3), [[1, 0]] * 3)
        assert math.isclose(v, third)

    def test_non_unit_vector_rejected(self):
        N = ProductNorm(psi_p(2, 2), BaseNorm(2, 2))
        with pytest.raises(DimensionMismatch):
            psi_recovery(N, make_point([0.5, 0.5]), [[2, 0], [1, 0]])

    def test_matches_generator_on_grid(self):
        psi = psi_p(1.5, 2)
        N = ProductNorm(psi, BaseNorm(2, 2))
        rng = np.random.default_rng(2)
        for _ in range(3):
            u = rng.standard_normal((2, 2))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            for t in SimplexGrid(2, 16):
                assert math.isclose(psi_recovery(N, t, u), psi.eval(t), abs_tol=1e-10)
