import math

import numpy as np
import pytest

from signsym.duality import (
    bidual_check,
    closed_form_dual,
    comparison_constants,
    dual_norm_eval,
    dual_norm_eval_many,
    dual_psi,
    holder_check,
    real_dual_norm,
    verify_duality_relations,
)
from signsym.generators import (
    UncertifiedGenerator,
    certify,
    combine,
    psi_p,
)
from signsym.norms import BaseNorm, BlockVector, ProductNorm
from signsym.simplex import SimplexGrid


K2 = 32  # resolution for the quick two-block checks


class TestDualPsi:
    def test_dual_of_sum_generator_is_max(self):
        res = dual_psi(psi_p(1, 2), K2)
        T = res.grid.points_array
        assert np.max(np.abs(res.table_values - T.max(axis=1))) <= 1e-10

    def test_dual_of_max_generator_is_constant_one(self):
        res = dual_psi(psi_p(math.inf, 2), K2)
        assert np.max(np.abs(res.table_values - 1.0)) <= 1e-10

    def test_euclidean_generator_self_dual(self):
        res = dual_psi(psi_p(2, 2), K2)
        T = res.grid.points_array
        assert np.max(np.abs(res.table_values - psi_p(2, 2).eval_many(T))) <= 1e-10

    def test_conjugate_exponent_pairing(self):
        res = dual_psi(psi_p(3, 2), K2)
        T = res.grid.points_array
        assert np.max(np.abs(res.table_values - psi_p(1.5, 2).eval_many(T))) <= 1e-9

    def test_closed_form_attachment(self):
        assert closed_form_dual(psi_p(1, 2)).p == math.inf
        assert closed_form_dual(psi_p(math.inf, 3)).p == 1
        assert math.isclose(closed_form_dual(psi_p(1.5, 2)).p, 3.0)
        mix = combine("convex-combination", [psi_p(1, 2), psi_p(math.inf, 2)], [0.5, 0.5])
        assert closed_form_dual(mix) is None
        assert dual_psi(mix, K2).psi_star.closed_form is None

    def test_dual_is_certifiable(self):
        for p in (1, 2, math.inf):
            res = dual_psi(psi_p(p, 2), K2)
            assert certify(res.psi_star, K2).passed

    def test_numeric_dual_of_mix_is_certifiable(self):
        mix = combine("convex-combination", [psi_p(1, 2), psi_p(math.inf, 2)], [0.5, 0.5])
        res = dual_psi(mix, K2)
        assert certify(res.psi_star, K2).passed

    def test_uncertified_input_rejected(self):
        grid = SimplexGrid(2, 8)
        from signsym.generators import TabulatedGenerator

        bad = TabulatedGenerator(grid, 0.5 * np.ones(len(grid)))
        with pytest.raises(UncertifiedGenerator):
            dual_psi(bad, 8)

    def test_export_rows(self):
        res = dual_psi(psi_p(2, 2), 8)
        rows = list(res.export_rows())
        assert len(rows) == len(res.grid)
        assert all(len(r) == 3 for r in rows)


class TestDualNormEval:
    def test_sum_generator_gives_max_of_block_duals(self):
        N = ProductNorm(psi_p(1, 2), BaseNorm(2, 2))
        xs = BlockVector.from_array([[1, 0], [0, 1]])
        assert math.isclose(dual_norm_eval(N, xs, K2), 1.0, abs_tol=1e-9)

    def test_max_generator_gives_sum_of_block_duals(self):
        N = ProductNorm(psi_p(math.inf, 2), BaseNorm(2, 2))
        xs = BlockVector.from_array([[1, 0], [0, 1]])
        assert math.isclose(dual_norm_eval(N, xs, K2), 2.0, abs_tol=1e-9)

    def test_zero_vector(self):
        N = ProductNorm(psi_p(2, 2), BaseNorm(2, 2))
        assert dual_norm_eval(N, BlockVector.from_array([[0, 0], [0, 0]]), K2) == 0.0

    def test_base_dual_exponent_used(self):
        # generator p over base p dualizes to the flat q-norm
        N = ProductNorm(psi_p(3, 2), BaseNorm(3, 2))
        rng = np.random.default_rng(0)
        for _ in range(20):
            xs = rng.standard_normal((2, 2))
            direct = BaseNorm(1.5, 4).eval(xs.ravel())
            got = dual_norm_eval(N, BlockVector.from_array(xs), K2)
            assert math.isclose(got, direct, rel_tol=1e-8)

    def test_batch_agrees_with_scalar(self):
        N = ProductNorm(psi_p(1.5, 2), BaseNorm(2, 2))
        rng = np.random.default_rng(1)
        X = rng.standard_normal((10, 2, 2))
        batch = dual_norm_eval_many(N, X, K2)
        for k in range(10):
            assert math.isclose(batch[k],
                                dual_norm_eval(N, BlockVector.from_array(X[k]), K2),
                                rel_tol=1e-9)

    def test_is_a_norm_on_samples(self):
        N = ProductNorm(psi_p(2, 2), BaseNorm(2, 2))
        rng = np.random.default_rng(2)
        X = rng.standard_normal((30, 2, 2))
        Y = rng.standard_normal((30, 2, 2))
        lam = rng.uniform(-2, 2, size=30)
        vx = dual_norm_eval_many(N, X, K2)
        vy = dual_norm_eval_many(N, Y, K2)
        vxy = dual_norm_eval_many(N, X + Y, K2)
        vlx = dual_norm_eval_many(N, lam[:, None, None] * X, K2)
        assert np.all(vxy <= vx + vy + 1e-9 * (vx + vy))
        assert np.allclose(vlx, np.abs(lam) * vx, rtol=1e-9, atol=1e-12)

    def test_real_dual_norm(self):
        # dual of the sum-generator real norm (l1) is the max norm
        assert math.isclose(real_dual_norm(psi_p(1, 2), [0.3, -0.8], K2), 0.8,
                            abs_tol=1e-9)


class TestComparisonConstants:
    def test_sum_vs_max(self):
        cc = comparison_constants(psi_p(1, 2), psi_p(math.inf, 2), K2)
        assert math.isclose(cc.m, 1.0, abs_tol=1e-9)
        assert math.isclose(cc.M, 2.0, abs_tol=1e-9)

    def test_sum_vs_euclidean(self):
        cc = comparison_constants(psi_p(1, 2), psi_p(2, 2), K2)
        assert math.isclose(cc.M, math.sqrt(2), abs_tol=1e-9)
        assert math.isclose(cc.m, 1.0, abs_tol=1e-9)

    def test_identical_generators(self):
        cc = comparison_constants(psi_p(2, 2), psi_p(2, 2), K2)
        for v in (cc.m, cc.M, cc.m_star, cc.M_star):
            assert math.isclose(v, 1.0, abs_tol=1e-12)

    def test_product_identities(self):
        cc = comparison_constants(psi_p(1.5, 3), psi_p(3, 3), 24)
        assert math.isclose(cc.m * cc.M_star, 1.0, abs_tol=1e-6)
        assert math.isclose(cc.M * cc.m_star, 1.0, abs_tol=1e-6)

    def test_range_bounds(self):
        cc = comparison_constants(psi_p(1, 3), psi_p(math.inf, 3), 24)
        n = 3
        assert 1.0 / n - 1e-9 <= cc.m <= cc.M <= n + 1e-9
        assert 1.0 / n - 1e-9 <= cc.m_star <= cc.M_star <= n + 1e-9

    def test_witnesses_reproduce_constants(self):
        psi, phi = psi_p(1, 2), psi_p(2, 2)
        cc = comparison_constants(psi, phi, K2)
        at_max = psi.eval(cc.argmax) / phi.eval(cc.argmax)
        assert math.isclose(at_max, cc.M, rel_tol=1e-9)


class TestVerifyDualityRelations:
    def test_sum_vs_max(self):
        rep = verify_duality_relations(psi_p(1, 2), psi_p(math.inf, 2), K2)
        assert rep.passed
        assert rep.order_primal == "ge" and rep.order_dual == "le"

    def test_self_pair(self):
        rep = verify_duality_relations(psi_p(2, 2), psi_p(2, 2), K2)
        assert rep.passed
        assert math.isclose(rep.product_mMstar, 1.0, abs_tol=1e-9)

    def test_order_reversal(self):
        rep = verify_duality_relations(psi_p(1, 2), psi_p(2, 2), K2)
        assert rep.order_primal == "ge" and rep.order_dual == "le"
        assert rep.passed


class TestBidual:
    @pytest.mark.parametrize("p", [1, 2, math.inf])
    def test_builtin_recovery(self, p):
        rep = bidual_check(psi_p(p, 2), K2)
        assert rep.passed
        assert rep.max_deviation <= 1e-9

    def test_mix_recovery(self):
        mix = combine("convex-combination", [psi_p(1, 2), psi_p(math.inf, 2)], [0.5, 0.5])
        rep = bidual_check(mix, K2)
        assert rep.passed


class TestHolder:
    def test_builtin(self):
        psi = psi_p(2, 2)
        rep = holder_check(psi, dual_psi(psi, K2), samples=2000, seed=0)
        assert rep.passed

    def test_tabulated_mix(self):
        mix = combine("convex-combination", [psi_p(1, 3), psi_p(2, 3)], [0.4, 0.6])
        rep = holder_check(mix, dual_psi(mix, 16), samples=2000, seed=1)
        assert rep.passed

    def test_equality_case_center(self):
        psi = psi_p(2, 2)
        res = dual_psi(psi, K2)
        t = np.array([0.5, 0.5])
        lhs = float(t @ t)
        rhs = psi.eval_many(t[None])[0] * res.psi_star.eval_many(t[None])[0]
        assert math.isclose(lhs, rhs, rel_tol=1e-12)
