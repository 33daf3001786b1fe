import math

import numpy as np
import pytest

from signsym.compatibility import (
    CLAIMED_KAPPA,
    c5_tightness,
    check_all,
    combined_bound,
)
from signsym.generators import GeneratorError, combine, psi_p
from signsym.norms import BaseNorm


MIX = lambda n: combine("convex-combination", [psi_p(1, n), psi_p(math.inf, n)], [0.5, 0.5])


class TestCheckAll:
    @pytest.mark.parametrize("p,base_p", [(1, 2), (2, 2), (math.inf, 1), (1.5, 3)])
    def test_single_generator_three_blocks(self, p, base_p):
        psi = psi_p(p, 3)
        rep = check_all(psi, psi, BaseNorm(base_p, 2), samples=300, seed=0, K=16)
        assert rep.passed
        assert not any(r.skipped for r in rep.rows)

    def test_mix_generator(self):
        psi = MIX(3)
        rep = check_all(psi, psi, BaseNorm(2, 2), samples=300, seed=1, K=16)
        assert rep.passed

    def test_two_blocks_skips_face_conditions(self):
        psi = psi_p(2, 2)
        rep = check_all(psi, psi, BaseNorm(2, 2), samples=300, seed=0, K=32)
        assert rep.passed
        skipped = sorted(r.condition for r in rep.rows if r.skipped)
        assert skipped == ["C1", "C2"]

    def test_claimed_constants(self):
        n = 3
        assert CLAIMED_KAPPA["C1"](n) == 2.0
        assert CLAIMED_KAPPA["C2"](n) == 1.0
        assert CLAIMED_KAPPA["C3"](n) == 1.0
        assert CLAIMED_KAPPA["C4"](n) == 3.0
        assert CLAIMED_KAPPA["C5"](n) == 3.0
        assert CLAIMED_KAPPA["C6"](n) == 3.0
        assert CLAIMED_KAPPA["C7"](n) == 1.0

    def test_row_lookup(self):
        psi = psi_p(2, 2)
        rep = check_all(psi, psi, BaseNorm(2, 2), samples=100, seed=0, K=32)
        assert rep.row("C3").condition == "C3"
        with pytest.raises(KeyError):
            rep.row("C8")

    def test_c4_tight_for_constant_generator(self):
        # the sum norm of n equal-norm blocks is exactly n times the max
        psi = psi_p(1, 3)
        rep = check_all(psi, psi, BaseNorm(2, 2), samples=300, seed=2, K=16)
        assert rep.row("C4").worst_ratio <= 3.0 + 1e-9

    def test_mismatched_dimensions(self):
        with pytest.raises(GeneratorError):
            check_all(psi_p(2, 2), psi_p(2, 3), BaseNorm(2, 2))


class TestC5Tightness:
    def test_constant_generator_attains_n(self):
        for n in (2, 3, 4):
            assert math.isclose(c5_tightness(psi_p(1, n), BaseNorm(2, 2)), float(n),
                                rel_tol=1e-12)

    def test_max_generator_diagonal_is_one(self):
        assert math.isclose(c5_tightness(psi_p(math.inf, 3), BaseNorm(2, 2)), 1.0,
                            rel_tol=1e-12)

    def test_euclidean_generator(self):
        assert math.isclose(c5_tightness(psi_p(2, 2), BaseNorm(2, 2)), math.sqrt(2),
                            rel_tol=1e-12)

    def test_custom_direction(self):
        v = c5_tightness(psi_p(1, 3), BaseNorm(1, 2), u=[0.5, -0.5])
        assert math.isclose(v, 3.0, rel_tol=1e-12)


class TestCombinedBound:
    def test_max_over_sum_generator(self):
        # M = max psi1/psiinf = n, so kappa = n = 3
        rep = combined_bound(psi_p(math.inf, 3), psi_p(1, 3), BaseNorm(2, 2),
                             samples=300, seed=0, K=16)
        assert math.isclose(rep.kappa, 3.0, abs_tol=1e-8)
        assert rep.passed

    def test_single_generator_kappa_is_n_minus_one_or_m(self):
        rep = combined_bound(psi_p(2, 3), psi_p(2, 3), BaseNorm(2, 2),
                             samples=300, seed=1, K=16)
        # M = 1 < n - 1 = 2
        assert math.isclose(rep.kappa, 2.0, abs_tol=1e-8)
        assert rep.passed

    def test_sum_over_max_generator(self):
        # M = max psiinf/psi1 = 1, kappa = n - 1
        rep = combined_bound(psi_p(1, 3), psi_p(math.inf, 3), BaseNorm(2, 2),
                             samples=300, seed=2, K=16)
        assert math.isclose(rep.kappa, 2.0, abs_tol=1e-8)
        assert rep.passed

    def test_rejects_two_blocks(self):
        with pytest.raises(GeneratorError):
            combined_bound(psi_p(2, 2), psi_p(2, 2), BaseNorm(2, 2))

    def test_rejects_mismatched_dimensions(self):
        with pytest.raises(GeneratorError):
            combined_bound(psi_p(2, 3), psi_p(2, 4), BaseNorm(2, 2))
