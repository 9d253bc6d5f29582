import math

import numpy as np
import pytest

from metriconv.filters import builtin_stencil, filter_from_stencil, tinyballs_filter
from metriconv.space import bigballs_index, example_bigballs, example_tinyballs, from_distance_matrix, grid
from metriconv.verify import (
    certify_operator_bound,
    check_open_closed_agreement,
    check_pointwise_lemma,
    check_variation_lemma,
    jsonable,
    reproduce_example,
)

from helpers import random_filter, random_space

TWO = from_distance_matrix([[0, 1], [1, 0]], [1, 1])


class TestCertify:
    def test_average_l1_two_points(self):
        rep = certify_operator_bound(TWO, "average", 1, 1.0)
        assert rep.lhs == pytest.approx(1.0) and rep.rhs == 1
        assert rep.passed and rep.status == "certified" and rep.constants["E"] == 1

    def test_convolution_inf_equality(self):
        rep = certify_operator_bound(TWO, "convolution", math.inf, 1.0)
        assert rep.lhs == 2 and rep.rhs == 2 and rep.passed

    def test_gaussian_filter_l1(self):
        space = grid(16, 16)
        rep = certify_operator_bound(space, filter_from_stencil(space, builtin_stencil("gaussian3x3")), 1)
        assert rep.lhs == pytest.approx(1.0)
        assert rep.rhs == pytest.approx(0.25 * 9 * 4)
        assert rep.constants["M"] == 0.25 and rep.constants["sup_ball_measure"] == 9
        assert rep.passed

    def test_non_adapted_filter_skipped(self):
        space = example_tinyballs()
        rep = certify_operator_bound(space, tinyballs_filter(space), 1)
        assert rep.status == "skipped" and not rep.passed

    def test_p3_is_only_consistent(self):
        space = random_space(np.random.default_rng(0), 8)
        rep = certify_operator_bound(space, "average", 3, 0.4, trials=50)
        assert rep.lhs_kind == "lower-bound" and rep.status == "consistent"

    def test_p2_upper_estimate(self):
        space = random_space(np.random.default_rng(1), 8)
        rep = certify_operator_bound(space, "convolution", 2, 0.4)
        assert rep.lhs_kind == "upper-estimate" and rep.status == "certified"

    def test_needs_radius(self):
        with pytest.raises(ValueError):
            certify_operator_bound(TWO, "average", 1)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_filters_pass(self, seed):
        rng = np.random.default_rng(seed)
        space = random_space(rng, 12)
        f = random_filter(rng, space, 0.5)
        for p in (1, 2, 3, math.inf):
            assert certify_operator_bound(space, f, p, trials=40, seed=seed).passed

    def test_report_json(self):
        out = certify_operator_bound(TWO, "average", math.inf, 1.0).to_json()
        assert out["constants"]["p"] == "inf" and out["passed"] is True


class TestPointwiseLemma:
    def test_constant_equality_at_largest_ball(self):
        space = example_bigballs(4)
        rep = check_pointwise_lemma(space, 0.5, "closed", np.ones(space.n))
        assert rep.holds and rep.max_ratio == pytest.approx(1.0)

    def test_bigballs_indicator(self):
        space = example_bigballs(5)
        f = np.zeros(space.n)
        f[bigballs_index(3, "1/2")] = 1
        rep = check_pointwise_lemma(space, 0.5, "closed", f)
        assert rep.holds and rep.details["sup_ball_measure"] == 6
        # at (0,3): lhs 1, rhs 6 * 1/4
        assert rep.max_ratio == pytest.approx(1 / 1.5)

    @pytest.mark.parametrize("seed", range(10))
    def test_random(self, seed):
        rng = np.random.default_rng(seed)
        space = random_space(rng, 15, zero_weights=True)
        rep = check_pointwise_lemma(space, float(rng.uniform(0.1, 1)), "open", rng.normal(size=15))
        assert rep.holds and rep.max_ratio <= 1 + 1e-12


class TestVariationLemma:
    def test_box_interior(self):
        space = grid(5, 5)
        rep = check_variation_lemma(space, filter_from_stencil(space, builtin_stencil("box:1")), 12)
        assert rep.holds and rep.checked == 512
        assert rep.details == {"E": 4, "M": 1.0, "x": 12, "ball_size": 9, "exhaustive": True}
        # full ball: 9 <= 1 * 4 * 9
        assert rep.max_ratio == pytest.approx(0.25)

    def test_gaussian_interior_exhaustive(self):
        space = grid(5, 5)
        rep = check_variation_lemma(space, filter_from_stencil(space, builtin_stencil("gaussian3x3")), 12)
        assert rep.holds and rep.checked == 2 ** 9 and rep.details["M"] == 0.25

    def test_sampled_when_ball_large(self):
        space = grid(5, 5)
        rep = check_variation_lemma(space, filter_from_stencil(space, builtin_stencil("box:2")), 12,
                                    exhaustive_limit=12, samples=500)
        assert rep.holds and rep.checked == 500 and not rep.details["exhaustive"]

    def test_skips_non_adapted(self):
        space = example_tinyballs()
        rep = check_variation_lemma(space, tinyballs_filter(space), 0)
        assert rep.checked == 0 and "skipped" in rep.details


class TestOpenClosed:
    def test_two_points(self):
        rep = check_open_closed_agreement(TWO)
        assert rep.holds and rep.details["E_open"] == rep.details["E_closed"] == 1

    def test_line(self):
        rep = check_open_closed_agreement(from_distance_matrix([[0, 1, 2], [1, 0, 1], [2, 1, 0]]))
        assert rep.details["E_open"] == rep.details["E_closed"] == 2
        assert rep.details["witness_open"]["radius"] == 2.0
        assert rep.details["witness_closed"]["radius"] == 1.0

    def test_grid(self):
        rep = check_open_closed_agreement(grid(5, 5))
        assert rep.holds and rep.details["E_open"] == 4


class TestReproduce:
    def test_tinyballs(self):
        out = reproduce_example("tinyballs")
        assert (out["norm_in"], out["norm_out"], out["M"]) == (0.0, 1.0, "inf")
        assert out["adapted"] is False and out["pass"]

    def test_bigballs_l1_ratio_grows(self):
        out = reproduce_example("bigballs", 10, 1)
        ratios = [row["norm_conv_f"] / row["norm_f"] for row in out["rows"]]
        assert ratios == [n + 1 for n in range(1, 11)]
        assert out["pass"]

    def test_bigballs_inf(self):
        out = reproduce_example("bigballs", 10, math.inf)
        assert [row["norm_conv_g_inf"] for row in out["rows"]] == list(range(1, 11))

    def test_unknown(self):
        with pytest.raises(ValueError):
            reproduce_example("hugeballs")


def test_jsonable():
    assert jsonable({"a": math.inf, "b": [np.float64(1.5), -math.inf], 3: np.int64(2)}) == \
        {"a": "inf", "b": [1.5, "-inf"], "3": 2}
