import numpy as np
import pytest

from impactreg import (fixed_sequence_test, order_covariates, run_hierarchy,
                       fit_ols, coefficient_test)
from impactreg.dataset import Dataset
from impactreg.errors import DegenerateCovariate
from impactreg.hierarchy import hierarchy_pvalues, order_indices


def brute_force_order(x_focus, candidates):
    """Re-derive the ordering with an explicit, independent loop."""
    q = candidates.shape[1]
    remaining = list(range(q))
    order = []
    resid = x_focus - x_focus.mean()
    while len(remaining) > 1:
        best, best_val = None, np.inf
        for j in remaining:
            c = candidates[:, j]
            r = abs(np.corrcoef(resid, c)[0, 1])
            if np.isnan(r):
                r = np.inf
            if r < best_val:
                best, best_val = j, r
        order.append(best)
        remaining.remove(best)
        X = np.column_stack([np.ones(len(x_focus)),
                             candidates[:, order]])
        coef, *_ = np.linalg.lstsq(X, x_focus, rcond=None)
        resid = x_focus - X @ coef
    order.extend(remaining)
    return order


class TestOrdering:
    def test_single_candidate(self):
        rng = np.random.default_rng(0)
        data = Dataset(("x1", "x2"), rng.standard_normal((20, 2)))
        assert order_covariates("x1", ["x2"], data) == ["x2"]

    def test_least_correlated_first(self):
        # x2 strongly tied to focus, x3 weakly: x3 must be picked first
        rng = np.random.default_rng(1)
        n = 400
        x2 = rng.standard_normal(n)
        x3 = rng.standard_normal(n)
        x1 = 0.9 * x2 + 0.05 * x3 + 0.1 * rng.standard_normal(n)
        data = Dataset(("x1", "x2", "x3"), np.column_stack([x1, x2, x3]))
        assert order_covariates("x1", ["x2", "x3"], data) == ["x3", "x2"]

    def test_does_not_depend_on_response(self):
        rng = np.random.default_rng(2)
        values = rng.standard_normal((100, 5))
        d1 = Dataset(("y", "x1", "a", "b", "c"), values)
        shuffled = values.copy()
        shuffled[:, 0] = rng.permutation(shuffled[:, 0])  # scramble y only
        d2 = Dataset(("y", "x1", "a", "b", "c"), shuffled)
        r1 = run_hierarchy("y", "x1", ["a", "b", "c"], d1)
        r2 = run_hierarchy("y", "x1", ["a", "b", "c"], d2)
        assert r1.ordering == r2.ordering

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        n, q = 120, 4
        cand = rng.standard_normal((n, q))
        x1 = cand @ rng.standard_normal(q) + rng.standard_normal(n)
        assert order_indices(x1, cand) == brute_force_order(x1, cand)

    def test_constant_candidate_raises(self):
        rng = np.random.default_rng(3)
        x1 = rng.standard_normal(30)
        cand = np.column_stack([rng.standard_normal(30), np.full(30, 2.0)])
        with pytest.raises(DegenerateCovariate):
            order_indices(x1, cand)

    def test_constant_focus_raises(self):
        cand = np.random.default_rng(4).standard_normal((30, 2))
        with pytest.raises(DegenerateCovariate):
            order_indices(np.full(30, 1.0), cand)

    def test_collinear_picks_append_rest_in_position_order(self):
        # duplicate candidate columns: once both are picked the design is
        # rank-deficient and the remaining candidates follow in position order
        rng = np.random.default_rng(5)
        n = 50
        u = rng.standard_normal(n)
        v = rng.standard_normal(n)
        x1 = v + 0.01 * rng.standard_normal(n)  # nearly uncorrelated with u
        cand = np.column_stack([u, u, v])
        order = order_indices(x1, cand)
        # step 1 picks column 0 (tie with its duplicate broken by position),
        # step 2 the duplicate (residual is exactly orthogonal to u), which
        # collapses the design; column 2 is appended
        assert order == [0, 1, 2]


class TestFixedSequence:
    def test_examples(self):
        assert fixed_sequence_test([0.01, 0.02, 0.5, 0.01], 0.05) == 2
        assert fixed_sequence_test([0.2, 0.01], 0.05) == 0
        assert fixed_sequence_test([0.01, 0.04, 0.05], 0.05) == 3
        assert fixed_sequence_test([], 0.05) == 0

    def test_boundary_is_rejection(self):
        assert fixed_sequence_test([0.05], 0.05) == 1

    def test_monotone_in_alpha(self):
        ps = [0.01, 0.03, 0.2, 0.6]
        counts = [fixed_sequence_test(ps, a) for a in (0.005, 0.02, 0.04, 0.3,
                                                       0.7)]
        assert counts == sorted(counts)

    def test_validation(self):
        with pytest.raises(ValueError):
            fixed_sequence_test([0.5], 0.0)
        with pytest.raises(ValueError):
            fixed_sequence_test([1.5], 0.05)


class TestRunHierarchy:
    @staticmethod
    def confounded_data(seed=0, n=600, theta1=0.0):
        rng = np.random.default_rng(seed)
        x2 = rng.standard_normal(n)
        x3 = rng.standard_normal(n)
        xt1 = rng.standard_normal(n)
        x1 = xt1 + x2 + x3
        y = theta1 * xt1 + x2 + x2 ** 2 + x3 + x3 ** 2 \
            + rng.standard_normal(n)
        return Dataset(("y", "x1", "x2", "x3"),
                       np.column_stack([y, x1, x2, x3]))

    def test_stops_at_first_non_rejection(self):
        data = self.confounded_data()
        res = run_hierarchy("y", "x1", ["x2", "x3"], data)
        assert res.rejected_prefix <= len(res.step_pvalues)
        for i, p in enumerate(res.step_pvalues):
            if i < res.rejected_prefix:
                assert p is not None and p <= res.alpha
            elif i == res.rejected_prefix and i < len(res.step_pvalues):
                if p is not None:
                    assert p > res.alpha
            else:
                assert p is None

    def test_confounders_adjusted_bookkeeping(self):
        data = self.confounded_data(1)
        plain = run_hierarchy("y", "x1", ["x2", "x3"], data)
        assert plain.confounders_adjusted == plain.rejected_prefix
        with_biv = run_hierarchy("y", "x1", ["x2", "x3"], data,
                                 include_bivariate=True)
        assert with_biv.confounders_adjusted == \
            max(0, with_biv.rejected_prefix - 1)
        assert len(with_biv.step_pvalues) == len(plain.step_pvalues) + 1

    def test_bivariate_step_matches_direct_fit(self):
        data = self.confounded_data(2)
        res = run_hierarchy("y", "x1", [], data, include_bivariate=True)
        y = data.column("y")
        x1 = data.column("x1")
        fit = fit_ols(y, np.column_stack([np.ones(data.n), x1]))
        direct = coefficient_test(fit, 1)
        assert res.step_pvalues[0] == pytest.approx(direct.p_value,
                                                    rel=1e-10)

    def test_no_candidates_no_bivariate_rejected(self):
        data = self.confounded_data(3)
        with pytest.raises(ValueError):
            run_hierarchy("y", "x1", [], data)

    def test_prespecified_order_respected(self):
        data = self.confounded_data(4)
        res = run_hierarchy("y", "x1", ["x2", "x3"], data,
                            ordering=["x3", "x2"])
        assert res.ordering == ("x3", "x2")
        with pytest.raises(ValueError):
            run_hierarchy("y", "x1", ["x2", "x3"], data,
                          ordering=["x3", "x4"])

    def test_full_prefix_rejected_when_signal_strong(self):
        # theta1 large: every step rejects, all confounders adjusted
        data = self.confounded_data(5, theta1=3.0)
        res = run_hierarchy("y", "x1", ["x2", "x3"], data)
        assert res.rejected_prefix == 2
        assert res.confounders_adjusted == 2

    def test_monotone_in_alpha(self):
        data = self.confounded_data(6, theta1=0.2)
        prev = 0
        for alpha in (1e-6, 0.01, 0.05, 0.2, 0.5):
            res = run_hierarchy("y", "x1", ["x2", "x3"], data, alpha=alpha)
            assert res.rejected_prefix >= prev
            prev = res.rejected_prefix

    def test_affine_rescaling_invariance(self):
        data = self.confounded_data(7, theta1=0.3)
        res1 = run_hierarchy("y", "x1", ["x2", "x3"], data)
        values = data.values.copy()
        values[:, 2] = 3.0 * values[:, 2] - 1.0  # rescale x2
        data2 = Dataset(data.column_names, values)
        res2 = run_hierarchy("y", "x1", ["x2", "x3"], data2)
        assert res1.ordering == res2.ordering
        for p1, p2 in zip(res1.step_pvalues, res2.step_pvalues):
            if p1 is None:
                assert p2 is None
            else:
                assert p2 == pytest.approx(p1, abs=1e-9)


class TestHierarchyPvalues:
    def test_hc1_is_more_conservative(self):
        rng = np.random.default_rng(8)
        n = 40
        ordered = rng.standard_normal((n, 2))
        x1 = ordered @ [1.0, 0.5] + rng.standard_normal(n)
        y = x1 + rng.standard_normal(n)
        p0, _ = hierarchy_pvalues(y, x1, ordered, alpha=1.0 - 1e-12)
        p1, _ = hierarchy_pvalues(y, x1, ordered, alpha=1.0 - 1e-12,
                                  hc1=True)
        for a, b in zip(p0, p1):
            assert b >= a
