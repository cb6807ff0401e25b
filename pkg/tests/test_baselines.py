"""Cache-splitting heuristics and the loads they achieve."""

import numpy as np
import pytest

from hetcache.baselines import baseline_load, oca_split, pca_split
from hetcache.model import InstanceError, make_rate_profile
from hetcache.lp_core import solve_lp
from hetcache.scheme_lp import build_o2, extract_scheme

from test_scheme_lp import fixed_instance


FIG = [0.5, 0.7, 1.0]


def random_split_inputs(rng, K):
    r = np.sort(rng.uniform(0.05, 1.5, size=K))
    rates = make_rate_profile(r)
    m = tuple(float(rng.uniform(0.0, rk)) for rk in r)
    return m, rates


class TestProportionalSplit:
    def test_worked_example(self):
        split = pca_split([0.25, 0.35, 0.5], make_rate_profile(FIG))
        expect = [
            [0.25, 0.0, 0.0],
            [0.25, 0.1, 0.0],
            [0.25, 0.1, 0.15],
        ]
        for k in range(3):
            assert split.per_layer[k] == pytest.approx(expect[k], abs=1e-12)

    def test_zero_memory(self):
        split = pca_split([0.0, 0.0, 0.0], make_rate_profile(FIG))
        assert all(v == 0.0 for row in split.per_layer for v in row)

    def test_single_layer_profile_puts_all_mass_first(self):
        rates = make_rate_profile([0.6, 0.6, 0.6])
        split = pca_split([0.2, 0.3, 0.6], rates)
        assert [row[0] for row in split.per_layer] == pytest.approx([0.2, 0.3, 0.6])
        assert all(row[1] == row[2] == 0.0 for row in split.per_layer)

    def test_zero_rate_user_gets_zero_row(self):
        rates = make_rate_profile([0.0, 0.5, 1.0])
        split = pca_split([0.0, 0.25, 0.5], rates)
        assert split.per_layer[0] == (0.0, 0.0, 0.0)
        # remaining users split over the two real layers
        assert split.per_user[1] == pytest.approx(0.25)

    def test_zero_rate_user_with_cache_rejected(self):
        # no rate means no room for cache, so no proportion to take
        rates = make_rate_profile([0.0, 0.5, 1.0])
        with pytest.raises(InstanceError, match="outside"):
            pca_split([0.1, 0.25, 0.5], rates)

    def test_memory_above_rate_rejected(self):
        with pytest.raises(InstanceError, match="outside"):
            pca_split([0.6, 0.0, 0.0], make_rate_profile(FIG))

    def test_wrong_length_rejected(self):
        with pytest.raises(InstanceError, match="entries"):
            pca_split([0.1, 0.2], make_rate_profile(FIG))


class TestOrderedSplit:
    def test_worked_example(self):
        split = oca_split([0.5, 0.6, 0.6], make_rate_profile(FIG))
        assert split.per_layer[1] == pytest.approx([0.5, 0.1, 0.0], abs=1e-12)
        assert split.per_layer[2] == pytest.approx([0.5, 0.1, 0.0], abs=1e-12)

    def test_full_memory_fills_every_layer(self):
        rates = make_rate_profile(FIG)
        split = oca_split(list(rates.r), rates)
        assert split.per_layer[2] == pytest.approx(list(rates.f), abs=1e-12)

    def test_zero_memory(self):
        split = oca_split([0.0, 0.0, 0.0], make_rate_profile(FIG))
        assert all(v == 0.0 for row in split.per_layer for v in row)

    def test_boundary_budget_fills_layer_exactly(self):
        # budget equal to a prefix of layer widths stops cleanly
        split = oca_split([0.5, 0.7, 0.7], make_rate_profile(FIG))
        assert split.per_layer[2] == pytest.approx([0.5, 0.2, 0.0], abs=1e-12)

    def test_earlier_layers_full_before_later_nonzero(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            K = int(rng.integers(1, 6))
            m, rates = random_split_inputs(rng, K)
            split = oca_split(m, rates)
            for k in range(1, K + 1):
                row = split.per_layer[k - 1]
                for l in range(1, k):
                    if row[l] > 0.0:
                        # mass in layer l+1 forces layer l to be full
                        assert row[l - 1] == pytest.approx(rates.f[l - 1], abs=1e-12)


class TestConservation:
    @pytest.mark.parametrize("split_fn", [pca_split, oca_split])
    def test_row_sums_match_input(self, split_fn):
        rng = np.random.default_rng(11)
        for _ in range(200):
            K = int(rng.integers(1, 7))
            m, rates = random_split_inputs(rng, K)
            split = split_fn(m, rates)
            for k in range(K):
                assert abs(split.per_user[k] - m[k]) <= 1e-12


class TestBaselineLoad:
    def joint_load(self, inst):
        lp, index = build_o2(inst)
        return solve_lp(lp).objective

    def test_unknown_method(self):
        inst = fixed_instance(FIG, [0.1, 0.2, 0.6])
        with pytest.raises(ValueError, match="unknown baseline"):
            baseline_load("split-brain", inst)

    def test_budget_instance_needs_vector(self):
        from conftest import budget_instance

        inst = budget_instance(FIG, 1.0)
        with pytest.raises(InstanceError, match="per-user"):
            baseline_load("pca", inst)
        # but an explicit vector works
        value = baseline_load("pca", inst, m=[0.1, 0.2, 0.6])
        assert value >= 0.0

    def test_full_memory_is_free(self):
        inst = fixed_instance(FIG, FIG)
        assert baseline_load("pca", inst) == pytest.approx(0.0, abs=1e-9)
        assert baseline_load("oca", inst) == pytest.approx(0.0, abs=1e-9)

    def test_zero_memory_costs_everything(self):
        inst = fixed_instance(FIG, [0.0, 0.0, 0.0])
        assert baseline_load("pca", inst) == pytest.approx(2.2, abs=1e-8)
        assert baseline_load("oca", inst) == pytest.approx(2.2, abs=1e-8)

    def test_dominated_by_joint_on_example(self):
        inst = fixed_instance(FIG, [0.1, 0.2, 0.6])
        joint = self.joint_load(inst)
        assert baseline_load("pca", inst) >= joint - 1e-8
        assert baseline_load("oca", inst) >= joint - 1e-8

    def test_dominated_by_joint_random(self):
        rng = np.random.default_rng(23)
        for _ in range(6):
            K = int(rng.integers(2, 5))
            r = np.sort(rng.uniform(0.05, 1.5, size=K))
            m = [float(rng.uniform(0.0, rk)) for rk in r]
            inst = fixed_instance(list(r), m, q=8)
            joint = self.joint_load(inst)
            assert baseline_load("pca", inst) >= joint - 1e-8
            assert baseline_load("oca", inst) >= joint - 1e-8

    def test_geometric_sweep_dominance(self):
        # three users, sizes in fixed ratio, swept from empty to full
        r = [0.5, 0.8, 1.0]
        g = 0.8
        shape = [g ** (3 - k) for k in (1, 2, 3)]
        s_max = min(rk / sk for rk, sk in zip(r, shape))
        for s in np.linspace(0.0, s_max, 8):
            m = [float(s * sk) for sk in shape]
            inst = fixed_instance(r, m)
            joint = self.joint_load(inst)
            pca = baseline_load("pca", inst)
            oca = baseline_load("oca", inst)
            assert joint <= pca + 1e-8
            assert joint <= oca + 1e-8

    def test_single_layer_profile_restriction_vacuous(self):
        # equal rates leave one real layer, so splitting cannot hurt
        inst = fixed_instance([0.7, 0.7, 0.7], [0.2, 0.4, 0.6])
        joint = self.joint_load(inst)
        assert baseline_load("pca", inst) == pytest.approx(joint, abs=1e-8)
        assert baseline_load("oca", inst) == pytest.approx(joint, abs=1e-8)
