"""Tests for the two-sender information quantities and entropic bounds."""

import math

import numpy as np
import pytest

from qmac.access_bounds import (
    JointChannelTable,
    RatePoint,
    conditional_mutual_information,
    holevo_conditional_bound,
    holevo_sum_bound,
    induce_channel,
    merge_outcomes,
    mutual_information,
    rate_region,
    table_from_json,
    table_to_json,
)
from qmac.oracles import (
    brute_force_accessible_info,
    make_rng,
    random_ensemble,
    random_kraus_channel,
    random_povm,
)
from qmac.quantum_core import (
    DensityMatrix,
    LabeledEnsemble,
    Povm,
    identity_channel,
    validate_density,
)
from qmac.verification import random_table, region_inequality_slack


def pure(vec) -> DensityMatrix:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))


def binary_uniform_ensemble(theta=0.0) -> LabeledEnsemble:
    """Two pure qubit states separated by angle theta from the basis pair."""
    return LabeledEnsemble(
        (pure([1.0, 0.0]), pure([math.sin(theta), math.cos(theta)])), [0.5, 0.5]
    )


def computational_povm(dim) -> Povm:
    return Povm(tuple(np.diag(np.eye(dim)[i]).astype(complex) for i in range(dim)))


def oracle_triple(joint_in, cond):
    """Independent summation oracle working from an arbitrary joint input law.

    Returns (I(a:g/b), I(b:g/a), I(ab:g)) by direct triple loops; used both
    to cross-check the vectorized implementation (product inputs) and to
    probe correlated inputs, which JointChannelTable cannot represent.
    """
    n_a, n_b = joint_in.shape
    n_g = cond.shape[2]
    p_abg = joint_in[:, :, None] * cond
    p_g = p_abg.sum(axis=(0, 1))
    p_bg = p_abg.sum(axis=0)
    p_ag = p_abg.sum(axis=1)
    p_b = joint_in.sum(axis=0)
    p_a = joint_in.sum(axis=1)
    i_sum = i_1 = i_2 = 0.0
    for a in range(n_a):
        for b in range(n_b):
            for g in range(n_g):
                if p_abg[a, b, g] <= 0.0:
                    continue
                i_sum += p_abg[a, b, g] * math.log(cond[a, b, g] / p_g[g])
                i_1 += p_abg[a, b, g] * math.log(
                    cond[a, b, g] / (p_bg[b, g] / p_b[b])
                )
                i_2 += p_abg[a, b, g] * math.log(
                    cond[a, b, g] / (p_ag[a, g] / p_a[a])
                )
    return i_1, i_2, i_sum


class TestTableValidation:
    def test_slices_must_sum_to_one(self):
        bad = np.full((2, 2, 2), 0.4)
        with pytest.raises(ValueError, match="sum to 1"):
            JointChannelTable(bad, [0.5, 0.5], [0.5, 0.5])

    def test_negative_entries_rejected(self):
        bad = np.array([[[1.2, -0.2]]])
        with pytest.raises(ValueError, match="negative"):
            JointChannelTable(bad, [1.0], [1.0])

    def test_json_roundtrip(self):
        t = random_table(make_rng(3), 2, 3, 4)
        back = table_from_json(table_to_json(t))
        np.testing.assert_allclose(back.p_out_given_in, t.p_out_given_in)
        np.testing.assert_allclose(back.p_alpha, t.p_alpha)
        np.testing.assert_allclose(back.p_beta, t.p_beta)


class TestRatePoint:
    def test_negative_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            RatePoint(-0.5, 0.1, 0.1)

    def test_sum_dominance_enforced(self):
        with pytest.raises(ValueError, match="sum bound"):
            RatePoint(0.2, 0.2, 1.0)


class TestInduceChannel:
    def test_orthogonal_inputs_identity_channel(self):
        ens = LabeledEnsemble((pure([1, 0]), pure([0, 1])), [0.5, 0.5])
        table = induce_channel(ens, ens, identity_channel(4), computational_povm(4))
        # perfectly distinguishable: each (a, b) hits a single outcome
        assert np.all(np.isin(np.round(table.p_out_given_in, 12), [0.0, 1.0]))
        for a in range(2):
            for b in range(2):
                assert table.p_out_given_in[a, b, 2 * a + b] == pytest.approx(1.0)

    def test_singleton_sources_uninformative(self):
        ens = LabeledEnsemble((validate_density(np.eye(2) / 2),), [1.0])
        rng = make_rng(5)
        table = induce_channel(ens, ens, identity_channel(4), random_povm(4, 4, rng))
        point = rate_region(table)
        assert point.sum_bound == pytest.approx(0.0, abs=1e-12)

    def test_cells_match_direct_traces(self):
        # oracle: recompute every cell with raw trace arithmetic
        ens1 = binary_uniform_ensemble(0.3)
        ens2 = binary_uniform_ensemble(0.7)
        rng = make_rng(11)
        povm = random_povm(4, 4, rng)
        ch = identity_channel(4)
        table = induce_channel(ens1, ens2, ch, povm)
        for a, rho_a in enumerate(ens1.states):
            for b, rho_b in enumerate(ens2.states):
                joint = np.kron(rho_a.entries, rho_b.entries)
                for g, element in enumerate(povm.elements):
                    want = float(np.trace(element @ joint).real)
                    assert table.p_out_given_in[a, b, g] == pytest.approx(
                        want, abs=1e-12
                    )

    def test_dim_mismatch(self):
        ens = binary_uniform_ensemble()
        with pytest.raises(ValueError, match="dim"):
            induce_channel(ens, ens, identity_channel(2), computational_povm(2))


class TestMutualInformation:
    def test_deterministic_table(self):
        cond = np.zeros((2, 2, 4))
        for a in range(2):
            for b in range(2):
                cond[a, b, 2 * a + b] = 1.0
        t = JointChannelTable(cond, [0.5, 0.5], [0.5, 0.5])
        assert mutual_information(t) == pytest.approx(math.log(4.0), abs=1e-12)

    def test_input_independent_table(self):
        cond = np.tile(np.array([0.2, 0.3, 0.5]), (2, 2, 1))
        t = JointChannelTable(cond, [0.5, 0.5], [0.4, 0.6])
        assert mutual_information(t) == pytest.approx(0.0, abs=1e-12)

    def test_matches_summation_oracle(self):
        rng = make_rng(13)
        for _ in range(20):
            t = random_table(rng, 2, 2, 3)
            joint_in = np.outer(t.p_alpha, t.p_beta)
            i1, i2, i_sum = oracle_triple(joint_in, t.p_out_given_in)
            assert mutual_information(t) == pytest.approx(i_sum, abs=1e-12)
            assert conditional_mutual_information(t, 1) == pytest.approx(i1, abs=1e-12)
            assert conditional_mutual_information(t, 2) == pytest.approx(i2, abs=1e-12)


class TestConditionalMutualInformation:
    def test_output_ignores_source1(self):
        cond = np.zeros((2, 2, 2))
        cond[:, 0, 0] = 1.0
        cond[:, 1, 1] = 1.0  # outcome copies b, ignores a
        t = JointChannelTable(cond, [0.5, 0.5], [0.5, 0.5])
        assert conditional_mutual_information(t, 1) == pytest.approx(0.0, abs=1e-12)
        assert rate_region(t).r1_bound == pytest.approx(0.0, abs=1e-12)

    def test_invertible_table(self):
        cond = np.zeros((2, 2, 4))
        for a in range(2):
            for b in range(2):
                cond[a, b, 2 * a + b] = 1.0
        t = JointChannelTable(cond, [0.5, 0.5], [0.5, 0.5])
        assert conditional_mutual_information(t, 1) == pytest.approx(
            math.log(2.0), abs=1e-12
        )

    def test_bad_selector(self):
        t = random_table(make_rng(17))
        with pytest.raises(ValueError, match="source"):
            conditional_mutual_information(t, 3)


class TestRegionInequality:
    def test_independent_inputs_satisfy(self):
        rng = make_rng(19)
        for _ in range(60):
            point = rate_region(random_table(rng, 2, 3, 3))
            assert region_inequality_slack(point) >= -1e-9

    def test_relabeling_invariance(self):
        rng = make_rng(23)
        t = random_table(rng, 2, 2, 4)
        perm = rng.permutation(4)
        shuffled = JointChannelTable(
            t.p_out_given_in[:, :, perm], t.p_alpha, t.p_beta
        )
        a, b = rate_region(t), rate_region(shuffled)
        assert a.r1_bound == pytest.approx(b.r1_bound, abs=1e-12)
        assert a.r2_bound == pytest.approx(b.r2_bound, abs=1e-12)
        assert a.sum_bound == pytest.approx(b.sum_bound, abs=1e-12)

    def test_correlated_inputs_can_violate(self):
        """The inequality needs independent senders: with fully correlated
        letters and an output that copies sender 1, both conditional terms
        vanish while the joint information stays positive. Documentation
        of the hypothesis, computed by the standalone oracle."""
        joint_in = 0.5 * np.eye(2)  # alpha = beta, uniform
        cond = np.zeros((2, 2, 2))
        cond[0, :, 0] = 1.0
        cond[1, :, 1] = 1.0  # outcome copies alpha
        i1, i2, i_sum = oracle_triple(joint_in, cond)
        assert i1 + i2 < i_sum - 0.5  # ln 2 gap
        # the same conditional table with independent product inputs obeys it
        product = np.outer([0.5, 0.5], [0.5, 0.5])
        j1, j2, j_sum = oracle_triple(product, cond)
        assert j1 + j2 >= j_sum - 1e-12


class TestCoarsening:
    def test_merging_never_gains(self):
        rng = make_rng(29)
        for _ in range(25):
            t = random_table(rng, 2, 2, 4)
            before = rate_region(t)
            after = rate_region(merge_outcomes(t, 1, 3))
            assert after.r1_bound <= before.r1_bound + 1e-9
            assert after.r2_bound <= before.r2_bound + 1e-9
            assert after.sum_bound <= before.sum_bound + 1e-9


class TestHolevoBounds:
    def test_singleton_source1_gives_zero(self):
        ens1 = LabeledEnsemble((validate_density(np.eye(2) / 2),), [1.0])
        ens2 = binary_uniform_ensemble(0.4)
        assert holevo_conditional_bound(ens1, ens2, identity_channel(4), 1) == pytest.approx(
            0.0, abs=1e-9
        )

    def test_orthogonal_pair_gives_ln2(self):
        ens1 = LabeledEnsemble((pure([1, 0]), pure([0, 1])), [0.5, 0.5])
        ens2 = LabeledEnsemble((validate_density(np.eye(2) / 2),), [1.0])
        # average of the pair is maximally mixed: entropy ln 2, pure parts zero
        got = holevo_conditional_bound(ens1, ens2, identity_channel(4), 1)
        assert got == pytest.approx(math.log(2.0), abs=1e-9)

    def test_sum_bound_singletons_zero(self):
        ens = LabeledEnsemble((validate_density(np.eye(2) / 2),), [1.0])
        assert holevo_sum_bound(ens, ens, identity_channel(4)) == pytest.approx(
            0.0, abs=1e-9
        )

    def test_sum_bound_orthogonal_ln4(self):
        ens = LabeledEnsemble((pure([1, 0]), pure([0, 1])), [0.5, 0.5])
        got = holevo_sum_bound(ens, ens, identity_channel(4))
        assert got == pytest.approx(math.log(4.0), abs=1e-9)

    def test_dominates_every_povm(self):
        rng = make_rng(31)
        for _ in range(6):
            ens1 = random_ensemble(2, 2, rng)
            ens2 = random_ensemble(2, 2, rng)
            ch = random_kraus_channel(4, 2, rng)
            b1 = holevo_conditional_bound(ens1, ens2, ch, 1)
            b2 = holevo_conditional_bound(ens1, ens2, ch, 2)
            bs = holevo_sum_bound(ens1, ens2, ch)
            for _ in range(4):
                povm = random_povm(4, int(rng.integers(2, 6)), rng)
                point = rate_region(induce_channel(ens1, ens2, ch, povm))
                assert point.r1_bound <= b1 + 1e-9
                assert point.r2_bound <= b2 + 1e-9
                assert point.sum_bound <= bs + 1e-9

    def test_dominates_searched_povm(self):
        # the brute-force oracle actively tries to beat the bound and fails
        rng = make_rng(37)
        ens1 = random_ensemble(2, 2, rng)
        ens2 = random_ensemble(2, 2, rng)
        ch = random_kraus_channel(4, 2, rng)
        found = brute_force_accessible_info(
            ens1, ens2, ch, n_outcomes=4, n_restarts=2, seed=5, maxiter=60
        ).best
        assert found.r1_bound <= holevo_conditional_bound(ens1, ens2, ch, 1) + 1e-6
        assert found.r2_bound <= holevo_conditional_bound(ens1, ens2, ch, 2) + 1e-6
        assert found.sum_bound <= holevo_sum_bound(ens1, ens2, ch) + 1e-6
