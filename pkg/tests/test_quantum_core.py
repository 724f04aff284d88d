"""Tests for the finite-dimensional quantum primitives."""

import math

import numpy as np
import pytest

from qmac.quantum_core import (
    KrausChannel,
    LabeledEnsemble,
    Povm,
    apply_channel,
    ensemble_from_json,
    ensemble_to_json,
    identity_channel,
    kraus_from_json,
    kraus_to_json,
    matrix_from_json,
    matrix_to_json,
    measure,
    measurement_as_channel,
    nats_to_bits,
    povm_from_json,
    povm_to_json,
    relative_entropy,
    tensor,
    validate_density,
    von_neumann_entropy,
)
from qmac.oracles import make_rng, random_density_matrix, random_kraus_channel, random_povm

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1j], [1j, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def dephasing_channel():
    return KrausChannel((np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)))


def depolarizing_channel(p):
    return KrausChannel(
        (
            math.sqrt(1.0 - 0.75 * p) * np.eye(2, dtype=complex),
            math.sqrt(p / 4.0) * PAULI_X,
            math.sqrt(p / 4.0) * PAULI_Y,
            math.sqrt(p / 4.0) * PAULI_Z,
        )
    )


def trine_povm():
    elements = []
    for k in range(3):
        phi = 2.0 * math.pi * k / 3.0
        vec = np.array([math.cos(phi), math.sin(phi)])
        elements.append((2.0 / 3.0) * np.outer(vec, vec).astype(complex))
    return Povm(tuple(elements))


class TestValidateDensity:
    def test_maximally_mixed_qubit(self):
        rho = validate_density(np.eye(2) / 2)
        assert rho.dim == 2

    def test_pure_state(self):
        validate_density(np.diag([1.0, 0.0]))

    def test_negative_eigenvalue_rejected(self):
        with pytest.raises(ValueError, match="positive semidefinite"):
            validate_density(np.diag([1.5, -0.5]))

    def test_bad_trace_rejected(self):
        with pytest.raises(ValueError, match="trace"):
            validate_density(np.diag([0.6, 0.6]))

    def test_non_hermitian_rejected(self):
        m = np.array([[0.5, 0.3], [0.0, 0.5]], dtype=complex)
        with pytest.raises(ValueError, match="Hermitian"):
            validate_density(m)

    def test_nothing_normalized_silently(self):
        # close-but-over trace must fail, not be rescaled
        with pytest.raises(ValueError):
            validate_density(np.diag([0.51, 0.51]), tol=1e-9)

    def test_entries_immutable(self):
        rho = validate_density(np.eye(2) / 2)
        with pytest.raises(ValueError):
            rho.entries[0, 0] = 0.9


class TestTensor:
    def test_mixed_pair(self):
        out = tensor(validate_density(np.eye(2) / 2), validate_density(np.eye(2) / 2))
        np.testing.assert_allclose(out.entries, np.eye(4) / 4)

    def test_kron_convention(self):
        out = tensor(validate_density(np.diag([1.0, 0.0])), validate_density(np.diag([0.0, 1.0])))
        np.testing.assert_allclose(out.entries, np.diag([0.0, 1.0, 0.0, 0.0]))

    def test_eigenvalues_multiply(self):
        # oracle: eigendecompose both factors directly and form all products
        rng = make_rng(101)
        a = random_density_matrix(2, rng, rank=2)
        b = random_density_matrix(3, rng, rank=3)
        out = tensor(a, b)
        got = np.sort(np.linalg.eigvalsh(out.entries))
        ea = np.linalg.eigvalsh(a.entries)
        eb = np.linalg.eigvalsh(b.entries)
        want = np.sort(np.outer(ea, eb).ravel())
        np.testing.assert_allclose(got, want, atol=1e-12)
        assert abs(np.trace(out.entries) - 1.0) < 1e-12


class TestVonNeumannEntropy:
    def test_pure_state_zero(self):
        assert von_neumann_entropy(validate_density(np.diag([1.0, 0.0]))) == 0.0

    def test_maximally_mixed(self):
        assert von_neumann_entropy(validate_density(np.eye(2) / 2)) == pytest.approx(
            math.log(2.0), abs=1e-12
        )

    def test_three_quarters(self):
        # frozen from the scalar evaluation -(3/4)ln(3/4) - (1/4)ln(1/4)
        got = von_neumann_entropy(validate_density(np.diag([0.75, 0.25])))
        assert got == pytest.approx(0.5623351446188083, abs=1e-12)

    def test_bounded_by_log_dim(self):
        rng = make_rng(7)
        for _ in range(30):
            dim = int(rng.integers(2, 5))
            s = von_neumann_entropy(random_density_matrix(dim, rng))
            assert -1e-12 <= s <= math.log(dim) + 1e-9

    def test_bits_helper(self):
        assert nats_to_bits(math.log(2.0)) == pytest.approx(1.0)


class TestRelativeEntropy:
    def test_self_is_zero(self):
        rng = make_rng(13)
        for _ in range(5):
            rho = random_density_matrix(3, rng, rank=3)
            assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-10)

    def test_pure_vs_mixed(self):
        got = relative_entropy(
            validate_density(np.diag([1.0, 0.0])), validate_density(np.eye(2) / 2)
        )
        assert got == pytest.approx(math.log(2.0), abs=1e-12)

    def test_disjoint_support_infinite(self):
        got = relative_entropy(
            validate_density(np.diag([1.0, 0.0])), validate_density(np.diag([0.0, 1.0]))
        )
        assert got == math.inf

    def test_nonnegative(self):
        rng = make_rng(17)
        for _ in range(40):
            a = random_density_matrix(2, rng, rank=2)
            b = random_density_matrix(2, rng, rank=2)
            assert relative_entropy(a, b) >= 0.0

    def test_dim_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            relative_entropy(
                validate_density(np.eye(2) / 2), validate_density(np.eye(3) / 3)
            )


class TestKrausChannel:
    def test_identity_channel(self):
        rho = validate_density(np.array([[0.7, 0.2], [0.2, 0.3]], dtype=complex))
        out = apply_channel(identity_channel(2), rho)
        np.testing.assert_allclose(out.entries, rho.entries)

    def test_full_dephasing(self):
        rho = validate_density(np.array([[0.7, 0.2], [0.2, 0.3]], dtype=complex))
        out = apply_channel(dephasing_channel(), rho)
        np.testing.assert_allclose(out.entries, np.diag([0.7, 0.3]))

    def test_depolarizing_output_valid(self):
        rng = make_rng(23)
        ch = depolarizing_channel(0.35)
        for _ in range(10):
            out = apply_channel(ch, random_density_matrix(2, rng))
            assert abs(np.trace(out.entries) - 1.0) < 1e-12
            assert np.linalg.eigvalsh(out.entries).min() > -1e-12

    def test_incomplete_operators_rejected(self):
        with pytest.raises(ValueError, match="completeness"):
            KrausChannel((np.eye(2, dtype=complex), np.eye(2, dtype=complex)))

    def test_dim_mismatch(self):
        with pytest.raises(ValueError, match="dim"):
            apply_channel(identity_channel(3), validate_density(np.eye(2) / 2))

    def test_rectangular_operators(self):
        # isometry into a larger space is a fine channel
        v = np.zeros((3, 2), dtype=complex)
        v[0, 0] = v[1, 1] = 1.0
        ch = KrausChannel((v,))
        out = apply_channel(ch, validate_density(np.eye(2) / 2))
        assert out.dim == 3

    def test_trace_preserved_random(self):
        rng = make_rng(29)
        for _ in range(20):
            dim = int(rng.integers(2, 4))
            ch = random_kraus_channel(dim, int(rng.integers(1, 4)), rng)
            out = apply_channel(ch, random_density_matrix(dim, rng))
            assert abs(np.trace(out.entries) - 1.0) < 1e-11


class TestPovm:
    def test_projective_on_mixed(self):
        povm = Povm((np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)))
        probs = measure(povm, validate_density(np.eye(2) / 2))
        np.testing.assert_allclose(probs, [0.5, 0.5])

    def test_trine_on_mixed(self):
        # oracle: tr((2/3)|psi><psi| I/2) = 1/3 for every trine element
        probs = measure(trine_povm(), validate_density(np.eye(2) / 2))
        np.testing.assert_allclose(probs, [1 / 3, 1 / 3, 1 / 3], atol=1e-12)

    def test_probabilities_sum_to_one(self):
        rng = make_rng(31)
        for _ in range(20):
            dim = int(rng.integers(2, 5))
            povm = random_povm(dim, int(rng.integers(2, 6)), rng)
            probs = measure(povm, random_density_matrix(dim, rng))
            assert probs.sum() == pytest.approx(1.0, abs=1e-9)
            assert probs.min() >= 0.0

    def test_incomplete_povm_rejected(self):
        with pytest.raises(ValueError, match="identity"):
            Povm((np.diag([0.5, 0.0]), np.diag([0.0, 1.0])))

    def test_negative_element_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            Povm((np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])))


class TestMeasurementAsChannel:
    def test_projective_reproduces_diagonal(self):
        povm = Povm((np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)))
        rho = validate_density(np.array([[0.7, 0.1], [0.1, 0.3]], dtype=complex))
        out = measurement_as_channel(povm, rho)
        np.testing.assert_allclose(out.entries, np.diag([0.7, 0.3]))

    def test_output_dim_is_outcome_count(self):
        rng = make_rng(37)
        povm = random_povm(2, 5, rng)
        out = measurement_as_channel(povm, random_density_matrix(2, rng))
        assert out.dim == 5

    def test_monotonicity_witness(self):
        # evaluate both sides of the data-processing inequality numerically
        rng = make_rng(41)
        for _ in range(25):
            dim = int(rng.integers(2, 4))
            rho1 = random_density_matrix(dim, rng, rank=dim)
            rho2 = random_density_matrix(dim, rng, rank=dim)
            povm = random_povm(dim, int(rng.integers(2, 5)), rng)
            before = relative_entropy(rho1, rho2)
            after = relative_entropy(
                measurement_as_channel(povm, rho1), measurement_as_channel(povm, rho2)
            )
            assert after <= before + 1e-9


class TestLindbladMonotonicity:
    def test_random_channels_contract(self):
        rng = make_rng(43)
        for _ in range(60):
            dim = int(rng.integers(2, 4))
            rho1 = random_density_matrix(dim, rng, rank=dim)
            rho2 = random_density_matrix(dim, rng, rank=dim)
            ch = random_kraus_channel(dim, int(rng.integers(1, 4)), rng)
            before = relative_entropy(rho1, rho2)
            after = relative_entropy(apply_channel(ch, rho1), apply_channel(ch, rho2))
            assert after <= before + 1e-9


class TestEnsemble:
    def test_average_is_valid(self):
        rng = make_rng(47)
        states = tuple(random_density_matrix(2, rng) for _ in range(3))
        ens = LabeledEnsemble(states, [0.2, 0.5, 0.3])
        avg = ens.average()
        assert abs(np.trace(avg.entries) - 1.0) < 1e-12

    def test_bad_probs_rejected(self):
        rho = validate_density(np.eye(2) / 2)
        with pytest.raises(ValueError, match="sum to 1"):
            LabeledEnsemble((rho, rho), [0.6, 0.6])
        with pytest.raises(ValueError, match="negative"):
            LabeledEnsemble((rho, rho), [1.5, -0.5])

    def test_mixed_dims_rejected(self):
        with pytest.raises(ValueError, match="dimension"):
            LabeledEnsemble(
                (validate_density(np.eye(2) / 2), validate_density(np.eye(3) / 3)),
                [0.5, 0.5],
            )


class TestJsonInterchange:
    def test_matrix_roundtrip(self):
        rng = make_rng(53)
        m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        np.testing.assert_allclose(matrix_from_json(matrix_to_json(m)), m)

    def test_ensemble_roundtrip(self):
        rng = make_rng(59)
        ens = LabeledEnsemble(
            tuple(random_density_matrix(2, rng) for _ in range(2)), [0.4, 0.6]
        )
        back = ensemble_from_json(ensemble_to_json(ens))
        for a, b in zip(ens.states, back.states):
            np.testing.assert_allclose(a.entries, b.entries)
        np.testing.assert_allclose(ens.probs, back.probs)

    def test_kraus_and_povm_roundtrip(self):
        rng = make_rng(61)
        ch = random_kraus_channel(2, 3, rng)
        back = kraus_from_json(kraus_to_json(ch))
        for a, b in zip(ch.operators, back.operators):
            np.testing.assert_allclose(a, b)
        povm = random_povm(2, 4, rng)
        back_p = povm_from_json(povm_to_json(povm))
        for a, b in zip(povm.elements, back_p.elements):
            np.testing.assert_allclose(a, b)

    def test_missing_keys_raise(self):
        with pytest.raises(ValueError, match="states"):
            ensemble_from_json({"probs": [1.0]})
        with pytest.raises(ValueError, match="kraus"):
            kraus_from_json({})
        with pytest.raises(ValueError, match="povm"):
            povm_from_json({})
