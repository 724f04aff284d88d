"""Finite-dimensional quantum primitives.

Density matrices, labeled ensembles, Kraus channels and POVMs, plus the
entropic functionals built on them (von Neumann entropy, quantum relative
entropy). Everything is dense complex linear algebra on small dimensions
(qubits, qutrits and pairs thereof). All logarithms are natural, so every
entropy-like quantity is in nats; use ``nats_to_bits`` only at reporting
time.

All types are immutable after construction and all operations are pure
functions, so values can be shared freely across threads or worker pools.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Invariant tolerance for double-precision eigensolves on dim <= 8.
DEFAULT_TOL = 1e-9
# Eigenvalue threshold separating "zero" from "small" when detecting the
# support of a state inside relative_entropy.
SUPPORT_TOL = 1e-12

LN2 = math.log(2.0)


def nats_to_bits(x: float) -> float:
    """Convert an information quantity from nats to bits."""
    return x / LN2


def _as_square_matrix(m, what: str) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {a.shape}")
    return a


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated density matrix (Hermitian, unit trace, positive semidefinite).

    Construction fails loudly if any invariant is violated beyond ``tol``;
    nothing is normalized or projected silently.
    """

    entries: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        m = _as_square_matrix(self.entries, "density matrix")
        tol = self.tol

        herm_dev = float(np.max(np.abs(m - m.conj().T)))
        if herm_dev > tol:
            raise ValueError(
                f"not Hermitian: max |m - m^dag| = {herm_dev:.3e} exceeds tol {tol:.1e}"
            )
        trace_dev = abs(np.trace(m) - 1.0)
        if trace_dev > tol:
            raise ValueError(
                f"trace not 1: |tr(m) - 1| = {trace_dev:.3e} exceeds tol {tol:.1e}"
            )
        min_eig = float(np.linalg.eigvalsh(m).min())
        if min_eig < -tol:
            raise ValueError(
                f"not positive semidefinite: min eigenvalue {min_eig:.3e} below -tol {-tol:.1e}"
            )
        object.__setattr__(self, "entries", _freeze(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def validate_density(m, tol: float = DEFAULT_TOL) -> DensityMatrix:
    """Check a raw complex matrix against all density-matrix invariants.

    Raises ValueError naming the violated invariant (hermiticity, trace or
    positivity) together with the offending magnitude.
    """
    return DensityMatrix(m, tol=tol)


@dataclass(frozen=True, eq=False)
class LabeledEnsemble:
    """Probability-weighted family of same-dimension density matrices."""

    states: tuple
    probs: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise ValueError("ensemble needs at least one state")
        if not all(isinstance(s, DensityMatrix) for s in states):
            raise ValueError("ensemble states must be DensityMatrix instances")
        dim = states[0].dim
        if any(s.dim != dim for s in states):
            raise ValueError("ensemble states must share one dimension")

        p = np.array(self.probs, dtype=float)
        if p.ndim != 1 or p.size != len(states):
            raise ValueError(
                f"probs must be a vector of length {len(states)}, got shape {p.shape}"
            )
        if p.min() < -self.tol:
            raise ValueError(f"negative probability {p.min():.3e}")
        dev = abs(p.sum() - 1.0)
        if dev > self.tol:
            raise ValueError(f"probabilities sum to 1 within tol: deviation {dev:.3e}")
        p = np.clip(p, 0.0, None)

        object.__setattr__(self, "states", states)
        object.__setattr__(self, "probs", _freeze(p))

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def __len__(self) -> int:
        return len(self.states)

    def average(self) -> DensityMatrix:
        """The barycenter sum_i p_i rho_i, revalidated."""
        acc = sum(p * s.entries for p, s in zip(self.probs, self.states))
        return DensityMatrix(acc, tol=self.tol)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Completely positive trace-preserving map in operator-sum form.

    The channel acts as ``rho -> sum_mu B_mu rho B_mu^dag`` and construction
    enforces the matching completeness relation ``sum_mu B_mu^dag B_mu = 1``,
    which is exactly trace preservation. Operators may be rectangular
    (dim_out x dim_in).
    """

    operators: tuple
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        ops = tuple(np.array(op, dtype=complex) for op in self.operators)
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(op.shape != shape for op in ops):
            raise ValueError("all Kraus operators must share one (out, in) shape")

        complete = sum(op.conj().T @ op for op in ops)
        dev = float(np.max(np.abs(complete - np.eye(shape[1]))))
        if dev > self.tol:
            raise ValueError(
                f"completeness violated: max |sum B^dag B - 1| = {dev:.3e} exceeds tol {self.tol:.1e}"
            )
        object.__setattr__(self, "operators", tuple(_freeze(op) for op in ops))

    @property
    def dim_in(self) -> int:
        return self.operators[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.operators[0].shape[0]


def identity_channel(dim: int) -> KrausChannel:
    """The do-nothing channel on a dim-dimensional system."""
    return KrausChannel((np.eye(dim, dtype=complex),))


@dataclass(frozen=True, eq=False)
class Povm:
    """Generalized measurement: positive Hermitian elements resolving the identity."""

    elements: tuple
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        els = tuple(
            _as_square_matrix(e, "POVM element") for e in self.elements
        )
        if not els:
            raise ValueError("POVM needs at least one element")
        dim = els[0].shape[0]
        if any(e.shape[0] != dim for e in els):
            raise ValueError("POVM elements must share one dimension")
        for i, e in enumerate(els):
            herm_dev = float(np.max(np.abs(e - e.conj().T)))
            if herm_dev > self.tol:
                raise ValueError(f"POVM element {i} not Hermitian (dev {herm_dev:.3e})")
            min_eig = float(np.linalg.eigvalsh(e).min())
            if min_eig < -self.tol:
                raise ValueError(
                    f"POVM element {i} not positive semidefinite (min eig {min_eig:.3e})"
                )
        total_dev = float(np.max(np.abs(sum(els) - np.eye(dim))))
        if total_dev > self.tol:
            raise ValueError(
                f"elements do not resolve the identity: deviation {total_dev:.3e}"
            )
        object.__setattr__(self, "elements", tuple(_freeze(e) for e in els))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)


def tensor(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Kronecker (row-major) product state of two subsystems."""
    return DensityMatrix(np.kron(a.entries, b.entries), tol=max(a.tol, b.tol))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-sum_i lam_i ln(lam_i) over the eigenvalues, in nats, with 0 ln 0 = 0."""
    evals = np.linalg.eigvalsh(rho.entries)
    evals = evals[evals > 0.0]
    if evals.size == 0:
        return 0.0
    return max(0.0, float(-np.sum(evals * np.log(evals))))


def relative_entropy(
    rho1: DensityMatrix, rho2: DensityMatrix, support_tol: float = SUPPORT_TOL
) -> float:
    """Quantum relative entropy tr(rho1 ln rho1 - rho1 ln rho2), in nats.

    Returns ``math.inf`` when the support of rho1 is not contained in the
    support of rho2 (detected by projecting rho1 onto eigenvectors of rho2
    whose eigenvalue falls below ``support_tol``).
    """
    if rho1.dim != rho2.dim:
        raise ValueError(f"dimension mismatch: {rho1.dim} vs {rho2.dim}")

    evals1 = np.linalg.eigvalsh(rho1.entries)
    evals1 = evals1[evals1 > 0.0]
    term1 = float(np.sum(evals1 * np.log(evals1))) if evals1.size else 0.0

    evals2, vecs2 = np.linalg.eigh(rho2.entries)
    # weight of rho1 along each eigenvector of rho2
    overlaps = np.real(np.einsum("ij,jk,ki->i", vecs2.conj().T, rho1.entries, vecs2))
    overlaps = np.clip(overlaps, 0.0, None)

    term2 = 0.0
    for lam, w in zip(evals2, overlaps):
        if lam <= support_tol:
            if w > support_tol:
                return math.inf
            continue
        term2 += w * math.log(lam)
    return max(0.0, term1 - term2)


def apply_channel(ch: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    """Push a state through the operator sum; the output is revalidated.

    A completeness defect in ``ch`` would surface here as a trace deviation
    beyond tolerance.
    """
    if ch.dim_in != rho.dim:
        raise ValueError(
            f"channel input dim {ch.dim_in} does not match state dim {rho.dim}"
        )
    out = sum(op @ rho.entries @ op.conj().T for op in ch.operators)
    return DensityMatrix(out, tol=rho.tol)


def measure(povm: Povm, rho: DensityMatrix) -> np.ndarray:
    """Outcome probabilities p_i = tr(E_i rho), clipped into [0, 1].

    The vector sums to 1 within tolerance because the elements resolve the
    identity.
    """
    if povm.dim != rho.dim:
        raise ValueError(f"POVM dim {povm.dim} does not match state dim {rho.dim}")
    probs = np.array([float(np.trace(e @ rho.entries).real) for e in povm.elements])
    tol = max(povm.tol, rho.tol)
    if probs.min() < -tol or abs(probs.sum() - 1.0) > povm.dim * tol:
        raise ValueError(
            f"inconsistent outcome probabilities (min {probs.min():.3e}, "
            f"sum {probs.sum():.12f})"
        )
    return _freeze(np.clip(probs, 0.0, 1.0))


def measurement_as_channel(povm: Povm, rho: DensityMatrix) -> DensityMatrix:
    """Replace a state by the diagonal matrix of its outcome probabilities.

    This map is itself a valid quantum channel into a space of dimension
    equal to the number of outcomes, so relative entropy can only decrease
    under it.
    """
    return DensityMatrix(np.diag(measure(povm, rho)), tol=max(povm.tol, rho.tol))


# ---------------------------------------------------------------------------
# JSON interchange. Complex matrices are stored row-major as nested lists of
# [re, im] pairs; documents use the top-level keys "states", "probs",
# "kraus" and "povm".
# ---------------------------------------------------------------------------


def matrix_to_json(m) -> list:
    a = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(rows) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    if a.ndim != 3 or a.shape[2] != 2:
        raise ValueError(
            "matrix JSON must be a list of rows of [re, im] pairs, "
            f"got shape {a.shape}"
        )
    return a[..., 0] + 1j * a[..., 1]


def ensemble_to_json(ens: LabeledEnsemble) -> dict:
    return {
        "states": [matrix_to_json(s.entries) for s in ens.states],
        "probs": [float(p) for p in ens.probs],
    }


def ensemble_from_json(doc: dict, tol: float = DEFAULT_TOL) -> LabeledEnsemble:
    if "states" not in doc or "probs" not in doc:
        raise ValueError('ensemble document needs "states" and "probs" keys')
    states = tuple(
        DensityMatrix(matrix_from_json(m), tol=tol) for m in doc["states"]
    )
    return LabeledEnsemble(states, np.asarray(doc["probs"], dtype=float), tol=tol)


def kraus_to_json(ch: KrausChannel) -> dict:
    return {"kraus": [matrix_to_json(op) for op in ch.operators]}


def kraus_from_json(doc: dict, tol: float = DEFAULT_TOL) -> KrausChannel:
    if "kraus" not in doc:
        raise ValueError('channel document needs a "kraus" key')
    return KrausChannel(
        tuple(matrix_from_json(op) for op in doc["kraus"]), tol=tol
    )


def povm_to_json(povm: Povm) -> dict:
    return {"povm": [matrix_to_json(e) for e in povm.elements]}


def povm_from_json(doc: dict, tol: float = DEFAULT_TOL) -> Povm:
    if "povm" not in doc:
        raise ValueError('POVM document needs a "povm" key')
    return Povm(tuple(matrix_from_json(e) for e in doc["povm"]), tol=tol)
