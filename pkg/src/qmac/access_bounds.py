"""Information quantities of a two-sender, one-receiver channel.

A pair of finite source alphabets drives a quantum channel whose output is
read out by a single POVM; that induces an ordinary conditional probability
table p(out | letter1, letter2). This module computes the three quantities
that bound the achievable rate pair of the two senders (the per-sender
conditional informations and the joint mutual information), together with
measurement-independent entropic upper bounds on them.

Everything is in nats. All functions are pure and all tables immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quantum_core import (
    DEFAULT_TOL,
    KrausChannel,
    LabeledEnsemble,
    Povm,
    _freeze,
    apply_channel,
    measure,
    tensor,
    von_neumann_entropy,
)


@dataclass(frozen=True, eq=False)
class JointChannelTable:
    """Conditional table p(out | a, b) with independent input distributions.

    ``p_out_given_in`` has shape (n_a, n_b, n_out); every (a, b) slice is a
    probability vector. The two senders are independent by construction:
    the joint input law is the outer product of ``p_alpha`` and ``p_beta``.
    """

    p_out_given_in: np.ndarray
    p_alpha: np.ndarray
    p_beta: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        p = np.array(self.p_out_given_in, dtype=float)
        if p.ndim != 3:
            raise ValueError(f"table must be 3-index (a, b, out), got shape {p.shape}")
        if p.min() < -self.tol:
            raise ValueError(f"negative conditional probability {p.min():.3e}")
        p = np.clip(p, 0.0, None)
        slice_dev = float(np.max(np.abs(p.sum(axis=2) - 1.0)))
        if slice_dev > p.shape[2] * self.tol:
            raise ValueError(
                f"conditional slices must sum to 1: max deviation {slice_dev:.3e}"
            )

        pa = _prob_vector(self.p_alpha, p.shape[0], self.tol, "p_alpha")
        pb = _prob_vector(self.p_beta, p.shape[1], self.tol, "p_beta")

        object.__setattr__(self, "p_out_given_in", _freeze(p))
        object.__setattr__(self, "p_alpha", _freeze(pa))
        object.__setattr__(self, "p_beta", _freeze(pb))

    @property
    def n_outcomes(self) -> int:
        return self.p_out_given_in.shape[2]


def _prob_vector(v, n: int, tol: float, what: str) -> np.ndarray:
    p = np.array(v, dtype=float)
    if p.ndim != 1 or p.size != n:
        raise ValueError(f"{what} must be a length-{n} vector, got shape {p.shape}")
    if p.min() < -tol:
        raise ValueError(f"{what} has negative entry {p.min():.3e}")
    if abs(p.sum() - 1.0) > n * tol:
        raise ValueError(f"{what} must sum to 1, deviation {abs(p.sum() - 1.0):.3e}")
    return np.clip(p, 0.0, None)


@dataclass(frozen=True)
class RatePoint:
    """The triple of rate bounds: per-sender conditional rates and sum rate.

    The achievable region is {R1 < r1_bound, R2 < r2_bound,
    R1 + R2 < sum_bound}. For independent senders the sum bound never
    exceeds the sum of the individual bounds.
    """

    r1_bound: float
    r2_bound: float
    sum_bound: float

    def __post_init__(self):
        for name in ("r1_bound", "r2_bound", "sum_bound"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
            if v < -DEFAULT_TOL:
                raise ValueError(f"{name} must be nonnegative, got {v:.3e}")
            object.__setattr__(self, name, max(0.0, float(v)))
        if self.sum_bound > self.r1_bound + self.r2_bound + DEFAULT_TOL:
            raise ValueError(
                "sum bound exceeds the sum of individual bounds: "
                f"{self.sum_bound:.12g} > {self.r1_bound + self.r2_bound:.12g}"
            )


def induce_channel(
    ens1: LabeledEnsemble, ens2: LabeledEnsemble, ch: KrausChannel, povm: Povm
) -> JointChannelTable:
    """Classical table p(out | a, b) = tr(E_out S(rho_a (x) rho_b))."""
    n1, n2 = len(ens1), len(ens2)
    table = np.empty((n1, n2, povm.n_outcomes))
    for a, rho_a in enumerate(ens1.states):
        for b, rho_b in enumerate(ens2.states):
            sigma = apply_channel(ch, tensor(rho_a, rho_b))
            table[a, b, :] = measure(povm, sigma)
    return JointChannelTable(table, ens1.probs, ens2.probs)


def mutual_information(t: JointChannelTable) -> float:
    """I(a (x) b : out) = sum p(a)p(b)p(g|ab) ln[p(g|ab) / p(g)], in nats."""
    p = t.p_out_given_in
    joint = t.p_alpha[:, None, None] * t.p_beta[None, :, None] * p
    p_out = joint.sum(axis=(0, 1))
    ia, ib, ig = np.nonzero(joint)
    if ia.size == 0:
        return 0.0
    # marginals dominate every joint cell, so p_out > 0 wherever joint > 0
    assert p_out[ig].min() > 0.0
    val = float(np.sum(joint[ia, ib, ig] * np.log(p[ia, ib, ig] / p_out[ig])))
    return max(0.0, val)


def conditional_mutual_information(t: JointChannelTable, source: int = 1) -> float:
    """Rate bound for one sender when the other sender's letter is known.

    ``source=1`` gives I(a : out / b) (conditioning on sender 2's letter),
    ``source=2`` gives I(b : out / a).
    """
    p = t.p_out_given_in
    if source == 1:
        cond = np.einsum("a,abg->bg", t.p_alpha, p)  # p(g | b)
        denom = cond[None, :, :]
    elif source == 2:
        cond = np.einsum("b,abg->ag", t.p_beta, p)  # p(g | a)
        denom = cond[:, None, :]
    else:
        raise ValueError(f"source must be 1 or 2, got {source}")

    joint = t.p_alpha[:, None, None] * t.p_beta[None, :, None] * p
    ia, ib, ig = np.nonzero(joint)
    if ia.size == 0:
        return 0.0
    denom_vals = np.broadcast_to(denom, p.shape)[ia, ib, ig]
    assert denom_vals.min() > 0.0
    val = float(np.sum(joint[ia, ib, ig] * np.log(p[ia, ib, ig] / denom_vals)))
    return max(0.0, val)


def rate_region(t: JointChannelTable) -> RatePoint:
    """The three bounds (I(a:g/b), I(b:g/a), I(a(x)b:g)) for one table."""
    return RatePoint(
        conditional_mutual_information(t, source=1),
        conditional_mutual_information(t, source=2),
        mutual_information(t),
    )


def _average_output_entropy(
    ens1: LabeledEnsemble, ens2: LabeledEnsemble, ch: KrausChannel
) -> float:
    acc = 0.0
    for pa, rho_a in zip(ens1.probs, ens1.states):
        for pb, rho_b in zip(ens2.probs, ens2.states):
            acc += pa * pb * von_neumann_entropy(apply_channel(ch, tensor(rho_a, rho_b)))
    return acc


def _clamped(value: float) -> float:
    # tiny negatives are eigensolver noise; anything larger means the
    # entropy arithmetic itself is broken
    if value < -DEFAULT_TOL:
        raise ArithmeticError(
            f"entropy bound came out negative ({value:.3e}); inputs are inconsistent"
        )
    return max(0.0, value)


def holevo_conditional_bound(
    ens1: LabeledEnsemble, ens2: LabeledEnsemble, ch: KrausChannel, source: int = 1
) -> float:
    """Measurement-independent upper bound on a sender's conditional rate.

    For ``source=1`` this is
    ``sum_b p_b S(S(rho1_avg (x) rho_b)) - sum_ab p_a p_b S(S(rho_a (x) rho_b))``,
    which dominates I(a : out / b) for every decoding POVM; ``source=2``
    swaps the roles of the senders.
    """
    ent_joint = _average_output_entropy(ens1, ens2, ch)
    if source == 1:
        avg1 = ens1.average()
        ent_cond = sum(
            pb * von_neumann_entropy(apply_channel(ch, tensor(avg1, rho_b)))
            for pb, rho_b in zip(ens2.probs, ens2.states)
        )
    elif source == 2:
        avg2 = ens2.average()
        ent_cond = sum(
            pa * von_neumann_entropy(apply_channel(ch, tensor(rho_a, avg2)))
            for pa, rho_a in zip(ens1.probs, ens1.states)
        )
    else:
        raise ValueError(f"source must be 1 or 2, got {source}")
    return _clamped(ent_cond - ent_joint)


def holevo_sum_bound(
    ens1: LabeledEnsemble, ens2: LabeledEnsemble, ch: KrausChannel
) -> float:
    """Measurement-independent upper bound on the sum rate.

    ``S(S(rho1_avg (x) rho2_avg)) - sum_ab p_a p_b S(S(rho_a (x) rho_b))``
    dominates I(a (x) b : out) for every decoding POVM.
    """
    ent_joint = _average_output_entropy(ens1, ens2, ch)
    ent_avg = von_neumann_entropy(
        apply_channel(ch, tensor(ens1.average(), ens2.average()))
    )
    return _clamped(ent_avg - ent_joint)


def merge_outcomes(t: JointChannelTable, i: int, j: int) -> JointChannelTable:
    """Coarsen a table by pooling two outcome columns (a data-processing step)."""
    if i == j:
        raise ValueError("cannot merge an outcome with itself")
    i, j = sorted((i, j))
    p = np.array(t.p_out_given_in)
    p[:, :, i] += p[:, :, j]
    p = np.delete(p, j, axis=2)
    return JointChannelTable(p, t.p_alpha, t.p_beta, tol=t.tol)


def table_to_json(t: JointChannelTable) -> dict:
    return {
        "p_out_given_in": t.p_out_given_in.tolist(),
        "p_alpha": t.p_alpha.tolist(),
        "p_beta": t.p_beta.tolist(),
    }


def table_from_json(doc: dict, tol: float = DEFAULT_TOL) -> JointChannelTable:
    for key in ("p_out_given_in", "p_alpha", "p_beta"):
        if key not in doc:
            raise ValueError(f'table document needs a "{key}" key')
    return JointChannelTable(
        np.asarray(doc["p_out_given_in"], dtype=float),
        np.asarray(doc["p_alpha"], dtype=float),
        np.asarray(doc["p_beta"], dtype=float),
        tol=tol,
    )
