"""Linear-Gaussian readout of the coupled-mode channel and its rate formulas.

Both detection schemes reduce the quantum channel to a classical linear
model ``y = A1 s1 + A2 s2 + z`` with Gaussian signals and noise:

* heterodyne: both quadratures of mode 1 are read out simultaneously at
  the cost of one extra vacuum unit of noise; the signal letters are the
  two-component complex-amplitude displacements of each sender.
* homodyne: a single quadrature (Re a1) is read out; each sender displaces
  only that quadrature of a state squeezed by r, so the signal is scalar
  and the orthogonal (amplified) quadrature only contributes noise.

Rates are computed two ways on purpose: once from the assembled linear
model via ``gaussian_mutual_info`` ((1/2) ln det form, the Shannon formula
per real dimension) and once from transcribed closed forms; the test suite
pins their agreement. Everything is in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from .access_bounds import RatePoint
from .mode_dynamics import (
    ChannelParams,
    TransferCoefficients,
    _rotation_scaling,
    normal_modes,
    thermal_occupancy,
    transfer_coefficients,
)
from .quantum_core import _freeze

# Tolerance for covariance symmetry/positivity checks.
MAT_TOL = 1e-9
# Parameter tolerance for the scalar squeezing optimizer.
SQUEEZE_XATOL = 1e-8

WHICH_CHOICES = ("sum", "source1_conditional", "source2_conditional")


@dataclass(frozen=True, eq=False)
class LinearGaussianChannel:
    """y = A1 s1 + A2 s2 + z with z ~ N(0, noise_cov)."""

    a1: np.ndarray
    a2: np.ndarray
    noise_cov: np.ndarray

    def __post_init__(self):
        a1 = np.atleast_2d(np.asarray(self.a1, dtype=float))
        a2 = np.atleast_2d(np.asarray(self.a2, dtype=float))
        n = np.atleast_2d(np.asarray(self.noise_cov, dtype=float))
        if a1.shape[0] != a2.shape[0]:
            raise ValueError(
                f"source matrices disagree on output dim: {a1.shape} vs {a2.shape}"
            )
        if n.shape != (a1.shape[0], a1.shape[0]):
            raise ValueError(
                f"noise covariance shape {n.shape} does not match output dim {a1.shape[0]}"
            )
        if np.max(np.abs(n - n.T)) > MAT_TOL:
            raise ValueError("noise covariance must be symmetric")
        if np.linalg.eigvalsh(n).min() <= 0:
            raise ValueError("noise covariance must be positive definite")
        object.__setattr__(self, "a1", _freeze(a1))
        object.__setattr__(self, "a2", _freeze(a2))
        object.__setattr__(self, "noise_cov", _freeze(n))

    @property
    def output_dim(self) -> int:
        return self.a1.shape[0]


def _check_input_cov(cov, dim: int, what: str) -> np.ndarray:
    c = np.atleast_2d(np.asarray(cov, dtype=float))
    if c.shape != (dim, dim):
        raise ValueError(f"{what} must be {dim}x{dim}, got {c.shape}")
    if np.max(np.abs(c - c.T)) > MAT_TOL:
        raise ValueError(f"{what} must be symmetric")
    if np.linalg.eigvalsh(c).min() < -MAT_TOL:
        raise ValueError(f"{what} must be positive semidefinite")
    return c


def gaussian_mutual_info(
    ch: LinearGaussianChannel, k_alpha_inv, k_beta_inv, which: str = "sum"
) -> float:
    """(1/2) ln det(1 + N^-1 (A1 Ka A1^T + A2 Kb A2^T)), dropping a term for conditionals.

    ``which`` selects the quantity: "sum" keeps both signal terms,
    "source1_conditional" keeps only sender 1 (its rate bound given the
    other letter is known at the decoder), "source2_conditional" the
    mirror image. The 1/2 prefactor is the Shannon rate per real
    dimension; for the two-dimensional heterodyne model the per-quadrature
    halves combine into a plain log.
    """
    if which not in WHICH_CHOICES:
        raise ValueError(f"which must be one of {WHICH_CHOICES}, got {which!r}")
    ka = _check_input_cov(k_alpha_inv, ch.a1.shape[1], "sender 1 input covariance")
    kb = _check_input_cov(k_beta_inv, ch.a2.shape[1], "sender 2 input covariance")

    d = ch.output_dim
    signal = np.zeros((d, d))
    if which in ("sum", "source1_conditional"):
        signal += ch.a1 @ ka @ ch.a1.T
    if which in ("sum", "source2_conditional"):
        signal += ch.a2 @ kb @ ch.a2.T
    try:
        m = np.eye(d) + np.linalg.solve(ch.noise_cov, signal)
    except np.linalg.LinAlgError as exc:
        raise ValueError("noise covariance is singular") from exc
    sign, logdet = np.linalg.slogdet(m)
    if sign <= 0:
        raise ValueError("signal-plus-noise matrix is not positive definite")
    return max(0.0, 0.5 * logdet)


@dataclass(frozen=True, eq=False)
class SourceSpec:
    """One sender's power budget split between displacement and squeezing.

    ``nbar`` is the mean photon number of the input distribution; the
    displacement variance actually available as signal is stored in
    ``input_cov``. Build through the classmethods so the bookkeeping per
    detection scheme stays consistent.
    """

    nbar: float
    r: float
    input_cov: np.ndarray
    kind: str

    def __post_init__(self):
        object.__setattr__(
            self, "input_cov", _freeze(np.atleast_2d(np.asarray(self.input_cov, float)))
        )

    @classmethod
    def heterodyne(cls, nbar: float) -> "SourceSpec":
        """Coherent signaling: variance nbar/2 per quadrature, no squeezing."""
        if nbar < 0:
            raise ValueError(f"mean photon number must be nonnegative, got {nbar}")
        cov = 0.5 * nbar * np.eye(2)
        return cls(nbar=float(nbar), r=0.0, input_cov=cov, kind="heterodyne")

    @classmethod
    def homodyne(cls, nbar: float, r: float) -> "SourceSpec":
        """Squeezed signaling on the measured quadrature only.

        The photon budget splits as nbar = displacement variance + sinh^2 r,
        so the usable signal variance is nbar - sinh^2 r (must be >= 0).
        The orthogonal component carries no signal; it is dropped from the
        input covariance rather than kept as a zero-variance row.
        """
        if nbar < 0:
            raise ValueError(f"mean photon number must be nonnegative, got {nbar}")
        sh2 = math.sinh(r) ** 2
        if sh2 > nbar + 1e-12:
            raise ValueError(
                f"squeezing r={r:.6g} needs sinh^2 r = {sh2:.6g} photons, "
                f"more than the budget nbar = {nbar:.6g}"
            )
        cov = np.array([[max(0.0, nbar - sh2)]])
        return cls(nbar=float(nbar), r=float(r), input_cov=cov, kind="homodyne")


@dataclass(frozen=True, eq=False)
class RateRegion:
    """A rate triple together with the corner points of its pentagon."""

    point: RatePoint
    corners: tuple


def heterodyne_channel(p: ChannelParams, t: float) -> LinearGaussianChannel:
    """Two-output linear model for simultaneous readout of both quadratures.

    The signal blocks are the rotation-scalings of c1 and c2; the noise is
    the output Wigner covariance for coherent inputs plus one vacuum unit
    from the double-quadrature readout: (1/4)(e^{-gamma t} + psi + 1) per
    quadrature.
    """
    tc = transfer_coefficients(p, t)
    loss = math.exp(-p.gamma_damp * t)
    noise = 0.25 * (loss + tc.psi + 1.0) * np.eye(2)
    return LinearGaussianChannel(
        a1=_rotation_scaling(tc.c1), a2=_rotation_scaling(tc.c2), noise_cov=noise
    )


def homodyne_channel(
    p: ChannelParams, t: float, r1: float, r2: float
) -> LinearGaussianChannel:
    """Scalar linear model for readout of Re a1 with squeezed inputs.

    Signal coefficients are u1 (sender 1) and v1 (sender 2). The noise
    variance collects each input's rotated squeezing ellipse plus the
    accumulated thermal term:
    (1/4)(u1^2 e^{-2 r1} + u2^2 e^{2 r1}) + (1/4)(v1^2 e^{-2 r2} + v2^2 e^{2 r2}) + psi/4.
    """
    tc = transfer_coefficients(p, t)
    noise = _homodyne_noise_var(tc, r1, r2)
    return LinearGaussianChannel(
        a1=np.array([[tc.u1]]), a2=np.array([[tc.v1]]), noise_cov=np.array([[noise]])
    )


def _homodyne_noise_var(tc: TransferCoefficients, r1: float, r2: float) -> float:
    return (
        0.25 * (tc.u1**2 * math.exp(-2.0 * r1) + tc.u2**2 * math.exp(2.0 * r1))
        + 0.25 * (tc.v1**2 * math.exp(-2.0 * r2) + tc.v2**2 * math.exp(2.0 * r2))
        + 0.25 * tc.psi
    )


def heterodyne_rates(
    p: ChannelParams, t: float, nbar1: float, nbar2: float
) -> RatePoint:
    """Closed-form heterodyne rate triple.

    With beat = 1 - cos((lambda1 - lambda2) t) and the shared noise
    denominator D = (1/2)(e^{-gamma t} + psi + 1):

        sum rate  = ln(1 + [n1 e^{-gt} + 2 (n2 - n1) eps (1-eps) e^{-gt} beat] / D)
        sender 1  = ln(1 + n1 e^{-gt} (1 - 2 eps (1-eps) beat) / D)
        sender 2  = ln(1 + 2 n2 eps (1-eps) e^{-gt} beat / D)

    The sender-1/sender-2 numerators are n1 |c1|^2 and n2 |c2|^2, so the
    triple also follows from ``gaussian_mutual_info`` on the assembled
    heterodyne channel.
    """
    if nbar1 < 0 or nbar2 < 0:
        raise ValueError("mean photon numbers must be nonnegative")
    nm = normal_modes(p)
    tc = transfer_coefficients(p, t)
    loss = math.exp(-p.gamma_damp * t)
    beat = 1.0 - math.cos((nm.lambda1 - nm.lambda2) * t)
    mix = 2.0 * nm.epsilon * (1.0 - nm.epsilon) * beat
    denom = 0.5 * (loss + tc.psi + 1.0)
    num_sum = nbar1 * loss + (nbar2 - nbar1) * loss * mix
    num_1 = nbar1 * loss * (1.0 - mix)
    num_2 = nbar2 * loss * mix
    return RatePoint(
        r1_bound=max(0.0, math.log1p(max(0.0, num_1) / denom)),
        r2_bound=max(0.0, math.log1p(max(0.0, num_2) / denom)),
        sum_bound=max(0.0, math.log1p(max(0.0, num_sum) / denom)),
    )


def homodyne_two_user_rates(
    p: ChannelParams, t: float, spec1: SourceSpec, spec2: SourceSpec
) -> RatePoint:
    """Closed-form homodyne rate triple for two squeezed senders.

    With signal variances x = n1 - sinh^2 r1, y = n2 - sinh^2 r2 and the
    shared noise denominator D of ``homodyne_channel``:

        sender 1 = (1/2) ln(1 + x u1^2 / D)
        sender 2 = (1/2) ln(1 + y v1^2 / D)
        sum      = (1/2) ln(1 + (x u1^2 + y v1^2) / D)
    """
    if spec1.kind != "homodyne" or spec2.kind != "homodyne":
        raise ValueError("homodyne rates need homodyne source specs")
    tc = transfer_coefficients(p, t)
    denom = _homodyne_noise_var(tc, spec1.r, spec2.r)
    x = float(spec1.input_cov[0, 0])
    y = float(spec2.input_cov[0, 0])
    s1 = x * tc.u1**2
    s2 = y * tc.v1**2
    return RatePoint(
        r1_bound=max(0.0, 0.5 * math.log1p(s1 / denom)),
        r2_bound=max(0.0, 0.5 * math.log1p(s2 / denom)),
        sum_bound=max(0.0, 0.5 * math.log1p((s1 + s2) / denom)),
    )


def _require_decoupled(p: ChannelParams):
    if p.k != 0.0:
        raise ValueError("single-sender form requires k = 0 (decoupled modes)")


def homodyne_single_user_capacity(
    p: ChannelParams, t: float, nbar: float, r: float
) -> float:
    """Single-sender homodyne rate for a decoupled mode (k = 0).

    With lam = omega1 and C = (e^{gamma t} - 1)(2 nbar_T + 1):

        I = (1/2) ln(1 + cos^2(lam t)(nbar - sinh^2 r)
                         / ((1/4)[e^{-2r} + 2 sin^2(lam t) sinh(2r) + C]))

    The 1/4 scales the whole noise bracket: all three terms are quadrature
    variances in vacuum units (the rotated squeezing ellipse regrouped via
    cos^2 e^{-2r} + sin^2 e^{2r} = e^{-2r} + 2 sin^2 sinh(2r), plus the
    accumulated thermal term), which is what the assembled scalar channel
    produces.
    """
    _require_decoupled(p)
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    sh2 = math.sinh(r) ** 2
    if sh2 > nbar + 1e-12:
        raise ValueError(f"need nbar >= sinh^2 r, got nbar={nbar}, sinh^2 r={sh2:.6g}")
    lam = p.omega1
    c_therm = math.expm1(p.gamma_damp * t) * (
        2.0 * thermal_occupancy(lam, p.temperature) + 1.0
    )
    num = math.cos(lam * t) ** 2 * max(0.0, nbar - sh2)
    den = 0.25 * (
        math.exp(-2.0 * r)
        + 2.0 * math.sin(lam * t) ** 2 * math.sinh(2.0 * r)
        + c_therm
    )
    return max(0.0, 0.5 * math.log1p(num / den))


def squeezing_closed_form(p: ChannelParams, t: float, nbar: float) -> float:
    """Analytic candidate for the optimal squeezing parameter (k = 0).

    Solves e^{2r} = (sqrt(cos^4(lam t) + C^2 + 4 C (2 nbar + 1) cos^2(lam t))
    - cos^2(lam t)) / C with C = (e^{gamma t} - 1)(2 nbar_T + 1). As
    C -> 0 this tends to e^{2r} = 2(2 nbar + 1), which overshoots the true
    noiseless stationary point e^{2r} = 2 nbar + 1 by a factor of two; the
    numeric optimizer in ``optimal_squeezing`` is authoritative, this value
    is reported alongside for reference.
    """
    _require_decoupled(p)
    lam = p.omega1
    c_therm = math.expm1(p.gamma_damp * t) * (
        2.0 * thermal_occupancy(lam, p.temperature) + 1.0
    )
    cos2 = math.cos(lam * t) ** 2
    if c_therm < 1e-15:
        return 0.5 * math.log(2.0 * (2.0 * nbar + 1.0))
    e2r = (
        math.sqrt(cos2**2 + c_therm**2 + 4.0 * c_therm * (2.0 * nbar + 1.0) * cos2)
        - cos2
    ) / c_therm
    return 0.5 * math.log(e2r)


def _maximize_scalar(objective, hi: float) -> tuple[float, float]:
    """Maximize a smooth objective on [0, hi]; prefer 0 on a flat landscape."""
    at_zero = objective(0.0)
    if hi <= SQUEEZE_XATOL:
        return 0.0, at_zero
    res = minimize_scalar(
        lambda x: -objective(x),
        bounds=(0.0, hi),
        method="bounded",
        options={"xatol": SQUEEZE_XATOL},
    )
    best_x, best_val = float(res.x), float(-res.fun)
    if best_val <= at_zero + 1e-15:
        return 0.0, at_zero
    return best_x, best_val


class OptimalSqueezing(NamedTuple):
    """(r_star, capacity) plus the closed-form reference value."""

    r_star: float
    capacity: float
    r_closed_form: float


def optimal_squeezing(p: ChannelParams, t: float, nbar: float) -> OptimalSqueezing:
    """Numerically optimal squeezing for the single-sender homodyne rate.

    Bracketed derivative-free search over r in [0, asinh(sqrt(nbar))] to
    parameter tolerance 1e-8; the analytic candidate from
    ``squeezing_closed_form`` is reported alongside (they disagree at small
    t, see that docstring).
    """
    _require_decoupled(p)
    if nbar <= 0:
        raise ValueError(f"need a positive photon budget, got nbar={nbar}")
    r_max = math.asinh(math.sqrt(nbar))
    r_star, cap = _maximize_scalar(
        lambda r: homodyne_single_user_capacity(p, t, nbar, r), r_max
    )
    return OptimalSqueezing(r_star, cap, squeezing_closed_form(p, t, nbar))


@dataclass(frozen=True)
class TwoUserSqueezing:
    """Optimized squeezing pair and the rates achieved there."""

    r1_star: float
    r2_star: float
    rates: RatePoint


def optimize_two_user_squeezing(
    p: ChannelParams,
    t: float,
    nbar1: float,
    nbar2: float,
    tol: float = 1e-6,
    max_rounds: int = 60,
) -> TwoUserSqueezing:
    """Stagewise squeezing optimization for the two-sender homodyne channel.

    Sender 1 tunes r1 to maximize its own conditional rate I(a : out / b);
    sender 2 then tunes r2 to maximize the leftover sum-rate share
    I(a (x) b : out) - I(a : out / b). The two stages are iterated
    (coordinate search) until both parameters move less than ``tol``.
    Both optima collapse to zero once damping noise dominates (large t).
    """
    if nbar1 <= 0 or nbar2 <= 0:
        raise ValueError("both photon budgets must be positive")
    r1_max = math.asinh(math.sqrt(nbar1))
    r2_max = math.asinh(math.sqrt(nbar2))

    def rates_at(r1, r2):
        return homodyne_two_user_rates(
            p, t, SourceSpec.homodyne(nbar1, r1), SourceSpec.homodyne(nbar2, r2)
        )

    r1, r2 = 0.0, 0.0
    for _ in range(max_rounds):
        r1_new, _ = _maximize_scalar(lambda x: rates_at(x, r2).r1_bound, r1_max)
        r2_new, _ = _maximize_scalar(
            lambda x: (lambda pt: pt.sum_bound - pt.r1_bound)(rates_at(r1_new, x)),
            r2_max,
        )
        moved = max(abs(r1_new - r1), abs(r2_new - r2))
        r1, r2 = r1_new, r2_new
        if moved < tol:
            break
    return TwoUserSqueezing(r1_star=r1, r2_star=r2, rates=rates_at(r1, r2))


def capacity_region(point: RatePoint) -> RateRegion:
    """Corner list of the rate pentagon; collapses to a rectangle when the
    sum bound is slack (sum >= r1 + r2)."""
    r1, r2, s = point.r1_bound, point.r2_bound, point.sum_bound
    if s >= r1 + r2:
        raw = [(0.0, 0.0), (r1, 0.0), (r1, r2), (0.0, r2)]
    else:
        # the sum bound cannot fall below either single bound for tables
        # with independent inputs, but clip defensively
        r1c = min(r1, s)
        r2c = min(r2, s)
        raw = [
            (0.0, 0.0),
            (r1c, 0.0),
            (r1c, max(0.0, s - r1c)),
            (max(0.0, s - r2c), r2c),
            (0.0, r2c),
        ]
    corners = []
    for c in raw:
        if not corners or max(abs(c[0] - corners[-1][0]), abs(c[1] - corners[-1][1])) > 1e-15:
            corners.append(c)
    return RateRegion(point=point, corners=tuple(corners))
