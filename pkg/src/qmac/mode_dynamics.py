"""Closed-form dynamics of two linearly coupled, equally damped field modes.

Two modes with frequencies ``omega1``, ``omega2`` exchange excitations
through a cross coupling ``k`` while both decay at the same rate ``gamma``
into a thermal bath at temperature ``T`` (units with hbar = k_B = 1). The
evolution of the annihilation operators is linear, so it is fixed by the
normal frequencies

    lambda_{1,2} = (omega1 + omega2 +- sqrt((omega1 - omega2)^2 + 4 k^2)) / 2

and a mixing ratio ``eps`` obeying (1 - eps)/eps = (lambda1 - omega1)^2/k^2.
Mode 1 at time t reads

    a1(t) = c1(t) a1(0) + c2(t) a2(0) + accumulated noise,
    c1 = e^{-gamma t/2} (eps e^{-i lambda1 t} + (1 - eps) e^{-i lambda2 t}),
    c2 = -e^{-gamma t/2} sqrt(eps (1 - eps)) (e^{-i lambda1 t} - e^{-i lambda2 t}).

Quadratures are x = Re a, p = Im a with vacuum variance 1/4 each, so the
accumulated thermal-plus-vacuum noise contributes an isotropic Wigner
variance psi/4 per quadrature, where

    psi = (1 - e^{-gamma t}) (2 eps nbar(lambda1) + 2 (1 - eps) nbar(lambda2) + 1).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

# Covariance / identity checks (double precision on 2x2 blocks).
COV_TOL = 1e-9
# Minimum Wigner determinant for a physical single-mode covariance.
MIN_WIGNER_DET = 1.0 / 16.0


@dataclass(frozen=True)
class ChannelParams:
    """Physical parameters of the coupled-mode channel.

    Frequencies and coupling are angular (rad/time), ``gamma_damp`` is the
    shared energy damping rate (1/time) and ``temperature`` is in energy
    units (k_B = 1). Both normal frequencies must stay positive, which
    restricts the coupling to k^2 < omega1 * omega2.
    """

    omega1: float
    omega2: float
    k: float
    gamma_damp: float
    temperature: float

    def __post_init__(self):
        for name in ("omega1", "omega2", "k", "gamma_damp", "temperature"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if self.omega1 <= 0 or self.omega2 <= 0:
            raise ValueError("mode frequencies must be positive")
        if self.gamma_damp < 0:
            raise ValueError(f"damping must be nonnegative, got {self.gamma_damp}")
        if self.temperature < 0:
            raise ValueError(f"temperature must be nonnegative, got {self.temperature}")
        lam2 = 0.5 * (
            self.omega1
            + self.omega2
            - math.hypot(self.omega1 - self.omega2, 2.0 * self.k)
        )
        if lam2 <= 0:
            raise ValueError(
                f"lower normal frequency {lam2:.6g} is not positive; "
                "thermal occupancy undefined (need k^2 < omega1*omega2)"
            )


def channel_params_from_dict(d: dict) -> ChannelParams:
    """Build parameters from a config mapping (keys omega1, omega2, k, gamma, temperature)."""
    try:
        return ChannelParams(
            omega1=float(d["omega1"]),
            omega2=float(d["omega2"]),
            k=float(d.get("k", 0.0)),
            gamma_damp=float(d.get("gamma", d.get("gamma_damp", 0.0))),
            temperature=float(d.get("temperature", 0.0)),
        )
    except KeyError as exc:
        raise ValueError(f"channel params config missing key {exc}") from exc


def thermal_occupancy(frequency: float, temperature: float) -> float:
    """Bose-Einstein occupancy 1/(e^{freq/T} - 1); zero at T = 0."""
    if frequency <= 0:
        raise ValueError(f"occupancy needs a positive frequency, got {frequency}")
    if temperature <= 0.0:
        return 0.0
    ratio = frequency / temperature
    if ratio > 700.0:  # e^{ratio} overflows double precision
        return 0.0
    return 1.0 / math.expm1(ratio)


@dataclass(frozen=True)
class NormalModeData:
    """Normal frequencies, mixing ratio and bath occupancies of the pair."""

    lambda1: float
    lambda2: float
    epsilon: float
    nbar1: float
    nbar2: float


def normal_modes(p: ChannelParams) -> NormalModeData:
    """Diagonalize the coupled pair.

    ``lambda1`` always takes the + branch (so lambda1 >= lambda2) and the
    mixing ratio follows (1 - eps)/eps = (lambda1 - omega1)^2 / k^2. At
    k = 0 that expression is 0/0; the continuous limit is eps = 1 when
    omega1 >= omega2 (mode 1 owns the upper branch) and eps = 0 otherwise.
    """
    split = math.hypot(p.omega1 - p.omega2, 2.0 * p.k)
    lam1 = 0.5 * (p.omega1 + p.omega2 + split)
    lam2 = 0.5 * (p.omega1 + p.omega2 - split)
    if p.k == 0.0:
        eps = 1.0 if p.omega1 >= p.omega2 else 0.0
    else:
        detune = lam1 - p.omega1
        eps = p.k**2 / (p.k**2 + detune**2)
    return NormalModeData(
        lambda1=lam1,
        lambda2=lam2,
        epsilon=eps,
        nbar1=thermal_occupancy(lam1, p.temperature),
        nbar2=thermal_occupancy(lam2, p.temperature),
    )


@dataclass(frozen=True)
class TransferCoefficients:
    """Amplitude transfer into mode 1 after time t, plus accumulated noise.

    ``c1``/``c2`` are the complex transfer factors from modes 1 and 2;
    u1 = Re c1, u2 = Im c1, v1 = Re c2, v2 = Im c2 are the quadrature
    blocks. ``psi`` is dimensionless: the added Wigner noise is psi/4 per
    quadrature. Passivity fixes |c1|^2 + |c2|^2 = e^{-gamma t}.
    """

    u1: float
    u2: float
    v1: float
    v2: float
    c1: complex
    c2: complex
    psi: float
    t: float


def transfer_coefficients(p: ChannelParams, t: float) -> TransferCoefficients:
    """Evaluate c1(t), c2(t) and the accumulated noise weight psi(t)."""
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    nm = normal_modes(p)
    decay = math.exp(-0.5 * p.gamma_damp * t)
    e1 = cmath.exp(-1j * nm.lambda1 * t)
    e2 = cmath.exp(-1j * nm.lambda2 * t)
    c1 = decay * (nm.epsilon * e1 + (1.0 - nm.epsilon) * e2)
    c2 = -decay * math.sqrt(nm.epsilon * (1.0 - nm.epsilon)) * (e1 - e2)
    psi = (-math.expm1(-p.gamma_damp * t)) * (
        2.0 * nm.epsilon * nm.nbar1 + 2.0 * (1.0 - nm.epsilon) * nm.nbar2 + 1.0
    )
    return TransferCoefficients(
        u1=c1.real, u2=c1.imag, v1=c2.real, v2=c2.imag, c1=c1, c2=c2, psi=psi, t=t
    )


@dataclass(frozen=True)
class GaussianModeState:
    """Gaussian state of one mode: quadrature means and Wigner covariance.

    Covariance entries follow c11 = Var(Re a), c22 = Var(Im a),
    c12 = Cov(Re a, Im a); physicality requires det >= 1/16.
    """

    mean_re: float
    mean_im: float
    c11: float
    c22: float
    c12: float

    def __post_init__(self):
        det = self.c11 * self.c22 - self.c12**2
        if self.c11 <= 0 or self.c22 <= 0 or det <= 0:
            raise ValueError(
                f"covariance not positive definite (c11={self.c11:.6g}, "
                f"c22={self.c22:.6g}, det={det:.6g})"
            )
        if det < MIN_WIGNER_DET - COV_TOL:
            raise ValueError(
                f"covariance determinant {det:.6g} below the uncertainty bound 1/16"
            )

    def covariance(self) -> np.ndarray:
        return np.array([[self.c11, self.c12], [self.c12, self.c22]])

    def mean(self) -> np.ndarray:
        return np.array([self.mean_re, self.mean_im])


def vacuum_state() -> GaussianModeState:
    return GaussianModeState(0.0, 0.0, 0.25, 0.25, 0.0)


def coherent_state(mean_re: float = 0.0, mean_im: float = 0.0) -> GaussianModeState:
    """Displaced vacuum: isotropic covariance 1/4 per quadrature."""
    return GaussianModeState(mean_re, mean_im, 0.25, 0.25, 0.0)


def squeezed_state(
    r: float, mean_re: float = 0.0, mean_im: float = 0.0
) -> GaussianModeState:
    """Quadrature-squeezed state: Var(Re a) = e^{-2r}/4, Var(Im a) = e^{2r}/4."""
    return GaussianModeState(
        mean_re, mean_im, 0.25 * math.exp(-2.0 * r), 0.25 * math.exp(2.0 * r), 0.0
    )


def _rotation_scaling(c: complex) -> np.ndarray:
    # multiplication by a complex number acting on (Re, Im) pairs
    return np.array([[c.real, -c.imag], [c.imag, c.real]])


def output_mode_state(
    p: ChannelParams, t: float, in1: GaussianModeState, in2: GaussianModeState
) -> GaussianModeState:
    """State of mode 1 after time t for Gaussian inputs on both modes.

    Means map linearly through the (u, v) blocks; covariances transform by
    congruence and pick up the isotropic noise psi/4 per quadrature. With
    both inputs in vacuum at T = 0 the output stays exactly at vacuum for
    every t (loss-channel fixed point).
    """
    tc = transfer_coefficients(p, t)
    m1 = _rotation_scaling(tc.c1)
    m2 = _rotation_scaling(tc.c2)
    mean = m1 @ in1.mean() + m2 @ in2.mean()
    cov = (
        m1 @ in1.covariance() @ m1.T
        + m2 @ in2.covariance() @ m2.T
        + 0.25 * tc.psi * np.eye(2)
    )
    return GaussianModeState(
        mean_re=float(mean[0]),
        mean_im=float(mean[1]),
        c11=float(cov[0, 0]),
        c22=float(cov[1, 1]),
        c12=float(cov[0, 1]),
    )
