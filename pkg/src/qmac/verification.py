"""Self-check battery: invariants, oracle cross-checks and regressions.

Every check returns a ``CheckResult`` so the CLI can print one line per
check and exit nonzero on any failure. The two-path equivalence grid
(closed-form rate formulas against the assembled linear-Gaussian model)
lives here because both the CLI and the test suite iterate it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import access_bounds, gaussian_mac, mode_dynamics, oracles
from .access_bounds import RatePoint
from .quantum_core import apply_channel, measurement_as_channel, relative_entropy

# Two-path agreement: relative tolerance with a small absolute floor for
# rates that vanish identically.
TWO_PATH_RTOL = 1e-9
TWO_PATH_ATOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _agree(a: float, b: float) -> bool:
    return abs(a - b) <= TWO_PATH_ATOL + TWO_PATH_RTOL * max(abs(a), abs(b))


# ---------------------------------------------------------------------------
# Two-path equivalence grid.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridPoint:
    """One parameter combination plus the rates from both code paths."""

    kind: str  # "heterodyne" or "homodyne"
    params: mode_dynamics.ChannelParams
    t: float
    nbar1: float
    nbar2: float
    r1: float
    r2: float
    transcribed: RatePoint
    assembled: RatePoint


def _assembled_rates(channel, cov1, cov2) -> RatePoint:
    return RatePoint(
        r1_bound=gaussian_mac.gaussian_mutual_info(
            channel, cov1, cov2, "source1_conditional"
        ),
        r2_bound=gaussian_mac.gaussian_mutual_info(
            channel, cov1, cov2, "source2_conditional"
        ),
        sum_bound=gaussian_mac.gaussian_mutual_info(channel, cov1, cov2, "sum"),
    )


def standard_equivalence_grid() -> list:
    """>= 200 parameter combinations spanning (t, k, gamma, T, nbar, r)."""
    omega_pairs = ((1.0, 1.0), (2.0, 1.3))
    ks = (0.0, 0.3, 0.8)
    gammas = (0.0, 0.05, 0.5)
    temperatures = (0.0, 0.8)
    times = (0.0, 0.4, 1.7, 4.2)
    het_nbars = ((1.0, 2.5),)
    hom_settings = ((1.5, 0.0, 2.0, 0.0), (1.5, 0.5, 2.0, 0.3))

    points = []
    for (w1, w2) in omega_pairs:
        for k in ks:
            for gamma in gammas:
                for temp in temperatures:
                    params = mode_dynamics.ChannelParams(w1, w2, k, gamma, temp)
                    for t in times:
                        for (n1, n2) in het_nbars:
                            het = gaussian_mac.heterodyne_channel(params, t)
                            points.append(
                                GridPoint(
                                    kind="heterodyne",
                                    params=params,
                                    t=t,
                                    nbar1=n1,
                                    nbar2=n2,
                                    r1=0.0,
                                    r2=0.0,
                                    transcribed=gaussian_mac.heterodyne_rates(
                                        params, t, n1, n2
                                    ),
                                    assembled=_assembled_rates(
                                        het,
                                        gaussian_mac.SourceSpec.heterodyne(n1).input_cov,
                                        gaussian_mac.SourceSpec.heterodyne(n2).input_cov,
                                    ),
                                )
                            )
                        for (n1, r1, n2, r2) in hom_settings:
                            spec1 = gaussian_mac.SourceSpec.homodyne(n1, r1)
                            spec2 = gaussian_mac.SourceSpec.homodyne(n2, r2)
                            hom = gaussian_mac.homodyne_channel(params, t, r1, r2)
                            points.append(
                                GridPoint(
                                    kind="homodyne",
                                    params=params,
                                    t=t,
                                    nbar1=n1,
                                    nbar2=n2,
                                    r1=r1,
                                    r2=r2,
                                    transcribed=gaussian_mac.homodyne_two_user_rates(
                                        params, t, spec1, spec2
                                    ),
                                    assembled=_assembled_rates(
                                        hom, spec1.input_cov, spec2.input_cov
                                    ),
                                )
                            )
    return points


def two_path_mismatches(points) -> list:
    """Human-readable description of every disagreeing component."""
    bad = []
    for pt in points:
        for term in ("r1_bound", "r2_bound", "sum_bound"):
            a = getattr(pt.transcribed, term)
            b = getattr(pt.assembled, term)
            if not _agree(a, b):
                bad.append(
                    f"{pt.kind} {term}: transcribed {a:.15g} vs assembled {b:.15g} "
                    f"(params {pt.params}, t={pt.t}, nbar=({pt.nbar1},{pt.nbar2}), "
                    f"r=({pt.r1},{pt.r2}))"
                )
        if pt.kind == "homodyne" and pt.params.k == 0.0:
            single = gaussian_mac.homodyne_single_user_capacity(
                pt.params, pt.t, pt.nbar1, pt.r1
            )
            if not _agree(single, pt.assembled.r1_bound):
                bad.append(
                    f"single-sender homodyne: {single:.15g} vs assembled "
                    f"{pt.assembled.r1_bound:.15g} (params {pt.params}, t={pt.t})"
                )
    return bad


def check_two_path(points=None) -> CheckResult:
    points = standard_equivalence_grid() if points is None else points
    bad = two_path_mismatches(points)
    detail = f"{len(points)} grid points"
    if bad:
        detail += "; first mismatch: " + bad[0]
    return CheckResult("two-path rate equivalence", not bad, detail)


# ---------------------------------------------------------------------------
# Quantum-core invariants.
# ---------------------------------------------------------------------------


def check_channel_invariants(seed, n_instances: int) -> CheckResult:
    rng = oracles.make_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        dim = int(rng.integers(2, 4))
        ch = oracles.random_kraus_channel(dim, int(rng.integers(1, 4)), rng)
        rho = oracles.random_density_matrix(dim, rng)
        try:
            out = apply_channel(ch, rho)
        except ValueError as exc:
            return CheckResult("channel output validity", False, str(exc))
        worst = max(worst, abs(np.trace(out.entries).real - 1.0))
    return CheckResult(
        "channel output validity",
        True,
        f"{n_instances} random channels, max trace deviation {worst:.2e}",
    )


def check_lindblad(seed, n_instances: int, tol: float = 1e-9) -> CheckResult:
    """Relative entropy never grows under channels or measurement maps."""
    rng = oracles.make_rng(seed)
    worst = -math.inf
    for _ in range(n_instances):
        dim = int(rng.integers(2, 4))
        rho1 = oracles.random_density_matrix(dim, rng, rank=dim)
        rho2 = oracles.random_density_matrix(dim, rng, rank=dim)
        before = relative_entropy(rho1, rho2)

        ch = oracles.random_kraus_channel(dim, int(rng.integers(1, 4)), rng)
        after = relative_entropy(
            apply_channel(ch, rho1), apply_channel(ch, rho2)
        )
        worst = max(worst, after - before)

        povm = oracles.random_povm(dim, int(rng.integers(2, 5)), rng)
        mapped = relative_entropy(
            measurement_as_channel(povm, rho1), measurement_as_channel(povm, rho2)
        )
        worst = max(worst, mapped - before)
        if worst > tol:
            return CheckResult(
                "relative-entropy monotonicity",
                False,
                f"violation {worst:.3e} exceeds tol {tol:.1e}",
            )
    return CheckResult(
        "relative-entropy monotonicity",
        True,
        f"{n_instances} random pairs (channels and measurement maps), "
        f"worst slack {worst:.2e}",
    )


def random_table(rng, n_a=2, n_b=2, n_out=3) -> access_bounds.JointChannelTable:
    p = rng.dirichlet(np.ones(n_out), size=(n_a, n_b))
    return access_bounds.JointChannelTable(
        p, rng.dirichlet(np.ones(n_a)), rng.dirichlet(np.ones(n_b))
    )


def region_inequality_slack(point: RatePoint) -> float:
    """r1 + r2 - sum; nonnegative for independent senders."""
    return point.r1_bound + point.r2_bound - point.sum_bound


def check_region_inequality(seed, n_tables: int, tol: float = 1e-9) -> CheckResult:
    rng = oracles.make_rng(seed)
    worst = math.inf
    for _ in range(n_tables):
        shape = (int(rng.integers(2, 4)), int(rng.integers(2, 4)), int(rng.integers(2, 5)))
        point = access_bounds.rate_region(random_table(rng, *shape))
        worst = min(worst, region_inequality_slack(point))
        if worst < -tol:
            return CheckResult(
                "region inequality", False, f"slack {worst:.3e} below -tol"
            )
    return CheckResult(
        "region inequality",
        True,
        f"{n_tables} random tables, min slack {worst:.2e}",
    )


def check_coarsening(seed, n_tables: int, tol: float = 1e-9) -> CheckResult:
    """Pooling two outcomes never increases any region quantity."""
    rng = oracles.make_rng(seed)
    for _ in range(n_tables):
        t = random_table(rng, 2, 2, int(rng.integers(3, 5)))
        before = access_bounds.rate_region(t)
        i, j = rng.choice(t.n_outcomes, size=2, replace=False)
        after = access_bounds.rate_region(access_bounds.merge_outcomes(t, int(i), int(j)))
        for name in ("r1_bound", "r2_bound", "sum_bound"):
            if getattr(after, name) > getattr(before, name) + tol:
                return CheckResult(
                    "outcome-merging monotonicity",
                    False,
                    f"{name} grew under coarsening",
                )
    return CheckResult(
        "outcome-merging monotonicity", True, f"{n_tables} random tables"
    )


# ---------------------------------------------------------------------------
# Oracle cross-checks.
# ---------------------------------------------------------------------------


def check_mc_mi(seed, n_points: int, n_samples: int = 100_000) -> CheckResult:
    """Monte-Carlo estimate within 3 standard errors of the closed form."""
    rng = oracles.make_rng(seed)
    cases = []
    for i in range(n_points):
        w1, w2 = 1.0 + 0.5 * float(rng.random()), 1.0
        k = float(rng.uniform(0.0, 0.7))
        gamma = float(rng.uniform(0.0, 0.4))
        temp = float(rng.uniform(0.0, 1.0))
        t = float(rng.uniform(0.0, 2.5))
        n1, n2 = float(rng.uniform(0.3, 3.0)), float(rng.uniform(0.3, 3.0))
        params = mode_dynamics.ChannelParams(w1, w2, k, gamma, temp)
        cases.append((params, t, n1, n2, int(rng.integers(0, 2**31))))
    for params, t, n1, n2, sub_seed in cases:
        ch = gaussian_mac.heterodyne_channel(params, t)
        cov1 = gaussian_mac.SourceSpec.heterodyne(n1).input_cov
        cov2 = gaussian_mac.SourceSpec.heterodyne(n2).input_cov
        exact = gaussian_mac.gaussian_mutual_info(ch, cov1, cov2, "sum")
        est, err = oracles.mc_gaussian_mi(ch, cov1, cov2, n_samples, sub_seed)
        if abs(est - exact) > 3.0 * err:
            return CheckResult(
                "Monte-Carlo mutual information",
                False,
                f"estimate {est:.6f} vs exact {exact:.6f} beyond 3*stderr {err:.2e}",
            )
    return CheckResult(
        "Monte-Carlo mutual information",
        True,
        f"{n_points} heterodyne instances at {n_samples} samples, all within 3 sigma",
    )


def check_langevin(seed, n_points: int, n_traj: int = 20_000) -> CheckResult:
    """Trajectory estimates of |c1|^2, |c2|^2, psi within 3 sigma."""
    rng = oracles.make_rng(seed)
    for i in range(n_points):
        params = mode_dynamics.ChannelParams(
            omega1=1.0 + float(rng.random()),
            omega2=1.0,
            k=float(rng.uniform(0.1, 0.7)),
            gamma_damp=float(rng.uniform(0.1, 0.6)),
            temperature=float(rng.uniform(0.2, 1.2)),
        )
        t = float(rng.uniform(0.5, 2.0))
        tc = mode_dynamics.transfer_coefficients(params, t)
        est = oracles.simulate_langevin(params, t, n_traj, int(rng.integers(0, 2**31)))
        checks = (
            (est.c1_sq, abs(tc.c1) ** 2, est.c1_sq_err, "|c1|^2"),
            (est.c2_sq, abs(tc.c2) ** 2, est.c2_sq_err, "|c2|^2"),
            (est.psi, tc.psi, est.psi_err, "psi"),
        )
        for got, want, err, label in checks:
            if abs(got - want) > 3.0 * max(err, 1e-12):
                return CheckResult(
                    "Langevin trajectory oracle",
                    False,
                    f"{label}: {got:.6f} vs {want:.6f} beyond 3 sigma ({err:.2e})",
                )
    return CheckResult(
        "Langevin trajectory oracle",
        True,
        f"{n_points} parameter points at {n_traj} trajectories, all within 3 sigma",
    )


def random_two_qubit_instance(rng):
    """Random ensembles on each qubit plus a random channel on the pair."""
    ens1 = oracles.random_ensemble(2, int(rng.integers(2, 4)), rng)
    ens2 = oracles.random_ensemble(2, int(rng.integers(2, 4)), rng)
    ch = oracles.random_kraus_channel(4, int(rng.integers(1, 4)), rng)
    return ens1, ens2, ch


def check_bound_dominance(
    seed,
    n_instances: int,
    n_outcomes: int = 4,
    n_restarts: int = 1,
    maxiter: int = 40,
    tol: float = 1e-6,
) -> CheckResult:
    """Searched POVM rates never exceed the entropic upper bounds."""
    rng = oracles.make_rng(seed)
    min_slack = math.inf
    for _ in range(n_instances):
        ens1, ens2, ch = random_two_qubit_instance(rng)
        bound1 = access_bounds.holevo_conditional_bound(ens1, ens2, ch, source=1)
        bound2 = access_bounds.holevo_conditional_bound(ens1, ens2, ch, source=2)
        bound_sum = access_bounds.holevo_sum_bound(ens1, ens2, ch)
        found = oracles.brute_force_accessible_info(
            ens1,
            ens2,
            ch,
            n_outcomes=n_outcomes,
            n_restarts=n_restarts,
            seed=int(rng.integers(0, 2**31)),
            maxiter=maxiter,
        ).best
        slacks = (
            bound1 - found.r1_bound,
            bound2 - found.r2_bound,
            bound_sum - found.sum_bound,
        )
        min_slack = min(min_slack, *slacks)
        if min_slack < -tol:
            return CheckResult(
                "entropic bound dominance",
                False,
                f"search exceeded a bound by {-min_slack:.3e}",
            )
    return CheckResult(
        "entropic bound dominance",
        True,
        f"{n_instances} random two-qubit instances, min slack {min_slack:.3e}",
    )


def check_fixture(path) -> CheckResult:
    """Regression: a stored table must reproduce its stored rate triple."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
        table = access_bounds.table_from_json(doc["table"])
        expected = doc["expected"]
        tol = float(doc.get("tol", 1e-9))
    except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
        return CheckResult("fixture regression", False, f"unreadable fixture: {exc}")
    point = access_bounds.rate_region(table)
    for name in ("r1_bound", "r2_bound", "sum_bound"):
        got = getattr(point, name)
        want = float(expected[name])
        if abs(got - want) > tol:
            return CheckResult(
                "fixture regression",
                False,
                f"{name}: recomputed {got:.12g} vs stored {want:.12g}",
            )
    return CheckResult("fixture regression", True, f"table matches stored rates ({path})")


def run_verification(seed=20240801, level: str = "quick", fixture=None) -> list:
    """Run the whole battery; ``level`` scales instance counts."""
    if level not in ("quick", "full"):
        raise ValueError(f"level must be 'quick' or 'full', got {level!r}")
    full = level == "full"
    results = [
        check_channel_invariants(seed, 60 if full else 20),
        check_lindblad(seed + 1, 120 if full else 40),
        check_region_inequality(seed + 2, 200 if full else 60),
        check_coarsening(seed + 3, 60 if full else 20),
        check_two_path(),
        check_mc_mi(seed + 4, 3 if full else 1),
        check_langevin(seed + 5, 3 if full else 1, n_traj=20_000 if full else 8_000),
        check_bound_dominance(seed + 6, 10 if full else 3),
    ]
    if fixture is not None:
        results.append(check_fixture(fixture))
    return results
