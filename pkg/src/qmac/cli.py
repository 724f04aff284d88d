"""Batch front end: parameter sweeps, region polygons, bound reports, self-checks.

Subcommands::

    qmac heterodyne-sweep --config cfg.toml [--out PREFIX] [--jobs N] [--bits]
    qmac homodyne-sweep   --config cfg.toml [--out PREFIX] [--jobs N] [--bits]
    qmac region           --config cfg.json [--out PREFIX] [--bits]
    qmac holevo           --config cfg.json [--out PREFIX] [--seed S] [--bits]
    qmac verify           [--seed S] [--level quick|full] [--config fixture.json]

Configs are TOML or JSON, picked by extension. Sweeps emit PREFIX.csv and
PREFIX.json with one row per grid point, values printed to 12 significant
digits, in nats unless --bits is given. Exit codes: 0 success, 1 config or
validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import access_bounds, gaussian_mac, oracles, quantum_core, verification
from .mode_dynamics import channel_params_from_dict, transfer_coefficients

INFO_COLUMNS = ("i_sum", "i_1_given_2", "i_2_given_1")


class ConfigError(Exception):
    """Bad or missing configuration; maps to exit code 1."""


def _load_config(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config not found: {path}")
    if p.suffix == ".json":
        try:
            return json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from exc
    if p.suffix == ".toml":
        try:
            with open(p, "rb") as fh:
                return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: invalid TOML: {exc}") from exc
    raise ConfigError(f"{path}: unsupported config extension {p.suffix!r} (use .json or .toml)")


def _grid_values(spec, what: str) -> list:
    if isinstance(spec, dict):
        for key in ("start", "stop", "num"):
            if key not in spec:
                raise ConfigError(f"{what}: grid spec needs '{key}'")
        num = int(spec["num"])
        if num < 1:
            raise ConfigError(f"{what}: empty sweep")
        spacing = spec.get("spacing", "linear")
        if spacing == "linear":
            vals = np.linspace(float(spec["start"]), float(spec["stop"]), num)
        elif spacing == "log":
            vals = np.geomspace(float(spec["start"]), float(spec["stop"]), num)
        else:
            raise ConfigError(f"{what}: spacing must be 'linear' or 'log'")
        return [float(v) for v in vals]
    if isinstance(spec, (list, tuple)):
        if len(spec) == 0:
            raise ConfigError(f"{what}: empty sweep")
        return [float(v) for v in spec]
    if isinstance(spec, (int, float)):
        return [float(spec)]
    raise ConfigError(f"{what}: expected a number, a list or a start/stop/num table")


def _require(cfg: dict, key: str, where: str):
    if key not in cfg:
        raise ConfigError(f"{where}: missing required key '{key}'")
    return cfg[key]


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _out_prefix(args, default_stem: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(f"{Path(args.config).stem}_{default_stem}")


def _write_rows(prefix: Path, columns, rows, meta, bits: bool):
    """CSV plus a JSON mirror; information columns converted if bits=True."""
    factor = 1.0 / math.log(2.0) if bits else 1.0
    converted = [
        {
            col: (row[col] * factor if col in INFO_COLUMNS else row[col])
            for col in columns
        }
        for row in rows
    ]
    meta = dict(meta, units="bits" if bits else "nats")
    csv_path = prefix.with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in converted:
            writer.writerow([_fmt(row[col]) for col in columns])
    json_path = prefix.with_suffix(".json")
    with open(json_path, "w") as fh:
        json.dump({"meta": meta, "rows": converted}, fh, indent=2)
    print(f"wrote {csv_path} and {json_path}")


def _sweep_points(cfg: dict, where: str) -> list:
    t_grid = _grid_values(_require(cfg, "t_grid", where), f"{where}.t_grid")
    if "temperature_grid" in cfg:
        temp_grid = _grid_values(cfg["temperature_grid"], f"{where}.temperature_grid")
    else:
        temp_grid = [float(_require(cfg, "params", where).get("temperature", 0.0))]
    return [(t, temp) for temp in temp_grid for t in t_grid]


def _run_jobs(fn, jobs, n_workers: int) -> list:
    if n_workers <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        chunk = max(1, len(jobs) // (4 * n_workers))
        return list(pool.map(fn, jobs, chunksize=chunk))


def _heterodyne_row(job) -> dict:
    params_dict, t, temp, nbar1, nbar2 = job
    params = channel_params_from_dict({**params_dict, "temperature": temp})
    point = gaussian_mac.heterodyne_rates(params, t, nbar1, nbar2)
    psi = transfer_coefficients(params, t).psi
    return {
        "t": t,
        "temperature": temp,
        "i_sum": point.sum_bound,
        "i_1_given_2": point.r1_bound,
        "i_2_given_1": point.r2_bound,
        "psi": psi,
    }


def cmd_heterodyne_sweep(args) -> int:
    cfg = _load_config(args.config)
    params_dict = dict(_require(cfg, "params", "heterodyne sweep"))
    nbar1 = float(_require(cfg, "nbar1", "heterodyne sweep"))
    nbar2 = float(_require(cfg, "nbar2", "heterodyne sweep"))
    if nbar1 < 0 or nbar2 < 0:
        raise ConfigError("mean photon numbers must be nonnegative")
    channel_params_from_dict(params_dict)  # validate before dispatch
    points = _sweep_points(cfg, "heterodyne sweep")

    jobs = [(params_dict, t, temp, nbar1, nbar2) for (t, temp) in points]
    rows = _run_jobs(_heterodyne_row, jobs, args.jobs)

    sums = [row["i_sum"] for row in rows]
    monotone = all(b <= a + 1e-12 for a, b in zip(sums, sums[1:]))
    meta = {
        "command": "heterodyne-sweep",
        "params": params_dict,
        "nbar1": nbar1,
        "nbar2": nbar2,
        "sum_rate_monotone_nonincreasing": monotone,
    }
    columns = ("t", "temperature", "i_sum", "i_1_given_2", "i_2_given_1", "psi")
    _write_rows(_out_prefix(args, "heterodyne"), columns, rows, meta, args.bits)
    return 0


def _homodyne_row(job) -> dict:
    params_dict, t, temp, nbar1, nbar2, r1, r2, optimize = job
    params = channel_params_from_dict({**params_dict, "temperature": temp})
    if optimize:
        result = gaussian_mac.optimize_two_user_squeezing(params, t, nbar1, nbar2)
        r1, r2, point = result.r1_star, result.r2_star, result.rates
    else:
        point = gaussian_mac.homodyne_two_user_rates(
            params,
            t,
            gaussian_mac.SourceSpec.homodyne(nbar1, r1),
            gaussian_mac.SourceSpec.homodyne(nbar2, r2),
        )
    psi = transfer_coefficients(params, t).psi
    return {
        "t": t,
        "temperature": temp,
        "r1": r1,
        "r2": r2,
        "i_sum": point.sum_bound,
        "i_1_given_2": point.r1_bound,
        "i_2_given_1": point.r2_bound,
        "psi": psi,
    }


def cmd_homodyne_sweep(args) -> int:
    cfg = _load_config(args.config)
    params_dict = dict(_require(cfg, "params", "homodyne sweep"))
    nbar1 = float(_require(cfg, "nbar1", "homodyne sweep"))
    nbar2 = float(_require(cfg, "nbar2", "homodyne sweep"))
    r1 = float(cfg.get("r1", 0.0))
    r2 = float(cfg.get("r2", 0.0))
    optimize = bool(cfg.get("optimize", False))
    channel_params_from_dict(params_dict)
    if not optimize:
        try:
            gaussian_mac.SourceSpec.homodyne(nbar1, r1)
            gaussian_mac.SourceSpec.homodyne(nbar2, r2)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    elif nbar1 <= 0 or nbar2 <= 0:
        raise ConfigError("optimization needs positive photon budgets")
    points = _sweep_points(cfg, "homodyne sweep")

    jobs = [
        (params_dict, t, temp, nbar1, nbar2, r1, r2, optimize) for (t, temp) in points
    ]
    rows = _run_jobs(_homodyne_row, jobs, args.jobs)
    meta = {
        "command": "homodyne-sweep",
        "params": params_dict,
        "nbar1": nbar1,
        "nbar2": nbar2,
        "optimize": optimize,
    }
    columns = (
        "t",
        "temperature",
        "r1",
        "r2",
        "i_sum",
        "i_1_given_2",
        "i_2_given_1",
        "psi",
    )
    _write_rows(_out_prefix(args, "homodyne"), columns, rows, meta, args.bits)
    return 0


def _region_point(cfg: dict) -> access_bounds.RatePoint:
    if "rate_point" in cfg:
        rp = cfg["rate_point"]
        try:
            return access_bounds.RatePoint(
                float(_require(rp, "r1_bound", "rate_point")),
                float(_require(rp, "r2_bound", "rate_point")),
                float(_require(rp, "sum_bound", "rate_point")),
            )
        except ValueError as exc:
            raise ConfigError(f"rate_point: {exc}") from exc
    if "heterodyne" in cfg:
        sub = cfg["heterodyne"]
        params = channel_params_from_dict(dict(_require(sub, "params", "heterodyne")))
        return gaussian_mac.heterodyne_rates(
            params,
            float(_require(sub, "t", "heterodyne")),
            float(_require(sub, "nbar1", "heterodyne")),
            float(_require(sub, "nbar2", "heterodyne")),
        )
    if "homodyne" in cfg:
        sub = cfg["homodyne"]
        params = channel_params_from_dict(dict(_require(sub, "params", "homodyne")))
        try:
            spec1 = gaussian_mac.SourceSpec.homodyne(
                float(_require(sub, "nbar1", "homodyne")), float(sub.get("r1", 0.0))
            )
            spec2 = gaussian_mac.SourceSpec.homodyne(
                float(_require(sub, "nbar2", "homodyne")), float(sub.get("r2", 0.0))
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return gaussian_mac.homodyne_two_user_rates(
            params, float(_require(sub, "t", "homodyne")), spec1, spec2
        )
    raise ConfigError("region config needs 'rate_point', 'heterodyne' or 'homodyne'")


def cmd_region(args) -> int:
    cfg = _load_config(args.config)
    point = _region_point(cfg)
    region = gaussian_mac.capacity_region(point)
    factor = 1.0 / math.log(2.0) if args.bits else 1.0

    prefix = _out_prefix(args, "region")
    csv_path = prefix.with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("corner", "r1", "r2"))
        for i, (x, y) in enumerate(region.corners):
            writer.writerow((i, _fmt(x * factor), _fmt(y * factor)))
    json_path = prefix.with_suffix(".json")
    with open(json_path, "w") as fh:
        json.dump(
            {
                "meta": {"command": "region", "units": "bits" if args.bits else "nats"},
                "point": {
                    "r1_bound": point.r1_bound * factor,
                    "r2_bound": point.r2_bound * factor,
                    "sum_bound": point.sum_bound * factor,
                },
                "corners": [[x * factor, y * factor] for (x, y) in region.corners],
            },
            fh,
            indent=2,
        )
    print(f"wrote {csv_path} and {json_path}")
    return 0


def cmd_holevo(args) -> int:
    cfg = _load_config(args.config)
    try:
        ens1 = quantum_core.ensemble_from_json(_require(cfg, "source1", "holevo"))
        ens2 = quantum_core.ensemble_from_json(_require(cfg, "source2", "holevo"))
        ch = quantum_core.kraus_from_json(cfg)
    except ValueError as exc:
        raise ConfigError(f"holevo config: {exc}") from exc

    factor = 1.0 / math.log(2.0) if args.bits else 1.0
    try:
        report = {
            "conditional_bound_source1": access_bounds.holevo_conditional_bound(
                ens1, ens2, ch, source=1
            )
            * factor,
            "conditional_bound_source2": access_bounds.holevo_conditional_bound(
                ens1, ens2, ch, source=2
            )
            * factor,
            "sum_bound": access_bounds.holevo_sum_bound(ens1, ens2, ch) * factor,
        }
        if "povm" in cfg:
            povm = quantum_core.povm_from_json(cfg)
            point = access_bounds.rate_region(
                access_bounds.induce_channel(ens1, ens2, ch, povm)
            )
            report["povm_rates"] = {
                "r1_bound": point.r1_bound * factor,
                "r2_bound": point.r2_bound * factor,
                "sum_bound": point.sum_bound * factor,
            }
        if "oracle" in cfg:
            opts = cfg["oracle"]
            result = oracles.brute_force_accessible_info(
                ens1,
                ens2,
                ch,
                n_outcomes=int(opts.get("n_outcomes", 4)),
                n_restarts=int(opts.get("n_restarts", 2)),
                seed=int(opts.get("seed", args.seed)),
                maxiter=int(opts.get("maxiter", 80)),
            )
            report["oracle_lower_bound"] = {
                "r1_bound": result.best.r1_bound * factor,
                "r2_bound": result.best.r2_bound * factor,
                "sum_bound": result.best.sum_bound * factor,
                "restart_spread": list(result.restart_spread),
            }
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    report["units"] = "bits" if args.bits else "nats"
    json_path = _out_prefix(args, "holevo").with_suffix(".json")
    with open(json_path, "w") as fh:
        json.dump(report, fh, indent=2)
    for key in ("conditional_bound_source1", "conditional_bound_source2", "sum_bound"):
        print(f"{key} = {_fmt(report[key])} {report['units']}")
    print(f"wrote {json_path}")
    return 0


def cmd_verify(args) -> int:
    results = verification.run_verification(
        seed=args.seed, level=args.level, fixture=args.config
    )
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status}  {res.name}: {res.detail}")
        failed += 0 if res.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed (seed={args.seed})")
    return 0 if failed == 0 else 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmac",
        description="Rate regions and entropic bounds for a two-sender bosonic channel.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, needs_config=True):
        sp.add_argument(
            "--config", required=needs_config, help="TOML or JSON configuration file"
        )
        sp.add_argument("--out", help="output path prefix (writes PREFIX.csv / PREFIX.json)")
        sp.add_argument("--seed", type=int, default=20240801, help="RNG seed")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        sp.add_argument(
            "--bits", action="store_true", help="report information columns in bits"
        )

    add_common(sub.add_parser("heterodyne-sweep", help="rates on a (t, T) grid"))
    add_common(sub.add_parser("homodyne-sweep", help="squeezed-sender rates on a grid"))
    add_common(sub.add_parser("region", help="pentagon corners for one rate point"))
    add_common(sub.add_parser("holevo", help="entropic bounds for finite ensembles"))

    verify = sub.add_parser("verify", help="run the self-check battery")
    verify.add_argument("--config", help="optional regression fixture (JSON)")
    verify.add_argument("--seed", type=int, default=20240801)
    verify.add_argument("--level", choices=("quick", "full"), default="quick")
    return parser


_COMMANDS = {
    "heterodyne-sweep": cmd_heterodyne_sweep,
    "homodyne-sweep": cmd_homodyne_sweep,
    "region": cmd_region,
    "holevo": cmd_holevo,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
