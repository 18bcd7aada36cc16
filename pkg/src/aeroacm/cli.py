"""Command-line front end.

Subcommands: ``analyze`` (closed-form link report), ``simulate``
(single-point Monte-Carlo), ``design-acm`` (threshold design + table),
``sweep`` (closed-form vs simulation along one axis) and ``select`` (mode
lookup for a distance). Scenario files are flat YAML key/value documents
mirroring the SystemConfig field names plus the run controls ``trials``,
``seed``, ``grid`` (design grid step in km) and ``output_dir``; unknown keys
are rejected. Distances on the command line are kilometers, stored
internally as meters. All outputs are deterministic for a fixed scenario
and seed; the AERO_ACM_THREADS environment variable only bounds the worker
count.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import sys
from pathlib import Path

import numpy as np
import yaml

from . import acm, montecarlo
from .channel import SystemConfig, path_loss_db
from .errors import (AeroAcmError, BelowMinimumSeparation, ConfigError,
                     DomainError, EmptyTable, InvalidAxis, OutOfRange)
from .sinr import analyze_link, budget_from_config

_CONFIG_FIELDS = {f.name for f in dataclasses.fields(SystemConfig)}
_RUN_CONTROLS = {"trials": 2000, "seed": 1, "grid": 1.0, "output_dir": "."}

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OUT_OF_RANGE = 3
EXIT_BELOW_MINIMUM = 4


def load_scenario(path: str | None) -> tuple[SystemConfig, dict]:
    """Parse a scenario file into a config and its run controls.

    Missing keys fall back to the default scenario; unknown keys raise
    :class:`ConfigError` naming the offender.
    """
    raw: dict = {}
    if path is not None:
        with open(path) as fh:
            loaded = yaml.safe_load(fh)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError(f"scenario file {path} must be a flat mapping")
        raw = loaded
    controls = dict(_RUN_CONTROLS)
    cfg_kwargs = {}
    for key, value in raw.items():
        if key in _CONFIG_FIELDS:
            cfg_kwargs[key] = value
        elif key in controls:
            controls[key] = value
        else:
            raise ConfigError(f"unknown scenario key: {key!r}")
    try:
        config = SystemConfig(**cfg_kwargs)
    except (DomainError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return config, controls


def scenario_hash(config: SystemConfig, seed: int) -> str:
    """Short provenance hash of (config, seed) embedded in plots."""
    text = repr(sorted(dataclasses.asdict(config).items())) + f"|seed={seed}"
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _ensure_outdir(args, controls) -> Path:
    out = Path(args.out if args.out is not None else controls["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _setup_matplotlib(salt: str):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = salt
    return plt


def _save_svg(fig, path: Path, salt: str) -> None:
    # Fixed hash salt and a stripped date keep the SVG bytes reproducible;
    # the salt doubles as the provenance comment.
    fig.savefig(path, format="svg", metadata={"Date": None})


def cmd_analyze(args) -> int:
    config, controls = load_scenario(args.config)
    budget = budget_from_config(config)
    lines = [
        "link budget:",
        f"  path loss            {path_loss_db(config.carrier_freq, config.link_distance):.4f} dB",
        f"  received power       {budget.p_desired:.6e} W",
        f"  avg contaminator pwr {budget.p_bar:.6e} W (training)",
        f"  avg co-channel pwr   {budget.data_power:.6e} W (data)",
        f"  subcarrier noise     {budget.sigma_w2:.6e} W",
    ]
    for mode in ("theoretical", "approximate"):
        br = analyze_link(config, mode=mode)
        total = br.rate_per_dra * config.bandwidth * config.num_dra
        lines += [
            f"{mode} mode:",
            f"  desired power        {br.desired:.6e} W",
            f"  est-error term       {br.est_error_term:.6e} W",
            f"  inter-antenna term   {br.inter_antenna_term:.6e} W",
            f"  interferer term      {br.interferer_term:.6e} W",
            f"  noise                {br.noise:.6e} W",
            f"  SINR                 {br.sinr:.6f}",
            f"  rate per DRA         {br.rate_per_dra:.6f} bits/s/Hz",
            f"  total data rate      {total / 1e6:.3f} Mbps",
        ]
    report = "\n".join(lines)
    print(report)
    if args.out is not None:
        out = _ensure_outdir(args, controls)
        (out / "analyze.txt").write_text(report + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    config, controls = load_scenario(args.config)
    trials = args.trials if args.trials is not None else int(controls["trials"])
    seed = args.seed if args.seed is not None else int(controls["seed"])
    out = _ensure_outdir(args, controls)
    rates = montecarlo.simulate_point(config, trials, seed)
    theory = analyze_link(config, mode="theoretical").rate_per_dra
    mean = float(np.mean(rates))
    stderr = float(np.std(rates, ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    print(f"simulated rate per DRA: {mean:.4f} +- {stderr:.4f} bits/s/Hz "
          f"({trials} trials)")
    print(f"closed-form rate per DRA: {theory:.4f} bits/s/Hz")
    montecarlo.write_samples_csv(rates, out / "samples.csv")
    grid = np.linspace(0.0, float(np.max(rates)) * 1.05, 201)
    probs = montecarlo.ccdf(rates, grid)
    montecarlo.write_ccdf_csv(grid, probs, out / "ccdf.csv")
    if args.format in ("svg", "both"):
        salt = scenario_hash(config, seed)
        plt = _setup_matplotlib(salt)
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(grid, probs)
        ax.set_xlabel("rate per DRA (bits/s/Hz)")
        ax.set_ylabel("P(rate > x)")
        ax.grid(True, alpha=0.3)
        ax.set_title(f"throughput CCDF ({trials} trials)  [{salt}]", fontsize=8)
        _save_svg(fig, out / "ccdf.svg", salt)
        plt.close(fig)
    return EXIT_OK


def _load_modes(path: str | None):
    if path is None:
        return acm.DEFAULT_MODES
    with open(path) as fh:
        entries = yaml.safe_load(fh)
    if not entries:
        raise EmptyTable("modes file is empty")
    modes = []
    for i, entry in enumerate(entries, start=1):
        order = int(entry["modulation_order"])
        rate = float(entry["code_rate"])
        if "spectral_efficiency" in entry:
            se = float(entry["spectral_efficiency"])
        else:
            se = None
        modes.append((i, order, rate, se))
    return modes


def cmd_design_acm(args) -> int:
    config, controls = load_scenario(args.config)
    step_km = float(controls["grid"])
    raw_modes = _load_modes(args.modes_file)
    modes = []
    for entry in raw_modes:
        if isinstance(entry, acm.AcmMode):
            modes.append(entry)
        else:
            i, order, rate, se = entry
            if se is None:
                se = acm.spectral_efficiency(order, rate, config.num_subcarriers,
                                             config.cp_length)
            modes.append(acm.AcmMode(i, order, rate, se))
    distances = np.arange(config.d_min, config.d_max + 1.0, step_km * 1e3)
    distances = distances[distances <= config.d_max]
    curve = acm.rate_curve(config, distances, mode=args.mode)
    refine = lambda d: acm.rate_curve(config, [d], mode=args.mode)[0]  # noqa: E731
    table = acm.design_thresholds(distances, curve, modes, config.d_min,
                                  config.d_max, refine=refine)
    print(acm.format_table(table, config.bandwidth, config.num_dra))
    for mode in table.dropped:
        print(f"warning: mode {mode.index} dropped "
              f"(SE {mode.spectral_efficiency} above the rate curve)",
              file=sys.stderr)
    out = _ensure_outdir(args, controls)
    acm.write_table_csv(table, config.bandwidth, config.num_dra,
                        out / "acm_table.csv")
    if args.format in ("svg", "both"):
        seed = int(controls["seed"])
        salt = scenario_hash(config, seed)
        plt = _setup_matplotlib(salt)
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(distances / 1e3, curve, label="achievable rate per DRA")
        step_d, step_se = [], []
        for mode, (lo, hi) in zip(table.modes, table.intervals()):
            step_d += [lo / 1e3, hi / 1e3]
            step_se += [mode.spectral_efficiency] * 2
        ax.plot(step_d, step_se, drawstyle="steps-post", label="selected mode SE")
        ax.set_xlabel("distance (km)")
        ax.set_ylabel("bits/s/Hz")
        ax.grid(True, alpha=0.3)
        ax.legend()
        ax.set_title(f"ACM thresholds  [{salt}]", fontsize=8)
        _save_svg(fig, out / "acm_design.svg", salt)
        plt.close(fig)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config, controls = load_scenario(args.config)
    trials = args.trials if args.trials is not None else int(controls["trials"])
    seed = args.seed if args.seed is not None else int(controls["seed"])
    values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    if args.axis == "d_ab":
        values = [v * 1e3 for v in values]  # CLI takes km
    result = montecarlo.run_sweep(config, args.axis, values, trials, seed)
    out = _ensure_outdir(args, controls)
    montecarlo.write_sweep_csv(result, out / "sweep.csv")
    for value, samples in zip(result.axis_values, result.samples):
        tag = format(value / 1e3 if args.axis == "d_ab" else value, "g")
        montecarlo.write_samples_csv(samples, out / f"samples_{args.axis}_{tag}.csv")
        grid = np.linspace(0.0, float(np.max(samples)) * 1.05, 201)
        montecarlo.write_ccdf_csv(grid, montecarlo.ccdf(samples, grid),
                                  out / f"ccdf_{args.axis}_{tag}.csv")
    for value, theo, appr, sim in zip(result.axis_values, result.theoretical,
                                      result.approximate, result.simulated_mean):
        print(f"{args.axis}={value:g}: theoretical={theo:.4f} "
              f"approximate={appr:.4f} simulated={sim:.4f}")
    if args.format in ("svg", "both"):
        salt = scenario_hash(config, seed)
        plt = _setup_matplotlib(salt)
        axis_vals = [v / 1e3 if args.axis == "d_ab" else v
                     for v in result.axis_values]
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(axis_vals, result.theoretical, "o-", label="theoretical")
        ax.plot(axis_vals, result.approximate, "s--", label="approximate")
        ax.errorbar(axis_vals, result.simulated_mean, yerr=result.stderr,
                    fmt="^-", label="simulation")
        ax.set_xlabel(args.axis + (" (km)" if args.axis == "d_ab" else ""))
        ax.set_ylabel("rate per DRA (bits/s/Hz)")
        ax.grid(True, alpha=0.3)
        ax.legend()
        ax.set_title(f"sweep over {args.axis}  [{salt}]", fontsize=8)
        _save_svg(fig, out / "sweep.svg", salt)
        plt.close(fig)
        fig, ax = plt.subplots(figsize=(6, 4))
        for value, samples in zip(result.axis_values, result.samples):
            grid = np.linspace(0.0, float(np.max(samples)) * 1.05, 201)
            label = format(value / 1e3 if args.axis == "d_ab" else value, "g")
            ax.plot(grid, montecarlo.ccdf(samples, grid),
                    label=f"{args.axis}={label}")
        ax.set_xlabel("rate per DRA (bits/s/Hz)")
        ax.set_ylabel("P(rate > x)")
        ax.grid(True, alpha=0.3)
        ax.legend()
        ax.set_title(f"throughput CCDFs  [{salt}]", fontsize=8)
        _save_svg(fig, out / "ccdf.svg", salt)
        plt.close(fig)
    return EXIT_OK


def cmd_select(args) -> int:
    config, _ = load_scenario(args.config)
    table = acm.read_table_csv(args.table, d_max=config.d_max)
    d = args.distance_km * 1e3
    mode = acm.select_mode(d, table)
    per_dra, total = acm.mode_data_rates(mode, config.bandwidth, config.num_dra)
    print(f"mode {mode.index}: {mode.modulation_order}-ary, code rate "
          f"{mode.code_rate}, SE {mode.spectral_efficiency} bits/s/Hz")
    print(f"data rate: {per_dra / 1e6:.3f} Mbps per DRA, {total / 1e6:.3f} Mbps total")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aeroacm",
        description="Closed-form analysis, Monte-Carlo simulation and ACM "
                    "design for large-antenna aeronautical links")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials=False):
        p.add_argument("--config", help="scenario YAML file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", choices=("csv", "svg", "both"),
                       default="csv", help="artifact formats to write")
        if trials:
            p.add_argument("--trials", type=int, default=None)
            p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("analyze", help="closed-form link report")
    common(p)
    p.add_argument("--mode", choices=("theoretical", "approximate"),
                   default="theoretical")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="single-point Monte-Carlo run")
    common(p, trials=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("design-acm", help="design distance thresholds")
    common(p)
    p.add_argument("--mode", choices=("theoretical", "approximate"),
                   default="theoretical")
    p.add_argument("--modes-file", help="YAML list of modes "
                   "(modulation_order, code_rate[, spectral_efficiency])")
    p.set_defaults(func=cmd_design_acm)

    p = sub.add_parser("sweep", help="sweep one parameter axis")
    common(p, trials=True)
    p.add_argument("--axis", required=True,
                   help="one of A, d_ab, N_t, N_r, rho, K_Rice")
    p.add_argument("--values", required=True,
                   help="comma-separated axis values (km for d_ab)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("select", help="select the ACM mode for a distance")
    p.add_argument("--config", help="scenario YAML file")
    p.add_argument("--table", required=True, help="designed ACM table CSV")
    p.add_argument("--distance-km", type=float, required=True)
    p.set_defaults(func=cmd_select)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OutOfRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OUT_OF_RANGE
    except BelowMinimumSeparation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BELOW_MINIMUM
    except (ConfigError, InvalidAxis, EmptyTable, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AeroAcmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
