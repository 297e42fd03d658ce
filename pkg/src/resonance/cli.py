"""Command-line interface.

Subcommands:

* ``theory-heatmap``    - period-map spectral radii over a (mu, f) grid
* ``empirical-heatmap`` - seed-averaged optimizer metric over a 2-axis sweep
* ``sweep``             - generic experiment sweep to CSV
* ``psd``               - mean-sequence sample + Welch spectrum to CSV
* ``nn``                - the ReLU-network experiment
* ``verify``            - run the oracle/property self-check battery

Configuration precedence: experiment preset, then ``--config`` JSON,
then individual flags.  Exit status is 0 on success and nonzero with a
diagnostic on any rejected input.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import floquet, harness, verify
from .grids import contour_lines, render_pgm, write_contours_csv, write_grid_csv
from .processes import Ar2, Sinusoid, SquareWave, Switching
from .rng import Rng


def _parse_range(text: str) -> list[float]:
    try:
        lo, hi, n = text.split(":")
        return list(np.linspace(float(lo), float(hi), int(n)))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a:b:n, got {text!r}") from exc


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of ExperimentConfig fields")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="base seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--mu-range", type=_parse_range, default=None, metavar="A:B:N")
    p.add_argument("--freq-range", type=_parse_range, default=None, metavar="A:B:N")
    p.add_argument("--period-range", type=_parse_range, default=None, metavar="A:B:N")
    p.add_argument("--variance", type=float, default=None, help="switching mean variance")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--samples-per-step", type=int, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--runs", type=int, default=None)


def _build_config(args, default_experiment: str) -> harness.ExperimentConfig:
    name = getattr(args, "experiment", None) or default_experiment
    cfg = harness.preset(name)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            cfg = harness.ExperimentConfig.from_json(fh.read())
    overrides = {}
    for flag, fieldname in [
        ("eta", "eta"), ("mu", "mu"), ("variance", "mean_variance"),
        ("dim", "dim"), ("samples_per_step", "samples_per_step"),
        ("steps", "steps"), ("window", "window"), ("runs", "runs"),
        ("seed", "base_seed"),
    ]:
        value = getattr(args, flag, None)
        if value is not None:
            overrides[fieldname] = value
    if args.mu_range is not None:
        overrides["axis1"] = ("mu", args.mu_range)
    if args.freq_range is not None:
        overrides["axis2"] = ("freq", args.freq_range)
    if args.period_range is not None:
        overrides["axis2"] = ("period", [int(round(t)) for t in args.period_range])
    return dataclasses.replace(cfg, **overrides)


def _cmd_theory_heatmap(args) -> int:
    mu_values = args.mu_range or list(np.linspace(0.95, 0.999, 60))
    freq_values = args.freq_range or list(np.linspace(0.0, 0.05, 60))
    spec = floquet.TheorySpec(kind=args.process, amplitude=args.amplitude,
                              cov_scale=args.cov_scale, dim=args.dim or 1)
    eta = args.eta if args.eta is not None else 0.01
    grid = floquet.theory_heatmap(eta, mu_values, freq_values, spec,
                                  workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    write_grid_csv(grid, os.path.join(args.out, "theory_rho.csv"))
    with open(os.path.join(args.out, "theory_rho.pgm"), "wb") as fh:
        fh.write(render_pgm(grid, lo_log10=-1.0, hi_log10=1.0))
    write_contours_csv(contour_lines(grid, 1.0),
                       os.path.join(args.out, "theory_rho_contour.csv"))
    print(f"theory grid {grid.values.shape} -> {args.out}")
    return 0


def _cmd_empirical_heatmap(args) -> int:
    cfg = _build_config(args, "exp1")
    if cfg.axis1 is None or cfg.axis2 is None:
        print("empirical-heatmap needs a 2-axis sweep", file=sys.stderr)
        return 1
    grid, records = harness.empirical_heatmap(cfg, workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    harness.write_csv(records, os.path.join(args.out, f"{cfg.experiment}_runs.csv"))
    write_grid_csv(grid, os.path.join(args.out, f"{cfg.experiment}_grid.csv"))
    with open(os.path.join(args.out, f"{cfg.experiment}_grid.pgm"), "wb") as fh:
        fh.write(render_pgm(grid))
    print(f"{len(records)} runs over {grid.values.shape} cells -> {args.out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _build_config(args, "exp4")
    records = harness.sweep(cfg, workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    harness.write_csv(records, os.path.join(args.out, f"{cfg.experiment}_runs.csv"))
    print(f"{len(records)} runs -> {args.out}")
    return 0


def _cmd_psd(args) -> int:
    rng = Rng(args.seed if args.seed is not None else 0)
    if args.process == "sinusoid":
        signal = Sinusoid(args.amplitude, args.freq)
    elif args.process == "ar2":
        signal = Ar2(args.freq, 0.1, 1e-5)
    elif args.process == "square":
        direction = np.zeros(args.dim or 1)
        direction[0] = 1.0
        signal = SquareWave(args.period, direction)
    elif args.process == "switching":
        signal = Switching(args.period, args.variance or 0.25, args.dim or 1)
    else:
        print(f"unknown process {args.process!r}", file=sys.stderr)
        return 1
    steps = args.steps or 2 ** 14
    series = np.array([signal.mean_at(k, rng)[0] for k in range(steps)])
    from .processes import psd as welch
    freqs, power = welch(series, args.segment_len, args.overlap)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{args.process}_psd.csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("freq,power\n")
        for f, p in zip(freqs, power):
            fh.write(f"{float(f)!r},{float(p)!r}\n")
    print(f"psd peak at f={freqs[np.argmax(power)]:.5f} -> {path}")
    return 0


def _cmd_nn(args) -> int:
    cfg = _build_config(args, "exp6")
    records = harness.sweep(cfg, workers=args.workers)
    os.makedirs(args.out, exist_ok=True)
    harness.write_csv(records, os.path.join(args.out, "exp6_runs.csv"))
    print(f"{len(records)} network runs -> {args.out}")
    return 0


def _cmd_verify(args) -> int:
    results = verify.run(full=args.full, workers=args.workers)
    failed = [r for r in results if not r.passed]
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="resonance",
        description="Momentum-SGD resonance under covariate shift: "
                    "stability theory and experiment sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory-heatmap", help="spectral-radius grid")
    _add_common(p)
    p.add_argument("--process", default="sinusoid", choices=["sinusoid", "square"])
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--cov-scale", type=float, default=1.0)
    p.set_defaults(func=_cmd_theory_heatmap)

    p = sub.add_parser("empirical-heatmap", help="seed-averaged metric grid")
    _add_common(p)
    p.add_argument("--experiment", default="exp1", choices=sorted(harness.PRESETS))
    p.set_defaults(func=_cmd_empirical_heatmap)

    p = sub.add_parser("sweep", help="generic experiment sweep")
    _add_common(p)
    p.add_argument("--experiment", default="exp4", choices=sorted(harness.PRESETS))
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("psd", help="mean-sequence power spectral density")
    _add_common(p)
    p.add_argument("--process", default="ar2",
                   choices=["sinusoid", "ar2", "square", "switching"])
    p.add_argument("--freq", type=float, default=0.03)
    p.add_argument("--period", type=int, default=50)
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--segment-len", type=int, default=4096)
    p.add_argument("--overlap", type=float, default=0.5)
    p.set_defaults(func=_cmd_psd)

    p = sub.add_parser("nn", help="ReLU-network resonance experiment")
    _add_common(p)
    p.add_argument("--experiment", default="exp6", choices=["exp6"])
    p.set_defaults(func=_cmd_nn)

    p = sub.add_parser("verify", help="oracle/property self-checks")
    p.add_argument("--full", action="store_true",
                   help="include the slow empirical suites")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
