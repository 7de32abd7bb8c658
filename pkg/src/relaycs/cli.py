"""Command-line entry point: ``relaycs {fig1,fig2,fig3,custom}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from relaycs.experiments import ConfigError, emit_csv, load_config, preset, run_experiment

COMMANDS = {
    "fig1": "fig1_diagnosis",
    "fig2": "fig2_nmse_vs_measurements",
    "fig3": "fig3_nmse_vs_snr",
    "custom": "custom",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relaycs", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "fig1": "relay diagnosis success rate vs. number of measurements",
        "fig2": "MS channel NMSE vs. number of measurements",
        "fig3": "MS channel NMSE vs. SNR",
        "custom": "any sweep described by a config file (set 'kind: diagnosis' or 'kind: nmse')",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="YAML file overriding the scenario defaults")
        p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        p.add_argument("--out", default="results", help="output directory (default: results)")
        p.add_argument("--trials", type=int, help="Monte Carlo trials per sweep point")
        p.add_argument("--threads", type=int, help="worker processes")
        p.add_argument("--no-trials-csv", action="store_true", help="only write the summary table")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    scenario = COMMANDS[args.command]
    try:
        if args.config:
            config = load_config(args.config, scenario)
        elif scenario == "custom":
            raise ConfigError("the custom command needs --config")
        else:
            config = preset(scenario)
        overrides = {k: v for k, v in (("seed", args.seed), ("trials", args.trials), ("threads", args.threads)) if v is not None}
        config = dataclasses.replace(config, **overrides).validate()
    except (ConfigError, OSError) as exc:
        print(f"relaycs: {exc}", file=sys.stderr)
        return 2
    result = run_experiment(config)
    tables = [result.summary] if args.no_trials_csv else [result.summary, result.records]
    for path in emit_csv(tables, args.out, config):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
