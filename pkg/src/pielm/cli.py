"""Command-line entry point.

    pielm run --case cavity --seed 7 --out out/cavity [--config cfg.yaml] [--set k=v ...]
    pielm oracle --case cavity [--set k=v ...]
    pielm report out/cavity

Exit codes: 0 success, 1 bad configuration, 2 solver divergence,
3 oracle failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from pielm.config import CASES, ConfigError, config_to_dict, load_config
from pielm.drivers import DivergenceError
from pielm.oracles import OracleFailureError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGENCE = 2
EXIT_ORACLE = 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pielm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a case end to end")
    _add_config_args(run_p)

    oracle_p = sub.add_parser("oracle", help="precompute the oracle cache for a case")
    _add_config_args(oracle_p)

    report_p = sub.add_parser("report", help="re-render metrics from stored artifacts")
    report_p.add_argument("run_dir")

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        return _cmd_report(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except OracleFailureError as exc:
        print(f"oracle failure: {exc}", file=sys.stderr)
        return EXIT_ORACLE


def _add_config_args(p):
    p.add_argument("--case", choices=CASES)
    p.add_argument("--config", default=None, help="YAML config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (dotted paths, repeatable)",
    )


def _cmd_run(args) -> int:
    from pielm.cases import run_case

    cfg = load_config(args.config, args.case, args.seed, args.out, args.overrides)
    os.makedirs(cfg.out_dir, exist_ok=True)
    with open(os.path.join(cfg.out_dir, "config_resolved.json"), "w") as fh:
        json.dump(config_to_dict(cfg), fh, sort_keys=True, indent=2)
    report = run_case(cfg)
    print(f"case {cfg.case} seed {cfg.seed} -> {cfg.out_dir}")
    for name, errs in report.field_errors.items():
        parts = ", ".join(f"{k}={v:.4g}" for k, v in errs.items())
        print(f"  {name}: {parts}")
    for name, value in report.scalars.items():
        print(f"  {name} = {value}")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    from pielm.oracles import cached_burgers_fd, cached_cavity_fd

    cfg = load_config(args.config, args.case, args.seed if args.seed is not None else 0,
                      args.out, args.overrides)
    if cfg.case in ("burgers_standing", "burgers_traveling"):
        b = cfg.burgers
        t_total = b.n_blocks * b.dt_block
        cached_burgers_fd(
            {
                "ic_name": b.ic,
                "nu": b.nu,
                "nx": b.oracle_nx,
                "t_end": t_total,
                "snapshot_times": [t for t in b.probe_times if t <= t_total + 1e-12],
                "cfl": b.oracle_cfl,
            }
        )
    elif cfg.case == "cavity":
        cached_cavity_fd({"re": cfg.cavity.re_target, "n_grid": cfg.cavity.oracle_n_grid})
    elif cfg.case == "poisson_disk":
        pass  # closed-form solution, nothing to cache
    else:
        from pielm.cases import _refined_stenosis_fields, _stenosis_domain, _stenosis_probe

        domain = _stenosis_domain(cfg)
        probe = _stenosis_probe(domain, cfg.stenosis.probe_nx, cfg.stenosis.probe_ny)
        _refined_stenosis_fields(cfg, probe)
    print(f"oracle cache ready for {cfg.case}")
    return EXIT_OK


def _cmd_report(args) -> int:
    metrics_path = os.path.join(args.run_dir, "metrics.json")
    if not os.path.exists(metrics_path):
        print(f"no metrics.json under {args.run_dir}", file=sys.stderr)
        return EXIT_CONFIG
    with open(metrics_path) as fh:
        data = json.load(fh)
    print(f"case {data['case']} seed {data['seed']}")
    for name, errs in sorted(data.get("field_errors", {}).items()):
        parts = ", ".join(f"{k}={v:.4g}" for k, v in sorted(errs.items()))
        print(f"  {name}: {parts}")
    for name, value in sorted(data.get("scalars", {}).items()):
        print(f"  {name} = {value}")
    summary_path = os.path.join(args.run_dir, "summary.json")
    if os.path.exists(summary_path):
        with open(summary_path) as fh:
            summary = json.load(fh)
        missing = [
            a for a in summary.get("artifacts", [])
            if not os.path.exists(os.path.join(args.run_dir, a))
        ]
        if missing:
            print(f"missing artifacts: {missing}", file=sys.stderr)
            return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
