"""Command line: ``run`` an experiment config or ``selftest`` the invariants."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import acceptance, bench


def _cmd_run(args) -> int:
    try:
        cfg = bench.ExperimentConfig.from_toml(args.config)
        cfg = bench.apply_overrides(cfg, seed=args.seed, runs=args.runs, out_csv=args.out_csv,
                                    out_svg=args.out_svg)
    except (OSError, bench.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for target in (cfg.out_csv, cfg.out_svg):
        if target and not Path(target).resolve().parent.is_dir():
            print(f"error: output directory for {target} does not exist", file=sys.stderr)
            return 2
    rows = bench.run_experiment(cfg, threads=args.threads)
    try:
        if cfg.out_csv:
            bench.emit_csv(rows, cfg.out_csv)
        if cfg.out_svg:
            bench.emit_svg_lines(rows, cfg.out_svg, title="output SINR versus SNR")
            bench.emit_svg_lines(rows, bench.cpu_svg_path(cfg.out_svg), metric="cpu_ms",
                                 title="CPU time versus SNR")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for key, pts in sorted(bench.aggregate(rows).items(),
                           key=lambda kv: (float(kv[0][0]), float(kv[0][1]))):
        series = "  ".join(f"{snr:g}dB:{m:.2f}" for snr, m in pts)
        print(f"p={key[0]} q={key[1]}  {series}")
    failed = sum(r.status.startswith("error") for r in rows)
    if failed:
        print(f"{failed} of {len(rows)} solves failed", file=sys.stderr)
    return 0


def _cmd_selftest(args) -> int:
    results = acceptance.run_all(quick=args.quick, threads=args.threads)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rabeam", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("--config", required=True)
    run.add_argument("--out-csv")
    run.add_argument("--out-svg", help="SINR plot; CPU-time plot goes to <stem>_cpu.svg")
    run.add_argument("--seed", type=int)
    run.add_argument("--runs", type=int)
    run.add_argument("--threads", type=int, default=1)
    run.set_defaults(func=_cmd_run)
    st = sub.add_parser("selftest", help="run the acceptance checks")
    st.add_argument("--quick", action="store_true", help="reduced instance counts")
    st.add_argument("--threads", type=int, default=1)
    st.set_defaults(func=_cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "seed", None) is not None and args.seed < 0:
        print("error: seed must be nonnegative", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
