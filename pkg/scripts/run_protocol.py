"""Run the reference protocol and write CSV plus SINR and CPU-time plots.

    python scripts/run_protocol.py [--runs 100] [--threads 4] [--out results]
"""
import argparse
from pathlib import Path

from rabeam import bench

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=ROOT / "configs" / "protocol.toml")
    ap.add_argument("--runs", type=int)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = bench.apply_overrides(bench.ExperimentConfig.from_toml(args.config), runs=args.runs)
    rows = bench.run_experiment(cfg, threads=args.threads)
    bench.emit_csv(rows, out / "protocol.csv")
    bench.emit_svg_lines(rows, out / "protocol.svg", title="output SINR versus SNR")
    bench.emit_svg_lines(rows, out / "protocol_cpu.svg", metric="cpu_ms",
                         title="CPU time versus SNR")
    bench.emit_svg_lines(rows, out / "protocol_worst_case.svg", metric="worst_case_sinr_db",
                         title="worst-case SINR versus SNR")

    bound = {r.snr_db: r.opt_bound_db for r in rows}
    sinr = bench.aggregate(rows)
    cpu = bench.aggregate(rows, "cpu_ms")
    print("snr_db  bound   " + "  ".join(f"q={k[1]:>4}" for k in sinr))
    for i, snr in enumerate(cfg.snr_list_db):
        means = "  ".join(f"{sinr[k][i][1]:6.2f}" for k in sinr)
        print(f"{snr:6g}  {bound[snr]:6.2f}  {means}")
    print("mean CPU ms per solve: " + "  ".join(
        f"q={k[1]}:{sum(m for _, m in v) / len(v):.0f}" for k, v in cpu.items()))


if __name__ == "__main__":
    main()
