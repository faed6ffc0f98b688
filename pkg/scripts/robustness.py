"""SD error under the oscillating velocity beta3(eps) across eps and gamma_CIP (n = 64, P1)."""

import argparse
import csv
from dataclasses import dataclass, field
from pathlib import Path

from stabfem.analysis import robustness_sweep


@dataclass
class SweepConfig:
    eps: list[float] = field(default_factory=lambda: [0.05, 0.025, 0.0125])
    gamma: list[float] = field(default_factory=lambda: [0.001, 0.003, 0.01, 0.03, 0.1])
    n: int = 64
    out: str = "out/robustness"


def run(cfg: SweepConfig) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    entries = robustness_sweep(cfg.eps, cfg.gamma, cfg.n, 1)
    print(f"{'eps':>8} {'gamma':>8} {'formulation':>12} {'SD error':>11}")
    for e in entries:
        sd = "failed" if e.sd is None else f"{e.sd:11.4e}"
        print(f"{e.eps:8.4f} {e.gamma:8.4f} {e.formulation:>12} {sd:>11}")
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["eps", "gamma", "formulation", "sd_error", "l2_error"])
        for e in entries:
            w.writerow([e.eps, e.gamma, e.formulation, e.sd, e.l2])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=None)
    ap.add_argument("--gamma", type=float, nargs="+", default=None)
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--out", default="out/robustness")
    a = ap.parse_args()
    cfg = SweepConfig(n=a.n, out=a.out)
    if a.eps:
        cfg.eps = a.eps
    if a.gamma:
        cfg.gamma = a.gamma
    run(cfg)


if __name__ == "__main__":
    main()
