"""Reconstruction from outflow data: primal-dual CIP against the standard method with three gamma_CIP values."""

import argparse
from dataclasses import dataclass

from stabfem.analysis import convergence_study
from stabfem.cases import OUTFLOW, smooth_case
from stabfem.formulations import PRIMAL_DUAL, STANDARD, StabilizationConfig


@dataclass
class AssimilationConfig:
    degree: int = 1
    levels: tuple[int, ...] = (3, 4, 5, 6, 7)
    standard_gamma_bc: float = -1.0
    standard_gammas: tuple[float, ...] = (1e-3, 0.0, -0.01)


def run(cfg: AssimilationConfig) -> None:
    case = smooth_case(1, data_side=OUTFLOW)
    runs = {"primal_dual": StabilizationConfig.with_defaults("CIP", cfg.degree, PRIMAL_DUAL, OUTFLOW)}
    for g in cfg.standard_gammas:
        runs[f"standard gamma={g:g}"] = StabilizationConfig.with_defaults(
            "CIP", cfg.degree, STANDARD, OUTFLOW, g, cfg.standard_gamma_bc
        )
    for name, stab in runs.items():
        rep = convergence_study(case, stab, cfg.degree, cfg.levels)
        errs = ", ".join("failed" if r.l2 is None else f"{r.l2:.2e}" for r in rep.records)
        print(f"{name:>22}: L2 {errs}  (mean rate {rep.mean_rate('l2'):.2f})")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--degree", type=int, default=1, choices=(1, 2))
    a = ap.parse_args()
    levels = (3, 4, 5, 6, 7) if a.degree == 1 else (3, 4, 5, 6)
    run(AssimilationConfig(a.degree, levels))


if __name__ == "__main__":
    main()
