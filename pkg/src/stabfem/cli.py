"""Command-line front end: ``stabfem run <config.ini>`` and ``stabfem list-cases``.

The configuration is an INI file; see the README for every key.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import analysis
from .cases import CATALOG, INFLOW, OUTFLOW, VELOCITIES, make_case
from .formulations import (
    FORMULATIONS,
    METHODS,
    PRIMAL_DUAL,
    STANDARD,
    StabilizationConfig,
    default_gamma,
    default_gamma_bc,
)
from .mesh import DIAGONALS
from .space import CONTINUOUS, DISCONTINUOUS
from .vtk import write_vtk

log = logging.getLogger("stabfem")

TABLE_HEADER = ["N", "h", "dofs", "l2_error", "sd_error", "l2_rate", "sd_rate", "z_l2", "sp_seminorm"]
SWEEP_HEADER = ["eps", "gamma", "formulation", "sd_error", "l2_error", "status"]

SCHEMA = {
    "problem": {"case", "velocity", "eps", "data_side"},
    "method": {"method", "formulation", "degree", "space", "gamma", "gamma_bc"},
    "study": {"mode", "levels", "perturb_amplitude", "seed", "diagonal", "expected_failures"},
    "sweep": {"eps", "gamma", "n", "formulations"},
    "output": {"dir", "vtk"},
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    case: str = "smooth"
    velocity: int = 1
    eps: float | None = None
    data_side: str = INFLOW
    method: str = "CIP"
    formulation: str = PRIMAL_DUAL
    degree: int = 1
    space: str = CONTINUOUS
    gamma: float | None = None
    gamma_bc: float | None = None
    mode: str = "convergence"
    levels: tuple[int, ...] = (3, 4, 5, 6, 7)
    perturb_amplitude: float = 0.0
    seed: int = 0
    diagonal: str = "right"
    expected_failures: bool = False
    sweep_eps: tuple[float, ...] = (0.05, 0.025, 0.0125)
    sweep_gamma: tuple[float, ...] = (0.01,)
    sweep_n: int = 64
    sweep_formulations: tuple[str, ...] = (PRIMAL_DUAL, STANDARD)
    output_dir: str = "out"
    vtk: bool = False
    source: dict = field(default_factory=dict, compare=False, repr=False)

    def stabilization(self) -> StabilizationConfig:
        return StabilizationConfig.with_defaults(
            self.method, self.degree, self.formulation, self.data_side, self.gamma, self.gamma_bc
        )

    @property
    def perturb(self) -> tuple[float, int] | None:
        return (self.perturb_amplitude, self.seed) if self.perturb_amplitude > 0.0 else None


def parse_levels(text: str) -> tuple[int, ...]:
    """``"3-7"`` or ``"3,4,5"``."""
    text = text.strip()
    m = re.fullmatch(r"(\d+)\s*-\s*(\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        levels = tuple(range(lo, hi + 1))
    else:
        levels = tuple(int(t) for t in text.split(",") if t.strip())
    if not levels or list(levels) != sorted(set(levels)) or levels[0] < 0:
        raise ValueError(f"levels must be a nonempty ascending list of nonnegative integers, got {text!r}")
    return levels


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _key_line(lines: list[str], section: str, key: str) -> int | None:
    current = None
    for i, line in enumerate(lines, 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
            return i
    return None


def _section_line(lines: list[str], section: str) -> int | None:
    for i, line in enumerate(lines, 1):
        if line.strip() == f"[{section}]":
            return i
    return None


def _choice(value: str, allowed) -> str:
    if value not in allowed:
        raise ValueError(f"expected one of {', '.join(allowed)}, got {value!r}")
    return value


CONVERTERS = {
    ("problem", "case"): lambda v: _choice(v, tuple(CATALOG)),
    ("problem", "velocity"): lambda v: int(_choice(v, ("1", "2", "3"))),
    ("problem", "eps"): lambda v: float(v) if v else None,
    ("problem", "data_side"): lambda v: _choice(v, (INFLOW, OUTFLOW)),
    ("method", "method"): lambda v: _choice(v, METHODS),
    ("method", "formulation"): lambda v: _choice(v, FORMULATIONS),
    ("method", "degree"): lambda v: int(_choice(v, ("1", "2"))),
    ("method", "space"): lambda v: _choice(v, (CONTINUOUS, DISCONTINUOUS)),
    ("method", "gamma"): lambda v: float(v) if v else None,
    ("method", "gamma_bc"): lambda v: float(v) if v else None,
    ("study", "mode"): lambda v: _choice(v, ("convergence", "sweep")),
    ("study", "levels"): parse_levels,
    ("study", "perturb_amplitude"): float,
    ("study", "seed"): int,
    ("study", "diagonal"): lambda v: _choice(v, DIAGONALS),
    ("study", "expected_failures"): _bool,
    ("sweep", "eps"): _floats,
    ("sweep", "gamma"): _floats,
    ("sweep", "n"): int,
    ("sweep", "formulations"): lambda v: tuple(_choice(t.strip(), FORMULATIONS) for t in v.split(",")),
    ("output", "dir"): str,
    ("output", "vtk"): _bool,
}

FIELD_NAME = {
    ("sweep", "eps"): "sweep_eps",
    ("sweep", "gamma"): "sweep_gamma",
    ("sweep", "n"): "sweep_n",
    ("sweep", "formulations"): "sweep_formulations",
    ("output", "dir"): "output_dir",
}


def load_config(path) -> RunConfig:
    """Parse and validate an INI run configuration; errors carry the file name and line."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
    lines = text.splitlines()
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc.message if hasattr(exc, 'message') else exc}") from exc

    values = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"{path}:{_section_line(lines, section)}: unknown section [{section}]")
        for key, raw in parser.items(section):
            line = _key_line(lines, section, key)
            if key not in SCHEMA[section]:
                raise ConfigError(f"{path}:{line}: unknown key {key!r} in section [{section}]")
            try:
                values[FIELD_NAME.get((section, key), key)] = CONVERTERS[section, key](raw.strip())
            except ValueError as exc:
                raise ConfigError(f"{path}:{line}: invalid value for {section}.{key}: {exc}") from exc
    if "space" not in values:
        values["space"] = DISCONTINUOUS if values.get("method") == "DG" else CONTINUOUS
    cfg = RunConfig(**values, source={"path": str(path)})
    validate(cfg, path)
    return cfg


def validate(cfg: RunConfig, path="config") -> None:
    if cfg.space == CONTINUOUS and cfg.method == "DG":
        raise ConfigError(f"{path}: incompatible combination: method=DG requires space=discontinuous, got space=continuous")
    if cfg.space == DISCONTINUOUS and cfg.method in ("GLS", "CIP"):
        raise ConfigError(
            f"{path}: incompatible combination: method={cfg.method} requires space=continuous, got space=discontinuous"
        )
    if cfg.mode == "sweep" and cfg.method != "CIP":
        raise ConfigError(f"{path}: sweep mode runs CIP only, got method={cfg.method}")
    if cfg.mode == "convergence" and cfg.case == "smooth" and cfg.velocity == 3 and cfg.eps is None:
        raise ConfigError(f"{path}: velocity 3 needs problem.eps")
    if not 0.0 <= cfg.perturb_amplitude < 0.3:
        raise ConfigError(f"{path}: perturb_amplitude must lie in [0, 0.3), got {cfg.perturb_amplitude}")


def fmt(x) -> str:
    return "" if x is None else f"{x:.16e}"


def write_table(path, report: analysis.ErrorReport) -> None:
    l2_rates, sd_rates = report.rates("l2"), report.rates("sd")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_HEADER)
        for rec, r_l2, r_sd in zip(report.records, l2_rates, sd_rates):
            w.writerow(
                [rec.N, fmt(rec.h), rec.dofs, fmt(rec.l2), fmt(rec.sd), fmt(r_l2), fmt(r_sd), fmt(rec.z_l2), fmt(rec.sp_seminorm)]
            )


def write_sweep(path, entries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for e in entries:
            w.writerow([fmt(e.eps), fmt(e.gamma), e.formulation, fmt(e.sd), fmt(e.l2), "failed" if e.failure else "ok"])


def run(cfg: RunConfig, out_dir: Path | None = None, vtk: bool | None = None) -> int:
    out = Path(cfg.output_dir if out_dir is None else out_dir)
    out.mkdir(parents=True, exist_ok=True)
    want_vtk = cfg.vtk if vtk is None else vtk

    if cfg.mode == "sweep":
        entries = analysis.robustness_sweep(
            cfg.sweep_eps, cfg.sweep_gamma, cfg.sweep_n, cfg.degree, cfg.sweep_formulations, cfg.perturb, cfg.diagonal
        )
        write_sweep(out / "sweep.csv", entries)
        failed = [e for e in entries if e.failure]
        for e in failed:
            log.error("solve failed (eps=%g, gamma=%g, %s): %s", e.eps, e.gamma, e.formulation, e.failure)
        return 1 if failed and not cfg.expected_failures else 0

    case = make_case(cfg.case, cfg.velocity, cfg.eps, cfg.data_side)
    stab = cfg.stabilization()

    def dump(N, sol):
        fields = {"u_h": sol.u}
        if sol.z is not None:
            fields["z_h"] = sol.z
        write_vtk(out / f"field_{N}.vtk", sol.space, fields, f"{cfg.case} {stab.method} {stab.formulation} N={N}")

    report = analysis.convergence_study(
        case, stab, cfg.degree, cfg.levels, cfg.perturb, cfg.diagonal, on_solution=dump if want_vtk else None
    )
    write_table(out / "table.csv", report)
    failed = [r for r in report.records if r.failure]
    for r in failed:
        log.error("solve failed at N=%d: %s", r.N, r.failure)
    return 1 if failed and not cfg.expected_failures else 0


def list_cases(stream=None) -> None:
    stream = sys.stdout if stream is None else stream
    p = lambda s="": print(s, file=stream)  # noqa: E731
    p("Cases:")
    for name, desc in CATALOG.items():
        p(f"  {name:14s} {desc}")
    p()
    p("Velocity fields:")
    for vid, desc in VELOCITIES.items():
        p(f"  {vid}  {desc}")
    p()
    p("Default stabilization parameters:")
    for method in METHODS:
        for k in (1, 2):
            p(f"  gamma_{method} (k={k}) = {default_gamma(method, k):g}")
    for form in FORMULATIONS:
        p(f"  gamma_bc ({form}) = {default_gamma_bc(form):g}")
    p()
    p("gamma_GLS has no tuned reference value; 0.1 is a package choice.")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stabfem", description="Stabilized FEM for advection-reaction problems.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a convergence study or sweep from an INI config")
    r.add_argument("config")
    r.add_argument("--output-dir", help="overrides output.dir")
    r.add_argument("--vtk", action="store_true", default=None, help="write field_N.vtk per level")
    r.add_argument("--levels", help='overrides study.levels, e.g. "3-7" or "3,4,5"')
    r.add_argument("--seed", type=int, help="overrides study.seed")
    sub.add_parser("list-cases", help="print the case catalog and default parameters")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.command == "list-cases":
        list_cases()
        return 0
    try:
        cfg = load_config(args.config)
        if args.levels is not None:
            try:
                cfg = replace(cfg, levels=parse_levels(args.levels))
            except ValueError as exc:
                raise ConfigError(f"--levels: {exc}") from exc
        if args.seed is not None:
            cfg = replace(cfg, seed=args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(cfg, Path(args.output_dir) if args.output_dir else None, args.vtk)


if __name__ == "__main__":
    sys.exit(main())
