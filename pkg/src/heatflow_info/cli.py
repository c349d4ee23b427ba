"""Command-line front end.

    heatflow-info scan       --config FILE [--jobs N] [--out-dir D]
    heatflow-info verify     --config FILE [--suite NAME] [--out-dir D]
    heatflow-info thresholds --config FILE [--out-dir D]
    heatflow-info bounds     --config FILE [--out-dir D]

Config files are flat key=value lines with '#' comments:

    model_file=model.txt        # path, relative to the config file
    t_min=0.01
    t_max=10
    t_points=200
    t_spacing=log               # or linear
    quad_method=gauss_hermite   # or adaptive_interval
    quad_order=80
    quad_truncation_radius=12
    quad_rel_tol=1e-10
    quad_abs_tol=1e-12
    outputs=csv,svg,report
    seed=0

Exit codes: 0 success / all checks pass, 1 check failure, 2 input error,
3 numeric error (a partial CSV is flushed with a trailing '# INCOMPLETE'
row).  Numbers are serialized with repr, the shortest round-trip form, so
output files are byte-stable across runs for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import checks
from .bounds import tail_estimate_lattice, verify_genmixt
from .convexity import convexity_thresholds
from .errors import (
    CheckFailedError,
    ConfigParseError,
    ConvergenceFailureError,
    HeatflowError,
    InvalidArgumentError,
    NumericFailureError,
    ParseError,
)
from .functionals import mutual_triple
from .mixtures import MixtureModel, load_model
from .numerics import QuadratureSpec, finite_difference

_OUTPUTS = ("csv", "svg", "report")
_SPACINGS = ("linear", "log")


@dataclass(frozen=True)
class ScanConfig:
    model_file: Path
    t_min: float = 0.01
    t_max: float = 10.0
    t_points: int = 200
    t_spacing: str = "log"
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    outputs: tuple[str, ...] = ("csv", "report")
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.t_min < self.t_max:
            raise InvalidArgumentError("t_min must be smaller than t_max")
        if self.t_min <= 0:
            raise InvalidArgumentError("t_min must be positive")
        if self.t_points < 3:
            raise InvalidArgumentError("t_points must be >= 3")
        if self.t_spacing not in _SPACINGS:
            raise InvalidArgumentError(f"t_spacing must be one of {_SPACINGS}")
        bad = set(self.outputs) - set(_OUTPUTS)
        if bad:
            raise InvalidArgumentError(f"unknown outputs: {sorted(bad)}")

    def time_grid(self) -> np.ndarray:
        if self.t_spacing == "log":
            return np.geomspace(self.t_min, self.t_max, self.t_points)
        return np.linspace(self.t_min, self.t_max, self.t_points)


_CONFIG_KEYS = {
    "model_file",
    "t_min",
    "t_max",
    "t_points",
    "t_spacing",
    "quad_method",
    "quad_order",
    "quad_truncation_radius",
    "quad_rel_tol",
    "quad_abs_tol",
    "outputs",
    "seed",
}


def parse_config_text(text: str, base_dir: Path) -> ScanConfig:
    raw: dict[str, tuple[str, int]] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigParseError("expected key=value", line_no, 1)
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigParseError(f"unknown key {key!r}", line_no, 1)
        if key in raw:
            raise ConfigParseError(f"duplicate key {key!r}", line_no, 1)
        raw[key] = (value, line_no)
    if "model_file" not in raw:
        raise ConfigParseError("missing key 'model_file'", len(text.splitlines()) + 1, 1)

    def take(key: str, default, convert):
        if key not in raw:
            return default
        value, line_no = raw[key]
        try:
            return convert(value)
        except (ValueError, InvalidArgumentError) as exc:
            raise ConfigParseError(f"bad value for {key}: {exc}", line_no, 1) from None

    quad = QuadratureSpec(
        method=take("quad_method", "gauss_hermite", str),
        order=take("quad_order", 80, int),
        truncation_radius=take("quad_truncation_radius", 12.0, float),
        rel_tol=take("quad_rel_tol", 1e-10, float),
        abs_tol=take("quad_abs_tol", 1e-12, float),
    )
    try:
        return ScanConfig(
            model_file=base_dir / take("model_file", None, str),
            t_min=take("t_min", 0.01, float),
            t_max=take("t_max", 10.0, float),
            t_points=take("t_points", 200, int),
            t_spacing=take("t_spacing", "log", str),
            quad=quad,
            outputs=tuple(take("outputs", "csv,report", str).split(",")),
            seed=take("seed", 0, int),
        )
    except InvalidArgumentError as exc:
        raise ConfigParseError(str(exc), 0, 0) from None


def load_config(path) -> ScanConfig:
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), path.parent)


# -- scan -----------------------------------------------------------------------


@dataclass(frozen=True)
class ScanRow:
    t: float
    i: float
    j_mut: float
    k_mut: float
    i_err: float
    j_err: float
    k_err: float
    di_fd: float
    d2i_fd: float


SCAN_HEADER = "t,I,J_mut,K_mut,I_err,J_err,K_err,dI_fd,d2I_fd"


def _fmt(x: float) -> str:
    return repr(float(x))


def compute_scan_row(model: MixtureModel, t: float, spec: QuadratureSpec) -> ScanRow:
    i, j, k = mutual_triple(model, t, spec)

    def i_curve(tt: float) -> float:
        return mutual_triple(model, tt, spec)[0].value

    try:
        di = finite_difference(i_curve, t, 1)
        d2i = finite_difference(i_curve, t, 2)
    except InvalidArgumentError:
        di = d2i = math.nan
    return ScanRow(t, i.value, j.value, k.value, i.abs_error, j.abs_error, k.abs_error, di, d2i)


def _scan_worker(args) -> ScanRow:
    model, t, spec = args
    return compute_scan_row(model, t, spec)


def scan_rows(model: MixtureModel, config: ScanConfig, jobs: int = 1):
    """Yield ScanRow per grid point, in grid order regardless of jobs."""
    grid = config.time_grid()
    tasks = [(model, float(t), config.quad) for t in grid]
    if jobs <= 1:
        for task in tasks:
            yield _scan_worker(task)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        yield from pool.map(_scan_worker, tasks)


def write_scan_csv(rows: list[ScanRow], path: Path, complete: bool) -> None:
    lines = [SCAN_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (r.t, r.i, r.j_mut, r.k_mut, r.i_err, r.j_err, r.k_err, r.di_fd, r.d2i_fd)
            )
        )
    if not complete:
        lines.append("# INCOMPLETE")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def render_scan_svg(rows: list[ScanRow], path: Path, log_t: bool) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ts = [r.t for r in rows]
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(6.0, 7.5))
    panels = [
        ("I(X0;Xt)", [r.i for r in rows]),
        ("J(X0;Xt)", [r.j_mut for r in rows]),
        ("K(X0;Xt)", [r.k_mut for r in rows]),
    ]
    for ax, (label, ys) in zip(axes, panels):
        ax.plot(ts, ys, lw=1.2)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    axes[2].axhline(0.0, color="k", lw=0.6)
    axes[2].set_xlabel("t")
    if log_t:
        axes[2].set_xscale("log")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_scan(config: ScanConfig, out_dir: Path, jobs: int = 1) -> int:
    model = load_model(config.model_file)
    rows: list[ScanRow] = []
    csv_path = out_dir / "scan.csv"
    try:
        for row in scan_rows(model, config, jobs):
            rows.append(row)
    except (NumericFailureError, ConvergenceFailureError) as exc:
        if "csv" in config.outputs:
            write_scan_csv(rows, csv_path, complete=False)
        print(f"numeric failure after {len(rows)} points: {exc}", file=sys.stderr)
        return 3
    if "csv" in config.outputs:
        write_scan_csv(rows, csv_path, complete=True)
    if "svg" in config.outputs:
        render_scan_svg(rows, out_dir / "scan.svg", log_t=config.t_spacing == "log")
    if "report" in config.outputs:
        k_min = min(r.k_mut for r in rows)
        report = [
            f"model: {config.model_file}",
            f"grid: {config.t_points} {config.t_spacing} points in [{_fmt(config.t_min)}, {_fmt(config.t_max)}]",
            f"I range: [{_fmt(min(r.i for r in rows))}, {_fmt(max(r.i for r in rows))}]",
            f"min K_mut: {_fmt(k_min)} at t={_fmt(min(rows, key=lambda r: r.k_mut).t)}",
        ]
        (out_dir / "scan-report.txt").write_text("\n".join(report) + "\n", encoding="utf-8")
        print("\n".join(report))
    return 0


# -- verify -----------------------------------------------------------------------


def cmd_verify(config: ScanConfig, out_dir: Path, suite: str = "all") -> int:
    model = load_model(config.model_file)
    grid = np.geomspace(max(config.t_min, 0.05), config.t_max, min(config.t_points, 40))
    results = checks.run_suites(model, suite, seed=config.seed, t_grid=grid)
    text = checks.format_report(results)
    print(text)
    if "report" in config.outputs:
        (out_dir / "verify.txt").write_text(text + "\n", encoding="utf-8")
    return 0 if all(r.status != checks.FAIL for r in results) else 1


# -- thresholds ---------------------------------------------------------------------


def cmd_thresholds(config: ScanConfig, out_dir: Path) -> int:
    model = load_model(config.model_file)
    th = convexity_thresholds(model, config.quad)
    lines = [f"model: {config.model_file}"]
    if th.log_concave_initial:
        lines.append("log-concave initial law: mutual information convex for all t >= 0")
    if math.isfinite(th.d_sq):
        lines.append(
            f"bounded part of diameter D: convex for t >= D^2 = {_fmt(th.d_sq)}"
        )
    if math.isfinite(th.fi_threshold):
        lines.append(
            f"finite Fisher information J0={_fmt(th.fisher_info)} and fourth moment "
            f"M4={_fmt(th.fourth_moment)}: convex for t >= J0*M4/n^2 = {_fmt(th.fi_threshold)}"
            f" (quadratic-root form: {_fmt(th.fi_root_threshold)})"
        )
    failures = 0
    for label, start in _confirmation_grids(th, config):
        grid = np.geomspace(start, max(4.0 * start, config.t_max), 12)
        worst = math.inf
        for t in grid:
            k = mutual_triple(model, float(t), config.quad)[2]
            worst = min(worst, k.value + 2.0 * k.abs_error + 1e-9)
        status = "PASS" if worst >= 0 else "FAIL"
        failures += status == "FAIL"
        lines.append(
            f"confirmation ({label}): min K_mut over [{_fmt(grid[0])}, {_fmt(grid[-1])}] "
            f"margin {_fmt(worst)} {status}"
        )
    text = "\n".join(lines)
    print(text)
    if "report" in config.outputs:
        (out_dir / "thresholds.txt").write_text(text + "\n", encoding="utf-8")
    return 1 if failures else 0


def _confirmation_grids(th, config: ScanConfig):
    if th.log_concave_initial:
        yield "all t", config.t_min
    if math.isfinite(th.d_sq) and th.d_sq > 0:
        yield "t >= D^2", th.d_sq
    if math.isfinite(th.fi_threshold):
        yield "t >= J0*M4/n^2", th.fi_threshold


# -- bounds --------------------------------------------------------------------------


def cmd_bounds(config: ScanConfig, out_dir: Path) -> int:
    model = load_model(config.model_file)
    lines = [f"model: {config.model_file}"]
    status = 0

    if model.is_point_mass and model.k >= 2:
        try:
            reports = verify_genmixt(model, config.time_grid(), config.quad)
            live = [r for r in reports if r.valid and not r.skipped]
            skipped = sum(r.skipped for r in reports)
            margin = min((r.margin + 2.0 * r.gap_err for r in live), default=math.inf)
            gap_floor = min((r.gap + 2.0 * r.gap_err for r in live), default=math.inf)
            ok = margin >= 0 and gap_floor >= 0
            lines.append(
                f"concentration bound: {len(live)} valid grid points, "
                f"min margin {_fmt(margin)}, min gap {_fmt(gap_floor)} "
                f"{'PASS' if ok else 'FAIL'}"
            )
            if skipped:
                lines.append(f"concentration bound: {skipped} points below the "
                             "quadrature floor skipped")
            status |= 0 if ok else 1
        except CheckFailedError as exc:
            reports = []
            lines.append(f"concentration bound: FAIL ({exc})")
            status = 1
        if "csv" in config.outputs:
            rows = [
                ",".join(
                    (
                        _fmt(r.t),
                        "true" if r.valid else "false",
                        _fmt(r.gap),
                        _fmt(r.bound),
                        _fmt(r.margin),
                    )
                )
                for r in reports
            ]
            (out_dir / "bounds_genmixt.csv").write_text(
                "\n".join(["t,valid,gap,bound,margin"] + rows) + "\n", encoding="utf-8"
            )
    else:
        lines.append("concentration bound: skipped (needs a point-mass mixture, k >= 2)")

    lattice = tail_estimate_lattice(config.quad)
    ok = all(c.lhs <= c.rhs for c in lattice if c.valid)
    lines.append(
        f"tail estimate lattice: {len(lattice)} points, "
        f"{'all lhs <= rhs PASS' if ok else 'violations found FAIL'}"
    )
    status |= 0 if ok else 1
    if "csv" in config.outputs:
        rows = [
            ",".join((_fmt(c.b), _fmt(c.c), _fmt(c.lhs), _fmt(c.rhs), "true" if c.valid else "false"))
            for c in lattice
        ]
        (out_dir / "bounds_log2.csv").write_text(
            "\n".join(["b,c,lhs,rhs,valid"] + rows) + "\n", encoding="utf-8"
        )
    text = "\n".join(lines)
    print(text)
    if "report" in config.outputs:
        (out_dir / "bounds.txt").write_text(text + "\n", encoding="utf-8")
    return status


# -- entry point -----------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatflow-info",
        description="Information functionals of Gaussian mixtures along the heat flow",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("scan", "verify", "thresholds", "bounds"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a key=value config file")
        p.add_argument("--out-dir", default=".", help="directory for output files")
        if name == "scan":
            p.add_argument("--jobs", type=int, default=1, help="parallel workers per grid point")
        if name == "verify":
            p.add_argument(
                "--suite",
                default="all",
                choices=("identities", "inequalities", "derivatives", "all"),
            )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "scan":
            return cmd_scan(config, out_dir, jobs=args.jobs)
        if args.command == "verify":
            return cmd_verify(config, out_dir, suite=args.suite)
        if args.command == "thresholds":
            return cmd_thresholds(config, out_dir)
        return cmd_bounds(config, out_dir)
    except ParseError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (NumericFailureError, ConvergenceFailureError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except HeatflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
