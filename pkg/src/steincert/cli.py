"""Command-line front end.

    steincert indices --alpha 0.5 --gamma 0.5 --n-grid 1e2:1e5
    steincert constants --sigma 1.7
    steincert certify --alpha 0.25,0.5 --n-grid 2000 --output cert.json --plot
    steincert --replay cert.json

Every report embeds the resolved configuration, the generator and the seed,
and no timestamps, so replaying a report's configuration reproduces it byte for
byte. Floats are written at 12 significant digits in both JSON and CSV.
Exit status: 0 success, 1 computation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .certify import CertifyConfig, certify_bounds, optimality_scan
from .constants import constants_pipeline, identity_checks, sigma_scan
from .distributions import GENERATOR_NAME
from .errors import CertError
from .kolmogorov import CurvePolicy, MonteCarlo, k_curve
from .stein import TestFunction, bound_suite
from .triangular_array import ArraySpec, WeightFunction, lin_index, relaxed_index

COMMANDS = ("indices", "distance", "stein-check", "constants", "certify", "optimality")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
POINTS_PER_DECADE = 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing helpers


def parse_number(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise UsageError(f"not a finite number: {text!r}")
    return v


def parse_int(text: str) -> int:
    v = parse_number(text)
    if v != int(v):
        raise UsageError(f"not an integer: {text!r}")
    return int(v)


def parse_grid(text: str, integer: bool = False) -> list:
    """``lo:hi`` (geometric, 4 points per decade, both ends included) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 2:
            raise UsageError(f"grid {text!r}: expected lo:hi")
        lo, hi = parse_number(parts[0]), parse_number(parts[1])
        if not 0 < lo <= hi:
            raise UsageError(f"grid {text!r}: need 0 < lo <= hi")
        count = math.floor(POINTS_PER_DECADE * math.log10(hi / lo) + 1e-9)
        values = [lo * 10 ** (i / POINTS_PER_DECADE) for i in range(count + 1)]
        if values[-1] < hi * (1 - 1e-9):
            values.append(hi)
    else:
        values = [parse_number(t) for t in text.split(",") if t.strip()]
        if not values:
            raise UsageError("empty list")
    if integer:
        out = []
        for v in values:
            k = int(round(v))
            if not out or k != out[-1]:
                out.append(k)
        return out
    return [float(v) for v in values]


def parse_range(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise UsageError(f"range {text!r}: expected lo:hi")
    lo, hi = parse_number(parts[0]), parse_number(parts[1])
    if hi < lo:
        raise UsageError(f"range {text!r}: lo > hi")
    return lo, hi


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    """The resolved inputs of one run. Fields a command does not use stay None."""

    command: str
    array: str | None = None
    alpha: list[float] | None = None
    n_grid: list[int] | None = None
    eps_grid: list[float] | None = None
    gamma: list[float] | None = None
    psi: bool | None = None
    sigma: float | None = None
    sigma_range: list[float] | None = None
    sigma_step: float | None = None
    identities: bool | None = None
    samples: int | None = None
    seed: int | None = None
    level: float | None = None
    method: str | None = None
    kind: str | None = None
    z: list[float] | None = None
    delta: list[float] | None = None
    x_grid: list[float] | None = None
    p: list[float] | None = None
    alpha_grid: list[float] | None = None
    rounded_constant: bool | None = None
    format: str = "json"
    output: str | None = None
    plot: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(obj) - names
        if unknown:
            raise UsageError(f"unknown config fields {sorted(unknown)}")
        if obj.get("command") not in COMMANDS:
            raise UsageError(f"config names no known command: {obj.get('command')!r}")
        return cls(**obj)


def _check_alphas(alphas: Sequence[float]) -> None:
    bad = [a for a in alphas if not 0 < a <= 0.5]
    if bad:
        raise UsageError(f"alpha must lie in (0, 1/2], got {bad}")


def _positive(name: str, value: float) -> None:
    if not value > 0:
        raise UsageError(f"{name} must be positive, got {value}")


def resolve(ns: argparse.Namespace) -> RunConfig:
    """Validate parsed arguments into a RunConfig."""
    cmd = ns.command
    common = {"format": ns.format, "output": ns.output, "plot": ns.plot}
    if ns.plot and not ns.output:
        raise UsageError("--plot needs --output (the figure is written next to the report)")
    if ns.output == "":
        raise UsageError("--output needs a path")

    def array_fields():
        if ns.array == "rademacher":
            return {"array": "rademacher", "alpha": None}
        alphas = parse_grid(ns.alpha)
        _check_alphas(alphas)
        return {"array": "example", "alpha": alphas}

    def mc_fields():
        samples, level = parse_int(ns.samples), parse_number(ns.level)
        _positive("--samples", samples)
        if not 0 < level < 1:
            raise UsageError("--level must lie in (0, 1)")
        return {"samples": samples, "seed": parse_int(ns.seed), "level": level, "method": ns.method}

    def n_grid():
        grid = parse_grid(ns.n_grid, integer=True)
        if grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise UsageError("--n-grid must be increasing positive integers")
        return grid

    if cmd == "indices":
        eps = parse_grid(ns.eps_grid)
        gamma = parse_grid(ns.gamma)
        for v in eps + gamma:
            _positive("epsilon and gamma values", v)
        return RunConfig(cmd, **array_fields(), n_grid=n_grid(), eps_grid=eps, gamma=gamma, psi=ns.psi, **common)
    if cmd == "distance":
        return RunConfig(cmd, **array_fields(), n_grid=n_grid(), **mc_fields(), **common)
    if cmd == "stein-check":
        z = parse_grid(ns.z)
        delta = parse_grid(ns.delta) if ns.kind == "smoothstep" else None
        for d in delta or []:
            _positive("--delta", d)
        x_grid = [parse_number(ns.x_min), parse_number(ns.x_max), parse_number(ns.x_step)]
        if x_grid[1] < x_grid[0]:
            raise UsageError("--x-max below --x-min")
        _positive("--x-step", x_grid[2])
        return RunConfig(cmd, kind=ns.kind, z=z, delta=delta, x_grid=x_grid, **common)
    if cmd == "constants":
        sigma_range = list(parse_range(ns.sigma_range)) if ns.sigma_range else None
        sigma = None if sigma_range else parse_number(ns.sigma)
        step = parse_number(ns.sigma_step) if sigma_range else None
        for v in [sigma] if sigma is not None else sigma_range + [step]:
            _positive("sigma values", v)
        return RunConfig(cmd, sigma=sigma, sigma_range=sigma_range, sigma_step=step, identities=ns.identities, **common)
    if cmd == "certify":
        sigma = parse_number(ns.sigma)
        _positive("--sigma", sigma)
        return RunConfig(cmd, **array_fields(), n_grid=n_grid(), **mc_fields(), sigma=sigma,
                         rounded_constant=ns.rounded_constant, **common)
    if cmd == "optimality":
        p = parse_grid(ns.p)
        if any(v < 0 for v in p):
            raise UsageError("--p values must be >= 0")
        grid = parse_grid(ns.alpha_grid)
        _check_alphas(grid)
        if any(b >= a for a, b in zip(grid, grid[1:])):
            raise UsageError("--alpha-grid must be strictly decreasing")
        return RunConfig(cmd, p=p, alpha_grid=grid, **common)
    raise UsageError(f"unknown command {cmd!r}")


# ---------------------------------------------------------------------------
# dispatch; each handler returns (results, csv rows, summary, plot spec)


def _specs(cfg: RunConfig) -> list[ArraySpec]:
    if cfg.array == "rademacher":
        return [ArraySpec.rademacher()]
    return [ArraySpec.example(a) for a in cfg.alpha]


def _policy(cfg: RunConfig) -> CurvePolicy:
    return CurvePolicy(method=cfg.method, mc=MonteCarlo(samples=cfg.samples, seed=cfg.seed), level=cfg.level)


def _run_indices(cfg: RunConfig):
    results, rows, series, notes = [], [], [], []
    for spec in _specs(cfg):
        reports = [lin_index(spec, cfg.eps_grid, cfg.n_grid)]
        reports += [relaxed_index(spec, WeightFunction.phi(g), cfg.n_grid) for g in cfg.gamma]
        if cfg.psi:
            reports.append(relaxed_index(spec, WeightFunction.psi_half(), cfg.n_grid))
        for rep in reports:
            d = rep.to_dict()
            results.append(d)
            wname = json.dumps(d.get("weight"), sort_keys=True) if d.get("weight") else ""
            for r in rep.finite:
                rows.append({"array": spec.label, "index": rep.index, "weight": wname, "n": r["n"],
                             "epsilon": r.get("epsilon"), "value": r["value"], "closed_form": rep.closed_form})
            if rep.index == "lindeberg":
                for e in cfg.eps_grid:
                    series.append((f"{spec.label} Lin eps={e:g}", list(cfg.n_grid),
                                   [rep.value(n, e) for n in cfg.n_grid]))
            else:
                series.append((f"{spec.label} {rep.weight}", list(cfg.n_grid), [r["value"] for r in rep.finite]))
            cf = "" if rep.closed_form is None else f" (closed form {rep.closed_form:.7g})"
            notes.append(f"{rep.index}={rep.limit_estimate:.7g}{cf}")
    plot = {"xlabel": "n", "ylabel": "finite-n index", "logx": True, "series": series}
    return results, rows, "indices: " + "; ".join(notes), plot


def _run_distance(cfg: RunConfig):
    results, rows, series, notes = [], [], [], []
    for spec in _specs(cfg):
        curve = k_curve(spec, cfg.n_grid, _policy(cfg))
        results.append({"array": spec.summary(), "curve": [r.to_dict() for r in curve]})
        for r in curve:
            rows.append({"array": spec.label, "n": r.n, "method": r.method, "value": r.value,
                         "half_width": r.half_width, "level": r.level, "samples": r.samples,
                         "seed": r.seed, "location": r.location})
        series.append((spec.label, [r.n for r in curve], [r.value for r in curve]))
        notes.append(f"{spec.label} K(n={curve[-1].n})={curve[-1].value:.4g}")
    plot = {"xlabel": "n", "ylabel": "Kolmogorov distance", "logx": True, "logy": True, "series": series}
    return results, rows, "distance: " + "; ".join(notes), plot


def _run_stein(cfg: RunConfig):
    lo, hi, step = cfg.x_grid
    grid = lo + step * np.arange(int(math.floor((hi - lo) / step + 1e-9)) + 1)
    if cfg.kind == "smoothstep":
        hs = [TestFunction.smoothstep(z, d) for z in cfg.z for d in cfg.delta]
    else:
        hs = [TestFunction.indicator(z) for z in cfg.z]
    results, rows = [], []
    for h in hs:
        rep = bound_suite(h, grid)
        results.append(rep.to_dict())
        rows.append({**{f"h.{k}": v for k, v in rep.h.items()}, "sup_f2": rep.sup_f2, "bound_f2": rep.bound_f2,
                     "osc_f1": rep.osc_f1, "pass": rep.passed})
    passed = sum(r["pass"] for r in results)
    return results, rows, f"stein-check: {passed}/{len(results)} test functions within the bounds", None


def _run_constants(cfg: RunConfig):
    results, rows, plot = {}, [], None
    if cfg.sigma_range:
        scan = sigma_scan(cfg.sigma_range[0], cfg.sigma_range[1], cfg.sigma_step)
        best = constants_pipeline(scan.best_sigma)
        results["scan"] = scan.to_dict()
        rows = [{"sigma": s, "c_psi": c} for s, c in scan.table]
        plot = {"xlabel": "sigma", "ylabel": "C_psi(sigma)", "series": [("C_psi", *zip(*scan.table))]}
    else:
        best = constants_pipeline(cfg.sigma)
        rows = [{k: v for k, v in best.to_dict().items() if not isinstance(v, (dict, list))}]
    results["constants"] = best.to_dict()
    summary = f"constants: sigma={best.sigma:g} R={best.R:.6f} c_psi={best.c_psi:.6g} c_half={best.c_half:.6g} c_tilde={best.c_tilde:.6g}"
    if cfg.identities:
        rep = identity_checks()
        results["identities"] = rep.to_dict()
        summary += f"; identities {'pass' if rep.passed else 'FAIL'}"
        if not rep.passed:
            raise _Failed(results, rows, summary + f" ({[c['name'] for c in rep.failures()]})", plot)
    return results, rows, summary, plot


def _run_certify(cfg: RunConfig):
    ccfg = CertifyConfig(n_grid=tuple(cfg.n_grid), samples=cfg.samples, seed=cfg.seed, level=cfg.level,
                         method=cfg.method, sigma=cfg.sigma, rounded_constant=cfg.rounded_constant)
    results, rows, series, notes = [], [], [], []
    for spec in _specs(cfg):
        cert = certify_bounds(spec, ccfg)
        results.append(cert.to_dict())
        for r in cert.empirical:
            rows.append({"array": spec.label, "n": r.n, "method": r.method, "value": r.value,
                         "half_width": r.half_width, "lower": cert.lower, "upper": cert.upper,
                         "verdict": cert.verdict})
        ns = [r.n for r in cert.empirical]
        series.append((f"{spec.label} K", ns, [r.value for r in cert.empirical]))
        series.append((f"{spec.label} lower", ns, [cert.lower] * len(ns)))
        notes.append(f"{spec.label}: {cert.lower:.5g} <= K <= {cert.upper:.5g} -> {cert.verdict}")
    plot = {"xlabel": "n", "ylabel": "Kolmogorov distance", "logx": True, "logy": True, "series": series}
    summary = "certify: " + "; ".join(notes)
    if any(r["verdict"] == "inconsistent" for r in results):
        raise _Failed(results, rows, summary, plot)
    return results, rows, summary, plot


def _run_optimality(cfg: RunConfig):
    results, rows, series = [], [], []
    c_tilde = constants_pipeline(1.7).c_tilde
    for p in cfg.p:
        table = optimality_scan(p, cfg.alpha_grid, c_tilde)
        results.append(table.to_dict())
        rows += [{"p": p, **r} for r in table.rows]
        series.append((f"p={p:g}", [r["alpha"] for r in table.rows], [r["ratio"] for r in table.rows]))
    growth = ", ".join(f"p={t['p']:g}: " + "/".join(f"{g:.3g}" for g in t["growth_per_decade"]) for t in results)
    plot = {"xlabel": "alpha", "ylabel": "lower / alpha^(1+p)", "logx": True, "logy": True, "series": series}
    return results, rows, f"optimality: ratio growth per decade {growth}", plot


HANDLERS = {
    "indices": _run_indices,
    "distance": _run_distance,
    "stein-check": _run_stein,
    "constants": _run_constants,
    "certify": _run_certify,
    "optimality": _run_optimality,
}


class _Failed(Exception):
    """A run that completed but whose checks failed; the report is still written."""

    def __init__(self, results, rows, summary, plot):
        super().__init__(summary)
        self.payload = (results, rows, summary, plot)


# ---------------------------------------------------------------------------
# output


def round12(obj):
    """Floats to 12 significant digits, recursively; NaN and infinities to None."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(f"{v:.12g}") if math.isfinite(v) else None
    if isinstance(obj, dict):
        return {str(k): round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round12(v) for v in obj]
    return obj


def build_report(cfg: RunConfig, results, summary: str, status: str) -> dict:
    return round12({
        "command": cfg.command,
        "status": status,
        "summary": summary,
        "generator": GENERATOR_NAME,
        "seed": cfg.seed,
        "config": cfg.to_dict(),
        "results": results,
    })


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def _cell(v) -> str:
    v = round12(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v) if isinstance(v, float) else str(v)


def render_csv(report: dict, rows: list[dict]) -> str:
    """One table; the first line is a comment carrying the report header for replay."""
    head = {k: report[k] for k in ("command", "status", "summary", "generator", "seed", "config")}
    buf = io.StringIO()
    buf.write("# report " + json.dumps(head) + "\n")
    columns: list[str] = []
    for r in rows:
        columns += [k for k in r if k not in columns]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def write_plot(path: Path, plot: dict) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "steincert"
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, xs, ys in plot["series"]:
        ax.plot(list(xs), list(ys), marker="o", markersize=3, label=label)
    if plot.get("logx"):
        ax.set_xscale("log")
    if plot.get("logy"):
        ax.set_yscale("log")
    ax.set_xlabel(plot["xlabel"])
    ax.set_ylabel(plot["ylabel"])
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def load_report_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read report {path!r}: {exc}") from None
    try:
        if text.startswith("# report "):
            head = json.loads(text.splitlines()[0][len("# report "):])
        else:
            head = json.loads(text)
        return RunConfig.from_dict(head["config"])
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{path!r} is not a steincert report: {exc}") from None


# ---------------------------------------------------------------------------
# argument parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steincert",
        description="Lindeberg-index bounds on the limiting Kolmogorov distance of triangular arrays.",
    )
    parser.add_argument("--replay", metavar="REPORT", help="re-run the configuration embedded in a report")
    parser.add_argument("--replay-output", metavar="PATH", help="where the replayed report goes (default stdout)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def common(p):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--output", metavar="PATH", help="report file (default stdout)")
        p.add_argument("--plot", action="store_true", help="also write an SVG figure next to --output")

    def array(p, alpha):
        p.add_argument("--array", choices=("example", "rademacher"), default="example")
        p.add_argument("--alpha", default=alpha, help="alpha list for the example family, values in (0, 1/2]")

    def mc(p):
        p.add_argument("--samples", default="1e6", help="Monte Carlo sample count")
        p.add_argument("--seed", default="0")
        p.add_argument("--level", default="0.99", help="confidence level of the DKW band")
        p.add_argument("--method", choices=("auto", "exact", "mc"), default="auto")

    p = sub.add_parser("indices", help="finite-n Lindeberg and relaxed Lindeberg indices")
    array(p, "0.25,0.5")
    p.add_argument("--n-grid", default="1e2:1e5")
    p.add_argument("--eps-grid", default="0.2,0.1,0.05,0.02,0.01")
    p.add_argument("--gamma", default="0.5")
    p.add_argument("--psi", action="store_true", help="also use the weight psi_{1/2}")
    common(p)

    p = sub.add_parser("distance", help="Kolmogorov distance of row sums to N(0, 1)")
    array(p, "0.5")
    p.add_argument("--n-grid", default="8,100,1000")
    mc(p)
    common(p)

    p = sub.add_parser("stein-check", help="Stein solution bounds on a grid")
    p.add_argument("--kind", choices=("smoothstep", "indicator"), default="smoothstep")
    p.add_argument("--z", default="0", help="location list; write negatives as --z=-1,0")
    p.add_argument("--delta", default="1")
    p.add_argument("--x-min", default="-8")
    p.add_argument("--x-max", default="8")
    p.add_argument("--x-step", default="0.01")
    common(p)

    p = sub.add_parser("constants", help="C_psi, C_1/2 and C~_1/2 for the Gaussian smoothing")
    p.add_argument("--sigma", default="1.7")
    p.add_argument("--sigma-range", metavar="LO:HI", help="scan sigma over [LO, HI] instead")
    p.add_argument("--sigma-step", default="0.01")
    p.add_argument("--identities", action="store_true", help="also run the identity checks")
    common(p)

    p = sub.add_parser("certify", help="two-sided bound certificate against a K curve")
    array(p, "0.25,0.5")
    p.add_argument("--n-grid", default="250,500,1000,2000")
    p.add_argument("--sigma", default="1.7")
    p.add_argument("--rounded-constant", action="store_true", help="use C~_1/2 = 0.033")
    mc(p)
    common(p)

    p = sub.add_parser("optimality", help="ratio lower(alpha) / alpha^(1+p) as alpha decreases")
    p.add_argument("--p", default="1")
    p.add_argument("--alpha-grid", default="0.1,0.01,0.001")
    common(p)
    return parser


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def execute(cfg: RunConfig, output: str | None) -> int:
    status, code = "ok", EXIT_OK
    try:
        results, rows, summary, plot = HANDLERS[cfg.command](cfg)
    except _Failed as exc:
        (results, rows, summary, plot), status, code = exc.payload, "failed", EXIT_FAIL
    report = build_report(cfg, results, summary, status)
    text = render_csv(report, rows) if cfg.format == "csv" else render_json(report)
    _emit(text, output)
    print(summary, file=sys.stderr)
    if cfg.plot and output:
        if plot is None:
            print(f"no figure for {cfg.command}", file=sys.stderr)
        else:
            try:
                write_plot(Path(output).with_suffix(".svg"), plot)
            except Exception as exc:  # figures are optional
                print(f"plot skipped: {exc}", file=sys.stderr)
    return code


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        if ns.replay:
            if ns.command:
                raise UsageError("--replay takes no subcommand")
            cfg = load_report_config(ns.replay)
            output = ns.replay_output
        elif ns.command:
            cfg = resolve(ns)
            output = cfg.output
        else:
            raise UsageError("name a subcommand or --replay")
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"steincert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return execute(cfg, output)
    except (CertError, ValueError, OSError) as exc:
        print(f"steincert: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
