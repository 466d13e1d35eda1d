"""Command-line front end.

Subcommands
-----------
capacity    figure-2 / figure-3 sweeps or a single parameter point
validate    closed forms against the quadrature and Monte Carlo oracles
simulate    disorder ensemble of the microscopic waveguide
separatrix  A/B phase boundary in the (l/L, P/NP0) plane

Settings come from defaults, then an optional ``--config`` file of
``key=value`` lines, then command-line flags. Every output starts with the
resolved settings (``#@ key=value`` lines in CSV, a ``config`` object in
JSON); passing an output file back as ``--config`` reproduces it. Exit
codes: 0 success, 1 failed check or ensemble failure, 2 usage error.
"""

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import (
    c0_reference,
    c_heterodyne_avg,
    c_holevo_avg,
    c_holevo_noamp,
    c_infinity,
    holevo_avg_from_moments,
)
from .errors import DomainError, LasingInstabilityError, ThresholdError
from .medium import THRESHOLD, MediumParams, diffusion_averages, r_eff
from .oracle import RngSpec, mc_average_capacity, mutual_info_gaussian, quad_average_capacity, quad_average_moments
from .phase import SCAN_RANGE, region_of, separatrix_curve, small_power_asymptote
from .wgsim import LatticeSpec, run_ensemble

# settings that change how a run executes but never what it writes
EXECUTION_ONLY = ("out", "summary", "workers", "config")


class UsageError(Exception):
    pass


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).replace(" ", "").split(",") if x]


def _bool(text):
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


# name -> (type, default, help) per subcommand
COMMON = {
    "seed": (int, 0, "master seed"),
    "format": (str, "csv", "output format: csv or json"),
    "tol": (float, 1e-10, "absolute tolerance for quadratures"),
    "samples": (int, 1000, "Monte Carlo / ensemble sample count"),
    "grid_min": (float, None, "grid lower end"),
    "grid_max": (float, None, "grid upper end"),
    "grid_points": (int, None, "number of grid points"),
    "grid_scale": (str, None, "log or linear"),
    "workers": (int, 1, "worker threads (never changes results)"),
}

PARAMS = {
    "capacity": {
        "mode": (str, "figure2", "figure2, figure3 or point"),
        "power_per_mode": (float, 1.0, "P/(N P0) for figure3 / point mode"),
        "mfp_ratios": (_floats, [0.05, 0.14], "l/L values for figure3"),
        "n_modes": (int, 10, "number of modes N"),
        "length_ratio": (float, None, "L/l_a for point mode"),
        "mfp_ratio": (float, None, "l/L for point mode"),
        "power_per_p0": (float, None, "P/P0 for point mode (overrides power_per_mode)"),
        "length": (float, None, "raw L for point mode"),
        "mfp": (float, None, "raw l for point mode"),
        "amp_length": (float, None, "raw l_a for point mode (inf = no gain)"),
    },
    "validate": {
        "perturb": (float, 0.0, argparse.SUPPRESS),
        "samples": (int, 1_000_000, "Monte Carlo samples per check"),
    },
    "simulate": {
        "width": (int, 10, "transverse sites"),
        "length": (int, 86, "longitudinal sites"),
        "disorder": (float, 1.0, "disorder strength W"),
        "gain": (float, 0.0, "imaginary on-site potential"),
        "energy": (float, 0.0, "energy in units of the hopping"),
        "alpha": (int, None, "input mode (zero-based, default middle)"),
        "beta": (int, None, "output mode (zero-based, default middle)"),
        "summary": (str, None, "summary JSON path (default: --out with .json)"),
    },
    "separatrix": {
        "mfp_grid": (_floats, None, "explicit comma-separated l/L values"),
        "power_max": (float, SCAN_RANGE[1], "upper end of the log-power scan"),
        "asymptote": (_bool, False, "add the small-power asymptote column"),
    },
}

GRID_DEFAULTS = {
    ("capacity", "figure2"): (1e-3, 1e3, 61, "log"),
    ("capacity", "figure3"): (0.0, THRESHOLD - 1e-4, 101, "linear"),
    ("separatrix", None): (0.02, 0.135, 12, "linear"),
}


def read_config(path):
    """key=value settings from a config file or from a previous output.

    In a plain config file '#' starts a comment. If the file holds ``#@``
    lines (an output header) only those are read.
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    header = [ln[2:].strip() for ln in lines if ln.startswith("#@")]
    if not header and text.lstrip().startswith("{"):
        return {k: v for k, v in json.loads(text).get("config", {}).items()}
    out = {}
    source = header if header else lines
    for ln in source:
        ln = ln.split("#", 1)[0].strip() if not header else ln
        if not ln:
            continue
        if "=" not in ln:
            raise UsageError(f"{path}: expected key=value, got {ln!r}")
        key, value = ln.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def resolve(command, args):
    spec = {**COMMON, **PARAMS[command]}
    values = {k: v[1] for k, v in spec.items()}
    if args.get("config"):
        for key, raw in read_config(args["config"]).items():
            if key in ("command", "version"):
                continue
            if key not in spec:
                raise UsageError(f"unknown setting {key!r} for {command}")
            values[key] = None if raw is None or raw in ("None", "") else spec[key][0](raw)
    for key in spec:
        if args.get(key) is not None:
            values[key] = args[key]
    for key in ("out", "config"):
        values[key] = args.get(key)
    if values["format"] not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    return values


def _grid(cfg, key):
    lo, hi, n, scale = GRID_DEFAULTS[key]
    lo = lo if cfg["grid_min"] is None else cfg["grid_min"]
    hi = hi if cfg["grid_max"] is None else cfg["grid_max"]
    n = n if cfg["grid_points"] is None else cfg["grid_points"]
    scale = scale if cfg["grid_scale"] is None else cfg["grid_scale"]
    if n < 1:
        raise UsageError("grid must contain at least one point (grid_points >= 1)")
    if scale == "log":
        if not 0 < lo <= hi:
            raise UsageError("log grid needs 0 < grid_min <= grid_max")
        return np.logspace(math.log10(lo), math.log10(hi), n)
    if scale == "linear":
        if not lo <= hi:
            raise UsageError("grid needs grid_min <= grid_max")
        return np.linspace(lo, hi, n)
    raise UsageError("grid_scale must be log or linear")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.8e}"
    return str(v)


def _record(command, cfg):
    rec = {"command": command, "version": __version__}
    for k in sorted(cfg):
        if k in EXECUTION_ONLY:
            continue
        v = cfg[k]
        rec[k] = ",".join(repr(float(x)) for x in v) if isinstance(v, list) else v
    return rec


def render_table(command, cfg, columns, rows, extra=None):
    rec = _record(command, cfg)
    if cfg["format"] == "json":
        doc = {"config": {k: v for k, v in rec.items() if k not in ("command", "version")}}
        doc.update(
            command=command,
            version=__version__,
            columns=columns,
            rows=[dict(zip(columns, (_json_value(v) for v in row))) for row in rows],
        )
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    buf.write(f"# ampcap {__version__} {command}\n")
    for k, v in rec.items():
        if k in ("command", "version"):
            continue
        buf.write(f"#@ {k}={'' if v is None else v}\n")
    if extra:
        for k in sorted(extra):
            buf.write(f"# {k}: {extra[k]}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _emit(text, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- capacity


def _point_params(cfg):
    n = cfg["n_modes"]
    if cfg["length"] is not None or cfg["mfp"] is not None or cfg["amp_length"] is not None:
        if None in (cfg["length"], cfg["mfp"], cfg["amp_length"]):
            raise UsageError("raw lengths need all of --length, --mfp and --amp-length")
        power = cfg["power_per_p0"] if cfg["power_per_p0"] is not None else cfg["power_per_mode"] * n
        return MediumParams.from_lengths(n, cfg["length"], cfg["mfp"], cfg["amp_length"], power)
    if cfg["length_ratio"] is None or cfg["mfp_ratio"] is None:
        raise UsageError("point mode needs --length-ratio and --mfp-ratio (or raw lengths)")
    if cfg["power_per_p0"] is not None:
        return MediumParams(n, cfg["length_ratio"], cfg["mfp_ratio"], cfg["power_per_p0"])
    return MediumParams.from_power_per_mode(n, cfg["length_ratio"], cfg["mfp_ratio"], cfg["power_per_mode"])


def cmd_capacity(cfg):
    mode = cfg["mode"]
    if mode == "figure2":
        rows = [(r, c_heterodyne_avg(r).bits, c0_reference(r).bits) for r in _grid(cfg, ("capacity", "figure2"))]
        return 0, render_table("capacity", cfg, ["r_eff", "C", "C0"], rows)
    if mode == "figure3":
        grid = _grid(cfg, ("capacity", "figure3"))
        if grid.min() < 0 or grid.max() >= THRESHOLD:
            raise UsageError("figure3 length_ratio grid must lie in [0, pi)")
        c_inf = c_infinity(cfg["power_per_mode"]).bits
        rows = []
        for m in cfg["mfp_ratios"]:
            base = MediumParams.from_power_per_mode(cfg["n_modes"], 0.0, m, cfg["power_per_mode"])
            for lam in grid:
                p = base.with_length_ratio(float(lam))
                het = c_heterodyne_avg(r_eff(p)).bits
                if lam == 0.0:
                    hol = c_holevo_noamp(diffusion_averages(p).tau_bar, p.power_per_p0).bits
                else:
                    hol = c_holevo_avg(p).bits
                rows.append((float(lam), m, het, hol, c_inf))
        cols = ["length_ratio", "mfp_ratio", "C_heterodyne", "C_holevo", "C_infinity"]
        return 0, render_table("capacity", cfg, cols, rows)
    if mode == "point":
        p = _point_params(cfg)
        reff = r_eff(p)
        row = [p.n_modes, p.length_ratio, p.mfp_ratio, p.power_per_p0, reff]
        if p.length_ratio < THRESHOLD:
            avg = diffusion_averages(p)
            hol = c_holevo_avg(p).bits if p.length_ratio > 0 else c_holevo_noamp(avg.tau_bar, p.power_per_p0).bits
            row += [avg.tau_bar, avg.sigma_bar, hol]
        else:
            row += [math.inf, math.inf, c_infinity(p.power_per_mode).bits]
        row += [
            c_heterodyne_avg(reff).bits,
            c0_reference(reff).bits,
            c_infinity(p.power_per_mode).bits,
            region_of(p),
            p.is_diffusive,
        ]
        cols = [
            "n_modes", "length_ratio", "mfp_ratio", "power_per_p0", "r_eff", "tau_bar", "sigma_bar",
            "C_holevo", "C_heterodyne", "C0", "C_infinity", "region", "diffusive",
        ]
        return 0, render_table("capacity", cfg, cols, [row])
    raise UsageError(f"unknown capacity mode {mode!r}")


# ---------------------------------------------------------------- validate

VALIDATION_GRID_MFP = (0.01, 0.05, 0.14)
VALIDATION_GRID_POWER = (0.1, 1.0, 10.0)
LOW_POWER_SAMPLES = 1000


def validation_grid(n_modes=10):
    """20 medium points spanning L/l_a in [0.1, 3.1], three l/L and three P/NP0."""
    out = []
    for i, lam in enumerate(np.linspace(0.1, 3.1, 20)):
        m = VALIDATION_GRID_MFP[i % 3]
        x = VALIDATION_GRID_POWER[(i // 3) % 3]
        out.append(MediumParams.from_power_per_mode(n_modes, float(lam), m, x))
    return out


def run_validation(cfg):
    """List of (check, value, reference, deviation, tolerance, passed, note)."""
    scale = 1.0 + cfg["perturb"]
    tol = cfg["tol"]
    n = cfg["samples"]
    workers = cfg["workers"]
    low_power = n < LOW_POWER_SAMPLES
    n_sigma = 6.0 if low_power else 4.0
    mc_note = "low-power: band widened to 6 std errors" if low_power else ""
    checks = []

    def add(name, value, ref, allowed, note=""):
        dev = abs(value - ref)
        checks.append((name, value, ref, dev, allowed, dev <= allowed, note))

    for r in np.logspace(-6, 6, 200):
        ref = c_heterodyne_avg(r).bits * scale
        q = quad_average_moments("heterodyne", r, 1.0, abs_tol=min(tol, 1e-10)).bits
        add(f"heterodyne_quad r_eff={r:.4e}", q, ref, max(1e-8 * ref, 1e-10))

    for sigma_bar in (1.01, 1.1, 2.0, 10.0, 100.0):
        for a in (0.01, 1.0, 100.0):
            ref = holevo_avg_from_moments(a, sigma_bar) * scale
            q = quad_average_moments("holevo", a, sigma_bar, abs_tol=min(tol, 1e-12) * a).bits
            add(f"holevo_quad sigma_bar={sigma_bar:g} signal={a:g}", q, ref, 1e-8 * ref)

    grid = validation_grid()
    for p in grid:
        ref_h = c_heterodyne_avg(r_eff(p)).bits * scale
        ref_v = c_holevo_avg(p).bits * scale
        tag = f"L/la={p.length_ratio:.4f} l/L={p.mfp_ratio:g} P/NP0={p.power_per_mode:g}"
        qh = quad_average_capacity("heterodyne", p, abs_tol=min(tol, 1e-10)).bits
        qv = quad_average_capacity("holevo", p, abs_tol=min(tol, 1e-10)).bits
        add(f"grid_quad_heterodyne {tag}", qh, ref_h, max(1e-8 * ref_h, 1e-10))
        add(f"grid_quad_holevo {tag}", qv, ref_v, max(1e-8 * ref_v, 1e-10))

    mc_hits = []
    for i, p in enumerate(grid):
        tag = f"L/la={p.length_ratio:.4f} l/L={p.mfp_ratio:g} P/NP0={p.power_per_mode:g}"
        for j, (kind, ref) in enumerate(
            (("heterodyne", c_heterodyne_avg(r_eff(p)).bits), ("holevo", c_holevo_avg(p).bits))
        ):
            est = mc_average_capacity(kind, p, n, RngSpec(cfg["seed"], 2 * i + j), workers=workers)
            ref *= scale
            band = n_sigma * est.std_error
            hit = abs(est.mean - ref) <= band
            mc_hits.append(hit)
            checks.append((f"mc_{kind} {tag}", est.mean, ref, abs(est.mean - ref), band, None, mc_note))
    frac = sum(mc_hits) / len(mc_hits)
    checks.append(("mc_grid_coverage", frac, 0.95, max(0.0, 0.95 - frac), 0.0, frac >= 0.95, mc_note))

    for k, r in enumerate((0.1, 1.0, 3.0, 10.0)):
        est = mutual_info_gaussian(r, n, RngSpec(cfg["seed"], 1000 + k), workers=workers)
        ref = math.log2(1.0 + r) * scale
        band = n_sigma * est.std_error
        add(f"mutual_info r={r:g}", est.mean, ref, band, mc_note)
    # MC rows only count through the coverage line
    return [(c[0], c[1], c[2], c[3], c[4], True if c[5] is None else c[5], c[6]) for c in checks], [
        c[0] for c in checks if c[5] is None
    ]


def cmd_validate(cfg):
    checks, informative = run_validation(cfg)
    rows = []
    failed = 0
    for name, value, ref, dev, allowed, passed, note in checks:
        if name in informative:
            status = "info"
        else:
            status = "pass" if passed else "fail"
            failed += not passed
        rows.append((name, value, ref, dev, allowed, status, note))
    cols = ["check", "value", "reference", "deviation", "tolerance", "status", "note"]
    extra = {"failed_checks": failed, "total_checks": len(rows)}
    return (1 if failed else 0), render_table("validate", cfg, cols, rows, extra)


# ---------------------------------------------------------------- simulate


def cmd_simulate(cfg):
    spec = LatticeSpec(
        width=cfg["width"],
        length=cfg["length"],
        disorder_strength=cfg["disorder"],
        gain=cfg["gain"],
        energy=cfg["energy"],
        seed=cfg["seed"],
    )
    stats = run_ensemble(spec, cfg["samples"], alpha=cfg["alpha"], beta=cfg["beta"], workers=cfg["workers"])
    summary = stats.summary()
    rec = _record("simulate", cfg)
    doc = {"config": {k: v for k, v in rec.items() if k not in ("command", "version")}}
    doc.update(command="simulate", version=__version__, summary=summary)
    summary_text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if cfg["format"] == "json":
        return 0, summary_text, None
    rows = [
        (i, stats.tau_samples[i], stats.sigma_samples[i], stats.min_eig_samples[i], spec.seed)
        for i in range(stats.n_samples)
    ]
    table = render_table("simulate", cfg, ["sample_index", "tau", "sigma", "min_eig", "seed"], rows)
    return 0, table, summary_text


# ---------------------------------------------------------------- separatrix


def cmd_separatrix(cfg):
    grid = cfg["mfp_grid"] if cfg["mfp_grid"] else list(_grid(cfg, ("separatrix", None)))
    if not grid:
        raise UsageError("empty l/L grid")
    if min(grid) <= 0:
        raise UsageError("l/L values must be positive")
    points = separatrix_curve(grid, power_range=(SCAN_RANGE[0], cfg["power_max"]))
    cols = ["mfp_ratio", "power_per_mode", "residual", "branch_info"]
    if cfg["asymptote"]:
        cols.append("asymptote")
    rows = []
    for pt in points:
        row = [pt.mfp_ratio, pt.power_per_mode, pt.residual, pt.branch_info]
        if cfg["asymptote"]:
            row.append(small_power_asymptote(pt.mfp_ratio))
        rows.append(row)
    return 0, render_table("separatrix", cfg, cols, rows)


# ---------------------------------------------------------------- parser


def build_parser():
    parser = argparse.ArgumentParser(prog="ampcap", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"ampcap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in PARAMS:
        sp = sub.add_parser(command)
        sp.add_argument("--config", help="key=value settings file (or a previous output)")
        sp.add_argument("--out", help="output path (default stdout)")
        spec = {**COMMON, **PARAMS[command]}
        for key, (typ, default, help_text) in spec.items():
            flag = "--" + key.replace("_", "-")
            if typ is _bool:
                sp.add_argument(flag, dest=key, nargs="?", const=True, type=_bool, default=None, help=help_text)
            else:
                sp.add_argument(flag, dest=key, type=typ, default=None, help=help_text)
    return parser


COMMANDS = {
    "capacity": cmd_capacity,
    "validate": cmd_validate,
    "separatrix": cmd_separatrix,
}


def main(argv=None):
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    try:
        cfg = resolve(command, args)
        if command == "simulate":
            try:
                status, text, summary = cmd_simulate(cfg)
            except LasingInstabilityError as exc:
                print(f"ampcap: lasing instability: {exc}", file=sys.stderr)
                return 1
            _emit(text, cfg["out"])
            if summary is not None:
                if cfg["summary"]:
                    Path(cfg["summary"]).write_text(summary)
                elif cfg["out"]:
                    Path(cfg["out"]).with_suffix(".json").write_text(summary)
            return status
        status, text = COMMANDS[command](cfg)
    except (UsageError, DomainError, ThresholdError) as exc:
        print(f"ampcap {command}: {exc}", file=sys.stderr)
        return 2
    _emit(text, cfg["out"])
    return status


if __name__ == "__main__":
    sys.exit(main())
