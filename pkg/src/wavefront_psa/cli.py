"""Command line entry point ``wavefront-psa``.

Subcommands: ``check-model``, ``riemann``, ``simulate``, ``temple``,
``blowup`` and ``compare-fv``. A TOML file given with ``--config`` supplies
``[model]``, ``[scenario]``, ``[riemann]`` and ``[fv]`` tables; flags
override file values. Exit status 0 on success, 2 on invalid input, 3 when
a run aborts numerically.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import fronttrack, fvref, scenario as scn
from .model import DerivedFunctions, ModelError, check_hypotheses, functions_for, model_from_mapping
from .riemann import RiemannError, solve_boundary_rp

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SUBCOMMANDS = ("check-model", "riemann", "simulate", "temple", "blowup", "compare-fv")
EXIT_OK, EXIT_INVALID, EXIT_ABORT = 0, 2, 3

DEFAULT_MODEL = {"kind": "inert-convex-quadratic", "a": 1.0, "b": 0.5}
SCENARIO_DEFAULTS = {
    "c_lo": 0.2, "c_hi": 0.8, "u0": 1.0, "x_inf": 1.0, "ratio": 0.97, "n_pairs": 6,
    "delta": 5e-3, "t_max": 10.0, "x_stop": None, "n_list": None,
}
RIEMANN_DEFAULTS = {"c0": 0.8, "c_plus": 0.2, "u_plus": 1.0}
FV_DEFAULTS = {"dt": 1e-3, "x_slice": 1.0, "t_range": None, "t_max": 4.0}
OPTION_DEFAULTS = {"tolerance": 1e-12, "max_events": 10**7, "grid_nt": 50, "grid_nx": 50}
SECTIONS = {"model": None, "scenario": SCENARIO_DEFAULTS, "riemann": RIEMANN_DEFAULTS,
            "fv": FV_DEFAULTS, "options": OPTION_DEFAULTS}


class ConfigError(ValueError):
    """Bad configuration file or flag value."""


@dataclass
class RunPlan:
    subcommand: str
    model: dict
    scenario: dict
    riemann: dict
    fv: dict
    options: dict
    out_dir: str
    explicit: set = field(default_factory=set)


# -- configuration ---------------------------------------------------------------


def _load_toml(path):
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        # the message carries "(at line L, column C)"
        raise ConfigError(f"{path}: TOML parse error: {exc}") from None


def _positive(name, v):
    if not (isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) and v > 0):
        raise ConfigError(f"{name} must be a positive number, got {v!r}")
    return v


def parse_config(path: str | None, overrides: dict | None = None, subcommand: str = "simulate") -> RunPlan:
    """Merge defaults, the TOML file at ``path`` and flag ``overrides`` into a checked plan.

    ``overrides`` maps ``"section.key"`` to a value; ``None`` values are ignored.
    """
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    raw = _load_toml(path) if path else {}
    unknown = sorted(set(raw) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"unknown config table(s): {', '.join(unknown)}")
    explicit = set()
    merged = {}
    for sec, defaults in SECTIONS.items():
        block = raw.get(sec, {})
        if not isinstance(block, dict):
            raise ConfigError(f"[{sec}] must be a table")
        if defaults is None:
            merged[sec] = dict(block) if block else dict(DEFAULT_MODEL)
            continue
        bad = sorted(set(block) - set(defaults))
        if bad:
            raise ConfigError(f"unknown key(s) in [{sec}]: {', '.join(bad)}")
        merged[sec] = {**defaults, **block}
        explicit.update(f"{sec}.{k}" for k in block)
    # a new kind discards the parameters of the configured one
    ordered = sorted((overrides or {}).items(), key=lambda kv: kv[0] != "model.kind")
    for key, value in ordered:
        if value is None or key == "out_dir":
            continue
        sec, _, k = key.partition(".")
        if sec == "model":
            if k == "kind" and value != merged["model"].get("kind"):
                merged["model"] = {}
            merged["model"][k] = value
        else:
            if k not in SECTIONS[sec]:
                raise ConfigError(f"unknown key {k!r} for [{sec}]")
            merged[sec][k] = value
        explicit.add(key)

    # model keys are checked by the model factory, which names the offending key
    try:
        model_from_mapping(merged["model"])
    except ModelError as exc:
        raise ConfigError(f"[model]: {exc}") from None

    s = merged["scenario"]
    for k in ("u0", "x_inf", "delta", "t_max"):
        _positive(f"scenario.{k}", s[k])
    if not 0.0 < s["c_lo"] < s["c_hi"] < 1.0:
        raise ConfigError("scenario needs 0 < c_lo < c_hi < 1")
    if not 0.0 < s["ratio"] < 1.0:
        raise ConfigError("scenario.ratio must lie in (0, 1)")
    if not isinstance(s["n_pairs"], int) or s["n_pairs"] < 1:
        raise ConfigError("scenario.n_pairs must be a positive integer")
    if s["x_stop"] is not None:
        _positive("scenario.x_stop", s["x_stop"])
    if s["n_list"] is not None:
        if not (isinstance(s["n_list"], list) and s["n_list"]
                and all(isinstance(n, int) and n >= 1 for n in s["n_list"])):
            raise ConfigError("scenario.n_list must be a non-empty list of positive integers")
    r = merged["riemann"]
    for k in ("c0", "c_plus"):
        if not 0.0 <= r[k] <= 1.0:
            raise ConfigError(f"riemann.{k} must lie in [0, 1]")
    _positive("riemann.u_plus", r["u_plus"])
    f = merged["fv"]
    _positive("fv.dt", f["dt"])
    _positive("fv.x_slice", f["x_slice"])
    _positive("fv.t_max", f["t_max"])
    if f["t_range"] is not None:
        tr = f["t_range"]
        if not (isinstance(tr, (list, tuple)) and len(tr) == 2 and 0.0 <= tr[0] < tr[1] <= f["t_max"]):
            raise ConfigError("fv.t_range must be [t_lo, t_hi] inside [0, fv.t_max]")
    o = merged["options"]
    _positive("options.tolerance", o["tolerance"])
    for k in ("max_events", "grid_nt", "grid_nx"):
        if not isinstance(o[k], int) or o[k] < 1:
            raise ConfigError(f"options.{k} must be a positive integer")
    out_dir = (overrides or {}).get("out_dir") or os.environ.get("WAVEFRONT_OUT") or "."
    return RunPlan(subcommand, merged["model"], s, r, f, o, out_dir, explicit)


# -- output ------------------------------------------------------------------------


def fmt(v) -> str:
    """17 significant digits for floats; plain text otherwise."""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = (f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items())
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, float):
        return format(obj, ".17g")
    return json.dumps(obj)


def dumps(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(_jsonable(obj), 2, 0) + "\n"


def write_atomic(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _ids(seq):
    return " ".join(str(i) for i in seq)


# -- subcommands ---------------------------------------------------------------------


def _fns(plan: RunPlan) -> DerivedFunctions:
    model = model_from_mapping(plan.model)
    tol = plan.options["tolerance"]
    return functions_for(model) if tol == 1e-12 else DerivedFunctions(model, tol=tol)


def _scenario(plan: RunPlan, fns, n_pairs=None, T=None):
    s = plan.scenario
    N = n_pairs or s["n_pairs"]
    xs = scn.geometric_points(s["x_inf"], s["ratio"], N)
    x_stop = s["x_stop"] if s["x_stop"] is not None else s["x_inf"] * (1.0 - s["ratio"] ** (2 * N))
    return scn.build_alternating(fns.model, s["c_lo"], s["c_hi"], s["u0"], xs,
                                 T if T is not None else s["t_max"], x_stop, s["delta"])


def cmd_check_model(plan: RunPlan, out):
    report = check_hypotheses(_fns(plan))
    out.write(dumps({"model": plan.model, **report.to_dict()}))


def cmd_riemann(plan: RunPlan, out):
    r = plan.riemann
    fan = solve_boundary_rp(_fns(plan), r["c0"], r["c_plus"], r["u_plus"])
    out.write(dumps(fan.to_dict()))


def cmd_temple(plan: RunPlan, out):
    out.write(dumps(scn.classify_temple(_fns(plan)).to_dict()))


def write_solution(sol, out_dir: str, grid_nt: int = 50, grid_nx: int = 50):
    fr = sol.fronts
    kinds = {v: k for k, v in fronttrack.KIND_CODES.items()}
    rows = []
    for i in range(len(fr["id"])):
        kind = kinds[int(fr["kind"][i])]
        if kind == fronttrack.CONTACT:
            strength = abs(fr["u_above"][i] - fr["u_below"][i]) / max(fr["u_above"][i], fr["u_below"][i])
        else:
            strength = abs(fr["c_above"][i] - fr["c_below"][i])
        rows.append((int(fr["id"][i]), kind, fr["x0"][i], fr["t0"][i], fr["x1"][i], fr["t1"][i],
                     fr["c_below"][i], fr["c_above"][i], fr["u_below"][i], fr["u_above"][i],
                     strength, _ids(fr["lineage"][i])))
    write_atomic(os.path.join(out_dir, "fronts.csv"), csv_text(
        ("id", "kind", "x0", "t0", "x1", "t1", "c_below", "c_above", "u_below", "u_above",
         "strength", "lineage"), rows))
    write_atomic(os.path.join(out_dir, "events.csv"), csv_text(
        ("x", "t", "kind", "rule_tag", "in_ids", "out_ids"),
        ((e.x, e.t, e.kind, e.rule_tag, _ids(e.incoming), _ids(e.outgoing)) for e in sol.events)))
    write_atomic(os.path.join(out_dir, "bottom_trace.csv"), csv_text(
        ("k", "x_start", "x_end", "c", "u"),
        ((k, a, b, s.c, s.u) for k, (a, b, s) in enumerate(fronttrack.bottom_trace(sol)))))
    ts = np.linspace(sol.T / grid_nt, sol.T, grid_nt)
    frows = []
    for x in np.linspace(0.0, sol.X_stop, grid_nx):
        c, u = sol.sample_column(float(x), ts)
        frows.extend(zip(ts, [float(x)] * len(ts), c, u))
    write_atomic(os.path.join(out_dir, "fields.csv"), csv_text(("t", "x", "c", "u"), frows))


def cmd_simulate(plan: RunPlan, out):
    fns = _fns(plan)
    sc = _scenario(plan, fns)
    sol = fronttrack.run(sc, fns, max_events=plan.options["max_events"])
    write_solution(sol, plan.out_dir, plan.options["grid_nt"], plan.options["grid_nx"])
    growth = scn.verify_growth(sol, fns, sc)
    meta = {k: v for k, v in sol.meta.items()}
    report = {"subcommand": "simulate", "model": plan.model, "n_pairs": sc.n_pairs,
              "meta": meta, "growth": growth.to_dict()}
    write_atomic(os.path.join(plan.out_dir, "report.json"), dumps(report))
    out.write(dumps({"n_events": meta["n_events"], "n_fronts": meta["n_fronts"],
                     "growth_pass": growth.passed}))


def cmd_blowup(plan: RunPlan, out):
    s = plan.scenario
    fns = _fns(plan)
    # the bottom trace does not depend on the horizon; without an explicit
    # t_max each N gets a strip a few emission gaps high
    T = s["t_max"] if "scenario.t_max" in plan.explicit else None
    n_list = s["n_list"] or [s["n_pairs"]]
    rows, passed = scn.blowup_study(fns.model, s["c_lo"], s["c_hi"], s["u0"], s["x_inf"],
                                    s["ratio"], s["delta"], T, n_list,
                                    max_events=plan.options["max_events"])
    write_atomic(os.path.join(plan.out_dir, "growth.csv"), csv_text(
        ("N", "max_u", "predicted", "events", "seconds"),
        ((r["N"], r["max_u"], r["predicted"], r["events"], r["seconds"]) for r in rows)))
    report = {"subcommand": "blowup", "model": plan.model, "pass": passed,
              "R": scn.amplification(fns, s["c_lo"], s["c_hi"]),
              "rows": [{k: v for k, v in r.items() if k != "solution"} for r in rows]}
    write_atomic(os.path.join(plan.out_dir, "report.json"), dumps(report))
    out.write(dumps({"pass": passed, "max_u": [r["max_u"] for r in rows]}))


def cmd_compare_fv(plan: RunPlan, out):
    fns = _fns(plan)
    r, f = plan.riemann, plan.fv
    fan = solve_boundary_rp(fns, r["c0"], r["c_plus"], r["u_plus"])
    x = f["x_slice"]
    field_ = fvref.fv_run(fns, lambda ts: (r["c_plus"], r["u_plus"]), lambda _x: r["c0"],
                          f["dt"], x, f["t_max"], keep=[0.0, x])
    t_range = tuple(f["t_range"]) if f["t_range"] is not None else (0.0, f["t_max"])
    e_c, e_u = fvref.compare(fan, field_, x, t_range)
    ts, c, u = field_.slice(x)
    write_atomic(os.path.join(plan.out_dir, "fv_field.csv"),
                 csv_text(("t", "x", "c", "u"), zip(ts, [x] * len(ts), c, u)))
    out.write(dumps({"L1_c": e_c, "L1_u": e_u, "dt": f["dt"], "dx": field_.grid.dx,
                     "cfl": field_.grid.nu, "x_slice": x, "t_range": list(t_range)}))


COMMANDS = {
    "check-model": cmd_check_model, "riemann": cmd_riemann, "simulate": cmd_simulate,
    "temple": cmd_temple, "blowup": cmd_blowup, "compare-fv": cmd_compare_fv,
}


def execute(plan: RunPlan, out=None, err=None) -> int:
    """Run ``plan``; returns the exit status."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        COMMANDS[plan.subcommand](plan, out)
    except (ConfigError, ModelError, RiemannError, scn.ScenarioError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID
    except (fronttrack.EngineError, ArithmeticError) as exc:
        err.write(f"numerical abort: {exc}\n")
        return EXIT_ABORT
    except ValueError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID
    return EXIT_OK


def _model_param(text):
    k, sep, v = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return k.strip(), float(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric value in {text!r}") from None


def _t_range(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected T_LO,T_HI, got {text!r}") from None
    return [lo, hi]


def _n_list(text):
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wavefront-psa", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with [model], [scenario], [riemann], [fv], [options]")
    common.add_argument("--kind", help="isotherm kind (overrides [model] kind)")
    common.add_argument("--param", action="append", type=_model_param, default=[],
                        metavar="KEY=VALUE", help="isotherm parameter, repeatable")
    common.add_argument("--out-dir", help="output directory (default $WAVEFRONT_OUT or .)")
    common.add_argument("--tolerance", type=float, help="quadrature tolerance for g")
    sub = p.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("check-model", parents=[common], help="print the hypothesis report")
    sp = sub.add_parser("riemann", parents=[common], help="solve one boundary Riemann problem")
    sp.add_argument("--c0", type=float)
    sp.add_argument("--c-plus", type=float)
    sp.add_argument("--u-plus", type=float)
    sub.add_parser("temple", parents=[common], help="print the Temple classification")
    for name in ("simulate", "blowup"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("--delta", type=float)
        sp.add_argument("--t-max", type=float)
        sp.add_argument("--max-events", type=int)
        sp.add_argument("--n-pairs", type=int)
        if name == "simulate":
            sp.add_argument("--x-stop", type=float)
            sp.add_argument("--grid-nt", type=int)
            sp.add_argument("--grid-nx", type=int)
        else:
            sp.add_argument("--n-list", type=_n_list, help="comma-separated pair counts")
    sp = sub.add_parser("compare-fv", parents=[common], help="Godunov vs exact single-wave solution")
    sp.add_argument("--dt", type=float)
    sp.add_argument("--x-slice", type=float)
    sp.add_argument("--t-range", type=_t_range, metavar="T_LO,T_HI")
    sp.add_argument("--t-max", type=float)
    sp.add_argument("--c0", type=float)
    sp.add_argument("--c-plus", type=float)
    sp.add_argument("--u-plus", type=float)
    return p


_FLAG_KEYS = {
    "delta": "scenario.delta", "x_stop": "scenario.x_stop", "n_pairs": "scenario.n_pairs",
    "n_list": "scenario.n_list", "max_events": "options.max_events", "grid_nt": "options.grid_nt",
    "grid_nx": "options.grid_nx", "tolerance": "options.tolerance", "c0": "riemann.c0",
    "c_plus": "riemann.c_plus", "u_plus": "riemann.u_plus", "dt": "fv.dt",
    "x_slice": "fv.x_slice", "t_range": "fv.t_range",
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    ov = {}
    for name, key in _FLAG_KEYS.items():
        if hasattr(args, name):
            ov[key] = getattr(args, name)
    if getattr(args, "t_max", None) is not None:
        ov["fv.t_max" if args.subcommand == "compare-fv" else "scenario.t_max"] = args.t_max
    ov["out_dir"] = args.out_dir
    ov["model.kind"] = args.kind
    ov.update({f"model.{k}": v for k, v in args.param})
    try:
        plan = parse_config(args.config, ov, args.subcommand)
    except (ConfigError, ModelError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    return execute(plan)


if __name__ == "__main__":
    sys.exit(main())
