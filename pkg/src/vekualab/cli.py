"""Config-driven experiment runner.

Every checker and the solver are exposed as subcommands that read an optional
JSON config (--config), apply flag overrides, and write machine-readable
reports.  Exit codes: 0 = verdict Holds/Pass, 1 = Fails (report carries a
witness), 2 = configuration or precondition error.

Reports are JSON files {"meta": ..., "result": ...}; the result block is
deterministic (fixed summation orders, no timestamps), so identical configs
produce byte-identical result bodies.  Profiles additionally export CSV.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .catalog import holomorphic_seed, weight_from_config
from .errors import ConfigInvalid, VekuaError
from .geometry import build_grid, domain_from_config
from .principles import (
    DamperFamily,
    check_carl,
    check_halfplane,
    check_logmap,
    check_threelines_condition,
    damper_properties_check,
    log_convexity_check,
    max_principle_report,
    power_mu_scan,
    three_lines_profile,
)
from .solver import (
    SolutionField,
    hp_norm,
    load_solution,
    save_solution,
    solve_vekua,
)


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Flat experiment description; unset fields stay None.

    Serializes bit-exactly: from_dict(to_dict(c)) == c.
    """

    domain: Optional[dict] = None
    weight: Optional[dict] = None
    seed: Optional[dict] = None
    spacing: Optional[float] = None
    epsilons: Optional[list] = None
    center: Optional[list] = None  # [re, im]
    radius: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None
    y_cut: Optional[float] = None
    n_x: Optional[int] = None
    mus: Optional[list] = None
    a_coef: Optional[list] = None  # [re, im]
    p: Optional[float] = None
    radii: Optional[list] = None
    tol: Optional[float] = None
    max_iter: Optional[int] = None
    mode: Optional[str] = None
    solution: Optional[str] = None
    out: Optional[str] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigInvalid(f"unknown config field(s): {sorted(unknown)}")
        return cls(**d)


def _parse_compact(text: str, positional: Optional[list] = None) -> dict:
    """Parse 'name{k:v,...}' / 'name{v1,v2,...}' compact entries into dicts."""
    text = text.strip()
    if "{" not in text:
        return {"__name__": text}
    if not text.endswith("}"):
        raise ConfigInvalid(f"malformed compact entry {text!r}")
    name, body = text[:-1].split("{", 1)
    out = {"__name__": name.strip()}
    pos_values = []
    if body.strip():
        for item in body.split(","):
            item = item.strip()
            if ":" in item:
                k, v = item.split(":", 1)
                out[k.strip()] = _parse_scalar(v.strip())
            else:
                pos_values.append(_parse_scalar(item))
    if pos_values:
        if positional is None or len(pos_values) > len(positional):
            raise ConfigInvalid(
                f"entry {text!r} does not accept {len(pos_values)} positional values"
            )
        for key, val in zip(positional, pos_values):
            out[key] = val
    return out


def _parse_scalar(s: str):
    try:
        return float(s)
    except ValueError:
        try:
            c = complex(s)
            return [c.real, c.imag]
        except ValueError:
            return s


_DOMAIN_POSITIONAL = {
    "rect": ["x0", "x1", "y0", "y1"],
    "halfplane": ["x_min", "radius"],
    "strip": ["a", "b", "y_cut"],
    "unit_disc": [],
    "disc": [],
    "disc_complement": ["center_re", "center_im", "radius"],
}


def parse_domain_arg(text: str) -> dict:
    name = text.split("{", 1)[0].strip()
    if name not in _DOMAIN_POSITIONAL:
        raise ConfigInvalid(f"unknown domain kind {name!r}")
    d = _parse_compact(text, positional=_DOMAIN_POSITIONAL[name])
    d.pop("__name__")
    if name == "disc":
        name = "unit_disc"
    if name == "disc_complement":
        cre = d.pop("center_re", 0.0)
        cim = d.pop("center_im", 0.0)
        d.setdefault("center", [cre, cim])
    d["kind"] = name
    return d


def parse_weight_arg(text: str) -> dict:
    d = _parse_compact(text, positional=None)
    d["name"] = d.pop("__name__")
    return d


def parse_seed_arg(text: str) -> dict:
    d = _parse_compact(text, positional=None)
    d["name"] = d.pop("__name__")
    return d


def parse_epsilons_arg(text: str) -> list:
    """'logspace:lo,hi,n' (decades) or a comma list of values."""
    text = text.strip()
    if text.startswith("logspace:"):
        parts = text[len("logspace:"):].split(",")
        if len(parts) != 3:
            raise ConfigInvalid("logspace epsilons need lo,hi,n")
        lo, hi, n = float(parts[0]), float(parts[1]), int(float(parts[2]))
        return [float(v) for v in np.logspace(lo, hi, n)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigInvalid(f"bad epsilons list {text!r}") from exc


def _float_list(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------


def _load_config(args) -> ExperimentConfig:
    data = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {args.config!r}: {exc}") from exc
    cfg = ExperimentConfig.from_dict(data)
    # flag overrides
    if getattr(args, "domain", None):
        cfg.domain = parse_domain_arg(args.domain)
    if getattr(args, "weight", None):
        cfg.weight = parse_weight_arg(args.weight)
    if getattr(args, "seed", None):
        cfg.seed = parse_seed_arg(args.seed)
    if getattr(args, "spacing", None) is not None:
        cfg.spacing = args.spacing
    if getattr(args, "epsilons", None):
        cfg.epsilons = parse_epsilons_arg(args.epsilons)
    if getattr(args, "out", None):
        cfg.out = args.out
    for name in ("a", "b", "y_cut", "n_x", "p", "tol", "max_iter", "radius", "mode", "solution"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    if getattr(args, "center", None):
        parts = _float_list(args.center)
        if len(parts) != 2:
            raise ConfigInvalid("--center needs re,im")
        cfg.center = parts
    if getattr(args, "mus", None):
        cfg.mus = _float_list(args.mus)
    if getattr(args, "a_coef", None):
        parts = _float_list(args.a_coef)
        cfg.a_coef = parts if len(parts) == 2 else [parts[0], 0.0]
    if getattr(args, "radii", None):
        cfg.radii = _float_list(args.radii)
    return cfg


def _require(cfg: ExperimentConfig, *names):
    for n in names:
        if getattr(cfg, n) is None:
            raise ConfigInvalid(f"missing required config field {n!r}")


def _grid_from(cfg: ExperimentConfig):
    _require(cfg, "domain", "spacing")
    return build_grid(domain_from_config(cfg.domain), float(cfg.spacing))


def _dampers_from(cfg: ExperimentConfig) -> DamperFamily:
    eps = cfg.epsilons
    return DamperFamily.halfplane(eps)


def _seed_fn(cfg: ExperimentConfig):
    _require(cfg, "seed")
    d = dict(cfg.seed)
    name = d.pop("name")
    return holomorphic_seed(name, **d), name


def _solution_from(cfg: ExperimentConfig) -> SolutionField:
    if cfg.solution:
        return load_solution(cfg.solution)
    grid = _grid_from(cfg)
    fn, name = _seed_fn(cfg)
    if cfg.weight is None:
        return SolutionField.from_callable(grid, fn, name)
    weight = weight_from_config(cfg.weight)
    return solve_vekua(
        grid.sample(fn),
        weight,
        grid,
        tol=cfg.tol if cfg.tol is not None else 1e-8,
        max_iter=int(cfg.max_iter) if cfg.max_iter is not None else 200,
    )


def _json_default(obj):
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _write_report(cfg: ExperimentConfig, name: str, result: dict, csv_payloads=None) -> Path:
    out_dir = Path(cfg.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    # the output location is an invocation detail: it lives in the metadata
    # block so identical experiments produce byte-identical result bodies
    if isinstance(result.get("config"), dict):
        result["config"].pop("out", None)
    payload = {
        "meta": {
            "tool": "vekualab",
            "version": __version__,
            "subcommand": name,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
            "out": str(out_dir),
        },
        "result": result,
    }
    path = out_dir / "report.json"
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1, default=_json_default)
        fh.write("\n")
    for fname, text in (csv_payloads or {}).items():
        (out_dir / fname).write_text(text)
    return path


def _exit_from_verdict(status: str) -> int:
    return 0 if status in ("holds", "holds_with_equality", "pass") else 1


# -- subcommand implementations ----------------------------------------------


def _cmd_check_weight(args) -> int:
    cfg = _load_config(args)
    _require(cfg, "weight")
    grid = _grid_from(cfg)
    weight = weight_from_config(cfg.weight)
    which = args.condition
    if which == "carl":
        report = check_carl(weight, grid)
    elif which == "halfplane":
        report = check_halfplane(weight, grid, _dampers_from(cfg))
    elif which == "logmap":
        _require(cfg, "center", "radius")
        center = complex(cfg.center[0], cfg.center[1])
        dampers = DamperFamily.logmap(center, float(cfg.radius), cfg.epsilons)
        report = check_logmap(weight, grid, center, float(cfg.radius), dampers)
    elif which == "threelines":
        _require(cfg, "a", "b")
        sol = _solution_from(cfg)
        profile = three_lines_profile(
            sol, float(cfg.a), float(cfg.b),
            float(cfg.y_cut) if cfg.y_cut is not None else float(cfg.b),
            int(cfg.n_x) if cfg.n_x is not None else 9,
        )
        report = check_threelines_condition(
            weight, grid, float(profile.M[0]), float(profile.M[-1]),
            float(cfg.a), float(cfg.b), _dampers_from(cfg),
        )
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigInvalid(f"unknown condition {which!r}")
    result = {"config": cfg.to_dict(), "report": report.to_json_dict(include_margin=args.full_margin)}
    _write_report(cfg, f"check-weight {which}", result)
    print(f"check-weight {which}: {report.verdict.status} (min margin {report.min_margin:.6g})")
    return _exit_from_verdict(report.verdict.status)


def _cmd_solve(args) -> int:
    cfg = _load_config(args)
    _require(cfg, "weight", "seed")
    sol = _solution_from(cfg)
    out_dir = Path(cfg.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    sol_path = out_dir / "solution.json"
    save_solution(sol_path, sol)
    result = {
        "config": cfg.to_dict(),
        "residual_linf": sol.residual_linf,
        "provenance": sol.provenance.to_json_dict(),
        "solution_file": sol_path.name,
    }
    _write_report(cfg, "solve", result)
    print(
        f"solve: {sol.provenance.kind} in {sol.provenance.iterations} iteration(s), "
        f"residual {sol.residual_linf:.3e}"
    )
    return 0


def _cmd_verify_max(args) -> int:
    cfg = _load_config(args)
    sol = _solution_from(cfg)
    mode = cfg.mode or "bounded"
    dampers = None
    if mode == "unbounded":
        dampers = _dampers_from(cfg)
    report = max_principle_report(sol, dampers=dampers, mode=mode)
    result = {"config": cfg.to_dict(), "report": report.to_json_dict()}
    _write_report(cfg, "verify-max", result)
    print(
        f"verify-max [{mode}]: {report.verdict} "
        f"(interior {report.interior_sup:.6g}, boundary {report.boundary_sup:.6g}, "
        f"arc {report.arc_sup if report.arc_sup is not None else '-'})"
    )
    return _exit_from_verdict(report.verdict)


def _cmd_three_lines(args) -> int:
    cfg = _load_config(args)
    _require(cfg, "a", "b", "y_cut")
    sol = _solution_from(cfg)
    profile = three_lines_profile(
        sol, float(cfg.a), float(cfg.b), float(cfg.y_cut),
        int(cfg.n_x) if cfg.n_x is not None else 9,
    )
    convexity = log_convexity_check(profile)
    result = {
        "config": cfg.to_dict(),
        "profile": profile.to_json_dict(),
        "convexity": convexity.to_json_dict(),
    }
    _write_report(cfg, "three-lines", result, csv_payloads={"profile.csv": profile.to_csv()})
    print(
        f"three-lines: convexity {convexity.verdict} "
        f"(worst margin {convexity.margin:.6g} at x = {convexity.worst_x:.6g})"
    )
    return _exit_from_verdict(convexity.verdict)


def _cmd_scan_mu(args) -> int:
    cfg = _load_config(args)
    _require(cfg, "mus", "a_coef")
    grid = _grid_from(cfg)
    a_coef = complex(cfg.a_coef[0], cfg.a_coef[1])
    entries = power_mu_scan(a_coef, cfg.mus, grid, _dampers_from(cfg))
    table = [
        {
            "mu": e.mu,
            "verdict": e.report.verdict.status,
            "witness": e.report.verdict.witness.to_json_dict()
            if e.report.verdict.witness
            else None,
        }
        for e in entries
    ]
    result = {"config": cfg.to_dict(), "table": table}
    _write_report(cfg, "scan-mu", result)
    for row in table:
        print(f"scan-mu: mu = {row['mu']:+g} -> {row['verdict']}")
    return 0


def _cmd_hp_norm(args) -> int:
    cfg = _load_config(args)
    _require(cfg, "p", "radii")
    sol = _solution_from(cfg)
    value = hp_norm(sol, float(cfg.p), cfg.radii)
    result = {"config": cfg.to_dict(), "hp_norm": value}
    _write_report(cfg, "hp-norm", result)
    print(f"hp-norm: p = {cfg.p:g}, value = {value!r}")
    return 0


def _cmd_damper_check(args) -> int:
    cfg = _load_config(args)
    grid = _grid_from(cfg)
    report = damper_properties_check(_dampers_from(cfg), grid)
    result = {"config": cfg.to_dict(), "report": report.to_json_dict()}
    _write_report(cfg, "damper-check", result)
    print(f"damper-check: {'pass' if report.passed else 'fail'}")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--domain", help="domain spec, e.g. rect{0.5,2,-1,1}")
    p.add_argument("--spacing", type=float, help="grid spacing")
    p.add_argument("--epsilons", help="logspace:lo,hi,n or comma list")
    p.add_argument("--out", help="output directory for reports")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vekualab",
        description="Experiment runner for dbar(w) = alpha conj(w) verifications.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-weight", help="run a weight-condition checker")
    p.add_argument("condition", choices=["carl", "halfplane", "logmap", "threelines"])
    _add_common(p)
    p.add_argument("--weight", help="weight spec, e.g. tokamak{lambda:4}")
    p.add_argument("--seed", help="holomorphic seed (threelines only)")
    p.add_argument("--center", help="log-map disc center re,im")
    p.add_argument("--radius", type=float, help="log-map disc radius")
    p.add_argument("--a", type=float, help="strip left edge (threelines)")
    p.add_argument("--b", type=float, help="strip right edge (threelines)")
    p.add_argument("--y-cut", dest="y_cut", type=float)
    p.add_argument("--n-x", dest="n_x", type=int)
    p.add_argument("--full-margin", action="store_true", help="embed the margin array")
    p.set_defaults(func=_cmd_check_weight)

    p = sub.add_parser("solve", help="manufacture a solution from a seed")
    _add_common(p)
    p.add_argument("--weight", help="weight spec")
    p.add_argument("--seed", help="holomorphic seed, e.g. exp")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify-max", help="maximum-principle report")
    _add_common(p)
    p.add_argument("--weight", help="weight spec")
    p.add_argument("--seed", help="holomorphic seed")
    p.add_argument("--solution", help="path to a saved solution dump")
    p.add_argument("--mode", choices=["bounded", "unbounded"])
    p.set_defaults(func=_cmd_verify_max)

    p = sub.add_parser("three-lines", help="M(x) profile and log-convexity check")
    _add_common(p)
    p.add_argument("--weight", help="weight spec")
    p.add_argument("--seed", help="holomorphic seed")
    p.add_argument("--solution", help="path to a saved solution dump")
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--y-cut", dest="y_cut", type=float)
    p.add_argument("--n-x", dest="n_x", type=int)
    p.set_defaults(func=_cmd_three_lines)

    p = sub.add_parser("scan-mu", help="half-plane verdicts for power weights")
    _add_common(p)
    p.add_argument("--a-coef", dest="a_coef", help="coefficient a as re[,im]")
    p.add_argument("--mus", help="comma list of exponents")
    p.set_defaults(func=_cmd_scan_mu)

    p = sub.add_parser("hp-norm", help="Hardy-norm diagnostic on the unit disc")
    _add_common(p)
    p.add_argument("--weight", help="weight spec")
    p.add_argument("--seed", help="holomorphic seed")
    p.add_argument("--solution", help="path to a saved solution dump")
    p.add_argument("--p", type=float)
    p.add_argument("--radii", help="comma list of radii in (0,1)")
    p.set_defaults(func=_cmd_hp_norm)

    p = sub.add_parser("damper-check", help="audit damper properties on a grid")
    _add_common(p)
    p.set_defaults(func=_cmd_damper_check)

    return parser


def run(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except VekuaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))
