"""Command-line interface.

One executable with five subcommands:

``catalog``    list the builtin systems as JSON
``inspect``    dump all pointwise tensors at the sample points
``classify``   run the metric/symplectic/dissipativity classification
``verify``     run the full identity suite and report max residuals
``simulate``   integrate an evolution, horizontal or geodesic curve

Configuration is a single JSON file (see docs/config.md) with flag
overrides for parameter sweeps.  All numeric output is printed with 17
significant digits so regression goldens are stable; identical config
and seed produce byte-identical output.

Exit codes: 0 ok; 2 config or expression error; 3 domain or singularity
failure at a requested point; 4 identity-suite tolerance failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys as _sys

import numpy as np

from . import systems as _systems
from .dsl import bind_scalar, bind_vertical, parse
from .errors import (
    ArityError,
    ConfigError,
    DomainError,
    FinslerModeError,
    LagmechError,
    ParseError,
    SingularMetric,
    UnboundParameter,
    UnknownBuiltin,
    VariableIndexError,
)
from .finsler import homogeneity_residual_at
from .geometry import lagrange_geometry
from .mechanics import MechanicalSystem, classify, evolution_bundle_at
from .phase import PhasePoint, VerticalField
from .sampling import sample_box
from .trajectories import (
    IntegratorConfig,
    energy_audit,
    integrate_evolution,
    integrate_geodesic,
    integrate_horizontal,
)
from .verify import run_verification

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_IDENTITY = 4


# ---------------------------------------------------------------------------
# 17-significant-digit JSON rendering
# ---------------------------------------------------------------------------


def render_json(obj, indent: int = 0) -> str:
    """Serialize with floats at 17 significant digits (full round trip)."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = []
        for k, v in obj.items():
            items.append(f'{pad}  {json.dumps(str(k))}: {render_json(v, indent + 1)}')
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            return "[]"
        rendered = [render_json(v, indent + 1) for v in obj]
        if all(len(r) < 26 and "\n" not in r for r in rendered):
            return "[" + ", ".join(rendered) + "]"
        return "[\n" + ",\n".join(f"{pad}  {r}" for r in rendered) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return "null"
        return format(v, ".17g")
    if isinstance(obj, np.ndarray):
        return render_json(obj.tolist(), indent)
    return json.dumps(obj)


def _emit(text: str, path: str | None):
    if path in (None, "-"):
        _sys.stdout.write(text)
        if not text.endswith("\n"):
            _sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read config {path!r}: {err}") from err
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _parse_param(text: str):
    if "=" not in text:
        raise ConfigError(f"--param expects name=value, got {text!r}")
    name, raw = text.split("=", 1)
    name = name.strip()
    raw = raw.strip()
    try:
        return name, float(raw)
    except ValueError:
        return name, raw


def build_system(cfg: dict, overrides: dict) -> MechanicalSystem:
    """Construct a system from the ``system`` config section."""
    spec = cfg.get("system")
    if not isinstance(spec, dict):
        raise ConfigError("config needs a 'system' object")
    params = dict(spec.get("params") or {})
    params.update(overrides)
    if "builtin" in spec:
        return _systems.instantiate(str(spec["builtin"]), params)
    try:
        n = int(spec["n"])
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError("expression systems need an integer 'n'") from err
    if "lagrangian" not in spec:
        raise ConfigError("expression systems need a 'lagrangian' source")
    L = bind_scalar(parse(str(spec["lagrangian"]), n), n, params,
                    source=str(spec["lagrangian"]))
    force = spec.get("force")
    if force is None:
        V = VerticalField.zero(n)
    else:
        if not isinstance(force, list):
            raise ConfigError("'force' must be a list of n component sources")
        if len(force) != n:
            raise ConfigError(
                f"force has {len(force)} components but the dimension is {n}"
            )
        V = bind_vertical([parse(str(s), n) for s in force], n, params)
    return MechanicalSystem(L, V, n, params=params,
                            domain_guard=spec.get("domain_guard"),
                            label=spec.get("label", "custom"))


def _is_finsler_mode(sys: MechanicalSystem, probes) -> bool:
    for p in probes[: min(8, len(probes))]:
        try:
            j = homogeneity_residual_at(sys, p)
        except LagmechError:
            return False
        if j > 1e-8 * (1.0 + abs(float(sys.L.at(p)))):
            return False
    return len(probes) > 0


def build_samples(cfg: dict, sys: MechanicalSystem, seed: int) -> list:
    """Sample points from the config, or the builtin default box."""
    spec = cfg.get("samples") or {}
    if "points" in spec:
        pts = []
        for item in spec["points"]:
            pts.append(PhasePoint(item["x"], item["y"]))
            if len(item["x"]) != sys.n or len(item["y"]) != sys.n:
                raise ConfigError("sample point dimension mismatch")
        return pts
    count = int(spec.get("count", 200))
    mode = str(spec.get("mode", "halton"))
    if "box_x" in spec or "box_y" in spec:
        try:
            box_x = [tuple(map(float, b)) for b in spec["box_x"]]
            box_y = [tuple(map(float, b)) for b in spec["box_y"]]
        except (KeyError, TypeError, ValueError) as err:
            raise ConfigError("samples need both box_x and box_y bounds") from err
        if len(box_x) != sys.n or len(box_y) != sys.n:
            raise ConfigError("sample box dimension mismatch")
    else:
        builtin = (cfg.get("system") or {}).get("builtin")
        entry = _systems.find(str(builtin)) if builtin else None
        if entry is None:
            raise ConfigError("expression systems need an explicit 'samples' box")
        box_x, box_y = entry.box(dict((cfg.get("system") or {}).get("params") or {}))
    min_y = 0.0
    if sys.domain_guard == "y_nonzero":
        min_y = 0.1
    else:
        probe = sample_box(box_x, box_y, 4, mode="halton", min_y_norm=0.15)
        if _is_finsler_mode(sys, probe):
            min_y = 0.1
    return sample_box(box_x, box_y, count, mode=mode, seed=seed, min_y_norm=min_y)


def _integrator_config(cfg: dict, args) -> IntegratorConfig:
    spec = dict(cfg.get("integrator") or {})
    if args.step is not None:
        spec["step"] = args.step
    if args.t_end is not None:
        spec["t_end"] = args.t_end
    ic = IntegratorConfig(
        method=str(spec.get("method", "rk4_fixed")),
        step=float(spec.get("step", 1e-3)),
        t_end=float(spec.get("t_end", 10.0)),
        record_every=int(spec.get("record_every", 1)),
        rel_tol=float(spec.get("rel_tol", 1e-8)),
        abs_tol=float(spec.get("abs_tol", 1e-10)),
        max_step=float(spec.get("max_step", 0.1)),
    )
    try:
        ic.validate()
    except ValueError as err:
        raise ConfigError(str(err)) from err
    return ic


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_catalog(args) -> int:
    doc = {"systems": [entry.to_dict() for entry in _systems.catalog()]}
    _emit(render_json(doc), args.out)
    return EXIT_OK


def cmd_inspect(cfg: dict, args, overrides: dict) -> int:
    sys_ = build_system(cfg, overrides)
    samples = build_samples(cfg, sys_, int(cfg.get("seed", args.seed or 0)))
    results = []
    hit_singular = False
    for idx, p in enumerate(samples):
        entry = {"index": idx, "point": {"x": list(p.x), "y": list(p.y)}}
        try:
            geo = lagrange_geometry(sys_.L, p)
            bundle = evolution_bundle_at(sys_, p, validate=False)
            entry.update({
                "g": geo.g.entries,
                "g_inv": geo.g.inverse,
                "E": geo.E,
                "G0": geo.spray0,
                "N0": geo.conn0,
                "C": geo.cartan,
                "sigma": bundle.sigma,
                "G": bundle.spray,
                "N": bundle.conn,
                "F": bundle.helicoidal,
                "gbar": bundle.gbar,
                "power": bundle.power,
            })
        except (SingularMetric, DomainError) as err:
            hit_singular = True
            entry["error"] = type(err).__name__
            entry["detail"] = str(err)
        results.append(entry)
    _emit(render_json({"points": results}), args.out)
    return EXIT_DOMAIN if hit_singular else EXIT_OK


def cmd_classify(cfg: dict, args, overrides: dict) -> int:
    sys_ = build_system(cfg, overrides)
    seed = int(cfg.get("seed", args.seed or 0))
    samples = build_samples(cfg, sys_, seed)
    tol = float(cfg.get("tolerance", 1e-8))
    report = classify(sys_, samples, tol=tol)
    _emit(render_json(report.to_dict()), args.out)
    return EXIT_OK


def cmd_verify(cfg: dict, args, overrides: dict) -> int:
    sys_ = build_system(cfg, overrides)
    seed = int(cfg.get("seed", args.seed or 0))
    samples = build_samples(cfg, sys_, seed)
    tol = float(cfg.get("tolerance", 1e-8))
    report = run_verification(sys_, samples, tol=tol)
    _emit(render_json(report), args.out)
    if report["singular_points"]:
        return EXIT_DOMAIN
    if report["offenders"]:
        return EXIT_IDENTITY
    return EXIT_OK


def cmd_simulate(cfg: dict, args, overrides: dict) -> int:
    sys_ = build_system(cfg, overrides)
    initial = cfg.get("initial")
    if not isinstance(initial, dict) or "x" not in initial or "y" not in initial:
        raise ConfigError("simulate needs an 'initial' point with x and y")
    p0 = PhasePoint(initial["x"], initial["y"])
    if p0.n != sys_.n:
        raise ConfigError("initial point dimension mismatch")
    ic = _integrator_config(cfg, args)
    curve = args.curve
    try:
        if curve == "evolution":
            traj = integrate_evolution(sys_, p0, ic)
        elif curve == "horizontal":
            traj = integrate_horizontal(sys_, p0, ic)
        else:
            traj = integrate_geodesic(sys_, p0, ic)
    except FinslerModeError as err:
        raise ConfigError(str(err)) from err
    if len(traj.t) <= 1 and traj.status != "completed":
        _sys.stderr.write(render_json({"status": traj.status}) + "\n")
        return EXIT_DOMAIN

    fmt = str((cfg.get("output") or {}).get("format", "csv"))
    if args.out and args.out.endswith(".json"):
        fmt = "json"
    if fmt == "json":
        _emit(render_json(traj.to_dict()), args.out)
    else:
        _emit(traj.to_csv(), args.out)

    if curve == "evolution":
        max_err, monotone = energy_audit(traj, sys_)
        audit = {
            "max_balance_error": max_err,
            "monotone_nonincreasing": monotone,
            "status": traj.status,
        }
    else:
        e0 = traj.energy[0]
        drift = float(np.abs(traj.energy - e0).max() / (1.0 + abs(e0)))
        audit = {"relative_energy_drift": drift, "status": traj.status}
    _sys.stderr.write(render_json(audit) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lagmech",
        description="Geometry engine for Lagrangian and Finslerian "
                    "mechanical systems",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name, needs_config in (
        ("catalog", False),
        ("inspect", True),
        ("classify", True),
        ("verify", True),
        ("simulate", True),
    ):
        p = sub.add_parser(name)
        if needs_config:
            p.add_argument("config", help="path to the JSON run configuration")
            p.add_argument("--param", action="append", default=[],
                           metavar="NAME=VALUE",
                           help="override a system parameter (repeatable)")
            p.add_argument("--seed", type=int, default=None,
                           help="override the sampling seed")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        if name == "simulate":
            p.add_argument("--curve", choices=("evolution", "horizontal", "geodesic"),
                           default="evolution")
            p.add_argument("--t-end", dest="t_end", type=float, default=None)
            p.add_argument("--step", type=float, default=None)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "catalog":
            return cmd_catalog(args)
        cfg = _load_config(args.config)
        overrides = dict(_parse_param(t) for t in (args.param or []))
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.command == "inspect":
            return cmd_inspect(cfg, args, overrides)
        if args.command == "classify":
            return cmd_classify(cfg, args, overrides)
        if args.command == "verify":
            return cmd_verify(cfg, args, overrides)
        if args.command == "simulate":
            return cmd_simulate(cfg, args, overrides)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ParseError, ArityError, VariableIndexError,
            UnboundParameter, UnknownBuiltin) as err:
        _sys.stderr.write(f"error: {err}\n")
        return EXIT_CONFIG
    except (SingularMetric, DomainError) as err:
        _sys.stderr.write(f"error: {err}\n")
        return EXIT_DOMAIN


if __name__ == "__main__":
    raise SystemExit(main())
