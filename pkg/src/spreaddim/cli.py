"""``spreaddim`` command line.

Exit codes: 0 success, 1 runtime or input-data failure, 2 usage error.

Settings resolve as command-line flag > ``--config`` JSON file > built-in default.
A run manifest (``--config`` accepts one) records the resolved settings, so
``spreaddim rerun MANIFEST`` repeats the run and reproduces its output files.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .datasets import RNG_ALGORITHM, GeneratorConfig, sample_subset
from .experiments import (
    coverage_validation,
    dimension_profile,
    estimate_intrinsic_dimension,
    read_profile_csv,
    write_json,
    write_profile_csv,
)
from .metric_space import (
    MetricViolationError,
    ParseError,
    SubsetIndex,
    load_distance_matrix,
    load_points,
    save_table,
    space_size,
)
from .plot import write_profile_svg
from .spread import THREADS_ENV, ScaleGrid, num_threads
from .uncertainty import VARIANTS, Z95

log = logging.getLogger("spreaddim")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "generate": {"shape": "swiss-roll", "n": 10000, "dim": 3, "noise": 0.0, "seed": 0, "out": None},
    "sweep": {
        "input": None, "matrix": False, "k": "100", "t_min": 0.0, "t_max": 15.0, "t_steps": 200,
        "seed": 0, "z": Z95, "variant": "single-cov", "out": None, "json": None,
    },
    "estimate": {"profile": None, "band": 0.25, "min_fraction": 0.1},
    "validate-coverage": {
        "trials": 20, "n": 2000, "k": 100, "t_min": 0.0, "t_max": 15.0, "steps": 51,
        "seed": 0, "variant": "single-cov", "z": Z95, "out": None,
    },
    "plot": {"profile": None, "out": None, "title": "Pseudo spread dimension"},
}


class UsageError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spreaddim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON settings file or run manifest")
        p.add_argument("--manifest", help="where to write the run manifest")
        p.add_argument("-v", "--verbose", action="store_true", help="log one line per stage")

    g = sub.add_parser("generate", help="write a synthetic point cloud")
    g.add_argument("shape", nargs="?", choices=["swiss-roll", "hypercube"])
    g.add_argument("--n", type=int)
    g.add_argument("--dim", type=int, help="hypercube dimension")
    g.add_argument("--noise", type=float, help="swiss roll Gaussian noise sd")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output point-cloud file")
    common(g)

    s = sub.add_parser("sweep", help="pseudo spread dimension profile with CIs")
    s.add_argument("input", nargs="?", help="point cloud (or distance matrix with --matrix)")
    s.add_argument("--matrix", action="store_true", default=None, help="input is a distance matrix")
    s.add_argument("--k", help='subset size, or "full" for the exact spread dimension')
    s.add_argument("--full", dest="k", action="store_const", const="full", help="same as --k full")
    s.add_argument("--t-min", type=float)
    s.add_argument("--t-max", type=float)
    s.add_argument("--t-steps", type=int)
    s.add_argument("--seed", type=int, help="subset sampling seed")
    s.add_argument("--z", type=float)
    s.add_argument("--variant", choices=VARIANTS)
    s.add_argument("--out", help="profile CSV")
    s.add_argument("--json", help="also write the full profile as JSON")
    common(s)

    e = sub.add_parser("estimate", help="peak / plateau dimension estimate from a profile CSV")
    e.add_argument("profile", nargs="?")
    e.add_argument("--band", type=float)
    e.add_argument("--min-fraction", type=float)
    common(e)

    c = sub.add_parser("validate-coverage", help="Monte Carlo CI coverage on Swiss rolls")
    c.add_argument("--trials", type=int)
    c.add_argument("--n", type=int)
    c.add_argument("--k", type=int)
    c.add_argument("--t-min", type=float)
    c.add_argument("--t-max", type=float)
    c.add_argument("--steps", type=int, help="grid points on [t-min, t-max]; t = 0 is skipped")
    c.add_argument("--seed", type=int)
    c.add_argument("--variant", choices=VARIANTS)
    c.add_argument("--z", type=float)
    c.add_argument("--out", help="also write the report JSON here")
    common(c)

    p = sub.add_parser("plot", help="render a profile CSV as SVG")
    p.add_argument("profile", nargs="?")
    p.add_argument("out", nargs="?", help="output SVG")
    p.add_argument("--title")
    common(p)

    r = sub.add_parser("rerun", help="repeat a run from its manifest")
    r.add_argument("manifest_path")
    r.add_argument("--out", help="redirect the primary output")
    r.add_argument("--json", help="redirect the JSON profile output (sweep)")
    r.add_argument("--manifest", help="where to write the new manifest")
    r.add_argument("-v", "--verbose", action="store_true")
    return parser


def _load_config(path) -> tuple[str | None, dict]:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    if "config" in data and "command" in data:
        return data["command"], dict(data["config"])
    return None, data


def resolve(command: str, args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        cfg_command, cfg = _load_config(args.config)
        if cfg_command not in (None, command):
            raise UsageError(f"manifest is for {cfg_command!r}, not {command!r}")
        unknown = set(cfg) - set(settings)
        if unknown:
            raise UsageError(f"unknown settings for {command}: {sorted(unknown)}")
        settings.update(cfg)
    for key in settings:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return settings


def _require(settings: dict, *keys: str) -> None:
    missing = [k for k in keys if settings.get(k) in (None, "")]
    if missing:
        raise UsageError("missing required setting(s): " + ", ".join(missing))


def _check_writable(path) -> Path:
    path = Path(path)
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir() or not os.access(parent, os.W_OK) or path.is_dir():
        raise UsageError(f"cannot write to {path}")
    return path


def _check_readable(path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    return path


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _grid(t_min: float, t_max: float, steps: int) -> ScaleGrid:
    if steps < 1:
        raise UsageError("number of scale steps must be positive")
    if t_min < 0:
        raise UsageError("t-min must be nonnegative")
    if t_max < t_min or (steps > 1 and t_max == t_min):
        raise UsageError("t-min must be below t-max")
    return ScaleGrid.linspace(t_min, t_max, steps)


def cmd_generate(s: dict) -> dict:
    _require(s, "out")
    out = _check_writable(s["out"])
    if s["n"] < 1 or s["dim"] < 1:
        raise UsageError("n and dim must be positive")
    if s["seed"] < 0:
        raise UsageError("seed must be nonnegative")
    cloud = GeneratorConfig(s["shape"], s["n"], s["seed"], dim=s["dim"], noise=s["noise"]).build()
    header = "x,y,z" if cloud.ambient_dim == 3 else ",".join(f"x{i}" for i in range(cloud.ambient_dim))
    save_table(out, cloud.points, header=header)
    log.info("wrote %d x %d points to %s", cloud.n_points, cloud.ambient_dim, out)
    return {"outputs": {"points": str(out)}, "seeds": {"data": s["seed"]}}


def cmd_sweep(s: dict) -> dict:
    _require(s, "input", "out")
    src = _check_readable(s["input"])
    out = _check_writable(s["out"])
    json_out = _check_writable(s["json"]) if s["json"] else None
    grid = _grid(s["t_min"], s["t_max"], s["t_steps"])
    if s["variant"] not in VARIANTS:
        raise UsageError(f"variant must be one of {VARIANTS}")
    space = load_distance_matrix(src) if s["matrix"] else load_points(src)
    n = space_size(space)
    log.info("loaded %d points from %s", n, src)
    k_raw = str(s["k"])
    if k_raw == "full":
        subset = SubsetIndex.full(n)
    else:
        try:
            k = int(k_raw)
        except ValueError:
            raise UsageError(f'k must be an integer or "full", got {k_raw!r}') from None
        if not 1 <= k <= n:
            raise UsageError(f"k must lie in [1, {n}], got {k}")
        subset = SubsetIndex.full(n) if k == n else sample_subset(n, k, s["seed"])
    profile = dimension_profile(space, subset, grid, s["z"], s["variant"])
    profile.meta.update({"seed": s["seed"], "input_sha256": _sha256(src)})
    log.info("swept %d scales with |S| = %d", len(grid), subset.k)
    write_profile_csv(profile, out)
    outputs = {"profile_csv": str(out)}
    if json_out:
        write_json(profile.to_dict(), json_out)
        outputs["profile_json"] = str(json_out)
    return {"outputs": outputs, "seeds": {"subset": s["seed"]},
            "input_sha256": profile.meta["input_sha256"]}


def cmd_estimate(s: dict) -> dict:
    _require(s, "profile")
    profile = read_profile_csv(_check_readable(s["profile"]))
    est = estimate_intrinsic_dimension(profile, band=s["band"], min_fraction=s["min_fraction"])
    print(json.dumps(asdict(est), sort_keys=True))
    return {"outputs": {}, "seeds": {}}


def cmd_validate_coverage(s: dict) -> dict:
    if s["trials"] < 1:
        raise UsageError("trials must be at least 1")
    if not 1 <= s["k"] <= s["n"]:
        raise UsageError(f"need 1 <= k <= n, got k={s['k']}, n={s['n']}")
    out = _check_writable(s["out"]) if s["out"] else None
    grid = _grid(s["t_min"], s["t_max"], s["steps"])
    if grid.values[-1] <= 0:
        raise UsageError("the scale grid needs at least one positive value")
    report = coverage_validation(s["trials"], s["n"], s["k"], grid, s["seed"], s["variant"], s["z"])
    text = json.dumps(report.to_dict(), sort_keys=True)
    print(text)
    outputs = {}
    if out:
        write_json(report.to_dict(), out)
        outputs["report"] = str(out)
    return {"outputs": outputs, "seeds": {"master": s["seed"]}}


def cmd_plot(s: dict) -> dict:
    _require(s, "profile", "out")
    profile = read_profile_csv(_check_readable(s["profile"]))
    out = _check_writable(s["out"])
    write_profile_svg(profile, out, title=s["title"])
    return {"outputs": {"svg": str(out)}, "seeds": {}}


COMMANDS = {
    "generate": cmd_generate,
    "sweep": cmd_sweep,
    "estimate": cmd_estimate,
    "validate-coverage": cmd_validate_coverage,
    "plot": cmd_plot,
}


def _manifest_path(command: str, settings: dict, explicit) -> Path | None:
    if explicit:
        return Path(explicit)
    if command in ("generate", "sweep", "plot") or settings.get("out"):
        return Path(str(settings["out"]) + ".manifest.json")
    return None


def _emit_manifest(command: str, settings: dict, info: dict, explicit_path) -> None:
    manifest = {
        "command": command,
        "config": settings,
        "seeds": info.get("seeds", {}),
        "outputs": info.get("outputs", {}),
        "variant": settings.get("variant"),
        "version": __version__,
        "rng": RNG_ALGORITHM,
        "numpy": np.__version__,
        "threads": num_threads(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    path = _manifest_path(command, settings, explicit_path)
    if path is None:
        sys.stderr.write(json.dumps({"manifest": manifest}, sort_keys=True) + "\n")
    else:
        write_json(manifest, path)
        log.info("manifest written to %s", path)


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        try:
            num_threads()
        except ValueError as exc:
            raise UsageError(f"{THREADS_ENV}: {exc}") from None
        if args.command == "rerun":
            command, settings = _load_config(args.manifest_path)
            if command not in COMMANDS:
                raise UsageError(f"{args.manifest_path} is not a run manifest")
            base = dict(DEFAULTS[command])
            base.update(settings)
            settings = base
            if args.out:
                settings["out"] = args.out
            if args.json:
                settings["json"] = args.json
        else:
            command = args.command
            settings = resolve(command, args)
        info = COMMANDS[command](settings)
        _emit_manifest(command, settings, info, args.manifest)
    except UsageError as exc:
        print(f"spreaddim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, MetricViolationError, ValueError, OSError) as exc:
        print(f"spreaddim: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
