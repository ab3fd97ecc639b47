"""Command-line front end.

Three subcommands:

* ``ber-vs-snr``: BER curves over an SNR grid at fixed iteration budgets.
* ``convergence``: BER and cost over an iteration grid at fixed SNR.
* ``flops-table``: closed-form per-scheme FLOP counts at one (M, K, T).

Experiment configs are JSON objects with a fixed key set (unknown keys are
rejected); the bundled presets are ordinary configs shipped as package
data.  Every experiment emits a CSV of result rows plus a manifest that
embeds the fully resolved config; feeding the manifest back through
``--config`` reproduces the CSV byte for byte (the manifest's wall-clock
block is the only thing that changes).
"""

from __future__ import annotations

import argparse
import datetime
import importlib.resources
import itertools
import json
import sys
import time
from pathlib import Path

from . import backend, flops
from .sim import ALL_SCHEMES, TrialConfig, run_experiment

__all__ = ["main", "load_preset", "preset_names", "parse_experiment_config", "write_csv"]

_VERSION = "0.1.0"

_CSV_COLUMNS = (
    "scheme",
    "m",
    "k",
    "d",
    "iota",
    "snr_db",
    "iterations",
    "bits",
    "bit_errors",
    "ber",
    "flops_model",
    "flops_effective",
    "seed",
)

_FLOPS_COLUMNS = ("scheme", "m", "k", "t", "omega", "flops", "relaxation_vs_rzf_pct")

_KINDS = ("ber-vs-snr", "convergence")

# Experiment config schema: key -> (required, description).
_CONFIG_KEYS = {
    "name": True,
    "kind": True,
    "geometry": True,
    "users": True,
    "snr_db": True,
    "iterations": True,
    "iota": False,
    "visibility": False,
    "schemes": False,
    "omega": False,
    "drops": False,
    "vectors_per_drop": False,
    "seed": False,
}


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending field."""


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _require_ints(name, values, minimum=None):
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"{name}: expected integer entries, got {v!r}")
        if minimum is not None and v < minimum:
            raise ConfigError(f"{name}: entries must be >= {minimum}, got {v}")
        out.append(int(v))
    return out


def _require_numbers(name, values):
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{name}: expected numeric entries, got {v!r}")
        out.append(float(v))
    return out


def parse_experiment_config(raw: dict) -> dict:
    """Validate a JSON experiment config and fill defaults.

    Returns the resolved config: every optional key explicit, every family
    axis a list.  Raises ConfigError naming the offending field otherwise.
    """
    if not isinstance(raw, dict):
        raise ConfigError(f"config: expected a JSON object, got {type(raw).__name__}")
    for key in raw:
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{key}: unknown configuration key")
    for key, required in _CONFIG_KEYS.items():
        if required and key not in raw:
            raise ConfigError(f"{key}: required key is missing")

    name = raw["name"]
    if not isinstance(name, str) or not name:
        raise ConfigError("name: expected a non-empty string")
    kind = raw["kind"]
    if kind not in _KINDS:
        raise ConfigError(f"kind: expected one of {_KINDS}, got {kind!r}")
    geometry = raw["geometry"]
    if geometry not in ("mmimo64", "xl256"):
        raise ConfigError(f"geometry: expected 'mmimo64' or 'xl256', got {geometry!r}")

    users = _require_ints("users", _as_list(raw["users"]), minimum=1)
    snr_db = _require_numbers("snr_db", _as_list(raw["snr_db"]))
    if not snr_db:
        raise ConfigError("snr_db: grid must be non-empty")
    iterations = _require_ints("iterations", _as_list(raw["iterations"]), minimum=0)
    if not iterations or sorted(set(iterations)) != iterations:
        raise ConfigError("iterations: grid must be non-empty and strictly increasing")

    iota = _require_numbers("iota", _as_list(raw.get("iota", [0.0])))
    for v in iota:
        if not 0.0 <= v < 1.0:
            raise ConfigError(f"iota: values must lie in [0, 1), got {v}")

    vis_raw = raw.get("visibility", None)
    if vis_raw is None or vis_raw == [None]:
        # resolved configs (e.g. a manifest fed back in) spell stationary as [null]
        visibility = [None]
    else:
        visibility = _require_ints("visibility", _as_list(vis_raw), minimum=1)
    if visibility != [None] and iota != [0.0]:
        raise ConfigError("visibility: visibility-limited channels require iota = [0.0]")

    schemes = _as_list(raw.get("schemes", list(ALL_SCHEMES)))
    if not schemes:
        raise ConfigError("schemes: must list at least one scheme")
    for s in schemes:
        if s not in ALL_SCHEMES:
            raise ConfigError(f"schemes: unknown scheme {s!r}, expected one of {ALL_SCHEMES}")

    omega = raw.get("omega", None)
    if omega is not None:
        omega = _require_ints("omega", [omega], minimum=1)[0]
    drops = _require_ints("drops", [raw.get("drops", 500)], minimum=1)[0]
    vectors = _require_ints("vectors_per_drop", [raw.get("vectors_per_drop", 20)], minimum=1)[0]
    seed = _require_ints("seed", [raw.get("seed", 0)], minimum=0)[0]

    return {
        "name": name,
        "kind": kind,
        "geometry": geometry,
        "users": users,
        "iota": iota,
        "visibility": visibility,
        "snr_db": snr_db,
        "iterations": iterations,
        "schemes": list(schemes),
        "omega": omega,
        "drops": drops,
        "vectors_per_drop": vectors,
        "seed": seed,
    }


def expand_cases(resolved: dict) -> list[TrialConfig]:
    """Cross the family axes (users x iota x visibility) into trial cases."""
    cases = []
    for k_users, iota, vis in itertools.product(
        resolved["users"], resolved["iota"], resolved["visibility"]
    ):
        try:
            cases.append(
                TrialConfig(
                    geometry=resolved["geometry"],
                    k_users=k_users,
                    iota=iota,
                    d_antennas=vis,
                    snr_db=tuple(resolved["snr_db"]),
                    schemes=tuple(resolved["schemes"]),
                    iterations=tuple(resolved["iterations"]),
                    omega=resolved["omega"],
                    drops=resolved["drops"],
                    vectors_per_drop=resolved["vectors_per_drop"],
                    seed=resolved["seed"],
                )
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return cases


def preset_names() -> list[str]:
    root = importlib.resources.files("rkmimo").joinpath("presets")
    return sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json"))


def load_preset(name: str) -> dict:
    path = importlib.resources.files("rkmimo").joinpath("presets", f"{name}.json")
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(
            f"preset: unknown preset {name!r}, available: {preset_names()}"
        ) from None
    return json.loads(text)


def _load_config_file(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config: file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON in {path}: {exc}") from None
    # A manifest embeds the config it ran; accept it directly for re-runs.
    if isinstance(raw, dict) and raw.get("tool") == "rkmimo" and "config" in raw:
        return raw["config"]
    return raw


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path: Path, columns, rows) -> None:
    """UTF-8, LF-terminated CSV with 17-significant-digit floats."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")


def _run_experiment_command(kind: str, args) -> int:
    if (args.config is None) == (args.preset is None):
        print("error: provide exactly one of --config or --preset", file=sys.stderr)
        return 2
    raw = load_preset(args.preset) if args.preset else _load_config_file(args.config)
    resolved = parse_experiment_config(raw)
    if resolved["kind"] != kind:
        raise ConfigError(
            f"kind: config declares {resolved['kind']!r} but the {kind} command was invoked"
        )
    if args.seed is not None:
        resolved["seed"] = args.seed
    cases = expand_cases(resolved)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = _utc_now()
    t0 = time.perf_counter()
    rows = []
    for case in cases:
        rows.extend(run_experiment(case, threads=args.threads))
    elapsed = time.perf_counter() - t0

    csv_path = out_dir / f"{resolved['name']}.csv"
    write_csv(csv_path, _CSV_COLUMNS, rows)
    manifest = {
        "tool": "rkmimo",
        "version": _VERSION,
        "kind": kind,
        "backend": backend.active_backend(),
        "threads": args.threads,
        "config": resolved,
        "outputs": {"csv": csv_path.name},
        "wall_clock": {
            "started_utc": started,
            "finished_utc": _utc_now(),
            "elapsed_s": round(elapsed, 3),
        },
    }
    manifest_path = out_dir / f"{resolved['name']}.manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {csv_path} ({len(rows)} rows) and {manifest_path.name}")
    return 0


def _run_flops_table(args) -> int:
    rows = flops.flops_table(args.m, args.k, args.t, args.omega)
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_csv(path, _FLOPS_COLUMNS, rows)
        print(f"wrote {path}")
    else:
        print(",".join(_FLOPS_COLUMNS))
        for row in rows:
            print(",".join(_fmt(row[c]) for c in _FLOPS_COLUMNS))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rkmimo",
        description="Randomized Kaczmarz soft-output detection experiments",
    )
    parser.add_argument("--version", action="version", version=f"rkmimo {_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    for kind in _KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", help="experiment config JSON (or a previous manifest)")
        p.add_argument("--preset", help=f"bundled preset name, one of {preset_names()}")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--threads", type=int, default=1, help="trial-level worker processes")
        p.set_defaults(func=lambda a, k=kind: _run_experiment_command(k, a))

    p = sub.add_parser("flops-table", help="emit the per-scheme FLOP count table")
    p.add_argument("--m", type=int, required=True, help="number of antennas")
    p.add_argument("--k", type=int, required=True, help="number of users")
    p.add_argument("--t", type=int, required=True, help="iteration budget for iterative schemes")
    p.add_argument("--omega", type=int, default=None, help="subset size (default ceil(log2 K))")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=_run_flops_table)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
