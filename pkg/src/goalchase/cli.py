"""Command line front end.

Subcommands: run (simulate to an output directory), check (gradient,
reduction, and realizability checks), compare (first divergence between
two trajectory logs), witness (end-to-end divergence witness), sweep
(a grid of runs).  Exit codes: 0 pass, 1 analysis failure, 2 bad
configuration or input, 3 numeric divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, simulator
from .bridge import MLP1H
from .core import ConfigError, DivergenceError, config_from_json
from .expr import GrammarError
from .goallaw import initial_law_state
from .prng import new_words

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3

__all__ = ["main"]


def _set_path(obj: dict, assignment: str):
    key, eq, raw = assignment.partition("=")
    if not eq:
        raise ConfigError(key or assignment, "expected KEY=VALUE")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = key.split(".")
    node = obj
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            node[part] = {}
        node = node[part]
    node[parts[-1]] = value


def _load_config_obj(args) -> dict:
    path = Path(args.config)
    try:
        obj = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError(str(path), f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(str(path), f"invalid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise ConfigError(str(path), "config must be a JSON object")
    for assignment in args.set or []:
        _set_path(obj, assignment)
    if getattr(args, "seed", None) is not None:
        obj["init_seed"] = args.seed
    if getattr(args, "log_every", None) is not None:
        obj["log_every"] = args.log_every
    return obj


def _run_into(config, out_dir: Path) -> list:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "resolved_config.json").write_text(config.to_json_str())
    records, _ = simulator.run(config, jsonl_path=out_dir / "trajectory.jsonl")
    simulator.write_summary_csv(records, out_dir / "summary.csv")
    return records


def cmd_run(args) -> int:
    config = config_from_json(_load_config_obj(args))
    records = _run_into(config, Path(args.out))
    last = records[-1]
    print(
        json.dumps(
            {
                "out": str(args.out),
                "records": len(records),
                "final_t": last.t,
                "final_loss": last.loss,
            }
        )
    )
    return EXIT_OK


def cmd_check(args) -> int:
    config = config_from_json(_load_config_obj(args))
    from .core import init_state

    state = init_state(config)
    checks = [
        analysis.grad_check(
            config, n_samples=args.samples, fd_step=args.fd_step
        )
    ]
    if analysis.is_reducible(config):
        checks.append(analysis.reduction_check(config))
    for i, fam in enumerate(config.slot_specs):
        if fam.kind == MLP1H:
            perm = list(np.roll(np.arange(fam.hidden), 1))
            rep = analysis.permutation_witness(fam, state.slots[i], perm)
            rep["slot"] = i
            checks.append(rep)
        if fam.pad > 0:
            rep = analysis.pad_witness(fam, state.slots[i])
            rep["slot"] = i
            checks.append(rep)
    overall = "pass"
    if any(c["verdict"] == "warning" for c in checks):
        overall = "warning"
    if any(c["verdict"] == "fail" for c in checks):
        overall = "fail"
    print(json.dumps({"verdict": overall, "checks": checks}, indent=2))
    return EXIT_ANALYSIS if overall == "fail" else EXIT_OK


def _read_records(path: Path) -> list:
    try:
        lines = path.read_text().splitlines()
    except OSError as e:
        raise ConfigError(str(path), f"cannot read trajectory: {e}") from e
    out = []
    for ln in lines:
        if ln.strip():
            out.append(json.loads(ln))
    return out


def _records_differ(ra: dict, rb: dict, tol: float):
    if ra["t"] != rb["t"] or ra["T"] != rb["T"]:
        return "t"
    if ra["pairs"] != rb["pairs"]:
        return "pairs"
    for field in ("loss", "x_norms", "d", "slots"):
        va, vb = ra.get(field), rb.get(field)
        if va is None and vb is None:
            continue
        if va is None or vb is None:
            return field
        if np.max(np.abs(np.asarray(va, float) - np.asarray(vb, float))) > tol:
            return field
    return None


def cmd_compare(args) -> int:
    a = _read_records(Path(args.run_a) / "trajectory.jsonl")
    b = _read_records(Path(args.run_b) / "trajectory.jsonl")
    report = {"check": "compare", "tolerance": args.tol}
    first = None
    field = None
    for ra, rb in zip(a, b):
        field = _records_differ(ra, rb, args.tol)
        if field is not None:
            first = ra["t"]
            break
    if first is None and len(a) != len(b):
        longer = a if len(a) > len(b) else b
        first = longer[min(len(a), len(b))]["t"]
        field = "length"
    report["first_divergence_t"] = first
    report["field"] = field
    report["verdict"] = "pass"
    if first is None:
        report["summary"] = "no divergence"
    print(json.dumps(report))
    return EXIT_OK


def cmd_witness(args) -> int:
    config = config_from_json(_load_config_obj(args))
    alt = initial_law_state(config.law)
    if args.alt_w:
        try:
            overrides = json.loads(args.alt_w)
        except json.JSONDecodeError as e:
            raise ConfigError("--alt-w", f"invalid JSON: {e}") from e
        if not isinstance(overrides, dict):
            raise ConfigError("--alt-w", "expected a JSON object")
        known = {"program_counter", "macro_count", "law_seed", "pairs"}
        extra = set(overrides) - known
        if extra:
            raise ConfigError(f"--alt-w.{sorted(extra)[0]}", "unknown key")
        if "program_counter" in overrides:
            alt.program_counter = int(overrides["program_counter"])
        if "macro_count" in overrides:
            alt.macro_count = int(overrides["macro_count"])
        if "law_seed" in overrides:
            alt.rng_words = new_words(int(overrides["law_seed"]))
        if "pairs" in overrides:
            from .expr import EquationPairList

            try:
                pairs = EquationPairList.from_json(overrides["pairs"])
                pairs.compile(config.arities)
            except GrammarError as e:
                raise ConfigError("--alt-w.pairs", str(e)) from e
            alt.cpair = pairs
    report = analysis.divergence_witness(config, alt, threshold=args.threshold)
    if args.out:
        out = Path(args.out)
        a_dir, b_dir = out / "a", out / "b"
        for d in (a_dir, b_dir):
            d.mkdir(parents=True, exist_ok=True)
        (out / "resolved_config.json").write_text(config.to_json_str())
        rec_a, _ = simulator.run(config, jsonl_path=a_dir / "trajectory.jsonl")
        rec_b, _ = simulator.run(
            config, jsonl_path=b_dir / "trajectory.jsonl", law_state=alt
        )
        simulator.write_summary_csv(rec_a, a_dir / "summary.csv")
        simulator.write_summary_csv(rec_b, b_dir / "summary.csv")
        (out / "witness_report.json").write_text(json.dumps(report, indent=2) + "\n")
    print(json.dumps(report))
    return EXIT_OK if report["verdict"] == "pass" else EXIT_ANALYSIS


def cmd_sweep(args) -> int:
    try:
        grid = json.loads(Path(args.grid).read_text())
    except OSError as e:
        raise ConfigError(args.grid, f"cannot read grid: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(args.grid, f"invalid JSON: {e}") from e
    if not isinstance(grid, list) or not all(isinstance(g, dict) for g in grid):
        raise ConfigError(args.grid, "grid must be a JSON list of objects")
    out_root = Path(args.out)
    for idx, overrides in enumerate(grid):
        obj = _load_config_obj(args)
        for key, value in overrides.items():
            _set_path(obj, f"{key}={json.dumps(value)}")
        config = config_from_json(obj)
        run_dir = out_root / f"run_{idx:04d}"
        records = _run_into(config, run_dir)
        print(
            json.dumps(
                {
                    "run": idx,
                    "dir": str(run_dir),
                    "overrides": overrides,
                    "final_loss": records[-1].loss,
                }
            )
        )
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goalchase",
        description="Two-timescale goal-rewrite control runs and analyses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_opts(p, with_out=False):
        p.add_argument("--config", required=True, help="scenario JSON path")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override a config key (dotted paths allowed, JSON values)",
        )
        p.add_argument("--seed", type=int, help="override init_seed")
        p.add_argument("--log-every", type=int, help="override log_every")
        if with_out:
            p.add_argument("--out", required=True, help="output directory")

    p_run = sub.add_parser("run", help="simulate a scenario to an output dir")
    add_config_opts(p_run, with_out=True)
    p_run.set_defaults(func=cmd_run)

    p_check = sub.add_parser("check", help="gradient/reduction/witness checks")
    add_config_opts(p_check)
    p_check.add_argument("--samples", type=int, default=25)
    p_check.add_argument("--fd-step", type=float, default=1e-5)
    p_check.set_defaults(func=cmd_check)

    p_cmp = sub.add_parser("compare", help="first divergence between two runs")
    p_cmp.add_argument("run_a", help="first run directory")
    p_cmp.add_argument("run_b", help="second run directory")
    p_cmp.add_argument("--tol", type=float, default=1e-12)
    p_cmp.set_defaults(func=cmd_compare)

    p_wit = sub.add_parser("witness", help="divergence witness for a scenario")
    add_config_opts(p_wit)
    p_wit.add_argument(
        "--alt-w",
        metavar="JSON",
        help="law-state overrides, e.g. '{\"program_counter\": 1}'",
    )
    p_wit.add_argument("--threshold", type=float, default=1e-2)
    p_wit.add_argument("--out", help="write both trajectories under this dir")
    p_wit.set_defaults(func=cmd_witness)

    p_sweep = sub.add_parser("sweep", help="run a grid of config overrides")
    add_config_opts(p_sweep, with_out=True)
    p_sweep.add_argument(
        "--grid", required=True,
        help="path to a JSON file holding a list of override objects",
    )
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as e:
        print(f"divergence: {e}", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    raise SystemExit(main())
