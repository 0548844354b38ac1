"""The two-timescale run loop.

Micro-step t advances the controller; once every K micro-steps (when the
pre-step counter is a positive multiple of K) the rewrite law fires first
and the controller then descends the rewritten goals within the same
step, so the goal change precedes the parameter change it influences.
Records are written every `log_every` steps plus immediately before and
after every law event, and are strictly ordered by t with T = t // K.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .core import (
    FIXED_SET,
    DivergenceError,
    ScenarioConfig,
    SlotState,
    TrajectoryRecord,
    init_state,
)
from .feedback import control_step, loss
from .goallaw import LawState, initial_law_state, step_law

__all__ = [
    "SimState",
    "new_sim",
    "step",
    "run",
    "make_record",
    "record_to_json_line",
    "write_summary_csv",
    "pair_digest",
]


@dataclass
class SimState:
    config: ScenarioConfig
    sub: SlotState
    law: LawState
    t: int = 0
    T: int = 0


def new_sim(config: ScenarioConfig) -> SimState:
    return SimState(config, init_state(config), initial_law_state(config.law))


def _law_fires(sim: SimState) -> bool:
    return sim.t > 0 and sim.t % sim.config.K == 0


def step(sim: SimState) -> SimState:
    """One micro-step; fires the law first when the boundary is reached."""
    cfg = sim.config
    law = sim.law
    if _law_fires(sim):
        law = step_law(cfg.law, law)
    probes = cfg.probes if cfg.probe_mode == FIXED_SET else [sim.sub.probe]
    try:
        sub = control_step(
            sim.sub, law.cpair, cfg.slot_specs, probes,
            cfg.eta, cfg.mu, cfg.drift, cfg.probe_mode,
        )
    except DivergenceError as e:
        raise DivergenceError(f"{e} at step {sim.t + 1}", step=sim.t + 1) from e
    t = sim.t + 1
    return SimState(cfg, sub, law, t, t // cfg.K)


def make_record(sim: SimState, macro: bool = False) -> TrajectoryRecord:
    """Record the current state; raises DivergenceError on non-finite values."""
    cfg = sim.config
    probes = cfg.probes if cfg.probe_mode == FIXED_SET else [sim.sub.probe]
    with np.errstate(over="ignore", invalid="ignore"):
        val = loss(sim.law.cpair, cfg.slot_specs, sim.sub.slots, probes)
    norms = [float(np.linalg.norm(s)) for s in sim.sub.slots]
    if not np.isfinite(val) or not all(np.isfinite(n) for n in norms):
        raise DivergenceError(
            f"non-finite loss or slot norm at step {sim.t}", step=sim.t
        )
    snapshot = None
    if (cfg.snapshot_every > 0 and sim.t % cfg.snapshot_every == 0) or (
        sim.t == cfg.steps
    ):
        snapshot = [[float(x) for x in s] for s in sim.sub.slots]
    return TrajectoryRecord(
        t=sim.t,
        T=sim.T,
        loss=val,
        pairs=sim.law.cpair.to_json(),
        x_norms=norms,
        d=[float(x) for x in sim.sub.probe],
        macro=macro,
        slots=snapshot,
    )


def record_to_json_line(rec: TrajectoryRecord) -> str:
    return json.dumps(rec.to_json_obj(), separators=(",", ":"))


def run(
    config: ScenarioConfig, jsonl_path=None, law_state: LawState | None = None
) -> tuple[list, SimState]:
    """Run `config.steps` micro-steps, returning (records, final SimState).

    When `jsonl_path` is given, every record is written as soon as it is
    made, so a diverging run still leaves the partial trajectory on disk.
    `law_state` replaces the configured initial law state (used by
    divergence witnesses; the controller state is untouched).
    """
    sim = new_sim(config)
    if law_state is not None:
        sim = SimState(config, sim.sub, law_state.copy())
    records: list[TrajectoryRecord] = []
    writer = open(jsonl_path, "w") if jsonl_path is not None else None
    last_emitted = -1

    def emit(rec: TrajectoryRecord):
        nonlocal last_emitted
        records.append(rec)
        last_emitted = rec.t
        if writer is not None:
            writer.write(record_to_json_line(rec) + "\n")

    try:
        emit(make_record(sim))
        for _ in range(config.steps):
            fires = _law_fires(sim)
            if fires and last_emitted != sim.t:
                emit(make_record(sim))
            sim = step(sim)
            due = fires or sim.t % config.log_every == 0 or sim.t == config.steps
            if due and last_emitted != sim.t:
                emit(make_record(sim, macro=fires))
    finally:
        if writer is not None:
            writer.close()
    return records, sim


def pair_digest(pairs_json: list) -> str:
    text = json.dumps(pairs_json, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:12]


def write_summary_csv(records: list, path) -> None:
    """Summary table with columns t, T, loss, pair_digest."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "T", "loss", "pair_digest"])
        for rec in records:
            w.writerow([rec.t, rec.T, repr(rec.loss), pair_digest(rec.pairs)])
