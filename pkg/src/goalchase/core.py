"""Scenario configuration, the controlled state, and trajectory records.

A scenario fixes the probe dimension m, a list of parameter slots (each
interpreted by a bridge family), the controller knobs, the rewrite law,
and the run length.  Configurations serialize to JSON with the key set
{m, slots, init_seed, eta, mu, drift, probe_mode, probes, K, law, steps,
log_every, snapshot_every}; equal configurations always reproduce the
same run byte for byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .bridge import BridgeFamily
from .expr import EquationPairList, GrammarError, parse_sequence, seq_to_text
from .goallaw import GRAMMAR_WALK, IDENTITY_LAW, LAW_KINDS, SCHEDULE, LawSpec
from .prng import rng_from_words, rng_to_words

FIXED_SET = "fixed_set"
RESAMPLE = "resample"
PROBE_MODES = (FIXED_SET, RESAMPLE)

_U64 = 1 << 64

__all__ = [
    "FIXED_SET",
    "RESAMPLE",
    "PROBE_MODES",
    "ConfigError",
    "DivergenceError",
    "SlotState",
    "ScenarioConfig",
    "TrajectoryRecord",
    "config_from_json",
    "config_from_json_str",
    "init_state",
]


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the key path."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class DivergenceError(RuntimeError):
    """A state, gradient, or recorded quantity stopped being finite."""

    def __init__(self, message: str, step: int | None = None):
        self.step = step
        super().__init__(message)


# --- state -----------------------------------------------------------------


@dataclass
class SlotState:
    """Controlled state: parameter slots plus controller-private values.

    `slots` are the adjustable parameter vectors.  `momentum`, `rng_words`
    and `probe_cursor` are the controller's own memory (velocity buffer and
    probe-resampling PRNG words); `probe` is the current probe vector.
    """

    slots: list
    momentum: list
    rng_words: np.ndarray
    probe: np.ndarray
    probe_cursor: int = 0

    def copy(self) -> "SlotState":
        return SlotState(
            [s.copy() for s in self.slots],
            [v.copy() for v in self.momentum],
            self.rng_words.copy(),
            self.probe.copy(),
            self.probe_cursor,
        )

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(s)) for s in self.slots) and all(
            np.all(np.isfinite(v)) for v in self.momentum
        ) and bool(np.all(np.isfinite(self.probe)))


# --- configuration ---------------------------------------------------------


@dataclass
class ScenarioConfig:
    m: int
    slot_specs: list
    init_seed: int
    eta: float
    law: LawSpec
    steps: int
    mu: float = 0.0
    drift: float = 0.0
    probe_mode: str = FIXED_SET
    probes: list = field(default_factory=list)
    K: int = 1
    log_every: int = 1
    snapshot_every: int = 0

    @property
    def arities(self) -> tuple:
        return tuple(f.arity for f in self.slot_specs)

    def to_json_obj(self) -> dict:
        obj = {
            "m": self.m,
            "slots": [f.to_json() for f in self.slot_specs],
            "init_seed": self.init_seed,
            "eta": self.eta,
            "mu": self.mu,
            "drift": self.drift,
            "probe_mode": self.probe_mode,
        }
        if self.probe_mode == FIXED_SET:
            obj["probes"] = [[float(x) for x in p] for p in self.probes]
        obj.update(
            {
                "K": self.K,
                "law": self.law.to_json(),
                "steps": self.steps,
                "log_every": self.log_every,
                "snapshot_every": self.snapshot_every,
            }
        )
        return obj

    def to_json_str(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2) + "\n"


_CONFIG_KEYS = {
    "m",
    "slots",
    "init_seed",
    "eta",
    "mu",
    "drift",
    "probe_mode",
    "probes",
    "K",
    "law",
    "steps",
    "log_every",
    "snapshot_every",
}


def _require_int(obj, key, lo=None, hi=None, default=None, path=None):
    path = path or key
    if key not in obj:
        if default is None:
            raise ConfigError(path, "missing required key")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(path, f"expected integer, got {val!r}")
    if lo is not None and val < lo:
        raise ConfigError(path, f"must be >= {lo}, got {val}")
    if hi is not None and val >= hi:
        raise ConfigError(path, f"must be < {hi}, got {val}")
    return val


def _require_float(obj, key, default=None):
    if key not in obj:
        if default is None:
            raise ConfigError(key, "missing required key")
        return default
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(key, f"expected number, got {val!r}")
    return float(val)


def _parse_pairs(obj, key: str, arities) -> EquationPairList:
    if not isinstance(obj, list):
        raise ConfigError(key, f"expected a list of [left, right] pairs")
    try:
        pairs = EquationPairList.from_json(obj)
    except (GrammarError, TypeError, ValueError) as e:
        raise ConfigError(key, str(e)) from e
    for k, (left, right) in enumerate(pairs.pairs):
        for side, seq in (("0", left), ("1", right)):
            try:
                parse_sequence(seq, arities)
            except GrammarError as e:
                raise ConfigError(
                    f"{key}[{k}][{side}]", f"{seq_to_text(seq)}: {e}"
                ) from e
    return pairs


def _parse_law(obj, arities) -> LawSpec:
    if not isinstance(obj, dict):
        raise ConfigError("law", f"expected an object, got {obj!r}")
    kind = obj.get("kind")
    if kind not in LAW_KINDS:
        raise ConfigError("law.kind", f"expected one of {LAW_KINDS}, got {kind!r}")
    allowed = {
        IDENTITY_LAW: {"kind", "pairs"},
        SCHEDULE: {"kind", "period", "program"},
        GRAMMAR_WALK: {"kind", "pairs", "law_seed", "mutation_weights"},
    }[kind]
    extra = set(obj) - allowed
    if extra:
        raise ConfigError(
            f"law.{sorted(extra)[0]}", f"key not allowed for kind {kind!r}"
        )
    if kind == SCHEDULE:
        period = _require_int(obj, "period", lo=1, default=1, path="law.period")
        program_obj = obj.get("program")
        if not isinstance(program_obj, list) or not program_obj:
            raise ConfigError("law.program", "expected a non-empty list")
        program = tuple(
            _parse_pairs(entry, f"law.program[{j}]", arities)
            for j, entry in enumerate(program_obj)
        )
        return LawSpec(kind=SCHEDULE, arities=arities, program=program,
                       period=period)
    if "pairs" not in obj:
        raise ConfigError("law.pairs", "missing required key")
    pairs = _parse_pairs(obj["pairs"], "law.pairs", arities)
    if kind == IDENTITY_LAW:
        return LawSpec(kind=IDENTITY_LAW, arities=arities, pairs=pairs)
    if not pairs.pairs:
        raise ConfigError("law.pairs", "grammar_walk needs at least one pair")
    seed = _require_int(obj, "law_seed", lo=0, hi=_U64, default=0,
                        path="law.law_seed")
    weights = obj.get("mutation_weights", [1.0, 1.0, 1.0, 1.0])
    if (
        not isinstance(weights, list)
        or len(weights) != 4
        or not all(isinstance(w, (int, float)) and not isinstance(w, bool)
                   and w >= 0 for w in weights)
    ):
        raise ConfigError(
            "law.mutation_weights", f"expected 4 non-negative numbers"
        )
    if sum(weights) <= 0:
        raise ConfigError("law.mutation_weights", "weights must not all be zero")
    return LawSpec(
        kind=GRAMMAR_WALK,
        arities=arities,
        pairs=pairs,
        law_seed=seed,
        mutation_weights=tuple(float(w) for w in weights),
    )


def config_from_json(obj: dict) -> ScenarioConfig:
    """Build and validate a ScenarioConfig from a parsed JSON object."""
    if not isinstance(obj, dict):
        raise ConfigError("<root>", f"expected an object, got {type(obj).__name__}")
    extra = set(obj) - _CONFIG_KEYS
    if extra:
        raise ConfigError(sorted(extra)[0], "unknown key")
    m = _require_int(obj, "m", lo=1)
    slots_obj = obj.get("slots")
    if not isinstance(slots_obj, list) or not slots_obj:
        raise ConfigError("slots", "expected a non-empty list of slot specs")
    families = []
    for i, spec in enumerate(slots_obj):
        if not isinstance(spec, dict):
            raise ConfigError(f"slots[{i}]", f"expected an object, got {spec!r}")
        try:
            fam = BridgeFamily.from_json(spec)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"slots[{i}]", str(e)) from e
        if fam.m != m:
            raise ConfigError(f"slots[{i}].m", f"must equal m={m}, got {fam.m}")
        families.append(fam)
    init_seed = _require_int(obj, "init_seed", lo=0, hi=_U64)
    eta = _require_float(obj, "eta")
    if not eta > 0:
        raise ConfigError("eta", f"must be > 0, got {eta}")
    mu = _require_float(obj, "mu", default=0.0)
    if not 0.0 <= mu < 1.0:
        raise ConfigError("mu", f"must be in [0, 1), got {mu}")
    drift = _require_float(obj, "drift", default=0.0)
    if not 0.0 <= drift < 1.0:
        raise ConfigError("drift", f"must be in [0, 1), got {drift}")
    probe_mode = obj.get("probe_mode", FIXED_SET)
    if probe_mode not in PROBE_MODES:
        raise ConfigError(
            "probe_mode", f"expected one of {PROBE_MODES}, got {probe_mode!r}"
        )
    probes = []
    if probe_mode == FIXED_SET:
        probes_obj = obj.get("probes")
        if not isinstance(probes_obj, list) or not probes_obj:
            raise ConfigError("probes", "fixed_set needs a non-empty probe list")
        for j, p in enumerate(probes_obj):
            if not isinstance(p, list) or len(p) != m:
                raise ConfigError(f"probes[{j}]", f"expected {m} numbers")
            probes.append(np.asarray(p, dtype=float))
            if not np.all(np.isfinite(probes[-1])):
                raise ConfigError(f"probes[{j}]", "entries must be finite")
    elif "probes" in obj:
        raise ConfigError("probes", "not allowed with probe_mode=resample")
    arities = tuple(f.arity for f in families)
    law = _parse_law(obj.get("law"), arities)
    steps = _require_int(obj, "steps", lo=0)
    K = _require_int(obj, "K", lo=1, default=1)
    log_every = _require_int(obj, "log_every", lo=1, default=1)
    snapshot_every = _require_int(obj, "snapshot_every", lo=0, default=0)
    return ScenarioConfig(
        m=m,
        slot_specs=families,
        init_seed=init_seed,
        eta=eta,
        law=law,
        steps=steps,
        mu=mu,
        drift=drift,
        probe_mode=probe_mode,
        probes=probes,
        K=K,
        log_every=log_every,
        snapshot_every=snapshot_every,
    )


def config_from_json_str(text: str) -> ScenarioConfig:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("<json>", str(e)) from e
    return config_from_json(obj)


# --- initialization --------------------------------------------------------


def init_state(config: ScenarioConfig) -> SlotState:
    """Seeded initial state: slot entries uniform in [-0.5, 0.5], zero
    momentum, probe taken from the probe set (or drawn) per probe_mode."""
    gen = np.random.Generator(np.random.PCG64(config.init_seed))
    slots = [
        gen.uniform(-0.5, 0.5, size=fam.param_count)
        for fam in config.slot_specs
    ]
    momentum = [np.zeros_like(s) for s in slots]
    if config.probe_mode == FIXED_SET:
        probe = config.probes[0].copy()
        cursor = 0
        words = rng_to_words(gen)
    else:
        probe = gen.uniform(-1.0, 1.0, size=config.m)
        cursor = 0
        words = rng_to_words(gen)
    return SlotState(slots, momentum, words, probe, cursor)


# --- records ----------------------------------------------------------------


@dataclass
class TrajectoryRecord:
    """One logged point: counters, loss, active goals, and a state digest."""

    t: int
    T: int
    loss: float
    pairs: list
    x_norms: list
    d: list
    macro: bool = False
    slots: list | None = None

    def to_json_obj(self) -> dict:
        obj = {
            "t": self.t,
            "T": self.T,
            "loss": self.loss,
            "pairs": self.pairs,
            "x_norms": self.x_norms,
            "d": self.d,
            "macro": self.macro,
        }
        if self.slots is not None:
            obj["slots"] = self.slots
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TrajectoryRecord":
        return cls(
            t=obj["t"],
            T=obj["T"],
            loss=obj["loss"],
            pairs=obj["pairs"],
            x_norms=obj["x_norms"],
            d=obj["d"],
            macro=obj.get("macro", False),
            slots=obj.get("slots"),
        )
