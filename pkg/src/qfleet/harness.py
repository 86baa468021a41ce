"""Experiment harness: seeded runs, metric streams, benchmark studies.

Every artifact is a pure function of (configuration, seed): metric files are
line-delimited JSON with a fixed key order and no timestamps, so re-running a
command reproduces the bytes exactly.
"""
from __future__ import annotations

import dataclasses
import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import baselines, qmac, vqc
from .baselines import SCHEMES, ClassicalActor, ClassicalCritic, DenseNet, RandomWalkPolicy
from .env import FactoryConfig, FactoryEnv, PrecisionSchedule, ScenarioError
from .qmac import Adam, QuantumActor, QuantumCritic, TrainConfig
from .qsim import Gate, GateSpec, apply_circuit, new_zero_state


class ConfigFileError(ValueError):
    """Bad experiment configuration file or overrides."""


class ReportError(ValueError):
    """Metric file failed to parse."""


METRIC_COLUMNS = (
    "total_reward",
    "precision_pct",
    "processing_minutes",
    "avg_load_amr",
    "avg_load_warehouse",
    "overflow_amr",
    "overflow_warehouse",
    "underflow_amr",
    "underflow_warehouse",
)


@dataclass(frozen=True)
class MetricsRecord:
    """One metric-stream line: an episode's aggregates plus provenance."""

    scheme: str
    seed: int
    phase: str  # "train" or "eval"
    epoch: int
    total_reward: float
    precision_pct: float
    processing_minutes: float
    avg_load_amr: float
    avg_load_warehouse: float
    overflow_amr: float
    overflow_warehouse: float
    underflow_amr: float
    underflow_warehouse: float

    @classmethod
    def from_stats(cls, stats, scheme, seed, phase, epoch):
        return cls(scheme, seed, phase, epoch, **dataclasses.asdict(stats))

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self))

    @classmethod
    def from_json(cls, line: str) -> "MetricsRecord":
        return cls(**json.loads(line))


def _config_from_dict(cls, raw, label):
    field_names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(raw) - field_names
    if unknown:
        raise ConfigFileError(f"unknown {label} keys: {sorted(unknown)}")
    tuple_fields = {
        f.name for f in dataclasses.fields(cls) if f.type in ("tuple", tuple)
    }
    coerced = {k: tuple(v) if k in tuple_fields else v for k, v in raw.items()}
    try:
        return cls(**coerced)
    except (TypeError, ValueError) as exc:
        raise ConfigFileError(f"bad {label} configuration: {exc}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = "proposed"
    seeds: tuple = (0,)
    out_dir: str = "runs"
    scenario: str | None = None
    env: FactoryConfig = dataclasses.field(default_factory=FactoryConfig)
    train: TrainConfig = dataclasses.field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigFileError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        if not self.seeds:
            raise ConfigFileError("at least one seed is required")
        if self.scenario is not None and not Path(self.scenario).exists():
            raise ConfigFileError(f"scenario file {self.scenario} does not exist")

    @classmethod
    def load(cls, path=None, scheme=None, seed=None, out_dir=None) -> "ExperimentConfig":
        """Config file plus command-line overrides."""
        raw = {}
        if path is not None:
            try:
                raw = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigFileError(f"cannot read config {path}: {exc}") from None
            if not isinstance(raw, dict):
                raise ConfigFileError(f"config {path} must be a JSON object")
        unknown = set(raw) - {"scheme", "seeds", "out_dir", "scenario", "env", "train"}
        if unknown:
            raise ConfigFileError(f"unknown config keys: {sorted(unknown)}")
        env = _config_from_dict(FactoryConfig, raw.get("env", {}), "env")
        train = _config_from_dict(TrainConfig, raw.get("train", {}), "train")
        return cls(
            scheme=scheme if scheme is not None else raw.get("scheme", "proposed"),
            seeds=(seed,) if seed is not None else tuple(raw.get("seeds", (0,))),
            out_dir=out_dir if out_dir is not None else raw.get("out_dir", "runs"),
            scenario=raw.get("scenario"),
            env=env,
            train=train,
        )


def build_agents(scheme: str, env_config: FactoryConfig, train_config: TrainConfig, rng):
    if scheme == "proposed":
        return qmac.build_quantum_agents(env_config, train_config, rng)
    return baselines.build_baseline(scheme, env_config, train_config, rng)


def _agent_snapshot(agent):
    if agent is None:
        return None
    if isinstance(agent, (QuantumActor, QuantumCritic)):
        return {
            "kind": "quantum",
            "beta": agent.beta,
            "params": agent.params.tolist(),
            "layout": agent.layout.describe(),
        }
    if isinstance(agent, (ClassicalActor, ClassicalCritic)):
        return {
            "kind": "classical",
            "sizes": list(agent.net.sizes),
            "activations": list(agent.net.activations),
            "params": agent.params.tolist(),
        }
    return {"kind": "random", "num_actions": agent.num_actions}


def save_snapshot(path, scheme, env_config, actor, critic) -> None:
    payload = {
        "scheme": scheme,
        "env": dataclasses.asdict(env_config),
        "actor": _agent_snapshot(actor),
        "critic": _agent_snapshot(critic),
    }
    Path(path).write_text(json.dumps(payload, indent=1))


def _restore_agent(entry, role, env_config):
    if entry is None:
        return None
    if entry["kind"] == "quantum":
        layout = (
            qmac.actor_layout_for(env_config.num_actions)
            if role == "actor"
            else vqc.default_layout("critic")
        )
        params = np.asarray(entry["params"], dtype=np.float64)
        if params.size != layout.parameter_count:
            raise ConfigFileError(
                f"snapshot {role} has {params.size} parameters, layout needs "
                f"{layout.parameter_count}"
            )
        cls = QuantumActor if role == "actor" else QuantumCritic
        return cls(layout, params, entry["beta"])
    if entry["kind"] == "classical":
        net = DenseNet(entry["sizes"], entry["activations"], np.random.default_rng(0))
        net.set_params(np.asarray(entry["params"], dtype=np.float64))
        return ClassicalActor(net) if role == "actor" else ClassicalCritic(net)
    return RandomWalkPolicy(entry["num_actions"])


def load_snapshot(path):
    """(scheme, env config, actor, critic) from a snapshot file."""
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigFileError(f"cannot read snapshot {path}: {exc}") from None
    env_config = _config_from_dict(FactoryConfig, payload["env"], "env")
    actor = _restore_agent(payload["actor"], "actor", env_config)
    critic = _restore_agent(payload["critic"], "critic", env_config)
    return payload["scheme"], env_config, actor, critic


def write_metrics(path, records) -> None:
    Path(path).write_text("".join(r.to_json() + "\n" for r in records))


def read_metrics(path):
    records = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(MetricsRecord.from_json(line))
        except (json.JSONDecodeError, TypeError) as exc:
            raise ReportError(f"{path}:{lineno}: bad metrics line ({exc})") from None
    return records


def run_experiment(config: ExperimentConfig):
    """Train (and greedily evaluate) each seed; returns written file paths."""
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    schedule = (
        PrecisionSchedule.from_file(config.scenario)
        if config.scenario is not None
        else PrecisionSchedule.always_random()
    )
    written = []
    for seed in config.seeds:
        init_rng, train_rng, eval_rng = (
            np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3)
        )
        env = FactoryEnv(config.env, schedule)
        actor, critic = build_agents(config.scheme, config.env, config.train, init_rng)
        result = qmac.train(env, actor, critic, config.train, train_rng)
        records = [
            MetricsRecord.from_stats(stats, config.scheme, seed, "train", epoch)
            for epoch, stats in enumerate(result.history)
        ]
        eval_stats = qmac.greedy_evaluation(env, actor, eval_rng, config.train.eval_episodes)
        records.extend(
            MetricsRecord.from_stats(stats, config.scheme, seed, "eval", i)
            for i, stats in enumerate(eval_stats)
        )
        metrics_path = out_dir / f"{config.scheme}-seed{seed}-metrics.jsonl"
        write_metrics(metrics_path, records)
        written.append(metrics_path)
        if actor.num_params > 0:
            snap_path = out_dir / f"{config.scheme}-seed{seed}-snapshot.json"
            save_snapshot(snap_path, config.scheme, config.env, actor, critic)
            written.append(snap_path)
    return written


def evaluate_snapshot(snapshot_path, episodes, seed, env_config=None):
    """Greedy evaluation of a saved policy; returns MetricsRecord list."""
    scheme, snap_env, actor, _ = load_snapshot(snapshot_path)
    env = FactoryEnv(env_config if env_config is not None else snap_env)
    rng = np.random.default_rng(seed)
    stats = qmac.greedy_evaluation(env, actor, rng, episodes)
    return [
        MetricsRecord.from_stats(s, scheme, seed, "eval", i) for i, s in enumerate(stats)
    ]


# --- encoding mini-benchmark -------------------------------------------------

ENCODING_SCHEMES = ("one_var", "two_var", "four_var")
# A set bit becomes an eighth turn. Larger mappings alias bit pairs under the
# two-variable encoding: RX(pi/2)|0> is already a Y eigenstate (the following
# RY drops out), and RX(pi) then RY(pi) returns to |0> up to phase.
ENCODING_BIT_ANGLE = np.pi / 4
BIT_PATTERNS = tuple(itertools.product((0, 1), repeat=4))
TARGET_MAX = sum(2.0 ** -i for i in range(4))  # 1.875


def bit_target(bits) -> float:
    """y = sum_i bits[i] * 2^(-i), the 4-bit-to-scalar regression target."""
    return float(sum(b * 2.0 ** -i for i, b in enumerate(bits)))


def encode_bits(scheme: str, bits):
    angles = [b * ENCODING_BIT_ANGLE for b in bits]
    if scheme == "one_var":
        return vqc.encode_actor_observation(angles, 4)
    if scheme == "two_var":
        return vqc.encode_critic_state(angles, 2)
    if scheme == "four_var":
        gates = [
            GateSpec(Gate.RZ, 0, angle=angles[0]),
            GateSpec(Gate.RZ, 0, angle=angles[1]),
            GateSpec(Gate.RY, 0, angle=angles[2]),
            GateSpec(Gate.RY, 0, angle=angles[3]),
        ]
        return apply_circuit(new_zero_state(1), gates)
    raise ValueError(f"unknown encoding scheme {scheme!r}")


def encoding_layout(scheme: str, parameter_budget: int):
    qubits = {"one_var": 4, "two_var": 2, "four_var": 1}[scheme]
    return vqc.layered_layout(qubits, parameter_budget, (0,))


def encoding_benchmark(parameter_budget=50, iterations=500, seeds=(0, 1, 2, 3, 4), learning_rate=0.05):
    """Train one regressor per encoding scheme and seed on the 16 exhaustive
    bit patterns; returns {scheme, seed, mse} rows."""
    targets = np.array([bit_target(bits) for bits in BIT_PATTERNS])
    rows = []
    for scheme in ENCODING_SCHEMES:
        layout = encoding_layout(scheme, parameter_budget)
        encoded = [encode_bits(scheme, bits) for bits in BIT_PATTERNS]
        for seed in seeds:
            rng = np.random.default_rng(seed)
            params = rng.uniform(-np.pi / 8, np.pi / 8, layout.parameter_count)
            opt = Adam(layout.parameter_count, learning_rate)
            for _ in range(iterations):
                grad = np.zeros(layout.parameter_count)
                for enc, target in zip(encoded, targets):
                    z = vqc.evaluate_observables(layout, params, enc)[0]
                    pred = (z + 1.0) * (TARGET_MAX / 2)
                    upstream = 2.0 * (pred - target) * (TARGET_MAX / 2) / len(encoded)
                    grad += vqc.parameter_shift_gradient(layout, params, enc, [upstream])
                params = opt.step(params, grad)
            preds = np.array(
                [
                    (vqc.evaluate_observables(layout, params, enc)[0] + 1.0) * (TARGET_MAX / 2)
                    for enc in encoded
                ]
            )
            rows.append(
                {"scheme": scheme, "seed": int(seed), "mse": float(np.mean((preds - targets) ** 2))}
            )
    return rows


# --- quality-robustness scenario ---------------------------------------------


def robustness_scenario(env_config: FactoryConfig, schedule: PrecisionSchedule, actor, iterations=100, seed=0):
    """Greedy rollouts under a phased precision schedule; returns the
    per-minute mean precision series averaged over iterations."""
    horizon_minutes = env_config.episode_length * env_config.minutes_per_step
    last_start = schedule.phases[-1][0]
    if last_start >= horizon_minutes:
        raise ScenarioError(
            f"phase starting at minute {last_start} lies outside the "
            f"{horizon_minutes}-minute horizon"
        )
    env = FactoryEnv(env_config, schedule)
    rng = np.random.default_rng(seed)
    per_step = np.zeros((iterations, env_config.episode_length))
    for it in range(iterations):
        state, observations = env.reset(rng)
        for t in range(env_config.episode_length):
            actions = [
                qmac.select_action(actor.distribution(observations[n]), "greedy")
                for n in range(env_config.num_agents)
            ]
            outcome = env.step(state, np.asarray(actions), rng)
            per_step[it, t] = outcome.metrics.precision_pct
            state, observations = outcome.state, outcome.observations
    means = per_step.mean(axis=0)
    return [
        {"minute": t * env_config.minutes_per_step, "precision_pct": float(means[t])}
        for t in range(env_config.episode_length)
    ]


# --- reporting ----------------------------------------------------------------


def aggregate_report(paths):
    """Per-scheme mean/std of every metric column over all records."""
    records = []
    for path in paths:
        records.extend(read_metrics(path))
    if not records:
        raise ReportError("no metric records found")
    rows = []
    for scheme in sorted({r.scheme for r in records}):
        group = [r for r in records if r.scheme == scheme]
        row = {"scheme": scheme, "records": len(group)}
        for col in METRIC_COLUMNS:
            values = np.array([getattr(r, col) for r in group])
            row[f"{col}_mean"] = float(values.mean())
            row[f"{col}_std"] = float(values.std())
        rows.append(row)
    return rows


def summary_table(paths):
    """Table-style evaluation summary: per scheme, the mean of each metric
    over evaluation records (falling back to all records)."""
    records = []
    for path in paths:
        records.extend(read_metrics(path))
    if not records:
        raise ReportError("no metric records found")
    rows = []
    for scheme in sorted({r.scheme for r in records}):
        group = [r for r in records if r.scheme == scheme]
        evals = [r for r in group if r.phase == "eval"] or group
        row = {"scheme": scheme}
        for col in METRIC_COLUMNS:
            row[col] = float(np.mean([getattr(r, col) for r in evals]))
        rows.append(row)
    return rows


def write_csv(path, rows) -> None:
    import csv

    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
